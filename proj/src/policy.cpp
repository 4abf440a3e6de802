#include "commentrank/policy.hpp"

#include <algorithm>
#include <numeric>

#include "commentrank/rng.hpp"

namespace commentrank {

namespace {

std::vector<double> ordering_keys(const Discussion& d, const PolicyDescriptor& policy) {
  std::vector<double> key(d.comments.size());
  for (std::size_t i = 0; i < d.comments.size(); ++i) {
    const Comment& c = d.comments[i];
    switch (policy.ordering) {
      case Ordering::Random: key[i] = 0.0; break;
      case Ordering::Upvotes: key[i] = c.upvotes; break;
      case Ordering::RelativeVotes: key[i] = c.relative_votes(); break;
      case Ordering::Downvotes: key[i] = c.downvotes; break;
      case Ordering::RevDownvotes: key[i] = -static_cast<double>(c.downvotes); break;
      case Ordering::Chronological: key[i] = -static_cast<double>(c.timestamp); break;
      case Ordering::RevChronological: key[i] = static_cast<double>(c.timestamp); break;
      case Ordering::ExternalScore: {
        auto it = c.precomputed.find(policy.external_column);
        if (it == c.precomputed.end())
          throw Error("comment '" + c.comment_id + "' is missing external score column '" +
                      policy.external_column + "'");
        key[i] = it->second;
        break;
      }
    }
  }
  return key;
}

}  // namespace

std::vector<int> order_primary(const Discussion& discussion, const PolicyDescriptor& policy,
                               std::uint64_t stream_seed) {
  const std::vector<double> key = ordering_keys(discussion, policy);
  std::vector<int> idx(discussion.comments.size());
  std::iota(idx.begin(), idx.end(), 0);
  // Stable from canonical chronological order, descending by key.
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return key[a] > key[b]; });

  Rng rng(stream_seed);
  std::size_t lo = 0;
  while (lo < idx.size()) {
    std::size_t hi = lo + 1;
    while (hi < idx.size() && key[idx[hi]] == key[idx[lo]]) ++hi;
    if (hi - lo > 1) rng.shuffle(idx.begin() + lo, idx.begin() + hi);
    lo = hi;
  }
  return idx;
}

DisplayOrdering apply_reply_structure(const Discussion& discussion,
                                      const std::vector<int>& ranked, ReplyMode mode) {
  const int n = discussion.n();
  DisplayOrdering out;
  out.policy.reply = mode;
  switch (mode) {
    case ReplyMode::Loose:
      out.order = ranked;
      out.visible = n;
      break;
    case ReplyMode::Hidden: {
      for (int i : ranked)
        if (discussion.is_root(i)) out.order.push_back(i);
      out.visible = static_cast<int>(out.order.size());
      // Hidden replies in chronological order == canonical index order.
      for (int i = 0; i < n; ++i)
        if (!discussion.is_root(i)) out.order.push_back(i);
      break;
    }
    case ReplyMode::Trees: {
      std::vector<int> stack;
      for (int i : ranked) {
        if (!discussion.is_root(i)) continue;
        stack.push_back(i);
        while (!stack.empty()) {
          const int cur = stack.back();
          stack.pop_back();
          out.order.push_back(cur);
          const auto& kids = discussion.tree[cur].children;
          for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back(*it);
        }
      }
      out.visible = n;
      break;
    }
  }
  return out;
}

DisplayOrdering apply_pinning(const Discussion& discussion, DisplayOrdering display,
                              PinMode mode) {
  display.policy.pin = mode;
  if (mode == PinMode::Unpinned) return display;

  bool any_pinned = false;
  for (int r : discussion.roots) any_pinned |= discussion.comments[r].pinned;
  if (!any_pinned) return display;

  // Pinned comments are roots, so they live in the visible prefix in every
  // reply mode. In Trees mode a root carries its contiguous subtree block.
  std::vector<int> pinned, rest;
  pinned.reserve(display.order.size());
  rest.reserve(display.order.size());
  std::size_t i = 0;
  const auto visible = static_cast<std::size_t>(display.visible);
  while (i < visible) {
    std::size_t block_end = i + 1;
    if (display.policy.reply == ReplyMode::Trees)
      block_end = i + static_cast<std::size_t>(discussion.tree[display.order[i]].subtree_size);
    auto& dst = discussion.comments[display.order[i]].pinned ? pinned : rest;
    dst.insert(dst.end(), display.order.begin() + i, display.order.begin() + block_end);
    i = block_end;
  }
  std::copy(rest.begin(), rest.end(), std::back_inserter(pinned));
  std::copy(display.order.begin() + visible, display.order.end(), std::back_inserter(pinned));
  display.order = std::move(pinned);
  return display;
}

DisplayOrdering make_display(const Discussion& discussion, const PolicyDescriptor& policy,
                             std::uint64_t global_seed) {
  const std::uint64_t stream =
      derive_seed(global_seed, discussion.discussion_id, policy.id(), policy.seed_salt);
  DisplayOrdering out = apply_reply_structure(
      discussion, order_primary(discussion, policy, stream), policy.reply);
  out = apply_pinning(discussion, std::move(out), policy.pin);
  out.policy = policy;
  out.stream_seed = stream;
  return out;
}

std::vector<PolicyDescriptor> enumerate_policies(
    const std::vector<std::string>& external_columns) {
  if (external_columns.size() > 4)
    throw Error("at most 4 external score columns are supported");
  for (std::size_t i = 0; i < external_columns.size(); ++i)
    for (std::size_t j = i + 1; j < external_columns.size(); ++j)
      if (external_columns[i] == external_columns[j])
        throw Error("duplicate external score column '" + external_columns[i] + "'");

  std::vector<PolicyDescriptor> out;
  std::vector<PolicyDescriptor> bases;
  for (Ordering o : {Ordering::Random, Ordering::Upvotes, Ordering::RelativeVotes,
                     Ordering::Downvotes, Ordering::RevDownvotes, Ordering::Chronological,
                     Ordering::RevChronological}) {
    PolicyDescriptor p;
    p.ordering = o;
    bases.push_back(p);
  }
  for (const std::string& col : external_columns) {
    PolicyDescriptor p;
    p.ordering = Ordering::ExternalScore;
    p.external_column = col;
    bases.push_back(p);
  }
  for (const PolicyDescriptor& base : bases)
    for (PinMode pin : {PinMode::Unpinned, PinMode::Pinned})
      for (ReplyMode reply : {ReplyMode::Loose, ReplyMode::Hidden, ReplyMode::Trees}) {
        PolicyDescriptor p = base;
        p.pin = pin;
        p.reply = reply;
        out.push_back(p);
      }
  return out;
}

PolicyDescriptor parse_policy(std::string_view expr) {
  auto next_part = [&]() -> std::string_view {
    const std::size_t pos = expr.find('+');
    std::string_view part = expr.substr(0, pos);
    expr = pos == std::string_view::npos ? std::string_view{} : expr.substr(pos + 1);
    return part;
  };
  const std::string_view ord = next_part();
  const std::string_view pin = next_part();
  const std::string_view reply = next_part();
  if (ord.empty() || pin.empty() || reply.empty() || !expr.empty())
    throw Error("policy expression must be <ordering>+<pinned|unpinned>+<hidden|trees|loose>");

  PolicyDescriptor p;
  if (ord == "random") p.ordering = Ordering::Random;
  else if (ord == "upvotes") p.ordering = Ordering::Upvotes;
  else if (ord == "relvotes") p.ordering = Ordering::RelativeVotes;
  else if (ord == "downvotes") p.ordering = Ordering::Downvotes;
  else if (ord == "revdownvotes") p.ordering = Ordering::RevDownvotes;
  else if (ord == "chrono") p.ordering = Ordering::Chronological;
  else if (ord == "revchrono") p.ordering = Ordering::RevChronological;
  else if (ord.substr(0, 6) == "score:" && ord.size() > 6) {
    p.ordering = Ordering::ExternalScore;
    p.external_column = std::string(ord.substr(6));
  } else {
    throw Error("unknown primary ordering '" + std::string(ord) + "'");
  }

  if (pin == "pinned") p.pin = PinMode::Pinned;
  else if (pin == "unpinned") p.pin = PinMode::Unpinned;
  else throw Error("unknown pin mode '" + std::string(pin) + "'");

  if (reply == "loose") p.reply = ReplyMode::Loose;
  else if (reply == "hidden") p.reply = ReplyMode::Hidden;
  else if (reply == "trees") p.reply = ReplyMode::Trees;
  else throw Error("unknown reply mode '" + std::string(reply) + "'");
  return p;
}

}  // namespace commentrank
