#include "commentrank/model.hpp"

#include <algorithm>
#include <numeric>

namespace commentrank {

std::string ordering_token(Ordering o, const std::string& external_column) {
  switch (o) {
    case Ordering::Random: return "random";
    case Ordering::Upvotes: return "upvotes";
    case Ordering::RelativeVotes: return "relvotes";
    case Ordering::Downvotes: return "downvotes";
    case Ordering::RevDownvotes: return "revdownvotes";
    case Ordering::Chronological: return "chrono";
    case Ordering::RevChronological: return "revchrono";
    case Ordering::ExternalScore: return "score:" + external_column;
  }
  return "?";
}

std::string PolicyDescriptor::id() const {
  std::string s = ordering_token(ordering, external_column);
  s += pin == PinMode::Pinned ? "+pinned" : "+unpinned";
  switch (reply) {
    case ReplyMode::Loose: s += "+loose"; break;
    case ReplyMode::Hidden: s += "+hidden"; break;
    case ReplyMode::Trees: s += "+trees"; break;
  }
  return s;
}

Discussion build_discussion(std::vector<Comment> comments, Article article) {
  if (comments.empty()) throw Error("empty discussion: no comments");

  Discussion d;
  d.discussion_id = comments.front().discussion_id;
  d.article = std::move(article);
  if (!d.article.discussion_id.empty() && d.article.discussion_id != d.discussion_id)
    throw StructureError("article discussion_id '" + d.article.discussion_id +
                         "' does not match comments ('" + d.discussion_id + "')");

  for (const Comment& c : comments) {
    if (c.discussion_id != d.discussion_id)
      throw StructureError("comment '" + c.comment_id + "' belongs to discussion '" +
                           c.discussion_id + "', expected '" + d.discussion_id + "'");
    if (c.upvotes < 0 || c.downvotes < 0 || c.author_followers < 0)
      throw StructureError("comment '" + c.comment_id + "' has negative counts");
    if (c.timestamp < 0)
      throw StructureError("comment '" + c.comment_id + "' has negative timestamp");
  }

  // Canonical order: chronological with comment_id as deterministic tie-break.
  std::sort(comments.begin(), comments.end(), [](const Comment& a, const Comment& b) {
    if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
    return a.comment_id < b.comment_id;
  });
  d.comments = std::move(comments);

  const int n = d.n();
  for (int i = 0; i < n; ++i) {
    auto [it, inserted] = d.index.emplace(d.comments[i].comment_id, i);
    if (!inserted)
      throw StructureError("duplicate comment_id '" + d.comments[i].comment_id + "'");
  }

  d.tree.assign(n, TreeNode{});
  for (int i = 0; i < n; ++i) {
    const Comment& c = d.comments[i];
    if (!c.parent_id) continue;
    const int p = d.find(*c.parent_id);
    if (p < 0)
      throw StructureError("comment '" + c.comment_id + "' references unknown parent '" +
                           *c.parent_id + "'");
    d.tree[i].parent = p;
  }

  // Levels and roots via parent-chain walks; colors detect cycles.
  std::vector<int> color(n, 0);  // 0 unvisited, 1 on current path, 2 done
  std::vector<int> path;
  for (int i = 0; i < n; ++i) {
    if (color[i] == 2) continue;
    path.clear();
    int cur = i;
    while (cur >= 0 && color[cur] == 0) {
      color[cur] = 1;
      path.push_back(cur);
      cur = d.tree[cur].parent;
    }
    if (cur >= 0 && color[cur] == 1)
      throw StructureError("cycle involving comment '" + d.comments[cur].comment_id + "'");
    int base_level = 0;
    int root = -1;
    if (cur < 0) {
      root = path.back();  // walk ended at a root
    } else {
      base_level = d.tree[cur].level;
      root = d.tree[cur].root;
    }
    for (auto it = path.rbegin(); it != path.rend(); ++it) {
      d.tree[*it].level = ++base_level;
      d.tree[*it].root = root < 0 ? *it : root;
      if (root < 0) root = *it;
      color[*it] = 2;
    }
  }

  for (int i = 0; i < n; ++i) {
    if (d.comments[i].pinned && d.tree[i].parent >= 0)
      throw StructureError("pinned comment '" + d.comments[i].comment_id +
                           "' is not a root comment");
    if (d.tree[i].parent >= 0)
      d.tree[d.tree[i].parent].children.push_back(i);  // canonical order => chronological
    else
      d.roots.push_back(i);
  }

  // Subtree sizes bottom-up (children before parents).
  std::vector<int> by_depth(n);
  std::iota(by_depth.begin(), by_depth.end(), 0);
  std::sort(by_depth.begin(), by_depth.end(),
            [&](int a, int b) { return d.tree[a].level > d.tree[b].level; });
  for (int i : by_depth)
    if (d.tree[i].parent >= 0) d.tree[d.tree[i].parent].subtree_size += d.tree[i].subtree_size;

  std::vector<int> height(n, 0);
  for (int i = 0; i < n; ++i)
    height[d.tree[i].root] = std::max(height[d.tree[i].root], d.tree[i].level);
  for (int i = 0; i < n; ++i) d.tree[i].tree_height = height[d.tree[i].root];

  return d;
}

}  // namespace commentrank
