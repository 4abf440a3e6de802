#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "commentrank/model.hpp"

namespace commentrank {

// A concrete display order for one discussion under one policy. `order`
// holds every comment exactly once as indices into Discussion::comments;
// positions past `visible` are the hidden replies kept for interpolation
// bookkeeping (chronological).
struct DisplayOrdering {
  std::vector<int> order;
  int visible = 0;
  PolicyDescriptor policy;
  std::uint64_t stream_seed = 0;
};

// Ranks all comments by the primary ordering key, descending, with ties
// broken by a seeded shuffle inside each tie group. Random ordering is the
// degenerate all-ties case. Deterministic for a fixed stream seed.
std::vector<int> order_primary(const Discussion& discussion, const PolicyDescriptor& policy,
                               std::uint64_t stream_seed);

// Loose: the ranked list as-is, all visible. Hidden: roots in ranked order
// are visible, replies stored chronologically after them. Trees: roots in
// ranked order, each immediately followed by its subtree depth-first in
// chronological order.
DisplayOrdering apply_reply_structure(const Discussion& discussion,
                                      const std::vector<int>& ranked, ReplyMode mode);

// Pinned: pinned roots (with their subtree blocks in Trees mode) move to
// the front, keeping their relative order. Unpinned: identity.
DisplayOrdering apply_pinning(const Discussion& discussion, DisplayOrdering display,
                              PinMode mode);

// Full pipeline: primary ordering, reply structure, pinning. The RNG stream
// is derived from (global seed, discussion_id, policy id, salt) so results
// do not depend on evaluation order.
DisplayOrdering make_display(const Discussion& discussion, const PolicyDescriptor& policy,
                             std::uint64_t global_seed);

// Cross product of primary orderings (7 basic + one per external column,
// at most 4) x pin modes x reply structures, in canonical order. 4 columns
// yield 66 descriptors.
std::vector<PolicyDescriptor> enumerate_policies(
    const std::vector<std::string>& external_columns);

// Parses "<ordering>[:<column>]+<pinned|unpinned>+<hidden|trees|loose>".
PolicyDescriptor parse_policy(std::string_view expr);

}  // namespace commentrank
