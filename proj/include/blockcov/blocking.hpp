#pragma once

#include <vector>

#include "blockcov/matrix.hpp"

namespace blockcov {

struct Block {
  IndexInterval rows;
  IndexInterval cols;
  int level = 1;
  bool diagonal = false;

  // d(B): the larger of the two side lengths.
  Index dim() const { return std::max(rows.size(), cols.size()); }
  bool operator==(const Block&) const = default;
};

// Symmetric partition of the p x p index grid into rectangular blocks.
//
// The diagonal carries ceil(p/k0) square blocks of side k0 (the last one
// truncated at p).  Off-diagonal blocks grow away from the diagonal in
// levels: level 1 blocks are k0 wide, and each later level doubles the side
// length, with rows grouped into strips of matching height.  Odd strips
// extend right by three blocks, even strips by two, so the strip fronts line
// up again before the next doubling.  Every strictly-upper block has its
// mirror image below the diagonal.
struct BlockPartition {
  Index p = 0;
  Index k0 = 1;
  std::vector<Block> blocks;

  int max_level() const;
};

Index default_k0(Index p);

BlockPartition build_partition(Index p, Index k0);

// Copy of `a` keeping only entries covered by blocks at the given level.
Matrix slice_by_level(const Eigen::Ref<const Matrix>& a, const BlockPartition& part, int level);

// G x G matrix of spectral norms of the blocks of `a` induced by consecutive
// index groups of the given sizes.  Its own spectral norm dominates that of
// `a`, which is what makes blockwise bounds compose.
Matrix norm_compression(const Eigen::Ref<const Matrix>& a, const std::vector<Index>& sizes);

// Largest number of level-`level` blocks meeting any single row or column
// strip of that level's height.  Small by construction, which is what keeps
// the compressed norm matrices sparse.
int compressed_degree(const BlockPartition& part, int level);

}  // namespace blockcov
