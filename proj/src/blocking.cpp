#include "blockcov/blocking.hpp"

#include <cassert>
#include <cmath>
#include <numeric>

namespace blockcov {

int BlockPartition::max_level() const {
  int level = 0;
  for (const Block& b : blocks) level = std::max(level, b.level);
  return level;
}

Index default_k0(Index p) {
  if (p < 1) throw ParameterError("default_k0: p must be >= 1");
  return std::max<Index>(1, static_cast<Index>(std::floor(std::log(static_cast<double>(p)))));
}

BlockPartition build_partition(Index p, Index k0) {
  if (p < 1) throw ParameterError("build_partition: p must be >= 1");
  if (k0 < 1 || k0 > p)
    throw ParameterError("build_partition: k0 must satisfy 1 <= k0 <= p, got k0=" +
                         std::to_string(k0) + " with p=" + std::to_string(p));

  const Index m = (p + k0 - 1) / k0;  // number of k0-cells per axis
  const auto cell_lo = [k0](Index c) { return (c - 1) * k0 + 1; };
  const auto cell_hi = [k0, p](Index c) { return std::min(c * k0, p); };

  BlockPartition part;
  part.p = p;
  part.k0 = k0;

  // frontier[g] = rightmost cell covered so far in cell-row g (upper half)
  std::vector<Index> frontier(static_cast<std::size_t>(m) + 1, 0);

  for (Index g = 1; g <= m; ++g) {
    part.blocks.push_back({{cell_lo(g), cell_hi(g)}, {cell_lo(g), cell_hi(g)}, 1, true});
    const Index ext = (g % 2 == 1) ? 2 : 1;
    for (Index e = 1; e <= ext && g + e <= m; ++e)
      part.blocks.push_back({{cell_lo(g), cell_hi(g)}, {cell_lo(g + e), cell_hi(g + e)}, 1, false});
    frontier[g] = std::min(g + ext, m);
  }

  for (int level = 2;; ++level) {
    bool open = false;
    for (Index g = 1; g <= m; ++g)
      if (frontier[g] < m) { open = true; break; }
    if (!open) break;

    const Index w = Index{1} << (level - 1);
    const Index strips = (m + w - 1) / w;
    for (Index strip = 1; strip <= strips; ++strip) {
      const Index row_lo = (strip - 1) * w + 1;
      const Index row_hi = std::min(strip * w, m);
      const Index front = frontier[row_lo];
      for (Index g = row_lo; g <= row_hi; ++g) assert(frontier[g] == front);
      if (front >= m) continue;

      const Index count = (strip % 2 == 1) ? 3 : 2;
      Index start = front + 1;
      for (Index b = 0; b < count && start <= m; ++b) {
        const Index col_hi = std::min(start + w - 1, m);
        part.blocks.push_back(
            {{cell_lo(row_lo), cell_hi(row_hi)}, {cell_lo(start), cell_hi(col_hi)}, level, false});
        start = col_hi + 1;
      }
      const Index advanced = std::min(front + count * w, m);
      for (Index g = row_lo; g <= row_hi; ++g) frontier[g] = advanced;
    }
  }

  const std::size_t upper_count = part.blocks.size();
  for (std::size_t i = 0; i < upper_count; ++i) {
    const Block& b = part.blocks[i];
    if (!b.diagonal) part.blocks.push_back({b.cols, b.rows, b.level, false});
  }
  return part;
}

Matrix slice_by_level(const Eigen::Ref<const Matrix>& a, const BlockPartition& part, int level) {
  detail::require_square(a, "slice_by_level");
  if (a.rows() != part.p)
    throw DimensionError("slice_by_level: matrix is " + std::to_string(a.rows()) +
                         "x" + std::to_string(a.cols()) + " but partition has p=" +
                         std::to_string(part.p));
  Matrix out = Matrix::Zero(part.p, part.p);
  for (const Block& b : part.blocks) {
    if (b.level != level) continue;
    out.block(b.rows.first - 1, b.cols.first - 1, b.rows.size(), b.cols.size()) =
        a.block(b.rows.first - 1, b.cols.first - 1, b.rows.size(), b.cols.size());
  }
  return out;
}

Matrix norm_compression(const Eigen::Ref<const Matrix>& a, const std::vector<Index>& sizes) {
  detail::require_square(a, "norm_compression");
  if (sizes.empty()) throw DimensionError("norm_compression: no group sizes");
  for (Index s : sizes)
    if (s < 1) throw DimensionError("norm_compression: group sizes must be >= 1");
  const Index total = std::accumulate(sizes.begin(), sizes.end(), Index{0});
  if (total != a.rows())
    throw DimensionError("norm_compression: group sizes sum to " + std::to_string(total) +
                         ", expected " + std::to_string(a.rows()));

  const Index groups = static_cast<Index>(sizes.size());
  std::vector<Index> offset(static_cast<std::size_t>(groups) + 1, 0);
  for (Index g = 0; g < groups; ++g) offset[g + 1] = offset[g] + sizes[g];

  Matrix out(groups, groups);
  for (Index g = 0; g < groups; ++g)
    for (Index h = 0; h < groups; ++h)
      out(g, h) = spectral_norm(a.block(offset[g], offset[h], sizes[g], sizes[h]));
  return out;
}

int compressed_degree(const BlockPartition& part, int level) {
  if (level < 1) throw ParameterError("compressed_degree: level must be >= 1");
  const Index w = (Index{1} << (level - 1)) * part.k0;
  const Index strips = (part.p + w - 1) / w;
  std::vector<int> row_count(static_cast<std::size_t>(strips), 0);
  std::vector<int> col_count(static_cast<std::size_t>(strips), 0);
  for (const Block& b : part.blocks) {
    if (b.level != level) continue;
    for (Index s = (b.rows.first - 1) / w; s <= (b.rows.last - 1) / w; ++s) ++row_count[s];
    for (Index s = (b.cols.first - 1) / w; s <= (b.cols.last - 1) / w; ++s) ++col_count[s];
  }
  int degree = 0;
  for (int c : row_count) degree = std::max(degree, c);
  for (int c : col_count) degree = std::max(degree, c);
  return degree;
}

}  // namespace blockcov
