#pragma once

#include "isoblock/design.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace isoblock {

/// Closed rectangle [lower, upper].
struct Block {
  Point lower;
  Point upper;
};

struct BlockMean {
  double mean = 0.0;
  double sum = 0.0;
  std::size_t count = 0;
};

/// d-dimensional summed-area table over the distinct coordinates of a dataset.
///
/// For a full lattice the cell counts follow from index arithmetic. For other
/// point sets the coordinates are compressed per axis and a second table holds
/// the counts. Tables are zero padded, so entry (i_1+1, ..., i_d+1) holds the
/// sum over all cells with index <= i.
template <typename Scalar = double>
class PrefixTable {
 public:
  /// Throws InvalidArgument if the dataset is not a full lattice.
  static PrefixTable build(const Dataset& data);
  /// Works for any dataset; duplicated points share a cell.
  static PrefixTable build_compressed(const Dataset& data);

  int dim() const { return static_cast<int>(sizes_.size()); }
  bool lattice() const { return counts_.empty(); }
  const std::vector<std::size_t>& sizes() const { return sizes_; }
  /// Sorted distinct coordinates along each axis.
  const std::vector<Eigen::VectorXd>& coords() const { return coords_; }

  /// Sum and count over the inclusive index box lo..hi (requires lo <= hi).
  Scalar sum(std::span<const std::ptrdiff_t> lo, std::span<const std::ptrdiff_t> hi) const;
  std::size_t count(std::span<const std::ptrdiff_t> lo, std::span<const std::ptrdiff_t> hi) const;

  /// Mean over a closed block; throws EmptyBlock if no point lies in it.
  BlockMean mean(const Block& block) const;

 private:
  template <typename T>
  T corner_sum(const std::vector<T>& table, std::span<const std::ptrdiff_t> lo,
               std::span<const std::ptrdiff_t> hi) const;

  std::vector<std::size_t> sizes_;
  std::vector<std::size_t> padded_strides_;
  std::vector<Eigen::VectorXd> coords_;
  std::vector<Scalar> sums_;
  std::vector<long long> counts_;
};

extern template class PrefixTable<double>;
extern template class PrefixTable<long double>;

/// Linear scan over all points.
BlockMean block_mean_naive(const Dataset& data, const Block& block);

}  // namespace isoblock
