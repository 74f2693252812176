#include "isoblock/block_stats.hpp"

#include "isoblock/errors.hpp"

#include <algorithm>
#include <bit>

namespace isoblock {

namespace {

std::vector<std::size_t> padded_strides(const std::vector<std::size_t>& sizes) {
  std::vector<std::size_t> strides(sizes.size(), 1);
  for (std::size_t k = sizes.size(); k-- > 1;) strides[k - 1] = strides[k] * (sizes[k] + 1);
  return strides;
}

std::size_t padded_total(const std::vector<std::size_t>& sizes) {
  std::size_t total = 1;
  for (auto s : sizes) total *= s + 1;
  return total;
}

// In-place cumulative sums along every axis of a zero-padded table. Each pass
// uses Neumaier compensation so a line of length m carries O(eps) error
// rather than O(m eps).
template <typename T>
void accumulate_axes(std::vector<T>& table, const std::vector<std::size_t>& sizes,
                     const std::vector<std::size_t>& strides) {
  const std::size_t total = table.size();
  for (std::size_t axis = 0; axis < sizes.size(); ++axis) {
    const std::size_t stride = strides[axis];
    const std::size_t len = sizes[axis] + 1;
    for (std::size_t start = 0; start < total; ++start) {
      if ((start / stride) % len != 0) continue;  // only line starts
      if constexpr (std::is_integral_v<T>) {
        for (std::size_t i = 1; i < len; ++i) table[start + i * stride] += table[start + (i - 1) * stride];
      } else {
        T running = 0, carry = 0;
        for (std::size_t i = 1; i < len; ++i) {
          const T x = table[start + i * stride];
          const T t = running + x;
          if (std::abs(running) >= std::abs(x)) {
            carry += (running - t) + x;
          } else {
            carry += (x - t) + running;
          }
          running = t;
          table[start + i * stride] = running + carry;
        }
      }
    }
  }
}

std::ptrdiff_t first_at_least(const Eigen::VectorXd& axis, double v) {
  return std::lower_bound(axis.begin(), axis.end(), v) - axis.begin();
}

std::ptrdiff_t last_at_most(const Eigen::VectorXd& axis, double v) {
  return (std::upper_bound(axis.begin(), axis.end(), v) - axis.begin()) - 1;
}

}  // namespace

template <typename Scalar>
PrefixTable<Scalar> PrefixTable<Scalar>::build(const Dataset& data) {
  if (!data.is_lattice()) throw InvalidArgument("prefix table requires a lattice dataset");
  const DesignSpec& design = data.design();
  PrefixTable table;
  table.sizes_ = design.lattice_sizes();
  table.coords_ = design.axes();
  table.padded_strides_ = padded_strides(table.sizes_);
  table.sums_.assign(padded_total(table.sizes_), Scalar(0));
  const int d = design.dim();
  for (std::size_t flat = 0; flat < design.total_n(); ++flat) {
    std::size_t padded = 0;
    for (int k = 0; k < d; ++k) {
      const std::size_t i = (flat / design.strides()[k]) % table.sizes_[k];
      padded += (i + 1) * table.padded_strides_[k];
    }
    table.sums_[padded] = static_cast<Scalar>(data.responses()[static_cast<Eigen::Index>(flat)]);
  }
  accumulate_axes(table.sums_, table.sizes_, table.padded_strides_);
  return table;
}

template <typename Scalar>
PrefixTable<Scalar> PrefixTable<Scalar>::build_compressed(const Dataset& data) {
  if (data.is_lattice()) return build(data);
  const Eigen::MatrixXd& x = data.points();
  const int d = data.dim();
  PrefixTable table;
  for (int k = 0; k < d; ++k) {
    std::vector<double> c(x.col(k).begin(), x.col(k).end());
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    table.sizes_.push_back(c.size());
    table.coords_.emplace_back(Eigen::Map<Eigen::VectorXd>(c.data(), static_cast<Eigen::Index>(c.size())));
  }
  table.padded_strides_ = padded_strides(table.sizes_);
  const std::size_t total = padded_total(table.sizes_);
  table.sums_.assign(total, Scalar(0));
  table.counts_.assign(total, 0);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    std::size_t padded = 0;
    for (int k = 0; k < d; ++k) {
      const auto j = static_cast<std::size_t>(first_at_least(table.coords_[k], x(i, k)));
      padded += (j + 1) * table.padded_strides_[k];
    }
    table.sums_[padded] += static_cast<Scalar>(data.responses()[i]);
    table.counts_[padded] += 1;
  }
  accumulate_axes(table.sums_, table.sizes_, table.padded_strides_);
  accumulate_axes(table.counts_, table.sizes_, table.padded_strides_);
  return table;
}

template <typename Scalar>
template <typename T>
T PrefixTable<Scalar>::corner_sum(const std::vector<T>& table, std::span<const std::ptrdiff_t> lo,
                                  std::span<const std::ptrdiff_t> hi) const {
  const std::size_t d = sizes_.size();
  T total = 0;
  for (unsigned mask = 0; mask < (1u << d); ++mask) {
    std::size_t index = 0;
    for (std::size_t k = 0; k < d; ++k) {
      const auto i = (mask >> k) & 1u ? hi[k] + 1 : lo[k];
      index += static_cast<std::size_t>(i) * padded_strides_[k];
    }
    // corners taking an odd number of lower faces enter negatively
    if ((d - static_cast<std::size_t>(std::popcount(mask))) % 2 == 0) {
      total += table[index];
    } else {
      total -= table[index];
    }
  }
  return total;
}

template <typename Scalar>
Scalar PrefixTable<Scalar>::sum(std::span<const std::ptrdiff_t> lo, std::span<const std::ptrdiff_t> hi) const {
  return corner_sum(sums_, lo, hi);
}

template <typename Scalar>
std::size_t PrefixTable<Scalar>::count(std::span<const std::ptrdiff_t> lo,
                                       std::span<const std::ptrdiff_t> hi) const {
  if (!lattice()) return static_cast<std::size_t>(corner_sum(counts_, lo, hi));
  std::size_t c = 1;
  for (std::size_t k = 0; k < sizes_.size(); ++k) c *= static_cast<std::size_t>(hi[k] - lo[k] + 1);
  return c;
}

template <typename Scalar>
BlockMean PrefixTable<Scalar>::mean(const Block& block) const {
  const int d = dim();
  if (block.lower.size() != d || block.upper.size() != d) throw InvalidArgument("block dimension mismatch");
  std::vector<std::ptrdiff_t> lo(static_cast<std::size_t>(d)), hi(static_cast<std::size_t>(d));
  for (int k = 0; k < d; ++k) {
    if (block.lower[k] > block.upper[k]) throw InvalidArgument("block lower corner exceeds upper corner");
    lo[k] = first_at_least(coords_[k], block.lower[k]);
    hi[k] = last_at_most(coords_[k], block.upper[k]);
    if (lo[k] > hi[k]) throw EmptyBlock();
  }
  const std::size_t n = count(lo, hi);
  if (n == 0) throw EmptyBlock();
  const auto s = static_cast<double>(sum(lo, hi));
  return {s / static_cast<double>(n), s, n};
}

template class PrefixTable<double>;
template class PrefixTable<long double>;

BlockMean block_mean_naive(const Dataset& data, const Block& block) {
  const Eigen::MatrixXd& x = data.points();
  double s = 0.0;
  std::size_t n = 0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    if ((x.row(i).transpose().array() >= block.lower.array()).all() &&
        (x.row(i).transpose().array() <= block.upper.array()).all()) {
      s += data.responses()[i];
      ++n;
    }
  }
  if (n == 0) throw EmptyBlock();
  return {s / static_cast<double>(n), s, n};
}

}  // namespace isoblock
