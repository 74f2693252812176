#pragma once

#include "isoblock/block_stats.hpp"
#include "isoblock/errors.hpp"

#include <cstddef>
#include <vector>

namespace isoblock {

struct FitResult {
  Point query;
  double value = 0.0;
  Point argmax_lower;  ///< x_u attaining the outer max
  Point argmin_upper;  ///< x_v attaining the inner min for that x_u
  std::size_t count = 0;   ///< points in [argmax_lower, argmin_upper]
  double block_sum = 0.0;  ///< their response sum; value == block_sum / count
  std::size_t candidates_scanned = 0;
};

/// max over x_u <= x0 of min over x_v >= x0 (nonempty blocks only) of the
/// block average. Corners range over the observed coordinates along each axis
/// together with x0's own coordinate. Means are compared by cross
/// multiplication of sums and counts, so integer-valued data is handled
/// exactly. Ties go to the lexicographically smallest corner.
/// Throws NoFeasibleBlock if no block around x0 holds data.
FitResult max_min_estimate(const PrefixTable<double>& table, const PointRef& x0);
FitResult max_min_estimate(const Dataset& data, const PointRef& x0);

/// The reversed order, min over x_v of max over x_u. Used only to compare
/// against max_min_estimate; the two need not agree for d >= 2.
FitResult min_max_estimate(const PrefixTable<double>& table, const PointRef& x0);

/// Estimate at every lattice node, in canonical order. Deterministic for any
/// thread count.
Eigen::VectorXd fit_grid(const Dataset& data, unsigned threads = 0);

/// Weighted pool-adjacent-violators: the nondecreasing vector minimising
/// sum w_i (y_i - m_i)^2.
template <typename DerivedY, typename DerivedW>
Eigen::Matrix<typename DerivedY::Scalar, Eigen::Dynamic, 1> pava(const Eigen::MatrixBase<DerivedY>& y,
                                                                 const Eigen::MatrixBase<DerivedW>& w) {
  using Scalar = typename DerivedY::Scalar;
  const Eigen::Index n = y.size();
  if (w.size() != n) throw InvalidArgument("pava: weights and values differ in length");
  struct Pool {
    Scalar mean;
    Scalar weight;
    Eigen::Index length;
  };
  std::vector<Pool> pools;
  pools.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(w[i] > 0)) throw InvalidArgument("pava: weights must be positive");
    Pool p{static_cast<Scalar>(y[i]), static_cast<Scalar>(w[i]), 1};
    while (!pools.empty() && pools.back().mean > p.mean) {
      const Pool& q = pools.back();
      const Scalar weight = q.weight + p.weight;
      p = {(q.weight * q.mean + p.weight * p.mean) / weight, weight, q.length + p.length};
      pools.pop_back();
    }
    pools.push_back(p);
  }
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> fit(n);
  Eigen::Index i = 0;
  for (const Pool& p : pools) {
    fit.segment(i, p.length).setConstant(p.mean);
    i += p.length;
  }
  return fit;
}

template <typename DerivedY>
Eigen::Matrix<typename DerivedY::Scalar, Eigen::Dynamic, 1> pava(const Eigen::MatrixBase<DerivedY>& y) {
  return pava(y, Eigen::Matrix<typename DerivedY::Scalar, Eigen::Dynamic, 1>::Ones(y.size()));
}

}  // namespace isoblock
