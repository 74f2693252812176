#pragma once

#include <Eigen/Core>

#include <functional>
#include <limits>
#include <vector>

namespace isoblock {

using Point = Eigen::VectorXd;
using PointRef = Eigen::Ref<const Eigen::VectorXd>;

/// Multi-index j = (j_1, ..., j_d) used for partial derivatives.
using MultiIndex = std::vector<int>;

/// Pointwise function on [0,1]^d.
using Field = std::function<double(const PointRef&)>;

/// Sentinel smoothness order for coordinates the function does not depend on.
inline constexpr int kInfiniteOrder = std::numeric_limits<int>::max();

inline bool is_finite_order(int alpha) { return alpha != kInfiniteOrder; }

/// 1/alpha with 1/inf == 0.
inline double inverse_order(int alpha) {
  return is_finite_order(alpha) ? 1.0 / alpha : 0.0;
}

inline double factorial(int k) {
  double r = 1.0;
  for (int i = 2; i <= k; ++i) r *= i;
  return r;
}

/// (j + 1)! = prod_k (j_k + 1)!
inline double shifted_factorial(const MultiIndex& j) {
  double r = 1.0;
  for (int jk : j) r *= factorial(jk + 1);
  return r;
}

}  // namespace isoblock
