#pragma once

#include "isoblock/design.hpp"

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace isoblock {

/// Exact fraction with 64-bit numerator and denominator; arithmetic is done in
/// 128 bits and throws InvalidArgument on overflow.
class Rational {
 public:
  Rational(std::int64_t num = 0, std::int64_t den = 1);

  /// Parses "p", "p/q" or a terminating decimal such as "0.25".
  static Rational parse(std::string_view text);

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }
  std::string str() const;

  friend Rational operator+(const Rational& a, const Rational& b);
  friend Rational operator-(const Rational& a, const Rational& b);
  friend Rational operator*(const Rational& a, const Rational& b);
  friend Rational operator/(const Rational& a, const Rational& b);
  friend bool operator==(const Rational& a, const Rational& b) = default;
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);

 private:
  std::int64_t num_;
  std::int64_t den_;
};

/// Local structure of f0 at x0. Coordinates may be given in any order; alpha
/// is kInfiniteOrder for coordinates f0 does not depend on near x0.
struct SmoothnessProfile {
  Point x0;
  std::vector<int> alpha;
  /// d_k^{alpha_k} f0(x0) per coordinate (ignored where alpha is infinite).
  std::vector<double> marginal_derivs;
  /// Critical mixed derivatives d^j f0(x0), sum_k j_k / alpha_k = 1, two or
  /// more nonzero entries.
  std::map<MultiIndex, double> mixed_derivs;
  double density_at_x0 = 1.0;

  int dim() const { return static_cast<int>(alpha.size()); }
  /// Intrinsic dimension: number of finite alpha entries.
  int s() const;
  /// Throws InvalidArgument on even/nonpositive alpha, nonpositive marginal
  /// derivatives or mixed keys off the critical slice.
  void validate() const;
};

SmoothnessProfile profile_of(const TestFunction& f);

struct IndexSets {
  std::vector<MultiIndex> J;       ///< 0 < sum j_k/alpha_k <= 1
  std::vector<MultiIndex> J_star;  ///< sum j_k/alpha_k == 1
  std::vector<MultiIndex> J1;      ///< J_star entries with two or more nonzero coordinates
};

/// Multi-indices over the first s coordinates (alpha_1..alpha_s finite), padded
/// with zeros to alpha.size(). Throws InvalidArgument for s == 0.
IndexSets index_sets(const std::vector<int>& alpha, int s);

struct RateReport {
  DesignKind design = DesignKind::FixedLattice;
  /// 1-based position in the canonical order.
  int kappa_star = 1;
  bool unique = true;
  int s = 0;
  /// Canonical position i holds original coordinate permutation[i] (0-based).
  std::vector<int> permutation;
  std::vector<int> alpha;   ///< canonical order
  std::vector<double> beta; ///< canonical order (lattice only)
  /// Original 1-based labels of the canonical coordinates kappa*..d.
  std::vector<int> effective_dims;
  double n_star_exponent = 1.0;
  /// omega_n = n^{-rate_exponent}
  double rate_exponent = 0.0;
  /// Objective value for each l = 1..d (lattice only).
  std::vector<double> objective;

  double n_star(double n) const;
  double omega(double n) const;
  /// sum_{k=kappa*}^{s} 1/alpha_k in canonical order.
  double inverse_alpha_sum() const;
};

/// kappa* as the maximiser of (sum_{k>=l} beta_k) / (2 + sum_{k=l}^{s} 1/alpha_k)
/// after sorting coordinates by alpha_k beta_k. Ties compare with relative
/// tolerance 1e-12 for floating beta, exactly for rational beta.
RateReport kappa_star_argmax(const std::vector<int>& alpha, const std::vector<double>& beta);
RateReport kappa_star_argmax(const std::vector<int>& alpha, const std::vector<Rational>& beta);

/// Random design: kappa* = 1, n* = n, coordinates ordered by alpha.
RateReport random_design_rates(const std::vector<int>& alpha);

/// min{l : alpha_l^{-1}/(2 + sum_{k=l}^{s} alpha_k^{-1}) < beta_l / sum_{k>=l} beta_k}
/// in canonical order, 1-based. Throws DegenerateBoundary if equality holds
/// at any l.
int kappa_star_fixed_point(const std::vector<int>& alpha, const std::vector<double>& beta);
int kappa_star_fixed_point(const std::vector<int>& alpha, const std::vector<Rational>& beta);

/// omega^{(l)} = n^{-sum_{k>=l} beta_k / (2 + sum_{k=l}^{s} 1/alpha_k)}, the
/// solution of omega = (prod_{k>=l} omega^{1/alpha_k} n^{beta_k})^{-1/2}; l is
/// 1-based over already canonical (alpha, beta).
double fixed_point_rate(const std::vector<int>& alpha, const std::vector<double>& beta, int ell, double n);

/// Canonical permutation: sort by (alpha_k beta_k, alpha_k, beta_k), infinite
/// alpha last. Returns original indices in canonical order.
std::vector<int> canonical_order(const std::vector<int>& alpha, const std::vector<double>& beta);

struct KConstant {
  double K = 1.0;
  /// K * pi(x0)^{-1/(2 + sum 1/alpha)} for random designs with s == d.
  std::optional<double> density_adjusted;
};

/// K = {prod_{k=kappa*}^{s} (d_k^{alpha_k} f0 / (alpha_k+1)!)^{1/alpha_k}}^{1/(2 + sum 1/alpha_k)}.
/// Throws MixedDerivativesPresent if a nonzero mixed derivative involves only
/// effective coordinates.
KConstant k_constant(const SmoothnessProfile& profile, const RateReport& report);

/// Rate report for a profile under a lattice with exponents beta (original
/// coordinate order) or under a random design when beta is empty.
RateReport rate_report(const SmoothnessProfile& profile, const std::vector<double>& beta);

}  // namespace isoblock
