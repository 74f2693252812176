#pragma once

#include "isoblock/rates.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace isoblock {

/// One polynomial drift term a_j * prod_{k=kappa*}^{s} ((h2)^{j_k+1} - (-h1)^{j_k+1}) / (h1 + h2),
/// with j indexed over the d canonical coordinates.
struct DriftTerm {
  MultiIndex j;
  double coefficient = 1.0;
};

enum class DriftKind { DAlpha, Full };

/// Grid and drift for the sup-inf statistic, in canonical coordinates.
/// Effective axes are kappa*..d (1-based); axes kappa*..s are scaled and use
/// the geometric grid on [c^{-gamma*}, c], axes beyond s use [c^{-gamma*}, cap]
/// with caps (x0_k, 1 - x0_k).
struct SupInfConfig {
  int dim = 1;
  int kappa_star = 1;
  std::vector<int> alpha;  ///< canonical: finite entries first
  double c = 8.0;
  double gamma_star = 2.0;
  int m = 48;
  DriftKind drift = DriftKind::DAlpha;
  std::vector<DriftTerm> terms;
  /// (lower cap, upper cap) for each axis s+1..d.
  std::vector<std::pair<double, double>> caps;

  int s() const;
  int d_star() const { return dim - kappa_star + 1; }
  /// Throws InvalidArgument on c <= 1, m < 8, non-canonical alpha, bad caps.
  void validate() const;
  /// Knots for h1 and h2 along each effective axis.
  std::vector<Eigen::VectorXd> lower_knots() const;
  std::vector<Eigen::VectorXd> upper_knots() const;

  /// D_alpha drift: unit coefficients on j = alpha_k e_k, kappa* <= k <= s.
  static SupInfConfig d_alpha(const std::vector<int>& alpha, int kappa_star);
  /// Full drift a_j = d^j f0(x0) / (j+1)! over J* restricted to j_k = 0 for
  /// k < kappa*, caps from x0.
  static SupInfConfig full(const SmoothnessProfile& profile, const RateReport& report);
};

/// Independent Brownian sheets B_i, i in {1,2}^{d*}, on knot products. Sheet i
/// uses the lower knots on axes where bit k of i is 0 and the upper knots
/// where it is 1; G(a, b) = sum_i B_i(mixed corner).
class SheetField {
 public:
  SheetField(std::vector<Eigen::VectorXd> lower_knots, std::vector<Eigen::VectorXd> upper_knots,
             std::vector<Eigen::VectorXd> sheets, std::uint64_t seed);

  int d_star() const { return static_cast<int>(lower_.size()); }
  std::uint64_t seed() const { return seed_; }
  const std::vector<Eigen::VectorXd>& lower_knots() const { return lower_; }
  const std::vector<Eigen::VectorXd>& upper_knots() const { return upper_; }
  /// Sheet values in row-major order over its own knot product.
  const std::vector<Eigen::VectorXd>& sheets() const { return sheets_; }

  /// G at knot indices a (for h1) and b (for h2).
  double operator()(std::span<const std::size_t> a, std::span<const std::size_t> b) const;
  /// Closed-form Var G(h1, h2) = prod_k (h1_k + h2_k) at the same knots.
  double variance(std::span<const std::size_t> a, std::span<const std::size_t> b) const;

 private:
  std::vector<Eigen::VectorXd> lower_;
  std::vector<Eigen::VectorXd> upper_;
  std::vector<Eigen::VectorXd> sheets_;
  std::vector<std::vector<std::size_t>> strides_;
  std::uint64_t seed_;
};

SheetField sample_sheet(const std::vector<Eigen::VectorXd>& lower_knots,
                        const std::vector<Eigen::VectorXd>& upper_knots, std::uint64_t seed);
SheetField sample_sheet(const SupInfConfig& config, std::uint64_t seed);

/// prod_k (min(h1_k, h1'_k) + min(h2_k, h2'_k))
double sheet_covariance(const PointRef& h1, const PointRef& h2, const PointRef& h1p, const PointRef& h2p);

/// max over h1 knots of min over h2 knots of G / prod (h1 + h2) + drift.
/// Throws NonFiniteField on a non-finite field value.
double sup_inf_statistic(const SheetField& field, const SupInfConfig& config);

struct LimitSample {
  Eigen::VectorXd draws;
  SupInfConfig config;
  double scale = 1.0;  ///< draws = scale * sup-inf value
  std::uint64_t seed = 0;
};

/// M independent draws; replicate r uses the sheet seeded by stream (seed, r).
LimitSample sample_limit_distribution(const SupInfConfig& config, std::size_t M, std::uint64_t seed,
                                      double scale = 1.0, unsigned threads = 0);

struct GridOptions {
  double c = 8.0;
  double gamma_star = 2.0;
  int m = 48;
};

/// Uses the full drift when a mixed derivative on the effective coordinates
/// is nonzero, otherwise K * D_alpha.
LimitSample sample_limit_distribution(const SmoothnessProfile& profile, const RateReport& report,
                                      std::size_t M, std::uint64_t seed, const GridOptions& grid = {},
                                      unsigned threads = 0);

/// Indices of the vertices of the greatest convex minorant of (t_i, z_i),
/// t strictly increasing (Andrew's monotone chain, lower hull).
template <typename DerivedT, typename DerivedZ>
std::vector<Eigen::Index> greatest_convex_minorant(const Eigen::MatrixBase<DerivedT>& t,
                                                   const Eigen::MatrixBase<DerivedZ>& z) {
  std::vector<Eigen::Index> hull;
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    while (hull.size() >= 2) {
      const Eigen::Index a = hull[hull.size() - 2], b = hull.back();
      // drop b if it lies on or above the chord from a to i
      const auto cross = (t[b] - t[a]) * (z[i] - z[a]) - (z[b] - z[a]) * (t[i] - t[a]);
      if (cross > 0) break;
      hull.pop_back();
    }
    hull.push_back(i);
  }
  return hull;
}

/// The minorant evaluated at every t_i by linear interpolation between vertices.
Eigen::VectorXd gcm_values(const Eigen::VectorXd& t, const Eigen::VectorXd& z);

/// Slope at 0 of the GCM of B(t) + t^2 for a two-sided Brownian motion on the
/// grid {+-j step : 1 <= j <= T/step}.
double chernoff_statistic(const Eigen::VectorXd& left_increments, const Eigen::VectorXd& right_increments,
                          double step);
Eigen::VectorXd chernoff_sample(std::size_t M, double T, double step, std::uint64_t seed, unsigned threads = 0);

}  // namespace isoblock
