#pragma once

#include "isoblock/block_stats.hpp"
#include "isoblock/rates.hpp"

#include <cstddef>
#include <vector>

namespace isoblock {

/// (gamma_n / 8) exp(-alpha / (2 sigma^2)): risk lower bound over the pair
/// {f_n, f0} when n * l2^2(f_n, f0) <= alpha.
double two_point_bound(double gamma_n, double alpha_budget, double sigma);

/// f_n(x) = min(f0(x), f0(x0 - h r_n)) for x <= x0, f0(x) otherwise.
struct Perturbation {
  TestFunction base;
  RateReport report;
  Point x0;
  Eigen::VectorXd h;    ///< original coordinate order
  Eigen::VectorXd r_n;  ///< omega_n^{1/alpha_k} on scaled axes, 1 on inactive, 0 on collapsed
  Point corner;         ///< x0 - h * r_n
  double gamma = 0.0;
  double omega_n = 0.0;
  double sigma = 1.0;
  std::size_t n = 0;

  double operator()(const PointRef& x) const;
  /// [x0 - 2 d ||alpha||_inf h r_n, x0]; f_n equals f0 outside it.
  Block containment_box() const;
};

/// Sample-size independent constant gamma for the perturbation.
double perturbation_gamma(const SmoothnessProfile& profile, const RateReport& report, double sigma);

/// report fixes the design; tau is h_k on inactive coordinates. Throws
/// MixedDerivativesPresent for nonzero effective mixed derivatives, ZeroNoise
/// for sigma <= 0, InvalidArgument when kappa* = s + 1.
Perturbation build_perturbation(const TestFunction& f0, const RateReport& report, std::size_t n, double sigma,
                                double tau = 0.05);
/// Same construction with gamma supplied by the caller.
Perturbation build_perturbation_with_gamma(const TestFunction& f0, const RateReport& report, std::size_t n,
                                           double sigma, double gamma, double tau = 0.05);

/// n * l2^2(f_n, f0): exact sum over the lattice build_lattice(n, beta, x0)
/// when report is a lattice report, otherwise 10^5 Sobol points weighted by
/// the uniform design.
double l2_budget(const Perturbation& p);

struct CertificateRow {
  std::size_t n = 0;
  double gamma_n = 0.0;     ///< |f_n(x0) - f0(x0)|
  double budget = 0.0;      ///< n * l2^2(f_n, f0)
  double bound = 0.0;       ///< two_point_bound(gamma_n, budget, sigma)
  double normalized = 0.0;  ///< bound * (n* / sigma^2)^{1/(2 + sum 1/alpha)}
  double l_factor = 0.0;    ///< normalized / K
};

struct Certificate {
  RateReport report;
  double K = 1.0;
  double gamma = 0.0;
  std::vector<CertificateRow> rows;
};

/// beta empty means a uniform random design. n_list must be increasing.
Certificate certify_rate_optimality(const TestFunction& f0, const std::vector<double>& beta,
                                    const std::vector<std::size_t>& n_list, double sigma, double tau = 0.05);

}  // namespace isoblock
