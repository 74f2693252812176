#include "isoblock/minimax.hpp"

#include "isoblock/errors.hpp"

#include <boost/random/sobol.hpp>

#include <algorithm>
#include <cmath>

namespace isoblock {

double two_point_bound(double gamma_n, double alpha_budget, double sigma) {
  if (!(sigma > 0.0)) throw ZeroNoise();
  if (!(gamma_n >= 0.0) || !(alpha_budget >= 0.0)) throw InvalidArgument("two-point bound needs nonnegative inputs");
  return gamma_n / 8.0 * std::exp(-alpha_budget / (2.0 * sigma * sigma));
}

namespace {

int max_finite_alpha(const std::vector<int>& alpha) {
  int m = 0;
  for (int a : alpha) {
    if (is_finite_order(a)) m = std::max(m, a);
  }
  return m;
}

void require_perturbable(const SmoothnessProfile& profile, const RateReport& report, double sigma) {
  if (!(sigma > 0.0)) throw ZeroNoise();
  if (report.kappa_star > report.s) {
    throw InvalidArgument("kappa* = s + 1: the lower bound is trivial and no perturbation is built");
  }
  k_constant(profile, report);  // throws MixedDerivativesPresent
}

}  // namespace

double perturbation_gamma(const SmoothnessProfile& profile, const RateReport& report, double sigma) {
  require_perturbable(profile, report, sigma);
  const int d = profile.dim();
  const int amax = max_finite_alpha(profile.alpha);
  const int s_star = report.s - report.kappa_star + 1;
  double alpha_plus_one = 0.0, log_product = 0.0;
  for (int i = report.kappa_star - 1; i < report.s; ++i) {
    const int a = report.alpha[static_cast<std::size_t>(i)];
    const double deriv = profile.marginal_derivs[static_cast<std::size_t>(report.permutation[static_cast<std::size_t>(i)])];
    alpha_plus_one += a + 1;
    log_product += std::log(deriv / factorial(a + 1)) / a;
  }
  const double log_inner = std::log(2.0 * sigma * sigma) - std::log(static_cast<double>(s_star)) -
                           (d + 2.0 * amax) * std::log(2.0 * d * amax) - std::log(alpha_plus_one) + log_product;
  return std::exp(log_inner / (2.0 + report.inverse_alpha_sum()));
}

Perturbation build_perturbation_with_gamma(const TestFunction& f0, const RateReport& report, std::size_t n,
                                           double sigma, double gamma, double tau) {
  const SmoothnessProfile profile = profile_of(f0);
  require_perturbable(profile, report, sigma);
  if (!(gamma > 0.0) || !(tau > 0.0) || n < 1) throw InvalidArgument("need gamma > 0, tau > 0 and n >= 1");
  const int d = f0.dim;
  Perturbation p;
  p.base = f0;
  p.report = report;
  p.x0 = f0.x0;
  p.gamma = gamma;
  p.sigma = sigma;
  p.n = n;
  p.omega_n = report.omega(static_cast<double>(n));
  p.h = Eigen::VectorXd::Zero(d);
  p.r_n = Eigen::VectorXd::Zero(d);
  for (int i = report.kappa_star - 1; i < d; ++i) {
    const auto k = static_cast<Eigen::Index>(report.permutation[static_cast<std::size_t>(i)]);
    const int a = report.alpha[static_cast<std::size_t>(i)];
    if (i < report.s) {
      const double deriv = profile.marginal_derivs[static_cast<std::size_t>(k)];
      p.h[k] = std::pow(gamma * factorial(a + 1) / deriv, 1.0 / a);
      p.r_n[k] = std::pow(p.omega_n, 1.0 / a);
    } else {
      p.h[k] = tau;
      p.r_n[k] = 1.0;
    }
  }
  p.corner = p.x0 - p.h.cwiseProduct(p.r_n);
  return p;
}

Perturbation build_perturbation(const TestFunction& f0, const RateReport& report, std::size_t n, double sigma,
                                double tau) {
  const double gamma = perturbation_gamma(profile_of(f0), report, sigma);
  return build_perturbation_with_gamma(f0, report, n, sigma, gamma, tau);
}

double Perturbation::operator()(const PointRef& x) const {
  const double value = base(x);
  if ((x.array() <= x0.array()).all()) return std::min(value, base(corner));
  return value;
}

Block Perturbation::containment_box() const {
  const double width = 2.0 * static_cast<double>(x0.size()) * max_finite_alpha(base.alpha);
  return {x0 - width * h.cwiseProduct(r_n), x0};
}

double l2_budget(const Perturbation& p) {
  const int d = static_cast<int>(p.x0.size());
  const double floor_value = p.base(p.corner);
  // f_n differs from f0 only below x0, where it is clipped at f0(corner)
  auto gap = [&](const PointRef& x) {
    if (!(x.array() <= p.x0.array()).all()) return 0.0;
    return std::max(0.0, p.base(x) - floor_value);
  };
  double total = 0.0;
  if (p.report.design == DesignKind::FixedLattice) {
    Eigen::VectorXd beta(d);
    for (int i = 0; i < d; ++i) {
      beta[p.report.permutation[static_cast<std::size_t>(i)]] = p.report.beta[static_cast<std::size_t>(i)];
    }
    const DesignSpec lattice = build_lattice(p.n, beta, p.x0);
    for (std::size_t i = 0; i < lattice.total_n(); ++i) {
      const double g = gap(lattice.node(i));
      total += g * g;
    }
    return total;
  }
  constexpr std::size_t kPoints = 100000;
  boost::random::sobol qmc(static_cast<std::size_t>(d));
  Point x(d);
  for (std::size_t i = 0; i < kPoints; ++i) {
    for (int k = 0; k < d; ++k) x[k] = std::ldexp(static_cast<double>(qmc()), -64);
    const double g = gap(x);
    total += g * g;
  }
  return static_cast<double>(p.n) * total / static_cast<double>(kPoints);
}

Certificate certify_rate_optimality(const TestFunction& f0, const std::vector<double>& beta,
                                    const std::vector<std::size_t>& n_list, double sigma, double tau) {
  if (!(sigma > 0.0)) throw ZeroNoise();
  if (n_list.empty() || !std::is_sorted(n_list.begin(), n_list.end()) ||
      std::adjacent_find(n_list.begin(), n_list.end()) != n_list.end()) {
    throw InvalidArgument("n_list must be nonempty and strictly increasing");
  }
  const SmoothnessProfile profile = profile_of(f0);
  Certificate cert;
  cert.report = rate_report(profile, beta);
  cert.K = k_constant(profile, cert.report).K;
  cert.gamma = perturbation_gamma(profile, cert.report, sigma);
  const double exponent = 1.0 / (2.0 + cert.report.inverse_alpha_sum());
  for (std::size_t n : n_list) {
    const Perturbation p = build_perturbation_with_gamma(f0, cert.report, n, sigma, cert.gamma, tau);
    CertificateRow row;
    row.n = n;
    row.gamma_n = std::abs(p(p.x0) - f0(p.x0));
    row.budget = l2_budget(p);
    row.bound = two_point_bound(row.gamma_n, row.budget, sigma);
    row.normalized = row.bound * std::pow(cert.report.n_star(static_cast<double>(n)) / (sigma * sigma), exponent);
    row.l_factor = row.normalized / cert.K;
    cert.rows.push_back(row);
  }
  return cert;
}

}  // namespace isoblock
