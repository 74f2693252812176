#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "isoblock/errors.hpp"
#include "isoblock/minimax.hpp"

#include <algorithm>
#include <cmath>

using namespace isoblock;

namespace {

TestFunction scaled(const TestFunction& f, double c) {
  TestFunction g = f;
  g.evaluate = [inner = f.evaluate, c](const PointRef& x) { return c * inner(x); };
  for (auto& [j, v] : g.derivatives) v *= c;
  return g;
}

// Containment is only claimed along coordinates f0 depends on; on a flat
// coordinate f_n differs from f0 across the whole range below x0.
bool inside(const Block& b, const PointRef& x, const std::vector<int>& alpha) {
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    if (!is_finite_order(alpha[static_cast<std::size_t>(k)])) continue;
    if (x[k] < b.lower[k] || x[k] > b.upper[k]) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("two-point bound") {
  CHECK(two_point_bound(0.1, 2.0, 1.0) == doctest::Approx(0.0125 * std::exp(-1.0)).epsilon(1e-15));
  CHECK(two_point_bound(0.1, 2.0, 1.0) == doctest::Approx(0.0045985).epsilon(1e-5));
  CHECK(two_point_bound(0.1, 8.0, 2.0) == doctest::Approx(0.0045985).epsilon(1e-5));
  CHECK(two_point_bound(0.4, 0.0, 1.0) == 0.05);
  CHECK(two_point_bound(0.4, 1e-12, 1.0) == doctest::Approx(0.05));
  double previous = 0.0;
  for (double sigma : {0.25, 0.5, 1.0, 2.0, 4.0}) {
    const double b = two_point_bound(0.1, 1.0, sigma);
    CHECK(b > previous);
    previous = b;
  }
  CHECK_THROWS_AS(two_point_bound(0.1, 1.0, 0.0), ZeroNoise);
  CHECK_THROWS_AS(two_point_bound(-0.1, 1.0, 1.0), InvalidArgument);
}

TEST_CASE("one-dimensional perturbation") {
  const TestFunction f = test_function("identity");
  const RateReport r = rate_report(profile_of(f), {1.0});
  const double gamma = perturbation_gamma(profile_of(f), r, 1.0);
  CHECK(gamma == doctest::Approx(std::cbrt(1.0 / 16)).epsilon(1e-14));

  const Perturbation p = build_perturbation(f, r, 10000, 1.0);
  CHECK(p.h[0] == doctest::Approx(2 * gamma).epsilon(1e-14));
  CHECK(p.omega_n == doctest::Approx(std::pow(1e4, -1.0 / 3)).epsilon(1e-14));
  const double gamma_n = std::abs(p(p.x0) - f(p.x0));
  CHECK(gamma_n >= 0.9 * p.omega_n * 1 * gamma);
  const double budget = l2_budget(p);
  MESSAGE("n * l2^2 at n = 1e4: " << budget);
  CHECK(budget <= 2.5);
  CHECK(budget == doctest::Approx(1.0 / 6).epsilon(0.05));

  // f_n <= f0 below x0 and equal elsewhere
  Rng rng(3);
  for (int t = 0; t < 1000; ++t) {
    const Point x = Point::Constant(1, rng.uniform());
    if (x[0] <= 0.5) {
      CHECK(p(x) <= f(x));
    } else {
      CHECK(p(x) == f(x));
    }
  }
}

TEST_CASE("perturbations are isotonic and local") {
  for (const char* id : {"exp-sum", "F1", "F2", "F4", "identity"}) {
    CAPTURE(std::string(id));
    const TestFunction f = test_function(id);
    const std::vector<double> beta(static_cast<std::size_t>(f.dim), 1.0 / f.dim);
    const RateReport r = rate_report(profile_of(f), beta);
    const Perturbation p = build_perturbation(f, r, 10000, 1.0);
    const Field fn = [&p](const PointRef& x) { return p(x); };
    CHECK(is_monotone_on_samples(fn, f.dim, 77, 1000));

    const Block box = p.containment_box();
    CHECK((box.upper.array() == p.x0.array()).all());
    const DesignSpec lattice = build_lattice(10000, Eigen::Map<const Eigen::VectorXd>(beta.data(), f.dim), f.x0);
    std::size_t touched = 0;
    for (std::size_t i = 0; i < lattice.total_n(); ++i) {
      const Point x = lattice.node(i);
      if (p(x) != f(x)) {
        ++touched;
        CHECK(inside(box, x, f.alpha));
        CHECK(p(x) < f(x));
      }
    }
    CHECK(touched > 0);
    Rng rng(5);
    for (int t = 0; t < 1000; ++t) {
      Point x(f.dim);
      for (auto& v : x) v = rng.uniform();
      if (!inside(box, x, f.alpha)) CHECK(p(x) == f(x));
    }
  }
}

TEST_CASE("degenerate and rejected perturbations") {
  const TestFunction f = test_function("identity");
  const RateReport r = rate_report(profile_of(f), {1.0});
  TestFunction flat = f;
  flat.evaluate = [](const PointRef&) { return 0.3; };
  const Perturbation p = build_perturbation_with_gamma(flat, r, 1000, 1.0, 0.2);
  Rng rng(1);
  for (int t = 0; t < 200; ++t) {
    const Point x = Point::Constant(1, rng.uniform());
    CHECK(p(x) == 0.3);
  }
  CHECK(l2_budget(p) == 0.0);

  CHECK_THROWS_AS(build_perturbation(f, r, 1000, 0.0), ZeroNoise);
  CHECK_THROWS_AS(certify_rate_optimality(f, {1.0}, {100, 1000}, 0.0), ZeroNoise);
  CHECK_THROWS_AS(certify_rate_optimality(f, {1.0}, {1000, 100}, 1.0), InvalidArgument);

  const TestFunction f5 = test_function("F5");
  CHECK_THROWS_AS(build_perturbation(f5, rate_report(profile_of(f5), {0.5, 0.5}), 1000, 1.0),
                  MixedDerivativesPresent);

  TestFunction sparse;
  sparse.id = "sparse";
  sparse.dim = 4;
  sparse.x0 = Point::Constant(4, 0.5);
  sparse.evaluate = [](const PointRef& x) { return x[0]; };
  sparse.alpha = {1, kInfiniteOrder, kInfiniteOrder, kInfiniteOrder};
  sparse.derivatives = {{{1, 0, 0, 0}, 1.0}};
  const RateReport rs = rate_report(profile_of(sparse), {0.25, 0.25, 0.25, 0.25});
  REQUIRE(rs.kappa_star == 2);
  CHECK_THROWS_AS(build_perturbation(sparse, rs, 1000, 1.0), InvalidArgument);
}

TEST_CASE("smaller perturbations cost less") {
  const TestFunction f = test_function("exp-sum");
  const RateReport r = rate_report(profile_of(f), {0.5, 0.5});
  double previous = std::numeric_limits<double>::infinity();
  for (double gamma = 0.5; gamma > 1e-3; gamma /= 2) {
    const double budget = l2_budget(build_perturbation_with_gamma(f, r, 10000, 1.0, gamma));
    CHECK(budget <= previous);
    previous = budget;
  }
}

TEST_CASE("normalized constants stay bounded") {
  for (const char* id : {"identity", "exp-sum"}) {
    CAPTURE(std::string(id));
    const TestFunction f = test_function(id);
    const std::vector<double> beta(static_cast<std::size_t>(f.dim), 1.0 / f.dim);
    const Certificate c = certify_rate_optimality(f, beta, {1000, 10000, 100000}, 1.0);
    CHECK(c.report.rate_exponent == rate_report(profile_of(f), beta).rate_exponent);
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const CertificateRow& row : c.rows) {
      CHECK(row.bound > 0.0);
      CHECK(row.l_factor == doctest::Approx(row.normalized / c.K));
      lo = std::min(lo, row.normalized);
      hi = std::max(hi, row.normalized);
    }
    MESSAGE(id << ": normalized constants in [" << lo << ", " << hi << "]");
    CHECK(hi <= 2 * lo);
  }
}

TEST_CASE("joint rescaling of f0 and sigma") {
  for (const char* id : {"identity", "exp-sum"}) {
    const TestFunction f = test_function(id);
    const std::vector<double> beta(static_cast<std::size_t>(f.dim), 1.0 / f.dim);
    const Certificate base = certify_rate_optimality(f, beta, {1000, 10000}, 0.7);
    for (double c : {0.5, 3.0}) {
      const Certificate other = certify_rate_optimality(scaled(f, c), beta, {1000, 10000}, 0.7 * c);
      for (std::size_t i = 0; i < base.rows.size(); ++i) {
        CHECK(other.rows[i].budget == doctest::Approx(c * c * base.rows[i].budget).epsilon(1e-9));
        CHECK(other.rows[i].l_factor == doctest::Approx(base.rows[i].l_factor).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("random designs use quasi-Monte Carlo") {
  const TestFunction f = test_function("exp-sum");
  const RateReport r = rate_report(profile_of(f), {});
  REQUIRE(r.design == DesignKind::Random);
  const Perturbation p = build_perturbation(f, r, 10000, 1.0);
  const double budget = l2_budget(p);
  CHECK(budget > 0.0);
  CHECK(budget <= 2.5);
  CHECK(l2_budget(p) == budget);
  const Certificate c = certify_rate_optimality(f, {}, {1000, 10000, 100000}, 1.0);
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const CertificateRow& row : c.rows) {
    lo = std::min(lo, row.normalized);
    hi = std::max(hi, row.normalized);
  }
  MESSAGE("random design: normalized constants in [" << lo << ", " << hi << "]");
  CHECK(hi <= 2 * lo);
}
