#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "isoblock/errors.hpp"
#include "isoblock/rates.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace isoblock;

namespace {

constexpr int inf = kInfiniteOrder;

std::vector<double> balanced(int d) { return std::vector<double>(static_cast<std::size_t>(d), 1.0 / d); }

struct Draw {
  std::vector<int> alpha;
  std::vector<double> beta;
};

Draw random_draw(Rng& rng) {
  const int d = 1 + static_cast<int>(rng() % 5);
  Draw out;
  const int choices[] = {1, 3, 5, 7, inf};
  double total = 0.0;
  for (int k = 0; k < d; ++k) {
    out.alpha.push_back(choices[rng() % 5]);
    out.beta.push_back(0.05 + rng.uniform());
    total += out.beta.back();
  }
  for (auto& b : out.beta) b /= total;
  return out;
}

SmoothnessProfile profile(std::vector<int> alpha, std::vector<double> derivs) {
  SmoothnessProfile p;
  p.x0 = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(alpha.size()), 0.5);
  p.alpha = std::move(alpha);
  p.marginal_derivs = std::move(derivs);
  return p;
}

}  // namespace

TEST_CASE("rational arithmetic") {
  CHECK(Rational::parse("1/3") == Rational(1, 3));
  CHECK(Rational::parse("2/6") == Rational(1, 3));
  CHECK(Rational::parse("0.25") == Rational(1, 4));
  CHECK(Rational::parse("-3") == Rational(-3));
  CHECK(Rational(1, 3) + Rational(1, 6) == Rational(1, 2));
  CHECK(Rational(1, 3) - Rational(1, 2) == Rational(-1, 6));
  CHECK(Rational(2, 3) * Rational(3, 4) == Rational(1, 2));
  CHECK(Rational(1, 3) / Rational(2, 3) == Rational(1, 2));
  CHECK(Rational(1, 3) < Rational(1, 2));
  CHECK(Rational(3, -6).str() == "-1/2");
  CHECK_THROWS_AS(Rational::parse("a/b"), InvalidArgument);
  CHECK_THROWS_AS(Rational(1, 0), InvalidArgument);
}

TEST_CASE("index sets") {
  const IndexSets a = index_sets({1, 1}, 2);
  CHECK(a.J_star == std::vector<MultiIndex>{{0, 1}, {1, 0}});
  CHECK(a.J1.empty());
  CHECK(a.J == a.J_star);

  const IndexSets b = index_sets({3, 3}, 2);
  for (const MultiIndex& j : {MultiIndex{3, 0}, MultiIndex{0, 3}, MultiIndex{1, 2}, MultiIndex{2, 1}}) {
    CHECK(std::find(b.J_star.begin(), b.J_star.end(), j) != b.J_star.end());
  }
  CHECK(b.J1 == std::vector<MultiIndex>{{1, 2}, {2, 1}});

  CHECK(index_sets({3, 5}, 2).J1.empty());
  // inactive coordinates never appear
  for (const MultiIndex& j : index_sets({3, inf}, 1).J) CHECK(j[1] == 0);
  CHECK_THROWS_AS(index_sets({inf, inf}, 0), InvalidArgument);
}

TEST_CASE("worked rate examples") {
  const RateReport balanced2 = kappa_star_argmax({1, 1}, balanced(2));
  CHECK(balanced2.kappa_star == 1);
  CHECK(balanced2.unique);
  CHECK(balanced2.rate_exponent == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(balanced2.n_star_exponent == doctest::Approx(1.0));
  CHECK(kappa_star_argmax({1, 1}, std::vector<Rational>{{1, 2}, {1, 2}}).rate_exponent == 0.25);

  const std::vector<Rational> quarters(4, Rational(1, 4));
  const RateReport sparse = kappa_star_argmax({1, inf, inf, inf}, quarters);
  CHECK(sparse.kappa_star == 2);
  CHECK(sparse.unique);
  CHECK(sparse.n_star_exponent == 0.75);
  CHECK(sparse.rate_exponent == 0.375);
  CHECK(sparse.effective_dims == std::vector<int>{2, 3, 4});
  CHECK(kappa_star_fixed_point({1, inf, inf, inf}, quarters) == 2);

  const std::vector<Rational> thirds(3, Rational(1, 3));
  const RateReport tie = kappa_star_argmax({1, inf, inf}, thirds);
  CHECK_FALSE(tie.unique);
  CHECK(tie.objective[0] == doctest::Approx(1.0 / 3));
  CHECK(tie.objective[1] == doctest::Approx(1.0 / 3));
  CHECK(tie.rate_exponent == doctest::Approx(1.0 / 3));
  CHECK_THROWS_AS(kappa_star_fixed_point({1, inf, inf}, thirds), DegenerateBoundary);
  // the floating path sees the same tie through its tolerance
  CHECK_FALSE(kappa_star_argmax({1, inf, inf}, balanced(3)).unique);
  CHECK_THROWS_AS(kappa_star_fixed_point({1, inf, inf}, balanced(3)), DegenerateBoundary);

  CHECK(kappa_star_fixed_point({5}, std::vector<double>{1.0}) == 1);
  CHECK(kappa_star_argmax({inf}, std::vector<double>{1.0}).rate_exponent == 0.5);
}

TEST_CASE("phase transition at alpha = (d - s) / 2") {
  for (int d = 1; d <= 6; ++d) {
    for (int s = 1; s <= d; ++s) {
      for (int a = 1; a <= 9; a += 2) {
        std::vector<int> alpha(static_cast<std::size_t>(d), inf);
        std::fill_n(alpha.begin(), s, a);
        std::vector<Rational> beta(static_cast<std::size_t>(d), Rational(1, d));
        if (2 * a == d - s) {
          CHECK_THROWS_AS(kappa_star_fixed_point(alpha, beta), DegenerateBoundary);
          continue;
        }
        const int kappa = kappa_star_fixed_point(alpha, beta);
        CHECK((kappa == 1) == (2 * a > d - s));
        CHECK(kappa_star_argmax(alpha, beta).kappa_star == kappa);
      }
    }
  }
}

TEST_CASE("argmax and fixed-point definitions agree") {
  Rng rng(2024);
  int compared = 0;
  for (int t = 0; t < 1000; ++t) {
    const Draw draw = random_draw(rng);
    const RateReport r = kappa_star_argmax(draw.alpha, draw.beta);
    REQUIRE(r.unique);
    CHECK(kappa_star_fixed_point(draw.alpha, draw.beta) == r.kappa_star);
    ++compared;

    // omega^{(l)} solves its own fixed-point equation, and l = kappa* gives the fastest rate
    const double n = 1e6;
    std::vector<double> rates;
    for (int l = 1; l <= static_cast<int>(r.alpha.size()); ++l) {
      const double w = fixed_point_rate(r.alpha, r.beta, l, n);
      double log_rhs = 0.0;
      for (std::size_t k = static_cast<std::size_t>(l - 1); k < r.alpha.size(); ++k) {
        log_rhs += inverse_order(r.alpha[k]) * std::log(w) + r.beta[k] * std::log(n);
      }
      CHECK(std::log(w) == doctest::Approx(-0.5 * log_rhs).epsilon(1e-10));
      rates.push_back(w);
    }
    CHECK(*std::min_element(rates.begin(), rates.end()) == doctest::Approx(r.omega(n)).epsilon(1e-10));
    CHECK(rates[static_cast<std::size_t>(r.kappa_star - 1)] == doctest::Approx(r.omega(n)).epsilon(1e-10));
  }
  CHECK(compared == 1000);
}

TEST_CASE("rate invariants") {
  Rng rng(9);
  for (int t = 0; t < 300; ++t) {
    Draw draw = random_draw(rng);
    const RateReport r = kappa_star_argmax(draw.alpha, draw.beta);
    CHECK(r.rate_exponent > 0.0);
    CHECK(r.rate_exponent <= 0.5 + 1e-15);
    CHECK(r.rate_exponent >= random_design_rates(draw.alpha).rate_exponent - 1e-12);
    CHECK(r.n_star_exponent == doctest::Approx(std::accumulate(r.beta.begin() + r.kappa_star - 1, r.beta.end(), 0.0)));

    // relabelling the coordinates changes nothing
    std::vector<std::size_t> perm(draw.alpha.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Draw shuffled;
    for (std::size_t k : perm) {
      shuffled.alpha.push_back(draw.alpha[k]);
      shuffled.beta.push_back(draw.beta[k]);
    }
    const RateReport q = kappa_star_argmax(shuffled.alpha, shuffled.beta);
    CHECK(q.rate_exponent == doctest::Approx(r.rate_exponent).epsilon(1e-14));
    CHECK(q.alpha == r.alpha);

    // smoother effective coordinates never slow the rate
    for (int k = r.kappa_star - 1; k < r.s; ++k) {
      const int original = r.permutation[static_cast<std::size_t>(k)];
      Draw smoother = draw;
      smoother.alpha[static_cast<std::size_t>(original)] += 2;
      CHECK(kappa_star_argmax(smoother.alpha, smoother.beta).rate_exponent >= r.rate_exponent - 1e-14);
    }
  }
}

TEST_CASE("random design rates") {
  const RateReport r = random_design_rates({3, 1, inf});
  CHECK(r.kappa_star == 1);
  CHECK(r.n_star_exponent == 1.0);
  CHECK(r.alpha == std::vector<int>{1, 3, inf});
  CHECK(r.permutation == std::vector<int>{1, 0, 2});
  CHECK(r.rate_exponent == doctest::Approx(1.0 / (2.0 + 1.0 + 1.0 / 3)));
  CHECK(r.omega(1e4) == doctest::Approx(std::pow(1e4, -r.rate_exponent)));
}

TEST_CASE("K constant") {
  const double e = std::exp(1.0);
  const SmoothnessProfile exp_sum = profile_of(test_function("exp-sum"));
  const KConstant k1 = k_constant(exp_sum, rate_report(exp_sum, {0.5, 0.5}));
  CHECK(k1.K == doctest::Approx(std::sqrt(e / 2)).epsilon(1e-14));
  CHECK(k1.K == doctest::Approx(1.16582).epsilon(1e-5));
  CHECK_FALSE(k1.density_adjusted);

  const SmoothnessProfile lin = profile_of(test_function("lin-exp"));
  CHECK(k_constant(lin, rate_report(lin, {0.5, 0.5})).K == doctest::Approx(k1.K).epsilon(1e-14));

  // pure noise: the product is empty
  const SmoothnessProfile sparse = profile({1, inf, inf, inf}, {2.0, 0.0, 0.0, 0.0});
  const RateReport rs = rate_report(sparse, {0.25, 0.25, 0.25, 0.25});
  REQUIRE(rs.kappa_star == 2);
  CHECK(k_constant(sparse, rs).K == 1.0);

  // F5 carries critical mixed derivatives
  const SmoothnessProfile f5 = profile_of(test_function("F5"));
  CHECK_THROWS_AS(k_constant(f5, rate_report(f5, {0.5, 0.5})), MixedDerivativesPresent);
}

TEST_CASE("K scales with the marginal derivatives") {
  const SmoothnessProfile base = profile({1, 3, inf}, {1.7, 0.4, 0.0});
  const RateReport r = rate_report(base, {});
  const double k = k_constant(base, r).K;
  for (double c : {0.1, 2.0, 37.0}) {
    SmoothnessProfile scaled = base;
    for (auto& v : scaled.marginal_derivs) v *= c;
    const double sum = 1.0 + 1.0 / 3;
    CHECK(k_constant(scaled, r).K == doctest::Approx(k * std::pow(c, sum / (2 + sum))).epsilon(1e-13));
  }
  // closed form
  const double expected = std::pow(std::pow(1.7 / 2, 1.0) * std::pow(0.4 / 24, 1.0 / 3), 1.0 / (2 + 4.0 / 3));
  CHECK(k == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("density rescaling for random designs") {
  SmoothnessProfile p = profile({1, 1}, {2.0, 3.0});
  p.density_at_x0 = 4.0;
  const KConstant k = k_constant(p, rate_report(p, {}));
  REQUIRE(k.density_adjusted);
  CHECK(*k.density_adjusted == doctest::Approx(k.K * std::pow(4.0, -0.25)).epsilon(1e-14));
}

TEST_CASE("profile validation") {
  CHECK_THROWS_AS(profile({2, 1}, {1.0, 1.0}).validate(), InvalidArgument);
  CHECK_THROWS_AS(profile({1, 1}, {1.0, -1.0}).validate(), InvalidArgument);
  SmoothnessProfile off = profile({3, 3}, {1.0, 1.0});
  off.mixed_derivs[{1, 1}] = 1.0;
  CHECK_THROWS_AS(off.validate(), InvalidArgument);
  CHECK_THROWS_AS(kappa_star_argmax({1, 1}, std::vector<double>{0.7, 0.7}), InvalidArgument);
}
