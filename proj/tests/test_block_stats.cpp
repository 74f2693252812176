#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "isoblock/block_stats.hpp"
#include "isoblock/errors.hpp"

#include <random>

using namespace isoblock;

namespace {

Dataset grid_data(const std::vector<std::size_t>& sides, const Eigen::VectorXd& y) {
  const DesignSpec spec = build_lattice_sides(sides, Eigen::VectorXd::Constant(static_cast<Eigen::Index>(sides.size()), 0.5));
  return Dataset(spec, spec.nodes(), y);
}

Block random_block(Rng& rng, int d) {
  Block b{Point(d), Point(d)};
  for (int k = 0; k < d; ++k) {
    const double u = rng.uniform(), v = rng.uniform();
    b.lower[k] = std::min(u, v);
    b.upper[k] = std::max(u, v);
  }
  return b;
}

// independent re-scan used as the oracle for unstructured point sets
std::pair<double, std::size_t> rescan(const Dataset& data, const Block& b) {
  double s = 0.0;
  std::size_t n = 0;
  for (Eigen::Index i = 0; i < data.points().rows(); ++i) {
    bool in = true;
    for (Eigen::Index k = 0; k < data.points().cols(); ++k) {
      in = in && data.points()(i, k) >= b.lower[k] && data.points()(i, k) <= b.upper[k];
    }
    if (in) {
      s += data.responses()[i];
      ++n;
    }
  }
  return {s, n};
}

}  // namespace

TEST_CASE("2x2 grid") {
  const Dataset data = grid_data({2, 2}, Eigen::Vector4d(1, 4, 2, 3));
  const auto table = PrefixTable<>::build(data);
  const Block all{Point::Zero(2), Point::Ones(2)};
  const BlockMean m = table.mean(all);
  CHECK(m.sum == 10.0);
  CHECK(m.mean == 2.5);
  CHECK(m.count == 4);
  const BlockMean naive = block_mean_naive(data, all);
  CHECK(naive.mean == 2.5);
  CHECK(naive.count == 4);
}

TEST_CASE("middle row of a 3x3 grid") {
  const Dataset data = grid_data({3, 3}, Eigen::VectorXd::LinSpaced(9, 1, 9));
  const auto table = PrefixTable<>::build(data);
  const std::vector<std::ptrdiff_t> lo{1, 0}, hi{1, 2};
  CHECK(table.sum(lo, hi) == 15.0);
  CHECK(table.count(lo, hi) == 3);
  const auto& a = table.coords();
  const Block row{Point(Eigen::Vector2d(a[0][1], a[1][0])), Point(Eigen::Vector2d(a[0][1], a[1][2]))};
  CHECK(block_mean_naive(data, row).sum == 15.0);
}

TEST_CASE("singleton blocks and constant fields") {
  const std::vector<std::size_t> sides{4, 5};
  Rng rng(3);
  Eigen::VectorXd y(20);
  for (auto& v : y) v = rng.uniform();
  const Dataset data = grid_data(sides, y);
  const auto table = PrefixTable<>::build(data);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Point x = data.design().node(i);
    const BlockMean m = table.mean({x, x});
    CHECK(m.count == 1);
    CHECK(std::abs(m.mean - y[static_cast<Eigen::Index>(i)]) <= 1e-14);
  }

  const Dataset flat = grid_data(sides, Eigen::VectorXd::Constant(20, 0.7));
  const auto ftable = PrefixTable<>::build(flat);
  for (int t = 0; t < 200; ++t) {
    const Block b = random_block(rng, 2);
    bool empty = false;
    try {
      block_mean_naive(flat, b);
    } catch (const EmptyBlock&) {
      empty = true;
    }
    if (empty) {
      CHECK_THROWS_AS(ftable.mean(b), EmptyBlock);
    } else {
      CHECK(ftable.mean(b).mean == doctest::Approx(0.7).epsilon(1e-14));
    }
  }
}

TEST_CASE("table totals") {
  Rng rng(5);
  Eigen::VectorXd y(7 * 6 * 5);
  for (auto& v : y) v = rng.uniform() * 100 - 50;
  const Dataset data = grid_data({7, 6, 5}, y);
  const auto table = PrefixTable<>::build(data);
  const std::vector<std::ptrdiff_t> lo{0, 0, 0}, hi{6, 5, 4};
  CHECK(table.count(lo, hi) == data.size());
  CHECK(std::abs(table.sum(lo, hi) - y.sum()) <= 1e-9 * y.cwiseAbs().sum());
  const auto ltable = PrefixTable<long double>::build(data);
  CHECK(std::abs(static_cast<double>(ltable.sum(lo, hi)) - y.sum()) <= 1e-9 * y.cwiseAbs().sum());
}

TEST_CASE("prefix and naive means agree on lattices") {
  Rng rng(11);
  for (const auto& sides : {std::vector<std::size_t>{13, 9}, std::vector<std::size_t>{6, 5, 7}, std::vector<std::size_t>{40}}) {
    std::size_t n = 1;
    for (auto s : sides) n *= s;
    Eigen::VectorXd y(static_cast<Eigen::Index>(n));
    std::normal_distribution<double> normal(3.0, 10.0);
    for (auto& v : y) v = normal(rng);
    const Dataset data = grid_data(sides, y);
    const auto table = PrefixTable<>::build(data);
    int checked = 0;
    for (int t = 0; t < 1000; ++t) {
      const Block b = random_block(rng, static_cast<int>(sides.size()));
      BlockMean naive;
      try {
        naive = block_mean_naive(data, b);
      } catch (const EmptyBlock&) {
        CHECK_THROWS_AS(table.mean(b), EmptyBlock);
        continue;
      }
      const BlockMean fast = table.mean(b);
      CHECK(fast.count == naive.count);
      CHECK(std::abs(fast.mean - naive.mean) <= 1e-10 * (1 + std::abs(naive.mean)));
      ++checked;
    }
    CHECK(checked > 100);
  }
}

TEST_CASE("unstructured point sets") {
  Rng rng(21);
  const Field one = [](const PointRef&) { return 1.0; };
  const Eigen::MatrixXd x = sample_random_design(50, 2, one, 1.0, 4);
  Eigen::VectorXd y(50);
  for (auto& v : y) v = rng.uniform();
  const Dataset data = Dataset::from_points(x, y);
  REQUIRE_FALSE(data.is_lattice());
  CHECK_THROWS_AS(PrefixTable<>::build(data), InvalidArgument);
  const auto table = PrefixTable<>::build_compressed(data);
  for (int t = 0; t < 100; ++t) {
    const Block b = random_block(rng, 2);
    const auto [s, n] = rescan(data, b);
    if (n == 0) {
      CHECK_THROWS_AS(block_mean_naive(data, b), EmptyBlock);
      CHECK_THROWS_AS(table.mean(b), EmptyBlock);
      continue;
    }
    const BlockMean naive = block_mean_naive(data, b);
    CHECK(naive.count == n);
    CHECK(naive.sum == s);
    const BlockMean fast = table.mean(b);
    CHECK(fast.count == n);
    CHECK(fast.mean == doctest::Approx(naive.mean).epsilon(1e-12));
  }
}

TEST_CASE("closed boundaries") {
  const Dataset data = grid_data({4}, Eigen::Vector4d(1, 2, 3, 4));
  const auto& axis = data.design().axes()[0];
  const Block edge{Point::Constant(1, axis[1]), Point::Constant(1, axis[2])};
  CHECK(PrefixTable<>::build(data).mean(edge).count == 2);
  CHECK(block_mean_naive(data, edge).count == 2);
  const Block gap{Point::Constant(1, axis[1] + 1e-9), Point::Constant(1, axis[2] - 1e-9)};
  CHECK_THROWS_AS(PrefixTable<>::build(data).mean(gap), EmptyBlock);
}

TEST_CASE("count grows with the block and means are affine") {
  Rng rng(8);
  Eigen::VectorXd y(64);
  for (auto& v : y) v = std::floor(rng.uniform() * 200) - 100;
  const Dataset data = grid_data({8, 8}, y);
  const auto table = PrefixTable<>::build(data);
  const auto scaled = PrefixTable<>::build(data.with_responses((4.0 * y).array() - 3.0));
  for (int t = 0; t < 500; ++t) {
    Block b = random_block(rng, 2);
    Block bigger = b;
    bigger.lower.array() -= 0.1 * rng.uniform();
    bigger.upper.array() += 0.1 * rng.uniform();
    try {
      const BlockMean m = table.mean(b);
      CHECK(table.mean(bigger).count >= m.count);
      CHECK(scaled.mean(b).mean == doctest::Approx(4.0 * m.mean - 3.0).epsilon(1e-12));
    } catch (const EmptyBlock&) {
    }
  }
}
