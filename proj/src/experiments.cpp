#include "isoblock/experiments.hpp"

#include "isoblock/errors.hpp"
#include "isoblock/estimator.hpp"
#include "isoblock/parallel.hpp"

#include <Eigen/LU>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <ostream>

namespace isoblock {

void ExperimentConfig::validate() const {
  if (functions.empty()) throw InvalidArgument("experiment needs at least one function");
  if (lattice_sides.empty()) throw InvalidArgument("experiment needs at least one lattice size");
  if (B < 2) throw InvalidArgument("B must be at least 2");
  if (!(sigma >= 0.0)) throw InvalidArgument("sigma must be nonnegative");
  for (std::size_t side : lattice_sides) {
    if (side < 4) throw InvalidArgument("lattice sides must be at least 4");
  }
  int dim = 0;
  for (const auto& id : functions) {
    const int d = test_function(id).dim;
    if (dim != 0 && d != dim) throw InvalidArgument("all functions must share one dimension");
    dim = d;
  }
  if (x0 && x0->size() != dim) throw InvalidArgument("x0 has the wrong dimension");
  if (rate_exponent && !(*rate_exponent >= 0.0)) throw InvalidArgument("rate exponent must be nonnegative");
}

double balanced_rate_exponent(const std::string& function) {
  const TestFunction f = test_function(function);
  return kappa_star_argmax(f.alpha, std::vector<double>(static_cast<std::size_t>(f.dim), 1.0 / f.dim)).rate_exponent;
}

std::vector<CdfRow> run_cdf_experiment(const ExperimentConfig& config) {
  config.validate();
  const std::size_t F = config.functions.size(), S = config.lattice_sides.size(), B = config.B;
  std::vector<TestFunction> fs;
  std::vector<double> rates;
  for (const auto& id : config.functions) {
    fs.push_back(test_function(id));
    rates.push_back(config.rate_exponent.value_or(balanced_rate_exponent(id)));
  }
  const int d = fs.front().dim;
  const Point x0 = config.x0.value_or(fs.front().x0);
  std::vector<CdfRow> rows(F * S * B);

  for (std::size_t i = 0; i < S; ++i) {
    const std::size_t side = config.lattice_sides[i];
    const DesignSpec design = build_lattice_sides(std::vector<std::size_t>(static_cast<std::size_t>(d), side), x0);
    const Eigen::MatrixXd nodes = design.nodes();
    const auto N = static_cast<double>(design.total_n());
    std::vector<Eigen::VectorXd> means(F);
    std::vector<double> truth(F);
    for (std::size_t f = 0; f < F; ++f) {
      means[f].resize(nodes.rows());
      for (Eigen::Index j = 0; j < nodes.rows(); ++j) means[f][j] = fs[f](nodes.row(j).transpose());
      truth[f] = fs[f](x0);
    }
    parallel_for(
        B,
        [&](std::size_t r) {
          Rng rng = Rng::stream(config.seed, i, r);
          Eigen::VectorXd noise = Eigen::VectorXd::Zero(nodes.rows());
          if (config.sigma > 0.0) noise = config.sigma * standard_normal(static_cast<std::size_t>(nodes.rows()), rng);
          for (std::size_t f = 0; f < F; ++f) {
            const Dataset data(design, nodes, means[f] + noise, config.sigma);
            const double fhat = max_min_estimate(PrefixTable<double>::build(data), x0).value;
            CdfRow& row = rows[(f * S + i) * B + r];
            row.function = config.functions[f];
            row.n = design.total_n();
            row.side = side;
            row.replicate = r;
            row.truth = truth[f];
            row.error = fhat - truth[f];
            row.statistic = std::pow(N, rates[f]) * row.error;
          }
        },
        config.threads);
  }
  return rows;
}

double ks_distance(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw InvalidArgument("ks_distance needs nonempty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const auto na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

namespace {

double median(std::vector<double> v) {
  const std::size_t h = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(h), v.end());
  const double upper = v[h];
  if (v.size() % 2 == 1) return upper;
  return 0.5 * (upper + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(h)));
}

}  // namespace

RateFit rate_fit(const std::vector<CdfRow>& rows, const std::string& function) {
  std::map<std::size_t, std::vector<double>> by_n;
  double scale = 0.0;
  for (const CdfRow& row : rows) {
    if (row.function != function) continue;
    by_n[row.n].push_back(std::abs(row.error));
    scale = std::max(scale, std::abs(row.truth));
  }
  if (by_n.size() < 3) throw InvalidArgument("rate fit needs at least three sample sizes");
  RateFit fit;
  for (const auto& [n, errors] : by_n) {
    const double m = median(errors);
    if (!(m > 1e-12 * (1.0 + scale))) throw DegenerateFit();
    fit.n.push_back(static_cast<double>(n));
    fit.median_abs_error.push_back(m);
  }
  const auto k = static_cast<Eigen::Index>(fit.n.size());
  Eigen::MatrixXd X(k, 2);
  Eigen::VectorXd y(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = std::log(fit.n[static_cast<std::size_t>(i)]);
    y[i] = std::log(fit.median_abs_error[static_cast<std::size_t>(i)]);
  }
  const Eigen::Vector2d coef = X.colPivHouseholderQr().solve(y);
  const double rss = (y - X * coef).squaredNorm();
  const Eigen::Matrix2d cov = (X.transpose() * X).inverse() * (rss / static_cast<double>(k - 2));
  fit.slope = coef[1];
  fit.stderr_slope = std::sqrt(cov(1, 1));
  return fit;
}

RateFit rate_fit(const ExperimentConfig& config, const std::string& function) {
  ExperimentConfig single = config;
  single.functions = {function};
  return rate_fit(run_cdf_experiment(single), function);
}

void write_cdf_csv(std::ostream& out, const std::vector<CdfRow>& rows) {
  out << "function,n,side,replicate,error,statistic\n" << std::setprecision(17);
  for (const CdfRow& r : rows) {
    out << r.function << ',' << r.n << ',' << r.side << ',' << r.replicate << ',' << r.error << ',' << r.statistic
        << '\n';
  }
}

void write_qq_csv(std::ostream& out, const std::vector<CdfRow>& rows, const ExperimentConfig& config) {
  out << "side,n,function_x,function_y,probability,quantile_x,quantile_y\n" << std::setprecision(17);
  const std::size_t S = config.lattice_sides.size(), B = config.B;
  auto sorted_stats = [&](std::size_t f, std::size_t i) {
    std::vector<double> v;
    for (std::size_t r = 0; r < B; ++r) v.push_back(rows[(f * S + i) * B + r].statistic);
    std::sort(v.begin(), v.end());
    return v;
  };
  for (std::size_t i = 0; i < S; ++i) {
    const std::vector<double> x = sorted_stats(0, i);
    for (std::size_t f = 1; f < config.functions.size(); ++f) {
      const std::vector<double> y = sorted_stats(f, i);
      for (std::size_t r = 0; r < B; ++r) {
        out << config.lattice_sides[i] << ',' << rows[(f * S + i) * B].n << ',' << config.functions[0] << ','
            << config.functions[f] << ',' << (static_cast<double>(r) + 0.5) / static_cast<double>(B) << ',' << x[r]
            << ',' << y[r] << '\n';
      }
    }
  }
}

}  // namespace isoblock
