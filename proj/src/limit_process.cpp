#include "isoblock/limit_process.hpp"

#include "isoblock/errors.hpp"
#include "isoblock/parallel.hpp"
#include "isoblock/rng.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace isoblock {

namespace {

Eigen::VectorXd geometric_knots(double lo, double hi, int m) {
  Eigen::VectorXd knots(m);
  const double ratio = std::log(hi / lo);
  for (int i = 0; i < m; ++i) knots[i] = lo * std::exp(ratio * i / (m - 1));
  knots[0] = lo;
  knots[m - 1] = hi;
  return knots;
}

std::vector<std::size_t> row_major(const std::vector<std::size_t>& sizes) {
  std::vector<std::size_t> strides(sizes.size(), 1);
  for (std::size_t k = sizes.size(); k-- > 1;) strides[k - 1] = strides[k] * sizes[k];
  return strides;
}

// knot vector of sheet `sheet` along axis e
const Eigen::VectorXd& sheet_axis(const std::vector<Eigen::VectorXd>& lower, const std::vector<Eigen::VectorXd>& upper,
                                  std::size_t sheet, std::size_t e) {
  return (sheet >> e) & 1u ? upper[e] : lower[e];
}

}  // namespace

int SupInfConfig::s() const {
  return static_cast<int>(std::count_if(alpha.begin(), alpha.end(), is_finite_order));
}

void SupInfConfig::validate() const {
  if (dim < 1 || static_cast<int>(alpha.size()) != dim) throw InvalidArgument("alpha must have length dim");
  const int sv = s();
  for (int k = 0; k < dim; ++k) {
    const int a = alpha[static_cast<std::size_t>(k)];
    if ((k < sv) != is_finite_order(a)) throw InvalidArgument("alpha must list finite entries first");
    if (k < sv && (a < 1 || a % 2 == 0)) throw InvalidArgument("finite alpha entries must be odd positive");
  }
  if (kappa_star < 1 || kappa_star > dim || kappa_star > sv + 1) {
    throw InvalidArgument("kappa* must lie in 1..min(d, s+1)");
  }
  if (!(c > 1.0)) throw InvalidArgument("truncation radius c must exceed 1");
  if (!(gamma_star > 0.0)) throw InvalidArgument("gamma* must be positive");
  if (m < 8) throw InvalidArgument("need at least 8 knots per axis");
  if (static_cast<int>(caps.size()) != dim - sv) throw InvalidArgument("need one cap pair per inactive axis");
  const double floor = std::pow(c, -gamma_star);
  for (const auto& [lo, hi] : caps) {
    if (!(lo > floor && hi > floor)) throw InvalidArgument("boundary caps must exceed c^{-gamma*}");
  }
  for (const DriftTerm& t : terms) {
    if (static_cast<int>(t.j.size()) != dim) throw InvalidArgument("drift index has wrong length");
    for (int k = 0; k < dim; ++k) {
      const int jk = t.j[static_cast<std::size_t>(k)];
      if (jk < 0 || (jk > 0 && (k < kappa_star - 1 || k >= sv))) {
        throw InvalidArgument("drift index must live on axes kappa*..s");
      }
    }
    if (!std::isfinite(t.coefficient)) throw InvalidArgument("drift coefficient must be finite");
  }
}

std::vector<Eigen::VectorXd> SupInfConfig::lower_knots() const {
  const int sv = s();
  const double lo = std::pow(c, -gamma_star);
  std::vector<Eigen::VectorXd> knots;
  for (int k = kappa_star - 1; k < dim; ++k) {
    knots.push_back(geometric_knots(lo, k < sv ? c : caps[static_cast<std::size_t>(k - sv)].first, m));
  }
  return knots;
}

std::vector<Eigen::VectorXd> SupInfConfig::upper_knots() const {
  const int sv = s();
  const double lo = std::pow(c, -gamma_star);
  std::vector<Eigen::VectorXd> knots;
  for (int k = kappa_star - 1; k < dim; ++k) {
    knots.push_back(geometric_knots(lo, k < sv ? c : caps[static_cast<std::size_t>(k - sv)].second, m));
  }
  return knots;
}

SupInfConfig SupInfConfig::d_alpha(const std::vector<int>& alpha, int kappa_star) {
  SupInfConfig config;
  config.dim = static_cast<int>(alpha.size());
  config.alpha = alpha;
  config.kappa_star = kappa_star;
  config.drift = DriftKind::DAlpha;
  const int sv = config.s();
  for (int k = kappa_star - 1; k < sv; ++k) {
    MultiIndex j(alpha.size(), 0);
    j[static_cast<std::size_t>(k)] = alpha[static_cast<std::size_t>(k)];
    config.terms.push_back({j, 1.0});
  }
  config.caps.assign(static_cast<std::size_t>(config.dim - sv), {0.5, 0.5});
  config.validate();
  return config;
}

SupInfConfig SupInfConfig::full(const SmoothnessProfile& profile, const RateReport& report) {
  profile.validate();
  const int d = profile.dim();
  SupInfConfig config;
  config.dim = d;
  config.alpha = report.alpha;
  config.kappa_star = report.kappa_star;
  config.drift = DriftKind::Full;
  const int sv = report.s;
  for (int k = sv; k < d; ++k) {
    const double x = profile.x0[report.permutation[static_cast<std::size_t>(k)]];
    config.caps.emplace_back(x, 1.0 - x);
  }
  if (sv >= 1) {
    for (const MultiIndex& j : index_sets(report.alpha, sv).J_star) {
      bool collapsed = false;
      for (int k = 0; k < report.kappa_star - 1; ++k) collapsed |= j[static_cast<std::size_t>(k)] != 0;
      if (collapsed) continue;
      MultiIndex original(static_cast<std::size_t>(d), 0);
      int nonzero = 0, last = 0;
      for (int k = 0; k < d; ++k) {
        const int jk = j[static_cast<std::size_t>(k)];
        original[static_cast<std::size_t>(report.permutation[static_cast<std::size_t>(k)])] = jk;
        if (jk != 0) {
          ++nonzero;
          last = report.permutation[static_cast<std::size_t>(k)];
        }
      }
      double derivative = 0.0;
      if (nonzero == 1) {
        derivative = profile.marginal_derivs[static_cast<std::size_t>(last)];
      } else if (const auto it = profile.mixed_derivs.find(original); it != profile.mixed_derivs.end()) {
        derivative = it->second;
      }
      if (derivative != 0.0) config.terms.push_back({j, derivative / shifted_factorial(j)});
    }
  }
  config.validate();
  return config;
}

// ---------------------------------------------------------------- sheets

SheetField::SheetField(std::vector<Eigen::VectorXd> lower_knots, std::vector<Eigen::VectorXd> upper_knots,
                       std::vector<Eigen::VectorXd> sheets, std::uint64_t seed)
    : lower_(std::move(lower_knots)), upper_(std::move(upper_knots)), sheets_(std::move(sheets)), seed_(seed) {
  const std::size_t ds = lower_.size();
  if (upper_.size() != ds || sheets_.size() != (std::size_t{1} << ds)) {
    throw InvalidArgument("sheet field: inconsistent axes");
  }
  for (std::size_t i = 0; i < sheets_.size(); ++i) {
    std::vector<std::size_t> sizes;
    for (std::size_t e = 0; e < ds; ++e) sizes.push_back(static_cast<std::size_t>(sheet_axis(lower_, upper_, i, e).size()));
    strides_.push_back(row_major(sizes));
  }
}

double SheetField::operator()(std::span<const std::size_t> a, std::span<const std::size_t> b) const {
  double g = 0.0;
  for (std::size_t i = 0; i < sheets_.size(); ++i) {
    std::size_t index = 0;
    for (std::size_t e = 0; e < lower_.size(); ++e) index += ((i >> e) & 1u ? b[e] : a[e]) * strides_[i][e];
    g += sheets_[i][static_cast<Eigen::Index>(index)];
  }
  return g;
}

double SheetField::variance(std::span<const std::size_t> a, std::span<const std::size_t> b) const {
  double v = 1.0;
  for (std::size_t e = 0; e < lower_.size(); ++e) {
    v *= lower_[e][static_cast<Eigen::Index>(a[e])] + upper_[e][static_cast<Eigen::Index>(b[e])];
  }
  return v;
}

SheetField sample_sheet(const std::vector<Eigen::VectorXd>& lower_knots,
                        const std::vector<Eigen::VectorXd>& upper_knots, std::uint64_t seed) {
  const std::size_t ds = lower_knots.size();
  if (ds == 0 || upper_knots.size() != ds) throw InvalidArgument("sample_sheet: need matching nonempty axes");
  std::vector<Eigen::VectorXd> sheets;
  for (std::size_t i = 0; i < (std::size_t{1} << ds); ++i) {
    std::vector<std::size_t> sizes;
    std::vector<Eigen::VectorXd> widths;
    for (std::size_t e = 0; e < ds; ++e) {
      const Eigen::VectorXd& t = sheet_axis(lower_knots, upper_knots, i, e);
      Eigen::VectorXd w(t.size());
      for (Eigen::Index l = 0; l < t.size(); ++l) {
        w[l] = t[l] - (l == 0 ? 0.0 : t[l - 1]);
        if (!(w[l] > 0.0)) throw InvalidArgument("sample_sheet: knots must be positive and increasing");
      }
      sizes.push_back(static_cast<std::size_t>(t.size()));
      widths.push_back(std::move(w));
    }
    const std::vector<std::size_t> strides = row_major(sizes);
    const std::size_t total = strides[0] * sizes[0];
    Rng rng = Rng::stream(seed, i);
    std::normal_distribution<double> normal;
    Eigen::VectorXd sheet(static_cast<Eigen::Index>(total));
    for (std::size_t flat = 0; flat < total; ++flat) {
      double volume = 1.0;
      for (std::size_t e = 0; e < ds; ++e) volume *= widths[e][static_cast<Eigen::Index>((flat / strides[e]) % sizes[e])];
      sheet[static_cast<Eigen::Index>(flat)] = std::sqrt(volume) * normal(rng);
    }
    // cumulative sums along every axis turn cell increments into sheet values
    for (std::size_t e = 0; e < ds; ++e) {
      for (std::size_t flat = 0; flat < total; ++flat) {
        if ((flat / strides[e]) % sizes[e] != 0) {
          sheet[static_cast<Eigen::Index>(flat)] += sheet[static_cast<Eigen::Index>(flat - strides[e])];
        }
      }
    }
    sheets.push_back(std::move(sheet));
  }
  return SheetField(lower_knots, upper_knots, std::move(sheets), seed);
}

SheetField sample_sheet(const SupInfConfig& config, std::uint64_t seed) {
  config.validate();
  return sample_sheet(config.lower_knots(), config.upper_knots(), seed);
}

double sheet_covariance(const PointRef& h1, const PointRef& h2, const PointRef& h1p, const PointRef& h2p) {
  return (h1.cwiseMin(h1p) + h2.cwiseMin(h2p)).prod();
}

// ---------------------------------------------------------------- sup-inf

double sup_inf_statistic(const SheetField& field, const SupInfConfig& config) {
  const std::size_t ds = static_cast<std::size_t>(config.d_star());
  if (static_cast<std::size_t>(field.d_star()) != ds) throw InvalidArgument("field and config disagree on d*");
  const auto& lower = field.lower_knots();
  const auto& upper = field.upper_knots();
  for (const auto& sheet : field.sheets()) {
    if (!sheet.allFinite()) throw NonFiniteField();
  }

  std::vector<std::size_t> na(ds), nb(ds);
  for (std::size_t e = 0; e < ds; ++e) {
    na[e] = static_cast<std::size_t>(lower[e].size());
    nb[e] = static_cast<std::size_t>(upper[e].size());
  }
  const std::vector<std::size_t> sa = row_major(na), sb = row_major(nb);
  const std::size_t A = sa[0] * na[0], B = sb[0] * nb[0];

  // per-sheet offsets contributed by the h1 digits and by the h2 digits
  const std::size_t sheets = std::size_t{1} << ds;
  std::vector<std::vector<std::size_t>> strides(sheets);
  for (std::size_t i = 0; i < sheets; ++i) {
    std::vector<std::size_t> sizes(ds);
    for (std::size_t e = 0; e < ds; ++e) sizes[e] = (i >> e) & 1u ? nb[e] : na[e];
    strides[i] = row_major(sizes);
  }
  std::vector<std::vector<std::size_t>> off_a(sheets, std::vector<std::size_t>(A, 0)),
      off_b(sheets, std::vector<std::size_t>(B, 0));
  std::vector<std::size_t> digit_a(A * ds), digit_b(B * ds);
  for (std::size_t a = 0; a < A; ++a) {
    for (std::size_t e = 0; e < ds; ++e) digit_a[a * ds + e] = (a / sa[e]) % na[e];
  }
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t e = 0; e < ds; ++e) digit_b[b * ds + e] = (b / sb[e]) % nb[e];
  }
  for (std::size_t i = 0; i < sheets; ++i) {
    for (std::size_t e = 0; e < ds; ++e) {
      if ((i >> e) & 1u) {
        for (std::size_t b = 0; b < B; ++b) off_b[i][b] += digit_b[b * ds + e] * strides[i][e];
      } else {
        for (std::size_t a = 0; a < A; ++a) off_a[i][a] += digit_a[a * ds + e] * strides[i][e];
      }
    }
  }

  // per-axis tables: (h1 + h2) and the drift factor of every term
  const std::size_t first = static_cast<std::size_t>(config.kappa_star - 1);
  std::vector<Eigen::MatrixXd> denom(ds);
  for (std::size_t e = 0; e < ds; ++e) {
    denom[e] = lower[e].replicate(1, static_cast<Eigen::Index>(nb[e])).rowwise() + upper[e].transpose();
  }
  struct Factor {
    std::size_t axis;
    Eigen::MatrixXd table;
  };
  std::vector<std::vector<Factor>> factors(config.terms.size());
  for (std::size_t t = 0; t < config.terms.size(); ++t) {
    for (std::size_t e = 0; e < ds; ++e) {
      const int j = config.terms[t].j[first + e];
      if (j == 0) continue;
      Eigen::MatrixXd table(lower[e].size(), upper[e].size());
      for (Eigen::Index a = 0; a < table.rows(); ++a) {
        for (Eigen::Index b = 0; b < table.cols(); ++b) {
          const double h1 = lower[e][a], h2 = upper[e][b];
          table(a, b) = (std::pow(h2, j + 1) - std::pow(-h1, j + 1)) / (h1 + h2);
        }
      }
      factors[t].push_back({e, std::move(table)});
    }
  }

  auto U = [&](std::size_t a, std::size_t b) {
    double g = 0.0;
    for (std::size_t i = 0; i < sheets; ++i) g += field.sheets()[i][static_cast<Eigen::Index>(off_a[i][a] + off_b[i][b])];
    double den = 1.0;
    for (std::size_t e = 0; e < ds; ++e) {
      den *= denom[e](static_cast<Eigen::Index>(digit_a[a * ds + e]), static_cast<Eigen::Index>(digit_b[b * ds + e]));
    }
    double drift = 0.0;
    for (std::size_t t = 0; t < factors.size(); ++t) {
      double term = config.terms[t].coefficient;
      for (const Factor& f : factors[t]) {
        term *= f.table(static_cast<Eigen::Index>(digit_a[a * ds + f.axis]),
                        static_cast<Eigen::Index>(digit_b[b * ds + f.axis]));
      }
      drift += term;
    }
    return g / den + drift;
  };

  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < A; ++a) {
    double running = std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < B; ++b) {
      const double u = U(a, b);
      if (!std::isfinite(u)) throw NonFiniteField();
      if (u < running) {
        running = u;
        if (running <= best) break;
      }
    }
    best = std::max(best, running);
  }
  return best;
}

LimitSample sample_limit_distribution(const SupInfConfig& config, std::size_t M, std::uint64_t seed, double scale,
                                      unsigned threads) {
  if (M < 1) throw InvalidArgument("need at least one draw");
  config.validate();
  const auto lower = config.lower_knots();
  const auto upper = config.upper_knots();
  LimitSample out;
  out.config = config;
  out.scale = scale;
  out.seed = seed;
  out.draws.resize(static_cast<Eigen::Index>(M));
  parallel_for(
      M,
      [&](std::size_t r) {
        const SheetField field = sample_sheet(lower, upper, Rng::stream(seed, r)());
        out.draws[static_cast<Eigen::Index>(r)] = scale * sup_inf_statistic(field, config);
      },
      threads);
  return out;
}

LimitSample sample_limit_distribution(const SmoothnessProfile& profile, const RateReport& report, std::size_t M,
                                      std::uint64_t seed, const GridOptions& grid, unsigned threads) {
  double scale = 1.0;
  SupInfConfig config;
  try {
    scale = k_constant(profile, report).K;
    config = SupInfConfig::d_alpha(report.alpha, report.kappa_star);
    const SupInfConfig full = SupInfConfig::full(profile, report);
    config.caps = full.caps;
  } catch (const MixedDerivativesPresent&) {
    scale = 1.0;
    config = SupInfConfig::full(profile, report);
  }
  config.c = grid.c;
  config.gamma_star = grid.gamma_star;
  config.m = grid.m;
  return sample_limit_distribution(config, M, seed, scale, threads);
}

// ---------------------------------------------------------------- Chernoff

Eigen::VectorXd gcm_values(const Eigen::VectorXd& t, const Eigen::VectorXd& z) {
  const auto hull = greatest_convex_minorant(t, z);
  Eigen::VectorXd out(t.size());
  std::size_t seg = 0;
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    while (seg + 2 < hull.size() && t[hull[seg + 1]] <= t[i]) ++seg;
    const Eigen::Index a = hull[seg], b = hull[std::min(seg + 1, hull.size() - 1)];
    out[i] = a == b ? z[a] : z[a] + (z[b] - z[a]) * (t[i] - t[a]) / (t[b] - t[a]);
  }
  return out;
}

double chernoff_statistic(const Eigen::VectorXd& left_increments, const Eigen::VectorXd& right_increments,
                          double step) {
  const Eigen::Index N = left_increments.size();
  if (N < 1 || right_increments.size() != N) throw InvalidArgument("chernoff: need equal nonempty sides");
  Eigen::VectorXd t(2 * N), z(2 * N);
  double b = 0.0;
  for (Eigen::Index j = 1; j <= N; ++j) {
    b += left_increments[j - 1];
    const double tj = -static_cast<double>(j) * step;
    t[N - j] = tj;
    z[N - j] = b + tj * tj;
  }
  b = 0.0;
  for (Eigen::Index j = 1; j <= N; ++j) {
    b += right_increments[j - 1];
    const double tj = static_cast<double>(j) * step;
    t[N + j - 1] = tj;
    z[N + j - 1] = b + tj * tj;
  }
  const auto hull = greatest_convex_minorant(t, z);
  for (std::size_t v = 0; v + 1 < hull.size(); ++v) {
    if (t[hull[v]] < 0.0 && t[hull[v + 1]] > 0.0) {
      return (z[hull[v + 1]] - z[hull[v]]) / (t[hull[v + 1]] - t[hull[v]]);
    }
  }
  throw NonFiniteField();  // unreachable: both end points belong to the hull
}

Eigen::VectorXd chernoff_sample(std::size_t M, double T, double step, std::uint64_t seed, unsigned threads) {
  if (M < 1) throw InvalidArgument("need at least one draw");
  if (!(T >= 4.0) || !(step > 0.0 && step <= 0.05)) throw InvalidArgument("chernoff: need T >= 4 and step <= 0.05");
  const auto N = static_cast<std::size_t>(std::floor(T / step + 1e-9));
  Eigen::VectorXd draws(static_cast<Eigen::Index>(M));
  const double sd = std::sqrt(step);
  parallel_for(
      M,
      [&](std::size_t r) {
        Rng rng = Rng::stream(seed, r);
        const Eigen::VectorXd left = sd * standard_normal(N, rng);
        const Eigen::VectorXd right = sd * standard_normal(N, rng);
        draws[static_cast<Eigen::Index>(r)] = chernoff_statistic(left, right, step);
      },
      threads);
  return draws;
}

}  // namespace isoblock
