#include "isoblock/design.hpp"

#include "isoblock/errors.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

namespace isoblock {

namespace {

std::vector<std::size_t> row_major_strides(const std::vector<std::size_t>& sizes) {
  std::vector<std::size_t> strides(sizes.size(), 1);
  for (std::size_t k = sizes.size(); k-- > 1;) strides[k - 1] = strides[k] * sizes[k];
  return strides;
}

// floor(n^beta), snapping values within 1e-9 (relative) below an integer up to it,
// so that e.g. 4096^{1/4} and 3375^{1/3} give 8 and 15.
std::size_t floor_power(std::size_t n, double beta) {
  const double p = std::pow(static_cast<double>(n), beta);
  const double up = std::ceil(p);
  if (up - p <= 1e-9 * std::max(1.0, p)) return static_cast<std::size_t>(up);
  return static_cast<std::size_t>(std::floor(p));
}

Eigen::VectorXd axis_through(double x0, std::size_t size) {
  const auto n = static_cast<double>(size);
  // node nearest to x0 among the cell midpoints (j + 1/2) / n
  const auto anchor = static_cast<double>(
      std::min<std::size_t>(size - 1, static_cast<std::size_t>(std::floor(x0 * n))));
  Eigen::VectorXd axis(static_cast<Eigen::Index>(size));
  for (std::size_t j = 0; j < size; ++j) {
    axis[static_cast<Eigen::Index>(j)] =
        std::clamp(x0 + (static_cast<double>(j) - anchor) / n, 0.0, 1.0);
  }
  axis[static_cast<Eigen::Index>(anchor)] = x0;
  return axis;
}

void check_interior(const Eigen::VectorXd& x0) {
  for (Eigen::Index k = 0; k < x0.size(); ++k) {
    if (!(x0[k] > 0.0 && x0[k] < 1.0)) {
      throw InvalidArgument("x0 must lie in the open unit cube");
    }
  }
}

}  // namespace

DesignSpec DesignSpec::grid(std::vector<Eigen::VectorXd> axes) {
  if (axes.empty()) throw InvalidArgument("grid needs at least one axis");
  DesignSpec spec;
  spec.kind_ = DesignKind::FixedLattice;
  spec.dim_ = static_cast<int>(axes.size());
  spec.total_n_ = 1;
  for (const auto& axis : axes) {
    if (axis.size() == 0) throw InvalidArgument("empty grid axis");
    for (Eigen::Index j = 1; j < axis.size(); ++j) {
      if (!(axis[j] > axis[j - 1])) throw InvalidArgument("grid axis must be strictly increasing");
    }
    spec.sizes_.push_back(static_cast<std::size_t>(axis.size()));
    spec.total_n_ *= static_cast<std::size_t>(axis.size());
  }
  spec.strides_ = row_major_strides(spec.sizes_);
  spec.beta_.resize(spec.dim_);
  const double log_n = std::log(static_cast<double>(spec.total_n_));
  for (int k = 0; k < spec.dim_; ++k) {
    spec.beta_[k] = log_n > 0 ? std::log(static_cast<double>(spec.sizes_[k])) / log_n : 0.0;
  }
  spec.axes_ = std::move(axes);
  return spec;
}

DesignSpec DesignSpec::random(int dim, std::size_t n, Field density, double density_bound) {
  if (dim < 1) throw InvalidArgument("dimension must be positive");
  if (n < 1) throw InvalidArgument("sample size must be positive");
  if (!(density_bound > 0.0) || !std::isfinite(density_bound)) {
    throw InvalidArgument("density bound must be positive and finite");
  }
  DesignSpec spec;
  spec.kind_ = DesignKind::Random;
  spec.dim_ = dim;
  spec.total_n_ = n;
  spec.density_ = std::move(density);
  spec.density_bound_ = density_bound;
  return spec;
}

std::size_t DesignSpec::flat_index(std::span<const std::size_t> multi) const {
  std::size_t flat = 0;
  for (std::size_t k = 0; k < multi.size(); ++k) flat += multi[k] * strides_[k];
  return flat;
}

std::vector<std::size_t> DesignSpec::multi_index(std::size_t flat) const {
  std::vector<std::size_t> multi(sizes_.size());
  for (std::size_t k = 0; k < sizes_.size(); ++k) {
    multi[k] = flat / strides_[k];
    flat %= strides_[k];
  }
  return multi;
}

Point DesignSpec::node(std::size_t flat) const {
  Point x(dim_);
  for (int k = 0; k < dim_; ++k) {
    const std::size_t i = (flat / strides_[k]) % sizes_[k];
    x[k] = axes_[k][static_cast<Eigen::Index>(i)];
  }
  return x;
}

Eigen::MatrixXd DesignSpec::nodes() const {
  if (!is_lattice()) throw InvalidArgument("random designs have no fixed nodes");
  Eigen::MatrixXd out(static_cast<Eigen::Index>(total_n_), dim_);
  for (std::size_t i = 0; i < total_n_; ++i) out.row(static_cast<Eigen::Index>(i)) = node(i).transpose();
  return out;
}

DesignSpec build_lattice(std::size_t n, const Eigen::VectorXd& beta, const Eigen::VectorXd& x0) {
  if (beta.size() == 0 || beta.size() != x0.size()) {
    throw InvalidArgument("beta and x0 must have the same positive length");
  }
  if ((beta.array() <= 0.0).any()) throw InvalidArgument("beta entries must be positive");
  if (std::abs(beta.sum() - 1.0) > 1e-12) throw InvalidArgument("beta must sum to one");
  check_interior(x0);
  std::vector<Eigen::VectorXd> axes;
  for (Eigen::Index k = 0; k < beta.size(); ++k) {
    const std::size_t nk = floor_power(n, beta[k]);
    if (nk < 2) throw InvalidArgument("lattice needs at least two nodes per axis");
    axes.push_back(axis_through(x0[k], nk));
  }
  DesignSpec spec = DesignSpec::grid(std::move(axes));
  spec.beta_ = beta;
  return spec;
}

DesignSpec build_lattice_sides(const std::vector<std::size_t>& sides, const Eigen::VectorXd& x0) {
  if (sides.empty() || sides.size() != static_cast<std::size_t>(x0.size())) {
    throw InvalidArgument("sides and x0 must have the same positive length");
  }
  check_interior(x0);
  std::vector<Eigen::VectorXd> axes;
  for (std::size_t k = 0; k < sides.size(); ++k) {
    if (sides[k] < 2) throw InvalidArgument("lattice needs at least two nodes per axis");
    axes.push_back(axis_through(x0[static_cast<Eigen::Index>(k)], sides[k]));
  }
  return DesignSpec::grid(std::move(axes));
}

Eigen::MatrixXd sample_random_design(std::size_t n, int dim, const Field& density,
                                     double density_bound, std::uint64_t seed) {
  if (n < 1 || dim < 1) throw InvalidArgument("need n >= 1 and dim >= 1");
  if (!(density_bound > 0.0)) throw InvalidArgument("density bound must be positive");

  Point u(dim);
  auto propose = [&](Rng& rng) {
    for (int k = 0; k < dim; ++k) u[k] = rng.uniform();
    const double value = density(u);
    if (!(value >= 0.0) || value > density_bound) {
      throw InvalidArgument("density outside [0, bound] at a proposed point");
    }
    return rng.uniform() * density_bound < value;
  };

  constexpr int kCalibration = 10000;
  Rng calibration = Rng::stream(seed, 1);
  int accepted = 0;
  for (int t = 0; t < kCalibration; ++t) accepted += propose(calibration) ? 1 : 0;
  if (static_cast<double>(accepted) / kCalibration < 1.0 / (10.0 * density_bound)) {
    throw InvalidArgument("rejection sampler acceptance too low; density bound misdeclared");
  }

  Rng rng = Rng::stream(seed, 0);
  Eigen::MatrixXd points(static_cast<Eigen::Index>(n), dim);
  for (Eigen::Index i = 0; i < points.rows();) {
    if (propose(rng)) points.row(i++) = u.transpose();
  }
  return points;
}

Dataset::Dataset(DesignSpec design, Eigen::MatrixXd points, Eigen::VectorXd responses,
                 std::optional<double> sigma)
    : design_(std::move(design)),
      points_(std::move(points)),
      responses_(std::move(responses)),
      sigma_(sigma) {
  if (points_.rows() != responses_.size()) throw InvalidArgument("points and responses differ in length");
  if (points_.cols() != design_.dim()) throw InvalidArgument("point dimension does not match design");
  if (static_cast<std::size_t>(responses_.size()) != design_.total_n()) {
    throw InvalidArgument("dataset size does not match design");
  }
}

Dataset Dataset::from_points(const Eigen::MatrixXd& points, const Eigen::VectorXd& responses) {
  const auto n = static_cast<std::size_t>(points.rows());
  const int d = static_cast<int>(points.cols());
  if (n == 0 || d == 0 || points.rows() != responses.size()) {
    throw InvalidArgument("need a nonempty point set with one response per point");
  }
  std::vector<Eigen::VectorXd> axes;
  std::size_t product = 1;
  for (int k = 0; k < d; ++k) {
    std::vector<double> coords(points.col(k).begin(), points.col(k).end());
    std::sort(coords.begin(), coords.end());
    coords.erase(std::unique(coords.begin(), coords.end()), coords.end());
    product *= coords.size();
    axes.push_back(Eigen::Map<Eigen::VectorXd>(coords.data(), static_cast<Eigen::Index>(coords.size())));
  }
  if (product == n) {
    DesignSpec spec = DesignSpec::grid(axes);
    std::vector<Eigen::Index> slot(n, -1);
    bool complete = true;
    std::vector<std::size_t> multi(static_cast<std::size_t>(d));
    for (std::size_t i = 0; i < n && complete; ++i) {
      for (int k = 0; k < d; ++k) {
        const auto& axis = axes[static_cast<std::size_t>(k)];
        const double v = points(static_cast<Eigen::Index>(i), k);
        multi[static_cast<std::size_t>(k)] =
            static_cast<std::size_t>(std::lower_bound(axis.begin(), axis.end(), v) - axis.begin());
      }
      const std::size_t flat = spec.flat_index(multi);
      if (slot[flat] != -1) complete = false;
      slot[flat] = static_cast<Eigen::Index>(i);
    }
    if (complete) {
      Eigen::VectorXd ordered(static_cast<Eigen::Index>(n));
      for (std::size_t f = 0; f < n; ++f) ordered[static_cast<Eigen::Index>(f)] = responses[slot[f]];
      Eigen::MatrixXd nodes = spec.nodes();
      return Dataset(std::move(spec), std::move(nodes), std::move(ordered));
    }
  }
  // Not a full grid: keep the points as an unstructured sample.
  DesignSpec spec = DesignSpec::random(d, n, [](const PointRef&) { return 1.0; }, 1.0);
  return Dataset(std::move(spec), points, responses);
}

Dataset Dataset::with_responses(Eigen::VectorXd responses) const {
  return Dataset(design_, points_, std::move(responses), sigma_);
}

int TestFunction::intrinsic_dim() const {
  return static_cast<int>(std::count_if(alpha.begin(), alpha.end(), is_finite_order));
}

void TestFunction::validate() const {
  if (static_cast<int>(alpha.size()) != dim || x0.size() != dim) {
    throw InvalidArgument("test function '" + id + "': alpha and x0 must have length dim");
  }
  for (int k = 0; k < dim; ++k) {
    const int a = alpha[static_cast<std::size_t>(k)];
    if (!is_finite_order(a)) continue;
    if (a < 1 || a % 2 == 0) throw InvalidArgument("test function '" + id + "': finite alpha must be odd");
    MultiIndex j(static_cast<std::size_t>(dim), 0);
    j[static_cast<std::size_t>(k)] = a;
    const auto it = derivatives.find(j);
    if (it == derivatives.end() || !(it->second > 0.0)) {
      throw InvalidArgument("test function '" + id + "': marginal derivative must be positive");
    }
  }
}

TestFunction test_function(std::string_view id) {
  const Point center = Point::Constant(2, 0.5);
  const double e = std::numbers::e;
  TestFunction f;
  f.id = std::string(id);
  f.dim = 2;
  f.x0 = center;
  if (id == "F1") {
    f.evaluate = [](const PointRef& x) { return x[0] + x[1]; };
    f.alpha = {1, 1};
    f.derivatives = {{{1, 0}, 1.0}, {{0, 1}, 1.0}};
  } else if (id == "F2") {
    f.evaluate = [](const PointRef& x) { return x[0]; };
    f.alpha = {1, kInfiniteOrder};
    f.derivatives = {{{1, 0}, 1.0}};
  } else if (id == "F3") {
    f.evaluate = [](const PointRef& x) {
      if (x[0] <= 0.25) return x[0] + x[1];
      if (x[0] < 0.75) return 8.0 * x[0];
      return 8.0 * (x[0] + x[1]);
    };
    f.alpha = {1, kInfiniteOrder};
    f.derivatives = {{{1, 0}, 8.0}};
  } else if (id == "F4") {
    f.evaluate = [](const PointRef& x) {
      const double u = x[0] - 0.5, v = x[1] - 0.5;
      return u * u * u + v * v * v;
    };
    f.alpha = {3, 3};
    f.derivatives = {{{3, 0}, 6.0}, {{0, 3}, 6.0}, {{2, 1}, 0.0}, {{1, 2}, 0.0}};
  } else if (id == "F5") {
    f.evaluate = [](const PointRef& x) {
      const double u = x[0] - 0.5, v = x[1] - 0.5;
      return u * u * u + u * u * v + u * v * v + v * v * v;
    };
    f.alpha = {3, 3};
    f.derivatives = {{{3, 0}, 6.0}, {{0, 3}, 6.0}, {{2, 1}, 2.0}, {{1, 2}, 2.0}};
  } else if (id == "exp-sum") {
    f.evaluate = [](const PointRef& x) { return std::exp(x[0] + x[1]); };
    f.alpha = {1, 1};
    f.derivatives = {{{1, 0}, e}, {{0, 1}, e}};
  } else if (id == "lin-exp") {
    f.evaluate = [e](const PointRef& x) { return e * (x[0] + x[1]); };
    f.alpha = {1, 1};
    f.derivatives = {{{1, 0}, e}, {{0, 1}, e}};
  } else if (id == "identity") {
    f.dim = 1;
    f.x0 = Point::Constant(1, 0.5);
    f.evaluate = [](const PointRef& x) { return x[0]; };
    f.alpha = {1};
    f.derivatives = {{{1}, 1.0}};
  } else {
    throw InvalidArgument("unknown test function '" + std::string(id) + "'");
  }
  f.validate();
  return f;
}

std::vector<std::string> test_function_ids() {
  return {"F1", "F2", "F3", "F4", "F5", "exp-sum", "lin-exp", "identity"};
}

bool is_monotone_on_samples(const Field& f, int dim, std::uint64_t seed, int pairs) {
  Rng rng(seed);
  Point x(dim), y(dim);
  for (int t = 0; t < pairs; ++t) {
    for (int k = 0; k < dim; ++k) {
      x[k] = rng.uniform();
      y[k] = x[k] + (1.0 - x[k]) * rng.uniform();
    }
    const double fx = f(x), fy = f(y);
    if (fx > fy + 1e-12 * (1.0 + std::abs(fy))) return false;
  }
  return true;
}

Eigen::VectorXd standard_normal(std::size_t n, Rng& rng) {
  std::normal_distribution<double> normal;
  Eigen::VectorXd z(static_cast<Eigen::Index>(n));
  for (auto& v : z) v = normal(rng);
  return z;
}

Dataset dataset_with_noise(const DesignSpec& spec, const Eigen::MatrixXd& points, const Field& f,
                           const Eigen::VectorXd& noise) {
  Eigen::VectorXd y(points.rows());
  for (Eigen::Index i = 0; i < points.rows(); ++i) y[i] = f(points.row(i).transpose()) + noise[i];
  return Dataset(spec, points, std::move(y));
}

Dataset generate_dataset(const DesignSpec& spec, const Field& f, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw InvalidArgument("sigma must be nonnegative");
  Eigen::MatrixXd points = spec.is_lattice()
                               ? spec.nodes()
                               : sample_random_design(spec.total_n(), spec.dim(), spec.density(),
                                                      spec.density_bound(), Rng::stream(seed, 7)());
  Rng rng = Rng::stream(seed, 0);
  Eigen::VectorXd noise = Eigen::VectorXd::Zero(points.rows());
  if (sigma > 0.0) noise = sigma * standard_normal(static_cast<std::size_t>(points.rows()), rng);
  Dataset data = dataset_with_noise(spec, points, f, noise);
  return Dataset(data.design(), data.points(), data.responses(), sigma);
}

void write_csv(std::ostream& out, const Dataset& data) {
  const int d = data.dim();
  for (int k = 0; k < d; ++k) out << "x_" << (k + 1) << ',';
  out << "y\n";
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < data.points().rows(); ++i) {
    for (int k = 0; k < d; ++k) out << data.points()(i, k) << ',';
    out << data.responses()[i] << '\n';
  }
}

Dataset read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("empty CSV");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      if (!cell.empty() && cell.back() == '\r') cell.pop_back();
      header.push_back(cell);
    }
  }
  const int d = static_cast<int>(header.size()) - 1;
  if (d < 1 || header.back() != "y") throw InvalidArgument("CSV header must be x_1,...,x_d,y");
  for (int k = 0; k < d; ++k) {
    if (header[static_cast<std::size_t>(k)] != "x_" + std::to_string(k + 1)) {
      throw InvalidArgument("CSV header must be x_1,...,x_d,y");
    }
  }
  std::vector<double> values;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::stringstream ss(line);
    std::string cell;
    int cols = 0;
    while (std::getline(ss, cell, ',')) {
      try {
        values.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw InvalidArgument("non-numeric CSV cell '" + cell + "'");
      }
      ++cols;
    }
    if (cols != d + 1) throw InvalidArgument("CSV row " + std::to_string(rows + 1) + " has wrong width");
    ++rows;
  }
  Eigen::MatrixXd points(static_cast<Eigen::Index>(rows), d);
  Eigen::VectorXd y(static_cast<Eigen::Index>(rows));
  for (std::size_t i = 0; i < rows; ++i) {
    for (int k = 0; k < d; ++k) points(static_cast<Eigen::Index>(i), k) = values[i * (d + 1) + k];
    y[static_cast<Eigen::Index>(i)] = values[i * (d + 1) + d];
  }
  return Dataset::from_points(points, y);
}

}  // namespace isoblock
