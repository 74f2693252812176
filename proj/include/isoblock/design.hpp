#pragma once

#include "isoblock/rng.hpp"
#include "isoblock/types.hpp"

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace isoblock {

enum class DesignKind { FixedLattice, Random };

/// Geometry of the design points: a Cartesian grid or an i.i.d. law on [0,1]^d.
///
/// Grid nodes are enumerated row-major with the first coordinate slowest, so
/// flat index = sum_k i_k * stride_k with stride_{d-1} = 1.
class DesignSpec {
 public:
  /// Product grid with the given per-axis node coordinates (strictly increasing).
  static DesignSpec grid(std::vector<Eigen::VectorXd> axes);
  static DesignSpec random(int dim, std::size_t n, Field density, double density_bound);

  DesignKind kind() const { return kind_; }
  bool is_lattice() const { return kind_ == DesignKind::FixedLattice; }
  int dim() const { return dim_; }
  std::size_t total_n() const { return total_n_; }

  /// Lattice exponents beta_k = log(n_k) / log(n); for grids built by
  /// build_lattice these are the exponents that were requested.
  const Eigen::VectorXd& beta() const { return beta_; }
  const std::vector<std::size_t>& lattice_sizes() const { return sizes_; }
  const std::vector<Eigen::VectorXd>& axes() const { return axes_; }
  const std::vector<std::size_t>& strides() const { return strides_; }

  const Field& density() const { return density_; }
  double density_bound() const { return density_bound_; }

  std::size_t flat_index(std::span<const std::size_t> multi) const;
  std::vector<std::size_t> multi_index(std::size_t flat) const;
  Point node(std::size_t flat) const;
  /// All nodes as an n x d matrix in canonical order.
  Eigen::MatrixXd nodes() const;

 private:
  friend DesignSpec build_lattice(std::size_t, const Eigen::VectorXd&, const Eigen::VectorXd&);

  DesignKind kind_ = DesignKind::FixedLattice;
  int dim_ = 0;
  std::size_t total_n_ = 0;
  Eigen::VectorXd beta_;
  std::vector<std::size_t> sizes_;
  std::vector<std::size_t> strides_;
  std::vector<Eigen::VectorXd> axes_;
  Field density_;
  double density_bound_ = 0.0;
};

/// Equally spaced lattice with n_k = floor(n^{beta_k}) nodes per axis, gap 1/n_k,
/// translated so that x0 is a node. Throws InvalidArgument on bad beta or x0.
DesignSpec build_lattice(std::size_t n, const Eigen::VectorXd& beta, const Eigen::VectorXd& x0);

/// Same placement rule with the per-axis sizes given directly.
DesignSpec build_lattice_sides(const std::vector<std::size_t>& sides, const Eigen::VectorXd& x0);

/// n i.i.d. draws from the density by rejection against the uniform proposal.
/// Returns an n x d matrix. Throws InvalidArgument when the declared bound is
/// violated or clearly misdeclared (calibration acceptance below 1/(10M)).
Eigen::MatrixXd sample_random_design(std::size_t n, int dim, const Field& density,
                                     double density_bound, std::uint64_t seed);

class Dataset {
 public:
  Dataset(DesignSpec design, Eigen::MatrixXd points, Eigen::VectorXd responses,
          std::optional<double> sigma = std::nullopt);

  /// Wraps arbitrary points. Complete Cartesian grids are recognised and
  /// reordered canonically; anything else is treated as a random design.
  static Dataset from_points(const Eigen::MatrixXd& points, const Eigen::VectorXd& responses);

  const DesignSpec& design() const { return design_; }
  const Eigen::MatrixXd& points() const { return points_; }
  const Eigen::VectorXd& responses() const { return responses_; }
  std::optional<double> sigma() const { return sigma_; }
  bool is_lattice() const { return design_.is_lattice(); }
  int dim() const { return design_.dim(); }
  std::size_t size() const { return static_cast<std::size_t>(responses_.size()); }

  Dataset with_responses(Eigen::VectorXd responses) const;

 private:
  DesignSpec design_;
  Eigen::MatrixXd points_;
  Eigen::VectorXd responses_;
  std::optional<double> sigma_;
};

/// A monotone regression function together with its local structure at x0.
struct TestFunction {
  std::string id;
  int dim = 0;
  Field evaluate;
  Point x0;
  std::vector<int> alpha;  ///< kInfiniteOrder for coordinates f does not depend on
  /// Partial derivatives at x0 keyed by multi-index (marginal and mixed).
  std::map<MultiIndex, double> derivatives;

  double operator()(const PointRef& x) const { return evaluate(x); }
  int intrinsic_dim() const;
  /// Throws InvalidArgument if a declared finite alpha is even or nonpositive.
  void validate() const;
};

/// Built-in functions:
///   F1..F5      the two-dimensional examples x1+x2, x1, the piecewise strip
///               function, and the two cubics, all at x0 = (1/2, 1/2)
///   exp-sum     exp(x1 + x2) at (1/2, 1/2)
///   lin-exp     e * (x1 + x2), the linearisation of exp-sum at (1/2, 1/2)
///   identity    f(x) = x in one dimension at x0 = 1/2
TestFunction test_function(std::string_view id);
std::vector<std::string> test_function_ids();

/// Checks f(x) <= f(y) on `pairs` random ordered pairs x <= y.
bool is_monotone_on_samples(const Field& f, int dim, std::uint64_t seed, int pairs = 1000);

/// Responses f(X_i) + sigma * N(0,1), deterministic in seed. Random designs
/// draw their points from the same seed.
Dataset generate_dataset(const DesignSpec& spec, const Field& f, double sigma, std::uint64_t seed);

/// f(X_i) + noise_i on a fixed set of points; used for common random numbers.
Dataset dataset_with_noise(const DesignSpec& spec, const Eigen::MatrixXd& points, const Field& f,
                           const Eigen::VectorXd& noise);

/// Standard normal vector of length n from the given stream.
Eigen::VectorXd standard_normal(std::size_t n, Rng& rng);

/// CSV with header x_1..x_d,y and 17 significant digits.
void write_csv(std::ostream& out, const Dataset& data);
Dataset read_csv(std::istream& in);

}  // namespace isoblock
