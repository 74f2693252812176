#pragma once

#include "isoblock/rates.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace isoblock {

/// Square lattices of the given side lengths around each function's x0.
struct ExperimentConfig {
  std::vector<std::string> functions;
  std::optional<Point> x0;  ///< overrides the functions' own x0
  std::vector<std::size_t> lattice_sides;
  std::size_t B = 300;
  double sigma = 1.0;
  std::uint64_t seed = 0;
  /// Scaling exponent for the statistic; defaults to the balanced-lattice
  /// rate of each function.
  std::optional<double> rate_exponent;
  unsigned threads = 0;

  /// Throws InvalidArgument: B >= 2, sides >= 4, known functions of one
  /// common dimension, sigma >= 0.
  void validate() const;
};

struct CdfRow {
  std::string function;
  std::size_t n = 0;
  std::size_t side = 0;
  std::size_t replicate = 0;
  double truth = 0.0;      ///< f(x0)
  double error = 0.0;      ///< fhat(x0) - f(x0)
  double statistic = 0.0;  ///< n^{rate} * error
};

/// One row per (function, side, replicate), functions outermost. Replicate r
/// at side index i draws its noise from stream (seed, i, r) for every
/// function, so comparisons across functions use common random numbers.
std::vector<CdfRow> run_cdf_experiment(const ExperimentConfig& config);

/// Two-sample Kolmogorov-Smirnov distance.
double ks_distance(std::vector<double> a, std::vector<double> b);

struct RateFit {
  double slope = 0.0;
  double stderr_slope = 0.0;
  std::vector<double> n;
  std::vector<double> median_abs_error;
};

/// OLS of log median |error| on log n over the rows of one function.
/// Throws DegenerateFit if some median is zero up to rounding (at most
/// 1e-12 * (1 + |f(x0)|)), InvalidArgument with fewer than three sizes.
RateFit rate_fit(const std::vector<CdfRow>& rows, const std::string& function);
RateFit rate_fit(const ExperimentConfig& config, const std::string& function);

/// Balanced-lattice rate exponent of a built-in function.
double balanced_rate_exponent(const std::string& function);

/// Long-form outputs.
void write_cdf_csv(std::ostream& out, const std::vector<CdfRow>& rows);
/// Paired quantiles of every function against the first one, per side.
void write_qq_csv(std::ostream& out, const std::vector<CdfRow>& rows, const ExperimentConfig& config);

}  // namespace isoblock
