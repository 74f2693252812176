// Command-line front end: estimation, rate calculus, limit-law simulation,
// minimax certificates and the reproduction experiments.

#include "isoblock/errors.hpp"
#include "isoblock/estimator.hpp"
#include "isoblock/experiments.hpp"
#include "isoblock/limit_process.hpp"
#include "isoblock/minimax.hpp"
#include "isoblock/rates.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <Eigen/Core>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <sstream>

namespace {

using nlohmann::json;
using namespace isoblock;

constexpr const char* kVersion = "0.1.0";

// Config problems exit with 2, numerical failures with 3.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split(const std::string& text, char sep = ',') {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

std::vector<double> parse_doubles(const std::string& text) {
  std::vector<double> out;
  for (const auto& p : split(text)) {
    try {
      out.push_back(std::stod(p));
    } catch (const std::exception&) {
      throw ConfigError("not a number: '" + p + "'");
    }
  }
  return out;
}

std::vector<int> parse_alpha(const std::string& text) {
  std::vector<int> out;
  for (const auto& p : split(text)) {
    if (p == "inf" || p == "Inf" || p == "oo") {
      out.push_back(kInfiniteOrder);
    } else {
      try {
        out.push_back(std::stoi(p));
      } catch (const std::exception&) {
        throw ConfigError("not an exponent: '" + p + "'");
      }
    }
  }
  return out;
}

MultiIndex parse_multi_index(const std::string& key) {
  MultiIndex j;
  for (const auto& p : split(key)) j.push_back(std::stoi(p));
  return j;
}

json load_json_argument(const std::string& text) {
  if (std::filesystem::exists(text)) {
    std::ifstream in(text);
    return json::parse(in);
  }
  return json::parse(text);
}

// {"1,0": 2.718, "0,1": 2.718} -> marginal and mixed derivatives
SmoothnessProfile profile_from_derivs(const std::vector<int>& alpha, const json& derivs, const Point& x0) {
  SmoothnessProfile p;
  p.alpha = alpha;
  p.x0 = x0;
  p.marginal_derivs.assign(alpha.size(), 0.0);
  for (const auto& [key, value] : derivs.items()) {
    const MultiIndex j = parse_multi_index(key);
    if (j.size() != alpha.size()) throw ConfigError("derivative index '" + key + "' has the wrong length");
    const auto nonzero = std::count_if(j.begin(), j.end(), [](int v) { return v != 0; });
    if (nonzero == 1) {
      const auto k = static_cast<std::size_t>(std::find_if(j.begin(), j.end(), [](int v) { return v != 0; }) - j.begin());
      if (j[k] != alpha[k]) throw ConfigError("marginal derivative '" + key + "' must have order alpha_k");
      p.marginal_derivs[k] = value.get<double>();
    } else if (nonzero > 1) {
      p.mixed_derivs[j] = value.get<double>();
    }
  }
  p.validate();
  return p;
}

json alpha_json(const std::vector<int>& alpha) {
  json a = json::array();
  for (int v : alpha) {
    if (is_finite_order(v)) {
      a.push_back(v);
    } else {
      a.push_back("inf");
    }
  }
  return a;
}

json report_json(const RateReport& r) {
  json j;
  j["design"] = r.design == DesignKind::Random ? "random" : "lattice";
  j["kappa_star"] = r.kappa_star;
  j["unique"] = r.unique;
  j["s"] = r.s;
  std::vector<int> perm;
  for (int p : r.permutation) perm.push_back(p + 1);
  j["canonical_order"] = perm;
  j["alpha"] = alpha_json(r.alpha);
  if (!r.beta.empty()) j["beta"] = r.beta;
  j["effective_dims"] = r.effective_dims;
  j["n_star_exponent"] = r.n_star_exponent;
  j["rate_exponent"] = r.rate_exponent;
  if (!r.objective.empty()) j["objective"] = r.objective;
  return j;
}

std::ostream& open_output(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path);
  if (!file) throw ConfigError("cannot open '" + path + "' for writing");
  return file;
}

// ---------------------------------------------------------------- commands

int cmd_estimate(const std::string& input, const std::string& x0_text, bool grid, const std::string& output) {
  std::ifstream in(input);
  if (!in) throw ConfigError("cannot open '" + input + "'");
  const Dataset data = read_csv(in);
  std::ofstream file;
  std::ostream& out = open_output(output, file);
  out << std::setprecision(17);
  for (int k = 0; k < data.dim(); ++k) out << "x_" << (k + 1) << ',';
  out << "fitted\n";
  if (grid) {
    if (!data.is_lattice()) throw ConfigError("--grid needs a complete lattice");
    const Eigen::VectorXd fitted = fit_grid(data);
    for (std::size_t i = 0; i < data.size(); ++i) {
      const Point x = data.design().node(i);
      for (int k = 0; k < data.dim(); ++k) out << x[k] << ',';
      out << fitted[static_cast<Eigen::Index>(i)] << '\n';
    }
    return 0;
  }
  const std::vector<double> x0v = parse_doubles(x0_text);
  if (static_cast<int>(x0v.size()) != data.dim()) throw ConfigError("--x0 must have one value per dimension");
  const Point x0 = Eigen::Map<const Eigen::VectorXd>(x0v.data(), static_cast<Eigen::Index>(x0v.size()));
  const FitResult fit = max_min_estimate(data, x0);
  for (int k = 0; k < data.dim(); ++k) out << x0[k] << ',';
  out << fit.value << '\n';
  return 0;
}

int cmd_rates(const std::string& alpha_text, const std::string& beta_text, const std::string& design,
              const std::string& derivs_text) {
  const std::vector<int> alpha = parse_alpha(alpha_text);
  RateReport report;
  json out;
  if (design == "random") {
    report = random_design_rates(alpha);
    out = report_json(report);
  } else {
    if (beta_text.empty()) throw ConfigError("--beta is required for a lattice design");
    std::vector<Rational> beta;
    for (const auto& p : split(beta_text)) beta.push_back(Rational::parse(p));
    report = kappa_star_argmax(alpha, beta);
    out = report_json(report);
    try {
      out["kappa_star_fixed_point"] = kappa_star_fixed_point(alpha, beta);
    } catch (const DegenerateBoundary& e) {
      out["kappa_star_fixed_point"] = nullptr;
      out["degenerate_index"] = e.index;
    }
  }
  if (!derivs_text.empty()) {
    const SmoothnessProfile profile =
        profile_from_derivs(alpha, load_json_argument(derivs_text), Point::Constant(static_cast<Eigen::Index>(alpha.size()), 0.5));
    try {
      const KConstant K = k_constant(profile, report);
      out["K"] = K.K;
      if (K.density_adjusted) out["K_density_adjusted"] = *K.density_adjusted;
    } catch (const MixedDerivativesPresent& e) {
      out["K"] = nullptr;
      out["K_note"] = e.what();
    }
  }
  std::cout << out.dump(2) << '\n';
  return 0;
}

struct LimitOptions {
  std::string alpha;
  int kappa = 1;
  std::string drift = "dalpha";
  std::string derivs;
  std::string x0;
  std::size_t M = 1000;
  double c = 8.0;
  double gamma_star = 2.0;
  int m = 48;
  std::uint64_t seed = 1;
  std::string output;
};

int cmd_simulate_limit(const LimitOptions& o) {
  const std::vector<int> alpha = parse_alpha(o.alpha);
  SupInfConfig config;
  if (o.drift == "dalpha") {
    config = SupInfConfig::d_alpha(alpha, o.kappa);
  } else if (o.drift == "full") {
    if (o.derivs.empty()) throw ConfigError("--drift full needs --derivs");
    Point x0 = Point::Constant(static_cast<Eigen::Index>(alpha.size()), 0.5);
    if (!o.x0.empty()) {
      const auto v = parse_doubles(o.x0);
      if (v.size() != alpha.size()) throw ConfigError("--x0 has the wrong length");
      x0 = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
    }
    const SmoothnessProfile profile = profile_from_derivs(alpha, load_json_argument(o.derivs), x0);
    RateReport report;
    report.kappa_star = o.kappa;
    report.alpha = alpha;
    report.s = profile.s();
    report.permutation.resize(alpha.size());
    std::iota(report.permutation.begin(), report.permutation.end(), 0);
    config = SupInfConfig::full(profile, report);
  } else {
    throw ConfigError("--drift must be dalpha or full");
  }
  if (!o.x0.empty() && o.drift == "dalpha") {
    const auto v = parse_doubles(o.x0);
    if (v.size() != alpha.size()) throw ConfigError("--x0 has the wrong length");
    for (std::size_t k = static_cast<std::size_t>(config.s()); k < alpha.size(); ++k) {
      config.caps[k - static_cast<std::size_t>(config.s())] = {v[k], 1.0 - v[k]};
    }
  }
  config.c = o.c;
  config.gamma_star = o.gamma_star;
  config.m = o.m;
  const LimitSample sample = sample_limit_distribution(config, o.M, o.seed);
  std::ofstream file;
  std::ostream& out = open_output(o.output, file);
  out << "draw\n" << std::setprecision(17);
  for (double v : sample.draws) out << v << '\n';
  return 0;
}

int cmd_chernoff(std::size_t M, double T, double step, std::uint64_t seed, const std::string& output) {
  const Eigen::VectorXd draws = chernoff_sample(M, T, step, seed);
  std::ofstream file;
  std::ostream& out = open_output(output, file);
  out << "draw\n" << std::setprecision(17);
  for (double v : draws) out << v << '\n';
  return 0;
}

int cmd_minimax(const std::string& profile_text, const std::string& n_list_text, double sigma) {
  const json profile = load_json_argument(profile_text);
  if (!profile.contains("function")) throw ConfigError("profile needs a \"function\" id");
  const TestFunction f = test_function(profile["function"].get<std::string>());
  std::vector<double> beta;
  if (profile.contains("beta")) {
    beta = profile["beta"].get<std::vector<double>>();
  } else if (profile.value("design", std::string("lattice")) == "lattice") {
    beta.assign(static_cast<std::size_t>(f.dim), 1.0 / f.dim);
  }
  const double tau = profile.value("tau", 0.05);
  std::vector<std::size_t> n_list;
  for (double v : parse_doubles(n_list_text)) n_list.push_back(static_cast<std::size_t>(v));
  const Certificate cert = certify_rate_optimality(f, beta, n_list, sigma, tau);
  json out;
  out["function"] = f.id;
  out["sigma"] = sigma;
  out["report"] = report_json(cert.report);
  out["K"] = cert.K;
  out["gamma"] = cert.gamma;
  out["rows"] = json::array();
  for (const auto& r : cert.rows) {
    out["rows"].push_back({{"n", r.n},
                           {"gamma_n", r.gamma_n},
                           {"n_l2_squared", r.budget},
                           {"bound", r.bound},
                           {"normalized", r.normalized},
                           {"normalized_over_K", r.l_factor}});
  }
  std::cout << out.dump(2) << '\n';
  return 0;
}

ExperimentConfig experiment_config(const json& j) {
  ExperimentConfig c;
  try {
    c.functions = j.at("functions").get<std::vector<std::string>>();
    c.lattice_sides = j.at("lattice_sides").get<std::vector<std::size_t>>();
    c.B = j.value("B", std::size_t{300});
    c.sigma = j.value("sigma", 1.0);
    c.seed = j.value("seed", std::uint64_t{0});
    c.threads = j.value("threads", 0u);
    if (j.contains("x0")) {
      const auto v = j["x0"].get<std::vector<double>>();
      c.x0 = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
    }
    if (j.contains("rate_exponent")) c.rate_exponent = j["rate_exponent"].get<double>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad experiment config: ") + e.what());
  }
  try {
    c.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  return c;
}

int cmd_experiment(const std::string& config_path, const std::string& output_dir) {
  json raw;
  try {
    raw = load_json_argument(config_path);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("cannot parse config: ") + e.what());
  }
  const ExperimentConfig config = experiment_config(raw);
  std::filesystem::create_directories(output_dir);
  const std::filesystem::path dir(output_dir);

  const std::vector<CdfRow> rows = run_cdf_experiment(config);
  {
    std::ofstream out(dir / "cdf.csv");
    write_cdf_csv(out, rows);
  }
  {
    std::ofstream out(dir / "qq.csv");
    write_qq_csv(out, rows, config);
  }
  json fits = json::object();
  {
    std::ofstream out(dir / "rates.csv");
    out << "function,n,median_abs_error,slope,slope_se\n" << std::setprecision(17);
    if (config.lattice_sides.size() >= 3) {
      for (const auto& id : config.functions) {
        const RateFit fit = rate_fit(rows, id);
        for (std::size_t i = 0; i < fit.n.size(); ++i) {
          out << id << ',' << fit.n[i] << ',' << fit.median_abs_error[i] << ',' << fit.slope << ','
              << fit.stderr_slope << '\n';
        }
        fits[id] = {{"slope", fit.slope}, {"slope_se", fit.stderr_slope}};
      }
    }
  }
  json manifest;
  manifest["version"] = kVersion;
  manifest["config"] = raw;
  manifest["seed"] = config.seed;
  manifest["noise_streams"] = "replicate r at side index i uses stream (seed, i, r), shared across functions";
  json exponents = json::object();
  for (const auto& id : config.functions) exponents[id] = config.rate_exponent.value_or(balanced_rate_exponent(id));
  manifest["rate_exponents"] = exponents;
  manifest["rate_fits"] = fits;
  manifest["rows"] = rows.size();
  manifest["files"] = {"cdf.csv", "qq.csv", "rates.csv"};
  manifest["compiler"] = __VERSION__;
  manifest["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                      std::to_string(EIGEN_MINOR_VERSION);
  std::ofstream(dir / "manifest.json") << manifest.dump(2) << '\n';
  return 0;
}

int cmd_generate(const std::string& function, const std::string& sides_text, double sigma, std::uint64_t seed,
                 const std::string& output) {
  const TestFunction f = test_function(function);
  std::vector<std::size_t> sides;
  for (double v : parse_doubles(sides_text)) sides.push_back(static_cast<std::size_t>(v));
  if (sides.size() == 1) sides.assign(static_cast<std::size_t>(f.dim), sides.front());
  const DesignSpec design = build_lattice_sides(sides, f.x0);
  const Dataset data = generate_dataset(design, f.evaluate, sigma, seed);
  std::ofstream file;
  write_csv(open_output(output, file), data);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Max-min block estimator for multiple isotonic regression"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  std::string input, x0, output;
  bool grid = false;
  auto* estimate = app.add_subcommand("estimate", "Estimate at a point or over the whole lattice");
  estimate->add_option("--input", input, "CSV with columns x_1..x_d,y")->required();
  estimate->add_option("--x0", x0, "Comma-separated query point");
  estimate->add_flag("--grid", grid, "Fit every lattice node");
  estimate->add_option("--output", output, "Output CSV (default stdout)");

  std::string alpha, beta, design = "lattice", derivs;
  auto* rates = app.add_subcommand("rates", "Effective dimension, rate and constant");
  rates->add_option("--alpha", alpha, "Exponents, e.g. 1,inf")->required();
  rates->add_option("--beta", beta, "Lattice exponents, e.g. 1/2,1/2");
  rates->add_option("--design", design)->check(CLI::IsMember({"lattice", "random"}));
  rates->add_option("--derivs", derivs, "JSON map from \"j1,..,jd\" to the derivative at x0");

  LimitOptions lim;
  auto* simulate = app.add_subcommand("simulate-limit", "Monte Carlo draws of the sup-inf limit");
  simulate->add_option("--alpha", lim.alpha, "Canonical exponents, finite first")->required();
  simulate->add_option("--kappa", lim.kappa);
  simulate->add_option("--drift", lim.drift)->check(CLI::IsMember({"dalpha", "full"}));
  simulate->add_option("--derivs", lim.derivs, "Derivatives for the full drift");
  simulate->add_option("--x0", lim.x0, "Point fixing the caps on inactive axes");
  simulate->add_option("--M", lim.M);
  simulate->add_option("--c", lim.c);
  simulate->add_option("--gamma-star", lim.gamma_star);
  simulate->add_option("--m", lim.m);
  simulate->add_option("--seed", lim.seed);
  simulate->add_option("--output", lim.output);

  std::size_t chernoff_M = 1000;
  double T = 8.0, step = 0.01;
  std::uint64_t seed = 1;
  std::string chernoff_output;
  auto* chernoff = app.add_subcommand("chernoff", "Slope at zero of the GCM of B(t) + t^2");
  chernoff->add_option("--M", chernoff_M);
  chernoff->add_option("--T", T);
  chernoff->add_option("--step", step);
  chernoff->add_option("--seed", seed);
  chernoff->add_option("--output", chernoff_output);

  std::string profile, n_list;
  double sigma = 1.0;
  auto* minimax = app.add_subcommand("minimax", "Two-point lower-bound certificates");
  minimax->add_option("--profile", profile, "JSON (inline or file) with a \"function\" id")->required();
  minimax->add_option("--n-list", n_list)->required();
  minimax->add_option("--sigma", sigma);

  std::string config_path, output_dir;
  auto* experiment = app.add_subcommand("experiment", "Simulation study: cdf.csv, qq.csv, rates.csv");
  experiment->add_option("--config", config_path)->required();
  experiment->add_option("--output-dir", output_dir)->required();

  std::string function, sides;
  double gen_sigma = 1.0;
  std::uint64_t gen_seed = 1;
  std::string gen_output;
  auto* generate = app.add_subcommand("generate", "Simulated lattice dataset as CSV");
  generate->add_option("--function", function)->required();
  generate->add_option("--sides", sides, "Nodes per axis, one value or one per axis")->required();
  generate->add_option("--sigma", gen_sigma);
  generate->add_option("--seed", gen_seed);
  generate->add_option("--output", gen_output);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*estimate) {
      if (!grid && x0.empty()) throw ConfigError("--x0 is required unless --grid is given");
      return cmd_estimate(input, x0, grid, output);
    }
    if (*rates) return cmd_rates(alpha, beta, design, derivs);
    if (*simulate) return cmd_simulate_limit(lim);
    if (*chernoff) return cmd_chernoff(chernoff_M, T, step, seed, chernoff_output);
    if (*minimax) return cmd_minimax(profile, n_list, sigma);
    if (*experiment) return cmd_experiment(config_path, output_dir);
    if (*generate) return cmd_generate(function, sides, gen_sigma, gen_seed, gen_output);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
