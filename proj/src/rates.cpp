#include "isoblock/rates.hpp"

#include "isoblock/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

namespace isoblock {

// ---------------------------------------------------------------- Rational

namespace {

using i128 = __int128;

std::int64_t narrow(i128 v) {
  if (v > std::numeric_limits<std::int64_t>::max() || v < std::numeric_limits<std::int64_t>::min()) {
    throw InvalidArgument("rational arithmetic overflow");
  }
  return static_cast<std::int64_t>(v);
}

i128 gcd128(i128 a, i128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    const i128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

Rational make(i128 num, i128 den) {
  if (den == 0) throw InvalidArgument("rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const i128 g = gcd128(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  return Rational(narrow(num), narrow(den));
}

std::int64_t parse_int(std::string_view text) {
  std::int64_t v = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw InvalidArgument("cannot parse '" + std::string(text) + "' as a rational");
  }
  return v;
}

}  // namespace

Rational::Rational(std::int64_t num, std::int64_t den) : num_(num), den_(den) {
  if (den_ == 0) throw InvalidArgument("rational with zero denominator");
  if (den_ < 0) {
    num_ = -num_;
    den_ = -den_;
  }
  const std::int64_t g = std::gcd(num_, den_);
  if (g > 1) {
    num_ /= g;
    den_ /= g;
  }
}

Rational Rational::parse(std::string_view text) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  if (const auto slash = text.find('/'); slash != std::string_view::npos) {
    return Rational(parse_int(text.substr(0, slash)), parse_int(text.substr(slash + 1)));
  }
  if (const auto dot = text.find('.'); dot != std::string_view::npos) {
    const std::string_view frac = text.substr(dot + 1);
    if (frac.size() > 17) throw InvalidArgument("too many decimals in '" + std::string(text) + "'");
    std::int64_t scale = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
    const std::string_view whole = text.substr(0, dot);
    const bool negative = !whole.empty() && whole.front() == '-';
    const std::int64_t w = whole.empty() || whole == "-" ? 0 : parse_int(whole);
    const std::int64_t f = frac.empty() ? 0 : parse_int(frac);
    const i128 num = static_cast<i128>(w) * scale + (negative ? -f : f);
    return make(num, scale);
  }
  return Rational(parse_int(text));
}

std::string Rational::str() const {
  return den_ == 1 ? std::to_string(num_) : std::to_string(num_) + "/" + std::to_string(den_);
}

Rational operator+(const Rational& a, const Rational& b) {
  return make(static_cast<i128>(a.num_) * b.den_ + static_cast<i128>(b.num_) * a.den_,
              static_cast<i128>(a.den_) * b.den_);
}
Rational operator-(const Rational& a, const Rational& b) {
  return make(static_cast<i128>(a.num_) * b.den_ - static_cast<i128>(b.num_) * a.den_,
              static_cast<i128>(a.den_) * b.den_);
}
Rational operator*(const Rational& a, const Rational& b) {
  return make(static_cast<i128>(a.num_) * b.num_, static_cast<i128>(a.den_) * b.den_);
}
Rational operator/(const Rational& a, const Rational& b) {
  return make(static_cast<i128>(a.num_) * b.den_, static_cast<i128>(a.den_) * b.num_);
}
std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
  const i128 l = static_cast<i128>(a.num_) * b.den_;
  const i128 r = static_cast<i128>(b.num_) * a.den_;
  return l < r ? std::strong_ordering::less : l > r ? std::strong_ordering::greater : std::strong_ordering::equal;
}

// ---------------------------------------------------------------- profiles

int SmoothnessProfile::s() const {
  return static_cast<int>(std::count_if(alpha.begin(), alpha.end(), is_finite_order));
}

namespace {

std::int64_t lcm_of_finite(const std::vector<int>& alpha) {
  std::int64_t l = 1;
  for (int a : alpha) {
    if (is_finite_order(a)) l = std::lcm(l, static_cast<std::int64_t>(a));
  }
  return l;
}

void check_alpha(const std::vector<int>& alpha) {
  if (alpha.empty()) throw InvalidArgument("alpha must be nonempty");
  for (int a : alpha) {
    if (is_finite_order(a) && (a < 1 || a % 2 == 0)) {
      throw InvalidArgument("finite alpha entries must be odd positive integers");
    }
  }
}

// sum_k j_k / alpha_k scaled by L = lcm(alpha); infinite alpha needs j_k == 0.
std::optional<std::int64_t> scaled_weight(const MultiIndex& j, const std::vector<int>& alpha, std::int64_t L) {
  std::int64_t w = 0;
  for (std::size_t k = 0; k < j.size(); ++k) {
    if (j[k] == 0) continue;
    if (!is_finite_order(alpha[k])) return std::nullopt;
    w += j[k] * (L / alpha[k]);
  }
  return w;
}

}  // namespace

void SmoothnessProfile::validate() const {
  check_alpha(alpha);
  const auto d = alpha.size();
  if (x0.size() != static_cast<Eigen::Index>(d)) throw InvalidArgument("x0 must have length d");
  if (marginal_derivs.size() != d) throw InvalidArgument("marginal_derivs must have length d");
  for (std::size_t k = 0; k < d; ++k) {
    if (is_finite_order(alpha[k]) && !(marginal_derivs[k] > 0.0)) {
      throw InvalidArgument("marginal derivatives must be positive on active coordinates");
    }
  }
  if (!(density_at_x0 > 0.0)) throw InvalidArgument("density at x0 must be positive");
  const std::int64_t L = lcm_of_finite(alpha);
  for (const auto& [j, value] : mixed_derivs) {
    if (j.size() != d) throw InvalidArgument("mixed derivative index has wrong length");
    if (std::count_if(j.begin(), j.end(), [](int v) { return v != 0; }) < 2) {
      throw InvalidArgument("mixed derivative index needs two or more nonzero entries");
    }
    if (std::any_of(j.begin(), j.end(), [](int v) { return v < 0; })) {
      throw InvalidArgument("mixed derivative index must be nonnegative");
    }
    const auto w = scaled_weight(j, alpha, L);
    if (!w || *w != L) throw InvalidArgument("mixed derivative index is not on the critical slice");
    if (!std::isfinite(value)) throw InvalidArgument("mixed derivative must be finite");
  }
}

SmoothnessProfile profile_of(const TestFunction& f) {
  SmoothnessProfile p;
  p.x0 = f.x0;
  p.alpha = f.alpha;
  p.marginal_derivs.assign(f.alpha.size(), 0.0);
  for (const auto& [j, value] : f.derivatives) {
    const auto nonzero = std::count_if(j.begin(), j.end(), [](int v) { return v != 0; });
    if (nonzero == 1) {
      const auto k = static_cast<std::size_t>(std::find_if(j.begin(), j.end(), [](int v) { return v != 0; }) - j.begin());
      if (j[k] == f.alpha[k]) p.marginal_derivs[k] = value;
    } else if (nonzero > 1) {
      p.mixed_derivs[j] = value;
    }
  }
  p.validate();
  return p;
}

IndexSets index_sets(const std::vector<int>& alpha, int s) {
  if (s < 1) throw InvalidArgument("index sets are empty for s = 0");
  if (s > static_cast<int>(alpha.size())) throw InvalidArgument("s exceeds the dimension");
  for (int k = 0; k < s; ++k) {
    if (!is_finite_order(alpha[k]) || alpha[k] < 1 || alpha[k] % 2 == 0) {
      throw InvalidArgument("alpha_1..alpha_s must be odd positive integers");
    }
  }
  const std::vector<int> active(alpha.begin(), alpha.begin() + s);
  const std::int64_t L = lcm_of_finite(active);
  IndexSets sets;
  MultiIndex j(alpha.size(), 0);
  // odometer over 0 <= j_k <= alpha_k on the active coordinates
  while (true) {
    std::int64_t w = 0;
    for (int k = 0; k < s; ++k) w += j[k] * (L / active[k]);
    if (w > 0 && w <= L) {
      sets.J.push_back(j);
      if (w == L) {
        sets.J_star.push_back(j);
        if (std::count_if(j.begin(), j.end(), [](int v) { return v != 0; }) > 1) sets.J1.push_back(j);
      }
    }
    int k = s - 1;
    while (k >= 0 && j[k] == active[k]) j[k--] = 0;
    if (k < 0) break;
    ++j[k];
  }
  return sets;
}

// ---------------------------------------------------------------- kappa*

namespace {

// Arithmetic shims so one implementation serves double and Rational beta.
double inv(double, int a) { return inverse_order(a); }
Rational inv(const Rational&, int a) { return is_finite_order(a) ? Rational(1, a) : Rational(0); }
double as_double(double v) { return v; }
double as_double(const Rational& v) { return v.to_double(); }

bool same(double a, double b) {
  return std::abs(a - b) <= 1e-12 * std::max({std::abs(a), std::abs(b), 1e-300});
}
bool same(const Rational& a, const Rational& b) { return a == b; }
bool below(double a, double b) { return a < b && !same(a, b); }
bool below(const Rational& a, const Rational& b) { return a < b; }

template <typename Num>
void check_beta(const std::vector<int>& alpha, const std::vector<Num>& beta) {
  check_alpha(alpha);
  if (beta.size() != alpha.size()) throw InvalidArgument("alpha and beta differ in length");
  Num total(0);
  for (const Num& b : beta) {
    if (!(Num(0) < b)) throw InvalidArgument("beta entries must be positive");
    total = total + b;
  }
  if (std::abs(as_double(total) - 1.0) > 1e-9) throw InvalidArgument("beta must sum to one");
}

template <typename Num>
std::vector<int> canonical(const std::vector<int>& alpha, const std::vector<Num>& beta) {
  std::vector<int> order(alpha.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const bool fa = is_finite_order(alpha[a]), fb = is_finite_order(alpha[b]);
    if (fa != fb) return fa;
    if (fa) {
      const Num pa = Num(alpha[a]) * beta[a], pb = Num(alpha[b]) * beta[b];
      if (pa < pb) return true;
      if (pb < pa) return false;
      if (alpha[a] != alpha[b]) return alpha[a] < alpha[b];
    }
    return beta[a] < beta[b];
  });
  return order;
}

template <typename Num>
struct Canonical {
  std::vector<int> order;
  std::vector<int> alpha;
  std::vector<Num> beta;
  int s = 0;
};

template <typename Num>
Canonical<Num> canonicalise(const std::vector<int>& alpha, const std::vector<Num>& beta) {
  Canonical<Num> c;
  c.order = canonical(alpha, beta);
  for (int i : c.order) {
    c.alpha.push_back(alpha[i]);
    c.beta.push_back(beta[i]);
  }
  c.s = static_cast<int>(std::count_if(alpha.begin(), alpha.end(), is_finite_order));
  return c;
}

// objective for l = 1..d (index l-1), over canonical inputs
template <typename Num>
std::vector<Num> objective(const std::vector<int>& alpha, const std::vector<Num>& beta, int s) {
  const int d = static_cast<int>(alpha.size());
  std::vector<Num> out(static_cast<std::size_t>(d));
  Num tail_beta(0), tail_inv(0);
  for (int l = d; l-- > 0;) {
    tail_beta = tail_beta + beta[l];
    if (l < s) tail_inv = tail_inv + inv(Num(0), alpha[l]);
    out[l] = tail_beta / (Num(2) + tail_inv);
  }
  return out;
}

std::vector<int> labels_from(const std::vector<int>& order, int kappa) {
  std::vector<int> labels;
  for (std::size_t i = static_cast<std::size_t>(kappa - 1); i < order.size(); ++i) labels.push_back(order[i] + 1);
  return labels;
}

template <typename Num>
RateReport argmax_impl(const std::vector<int>& alpha, const std::vector<Num>& beta) {
  check_beta(alpha, beta);
  const Canonical<Num> c = canonicalise(alpha, beta);
  const std::vector<Num> obj = objective(c.alpha, c.beta, c.s);
  std::size_t best = 0;
  for (std::size_t l = 1; l < obj.size(); ++l) {
    if (below(obj[best], obj[l])) best = l;
  }
  const auto ties = std::count_if(obj.begin(), obj.end(), [&](const Num& v) { return same(v, obj[best]); });

  RateReport r;
  r.design = DesignKind::FixedLattice;
  r.kappa_star = static_cast<int>(best) + 1;
  r.unique = ties == 1;
  r.s = c.s;
  r.permutation = c.order;
  r.alpha = c.alpha;
  Num tail(0);
  for (std::size_t k = 0; k < c.beta.size(); ++k) {
    r.beta.push_back(as_double(c.beta[k]));
    if (k >= best) tail = tail + c.beta[k];
  }
  for (const Num& v : obj) r.objective.push_back(as_double(v));
  r.effective_dims = labels_from(c.order, r.kappa_star);
  r.n_star_exponent = as_double(tail);
  r.rate_exponent = as_double(obj[best]);
  return r;
}

template <typename Num>
int fixed_point_impl(const std::vector<int>& alpha, const std::vector<Num>& beta) {
  check_beta(alpha, beta);
  const Canonical<Num> c = canonicalise(alpha, beta);
  const int d = static_cast<int>(c.alpha.size());
  int kappa = 0;
  Num tail_beta(0), tail_inv(0);
  std::vector<Num> lhs(static_cast<std::size_t>(d)), rhs(static_cast<std::size_t>(d));
  for (int l = d; l-- > 0;) {
    tail_beta = tail_beta + c.beta[l];
    const Num a = l < c.s ? inv(Num(0), c.alpha[l]) : Num(0);
    tail_inv = tail_inv + a;
    lhs[l] = a / (Num(2) + tail_inv);
    rhs[l] = c.beta[l] / tail_beta;
  }
  for (int l = 0; l < d; ++l) {
    if (same(lhs[l], rhs[l])) throw DegenerateBoundary(l + 1);
    if (kappa == 0 && below(lhs[l], rhs[l])) kappa = l + 1;
  }
  return kappa;
}

}  // namespace

std::vector<int> canonical_order(const std::vector<int>& alpha, const std::vector<double>& beta) {
  return canonical(alpha, beta);
}

RateReport kappa_star_argmax(const std::vector<int>& alpha, const std::vector<double>& beta) {
  return argmax_impl(alpha, beta);
}

RateReport kappa_star_argmax(const std::vector<int>& alpha, const std::vector<Rational>& beta) {
  return argmax_impl(alpha, beta);
}

int kappa_star_fixed_point(const std::vector<int>& alpha, const std::vector<double>& beta) {
  return fixed_point_impl(alpha, beta);
}

int kappa_star_fixed_point(const std::vector<int>& alpha, const std::vector<Rational>& beta) {
  return fixed_point_impl(alpha, beta);
}

RateReport random_design_rates(const std::vector<int>& alpha) {
  check_alpha(alpha);
  const std::vector<double> flat(alpha.size(), 1.0);
  RateReport r;
  r.design = DesignKind::Random;
  r.kappa_star = 1;
  r.unique = true;
  r.permutation = canonical(alpha, flat);
  for (int i : r.permutation) r.alpha.push_back(alpha[i]);
  r.s = static_cast<int>(std::count_if(alpha.begin(), alpha.end(), is_finite_order));
  r.effective_dims = labels_from(r.permutation, 1);
  r.n_star_exponent = 1.0;
  r.rate_exponent = 1.0 / (2.0 + r.inverse_alpha_sum());
  return r;
}

double fixed_point_rate(const std::vector<int>& alpha, const std::vector<double>& beta, int ell, double n) {
  if (ell < 1 || ell > static_cast<int>(alpha.size()) || beta.size() != alpha.size()) {
    throw InvalidArgument("fixed_point_rate: bad index or lengths");
  }
  double tail_beta = 0.0, tail_inv = 0.0;
  for (std::size_t k = static_cast<std::size_t>(ell - 1); k < alpha.size(); ++k) {
    tail_beta += beta[k];
    tail_inv += inverse_order(alpha[k]);
  }
  return std::pow(n, -tail_beta / (2.0 + tail_inv));
}

double RateReport::n_star(double n) const { return std::pow(n, n_star_exponent); }

double RateReport::omega(double n) const { return std::pow(n, -rate_exponent); }

double RateReport::inverse_alpha_sum() const {
  double total = 0.0;
  for (int k = kappa_star - 1; k < s; ++k) total += inverse_order(alpha[static_cast<std::size_t>(k)]);
  return total;
}

KConstant k_constant(const SmoothnessProfile& profile, const RateReport& report) {
  profile.validate();
  const int d = profile.dim();
  if (static_cast<int>(report.permutation.size()) != d) throw InvalidArgument("report and profile differ in dimension");
  std::vector<int> position(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    const int k = report.permutation[static_cast<std::size_t>(i)];
    if (profile.alpha[static_cast<std::size_t>(k)] != report.alpha[static_cast<std::size_t>(i)]) {
      throw InvalidArgument("report was computed for a different alpha");
    }
    position[static_cast<std::size_t>(k)] = i;
  }
  for (const auto& [j, value] : profile.mixed_derivs) {
    if (value == 0.0) continue;
    bool effective = true;
    for (int k = 0; k < d; ++k) {
      if (j[static_cast<std::size_t>(k)] != 0 && position[static_cast<std::size_t>(k)] < report.kappa_star - 1) effective = false;
    }
    if (effective) throw MixedDerivativesPresent();
  }
  double log_product = 0.0;
  for (int i = report.kappa_star - 1; i < report.s; ++i) {
    const int k = report.permutation[static_cast<std::size_t>(i)];
    const int a = report.alpha[static_cast<std::size_t>(i)];
    log_product += std::log(profile.marginal_derivs[static_cast<std::size_t>(k)] / factorial(a + 1)) / a;
  }
  const double exponent = 1.0 / (2.0 + report.inverse_alpha_sum());
  KConstant out;
  out.K = std::exp(log_product * exponent);
  if (report.design == DesignKind::Random && report.s == d) {
    out.density_adjusted = out.K * std::pow(profile.density_at_x0, -exponent);
  }
  return out;
}

RateReport rate_report(const SmoothnessProfile& profile, const std::vector<double>& beta) {
  profile.validate();
  return beta.empty() ? random_design_rates(profile.alpha) : kappa_star_argmax(profile.alpha, beta);
}

}  // namespace isoblock
