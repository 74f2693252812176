#include "isoblock/estimator.hpp"

#include "isoblock/parallel.hpp"

#include <algorithm>

namespace isoblock {

namespace {

// One admissible corner coordinate along an axis: the index bound it induces
// on the compressed coordinates and the coordinate value itself.
struct Candidate {
  std::ptrdiff_t index;
  double value;
};

struct Candidates {
  std::vector<std::vector<Candidate>> lower;  // ascending in value
  std::vector<std::vector<Candidate>> upper;
};

Candidates candidates_for(const PrefixTable<double>& table, const PointRef& x0) {
  const int d = table.dim();
  if (x0.size() != d) throw InvalidArgument("query point dimension does not match the data");
  Candidates c;
  c.lower.resize(static_cast<std::size_t>(d));
  c.upper.resize(static_cast<std::size_t>(d));
  for (int k = 0; k < d; ++k) {
    const Eigen::VectorXd& axis = table.coords()[k];
    const auto below = static_cast<std::ptrdiff_t>(std::lower_bound(axis.begin(), axis.end(), x0[k]) - axis.begin());
    const bool on_axis = below < axis.size() && axis[below] == x0[k];
    auto& lo = c.lower[k];
    for (std::ptrdiff_t i = 0; i < below; ++i) lo.push_back({i, axis[i]});
    lo.push_back({below, x0[k]});  // x_u = x0 (equals a node when on_axis)
    auto& hi = c.upper[k];
    const std::ptrdiff_t first_above = below + (on_axis ? 1 : 0);
    hi.push_back({first_above - 1, x0[k]});
    for (std::ptrdiff_t i = first_above; i < axis.size(); ++i) hi.push_back({i, axis[i]});
  }
  return c;
}

// Odometer over a product of candidate lists, first axis slowest, so corners
// are visited in lexicographic order.
class Odometer {
 public:
  explicit Odometer(const std::vector<std::vector<Candidate>>& lists)
      : lists_(lists), pos_(lists.size(), 0), index_(lists.size()) {
    for (std::size_t k = 0; k < lists.size(); ++k) index_[k] = lists[k][0].index;
  }
  bool next() {
    for (std::size_t k = lists_.size(); k-- > 0;) {
      if (++pos_[k] < lists_[k].size()) {
        index_[k] = lists_[k][pos_[k]].index;
        return true;
      }
      pos_[k] = 0;
      index_[k] = lists_[k][0].index;
    }
    return false;
  }
  void reset() {
    std::fill(pos_.begin(), pos_.end(), 0);
    for (std::size_t k = 0; k < lists_.size(); ++k) index_[k] = lists_[k][0].index;
  }
  const std::vector<std::ptrdiff_t>& index() const { return index_; }
  Point corner() const {
    Point x(static_cast<Eigen::Index>(lists_.size()));
    for (std::size_t k = 0; k < lists_.size(); ++k) x[static_cast<Eigen::Index>(k)] = lists_[k][pos_[k]].value;
    return x;
  }

 private:
  const std::vector<std::vector<Candidate>>& lists_;
  std::vector<std::size_t> pos_;
  std::vector<std::ptrdiff_t> index_;
};

struct Mean {
  double sum;
  double count;
};

// a < b for averages, by cross multiplication (counts are positive).
bool less(const Mean& a, const Mean& b) { return a.sum * b.count < b.sum * a.count; }

bool nonempty_box(const std::vector<std::ptrdiff_t>& lo, const std::vector<std::ptrdiff_t>& hi) {
  for (std::size_t k = 0; k < lo.size(); ++k) {
    if (hi[k] < lo[k]) return false;
  }
  return true;
}

FitResult finish(const PointRef& x0, const Mean& best, Point lower, Point upper, std::size_t scanned) {
  FitResult r;
  r.query = x0;
  r.value = best.sum / best.count;
  r.argmax_lower = std::move(lower);
  r.argmin_upper = std::move(upper);
  r.count = static_cast<std::size_t>(best.count);
  r.block_sum = best.sum;
  r.candidates_scanned = scanned;
  return r;
}

}  // namespace

FitResult max_min_estimate(const PrefixTable<double>& table, const PointRef& x0) {
  const Candidates cand = candidates_for(table, x0);
  Odometer outer(cand.lower), inner(cand.upper);
  bool have_best = false;
  Mean best{0.0, 1.0};
  Point best_lower, best_upper;
  std::size_t scanned = 0;
  do {
    const auto& lo = outer.index();
    bool have_min = false;
    Mean running{0.0, 1.0};
    Point running_upper;
    inner.reset();
    do {
      const auto& hi = inner.index();
      if (!nonempty_box(lo, hi)) continue;
      const std::size_t n = table.count(lo, hi);
      if (n == 0) continue;
      ++scanned;
      const Mean m{table.sum(lo, hi), static_cast<double>(n)};
      if (!have_min || less(m, running)) {
        running = m;
        running_upper = inner.corner();
        have_min = true;
        // this x_u can no longer beat the incumbent
        if (have_best && !less(best, running)) break;
      }
    } while (inner.next());
    if (have_min && (!have_best || less(best, running))) {
      best = running;
      best_lower = outer.corner();
      best_upper = std::move(running_upper);
      have_best = true;
    }
  } while (outer.next());
  if (!have_best) throw NoFeasibleBlock();
  return finish(x0, best, std::move(best_lower), std::move(best_upper), scanned);
}

FitResult min_max_estimate(const PrefixTable<double>& table, const PointRef& x0) {
  const Candidates cand = candidates_for(table, x0);
  Odometer outer(cand.upper), inner(cand.lower);
  bool have_best = false;
  Mean best{0.0, 1.0};
  Point best_lower, best_upper;
  std::size_t scanned = 0;
  do {
    const auto& hi = outer.index();
    bool have_max = false;
    Mean running{0.0, 1.0};
    Point running_lower;
    inner.reset();
    do {
      const auto& lo = inner.index();
      if (!nonempty_box(lo, hi)) continue;
      const std::size_t n = table.count(lo, hi);
      if (n == 0) continue;
      ++scanned;
      const Mean m{table.sum(lo, hi), static_cast<double>(n)};
      if (!have_max || less(running, m)) {
        running = m;
        running_lower = inner.corner();
        have_max = true;
        if (have_best && !less(running, best)) break;
      }
    } while (inner.next());
    if (have_max && (!have_best || less(running, best))) {
      best = running;
      best_upper = outer.corner();
      best_lower = std::move(running_lower);
      have_best = true;
    }
  } while (outer.next());
  if (!have_best) throw NoFeasibleBlock();
  return finish(x0, best, std::move(best_lower), std::move(best_upper), scanned);
}

FitResult max_min_estimate(const Dataset& data, const PointRef& x0) {
  return max_min_estimate(PrefixTable<double>::build_compressed(data), x0);
}

Eigen::VectorXd fit_grid(const Dataset& data, unsigned threads) {
  if (!data.is_lattice()) throw InvalidArgument("fit_grid requires a lattice dataset");
  const auto table = PrefixTable<double>::build(data);
  Eigen::VectorXd fitted(static_cast<Eigen::Index>(data.size()));
  parallel_for(
      data.size(),
      [&](std::size_t i) {
        const Point x0 = data.design().node(i);
        fitted[static_cast<Eigen::Index>(i)] = max_min_estimate(table, x0).value;
      },
      threads);
  return fitted;
}

}  // namespace isoblock
