#pragma once

// Cell-size distributions and the quantities derived from them: the Levy
// metric, Renyi entropy rates, reconstruction-level counts, output entropy
// and L^p quantization error.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mrq/quantizers.hpp"

namespace mrq {

/// Discrete cell-size cdf: strictly increasing positive sizes with
/// probability masses summing to one.
class StepCdf {
 public:
  StepCdf() = default;

  StepCdf(std::vector<double> breakpoints, std::vector<double> masses)
      : breakpoints_(std::move(breakpoints)), masses_(std::move(masses)) {
    if (breakpoints_.empty() || breakpoints_.size() != masses_.size())
      throw std::invalid_argument("step cdf needs matching, non-empty breakpoints and masses");
    double total = 0.0;
    for (std::size_t i = 0; i < breakpoints_.size(); ++i) {
      if (!(breakpoints_[i] > 0.0) || !std::isfinite(breakpoints_[i]))
        throw std::invalid_argument("cell sizes must be positive and finite");
      if (i > 0 && !(breakpoints_[i] > breakpoints_[i - 1]))
        throw std::invalid_argument("cell sizes must be strictly increasing");
      if (!(masses_[i] >= 0.0)) throw std::invalid_argument("masses must be non-negative");
      total += masses_[i];
    }
    if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("masses must sum to 1");
    cumulative_.resize(masses_.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < masses_.size(); ++i) cumulative_[i] = (acc += masses_[i]);
    cumulative_.back() = 1.0;
  }

  /// Aggregates equal values and normalizes the weights to total one.
  static StepCdf from_weighted(std::vector<std::pair<double, double>> value_weight) {
    std::sort(value_weight.begin(), value_weight.end());
    std::vector<double> values;
    std::vector<double> weights;
    for (auto [v, w] : value_weight) {
      if (!values.empty() && values.back() == v) {
        weights.back() += w;
      } else {
        values.push_back(v);
        weights.push_back(w);
      }
    }
    double total = 0.0;
    for (double w : weights) total += w;
    if (!(total > 0.0)) throw std::invalid_argument("total weight must be positive");
    for (auto& w : weights) w /= total;
    return StepCdf(std::move(values), std::move(weights));
  }

  static StepCdf from_samples(std::span<const double> samples) {
    std::vector<std::pair<double, double>> vw;
    vw.reserve(samples.size());
    for (double v : samples) vw.emplace_back(v, 1.0);
    return from_weighted(std::move(vw));
  }

  static StepCdf point_mass(double at) { return StepCdf({at}, {1.0}); }

  double operator()(double x) const {
    auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
    return it == breakpoints_.begin() ? 0.0 : cumulative_[static_cast<std::size_t>(it - breakpoints_.begin()) - 1];
  }

  double left_limit(double x) const {
    auto it = std::lower_bound(breakpoints_.begin(), breakpoints_.end(), x);
    return it == breakpoints_.begin() ? 0.0 : cumulative_[static_cast<std::size_t>(it - breakpoints_.begin()) - 1];
  }

  /// Law of c * gamma.
  StepCdf rescaled(double factor) const {
    if (!(factor > 0.0)) throw std::invalid_argument("rescale factor must be positive");
    std::vector<std::pair<double, double>> vw;
    vw.reserve(breakpoints_.size());
    for (std::size_t i = 0; i < breakpoints_.size(); ++i) vw.emplace_back(breakpoints_[i] * factor, masses_[i]);
    return from_weighted(std::move(vw));
  }

  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::vector<double>& masses() const { return masses_; }
  const std::vector<double>& cumulative() const { return cumulative_; }
  std::size_t size() const { return breakpoints_.size(); }

  // Levy-metric interface.
  const std::vector<double>& special_points() const { return breakpoints_; }
  bool has_continuous_part() const { return false; }
  double support_lo() const { return breakpoints_.front(); }
  double support_hi() const { return breakpoints_.back(); }

 private:
  std::vector<double> breakpoints_;
  std::vector<double> masses_;
  std::vector<double> cumulative_;
};

/// Closed-form cell-size laws.
///  - BiasAlpha: stationary law of the BBMRQ cell size at unit step.
///  - TwoPowUnif: law of 2^Z, Z ~ Unif[-1, 0].
///  - DbmrqAtoms: two-atom law of the DBMRQ at step s (absolute units).
class ClosedCdf {
 public:
  enum class Kind { BiasAlpha, TwoPowUnif, DbmrqAtoms };

  static ClosedCdf bias_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
    ClosedCdf c(Kind::BiasAlpha);
    c.param_ = alpha;
    double lo = std::min(alpha, 1.0 - alpha);
    double hi = std::max(alpha, 1.0 - alpha);
    c.points_ = lo == hi ? std::vector<double>{lo, 1.0} : std::vector<double>{lo, hi, 1.0};
    return c;
  }

  static ClosedCdf two_pow_unif() {
    ClosedCdf c(Kind::TwoPowUnif);
    c.points_ = {0.5, 1.0};
    return c;
  }

  static ClosedCdf dbmrq_atoms(double s) {
    if (!(s > 0.0) || !std::isfinite(s)) throw std::invalid_argument("step must be positive");
    ClosedCdf c(Kind::DbmrqAtoms);
    c.param_ = s;
    int e = detail::floor_log2(s);
    c.small_ = std::ldexp(1.0, e);
    c.large_ = std::ldexp(1.0, e + 1);
    c.large_mass_ = 2.0 - c.large_ / s;
    c.small_mass_ = c.large_ / s - 1.0;
    c.points_ = c.large_mass_ > 0.0 ? std::vector<double>{c.small_, c.large_} : std::vector<double>{c.small_};
    return c;
  }

  Kind kind() const { return kind_; }
  double alpha() const { return param_; }
  double step() const { return param_; }

  /// Binary entropy -a log2 a - (1-a) log2 (1-a).
  static double binary_entropy(double a) { return -a * std::log2(a) - (1.0 - a) * std::log2(1.0 - a); }

  double operator()(double g) const {
    switch (kind_) {
      case Kind::BiasAlpha: {
        if (!(g > 0.0)) return 0.0;
        double a = param_;
        double m = std::min(g, 1.0);
        double v = a * std::max(std::log2(m / a), 0.0) + (1.0 - a) * std::max(std::log2(m / (1.0 - a)), 0.0);
        return std::min(v / binary_entropy(a), 1.0);
      }
      case Kind::TwoPowUnif:
        if (!(g > 0.0)) return 0.0;
        return std::min(std::max(std::log2(g) + 1.0, 0.0), 1.0);
      case Kind::DbmrqAtoms:
        return (g >= large_ ? large_mass_ : 0.0) + (g >= small_ ? small_mass_ : 0.0);
    }
    return 0.0;
  }

  double left_limit(double g) const {
    if (kind_ != Kind::DbmrqAtoms) return (*this)(g);
    return (g > large_ ? large_mass_ : 0.0) + (g > small_ ? small_mass_ : 0.0);
  }

  /// Density where the law is absolutely continuous; the value at a kink is
  /// the left limit.
  std::optional<double> density(double g) const {
    switch (kind_) {
      case Kind::BiasAlpha: {
        double a = param_;
        if (!(g > 0.0) || g > 1.0) return 0.0;
        double w = (g > a ? a : 0.0) + (g > 1.0 - a ? 1.0 - a : 0.0);
        return w / (binary_entropy(a) * std::numbers::ln2 * g);
      }
      case Kind::TwoPowUnif:
        if (!(g > 0.5) || g > 1.0) return 0.0;
        return 1.0 / (std::numbers::ln2 * g);
      case Kind::DbmrqAtoms:
        return std::nullopt;
    }
    return std::nullopt;
  }

  /// Atoms of the DBMRQ law as (size, mass); empty for continuous kinds.
  std::vector<std::pair<double, double>> atoms() const {
    if (kind_ != Kind::DbmrqAtoms) return {};
    std::vector<std::pair<double, double>> out{{small_, small_mass_}};
    if (large_mass_ > 0.0) out.emplace_back(large_, large_mass_);
    return out;
  }

  const std::vector<double>& special_points() const { return points_; }
  bool has_continuous_part() const { return kind_ != Kind::DbmrqAtoms; }
  double support_lo() const { return points_.front(); }
  double support_hi() const { return points_.back(); }

 private:
  explicit ClosedCdf(Kind kind) : kind_(kind) {}

  Kind kind_;
  double param_ = 0.0;
  double small_ = 0.0;
  double large_ = 0.0;
  double small_mass_ = 0.0;
  double large_mass_ = 0.0;
  std::vector<double> points_;
};

template <class F>
concept CellSizeCdf = requires(const F& f, double x) {
  { f(x) } -> std::convertible_to<double>;
  { f.left_limit(x) } -> std::convertible_to<double>;
  { f.special_points() } -> std::convertible_to<const std::vector<double>&>;
  { f.has_continuous_part() } -> std::convertible_to<bool>;
  { f.support_lo() } -> std::convertible_to<double>;
  { f.support_hi() } -> std::convertible_to<double>;
};

// ---------------------------------------------------------------------------
// Empirical cell-size cdf

/// F_{Q,S} for S = [x0, x1]: every cell is clipped to S, and its clipped
/// length is both its size and its weight.
inline StepCdf empirical_cell_cdf(const QuantizerSpec& spec, double s, double x0, double x1) {
  auto cells = enumerate_cells(spec, s, x0, x1);
  std::vector<std::pair<double, double>> vw;
  vw.reserve(cells.size());
  for (const auto& c : cells) {
    double len = std::min(c.hi, x1) - std::max(c.lo, x0);
    if (len > 0.0) vw.emplace_back(len, len);
  }
  return StepCdf::from_weighted(std::move(vw));
}

// ---------------------------------------------------------------------------
// Levy metric

namespace detail {

template <CellSizeCdf F, CellSizeCdf G>
bool levy_feasible(const F& f, const G& g, double eps, const std::vector<double>& base_points,
                   const std::vector<double>& grid) {
  constexpr double kSlack = 1e-12;
  auto check = [&](double x) {
    if (f(x - eps) - eps > g(x) + kSlack) return false;
    if (g(x) > f(x + eps) + eps + kSlack) return false;
    if (f.left_limit(x - eps) - eps > g.left_limit(x) + kSlack) return false;
    if (g.left_limit(x) > f.left_limit(x + eps) + eps + kSlack) return false;
    return true;
  };
  for (double p : base_points)
    if (!check(p) || !check(p - eps) || !check(p + eps)) return false;
  for (double x : grid)
    if (!check(x)) return false;
  return true;
}

}  // namespace detail

/// Levy distance to absolute accuracy 1e-4 by bisection on epsilon. The
/// band condition is checked at every jump or kink of both cdfs (and their
/// eps-shifts), which is exact whenever one side is a step function; a
/// uniform grid covers the case of two continuous laws.
template <CellSizeCdf F, CellSizeCdf G>
double levy_distance(const F& f, const G& g) {
  std::vector<double> points = f.special_points();
  points.insert(points.end(), g.special_points().begin(), g.special_points().end());
  std::vector<double> grid;
  if (f.has_continuous_part() && g.has_continuous_part()) {
    constexpr int kGrid = 200'000;
    double lo = std::min(f.support_lo(), g.support_lo()) - 1.0;
    double hi = std::max(f.support_hi(), g.support_hi()) + 1.0;
    grid.reserve(kGrid + 1);
    for (int i = 0; i <= kGrid; ++i) grid.push_back(lo + (hi - lo) * i / kGrid);
  }
  double lo = 0.0;
  double hi = 1.0;
  if (detail::levy_feasible(f, g, 0.0, points, grid)) return 0.0;
  while (hi - lo > 1e-6) {
    double mid = 0.5 * (lo + hi);
    if (detail::levy_feasible(f, g, mid, points, grid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

// ---------------------------------------------------------------------------
// Renyi entropy rates

namespace detail {

/// (e^u - 1)/u - 1, accurate near 0.
inline double expm1_ratio_minus_one(double u) {
  if (std::abs(u) < 1e-4) return u / 2.0 + u * u / 6.0 + u * u * u / 24.0;
  return std::expm1(u) / u - 1.0;
}

/// (1/(1-eta)) log2(1 + d) where d = integral of gamma^(eta-1) dF minus 1.
inline double renyi_from_excess(double d, double eta) {
  if (std::isinf(d)) return eta < 1.0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
  return std::log1p(d) / (std::numbers::ln2 * (1.0 - eta));
}

}  // namespace detail

/// R_eta for a discrete law: (1/(1-eta)) log2 sum m gamma^(eta-1), and
/// R_1 = sum m log2(1/gamma).
inline double renyi_rate(const StepCdf& f, double eta) {
  if (!(eta >= 0.0)) throw std::invalid_argument("eta must be non-negative");
  const auto& g = f.breakpoints();
  const auto& m = f.masses();
  if (eta == 1.0) {
    double acc = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) acc -= m[i] * std::log2(g[i]);
    return acc;
  }
  // sum m (gamma^(eta-1) - 1), evaluated with expm1 to stay accurate near eta = 1.
  double excess = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (m[i] > 0.0) excess += m[i] * std::expm1((eta - 1.0) * std::log(g[i]));
  return detail::renyi_from_excess(excess, eta);
}

inline double renyi_rate(const ClosedCdf& f, double eta) {
  if (!(eta >= 0.0)) throw std::invalid_argument("eta must be non-negative");
  switch (f.kind()) {
    case ClosedCdf::Kind::BiasAlpha: {
      double a = f.alpha();
      double h = ClosedCdf::binary_entropy(a);
      if (eta == 1.0) {
        double la = std::log2(a);
        double lb = std::log2(1.0 - a);
        return (a * la * la + (1.0 - a) * lb * lb) / (2.0 * h);
      }
      // integral = sum_w w_a (e^u_a - 1)/u_a / sum_w w_a, w_a = -a ln a, u_a = (eta-1) ln a.
      double excess = 0.0;
      double norm = 0.0;
      for (double p : {a, 1.0 - a}) {
        double w = -p * std::log(p);
        excess += w * detail::expm1_ratio_minus_one((eta - 1.0) * std::log(p));
        norm += w;
      }
      return detail::renyi_from_excess(excess / norm, eta);
    }
    case ClosedCdf::Kind::TwoPowUnif: {
      if (eta == 1.0) return 0.5;
      // integral = (1 - 2^(1-eta)) / ((eta-1) ln 2) = (e^v - 1)/v with v = -(eta-1) ln 2.
      double v = -(eta - 1.0) * std::numbers::ln2;
      return detail::renyi_from_excess(detail::expm1_ratio_minus_one(v), eta);
    }
    case ClosedCdf::Kind::DbmrqAtoms: {
      std::vector<double> g;
      std::vector<double> m;
      for (auto [size, mass] : f.atoms()) {
        g.push_back(size);
        m.push_back(mass);
      }
      // Masses are exact complements; renormalize the rounding away.
      double total = 0.0;
      for (double v : m) total += v;
      for (double& v : m) v /= total;
      return renyi_rate(StepCdf(std::move(g), std::move(m)), eta);
    }
  }
  throw std::invalid_argument("unknown cdf kind");
}

/// R_eta(Q_s) = R_eta(Q_1) - log2 s for a scale-invariant family.
inline double scale_shift_rate(double rate_at_unit, double s) {
  if (!(s > 0.0) || !std::isfinite(s)) throw std::domain_error("step s must be positive");
  return rate_at_unit - std::log2(s);
}

// ---------------------------------------------------------------------------
// Finite-interval quantities

struct LevelCount {
  std::size_t direct = 0;  ///< cells meeting [x0, x1)
  double integral = 0.0;   ///< (x1 - x0) * integral of 1/gamma dF_{Q,[x0,x1]}
};

inline LevelCount count_levels(const QuantizerSpec& spec, double s, double x0, double x1) {
  auto cells = enumerate_cells(spec, s, x0, x1);
  StepCdf f = empirical_cell_cdf(spec, s, x0, x1);
  LevelCount out;
  out.direct = cells.size();
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) acc += f.masses()[i] / f.breakpoints()[i];
  out.integral = (x1 - x0) * acc;
  return out;
}

/// Number of cells meeting [x0, x1), without building the cdf.
inline std::size_t count_cells(const QuantizerSpec& spec, double s, double x0, double x1) {
  return enumerate_cells(spec, s, x0, x1).size();
}

/// Shannon entropy (bits) of Q(X) for X ~ Unif[x0, x1].
inline double output_entropy(const QuantizerSpec& spec, double s, double x0, double x1) {
  StepCdf f = empirical_cell_cdf(spec, s, x0, x1);
  double len = x1 - x0;
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) acc += f.masses()[i] * std::log2(len / f.breakpoints()[i]);
  return acc;
}

namespace detail {

/// Integral of |x - c|^p over [a, b].
inline double abs_power_integral(double a, double b, double c, double p) {
  auto prim = [p](double d) { return std::pow(d, p + 1.0) / (p + 1.0); };
  if (c <= a) return prim(b - c) - prim(a - c);
  if (c >= b) return prim(c - a) - prim(c - b);
  return prim(c - a) + prim(b - c);
}

}  // namespace detail

/// E|X - Q(X)|^p for X ~ Unif[x0, x1], integrating every clipped cell exactly
/// against the quantizer's actual level.
inline double lp_error_exact(const QuantizerSpec& spec, double s, double x0, double x1, double p) {
  if (!(p > 0.0)) throw std::domain_error("p must be positive");
  auto cells = enumerate_cells(spec, s, x0, x1);
  double acc = 0.0;
  for (const auto& c : cells) {
    double a = std::max(c.lo, x0);
    double b = std::min(c.hi, x1);
    if (b > a) acc += detail::abs_power_integral(a, b, c.level, p);
  }
  return acc / (x1 - x0);
}

/// Lower bound on the L^p error from a cell-size law: integral of
/// (gamma/2)^p/(p+1) dF.
inline double lp_error_lower_bound(const StepCdf& f, double p) {
  if (!(p > 0.0)) throw std::domain_error("p must be positive");
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) acc += f.masses()[i] * std::pow(f.breakpoints()[i] / 2.0, p);
  return acc / (p + 1.0);
}

/// Limit of the L^p error of a centered quantizer: 2^(-p (R_{p+1} + 1)) / (p+1).
template <class Cdf>
double lp_error_asymptotic(const Cdf& f, double p) {
  if (!(p > 0.0)) throw std::domain_error("p must be positive");
  double r = renyi_rate(f, p + 1.0);
  if (!std::isfinite(r)) throw std::domain_error("Renyi rate diverges");
  return std::exp2(-p * (r + 1.0)) / (p + 1.0);
}

}  // namespace mrq
