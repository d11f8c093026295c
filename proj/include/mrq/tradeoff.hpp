#pragma once

// Rate/error tradeoff of multi-resolution quantizers: the log-rate versus
// asymptotic L^p error curves, the converse lower bound on R_0 - R_{p+1}, the
// two density inequalities every asymptotically scale-invariant MRQ obeys,
// and a Monte-Carlo renewal-process model of the BBMRQ cell size.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "mrq/cdf_analysis.hpp"
#include "mrq/quantizers.hpp"

namespace mrq {

// ---------------------------------------------------------------------------
// Tradeoff curves

struct RateErrorPoint {
  double budget = 0.0;    ///< log-rate constraint x
  double log_rate = 0.0;  ///< R_0(Q_s) actually achieved, <= budget
  double error = 0.0;     ///< asymptotic L^p error at s
  double s = 0.0;
};

struct TradeoffCurve {
  std::vector<RateErrorPoint> points;           ///< sorted by budget
  std::vector<std::string> omitted;             ///< diagnostics for skipped grid values
};

namespace detail {

/// All cells of one size at step s: the uniform and binary families.
inline ClosedCdf unit_atom_law(double size) { return ClosedCdf::dbmrq_atoms(size); }

/// Rates of Q_s for one s in the reference octave [1, 2).
struct OctaveSample {
  double s;
  double r0;
  double rp;
};

inline std::vector<OctaveSample> sample_octave(const QuantizerSpec& spec, double p) {
  constexpr int kPerOctave = 1 << 12;
  std::vector<OctaveSample> out;
  out.reserve(kPerOctave);
  for (int j = 0; j < kPerOctave; ++j) {
    double s = std::exp2(static_cast<double>(j) / kPerOctave);
    ClosedCdf law = spec.scheme() == Scheme::BMRQ ? unit_atom_law(1.0) : ClosedCdf::dbmrq_atoms(s);
    out.push_back({s, renyi_rate(law, 0.0), renyi_rate(law, p + 1.0)});
  }
  return out;
}

inline double asymptotic_error_from_rate(double rp, double p) { return std::exp2(-p * (rp + 1.0)) / (p + 1.0); }

}  // namespace detail

/// For each budget x: inf { asymptotic L^p error of Q_s : R_0(Q_s) <= x }.
///
/// Scale-invariant families (BBMRQ, and the uniform quantizer whose cells all
/// have size s) attain the infimum at R_0(Q_s) = x. The binary families are
/// periodic in log2 s, so one octave is sampled and shifted by whole octaves.
inline TradeoffCurve tradeoff_curve(const QuantizerSpec& spec, double p, std::vector<double> x_grid) {
  if (!(p > 0.0)) throw std::domain_error("p must be positive");
  if (x_grid.empty()) throw std::invalid_argument("budget grid is empty");
  std::sort(x_grid.begin(), x_grid.end());
  TradeoffCurve curve;

  auto scale_free = [&](double r0_unit, double rp_unit) {
    for (double x : x_grid) {
      if (!std::isfinite(x)) {
        curve.omitted.push_back("non-finite budget");
        continue;
      }
      double log2_s = r0_unit - x;
      RateErrorPoint pt;
      pt.budget = x;
      pt.log_rate = x;
      pt.s = std::exp2(log2_s);
      pt.error = detail::asymptotic_error_from_rate(rp_unit - log2_s, p);
      curve.points.push_back(pt);
    }
  };

  switch (spec.scheme()) {
    case Scheme::SimpleUniform:
      scale_free(0.0, 0.0);
      break;
    case Scheme::BBMRQ: {
      ClosedCdf law = ClosedCdf::bias_alpha(spec.alpha());
      scale_free(renyi_rate(law, 0.0), renyi_rate(law, p + 1.0));
      break;
    }
    case Scheme::BMRQ:
    case Scheme::DBMRQ: {
      auto octave = detail::sample_octave(spec, p);
      for (double x : x_grid) {
        if (!std::isfinite(x)) {
          curve.omitted.push_back("non-finite budget");
          continue;
        }
        RateErrorPoint best;
        best.error = std::numeric_limits<double>::infinity();
        for (const auto& o : octave) {
          // Q_{s 2^k} has rates shifted down by k; take the smallest feasible k.
          double k = std::ceil(o.r0 - x);
          double err = detail::asymptotic_error_from_rate(o.rp - k, p);
          if (err < best.error) {
            best.budget = x;
            best.log_rate = o.r0 - k;
            best.error = err;
            best.s = std::ldexp(o.s, static_cast<int>(k));
          }
        }
        curve.points.push_back(best);
      }
      break;
    }
  }
  return curve;
}

/// Right-hand side of R_0 - R_{p+1} >= (1/p) log2((1 - 2^-p)/p * (log2 e)^(p+1)).
inline double converse_bound(double p) {
  if (!(p > 0.0)) throw std::domain_error("p must be positive");
  double log2e = std::numbers::log2e;
  return (std::log2((1.0 - std::exp2(-p)) / p) + (p + 1.0) * std::log2(log2e)) / p;
}

/// R_0 - R_{p+1} of the stationary BBMRQ law.
inline double bias_rate_gap(double alpha, double p) {
  ClosedCdf law = ClosedCdf::bias_alpha(alpha);
  return renyi_rate(law, 0.0) - renyi_rate(law, p + 1.0);
}

// ---------------------------------------------------------------------------
// Quadrature

namespace detail {

inline double simpson_step(const std::function<double(double)>& f, double a, double fa, double m, double fm, double b,
                           double fb, double whole, double tol, int depth) {
  double lm = 0.5 * (a + m);
  double rm = 0.5 * (m + b);
  double flm = f(lm);
  double frm = f(rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  double diff = left + right - whole;
  if (depth <= 0 || std::abs(diff) <= 15.0 * tol) return left + right + diff / 15.0;
  return simpson_step(f, a, fa, lm, flm, m, fm, left, tol / 2.0, depth - 1) +
         simpson_step(f, m, fm, rm, frm, b, fb, right, tol / 2.0, depth - 1);
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol) {
  if (!(b > a)) return 0.0;
  double m = 0.5 * (a + b);
  double fa = f(a);
  double fm = f(m);
  double fb = f(b);
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_step(f, a, fa, m, fm, b, fb, whole, tol, 48);
}

}  // namespace detail

/// Integral of g over [lo, hi] (0 < lo) on the log axis, split at `kinks`.
/// Pieces are integrated on open interiors so discontinuities at kinks are
/// never sampled.
inline double integrate_log_axis(const std::function<double(double)>& g, double lo, double hi,
                                 std::vector<double> kinks, double tol = 1e-11) {
  if (!(lo > 0.0)) throw std::domain_error("integral diverges: support reaches 0");
  if (!(hi > lo)) return 0.0;
  kinks.push_back(lo);
  kinks.push_back(hi);
  std::sort(kinks.begin(), kinks.end());
  kinks.erase(std::unique(kinks.begin(), kinks.end()), kinks.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < kinks.size(); ++i) {
    double a = std::max(kinks[i], lo);
    double b = std::min(kinks[i + 1], hi);
    if (!(b > a)) continue;
    double ua = std::log(a);
    double ub = std::log(b);
    // Nudge off the endpoints so one-sided limits are used.
    double pad = (ub - ua) * 1e-13;
    auto h = [&](double u) {
      double x = std::exp(u);
      return g(x) * x;
    };
    total += detail::adaptive_simpson(h, ua + pad, ub - pad, tol);
  }
  return total;
}

// ---------------------------------------------------------------------------
// Density inequalities

/// A cell-size density on [lo, hi] with known discontinuities.
struct Density {
  std::function<double(double)> pdf;
  double lo = 0.0;
  double hi = 0.0;
  std::vector<double> kinks;
};

inline Density density_of(const ClosedCdf& cdf) {
  if (!cdf.has_continuous_part()) throw std::invalid_argument("cdf has no density");
  Density d;
  d.pdf = [cdf](double x) { return *cdf.density(x); };
  d.lo = cdf.support_lo();
  d.hi = cdf.support_hi();
  d.kinks = cdf.special_points();
  return d;
}

inline Density uniform_density(double a, double b) {
  if (!(a > 0.0 && b > a)) throw std::invalid_argument("uniform density needs 0 < a < b");
  Density d;
  double h = 1.0 / (b - a);
  d.pdf = [a, b, h](double x) { return (x > a && x <= b) ? h : 0.0; };
  d.lo = a;
  d.hi = b;
  d.kinks = {a, b};
  return d;
}

/// slack(y) = integral x^-1 (1 + 1{x > y}) f(x) dx - f(y). Non-negative for
/// (almost) every y when f is the cell-size density of an asymptotically
/// scale-invariant MRQ.
inline std::vector<double> density_bound_slack(const Density& f, const std::vector<double>& ys) {
  auto over_x = [&](double x) { return f.pdf(x) / x; };
  double total = integrate_log_axis(over_x, f.lo, f.hi, f.kinks);
  std::vector<double> out;
  out.reserve(ys.size());
  for (double y : ys) {
    double tail = 0.0;
    if (y < f.hi) {
      auto kinks = f.kinks;
      kinks.push_back(y);
      tail = integrate_log_axis(over_x, std::max(y, f.lo), f.hi, kinks);
    }
    out.push_back(total + tail - f.pdf(y));
  }
  return out;
}

/// integral x^-1 (1 + 1{f(x) >= z f(x z)}) (f(x) - z f(x z)) dx, which must be
/// <= 0 for every z > 1.
inline double rescaling_inequality(const Density& f, double zeta) {
  if (!(zeta > 1.0)) throw std::domain_error("zeta must exceed 1");
  auto integrand = [&](double x) {
    double a = f.pdf(x);
    double b = zeta * f.pdf(x * zeta);
    return (a >= b ? 2.0 : 1.0) * (a - b) / x;
  };
  std::vector<double> kinks = f.kinks;
  for (double k : f.kinks) kinks.push_back(k / zeta);
  return integrate_log_axis(integrand, f.lo / zeta, f.hi, kinks);
}

// ---------------------------------------------------------------------------
// Renewal oracle

struct RenewalConfig {
  double alpha = 0.6;
  double horizon_t = 30.0;
  std::size_t samples = 100'000;
  std::uint64_t seed = 42;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Empirical law of W = 2^-(residual life) at time horizon_t for a renewal
/// process with inter-arrival times -log2 alpha (prob. alpha) and
/// -log2(1 - alpha) (prob. 1 - alpha), started with a renewal at 0. Each
/// sample draws from its own stream seeded by (seed, sample index).
inline StepCdf renewal_oracle_cdf(const RenewalConfig& cfg) {
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
  if (!(cfg.horizon_t > 0.0) || cfg.samples == 0) throw std::invalid_argument("horizon and samples must be positive");
  const double short_gap = -std::log2(cfg.alpha);
  const double long_gap = -std::log2(1.0 - cfg.alpha);
  std::vector<double> w(cfg.samples);
  for (std::size_t i = 0; i < cfg.samples; ++i) {
    std::mt19937_64 gen(detail::splitmix64(cfg.seed ^ detail::splitmix64(i)));
    double t = 0.0;
    // First renewal at or after the horizon: the cell at step 2^-t is the
    // first one in the nested chain of length <= 2^-t.
    while (t < cfg.horizon_t) {
      double u = static_cast<double>(gen() >> 11) * 0x1p-53;
      t += u < cfg.alpha ? short_gap : long_gap;
    }
    w[i] = std::exp2(-(t - cfg.horizon_t));
  }
  return StepCdf::from_samples(w);
}

}  // namespace mrq
