#pragma once

// Multi-hop relay of one number over capacity-limited links. A node
// requantizes for its outgoing link only when that link needs a strictly
// coarser step than every step already applied upstream, and forwards the
// value unchanged otherwise.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mrq/cdf_analysis.hpp"
#include "mrq/quantizers.hpp"

namespace mrq {

enum class CapacityPolicy { StepFromCapacity, LevelCountSearch };

inline CapacityPolicy parse_policy(std::string_view name) {
  if (name == "step" || name == "step_from_capacity" || name == "StepFromCapacity") return CapacityPolicy::StepFromCapacity;
  if (name == "search" || name == "level_count_search" || name == "LevelCountSearch") return CapacityPolicy::LevelCountSearch;
  throw std::invalid_argument("unknown capacity policy '" + std::string(name) + "'");
}

inline std::string_view policy_name(CapacityPolicy p) {
  return p == CapacityPolicy::StepFromCapacity ? "step_from_capacity" : "level_count_search";
}

struct Domain {
  double lo = 0.0;
  double hi = 1.0;
  double length() const { return hi - lo; }
};

struct RelayChainConfig {
  std::vector<std::int64_t> capacities;
  Domain domain;
  QuantizerSpec spec = QuantizerSpec::bmrq();
  CapacityPolicy policy = CapacityPolicy::LevelCountSearch;

  void validate() const {
    if (capacities.empty()) throw std::invalid_argument("relay chain needs at least one link");
    for (auto k : capacities)
      if (k < 2) throw std::invalid_argument("every link capacity must be at least 2");
    if (!std::isfinite(domain.lo) || !std::isfinite(domain.hi) || !(domain.lo < domain.hi))
      throw std::invalid_argument("domain must satisfy lo < hi");
  }
};

struct RelayTrace {
  double input = 0.0;
  std::vector<double> outputs;     ///< y_2 .. y_{n+1}
  std::vector<double> steps_used;  ///< step of each link
  std::vector<bool> quantized;     ///< whether the node requantized
  double final_abs_error = 0.0;
};

/// Quantizer step for a link carrying k values over `domain`.
///
/// The uniform quantizer uses |D|/k and BMRQ uses |D| 2^-floor(log2 k).
/// DBMRQ and BBMRQ have no closed rule: StepFromCapacity takes the nominal
/// |D|/k, LevelCountSearch bisects for the smallest s whose cells over the
/// domain number at most k.
inline double capacity_to_step(const QuantizerSpec& spec, std::int64_t k, Domain domain,
                               CapacityPolicy policy = CapacityPolicy::LevelCountSearch) {
  if (k < 2) throw std::invalid_argument("capacity must be at least 2");
  double len = domain.length();
  switch (spec.scheme()) {
    case Scheme::SimpleUniform:
      return len / static_cast<double>(k);
    case Scheme::BMRQ: {
      int bits = 0;
      while ((k >> (bits + 1)) != 0) ++bits;
      return std::ldexp(len, -bits);
    }
    case Scheme::DBMRQ:
    case Scheme::BBMRQ:
      break;
  }
  if (policy == CapacityPolicy::StepFromCapacity) return len / static_cast<double>(k);

  auto fits = [&](double s) { return count_cells(spec, s, domain.lo, domain.hi) <= static_cast<std::size_t>(k); };
  double hi = len;
  while (!fits(hi)) hi *= 2.0;
  double lo = hi / 2.0;
  while (fits(lo)) {
    hi = lo;
    lo /= 2.0;
  }
  for (int i = 0; i < 60; ++i) {
    double mid = 0.5 * (lo + hi);
    if (fits(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  if (!fits(hi)) throw std::logic_error("capacity search lost its feasible bound");
  return hi;
}

/// A relay chain with its per-link steps resolved once.
class RelayChain {
 public:
  explicit RelayChain(RelayChainConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    steps_.reserve(cfg_.capacities.size());
    for (std::size_t i = 0; i < cfg_.capacities.size(); ++i) {
      auto k = cfg_.capacities[i];
      auto prev = std::find(cfg_.capacities.begin(), cfg_.capacities.begin() + static_cast<std::ptrdiff_t>(i), k);
      if (prev != cfg_.capacities.begin() + static_cast<std::ptrdiff_t>(i)) {
        steps_.push_back(steps_[static_cast<std::size_t>(prev - cfg_.capacities.begin())]);
      } else {
        steps_.push_back(capacity_to_step(cfg_.spec, k, cfg_.domain, cfg_.policy));
      }
    }
  }

  const RelayChainConfig& config() const { return cfg_; }
  const std::vector<double>& steps() const { return steps_; }

  RelayTrace run(double x) const {
    if (!std::isfinite(x) || x < cfg_.domain.lo || !(x < cfg_.domain.hi))
      throw std::domain_error("input outside the chain domain");
    RelayTrace trace;
    trace.input = x;
    double y = x;
    double coarsest = 0.0;
    for (std::size_t i = 0; i < steps_.size(); ++i) {
      bool shrink = steps_[i] > coarsest;
      if (shrink) {
        y = quantize(cfg_.spec, steps_[i], y);
        coarsest = steps_[i];
      }
      trace.outputs.push_back(y);
      trace.steps_used.push_back(steps_[i]);
      trace.quantized.push_back(shrink);
    }
    trace.final_abs_error = std::abs(y - x);
    return trace;
  }

  double final_output(double x) const {
    double y = x;
    double coarsest = 0.0;
    for (double s : steps_)
      if (s > coarsest) {
        y = quantize(cfg_.spec, s, y);
        coarsest = s;
      }
    return y;
  }

  /// Mean |final - x|^p over the midpoint grid x_j = lo + (j + 1/2) |D| / n.
  double average_error(double p, std::size_t grid_size) const {
    if (grid_size == 0) throw std::invalid_argument("grid size must be positive");
    if (!(p > 0.0)) throw std::domain_error("p must be positive");
    double len = cfg_.domain.length();
    double acc = 0.0;
    for (std::size_t j = 0; j < grid_size; ++j) {
      double x = cfg_.domain.lo + (static_cast<double>(j) + 0.5) * len / static_cast<double>(grid_size);
      acc += std::pow(std::abs(final_output(x) - x), p);
    }
    return acc / static_cast<double>(grid_size);
  }

 private:
  RelayChainConfig cfg_;
  std::vector<double> steps_;
};

inline constexpr std::size_t kDefaultRelayGrid = std::size_t{1} << 17;

inline RelayTrace run_chain(const RelayChainConfig& cfg, double x) { return RelayChain(cfg).run(x); }

inline double average_chain_error(const RelayChainConfig& cfg, double p, std::size_t grid_size = kDefaultRelayGrid) {
  return RelayChain(cfg).average_error(p, grid_size);
}

struct AdversaryResult {
  RelayChainConfig worst;
  double ratio = 1.0;
  double baseline_error = 0.0;
  double worst_error = 0.0;
  std::size_t configs_checked = 0;
};

/// Exhaustive search over capacity decrements with total at most `budget`
/// (every capacity staying >= 2) for the largest increase of the average
/// chain error.
inline AdversaryResult adversarial_ratio(const RelayChainConfig& cfg, int budget, double p = 1.0,
                                         std::size_t grid_size = kDefaultRelayGrid) {
  if (budget < 0) throw std::invalid_argument("adversary budget must be non-negative");
  cfg.validate();
  AdversaryResult result;
  result.worst = cfg;
  result.baseline_error = average_chain_error(cfg, p, grid_size);
  result.worst_error = result.baseline_error;
  result.configs_checked = 1;
  if (!(result.baseline_error > 0.0)) throw std::domain_error("baseline chain error is zero");

  RelayChainConfig trial = cfg;
  std::function<void(std::size_t, int, bool)> search = [&](std::size_t i, int left, bool changed) {
    if (i == trial.capacities.size()) {
      if (!changed) return;
      double err = average_chain_error(trial, p, grid_size);
      ++result.configs_checked;
      if (err / result.baseline_error > result.ratio) {
        result.ratio = err / result.baseline_error;
        result.worst = trial;
        result.worst_error = err;
      }
      return;
    }
    auto original = cfg.capacities[i];
    for (int d = 0; d <= left && original - d >= 2; ++d) {
      trial.capacities[i] = original - d;
      search(i + 1, left - d, changed || d > 0);
    }
    trial.capacities[i] = original;
  };
  search(0, budget, false);
  return result;
}

}  // namespace mrq
