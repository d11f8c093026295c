#pragma once

// Scalar multi-resolution quantizers: simple uniform, binary (BMRQ),
// dithered binary (DBMRQ) and biased binary (BBMRQ).
//
// Every quantizer maps x to the midpoint of the cell containing it. For the
// three multi-resolution families the identity
//
//     quantize(s2, quantize(s1, x)) == quantize(s2, x)   for s2 >= s1
//
// holds bitwise, not just in exact arithmetic. BMRQ and DBMRQ get this from
// dyadic arithmetic (scaling by powers of two is exact). BBMRQ gets it from a
// canonical tree: every cell endpoint is produced by one fixed computation
// from the cell's path, so two queries that share an ancestor see the same
// floating-point boundaries.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mrq {

enum class Scheme { SimpleUniform, BMRQ, DBMRQ, BBMRQ };

inline std::string_view scheme_name(Scheme scheme) {
  switch (scheme) {
    case Scheme::SimpleUniform: return "uniform";
    case Scheme::BMRQ: return "bmrq";
    case Scheme::DBMRQ: return "dbmrq";
    case Scheme::BBMRQ: return "bbmrq";
  }
  return "unknown";
}

inline Scheme parse_scheme(std::string_view name) {
  if (name == "uniform" || name == "simple" || name == "simple_uniform") return Scheme::SimpleUniform;
  if (name == "bmrq") return Scheme::BMRQ;
  if (name == "dbmrq") return Scheme::DBMRQ;
  if (name == "bbmrq") return Scheme::BBMRQ;
  throw std::invalid_argument("unknown scheme '" + std::string(name) + "'");
}

enum class Sign : std::uint8_t { Positive, Negative };

/// Successive-refinement code of a cell.
///
/// BBMRQ: the cell is reached from the base cell [0, alpha^base_level) by
/// taking the children named by `bits` (0 = left part of proportion alpha,
/// 1 = right part). BMRQ/DBMRQ: the base cell is [0, 2^base_level) and `bits`
/// are the binary digits of the dyadic cell index below it. In canonical form
/// the first bit is 1, i.e. base_level names the deepest all-zero ancestor.
/// Negative sign mirrors the cell to the other side of the origin.
struct PathCode {
  Sign sign = Sign::Positive;
  int base_level = 0;
  std::vector<std::uint8_t> bits;

  friend bool operator==(const PathCode&, const PathCode&) = default;

  /// Ancestor obtained by dropping the last `count` bits.
  PathCode truncated(std::size_t count) const {
    PathCode out = *this;
    out.bits.resize(bits.size() - std::min(count, bits.size()));
    return out;
  }

  std::string bit_string() const {
    std::string s;
    s.reserve(bits.size());
    for (auto b : bits) s.push_back(b ? '1' : '0');
    return s;
  }
};

/// One quantization cell. Cells own their left endpoint, except that the
/// mirrored negative half of BBMRQ owns its right endpoint (odd symmetry).
struct Cell {
  double lo = 0.0;
  double hi = 0.0;
  double level = 0.0;
  PathCode path;
  bool left_closed = true;

  double length() const { return hi - lo; }

  bool contains(double x) const {
    if (left_closed) return lo <= x && x < hi;
    return lo < x && x <= hi && x < 0.0;
  }
};

namespace detail {

[[noreturn]] inline void domain_fail(const std::string& what) { throw std::domain_error(what); }

/// Midpoint of [lo, hi), kept strictly below hi.
inline double centered_level(double lo, double hi) {
  double mid = 0.5 * (lo + hi);
  if (mid >= hi) mid = std::nextafter(hi, lo);
  return mid;
}

/// floor(log2 s) from the binary exponent, exact at powers of two.
inline int floor_log2(double s) { return std::ilogb(s); }

inline void check_arguments(double s, double x) {
  if (!std::isfinite(s) || !(s > 0.0)) domain_fail("step s must be positive and finite");
  if (!std::isfinite(x)) domain_fail("input x must be finite");
}

/// Dyadic cell of size 2^exponent with (signed) integer index.
inline Cell dyadic_cell(double index, int exponent) {
  Cell c;
  c.lo = std::ldexp(index, exponent);
  c.hi = std::ldexp(index + 1.0, exponent);
  c.level = centered_level(c.lo, c.hi);
  return c;
}

inline PathCode dyadic_path(double index, int exponent) {
  PathCode path;
  double j = index;
  if (index < 0.0) {
    path.sign = Sign::Negative;
    j = -index - 1.0;
  }
  if (j >= 0x1p62) domain_fail("cell index too large for a path code");
  auto k = static_cast<std::uint64_t>(j);
  int width = 0;
  while ((k >> width) != 0) ++width;
  path.base_level = exponent + width;
  for (int b = width - 1; b >= 0; --b) path.bits.push_back(static_cast<std::uint8_t>((k >> b) & 1U));
  return path;
}

inline Cell decode_dyadic(const PathCode& path) {
  if (path.bits.size() > 62) throw std::invalid_argument("dyadic path longer than 62 bits");
  std::uint64_t k = 0;
  for (auto b : path.bits) {
    if (b > 1) throw std::invalid_argument("path bits must be 0 or 1");
    k = (k << 1) | b;
  }
  int exponent = path.base_level - static_cast<int>(path.bits.size());
  double j = static_cast<double>(k);
  Cell c = dyadic_cell(path.sign == Sign::Negative ? -j - 1.0 : j, exponent);
  c.path = path;
  return c;
}

}  // namespace detail

/// Which quantizer family, plus its parameters. BBMRQ specs carry a read-only
/// table of alpha^n shared between copies, so specs are cheap to copy and
/// safe to use from several threads.
class QuantizerSpec {
 public:
  static QuantizerSpec simple_uniform() { return QuantizerSpec(Scheme::SimpleUniform); }
  static QuantizerSpec bmrq() { return QuantizerSpec(Scheme::BMRQ); }

  static QuantizerSpec dbmrq(double dither = std::numbers::phi) {
    if (!std::isfinite(dither) || !(dither > 0.0)) throw std::invalid_argument("dither constant must be positive");
    QuantizerSpec spec(Scheme::DBMRQ);
    spec.dither_ = dither;
    return spec;
  }

  /// alpha must lie in (1/2, 3/4) unless `allow_any_alpha`, which accepts
  /// (0, 1) and raises alpha_out_of_range().
  static QuantizerSpec bbmrq(double alpha, bool allow_any_alpha = false) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
    bool in_default = alpha > 0.5 && alpha < 0.75;
    if (!in_default && !allow_any_alpha)
      throw std::invalid_argument("alpha outside (1/2, 3/4); pass allow_any_alpha to override");
    QuantizerSpec spec(Scheme::BBMRQ);
    spec.alpha_ = alpha;
    spec.alpha_out_of_range_ = !in_default;
    spec.powers_ = std::make_shared<const PowerTable>(alpha);
    return spec;
  }

  static QuantizerSpec make(Scheme scheme, double alpha = 0.6, double dither = std::numbers::phi,
                            bool allow_any_alpha = false) {
    switch (scheme) {
      case Scheme::SimpleUniform: return simple_uniform();
      case Scheme::BMRQ: return bmrq();
      case Scheme::DBMRQ: return dbmrq(dither);
      case Scheme::BBMRQ: return bbmrq(alpha, allow_any_alpha);
    }
    throw std::invalid_argument("unknown scheme");
  }

  Scheme scheme() const { return scheme_; }
  double alpha() const { return alpha_; }
  double dither() const { return dither_; }
  bool alpha_out_of_range() const { return alpha_out_of_range_; }
  bool is_multi_resolution() const { return scheme_ != Scheme::SimpleUniform; }

  /// alpha^n from the table (BBMRQ only).
  double alpha_pow(int n) const { return powers_->at(n); }
  int min_level() const { return powers_->min_level(); }
  int max_level() const { return powers_->max_level(); }
  /// Largest n with alpha^n > v.
  int deepest_level_above(double v) const { return powers_->deepest_level_above(v); }

 private:
  // alpha^n for n in [min_level, max_level], built by repeated multiplication
  // (n > 0) or division (n < 0) from alpha^0 = 1.
  class PowerTable {
   public:
    explicit PowerTable(double alpha) {
      constexpr double kHuge = 1e300;
      constexpr double kTiny = 1e-300;
      std::vector<double> up;  // alpha^-1, alpha^-2, ...
      for (double v = 1.0 / alpha; v < kHuge; v /= alpha) up.push_back(v);
      std::vector<double> down{1.0};  // alpha^0, alpha^1, ...
      for (double v = alpha; v > kTiny; v *= alpha) down.push_back(v);
      offset_ = static_cast<int>(up.size());
      values_.assign(up.rbegin(), up.rend());
      values_.insert(values_.end(), down.begin(), down.end());
    }

    int min_level() const { return -offset_; }
    int max_level() const { return static_cast<int>(values_.size()) - offset_ - 1; }

    double at(int n) const {
      if (n < min_level() || n > max_level()) detail::domain_fail("value outside the representable alpha^n range");
      return values_[static_cast<std::size_t>(n + offset_)];
    }

    int deepest_level_above(double v) const {
      // values_ is strictly decreasing in the index.
      auto it = std::partition_point(values_.begin(), values_.end(), [v](double p) { return p > v; });
      if (it == values_.begin()) detail::domain_fail("value exceeds the alpha^n table");
      return static_cast<int>(it - values_.begin()) - 1 - offset_;
    }

   private:
    std::vector<double> values_;
    int offset_ = 0;
  };

  explicit QuantizerSpec(Scheme scheme) : scheme_(scheme) {}

  Scheme scheme_;
  double alpha_ = 0.0;
  double dither_ = std::numbers::phi;
  bool alpha_out_of_range_ = false;
  std::shared_ptr<const PowerTable> powers_;
};

namespace detail {

/// Split point of a non-base BBMRQ cell.
inline double bias_split(double alpha, double lo, double hi) { return lo + alpha * (hi - lo); }

/// Walks one BBMRQ tree node down. A base cell [0, alpha^n) splits at the
/// table value alpha^(n+1) so that its left child is again a base cell.
struct BiasNode {
  double lo;
  double hi;
  int base_level;
  bool on_base;

  double split(const QuantizerSpec& spec) const {
    return on_base ? spec.alpha_pow(base_level + 1) : bias_split(spec.alpha(), lo, hi);
  }

  void descend(const QuantizerSpec& spec, bool right, PathCode& path) {
    double sp = split(spec);
    if (!(sp > lo && sp < hi)) domain_fail("step below floating-point resolution at this input");
    if (on_base && !right) {
      hi = sp;
      ++base_level;
      path.base_level = base_level;
      return;
    }
    if (right) {
      lo = sp;
    } else {
      hi = sp;
    }
    on_base = false;
    path.bits.push_back(right ? 1 : 0);
  }
};

inline Cell bias_cell_nonnegative(const QuantizerSpec& spec, double s, double x) {
  if (x > 0.0 && x < std::numeric_limits<double>::min()) x = 0.0;
  int start = spec.deepest_level_above(std::max(x, s));
  PathCode path;
  path.base_level = start;
  BiasNode node{0.0, spec.alpha_pow(start), start, true};
  while (!(node.hi - node.lo <= s)) {
    if (node.on_base && node.base_level + 1 > spec.max_level()) domain_fail("step s below the alpha^n table");
    node.descend(spec, !(x < node.split(spec)), path);
  }
  Cell c;
  c.lo = node.lo;
  c.hi = node.hi;
  c.level = centered_level(c.lo, c.hi);
  c.path = std::move(path);
  return c;
}

inline Cell mirror_cell(Cell c) {
  Cell m;
  m.lo = -c.hi;
  m.hi = -c.lo;
  m.level = -c.level;
  m.path = std::move(c.path);
  m.path.sign = Sign::Negative;
  m.left_closed = false;
  return m;
}

inline Cell uniform_cell(double s, double x) {
  double k = std::floor(x / s);
  // x / s can round across an integer; settle on the k with x in [k s, (k+1) s).
  if (x < k * s) k -= 1.0;
  if (x >= (k + 1.0) * s) k += 1.0;
  Cell c;
  c.lo = k * s;
  c.hi = (k + 1.0) * s;
  c.level = centered_level(c.lo, c.hi);
  return c;
}

inline Cell dithered_cell(const QuantizerSpec& spec, double s, double x) {
  int e = floor_log2(s);
  double pair_index = std::floor(std::ldexp(x, -(e + 1)));
  double threshold = 2.0 - std::ldexp(1.0, e + 1) / s;
  double phase = spec.dither() * pair_index;
  phase -= std::floor(phase);
  if (phase < threshold) {
    Cell c = dyadic_cell(pair_index, e + 1);
    c.path = dyadic_path(pair_index, e + 1);
    return c;
  }
  double index = std::floor(std::ldexp(x, -e));
  Cell c = dyadic_cell(index, e);
  c.path = dyadic_path(index, e);
  return c;
}

}  // namespace detail

/// Cell of Q_s containing x, with its reconstruction level and path.
inline Cell cell_of(const QuantizerSpec& spec, double s, double x) {
  detail::check_arguments(s, x);
  switch (spec.scheme()) {
    case Scheme::SimpleUniform:
      return detail::uniform_cell(s, x);
    case Scheme::BMRQ: {
      int e = detail::floor_log2(s);
      double index = std::floor(std::ldexp(x, -e));
      Cell c = detail::dyadic_cell(index, e);
      c.path = detail::dyadic_path(index, e);
      return c;
    }
    case Scheme::DBMRQ:
      return detail::dithered_cell(spec, s, x);
    case Scheme::BBMRQ:
      if (x < 0.0) return detail::mirror_cell(detail::bias_cell_nonnegative(spec, s, -x));
      return detail::bias_cell_nonnegative(spec, s, x);
  }
  throw std::invalid_argument("unknown scheme");
}

inline double quantize(const QuantizerSpec& spec, double s, double x) { return cell_of(spec, s, x).level; }

/// Interval of a BBMRQ path by direct evaluation of the tree recursion:
/// the all-zero prefix is the base cell (0, alpha^n), every further level
/// keeps the left (z = 0) or right (z = 1) part of its parent.
inline std::pair<double, double> tree_interval(const QuantizerSpec& spec, const PathCode& path) {
  if (spec.scheme() != Scheme::BBMRQ) throw std::invalid_argument("tree_interval needs a BBMRQ spec");
  struct Rec {
    const QuantizerSpec& spec;
    const PathCode& path;
    // Interval at depth `depth` bits below the base level.
    std::pair<double, double> at(std::size_t depth) const {
      bool all_zero = std::all_of(path.bits.begin(), path.bits.begin() + static_cast<std::ptrdiff_t>(depth),
                                  [](std::uint8_t b) { return b == 0; });
      if (all_zero) return {0.0, spec.alpha_pow(path.base_level + static_cast<int>(depth))};
      auto [lo, hi] = at(depth - 1);
      bool parent_is_base = std::all_of(path.bits.begin(), path.bits.begin() + static_cast<std::ptrdiff_t>(depth - 1),
                                        [](std::uint8_t b) { return b == 0; });
      double sp = parent_is_base ? spec.alpha_pow(path.base_level + static_cast<int>(depth))
                                 : detail::bias_split(spec.alpha(), lo, hi);
      if (path.bits[depth - 1] == 0) return {lo, sp};
      return {sp, hi};
    }
  };
  for (auto b : path.bits)
    if (b > 1) throw std::invalid_argument("path bits must be 0 or 1");
  auto [lo, hi] = Rec{spec, path}.at(path.bits.size());
  if (path.sign == Sign::Negative) return {-hi, -lo};
  return {lo, hi};
}

inline PathCode encode_path(const QuantizerSpec& spec, double s, double x) {
  if (spec.scheme() == Scheme::SimpleUniform)
    throw std::invalid_argument("the simple uniform quantizer has no quantization tree");
  return cell_of(spec, s, x).path;
}

/// Cell named by a path, found by walking the tree from its base cell.
inline Cell decode_path(const QuantizerSpec& spec, const PathCode& path) {
  switch (spec.scheme()) {
    case Scheme::SimpleUniform:
      throw std::invalid_argument("the simple uniform quantizer has no quantization tree");
    case Scheme::BMRQ:
    case Scheme::DBMRQ:
      return detail::decode_dyadic(path);
    case Scheme::BBMRQ: {
      if (path.base_level < spec.min_level() || path.base_level > spec.max_level())
        throw std::invalid_argument("path base level outside the alpha^n table");
      PathCode walked;
      walked.base_level = path.base_level;
      detail::BiasNode node{0.0, spec.alpha_pow(path.base_level), path.base_level, true};
      for (auto b : path.bits) {
        if (b > 1) throw std::invalid_argument("path bits must be 0 or 1");
        node.descend(spec, b != 0, walked);
      }
      Cell c;
      c.lo = node.lo;
      c.hi = node.hi;
      c.level = detail::centered_level(c.lo, c.hi);
      c.path = path;
      if (path.sign == Sign::Negative) {
        c = detail::mirror_cell(std::move(c));
        c.path = path;
      }
      return c;
    }
  }
  throw std::invalid_argument("unknown scheme");
}

/// Consecutive cells covering [x0, x1); neighbours share endpoints bitwise.
inline std::vector<Cell> enumerate_cells(const QuantizerSpec& spec, double s, double x0, double x1) {
  if (!std::isfinite(x0) || !std::isfinite(x1) || !(x0 < x1)) detail::domain_fail("interval must satisfy x0 < x1");
  constexpr std::size_t kMaxCells = 100'000'000;
  std::vector<Cell> cells;
  double x = x0;
  while (x < x1) {
    Cell c = cell_of(spec, s, x);
    if (c.left_closed) {
      x = c.hi;
    } else {
      x = c.hi == 0.0 ? 0.0 : std::nextafter(c.hi, std::numeric_limits<double>::infinity());
    }
    cells.push_back(std::move(c));
    if (cells.size() > kMaxCells) detail::domain_fail("too many cells in interval");
  }
  return cells;
}

}  // namespace mrq
