#include "cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mrq/mrq.hpp"

namespace mrq::cli {
namespace {

using nlohmann::json;

// Anything wrong with a relay config document.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SchemeOptions {
  std::string scheme;
  double alpha = 0.6;
  double dither = std::numbers::phi;
  bool allow_any_alpha = false;

  QuantizerSpec spec() const { return QuantizerSpec::make(parse_scheme(scheme), alpha, dither, allow_any_alpha); }
};

void add_scheme_options(CLI::App* cmd, SchemeOptions& o, bool scheme_required) {
  auto* opt = cmd->add_option("--scheme", o.scheme, "uniform, bmrq, dbmrq or bbmrq");
  if (scheme_required) opt->required();
  cmd->add_option("--alpha", o.alpha, "BBMRQ split proportion")->capture_default_str();
  cmd->add_option("--dither", o.dither, "DBMRQ dither constant")->capture_default_str();
  cmd->add_flag("--allow-any-alpha", o.allow_any_alpha, "accept BBMRQ alpha outside (1/2, 3/4)");
}

void csv_preamble(std::ostream& out, const std::string& command, const std::string& header) {
  out << "# schema=1 command=" << command << '\n' << header << '\n';
}

std::string join(std::initializer_list<std::string> parts) {
  std::string s;
  for (const auto& p : parts) {
    if (!s.empty()) s += ',';
    s += p;
  }
  return s;
}

// quantize ------------------------------------------------------------------

struct QuantizeArgs {
  SchemeOptions scheme;
  double s = 0.0;
  std::vector<double> xs;
  bool trace_path = false;
};

int cmd_quantize(const QuantizeArgs& a, std::ostream& out) {
  QuantizerSpec spec = a.scheme.spec();
  std::vector<Cell> cells;
  std::vector<PathCode> paths;
  for (double x : a.xs) {
    cells.push_back(cell_of(spec, a.s, x));
    if (a.trace_path) paths.push_back(encode_path(spec, a.s, x));
  }
  csv_preamble(out, "quantize", a.trace_path ? "x,s,level,lo,hi,sign,base_level,bits" : "x,s,level,lo,hi");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const Cell& c = cells[i];
    out << join({format_number(a.xs[i]), format_number(a.s), format_number(c.level), format_number(c.lo),
                 format_number(c.hi)});
    if (a.trace_path)
      out << ',' << (paths[i].sign == Sign::Negative ? '-' : '+') << ',' << paths[i].base_level << ','
          << paths[i].bit_string();
    out << '\n';
  }
  return kOk;
}

// cdf -----------------------------------------------------------------------

struct CdfArgs {
  SchemeOptions scheme;
  double s = 0.0;
  double x0 = 0.0;
  double x1 = 0.0;
  bool closed_form = false;
  std::string levy_against;
};

// Closed-form law of Q_s; the BBMRQ law is kept in units of s.
std::variant<StepCdf, ClosedCdf> closed_law(const QuantizerSpec& spec, double s) {
  switch (spec.scheme()) {
    case Scheme::SimpleUniform: return StepCdf::point_mass(s);
    case Scheme::BMRQ: return StepCdf::point_mass(std::ldexp(1.0, detail::floor_log2(s)));
    case Scheme::DBMRQ: return ClosedCdf::dbmrq_atoms(s);
    case Scheme::BBMRQ: return ClosedCdf::bias_alpha(spec.alpha());
  }
  throw std::invalid_argument("unknown scheme");
}

void print_step_rows(const StepCdf& f, std::ostream& out) {
  for (std::size_t i = 0; i < f.size(); ++i)
    out << join({format_number(f.breakpoints()[i]), format_number(f.masses()[i]), format_number(f.cumulative()[i])})
        << '\n';
}

void print_closed_rows(const ClosedCdf& f, double s, std::ostream& out) {
  if (!f.has_continuous_part()) {
    double acc = 0.0;
    for (auto [g, m] : f.atoms())
      out << join({format_number(g), format_number(m), format_number(acc += m)}) << '\n';
    return;
  }
  constexpr int kRows = 256;
  double lo = f.support_lo();
  double hi = f.support_hi();
  for (int i = 0; i <= kRows; ++i) {
    double g = lo + (hi - lo) * i / kRows;
    out << join({format_number(g * s), format_number(0.0), format_number(f(g))}) << '\n';
  }
}

int cmd_cdf(const CdfArgs& a, std::ostream& out) {
  QuantizerSpec spec = a.scheme.spec();
  if (!(a.s > 0.0) || !std::isfinite(a.s)) throw std::domain_error("step s must be positive");
  if (!(a.x1 > a.x0)) throw std::domain_error("interval needs x0 < x1");

  std::variant<StepCdf, ClosedCdf> law;
  if (a.closed_form) {
    law = closed_law(spec, a.s);
  } else {
    law = empirical_cell_cdf(spec, a.s, a.x0, a.x1);
  }
  bool unit_scaled = a.closed_form && spec.scheme() == Scheme::BBMRQ;

  double levy = 0.0;
  if (!a.levy_against.empty()) {
    if (a.levy_against == "dbmrq") {
      if (unit_scaled) throw std::invalid_argument("the closed-form BBMRQ law is only compared in units of s");
      ClosedCdf ref = ClosedCdf::dbmrq_atoms(a.s);
      levy = std::visit([&](const auto& f) { return levy_distance(f, ref); }, law);
    } else if (a.levy_against == "bias" || a.levy_against == "twopow") {
      ClosedCdf ref = a.levy_against == "bias" ? ClosedCdf::bias_alpha(spec.scheme() == Scheme::BBMRQ ? spec.alpha() : a.scheme.alpha)
                                               : ClosedCdf::two_pow_unif();
      levy = std::visit(
          [&](const auto& f) {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, StepCdf>) {
              return levy_distance(f.rescaled(1.0 / a.s), ref);
            } else {
              if (!unit_scaled) throw std::invalid_argument("atom law cannot be rescaled; use the empirical cdf");
              return levy_distance(f, ref);
            }
          },
          law);
    } else {
      throw std::invalid_argument("unknown --levy-against family '" + a.levy_against + "'");
    }
  }

  csv_preamble(out, "cdf", "gamma,mass,cdf");
  if (const auto* step = std::get_if<StepCdf>(&law)) {
    print_step_rows(*step, out);
  } else {
    const auto& closed = std::get<ClosedCdf>(law);
    print_closed_rows(closed, unit_scaled ? a.s : 1.0, out);
  }
  if (!a.levy_against.empty())
    out << "# levy_against=" << a.levy_against << " levy_distance=" << format_number(levy) << '\n';
  return kOk;
}

// tradeoff ------------------------------------------------------------------

struct TradeoffArgs {
  std::vector<std::string> schemes{"bmrq", "dbmrq", "bbmrq"};
  double alpha = 0.501;
  double p = 1.0;
  double xmin = 0.0;
  double xmax = 4.0;
  int points = 401;
};

int cmd_tradeoff(const TradeoffArgs& a, std::ostream& out) {
  if (a.points < 1) throw std::domain_error("--points must be at least 1");
  if (!(a.xmax >= a.xmin)) throw std::domain_error("--xmax must not be below --xmin");
  std::vector<double> grid;
  for (int i = 0; i < a.points; ++i)
    grid.push_back(a.points == 1 ? a.xmin : a.xmin + (a.xmax - a.xmin) * i / (a.points - 1));

  std::vector<std::pair<std::string, TradeoffCurve>> curves;
  for (const auto& name : a.schemes) {
    Scheme scheme = parse_scheme(name);
    curves.emplace_back(std::string(scheme_name(scheme)),
                        tradeoff_curve(QuantizerSpec::make(scheme, a.alpha), a.p, grid));
  }
  csv_preamble(out, "tradeoff", "scheme,x,log_rate,error,s");
  for (const auto& [name, curve] : curves)
    for (const auto& pt : curve.points)
      out << join({name, format_number(pt.budget), format_number(pt.log_rate), format_number(pt.error),
                   format_number(pt.s)})
          << '\n';
  return kOk;
}

// relay ---------------------------------------------------------------------

struct RelayArgs {
  std::string config_path;
  std::vector<double> xs;
  int adversary_budget = -1;
  double p = 1.0;
  std::size_t grid = kDefaultRelayGrid;
};

struct ParsedRelayConfig {
  RelayChainConfig chain;
  std::optional<double> input;
};

ParsedRelayConfig parse_relay_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  ParsedRelayConfig out;
  try {
    json doc = json::parse(in);
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    if (!doc.contains("capacities")) throw ConfigError("config is missing 'capacities'");
    out.chain.capacities = doc.at("capacities").get<std::vector<std::int64_t>>();
    if (doc.contains("domain")) {
      auto d = doc.at("domain").get<std::vector<double>>();
      if (d.size() != 2) throw ConfigError("'domain' must be [lo, hi]");
      out.chain.domain = {d[0], d[1]};
    }
    std::string scheme = doc.value("scheme", std::string("bmrq"));
    double alpha = doc.value("alpha", 0.6);
    double dither = doc.value("dither", std::numbers::phi);
    bool any_alpha = doc.value("allow_any_alpha", false);
    out.chain.spec = QuantizerSpec::make(parse_scheme(scheme), alpha, dither, any_alpha);
    if (doc.contains("policy")) out.chain.policy = parse_policy(doc.at("policy").get<std::string>());
    if (doc.contains("input")) out.input = doc.at("input").get<double>();
    out.chain.validate();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return out;
}

json trace_json(const RelayTrace& t) {
  json j;
  j["input"] = t.input;
  j["outputs"] = t.outputs;
  j["quantized"] = t.quantized;
  j["final_abs_error"] = t.final_abs_error;
  return j;
}

int cmd_relay(const RelayArgs& a, std::ostream& out) {
  ParsedRelayConfig cfg = parse_relay_config(a.config_path);
  RelayChain chain(cfg.chain);
  std::vector<double> xs = a.xs;
  if (xs.empty() && cfg.input) xs.push_back(*cfg.input);

  json doc;
  doc["schema_version"] = 1;
  doc["command"] = "relay";
  doc["scheme"] = std::string(scheme_name(cfg.chain.spec.scheme()));
  doc["policy"] = std::string(policy_name(cfg.chain.policy));
  doc["capacities"] = cfg.chain.capacities;
  doc["domain"] = {cfg.chain.domain.lo, cfg.chain.domain.hi};
  doc["steps"] = chain.steps();
  doc["traces"] = json::array();
  for (double x : xs) doc["traces"].push_back(trace_json(chain.run(x)));
  doc["p"] = a.p;
  doc["grid_size"] = a.grid;
  if (a.adversary_budget >= 0) {
    AdversaryResult r = adversarial_ratio(cfg.chain, a.adversary_budget, a.p, a.grid);
    doc["average_error"] = r.baseline_error;
    doc["adversary"] = {{"budget", a.adversary_budget},
                        {"ratio", r.ratio},
                        {"baseline_error", r.baseline_error},
                        {"worst_error", r.worst_error},
                        {"worst_capacities", r.worst.capacities},
                        {"configs_checked", r.configs_checked}};
  } else {
    doc["average_error"] = chain.average_error(a.p, a.grid);
  }
  out << doc.dump(2) << '\n';
  return kOk;
}

// verify --------------------------------------------------------------------

struct VerifyArgs {
  std::string suite = "all";
  std::uint64_t seed = 42;
};

int cmd_verify(const VerifyArgs& a, std::ostream& out) {
  auto results = run_verify_suite(a.suite, a.seed);
  bool ok = true;
  out << "# schema=1 command=verify suite=" << a.suite << " seed=" << a.seed << '\n'
      << "suite,check,value,limit,status\n";
  for (const auto& r : results) {
    ok = ok && r.pass;
    out << join({r.suite, r.check, format_number(r.value), format_number(r.limit), r.pass ? "PASS" : "FAIL"}) << '\n';
  }
  out << "# result=" << (ok ? "PASS" : "FAIL") << '\n';
  return ok ? kOk : kVerifyFailed;
}

}  // namespace

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-resolution quantizers: quantization, cell-size laws, tradeoff curves and relay chains"};
  app.require_subcommand(1);

  QuantizeArgs qa;
  auto* quant = app.add_subcommand("quantize", "quantize values; CSV x,s,level,lo,hi[,sign,base_level,bits]");
  add_scheme_options(quant, qa.scheme, true);
  quant->add_option("--s", qa.s, "step parameter")->required();
  quant->add_option("--x", qa.xs, "input value(s)")->required();
  quant->add_flag("--trace-path", qa.trace_path, "also print the refinement path");

  CdfArgs ca;
  auto* cdf = app.add_subcommand("cdf", "cell-size cdf over [x0, x1]; CSV gamma,mass,cdf");
  add_scheme_options(cdf, ca.scheme, true);
  cdf->add_option("--s", ca.s, "step parameter")->required();
  cdf->add_option("--x0", ca.x0, "interval start")->capture_default_str();
  cdf->add_option("--x1", ca.x1, "interval end")->required();
  cdf->add_flag("--closed-form", ca.closed_form, "print the closed-form law instead of the empirical one");
  cdf->add_option("--levy-against", ca.levy_against, "bias, twopow or dbmrq")
      ->check(CLI::IsMember({"bias", "twopow", "dbmrq"}));

  TradeoffArgs ta;
  auto* trade = app.add_subcommand("tradeoff", "log-rate vs asymptotic error; CSV scheme,x,log_rate,error,s");
  trade->add_option("--schemes", ta.schemes, "schemes to evaluate")->delimiter(',')->capture_default_str();
  trade->add_option("--alpha", ta.alpha, "BBMRQ split proportion")->capture_default_str();
  trade->add_option("--p", ta.p, "error exponent")->capture_default_str();
  trade->add_option("--xmin", ta.xmin, "smallest log-rate budget")->capture_default_str();
  trade->add_option("--xmax", ta.xmax, "largest log-rate budget")->capture_default_str();
  trade->add_option("--points", ta.points, "grid size")->capture_default_str();

  RelayArgs ra;
  auto* relay = app.add_subcommand("relay", "simulate a relay chain; JSON report");
  relay->add_option("--config", ra.config_path, "JSON chain config")->required();
  relay->add_option("--x", ra.xs, "input value(s) to trace");
  relay->add_option("--adversary-budget", ra.adversary_budget, "search capacity decrements up to this total");
  relay->add_option("--p", ra.p, "error exponent")->capture_default_str();
  relay->add_option("--grid", ra.grid, "grid points for the average error")->capture_default_str();

  VerifyArgs va;
  auto* verify = app.add_subcommand("verify", "run a verification suite; CSV report");
  verify->add_option("--suite", va.suite, "mrq, scale, converse, renewal, thm2 or all")
      ->check(CLI::IsMember({"mrq", "scale", "converse", "renewal", "thm2", "all"}))
      ->capture_default_str();
  verify->add_option("--seed", va.seed, "random seed")->envname("MRQ_SEED")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (quant->parsed()) return cmd_quantize(qa, out);
    if (cdf->parsed()) return cmd_cdf(ca, out);
    if (trade->parsed()) return cmd_tradeoff(ta, out);
    if (relay->parsed()) return cmd_relay(ra, out);
    if (verify->parsed()) return cmd_verify(va, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDomainError;
  }
  err << "error: no command given\n";
  return kUsage;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"mrq_cli"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace mrq::cli
