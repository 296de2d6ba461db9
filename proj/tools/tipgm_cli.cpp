// Command-line surface: classification reports, fixed-point verification,
// batch scans with an optional rules-vs-direct cross-check, and single p-adic
// computations. Data goes to stdout, diagnostics to stderr.
//
// Exit codes (stable contract):
//   0  success (verify: fixed point with all components in E_p)
//   1  generic error (bad arguments, non-fixed point, failed scan points)
//   2  domain violation (invalid prime, value outside the required domain)
//   3  precision exhausted (truncated input cannot decide the question)
//   4  rules-vs-direct disagreement (classification or cross-check)
//   5  pole at input
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tipgm/oracle.hpp"
#include "tipgm/render.hpp"

namespace {

using namespace tipgm;

struct RunConfig {
  long precision = default_precision;
  std::string format = "table";  // "table" | "json"
  bool allow_out_of_domain = false;
  unsigned threads = 0;  // 0 = auto
  std::optional<std::string> out_path;
};

long resolve_precision(const std::optional<long>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("TIPGM_PRECISION")) {
    try {
      return std::stol(env);
    } catch (const std::exception&) {
      throw error("TIPGM_PRECISION is not an integer: " + std::string(env));
    }
  }
  return default_precision;
}

// The >= 8 floor protects the classification working precision; single
// p-adic computations may ask for any positive number of digits.
void validate(const RunConfig& cfg, bool single_computation) {
  long floor = single_computation ? 1 : 8;
  if (cfg.precision < floor)
    throw error("precision must be >= " + std::to_string(floor) + ", got " +
                std::to_string(cfg.precision));
  if (cfg.format != "table" && cfg.format != "json")
    throw error("format must be 'table' or 'json', got '" + cfg.format + "'");
}

void write_out(const RunConfig& cfg, const json& j) {
  if (!cfg.out_path) return;
  std::ofstream f(*cfg.out_path);
  if (!f) throw error("cannot open output file: " + *cfg.out_path);
  f << j.dump(2) << "\n";
}

void emit(const RunConfig& cfg, const json& j, const std::string& table) {
  if (cfg.format == "json")
    std::cout << j.dump(2) << "\n";
  else
    std::cout << table;
  write_out(cfg, j);
}

std::vector<Rational> parse_rational_list(const std::string& csv) {
  std::vector<Rational> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_rational(item));
  if (csv.empty()) return out;
  return out;
}

std::vector<long> parse_long_list(const std::string& csv) {
  std::vector<long> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stol(item));
  return out;
}

ClassifyMethod parse_method(const std::string& s) {
  if (s == "rules") return ClassifyMethod::rules;
  if (s == "direct") return ClassifyMethod::direct;
  if (s == "both") return ClassifyMethod::both;
  throw error("method must be rules, direct or both, got '" + s + "'");
}

int cmd_classify(const std::string& p_str, int q, const std::string& theta_str,
                 const std::optional<std::string>& coupling_str,
                 const std::optional<std::string>& method_str, const RunConfig& cfg) {
  Int p(p_str);
  Rational theta;
  std::optional<long> theta_prec;
  if (coupling_str) {
    // theta = exp(J): known only to the working absolute precision, so every
    // classification decision must be reachable within that many digits.
    Rational J = parse_rational(*coupling_str);
    Expansion t = exp_p(p, J, cfg.precision);
    theta = t.representative();
    theta_prec = t.abs_precision();
  } else {
    theta = parse_rational(theta_str);
  }
  // With a truncated theta the direct solver cannot run; default to rules.
  ClassifyMethod method = method_str ? parse_method(*method_str)
                                     : (coupling_str ? ClassifyMethod::rules : ClassifyMethod::both);
  auto mp = ModelParams::make(p, q, 2, theta, cfg.allow_out_of_domain, theta_prec);
  auto rep = count_tipgm(mp, method, cfg.precision);
  emit(cfg, report_to_json(rep, cfg.precision), report_to_table(rep, cfg.precision));
  return 0;
}

int cmd_verify(const std::string& p_str, int q, int k, const std::string& theta_str,
               const std::string& z_csv, const RunConfig& cfg) {
  Int p(p_str);
  Rational theta = parse_rational(theta_str);
  std::vector<Rational> z = parse_rational_list(z_csv);
  if (static_cast<int>(z.size()) != q - 1)
    throw error("--z needs exactly q-1 = " + std::to_string(q - 1) + " entries, got " +
                std::to_string(z.size()));
  auto mp = ModelParams::make(p, q, k, theta, cfg.allow_out_of_domain);
  auto rep = verify_fixed_point(mp, z);
  emit(cfg, fixed_point_to_json(rep), fixed_point_to_table(rep));
  return (rep.is_fixed && rep.all_in_ep) ? 0 : 1;
}

int cmd_scan(const std::string& p_str, int q, const std::string& theta_csv,
             const std::string& vals_csv, const std::string& units_csv, bool do_crosscheck,
             bool use_default_grid, const RunConfig& cfg) {
  if (do_crosscheck || use_default_grid) {
    auto rep = crosscheck(default_grid(), cfg.precision, cfg.threads);
    json j;
    j["points_checked"] = static_cast<long>(rep.points_checked);
    j["mismatches"] = json::array();
    std::ostringstream table;
    table << "checked " << rep.points_checked << " grid points\n";
    for (const auto& mm : rep.mismatches) {
      json e;
      e["p"] = mm.at.p.get_str();
      e["q"] = mm.at.q;
      e["theta"] = rational_str(mm.at.theta);
      e["m"] = mm.at.m;
      e["rules_count"] = mm.rules_count;
      e["direct_count"] = mm.direct_count;
      e["evidence"] = mm.evidence;
      j["mismatches"].push_back(e);
      table << "mismatch at p=" << mm.at.p.get_str() << " q=" << mm.at.q
            << " theta=" << rational_str(mm.at.theta) << " m=" << mm.at.m << ": " << mm.evidence
            << "\n";
    }
    if (rep.mismatches.empty()) table << "rules and direct solving agree everywhere\n";
    emit(cfg, j, table.str());
    return rep.mismatches.empty() ? 0 : 4;
  }

  Int p(p_str);
  std::vector<Rational> thetas;
  if (!theta_csv.empty()) {
    thetas = parse_rational_list(theta_csv);
  } else if (!vals_csv.empty() && !units_csv.empty()) {
    for (long v : parse_long_list(vals_csv)) {
      if (v < ep_threshold(p))
        throw outside_domain("valuation " + std::to_string(v) + " is below the E_" + p.get_str() +
                             " threshold " + std::to_string(ep_threshold(p)));
      for (long u : parse_long_list(units_csv))
        thetas.push_back(Rational(1) + Rational(u) * Rational(pow_int(p, static_cast<unsigned long>(v))));
    }
  }
  // One pure computation per theta; results are buffered and emitted in the
  // input order, so the output never depends on the thread count.
  struct PointResult {
    json j;
    std::string line;
    bool failed = false;
  };
  auto results = parallel_map(thetas.size(), cfg.threads, [&](std::size_t i) {
    PointResult r;
    const Rational& theta = thetas[i];
    try {
      auto mp = ModelParams::make(p, q, 2, theta, cfg.allow_out_of_domain);
      auto rep = count_tipgm(mp, ClassifyMethod::both, cfg.precision);
      r.j = scan_summary_json(theta, rep);
      r.line = scan_summary_line(theta, rep);
    } catch (const std::exception& e) {
      r.failed = true;
      r.j = scan_error_json(theta, e.what());
      r.line = "theta = " + rational_str(theta) + "   error: " + e.what();
    }
    return r;
  });
  json arr = json::array();
  std::ostringstream table;
  bool any_failed = false;
  for (const auto& r : results) {
    arr.push_back(r.j);
    table << r.line << "\n";
    any_failed = any_failed || r.failed;
  }
  if (thetas.empty()) {
    if (cfg.format == "json") std::cout << arr.dump(2) << "\n";
    write_out(cfg, arr);
    return 0;
  }
  emit(cfg, arr, table.str());
  return any_failed ? 1 : 0;
}

int cmd_padic(const std::string& what, const std::string& p_str, const std::string& value_str,
              const RunConfig& cfg) {
  Int p(p_str);
  Rational a = parse_rational(value_str);
  if (what == "norm") {
    std::cout << norm_str(p, norm(p, a)) << "\n";
  } else if (what == "expand") {
    std::cout << expand(p, a, cfg.precision).str() << "\n";
  } else if (what == "sqrt") {
    std::cout << padic_sqrt(p, a, cfg.precision).str() << "\n";
  } else if (what == "exp") {
    std::cout << exp_p(p, a, cfg.precision).str_compact() << "\n";
  } else if (what == "log") {
    std::cout << log_p(p, a, cfg.precision).str_compact() << "\n";
  } else {
    throw error("unknown padic subcommand: " + what);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"exact p-adic arithmetic and translation-invariant Gibbs-measure classification"};
  app.require_subcommand(1);

  std::string p_str, theta_str, z_csv, theta_csv, vals_csv, units_csv, value_str, format;
  std::optional<std::string> coupling_str, method_str, out_path;
  std::optional<long> precision_flag;
  int q = 2, k = 2;
  unsigned threads = 0;
  bool allow_ood = false, do_crosscheck = false, use_default_grid = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--precision", precision_flag,
                    "working precision in digits (>= 8; env TIPGM_PRECISION supplies the default)");
    sub->add_option("--format", format, "output format: table or json")->default_val("table");
    sub->add_option("--out", out_path, "also write the JSON report to this file");
    sub->add_flag("--allow-out-of-domain", allow_ood, "accept theta outside E_p");
  };

  auto* classify = app.add_subcommand("classify", "count translation-invariant Gibbs classes");
  classify->add_option("-p", p_str, "prime")->required();
  classify->add_option("-q", q, "number of spin states")->required();
  classify->add_option("--theta", theta_str, "exact rational theta");
  classify->add_option("--J", coupling_str,
                       "coupling constant; theta = exp(J) held at working precision");
  classify->add_option("--method", method_str, "rules, direct or both");
  add_common(classify);

  auto* verify = app.add_subcommand("verify", "check a supplied boundary-field fixed point");
  verify->add_option("-p", p_str, "prime")->required();
  verify->add_option("-q", q, "number of spin states")->required();
  verify->add_option("-k", k, "tree order")->default_val(2);
  verify->add_option("--theta", theta_str, "exact rational theta")->required();
  verify->add_option("--z", z_csv, "comma-separated q-1 rational components")->required();
  add_common(verify);

  auto* scan = app.add_subcommand("scan", "classify across a theta grid");
  scan->add_option("-p", p_str, "prime");
  scan->add_option("-q", q, "number of spin states");
  scan->add_option("--theta-list", theta_csv, "comma-separated thetas");
  scan->add_option("--theta-valuations", vals_csv, "valuations v for theta = 1 + u*p^v");
  scan->add_option("--theta-units", units_csv, "unit multipliers u for theta = 1 + u*p^v");
  scan->add_flag("--crosscheck", do_crosscheck, "run the rules-vs-direct cross-check grid");
  scan->add_flag("--default-grid", use_default_grid, "use the built-in cross-check grid");
  scan->add_option("--threads", threads, "worker count (0 = auto)");
  add_common(scan);

  auto* padic = app.add_subcommand("padic", "single p-adic computations");
  padic->require_subcommand(1);
  for (const char* name : {"norm", "expand", "sqrt", "exp", "log"}) {
    auto* sub = padic->add_subcommand(name);
    sub->add_option("-p", p_str, "prime")->required();
    sub->add_option("value", value_str, "rational argument")->required();
    add_common(sub);
  }

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig cfg;
    cfg.precision = resolve_precision(precision_flag);
    cfg.format = format;
    cfg.allow_out_of_domain = allow_ood;
    cfg.threads = threads;
    cfg.out_path = out_path;
    validate(cfg, padic->parsed());

    if (classify->parsed()) {
      if (theta_str.empty() && !coupling_str)
        throw error("classify needs --theta or --J");
      if (!theta_str.empty() && coupling_str)
        throw error("--theta and --J are mutually exclusive");
      return cmd_classify(p_str, q, theta_str, coupling_str, method_str, cfg);
    }
    if (verify->parsed()) return cmd_verify(p_str, q, k, theta_str, z_csv, cfg);
    if (scan->parsed()) {
      if (!do_crosscheck && !use_default_grid && p_str.empty())
        throw error("scan needs -p with a theta grid, or --crosscheck");
      return cmd_scan(p_str, q, theta_csv, vals_csv, units_csv, do_crosscheck, use_default_grid, cfg);
    }
    if (padic->parsed()) {
      for (auto* sub : padic->get_subcommands())
        return cmd_padic(sub->get_name(), p_str, value_str, cfg);
    }
    throw error("no subcommand selected");
  } catch (const rule_direct_mismatch& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const pole_at_input& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 5;
  } catch (const precision_exhausted& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const outside_domain& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const invalid_prime& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
