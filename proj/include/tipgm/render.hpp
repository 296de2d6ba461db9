#pragma once

#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tipgm/classifier.hpp"

namespace tipgm {

using json = nlohmann::json;

inline std::string root_str(const Int& p, const KvRoot& r, long precision) {
  if (r.exact) return expand(p, r.value, precision).str();
  return r.approx->str();
}

inline std::string theta_param_str(const ModelParams& mp) {
  std::string s = rational_str(mp.theta);
  if (mp.theta_abs_prec)
    s += " + O(" + mp.p.get_str() + "^" + std::to_string(*mp.theta_abs_prec) + ")";
  return s;
}

// Mirror of the report JSON, so that a parsed report re-renders to the same
// document (big counts travel as decimal strings to stay lossless).
struct ReportPerM {
  int m = 0;
  int count = 0;
  std::string rule;
  std::vector<std::string> roots;
  std::string multiplicity;
};

struct ReportData {
  std::string p;
  int q = 0;
  int k = 0;
  std::string theta;
  long precision = default_precision;
  std::vector<ReportPerM> per_m;
  std::string n_ti;
  bool mu0_bounded = false;
  std::vector<std::string> warnings;
};

inline ReportData make_report_data(const TipgmReport& rep, long precision) {
  ReportData d;
  d.p = rep.params.p.get_str();
  d.q = rep.params.q;
  d.k = rep.params.k;
  d.theta = theta_param_str(rep.params);
  d.precision = precision;
  for (const auto& mc : rep.per_m) {
    ReportPerM row;
    row.m = mc.m;
    row.count = mc.count;
    row.rule = mc.rule_fired;
    for (const auto& r : mc.members) row.roots.push_back(root_str(rep.params.p, r, precision));
    row.multiplicity = mc.mult.get_str();
    d.per_m.push_back(std::move(row));
  }
  d.n_ti = rep.n_ti.get_str();
  d.mu0_bounded = rep.mu0_bounded;
  d.warnings = rep.warnings;
  return d;
}

inline json render_report(const ReportData& d) {
  json j;
  j["params"] = {{"p", d.p}, {"q", d.q}, {"k", d.k}, {"theta", d.theta}, {"precision", d.precision}};
  j["per_m"] = json::array();
  for (const auto& row : d.per_m)
    j["per_m"].push_back({{"m", row.m},
                          {"count", row.count},
                          {"rule", row.rule},
                          {"roots", row.roots},
                          {"multiplicity", row.multiplicity}});
  j["n_ti"] = d.n_ti;
  j["mu0_bounded"] = d.mu0_bounded;
  j["warnings"] = d.warnings;
  return j;
}

inline ReportData parse_report(const json& j) {
  ReportData d;
  d.p = j.at("params").at("p").get<std::string>();
  d.q = j.at("params").at("q").get<int>();
  d.k = j.at("params").at("k").get<int>();
  d.theta = j.at("params").at("theta").get<std::string>();
  d.precision = j.at("params").at("precision").get<long>();
  for (const auto& row : j.at("per_m")) {
    ReportPerM r;
    r.m = row.at("m").get<int>();
    r.count = row.at("count").get<int>();
    r.rule = row.at("rule").get<std::string>();
    r.roots = row.at("roots").get<std::vector<std::string>>();
    r.multiplicity = row.at("multiplicity").get<std::string>();
    d.per_m.push_back(std::move(r));
  }
  d.n_ti = j.at("n_ti").get<std::string>();
  d.mu0_bounded = j.at("mu0_bounded").get<bool>();
  d.warnings = j.at("warnings").get<std::vector<std::string>>();
  return d;
}

inline json report_to_json(const TipgmReport& rep, long precision) {
  return render_report(make_report_data(rep, precision));
}

inline std::string report_to_table(const TipgmReport& rep, long precision) {
  ReportData d = make_report_data(rep, precision);
  std::ostringstream os;
  os << "p = " << d.p << "   q = " << d.q << "   k = " << d.k << "   theta = " << d.theta
     << "   precision = " << d.precision << "\n";
  os << "  m  count  multiplicity  rule\n";
  for (const auto& row : d.per_m) {
    os << std::setw(3) << row.m << std::setw(7) << row.count << std::setw(14) << row.multiplicity << "  "
       << row.rule << "\n";
    for (const auto& r : row.roots) os << "       root: " << r << "\n";
  }
  os << "N_TI = " << d.n_ti << "\n";
  os << "mu0 bounded: " << (d.mu0_bounded ? "yes" : "no") << "\n";
  if (d.warnings.empty()) {
    os << "warnings: none\n";
  } else {
    os << "warnings:\n";
    for (const auto& w : d.warnings) os << "  - " << w << "\n";
  }
  return os.str();
}

inline std::string valuation_str(const Valuation& v) {
  return v.is_infinity() ? "infinity" : std::to_string(v.get());
}

inline json fixed_point_to_json(const FixedPointReport& r) {
  json j;
  j["fixed"] = r.is_fixed;
  j["all_in_ep"] = r.all_in_ep;
  j["components"] = json::array();
  for (std::size_t i = 0; i < r.input.size(); ++i)
    j["components"].push_back({{"z", rational_str(r.input[i])},
                               {"image", rational_str(r.image[i])},
                               {"val_z_minus_1", valuation_str(r.val_minus_one[i])},
                               {"in_ep", static_cast<bool>(r.in_ep[i])}});
  return j;
}

inline std::string fixed_point_to_table(const FixedPointReport& r) {
  std::ostringstream os;
  os << (r.is_fixed ? "fixed point: yes" : "fixed point: no") << "\n";
  for (std::size_t i = 0; i < r.input.size(); ++i) {
    os << "  z_" << (i + 1) << " = " << rational_str(r.input[i]) << "  ->  " << rational_str(r.image[i])
       << "   val(z-1) = " << valuation_str(r.val_minus_one[i]) << "   in E_p: " << (r.in_ep[i] ? "yes" : "no")
       << "\n";
  }
  os << "all components in E_p: " << (r.all_in_ep ? "yes" : "no") << "\n";
  return os.str();
}

inline json scan_summary_json(const Rational& theta, const TipgmReport& rep) {
  json j;
  j["theta"] = rational_str(theta);
  j["n_ti"] = rep.n_ti.get_str();
  j["mu0_bounded"] = rep.mu0_bounded;
  j["warnings"] = rep.warnings;
  return j;
}

inline json scan_error_json(const Rational& theta, const std::string& message) {
  json j;
  j["theta"] = rational_str(theta);
  j["error"] = message;
  return j;
}

inline std::string scan_summary_line(const Rational& theta, const TipgmReport& rep) {
  std::ostringstream os;
  os << "theta = " << rational_str(theta) << "   N_TI = " << rep.n_ti.get_str()
     << "   mu0 bounded: " << (rep.mu0_bounded ? "yes" : "no");
  if (!rep.warnings.empty()) os << "   [" << rep.warnings.size() << " warning(s)]";
  return os.str();
}

}  // namespace tipgm
