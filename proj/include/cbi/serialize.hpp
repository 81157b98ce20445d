#pragma once

#include <charconv>
#include <fstream>
#include <string>

#include <json.hpp>

#include "cbi/density.hpp"
#include "cbi/errors.hpp"
#include "cbi/params.hpp"
#include "cbi/sim.hpp"
#include "cbi/smoothing.hpp"
#include "cbi/version.hpp"

namespace cbi {

using nlohmann::json;

// Shortest round-trip decimal representation; '.' separator, locale-free.
inline std::string format_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline json to_json(const ValidationReport& r) {
  json j;
  j["ok"] = r.ok;
  j["violations"] = json::array();
  for (const auto& v : r.violations)
    j["violations"].push_back(
        {{"condition", v.condition}, {"message", v.message}, {"value", v.offending_value}});
  j["integrals"] = json::object();
  for (const auto& [k, v] : r.integrals) j["integrals"][k] = v;
  return j;
}

inline json to_json(const SmoothingCertificate& c) {
  json j;
  json I = json::array();
  for (int i : c.I) I.push_back(i + 1);  // 1-based in reports
  j["I"] = I;
  j["alpha"] = c.alpha;
  j["source"] = to_string(c.source);
  j["symbol_checks"] = json::array();
  for (const auto& s : c.symbol_checks)
    j["symbol_checks"].push_back({{"label", s.label},
                                  {"target_exponent", s.target_exponent},
                                  {"fitted_exponent", s.fitted_exponent},
                                  {"c_lower", s.c_lower},
                                  {"c_upper", s.c_upper},
                                  {"pass", s.pass}});
  return j;
}

inline json to_json(const TheoremReport& r) {
  json j;
  j["theorem"] = to_string(r.theorem);
  j["hypotheses"] = json::array();
  for (const auto& h : r.hypotheses)
    j["hypotheses"].push_back(
        {{"name", h.name}, {"required", h.required}, {"actual", h.actual}, {"pass", h.pass}});
  j["overall"] = r.overall;
  j["gamma0"] = r.gamma0;
  j["tau"] = r.tau;
  if (!r.gamma0_per_coordinate.empty()) j["gamma0_per_coordinate"] = r.gamma0_per_coordinate;
  if (!r.tau_per_coordinate.empty()) j["tau_per_coordinate"] = r.tau_per_coordinate;
  j["certificate"] = to_json(r.certificate);
  j["boundary_nonatomic_flag"] = r.boundary_nonatomic_flag;
  return j;
}

inline json to_json(const BesovReport& r) {
  json j;
  j["lambda"] = r.lambda;
  j["a"] = r.a.a;
  j["mean_alpha"] = r.a.mean_alpha;
  j["l1_norm"] = r.l1_norm;
  j["h"] = r.h_values;
  j["modulus"] = r.modulus;
  j["norm_value"] = r.norm_value;
  j["stabilized"] = r.stabilized;
  return j;
}

inline json to_json(const BiasReport& r) {
  return json{{"immigration_small_drift", r.immigration_small_drift},
              {"immigration_residual", r.immigration_residual},
              {"branching_l2_proxy", r.branching_l2_proxy}};
}

// ---------------------------------------------------------------------------
// CSV writers ('.' decimal separator, header row, newline-terminated rows)
// ---------------------------------------------------------------------------

inline void write_terminal_csv(std::ostream& os, const PathEnsemble& ens) {
  os << "path";
  for (int k = 0; k < ens.dim; ++k) os << ",x_" << (k + 1);
  os << ",weight\n";
  for (std::size_t i = 0; i < ens.terminal.size(); ++i) {
    os << i;
    for (double v : ens.terminal[i]) os << ',' << format_double(v);
    os << ',' << format_double(ens.weights[i]) << '\n';
  }
}

inline void write_skeleton_csv(std::ostream& os, const PathEnsemble& ens) {
  os << "time,path";
  for (int k = 0; k < ens.dim; ++k) os << ",x_" << (k + 1);
  os << '\n';
  for (std::size_t f = 0; f < ens.skeleton_times.size(); ++f) {
    for (std::size_t i = 0; i < ens.skeleton.size(); ++i) {
      os << format_double(ens.skeleton_times[f]) << ',' << i;
      for (double v : ens.skeleton[i][f]) os << ',' << format_double(v);
      os << '\n';
    }
  }
}

inline void write_density_csv(std::ostream& os, const DensityEstimate& est) {
  const int d = est.dim();
  for (int k = 0; k < d; ++k) os << "x_" << (k + 1) << ',';
  os << "value\n";
  std::vector<std::size_t> idx(static_cast<std::size_t>(d), 0);
  for (std::size_t flat = 0; flat < est.values.size(); ++flat) {
    for (int k = 0; k < d; ++k)
      os << format_double(est.axes[static_cast<std::size_t>(k)][idx[static_cast<std::size_t>(k)]])
         << ',';
    os << format_double(est.values[flat]) << '\n';
    for (int k = d - 1; k >= 0; --k) {
      if (++idx[static_cast<std::size_t>(k)] < est.axes[static_cast<std::size_t>(k)].size()) break;
      idx[static_cast<std::size_t>(k)] = 0;
    }
  }
}

}  // namespace cbi
