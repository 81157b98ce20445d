#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cbi/density.hpp"
#include "cbi/errors.hpp"
#include "cbi/oracle.hpp"
#include "cbi/params.hpp"
#include "cbi/serialize.hpp"
#include "cbi/sim.hpp"
#include "cbi/smoothing.hpp"
#include "cbi/stats.hpp"
#include "cbi/version.hpp"

namespace cbi {

// Coordinates in config files are 1-based; everything internal is 0-based.

namespace config_detail {

using nlohmann::json;

[[noreturn]] inline void fail(const std::string& path, const std::string& what) {
  throw ConfigParseError("config field '" + path + "': " + what);
}

inline const json& need(const json& j, const std::string& key, const std::string& path) {
  if (!j.contains(key)) fail(path + "." + key, "missing");
  return j.at(key);
}

inline double need_num(const json& j, const std::string& key, const std::string& path) {
  const json& v = need(j, key, path);
  if (!v.is_number()) fail(path + "." + key, "expected a number");
  return v.get<double>();
}

inline Vec need_vec(const json& j, const std::string& key, const std::string& path) {
  const json& v = need(j, key, path);
  if (!v.is_array()) fail(path + "." + key, "expected an array");
  Vec out;
  for (const auto& e : v) {
    if (!e.is_number()) fail(path + "." + key, "expected an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

inline LevyMeasureSpec parse_measure(const json& j, int dim, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object with a 'type' tag");
  const std::string type = need(j, "type", path).get<std::string>();
  if (type == "zero") return LevyMeasureSpec{ZeroMeasure{}};
  if (type == "per_coordinate_stable") {
    PerCoordinateStable s;
    s.coordinate = static_cast<int>(need_num(j, "coordinate", path)) - 1;
    s.alpha = need_num(j, "alpha", path);
    s.truncated = j.value("truncated", true);
    if (s.coordinate < 0 || s.coordinate >= dim) fail(path + ".coordinate", "outside 1..d");
    return LevyMeasureSpec{s};
  }
  if (type == "stable_cone") {
    TruncatedStableCone s;
    s.alpha = need_num(j, "alpha", path);
    return LevyMeasureSpec{s};
  }
  if (type == "finite_atoms") {
    FiniteAtoms s;
    const json& atoms = need(j, "atoms", path);
    if (!atoms.is_array()) fail(path + ".atoms", "expected an array");
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      const std::string ap = path + ".atoms[" + std::to_string(i) + "]";
      FiniteAtoms::Atom a;
      a.mass = need_num(atoms[i], "mass", ap);
      a.z = need_vec(atoms[i], "z", ap);
      if (a.z.size() != static_cast<std::size_t>(dim)) fail(ap + ".z", "wrong dimension");
      s.atoms.push_back(std::move(a));
    }
    return LevyMeasureSpec{s};
  }
  if (type == "compound_poisson") {
    CompoundPoisson s;
    s.rate = need_num(j, "rate", path);
    const json& law = need(j, "law", path);
    const std::string lt = need(law, "type", path + ".law").get<std::string>();
    const int coord = static_cast<int>(need_num(law, "coordinate", path + ".law")) - 1;
    if (coord < 0 || coord >= dim) fail(path + ".law.coordinate", "outside 1..d");
    if (lt == "axis_exponential") {
      s.law = AxisExponential{coord, need_num(law, "mean", path + ".law")};
    } else if (lt == "axis_uniform") {
      s.law = AxisUniform{coord, need_num(law, "lo", path + ".law"),
                          need_num(law, "hi", path + ".law")};
    } else {
      fail(path + ".law.type", "unknown jump law '" + lt + "'");
    }
    return LevyMeasureSpec{s};
  }
  if (type == "sum") {
    const json& terms = need(j, "terms", path);
    if (!terms.is_array()) fail(path + ".terms", "expected an array");
    std::vector<LevyMeasureSpec> parts;
    for (std::size_t i = 0; i < terms.size(); ++i)
      parts.push_back(parse_measure(terms[i], dim, path + ".terms[" + std::to_string(i) + "]"));
    return sum_of(std::move(parts));
  }
  fail(path + ".type", "unknown measure type '" + type + "'");
}

}  // namespace config_detail

struct ExperimentConfig {
  AdmissibleParams params;
  // sim block
  double t = 1.0;
  Vec x0;
  SchemeConfig scheme;
  // analysis block
  bool auto_I = true;
  std::vector<int> I;         // 0-based when explicit
  Vec analysis_alpha;         // required when I is explicit
  Vec lambdas = {0.05, 0.1, 0.2};
  int h_grid_depth = 10;
  Vec bandwidth_override;
  int grid_cells = 0;
  // checks block
  TheoremId theorem = TheoremId::T22;
  std::optional<double> gamma0;
  std::optional<double> tau;
  bool initial_moment_attested = true;
  // oracle block
  Vec oracle_lambdas = {0.5, 1.0, 2.0};

  nlohmann::json raw;
};

inline ExperimentConfig parse_config(const nlohmann::json& j) {
  using namespace config_detail;
  ExperimentConfig cfg;
  cfg.raw = j;

  const json& pj = need(j, "params", "");
  AdmissibleParams& p = cfg.params;
  p.c = need_vec(pj, "c", "params");
  p.beta = need_vec(pj, "beta", "params");
  const int d = static_cast<int>(p.c.size());
  if (p.beta.size() != static_cast<std::size_t>(d)) fail("params.beta", "size differs from c");
  const json& bj = need(pj, "B", "params");
  if (!bj.is_array() || bj.size() != static_cast<std::size_t>(d)) fail("params.B", "need d rows");
  p.B = Mat(static_cast<std::size_t>(d), static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    if (!bj[static_cast<std::size_t>(i)].is_array() ||
        bj[static_cast<std::size_t>(i)].size() != static_cast<std::size_t>(d))
      fail("params.B", "need d columns per row");
    for (int k = 0; k < d; ++k)
      p.B(static_cast<std::size_t>(i), static_cast<std::size_t>(k)) =
          bj[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)].get<double>();
  }
  p.nu = parse_measure(need(pj, "nu", "params"), d, "params.nu");
  const json& muj = need(pj, "mu", "params");
  if (!muj.is_array() || muj.size() != static_cast<std::size_t>(d))
    fail("params.mu", "need one measure per coordinate");
  for (int i = 0; i < d; ++i)
    p.mu.push_back(
        parse_measure(muj[static_cast<std::size_t>(i)], d, "params.mu[" + std::to_string(i) + "]"));

  if (j.contains("sim")) {
    const json& sj = j.at("sim");
    cfg.t = sj.value("t", 1.0);
    cfg.scheme.dt = sj.value("dt", 1e-3);
    cfg.scheme.delta = sj.value("delta", 0.05);
    cfg.scheme.n_paths = sj.value("n_paths", std::int64_t{10000});
    cfg.scheme.seed = sj.value("seed", std::uint64_t{1});
    cfg.scheme.record_skeleton = sj.value("record_skeleton", false);
    cfg.scheme.skeleton_stride = sj.value("skeleton_stride", 1);
    if (sj.contains("x0")) cfg.x0 = need_vec(sj, "x0", "sim");
    if (!(cfg.t > 0.0)) fail("sim.t", "must be positive");
    if (!(cfg.scheme.dt > 0.0)) fail("sim.dt", "must be positive");
    if (cfg.scheme.n_paths <= 0) fail("sim.n_paths", "must be positive");
  }
  if (cfg.x0.empty()) cfg.x0.assign(static_cast<std::size_t>(d), 0.0);
  if (cfg.x0.size() != static_cast<std::size_t>(d)) fail("sim.x0", "wrong dimension");

  if (j.contains("analysis")) {
    const json& aj = j.at("analysis");
    if (aj.contains("I")) {
      if (aj.at("I").is_string()) {
        if (aj.at("I").get<std::string>() != "auto") fail("analysis.I", "expected 'auto' or list");
        cfg.auto_I = true;
      } else {
        cfg.auto_I = false;
        for (const auto& e : aj.at("I")) {
          const int idx = e.get<int>() - 1;
          if (idx < 0 || idx >= d) fail("analysis.I", "index outside 1..d");
          cfg.I.push_back(idx);
        }
        cfg.analysis_alpha = need_vec(aj, "alpha", "analysis");
        if (cfg.analysis_alpha.size() != static_cast<std::size_t>(d))
          fail("analysis.alpha", "wrong dimension");
      }
    }
    if (aj.contains("lambda")) cfg.lambdas = need_vec(aj, "lambda", "analysis");
    cfg.h_grid_depth = aj.value("h_grid_depth", 10);
    if (aj.contains("bandwidth")) cfg.bandwidth_override = need_vec(aj, "bandwidth", "analysis");
    cfg.grid_cells = aj.value("grid_cells", 0);
  }

  if (j.contains("checks")) {
    const json& cj = j.at("checks");
    const std::string th = cj.value("theorem", std::string("T22"));
    if (th == "T22")
      cfg.theorem = TheoremId::T22;
    else if (th == "T25")
      cfg.theorem = TheoremId::T25;
    else if (th == "T28")
      cfg.theorem = TheoremId::T28;
    else
      fail("checks.theorem", "expected T22, T25 or T28");
    if (cj.contains("gamma0") && cj.at("gamma0").is_number())
      cfg.gamma0 = cj.at("gamma0").get<double>();
    if (cj.contains("tau") && cj.at("tau").is_number()) cfg.tau = cj.at("tau").get<double>();
    cfg.initial_moment_attested = cj.value("initial_moment_attested", true);
  }

  if (j.contains("oracle") && j.at("oracle").contains("lambda"))
    cfg.oracle_lambdas = config_detail::need_vec(j.at("oracle"), "lambda", "oracle");

  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigParseError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigParseError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

// ---------------------------------------------------------------------------
// Subcommand runner
// ---------------------------------------------------------------------------

struct RunOptions {
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed_override;
  std::optional<std::int64_t> paths_override;
  bool quiet = false;
};

namespace run_detail {

inline void apply_overrides(ExperimentConfig& cfg, const RunOptions& opt) {
  if (opt.seed_override) cfg.scheme.seed = *opt.seed_override;
  if (opt.paths_override) cfg.scheme.n_paths = *opt.paths_override;
}

inline nlohmann::json report_envelope(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["version"] = kVersion;
  nlohmann::json resolved = cfg.raw;
  resolved["sim"]["seed"] = cfg.scheme.seed;
  resolved["sim"]["n_paths"] = cfg.scheme.n_paths;
  j["config"] = resolved;
  return j;
}

inline void write_file(const std::string& dir, const std::string& name,
                       const std::string& content) {
  std::filesystem::create_directories(dir);
  std::ofstream os(dir + "/" + name, std::ios::binary);
  if (!os) throw Error("cannot write " + dir + "/" + name);
  os << content;
}

inline void write_json(const std::string& dir, const std::string& name,
                       const nlohmann::json& j) {
  write_file(dir, name, j.dump(2) + "\n");
}

}  // namespace run_detail

// Runs one subcommand against a parsed config. Exit code contract: 0 on
// success, 2 when the requested check does not hold (inadmissible parameters,
// no certificate, failed theorem hypotheses, |z| > 3 in oracle-compare),
// 1 on error (thrown from here, mapped by the CLI).
inline int run_subcommand(const std::string& cmd, ExperimentConfig cfg, const RunOptions& opt) {
  using nlohmann::json;
  run_detail::apply_overrides(cfg, opt);
  const auto log = [&](const std::string& line) {
    if (!opt.quiet) std::cout << line << "\n";
  };

  if (cmd == "validate") {
    const ValidationReport rep = validate(cfg.params);
    json j = run_detail::report_envelope(cfg);
    j["report"] = to_json(rep);
    run_detail::write_json(opt.out_dir, "validate.json", j);
    log(std::string("validate: ") + (rep.ok ? "ok" : "violations found"));
    return rep.ok ? 0 : 2;
  }

  if (cmd == "certify") {
    const ValidationReport vrep = validate(cfg.params);
    if (!vrep.ok) throw InvalidParams("certify: parameters are not admissible");
    const auto cert = certify(cfg.params);
    json j = run_detail::report_envelope(cfg);
    j["certificate"] = cert ? to_json(*cert) : json(nullptr);
    run_detail::write_json(opt.out_dir, "certificate.json", j);
    log(std::string("certify: ") + (cert ? to_string(cert->source) : "no certificate"));
    return cert ? 0 : 2;
  }

  if (cmd == "check") {
    const ValidationReport vrep = validate(cfg.params);
    if (!vrep.ok) throw InvalidParams("check: parameters are not admissible");
    std::optional<SmoothingCertificate> cert;
    if (cfg.auto_I) {
      cert = certify(cfg.params);
    } else {
      SmoothingCertificate c;
      c.source = CertificateSource::UserAsserted;
      c.I = cfg.I;
      c.alpha = cfg.analysis_alpha;
      cert = c;
    }
    MomentInputs in;
    in.gamma0 = cfg.gamma0;
    in.tau = cfg.tau;
    in.initial_moment_attested = cfg.initial_moment_attested;
    const TheoremReport rep = check_theorem(cfg.params, cert, cfg.theorem, in);
    json j = run_detail::report_envelope(cfg);
    j["report"] = to_json(rep);
    run_detail::write_json(opt.out_dir, "check.json", j);
    log(std::string("check ") + to_string(cfg.theorem) + ": " +
        (rep.overall ? "pass" : "fail"));
    return rep.overall ? 0 : 2;
  }

  if (cmd == "simulate") {
    const PathEnsemble ens = simulate(cfg.params, cfg.x0, cfg.t, cfg.scheme);
    std::ostringstream terminal;
    write_terminal_csv(terminal, ens);
    run_detail::write_file(opt.out_dir, "terminal.csv", terminal.str());
    if (cfg.scheme.record_skeleton) {
      std::ostringstream skel;
      write_skeleton_csv(skel, ens);
      run_detail::write_file(opt.out_dir, "skeleton.csv", skel.str());
    }
    json j = run_detail::report_envelope(cfg);
    j["bias_report"] = to_json(ens.bias);
    run_detail::write_json(opt.out_dir, "bias.json", j);
    log("simulate: " + std::to_string(ens.terminal.size()) + " paths");
    return 0;
  }

  if (cmd == "density") {
    const PathEnsemble ens = simulate(cfg.params, cfg.x0, cfg.t, cfg.scheme);
    std::vector<int> I = cfg.I;
    Vec alpha = cfg.analysis_alpha;
    std::string cert_note = "user";
    if (cfg.auto_I) {
      const auto cert = certify(cfg.params);
      if (!cert)
        throw MissingCertificate("density: analysis.I is 'auto' but no certificate was found");
      I = cert->I;
      alpha = cert->alpha;
      cert_note = to_string(cert->source);
    }
    Vec weights(ens.terminal.size());
    for (std::size_t i = 0; i < ens.terminal.size(); ++i)
      weights[i] = rho(I, alpha, ens.terminal[i]);
    const DensityEstimate est =
        weighted_kde(ens.terminal, weights, cfg.bandwidth_override, cfg.grid_cells);
    std::ostringstream dens;
    write_density_csv(dens, est);
    run_detail::write_file(opt.out_dir, "density.csv", dens.str());

    // effective dyadic depth is limited by the grid spacing
    double coarsest = 0.0;
    for (double s : est.spacing) coarsest = std::max(coarsest, s);
    const int max_depth = static_cast<int>(std::floor(-std::log2(coarsest)));
    const int depth = std::min(cfg.h_grid_depth, max_depth);
    const Vec h_grid = dyadic_h_grid(depth);

    const Anisotropy an = anisotropy_from_alphas(alpha);
    json j = run_detail::report_envelope(cfg);
    j["certificate_source"] = cert_note;
    j["I"] = [&] {
      json arr = json::array();
      for (int i : I) arr.push_back(i + 1);
      return arr;
    }();
    j["alpha"] = alpha;
    j["kde"] = {{"bandwidths", est.bandwidths},
                {"total_mass", est.total_mass},
                {"mean_weight", [&] {
                   double s = 0.0;
                   for (double w : weights) s += w;
                   return s / static_cast<double>(weights.size());
                 }()}};
    j["besov"] = json::array();
    for (const double lam : cfg.lambdas) {
      const BesovReport rep = besov_norm(est, lam, an, h_grid);
      j["besov"].push_back(to_json(rep));
      log("besov lambda=" + format_double(lam) + ": norm=" + format_double(rep.norm_value) +
          (rep.stabilized ? " (stabilized)" : " (growing)"));
    }
    run_detail::write_json(opt.out_dir, "besov.json", j);
    return 0;
  }

  if (cmd == "oracle-compare") {
    if (cfg.params.dim() != 1)
      throw OutOfRange("oracle-compare: one-dimensional configurations only");
    const PathEnsemble ens = simulate(cfg.params, cfg.x0, cfg.t, cfg.scheme);
    std::ostringstream table;
    table << "lambda,mc_estimate,mc_stderr,oracle,z_score\n";
    bool all_ok = true;
    log("lambda    mc          stderr      oracle      z");
    for (const double lam : cfg.oracle_lambdas) {
      Vec vals(ens.terminal.size());
      for (std::size_t i = 0; i < ens.terminal.size(); ++i)
        vals[i] = std::exp(-lam * ens.terminal[i][0]);
      const MeanStderr ms = mean_stderr(vals);
      const double oracle = laplace_cbi_1d(cfg.params, cfg.x0[0], cfg.t, lam, 1e-10);
      const double z = ms.stderr_ > 0.0 ? (ms.mean - oracle) / ms.stderr_
                                        : (ms.mean == oracle ? 0.0 : kInf);
      all_ok = all_ok && std::abs(z) <= 3.0;
      table << format_double(lam) << ',' << format_double(ms.mean) << ','
            << format_double(ms.stderr_) << ',' << format_double(oracle) << ','
            << format_double(z) << '\n';
      char line[160];
      std::snprintf(line, sizeof(line), "%-9g %-11.8f %-11.3e %-11.8f %+.2f", lam, ms.mean,
                    ms.stderr_, oracle, z);
      log(line);
    }
    run_detail::write_file(opt.out_dir, "oracle_compare.csv", table.str());
    return all_ok ? 0 : 2;
  }

  throw ConfigParseError("unknown subcommand '" + cmd + "'");
}

}  // namespace cbi
