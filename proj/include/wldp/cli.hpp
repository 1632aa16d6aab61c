#ifndef WLDP_CLI_HPP
#define WLDP_CLI_HPP

// Run configuration (JSON) parsing and command execution behind the `wldp`
// executable. Kept header-side so tests can drive it without a subprocess.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wldp/entry_dist.hpp"
#include "wldp/free_energy.hpp"
#include "wldp/gibbs.hpp"
#include "wldp/io.hpp"
#include "wldp/monte_carlo.hpp"
#include "wldp/rate.hpp"
#include "wldp/semicircle.hpp"

namespace wldp::cli {

using nlohmann::json;
using io::ConfigError;

enum class Command { RateCurve, GibbsSolve, FreeEnergy, Mc, SelfCheck };

struct GibbsArgs {
  std::vector<double> v;
  double R = kInf;
  double alpha = 1.0;
};

struct FreeEnergyArgs {
  std::string form;  // f_hat | f_restricted | f_tilde
  double theta = 0.0;
  double alpha = 0.0;
  std::vector<double> w;
  double N = 1.0;
  double R = 1.0;
  std::optional<double> t;
};

struct RunSpec {
  Command command = Command::SelfCheck;
  std::string command_name = "selfcheck";
  std::optional<EntryDistribution> dist;
  json dist_json;
  std::optional<std::string> out;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  double tol = 1e-3;

  std::vector<double> x_grid;
  rate::RateOptions rate;
  GibbsArgs gibbs;
  FreeEnergyArgs free_energy;
  mc::ExperimentConfig mc;
  std::optional<std::string> samples_csv;

  json defaults = json::object();  // every field filled by a default
};

namespace detail {

inline std::optional<double> opt_number(const json& j, const std::string& key, const std::string& path) {
  if (!j.contains(key)) return std::nullopt;
  if (!j.at(key).is_number()) throw ConfigError(path + "." + key, "expected a number");
  return j.at(key).get<double>();
}

/// Numbers, or the strings "inf"/"infinity" for an unbounded radius.
inline std::optional<double> opt_extended(const json& j, const std::string& key, const std::string& path) {
  if (!j.contains(key)) return std::nullopt;
  const auto& v = j.at(key);
  if (v.is_number()) return v.get<double>();
  if (v.is_string() && (v.get<std::string>() == "inf" || v.get<std::string>() == "infinity")) return kInf;
  throw ConfigError(path + "." + key, "expected a number or \"inf\"");
}

inline std::vector<double> number_array(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path, "expected an array of numbers");
  std::vector<double> out;
  for (const auto& e : j) {
    if (!e.is_number()) throw ConfigError(path, "expected an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

template <class T>
T with_default(const json& j, const std::string& key, T fallback, RunSpec& spec, const std::string& path) {
  if (j.contains(key)) {
    if (!j.at(key).is_number()) throw ConfigError(path + "." + key, "expected a number");
    return j.at(key).get<T>();
  }
  spec.defaults[key] = fallback;
  return fallback;
}

inline std::vector<double> parse_grid(const json& x, const std::string& path) {
  if (x.is_array()) {
    const auto v = number_array(x, path);
    if (v.size() != 3) throw ConfigError(path, "expected [start, stop, step]");
    try {
      return rate::arithmetic_grid(v[0], v[1], v[2]);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(path, e.what());
    }
  }
  if (x.is_object()) {
    io::reject_unknown(x, {"values"}, path);
    if (!x.contains("values")) throw ConfigError(path + ".values", "missing required field");
    auto v = number_array(x.at("values"), path + ".values");
    if (!std::is_sorted(v.begin(), v.end())) throw ConfigError(path + ".values", "grid must be sorted");
    return v;
  }
  throw ConfigError(path, "expected [start, stop, step] or {\"values\": [...]}");
}

}  // namespace detail

/// Validates a JSON run configuration and fills defaults.
inline RunSpec parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("$", std::string("invalid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("$", "expected an object");
  if (!root.contains("command") || !root.at("command").is_string()) throw ConfigError("$.command", "missing required field");

  RunSpec spec;
  spec.command_name = root.at("command").get<std::string>();
  const std::set<std::string> common{"command", "dist", "out", "seed", "threads", "tol"};
  auto allowed = [&](std::initializer_list<const char*> extra) {
    std::set<std::string> s = common;
    for (const char* e : extra) s.insert(e);
    return s;
  };

  const std::string& c = spec.command_name;
  if (c == "rate-curve") {
    spec.command = Command::RateCurve;
    io::reject_unknown(root, allowed({"x", "mode", "cap", "alpha_grid", "N", "R", "k_values", "mass_grid",
                                      "alpha_tilde_grid", "xi", "t"}),
                       "$");
  } else if (c == "gibbs-solve") {
    spec.command = Command::GibbsSolve;
    io::reject_unknown(root, allowed({"v", "R", "alpha"}), "$");
  } else if (c == "free-energy") {
    spec.command = Command::FreeEnergy;
    io::reject_unknown(root, allowed({"form", "theta", "alpha", "w", "N", "R", "t"}), "$");
  } else if (c == "mc") {
    spec.command = Command::Mc;
    io::reject_unknown(root, allowed({"kind", "N", "reps", "eta", "theta", "u", "spike", "selection", "x",
                                      "samples_csv"}),
                       "$");
  } else if (c == "selfcheck") {
    spec.command = Command::SelfCheck;
    io::reject_unknown(root, common, "$");
  } else {
    throw ConfigError("$.command", "unknown command '" + c + "'");
  }

  if (root.contains("out")) {
    if (!root.at("out").is_string()) throw ConfigError("$.out", "expected a string");
    spec.out = root.at("out").get<std::string>();
  }
  if (root.contains("seed")) {
    if (!root.at("seed").is_number_unsigned()) throw ConfigError("$.seed", "expected a non-negative integer");
    spec.seed = root.at("seed").get<std::uint64_t>();
  } else if (spec.command == Command::Mc) {
    spec.defaults["seed"] = spec.seed;
  }
  if (root.contains("threads")) {
    if (!root.at("threads").is_number_unsigned()) throw ConfigError("$.threads", "expected a positive integer");
    spec.threads = std::max(1u, root.at("threads").get<unsigned>());
  }
  spec.tol = detail::with_default(root, "tol", 1e-3, spec, "$");

  const bool needs_dist = spec.command != Command::SelfCheck;
  if (root.contains("dist")) {
    spec.dist = io::parse_dist(root.at("dist"));
    spec.dist_json = io::dist_to_json(*spec.dist);
  } else if (needs_dist) {
    throw ConfigError("$.dist", "missing required field");
  }

  switch (spec.command) {
    case Command::RateCurve: {
      if (!root.contains("x")) throw ConfigError("$.x", "missing required field");
      spec.x_grid = detail::parse_grid(root.at("x"), "$.x");
      auto& r = spec.rate;
      std::string mode = "hat";
      if (root.contains("mode")) {
        if (!root.at("mode").is_string()) throw ConfigError("$.mode", "expected a string");
        mode = root.at("mode").get<std::string>();
      } else {
        spec.defaults["mode"] = mode;
      }
      if (mode == "hat") r.mode = rate::Mode::Hat;
      else if (mode == "finite_n") r.mode = rate::Mode::FiniteN;
      else if (mode == "tilde") r.mode = rate::Mode::Tilde;
      else throw ConfigError("$.mode", "unknown mode '" + mode + "' (expected hat, finite_n or tilde)");
      r.cap = detail::with_default(root, "cap", 0.95, spec, "$");
      if (!(r.cap > 0.0 && r.cap < 1.0)) throw ConfigError("$.cap", "must lie in (0, 1)");
      if (r.mode == rate::Mode::Hat) {
        r.alpha_grid = detail::with_default(root, "alpha_grid", 201, spec, "$");
        if (r.alpha_grid < 2) throw ConfigError("$.alpha_grid", "must be >= 2");
      } else {
        r.N = detail::with_default(root, "N", 1e6, spec, "$");
        if (!(r.N >= 1.0)) throw ConfigError("$.N", "must be >= 1");
        r.R = detail::with_default(root, "R", std::pow(r.N, 0.2), spec, "$");
        if (!(*r.R >= 1.0)) throw ConfigError("$.R", "must be >= 1");
        if (root.contains("k_values")) {
          std::vector<int> ks;
          for (double k : detail::number_array(root.at("k_values"), "$.k_values")) {
            if (!(k >= 1.0) || k != std::floor(k)) throw ConfigError("$.k_values", "expected positive integers");
            ks.push_back(static_cast<int>(k));
          }
          r.k_values = ks;
        } else {
          spec.defaults["k_values"] = r.supports();
        }
        r.mass_grid = detail::with_default(root, "mass_grid", 101, spec, "$");
        if (r.mode == rate::Mode::Tilde) {
          r.alpha_tilde_grid = detail::with_default(root, "alpha_tilde_grid", 21, spec, "$");
          r.xi = detail::with_default(root, "xi", std::pow(r.N, -0.05), spec, "$");
          r.t = detail::opt_number(root, "t", "$");
        }
      }
      break;
    }
    case Command::GibbsSolve: {
      auto& g = spec.gibbs;
      if (root.contains("v")) g.v = detail::number_array(root.at("v"), "$.v");
      else spec.defaults["v"] = json::array();
      if (auto R = detail::opt_extended(root, "R", "$")) g.R = *R;
      else spec.defaults["R"] = "inf";
      g.alpha = detail::with_default(root, "alpha", 1.0, spec, "$");
      try {
        gibbs::GibbsProblem{g.v, *spec.dist, g.R, g.alpha}.validate();
      } catch (const std::invalid_argument& e) {
        throw ConfigError("$", e.what());
      }
      break;
    }
    case Command::FreeEnergy: {
      auto& f = spec.free_energy;
      if (!root.contains("form") || !root.at("form").is_string()) throw ConfigError("$.form", "missing required field");
      f.form = root.at("form").get<std::string>();
      f.theta = io::require_number(root, "theta", "$");
      if (f.form == "f_hat") {
        f.alpha = io::require_number(root, "alpha", "$");
      } else if (f.form == "f_restricted") {
        if (root.contains("w")) f.w = detail::number_array(root.at("w"), "$.w");
        else spec.defaults["w"] = json::array();
        f.N = io::require_number(root, "N", "$");
        f.R = detail::with_default(root, "R", std::pow(f.N, 0.2), spec, "$");
      } else if (f.form == "f_tilde") {
        if (root.contains("w")) f.w = detail::number_array(root.at("w"), "$.w");
        else spec.defaults["w"] = json::array();
        f.alpha = detail::with_default(root, "alpha", 0.0, spec, "$");
        f.R = io::require_number(root, "R", "$");
        f.t = detail::opt_number(root, "t", "$");
      } else {
        throw ConfigError("$.form", "unknown form '" + f.form + "' (expected f_hat, f_restricted or f_tilde)");
      }
      break;
    }
    case Command::Mc: {
      auto& m = spec.mc;
      if (!root.contains("kind") || !root.at("kind").is_string()) throw ConfigError("$.kind", "missing required field");
      const auto kind = root.at("kind").get<std::string>();
      if (kind == "bbp") m.kind = mc::Kind::Bbp;
      else if (kind == "localization") m.kind = mc::Kind::Localization;
      else if (kind == "tail") m.kind = mc::Kind::Tail;
      else throw ConfigError("$.kind", "unknown experiment kind '" + kind + "'");
      m.dist = *spec.dist;
      m.N = static_cast<std::size_t>(io::require_number(root, "N", "$"));
      m.reps = static_cast<std::size_t>(io::require_number(root, "reps", "$"));
      m.eta = detail::with_default(root, "eta", 0.125, spec, "$");
      m.theta = detail::with_default(root, "theta", 0.0, spec, "$");
      if (root.contains("u")) m.u = detail::number_array(root.at("u"), "$.u");
      m.spike = detail::with_default(root, "spike", 0.0, spec, "$");
      if (m.kind == mc::Kind::Localization) m.selection = detail::with_default(root, "selection", 0.01, spec, "$");
      if (m.kind == mc::Kind::Tail) m.x = io::require_number(root, "x", "$");
      if (root.contains("samples_csv")) {
        if (!root.at("samples_csv").is_string()) throw ConfigError("$.samples_csv", "expected a string");
        spec.samples_csv = root.at("samples_csv").get<std::string>();
      }
      break;
    }
    case Command::SelfCheck:
      break;
  }
  return spec;
}

struct CheckResult {
  std::string name;
  bool pass;
  std::string detail;
};

/// Fast invariant checks of every module.
inline std::vector<CheckResult> selfcheck() {
  std::vector<CheckResult> out;
  auto run = [&](const std::string& name, const std::function<std::string()>& body) {
    try {
      const auto failure = body();
      out.push_back({name, failure.empty(), failure});
    } catch (const std::exception& e) {
      out.push_back({name, false, std::string("exception: ") + e.what()});
    }
  };
  auto fmt = [](double x) { return io::format_number(x); };

  run("entry_dist", [&]() -> std::string {
    if (!EntryDistribution::rademacher().is_sharp()) return "rademacher not sharp";
    if (EntryDistribution::sparse_gaussian(0.5).is_sharp()) return "sparse gaussian sharp";
    const auto b = standardize_atoms({{1.0, 0.25}, {0.0, 0.75}});
    if (std::abs(b.atoms().back().location - std::sqrt(3.0)) > 1e-12) return "standardize_atoms location";
    return {};
  });
  run("semicircle", [&]() -> std::string {
    for (double x : {2.1, 3.0, 5.0}) {
      const semicircle::Site s(x);
      const auto r = rate::sup_theta(s, [](double t) { return t * t; });
      if (std::abs(r.value - semicircle::goe_rate(x)) > 1e-6) return "GOE identity at x=" + fmt(x);
    }
    return {};
  });
  run("gibbs", [&]() -> std::string {
    const auto d = EntryDistribution::sparse_gaussian(0.5);
    const auto s = gibbs::gibbs_solve({{0.2, 0.1}, d, 6.0, 0.8});
    if (s.residual() > 1e-9) return "root residual " + fmt(s.residual());
    const double lhs = gibbs::phi(d, {0.2, 0.1}, 0.8, 6.0);
    const double a = std::sqrt(0.8);
    const double rhs = gibbs::phi(d, {0.2 * a, 0.1 * a}, 1.0, 6.0 / a) + 0.1 + 0.5 * std::log(0.8);
    if (std::abs(lhs - rhs) > 1e-6) return "scaling identity " + fmt(lhs - rhs);
    return {};
  });
  run("free_energy", [&]() -> std::string {
    const auto d = EntryDistribution::rademacher();
    const double f = free_energy::f_restricted(d, 0.7, {}, 1e4, 4.0);
    if (f > 0.49 + 1e-9 || f < 0.49 - 10.0 * std::exp(-2.0)) return "F(theta, 0) bounds " + fmt(f);
    const double g = free_energy::f_hat(EntryDistribution::gaussian(), 0.8, 0.2);
    if (std::abs(g - (0.64 + 0.5 * std::log(0.8))) > 1e-8) return "Gaussian F^ closed form " + fmt(g);
    return {};
  });
  run("rate", [&]() -> std::string {
    rate::RateOptions o;
    o.alpha_grid = 21;
    const auto p = rate::rate_point(EntryDistribution::gaussian(), 3.0, o);
    if (std::abs(p.rate - semicircle::goe_rate(3.0)) > 1e-6) return "Gaussian universality at x=3";
    if (p.localized_mass() != 0.0) return "Gaussian minimizer not delocalized";
    return {};
  });
  run("monte_carlo", [&]() -> std::string {
    mc::ExperimentConfig c;
    c.N = 60;
    c.reps = 4;
    c.seed = 3;
    const auto a = mc::experiment(c);
    const auto b = mc::experiment(c);
    if (a.lambda1 != b.lambda1) return "replay not deterministic";
    Eigen::MatrixXd D = Eigen::MatrixXd::Identity(5, 5);
    D(0, 0) = 3.0;
    const auto top = mc::lambda1_and_vector(D);
    if (std::abs(top.lambda - 3.0) > 1e-12 || std::abs(std::abs(top.v(0)) - 1.0) > 1e-12) return "diag(3,1,...)";
    return {};
  });
  return out;
}

/// Flag overrides applied after parsing.
struct Overrides {
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<double> tol;
};

inline void apply(RunSpec& spec, const Overrides& o) {
  if (o.out) spec.out = o.out;
  if (o.seed) {
    spec.seed = *o.seed;
    spec.defaults.erase("seed");
  }
  if (o.threads) spec.threads = std::max(1u, *o.threads);
  if (o.tol) {
    spec.tol = *o.tol;
    spec.defaults.erase("tol");
  }
}

namespace detail {

inline void emit(const RunSpec& spec, const std::string& payload, std::ostream& out) {
  if (!spec.out) {
    out << payload;
    return;
  }
  std::ofstream f(*spec.out, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open output file '" + *spec.out + "'");
  f << payload;
  if (!f) throw std::runtime_error("write failed for '" + *spec.out + "'");
}

inline json metadata(const RunSpec& spec) {
  json m{{"version", io::kReportVersion}, {"command", spec.command_name}, {"defaults", spec.defaults}};
  if (spec.dist) m["dist"] = spec.dist_json;
  return m;
}

}  // namespace detail

/// Executes a parsed spec. Returns the process exit status; diagnostics go to `err`.
inline int run(const RunSpec& spec, std::ostream& out, std::ostream& err) {
  try {
    switch (spec.command) {
      case Command::RateCurve: {
        auto opt = spec.rate;
        const auto curve = rate::rate_curve(*spec.dist, spec.x_grid, opt, spec.tol, spec.threads);
        std::ostringstream csv;
        io::write_curve_csv(csv, curve);
        detail::emit(spec, csv.str(), out);
        json meta = detail::metadata(spec);
        meta["mode"] = rate::mode_name(opt.mode);
        meta["tol"] = spec.tol;
        meta["points"] = curve.points.size();
        meta["x_mu"] = curve.x_mu ? json(*curve.x_mu) : json(nullptr);
        json warnings = json::array();
        for (const auto& p : curve.points)
          for (const auto& w : p.warnings) warnings.push_back(io::format_number(p.x) + ": " + w);
        meta["warnings"] = warnings;
        meta["diagnostics"] = curve.diagnostics();
        if (spec.out) {
          std::ofstream f(*spec.out + ".meta.json");
          if (!f) throw std::runtime_error("cannot open output file '" + *spec.out + ".meta.json'");
          f << meta.dump(2) << '\n';
        }
        err << meta.dump(2) << '\n';
        if (!curve.ok()) {
          err << "error: curve poisoned by failed points\n";
          for (const auto& d : curve.diagnostics()) err << "  " << d << '\n';
          return 2;
        }
        return 0;
      }
      case Command::GibbsSolve: {
        const auto& g = spec.gibbs;
        const auto sol = gibbs::gibbs_solve({g.v, *spec.dist, g.R, g.alpha});
        json j = io::solution_to_json(sol);
        j["metadata"] = detail::metadata(spec);
        detail::emit(spec, j.dump(2) + "\n", out);
        return 0;
      }
      case Command::FreeEnergy: {
        const auto& f = spec.free_energy;
        double value = 0.0;
        if (f.form == "f_hat") value = free_energy::f_hat(*spec.dist, f.theta, f.alpha);
        else if (f.form == "f_restricted") value = free_energy::f_restricted(*spec.dist, f.theta, f.w, f.N, f.R);
        else value = free_energy::f_tilde(*spec.dist, f.theta, f.w, f.alpha, f.R, f.t);
        json j{{"version", io::kReportVersion}, {"form", f.form}, {"value", io::number(value)}};
        j["metadata"] = detail::metadata(spec);
        detail::emit(spec, j.dump(2) + "\n", out);
        return 0;
      }
      case Command::Mc: {
        auto cfg = spec.mc;
        cfg.seed = spec.seed;
        cfg.threads = spec.threads;
        const auto rep = mc::experiment(cfg);
        json j = io::report_to_json(rep);
        j["metadata"] = detail::metadata(spec);
        detail::emit(spec, j.dump(2) + "\n", out);
        if (spec.samples_csv) {
          std::ofstream f(*spec.samples_csv, std::ios::binary);
          if (!f) throw std::runtime_error("cannot open output file '" + *spec.samples_csv + "'");
          io::write_samples_csv(f, rep);
        }
        return 0;
      }
      case Command::SelfCheck: {
        bool all = true;
        for (const auto& r : selfcheck()) {
          out << (r.pass ? "PASS " : "FAIL ") << r.name;
          if (!r.pass) out << " (" << r.detail << ")";
          out << '\n';
          all = all && r.pass;
        }
        return all ? 0 : 1;
      }
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace wldp::cli

#endif  // WLDP_CLI_HPP
