#ifndef WLDP_IO_HPP
#define WLDP_IO_HPP

// JSON and CSV plumbing: distribution specs, report documents and
// round-trip number formatting. Requires nlohmann/json.

#include <charconv>
#include <cmath>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include <nlohmann/json.hpp>

#include "wldp/entry_dist.hpp"
#include "wldp/gibbs.hpp"
#include "wldp/monte_carlo.hpp"
#include "wldp/rate.hpp"

namespace wldp::io {

using nlohmann::json;

inline constexpr int kReportVersion = 1;

/// Error raised for schema violations; the message starts with the JSON path.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(const std::string& path, const std::string& what) : std::invalid_argument(path + ": " + what) {}
};

/// Shortest representation that reads back to the same double; `inf`/`-inf`/`nan` otherwise.
inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  if (res.ec != std::errc()) throw std::runtime_error("format_number: conversion failed");
  return std::string(buf, res.ptr);
}

inline void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& path) {
  if (!obj.is_object()) throw ConfigError(path, "expected an object");
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key)) throw ConfigError(path + "." + key, "unknown key");
}

inline double require_number(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.contains(key)) throw ConfigError(path + "." + key, "missing required field");
  if (!obj.at(key).is_number()) throw ConfigError(path + "." + key, "expected a number");
  return obj.at(key).get<double>();
}

/// {"kind": ..., "p": ..., "atoms": [[x, mass], ...]}; atoms are standardized on load.
inline EntryDistribution parse_dist(const json& spec, const std::string& path = "$.dist") {
  if (!spec.is_object()) throw ConfigError(path, "expected an object");
  if (!spec.contains("kind") || !spec.at("kind").is_string()) throw ConfigError(path + ".kind", "missing required field");
  const auto kind = spec.at("kind").get<std::string>();
  if (kind == "gaussian" || kind == "rademacher") {
    reject_unknown(spec, {"kind"}, path);
    return kind == "gaussian" ? EntryDistribution::gaussian() : EntryDistribution::rademacher();
  }
  if (kind == "sparse_rademacher" || kind == "sparse_gaussian" || kind == "bernoulli") {
    reject_unknown(spec, {"kind", "p"}, path);
    const double p = require_number(spec, "p", path);
    try {
      if (kind == "sparse_rademacher") return EntryDistribution::sparse_rademacher(p);
      if (kind == "sparse_gaussian") return EntryDistribution::sparse_gaussian(p);
      return EntryDistribution::bernoulli(p);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(path + ".p", e.what());
    }
  }
  if (kind == "atoms") {
    reject_unknown(spec, {"kind", "atoms"}, path);
    if (!spec.contains("atoms") || !spec.at("atoms").is_array()) throw ConfigError(path + ".atoms", "missing required field");
    std::vector<Atom> atoms;
    std::size_t i = 0;
    for (const auto& a : spec.at("atoms")) {
      const std::string ap = path + ".atoms[" + std::to_string(i++) + "]";
      if (!a.is_array() || a.size() != 2 || !a[0].is_number() || !a[1].is_number())
        throw ConfigError(ap, "expected [location, mass]");
      atoms.push_back({a[0].get<double>(), a[1].get<double>()});
    }
    try {
      return standardize_atoms(atoms);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(path + ".atoms", e.what());
    }
  }
  throw ConfigError(path + ".kind", "unknown dist kind '" + kind + "'");
}

inline json dist_to_json(const EntryDistribution& d) {
  json j;
  switch (d.kind()) {
    case DistKind::Gaussian: j["kind"] = "gaussian"; break;
    case DistKind::Rademacher: j["kind"] = "rademacher"; break;
    case DistKind::SparseRademacher: j = {{"kind", "sparse_rademacher"}, {"p", d.p()}}; break;
    case DistKind::SparseGaussian: j = {{"kind", "sparse_gaussian"}, {"p", d.p()}}; break;
    case DistKind::BernoulliStd: j = {{"kind", "bernoulli"}, {"p", d.p()}}; break;
    case DistKind::DiscreteAtoms: {
      j["kind"] = "atoms";
      json atoms = json::array();
      for (const auto& a : d.atoms()) atoms.push_back({a.location, a.mass});
      j["atoms"] = atoms;
      break;
    }
  }
  return j;
}

/// JSON numbers cannot hold inf/nan; those become strings.
inline json number(double x) {
  if (std::isfinite(x)) return x;
  return format_number(x);
}

inline json report_to_json(const mc::MCReport& r) {
  json j;
  j["version"] = kReportVersion;
  j["kind"] = mc::kind_name(r.kind);
  j["dist"] = r.dist;
  j["seed"] = r.seed;
  j["reps"] = r.reps;
  j["N"] = r.N;
  j["eta"] = r.eta;
  j["theta"] = r.theta;
  j["spike"] = r.spike;
  j["mean"] = number(r.mean);
  j["stderr"] = number(r.stderr_mean);
  j["lambda1"] = r.lambda1;
  json stats = json::array();
  for (const auto& e : r.eigvec) stats.push_back({{"mass_eta", e.mass_eta}, {"linf", e.linf}, {"support_eta", e.support_eta}});
  j["eigvec"] = stats;
  if (r.prediction) {
    j["prediction"] = r.prediction->value ? json(*r.prediction->value) : json(r.prediction->text);
    j["prediction_formula"] = r.prediction->text;
  }
  if (r.conditional) {
    const auto& c = *r.conditional;
    j["conditional"] = {{"label", c.label},
                        {"selected", c.selected},
                        {"lambda1_cutoff", c.lambda1_cutoff},
                        {"linf_conditional", c.linf_conditional},
                        {"linf_unconditional", c.linf_unconditional},
                        {"mass_eta_conditional", c.mass_eta_conditional},
                        {"mass_eta_unconditional", c.mass_eta_unconditional},
                        {"support_eta_conditional", c.support_eta_conditional},
                        {"support_eta_unconditional", c.support_eta_unconditional}};
  }
  if (r.tail) {
    const auto& t = *r.tail;
    j["tail"] = {{"status", t.status},
                 {"diagnostic", t.diagnostic},
                 {"x", t.x},
                 {"count", t.count},
                 {"frequency", t.frequency},
                 {"wilson_lo", t.wilson_lo},
                 {"wilson_hi", t.wilson_hi},
                 {"log_frequency", number(t.log_frequency)},
                 {"rate_estimate", number(t.rate_estimate)}};
  }
  return j;
}

inline void write_samples_csv(std::ostream& os, const mc::MCReport& r) {
  os << "rep,lambda1,mass_eta,linf,support_eta\n";
  for (std::size_t i = 0; i < r.lambda1.size(); ++i) {
    const auto& e = r.eigvec[i];
    os << i << ',' << format_number(r.lambda1[i]) << ',' << format_number(e.mass_eta) << ','
       << format_number(e.linf) << ',' << e.support_eta << '\n';
  }
}

inline void write_curve_csv(std::ostream& os, const rate::RateCurve& c) {
  os << "x,rate,goe_rate,theta_star,alpha_star\n";
  for (const auto& p : c.points) {
    // Points below the bulk edge have no inner or outer optimizer; 0 is written for both.
    const bool edge = p.x < 2.0;
    const double theta = edge ? 0.0 : p.theta_star;
    const double alpha = edge ? 0.0 : p.localized_mass();
    os << format_number(p.x) << ',' << format_number(p.rate) << ',' << format_number(p.goe_rate) << ','
       << format_number(theta) << ',' << format_number(alpha) << '\n';
  }
}

inline json solution_to_json(const gibbs::GibbsSolution& s) {
  return {{"version", kReportVersion},
          {"zeta_star", s.zeta_star()},
          {"value", s.value()},
          {"log_normalizer", s.log_normalizer()},
          {"residual", s.residual()},
          {"alpha", s.alpha()},
          {"R", number(s.R())}};
}

}  // namespace wldp::io

#endif  // WLDP_IO_HPP
