#ifndef WLDP_ENTRY_DIST_HPP
#define WLDP_ENTRY_DIST_HPP

// Standardized sub-Gaussian entry laws: log-Laplace transform, the
// normalized ratio psi(t) = Lambda(t)/t^2 and its extremes, and plain or
// exponentially tilted sampling.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "wldp/numerics.hpp"
#include "wldp/rng.hpp"

namespace wldp {

struct Atom {
  double location;
  double mass;
};

enum class DistKind { Gaussian, Rademacher, SparseRademacher, SparseGaussian, BernoulliStd, DiscreteAtoms };

struct PsiExtremes {
  double psi_max;
  double psi_infty;
  bool is_sharp;
  double argmax;  // +/-inf when the sup is only approached at infinity
};

class EntryDistribution;

namespace detail {
PsiExtremes compute_psi_extremes(const EntryDistribution& dist);
}

class EntryDistribution {
 public:
  static EntryDistribution gaussian() { return EntryDistribution(DistKind::Gaussian, 1.0, {}); }

  static EntryDistribution rademacher() {
    return EntryDistribution(DistKind::Rademacher, 0.5, {{-1.0, 0.5}, {1.0, 0.5}});
  }

  /// B_p * Y / sqrt(p) with Y uniform on {-1, +1}.
  static EntryDistribution sparse_rademacher(double p) {
    check_probability(p, "sparse_rademacher");
    const double a = 1.0 / std::sqrt(p);
    std::vector<Atom> atoms{{-a, 0.5 * p}, {a, 0.5 * p}};
    if (p < 1.0) atoms.insert(atoms.begin() + 1, Atom{0.0, 1.0 - p});
    return EntryDistribution(DistKind::SparseRademacher, p, std::move(atoms));
  }

  /// B_p * G / sqrt(p) with G standard Gaussian.
  static EntryDistribution sparse_gaussian(double p) {
    check_probability(p, "sparse_gaussian");
    return EntryDistribution(DistKind::SparseGaussian, p, {});
  }

  /// Standardized Bernoulli(p): (B_p - p) / sqrt(p(1-p)).
  static EntryDistribution bernoulli(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("bernoulli: p must lie in (0, 1)");
    const double lo = -std::sqrt(p / (1.0 - p));
    const double hi = std::sqrt((1.0 - p) / p);
    return EntryDistribution(DistKind::BernoulliStd, p, {{lo, 1.0 - p}, {hi, p}});
  }

  /// Finite atomic law that is already centered with unit variance.
  /// Use standardize_atoms() for arbitrary atoms.
  static EntryDistribution discrete_atoms(std::vector<Atom> atoms) {
    if (atoms.size() < 2) throw std::invalid_argument("degenerate distribution");
    double total = 0.0, m1 = 0.0, m2 = 0.0;
    for (const auto& a : atoms) {
      if (!(a.mass > 0.0) || !std::isfinite(a.location))
        throw std::invalid_argument("atoms: masses must be positive and locations finite");
      total += a.mass;
      m1 += a.mass * a.location;
      m2 += a.mass * a.location * a.location;
    }
    if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("atoms: masses must sum to 1");
    if (std::abs(m1) > 1e-10 || std::abs(m2 - 1.0) > 1e-10)
      throw std::invalid_argument("atoms: law is not standardized (use standardize_atoms)");
    return EntryDistribution(DistKind::DiscreteAtoms, 0.0, std::move(atoms));
  }

  DistKind kind() const { return kind_; }
  double p() const { return p_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  bool is_atomic() const { return kind_ != DistKind::Gaussian && kind_ != DistKind::SparseGaussian; }
  bool compact_support() const { return is_atomic(); }

  bool symmetric() const {
    switch (kind_) {
      case DistKind::Gaussian:
      case DistKind::Rademacher:
      case DistKind::SparseRademacher:
      case DistKind::SparseGaussian:
        return true;
      case DistKind::BernoulliStd:
        return p_ == 0.5;
      case DistKind::DiscreteAtoms:
        break;
    }
    std::map<double, double> by_loc;
    for (const auto& a : atoms_) by_loc[a.location] += a.mass;
    for (const auto& [x, m] : by_loc) {
      auto it = by_loc.find(-x);
      if (it == by_loc.end() || std::abs(it->second - m) > 1e-14) return false;
    }
    return true;
  }

  std::string name() const {
    switch (kind_) {
      case DistKind::Gaussian: return "gaussian";
      case DistKind::Rademacher: return "rademacher";
      case DistKind::SparseRademacher: return "sparse_rademacher";
      case DistKind::SparseGaussian: return "sparse_gaussian";
      case DistKind::BernoulliStd: return "bernoulli";
      case DistKind::DiscreteAtoms: return "atoms";
    }
    return "unknown";
  }

  /// Lambda(t) = log E exp(tX) (order 0) or its first/second derivative.
  double log_laplace(double t, int order = 0) const {
    if (order < 0 || order > 2) throw std::invalid_argument("log_laplace: order must be 0, 1 or 2");
    switch (kind_) {
      case DistKind::Gaussian:
        return order == 0 ? 0.5 * t * t : (order == 1 ? t : 1.0);
      case DistKind::Rademacher: {
        if (order == 0) {
          if (std::abs(t) < 1.0) {
            const double sh = std::sinh(0.5 * t);
            return std::log1p(2.0 * sh * sh);  // cosh t - 1 without cancellation
          }
          return std::abs(t) + std::log1p(std::exp(-2.0 * std::abs(t))) - std::numbers::ln2;
        }
        const double th = std::tanh(t);
        return order == 1 ? th : 1.0 - th * th;
      }
      case DistKind::SparseGaussian: {
        const double u = t * t / (2.0 * p_);
        const double lam = numerics::log_add_exp(log_one_minus_p_, log_p_ + u);
        if (order == 0) return u < 1.0 ? std::log1p(p_ * std::expm1(u)) : lam;
        const double w = std::exp(log_p_ + u - lam);  // tilted weight of the Gaussian component
        if (order == 1) return w * t / p_;
        return w / p_ + w * (1.0 - w) * (t / p_) * (t / p_);
      }
      default:
        return atomic_log_laplace(t, order);
    }
  }

  /// psi(t) = Lambda(t)/t^2, continuously extended by 1/2 at t = 0.
  double psi(double t) const {
    if (std::abs(t) < kPsiTaylorRadius) return 0.5 + third_cumulant_ * t / 6.0 + fourth_cumulant_ * t * t / 24.0;
    return log_laplace(t, 0) / (t * t);
  }

  /// Lambda'''(0) = E X^3 for a standardized law.
  double third_cumulant() const { return third_cumulant_; }

  const PsiExtremes& extremes() const { return extremes_; }
  double psi_max() const { return extremes_.psi_max; }
  double psi_infty() const { return extremes_.psi_infty; }
  bool is_sharp() const { return extremes_.is_sharp; }

  /// One draw from mu, or from the tilted law exp(t x - Lambda(t)) dmu(x).
  template <class Gen>
  double draw(Gen& gen, double tilt = 0.0) const {
    switch (kind_) {
      case DistKind::Gaussian:
        return tilt + standard_normal(gen);
      case DistKind::SparseGaussian: {
        const double u = tilt * tilt / (2.0 * p_);
        const double lam = numerics::log_add_exp(log_one_minus_p_, log_p_ + u);
        const double w = std::exp(log_p_ + u - lam);
        if (gen.uniform() >= w) return 0.0;
        return tilt / p_ + standard_normal(gen) / std::sqrt(p_);
      }
      default:
        return draw_atom(gen, tilt);
    }
  }

 private:
  static constexpr double kPsiTaylorRadius = 1e-4;

  static void check_probability(double p, const char* what) {
    if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument(std::string(what) + ": p must lie in (0, 1]");
  }

  EntryDistribution(DistKind kind, double p, std::vector<Atom> atoms)
      : kind_(kind), p_(p), atoms_(std::move(atoms)) {
    if (kind_ == DistKind::SparseGaussian) {
      log_p_ = std::log(p_);
      log_one_minus_p_ = p_ < 1.0 ? std::log1p(-p_) : -kInf;
    }
    log_masses_.reserve(atoms_.size());
    for (const auto& a : atoms_) {
      log_masses_.push_back(std::log(a.mass));
      third_cumulant_ += a.mass * a.location * a.location * a.location;
      fourth_cumulant_ += a.mass * std::pow(a.location, 4);
      max_abs_location_ = std::max(max_abs_location_, std::abs(a.location));
    }
    if (atoms_.empty()) fourth_cumulant_ = kind_ == DistKind::SparseGaussian ? 3.0 / p_ : 3.0;
    fourth_cumulant_ -= 3.0;
    extremes_ = detail::compute_psi_extremes(*this);
  }

  double atomic_log_laplace(double t, int order) const {
    double m = -kInf;
    for (std::size_t i = 0; i < atoms_.size(); ++i) m = std::max(m, log_masses_[i] + t * atoms_[i].location);
    double z = 0.0, s1 = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      const double w = std::exp(log_masses_[i] + t * atoms_[i].location - m);
      const double x = atoms_[i].location;
      z += w;
      s1 += w * x;
      s2 += w * x * x;
    }
    if (order == 0) {
      if (std::abs(t) * max_abs_location_ < 1.0) {
        double e = 0.0;
        for (std::size_t i = 0; i < atoms_.size(); ++i) e += atoms_[i].mass * std::expm1(t * atoms_[i].location);
        return std::log1p(e);
      }
      return m + std::log(z);
    }
    const double mean = s1 / z;
    if (order == 1) return mean;
    return std::max(0.0, s2 / z - mean * mean);
  }

  template <class Gen>
  double draw_atom(Gen& gen, double tilt) const {
    double m = -kInf;
    for (std::size_t i = 0; i < atoms_.size(); ++i) m = std::max(m, log_masses_[i] + tilt * atoms_[i].location);
    double z = 0.0;
    for (std::size_t i = 0; i < atoms_.size(); ++i) z += std::exp(log_masses_[i] + tilt * atoms_[i].location - m);
    double u = gen.uniform() * z;
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      u -= std::exp(log_masses_[i] + tilt * atoms_[i].location - m);
      if (u <= 0.0) return atoms_[i].location;
    }
    return atoms_.back().location;
  }

  DistKind kind_;
  double p_;
  std::vector<Atom> atoms_;
  std::vector<double> log_masses_;
  double log_p_ = 0.0;
  double log_one_minus_p_ = 0.0;
  double third_cumulant_ = 0.0;
  double fourth_cumulant_ = 0.0;
  double max_abs_location_ = 0.0;
  PsiExtremes extremes_{};
};

/// Affine standardization of an arbitrary finite atomic law.
inline EntryDistribution standardize_atoms(const std::vector<Atom>& raw) {
  std::map<double, double> merged;
  double total = 0.0;
  for (const auto& a : raw) {
    if (!(a.mass > 0.0) || !std::isfinite(a.location))
      throw std::invalid_argument("atoms: masses must be positive and locations finite");
    merged[a.location] += a.mass;
    total += a.mass;
  }
  if (merged.size() < 2) throw std::invalid_argument("degenerate distribution");
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("atoms: masses must sum to 1");
  double mean = 0.0;
  for (const auto& [x, m] : merged) mean += m / total * x;
  double var = 0.0;
  for (const auto& [x, m] : merged) var += m / total * (x - mean) * (x - mean);
  if (!(var > 0.0)) throw std::invalid_argument("degenerate distribution");
  const double sd = std::sqrt(var);
  std::vector<Atom> out;
  out.reserve(merged.size());
  for (const auto& [x, m] : merged) out.push_back({(x - mean) / sd, m / total});
  // Re-center exactly; the affine map leaves O(eps) drift.
  double m1 = 0.0, m2 = 0.0;
  for (const auto& a : out) m1 += a.mass * a.location;
  for (auto& a : out) a.location -= m1;
  for (const auto& a : out) m2 += a.mass * a.location * a.location;
  for (auto& a : out) a.location /= std::sqrt(m2);
  double mass_total = 0.0;
  for (const auto& a : out) mass_total += a.mass;
  for (auto& a : out) a.mass /= mass_total;
  return EntryDistribution::discrete_atoms(std::move(out));
}

/// psi_max, psi_infty and the sharp sub-Gaussian flag.
inline PsiExtremes psi_extremes(const EntryDistribution& dist) { return dist.extremes(); }

/// n iid draws, optionally from the tilted law.
template <class Gen>
std::vector<double> sample(const EntryDistribution& dist, std::size_t n, std::optional<double> tilt, Gen& gen) {
  const double t = tilt.value_or(0.0);
  if (!std::isfinite(t)) throw std::invalid_argument("sample: tilt must be finite");
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(dist.draw(gen, t));
  return out;
}

namespace detail {

// Sup of psi on one half-line {sign * t : t >= 0}. Log-spaced scan then
// golden-section refinement around the best cell; the bracket B doubles from
// 64 until psi(sign * B) is within 1e-8 of psi_infty.
inline numerics::ScalarOptimum half_line_sup(const EntryDistribution& dist, double sign, double psi_infty) {
  double bound = 64.0;
  int expansions = 0;
  while (std::abs(dist.psi(sign * bound) - psi_infty) > 1e-8) {
    bound *= 2.0;
    if (++expansions > 60) throw std::runtime_error("psi_extremes: bracket did not stabilize");
  }
  constexpr int kScan = 400;
  const double lo = 1e-3;
  std::vector<double> ts;
  ts.reserve(kScan + 1);
  ts.push_back(0.0);
  for (int i = 0; i < kScan; ++i) ts.push_back(lo * std::pow(bound / lo, static_cast<double>(i) / (kScan - 1)));
  std::size_t best = 0;
  double best_val = 0.5;
  for (std::size_t i = 1; i < ts.size(); ++i) {
    const double v = dist.psi(sign * ts[i]);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  if (best == 0) return {0.0, 0.5};
  const double a = ts[best - 1];
  const double b = best + 1 < ts.size() ? ts[best + 1] : ts[best];
  auto f = [&](double t) { return dist.psi(sign * t); };
  auto r = numerics::golden_section_max(f, a, b, 1e-12 * std::max(1.0, b));
  if (r.value < best_val) r = {ts[best], best_val};
  return {sign * r.arg, r.value};
}

inline PsiExtremes compute_psi_extremes(const EntryDistribution& dist) {
  switch (dist.kind()) {
    case DistKind::Gaussian:
      return {0.5, 0.5, true, 0.0};
    case DistKind::SparseGaussian: {
      const double v = 0.5 / dist.p();
      // psi is strictly increasing on R+ for p < 1, so the sup is the limit.
      return {v, v, v <= 0.5 + 1e-9, dist.p() < 1.0 ? kInf : 0.0};
    }
    case DistKind::Rademacher:
      return {0.5, 0.0, true, 0.0};
    default:
      break;
  }
  const double psi_infty = 0.0;  // compact support
  const auto right = half_line_sup(dist, +1.0, psi_infty);
  const auto left = half_line_sup(dist, -1.0, psi_infty);
  const auto& best = right.value >= left.value ? right : left;
  const double psi_max = std::max(0.5, best.value);
  return {psi_max, psi_infty, psi_max <= 0.5 + 1e-9, psi_max > 0.5 ? best.arg : 0.0};
}

}  // namespace detail

/// Numerical checks of the standing tail assumptions. These are advisory:
/// the formulas are evaluated regardless.
inline std::vector<std::string> assumption_warnings(const EntryDistribution& dist) {
  std::vector<std::string> warnings;
  double sup_second = 0.0;
  for (double t = -200.0; t <= 200.0; t += 0.5) sup_second = std::max(sup_second, dist.log_laplace(t, 2));
  if (!std::isfinite(sup_second) || sup_second > 1e6)
    warnings.push_back("USG: sup Lambda'' appears unbounded");
  const double tr = dist.psi(1e4), tl = dist.psi(-1e4);
  if (std::abs(tr - tl) > 1e-3) warnings.push_back("LRlim: left and right limits of psi differ");
  double sup_pos = 0.5, sup_neg = 0.5;
  for (double t = 1e-2; t <= 1e3; t *= 1.05) {
    sup_pos = std::max(sup_pos, dist.psi(t));
    sup_neg = std::max(sup_neg, dist.psi(-t));
  }
  if (sup_neg > sup_pos + 1e-9) warnings.push_back("maxR+: sup of psi is attained on the negative half-line");
  return warnings;
}

}  // namespace wldp

#endif  // WLDP_ENTRY_DIST_HPP
