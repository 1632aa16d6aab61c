#ifndef WLDP_GIBBS_HPP
#define WLDP_GIBBS_HPP

// Constrained Gibbs variational problem
//
//   Phi_R(v, alpha) = sup { int h dnu - D_KL(nu | gamma) : nu on [-R, R], int s^2 dnu = alpha },
//   h(s) = sum_i Lambda(2 v_i s),
//
// solved through its Lagrange multiplier: with
//   g(zeta) = log int_{-R}^{R} exp(h(s) - zeta s^2) ds
// the optimizer is nu^zeta(ds) ~ exp(h(s) - zeta s^2) ds where g'(zeta) + alpha = 0, and
//   Phi_R(v, alpha) = g(zeta*) + alpha zeta* + (1 - alpha)/2 - log(2 pi e)/2.

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "wldp/entry_dist.hpp"
#include "wldp/numerics.hpp"

namespace wldp::gibbs {

/// h(s) = sum_i Lambda(2 v_i s), with equal coefficients grouped so profiles
/// of k identical entries cost one Lambda evaluation per point.
class Hamiltonian {
 public:
  struct Group {
    double coef;
    double count;
  };

  Hamiltonian(EntryDistribution dist, const std::vector<double>& v) : dist_(std::move(dist)) {
    std::map<double, double> grouped;
    for (double c : v) {
      if (!std::isfinite(c)) throw std::invalid_argument("gibbs: tilt coefficients must be finite");
      if (c != 0.0) grouped[c] += 1.0;
    }
    for (const auto& [c, n] : grouped) groups_.push_back({c, n});
  }

  double operator()(double s) const {
    double acc = 0.0;
    for (const auto& g : groups_) acc += g.count * dist_.log_laplace(2.0 * g.coef * s);
    return acc;
  }

  /// d/ds h(s).
  double derivative(double s) const {
    double acc = 0.0;
    for (const auto& g : groups_) acc += g.count * 2.0 * g.coef * dist_.log_laplace(2.0 * g.coef * s, 1);
    return acc;
  }

  bool is_zero() const { return groups_.empty(); }
  double norm2() const {
    double acc = 0.0;
    for (const auto& g : groups_) acc += g.count * g.coef * g.coef;
    return acc;
  }
  /// limsup h(s)/s^2 as |s| -> inf.
  double quadratic_growth() const { return 4.0 * dist_.psi_infty() * norm2(); }
  const EntryDistribution& dist() const { return dist_; }
  const std::vector<Group>& groups() const { return groups_; }

 private:
  EntryDistribution dist_;
  std::vector<Group> groups_;
};

struct GibbsProblem {
  std::vector<double> v;
  EntryDistribution dist;
  double R;  // kInf for the whole line
  double alpha;

  void validate() const {
    if (!(R > 0.0)) throw std::invalid_argument("gibbs: R must be positive");
    if (!(alpha > 0.0)) throw std::invalid_argument("gibbs: alpha must be positive");
    if (alpha > R * R) throw std::invalid_argument("gibbs: alpha exceeds R^2");
    for (double c : v)
      if (!std::isfinite(c)) throw std::invalid_argument("gibbs: tilt coefficients must be finite");
  }
};

namespace detail {

struct Moments {
  double log_z;
  double m2;
  double m4;
};

struct Window {
  double lo;
  double hi;
  double shift;
};

inline constexpr double kQuadTol = 1e-11;
inline constexpr double kWindowDrop = 60.0;

// Region of [-R, R] where the exponent is within kWindowDrop of its max.
inline Window find_window(const Hamiltonian& h, double zeta, double R) {
  const int n = std::clamp(static_cast<int>(64.0 * R) + 1, 257, 8193);
  const double step = 2.0 * R / (n - 1);
  std::vector<double> e(n);
  double m = -kInf;
  for (int i = 0; i < n; ++i) {
    const double s = -R + i * step;
    e[i] = h(s) - zeta * s * s;
    m = std::max(m, e[i]);
  }
  int first = n - 1, last = 0;
  for (int i = 0; i < n; ++i) {
    if (e[i] >= m - kWindowDrop) {
      first = std::min(first, i);
      last = std::max(last, i);
    }
  }
  const double lo = std::max(-R, -R + (first - 1) * step);
  const double hi = std::min(R, -R + (last + 1) * step);
  return {lo, hi, m};
}

// Truncation radius for the whole line: beyond it the integrand is below
// e^{-kWindowDrop} of its peak.
inline double effective_radius(const Hamiltonian& h, double zeta) {
  double L = 16.0;
  for (int k = 0; k < 40; ++k, L *= 2.0) {
    const auto w = find_window(h, zeta, L);
    if (w.lo > -L && w.hi < L) return L;
  }
  throw std::runtime_error("integrand not normalizable");
}

inline Moments moments(const Hamiltonian& h, double zeta, double R, Window* out_window = nullptr) {
  const auto w = find_window(h, zeta, R);
  auto f = [&](double s) {
    const double e = std::exp(h(s) - zeta * s * s - w.shift);
    const double s2 = s * s;
    return std::array<double, 3>{e, s2 * e, s2 * s2 * e};
  };
  const auto I = numerics::adaptive_simpson_vec<3>(f, w.lo, w.hi, kQuadTol, 2, 32);
  if (out_window) *out_window = w;
  return {w.shift + std::log(I[0]), I[1] / I[0], I[2] / I[0]};
}

inline void require_normalizable(const Hamiltonian& h, double zeta) {
  if (!(zeta > 0.0) || !(zeta > h.quadratic_growth())) throw std::domain_error("integrand not normalizable");
}

}  // namespace detail

/// g(zeta) (order 0) or g'(zeta) = -int s^2 dnu^zeta (order 1).
inline double g_value(const GibbsProblem& problem, double zeta, int order) {
  if (order != 0 && order != 1) throw std::invalid_argument("g_value: order must be 0 or 1");
  if (!(problem.R > 0.0)) throw std::invalid_argument("gibbs: R must be positive");
  const Hamiltonian h(problem.dist, problem.v);
  if (problem.R == kInf) {
    detail::require_normalizable(h, zeta);
    if (h.is_zero()) return order == 0 ? 0.5 * std::log(std::numbers::pi / zeta) : -0.5 / zeta;
    const auto m = detail::moments(h, zeta, detail::effective_radius(h, zeta));
    return order == 0 ? m.log_z : -m.m2;
  }
  const auto m = detail::moments(h, zeta, problem.R);
  return order == 0 ? m.log_z : -m.m2;
}

class GibbsSolution {
 public:
  GibbsSolution(Hamiltonian h, double R, double alpha, double zeta, double log_z, double residual,
                double lo, double hi)
      : h_(std::move(h)), R_(R), alpha_(alpha), zeta_(zeta), log_z_(log_z), residual_(residual), lo_(lo), hi_(hi) {
    value_ = log_z_ + alpha_ * zeta_ + 0.5 * (1.0 - alpha_) - 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e);
  }

  double zeta_star() const { return zeta_; }
  double value() const { return value_; }
  double log_normalizer() const { return log_z_; }
  double alpha() const { return alpha_; }
  double R() const { return R_; }
  /// |g'(zeta*) + alpha| at the returned multiplier.
  double residual() const { return residual_; }
  const Hamiltonian& hamiltonian() const { return h_; }
  /// Interval outside which the density is below e^{-60} of its peak.
  double support_lo() const { return lo_; }
  double support_hi() const { return hi_; }

  double density(double s) const {
    if (std::abs(s) > R_) return 0.0;
    return std::exp(h_(s) - zeta_ * s * s - log_z_);
  }

  double moment(int k) const {
    auto f = [&](double s) { return std::pow(s, k) * density(s); };
    return numerics::adaptive_simpson(f, lo_, hi_, 1e-12, 32);
  }

  /// Quantile function on a uniform grid of probability levels (j + 1/2)/n,
  /// from a tabulated CDF on `nodes` points.
  std::vector<double> quantiles(std::size_t n, std::size_t nodes = 40001) const {
    std::vector<double> s(nodes), cdf(nodes, 0.0);
    const double step = (hi_ - lo_) / static_cast<double>(nodes - 1);
    double prev = density(lo_);
    s[0] = lo_;
    for (std::size_t i = 1; i < nodes; ++i) {
      s[i] = lo_ + step * static_cast<double>(i);
      const double cur = density(s[i]);
      cdf[i] = cdf[i - 1] + 0.5 * step * (prev + cur);
      prev = cur;
    }
    const double total = cdf.back();
    for (auto& c : cdf) c /= total;
    std::vector<double> q(n);
    std::size_t j = 1;
    for (std::size_t k = 0; k < n; ++k) {
      const double t = (static_cast<double>(k) + 0.5) / static_cast<double>(n);
      while (j + 1 < nodes && cdf[j] < t) ++j;
      const double c0 = cdf[j - 1], c1 = cdf[j];
      const double frac = c1 > c0 ? (t - c0) / (c1 - c0) : 0.5;
      q[k] = s[j - 1] + frac * (s[j] - s[j - 1]);
    }
    return q;
  }

 private:
  Hamiltonian h_;
  double R_;
  double alpha_;
  double zeta_;
  double log_z_;
  double residual_;
  double lo_;
  double hi_;
  double value_ = 0.0;
};

namespace detail {

inline GibbsSolution gaussian_solution(const Hamiltonian& h, double alpha) {
  // h = 0 on the whole line: the optimizer is N(0, alpha).
  const double zeta = 0.5 / alpha;
  const double log_z = 0.5 * std::log(std::numbers::pi / zeta);
  const double r = 40.0 * std::sqrt(alpha);
  return GibbsSolution(h, kInf, alpha, zeta, log_z, 0.0, -r, r);
}

inline GibbsSolution solve_finite(const Hamiltonian& h, double R, double alpha) {
  constexpr double kBracketLimit = 1e6;
  auto residual = [&](double zeta, Moments& m) {
    m = moments(h, zeta, R);
    return alpha - m.m2;  // increasing in zeta
  };
  Moments m_lo{}, m_hi{};
  double lo = -1.0, hi = 1.0;
  double f_lo = residual(lo, m_lo);
  double f_hi = residual(hi, m_hi);
  while (f_hi < 0.0) {
    lo = hi;
    f_lo = f_hi;
    hi *= 2.0;
    if (hi > kBracketLimit) throw std::runtime_error("multiplier bracket failure");
    f_hi = residual(hi, m_hi);
  }
  while (f_lo > 0.0) {
    hi = lo;
    f_hi = f_lo;
    lo *= 2.0;
    if (-lo > kBracketLimit) throw std::runtime_error("multiplier bracket failure");
    f_lo = residual(lo, m_lo);
  }
  // Safeguarded Newton: f'(zeta) = Var(s^2) under nu^zeta; fall back to
  // bisection whenever the step leaves the bracket.
  double zeta = 0.5 * (lo + hi);
  Moments m{};
  double f = residual(zeta, m);
  for (int it = 0; it < 200; ++it) {
    if (std::abs(f) < 1e-13 * std::max(1.0, alpha)) break;
    if (f < 0.0) lo = zeta; else hi = zeta;
    if (hi - lo <= 1e-15 * std::max(1.0, std::abs(zeta))) break;
    const double slope = m.m4 - m.m2 * m.m2;
    double next = slope > 0.0 ? zeta - f / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    zeta = next;
    f = residual(zeta, m);
  }
  Window w{};
  const auto final_m = moments(h, zeta, R, &w);
  return GibbsSolution(h, R, alpha, zeta, final_m.log_z, std::abs(alpha - final_m.m2), w.lo, w.hi);
}

}  // namespace detail

/// Solution at the first R in 16, 32, ... where Phi_R moves by < 1e-8.
inline GibbsSolution solve_unbounded(const Hamiltonian& h, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("gibbs: alpha must be positive");
  if (h.is_zero()) return detail::gaussian_solution(h, alpha);
  double R = 16.0;
  while (R * R < alpha) R *= 2.0;
  auto prev = detail::solve_finite(h, R, alpha);
  constexpr double kMaxR = 65536.0;
  while (true) {
    R *= 2.0;
    if (R > kMaxR) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "phi_unbounded: no convergence up to R = 2^16 (last iterates " << prev.value() << ")";
      throw std::runtime_error(msg.str());
    }
    auto cur = detail::solve_finite(h, R, alpha);
    if (std::abs(cur.value() - prev.value()) < 1e-8) return cur;
    prev = std::move(cur);
  }
}

inline GibbsSolution gibbs_solve(const GibbsProblem& problem) {
  problem.validate();
  Hamiltonian h(problem.dist, problem.v);
  if (problem.R == kInf) return solve_unbounded(h, problem.alpha);
  return detail::solve_finite(h, problem.R, problem.alpha);
}

/// Phi_R(v, alpha) for finite R (or the whole line when R == kInf).
inline double phi(const EntryDistribution& dist, const std::vector<double>& v, double alpha, double R) {
  return gibbs_solve(GibbsProblem{v, dist, R, alpha}).value();
}

/// Phi_inf(v, alpha) as the monotone limit of Phi_R.
inline double phi_unbounded(const EntryDistribution& dist, const std::vector<double>& v, double alpha) {
  return solve_unbounded(Hamiltonian(dist, v), alpha).value();
}

/// L2-Wasserstein distance through the quantile coupling on 10^4 levels.
inline double wasserstein2(const GibbsSolution& a, const GibbsSolution& b, std::size_t levels = 10000) {
  const auto qa = a.quantiles(levels);
  const auto qb = b.quantiles(levels);
  double acc = 0.0;
  for (std::size_t k = 0; k < levels; ++k) acc += (qa[k] - qb[k]) * (qa[k] - qb[k]);
  return std::sqrt(acc / static_cast<double>(levels));
}

}  // namespace wldp::gibbs

#endif  // WLDP_GIBBS_HPP
