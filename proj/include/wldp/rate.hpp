#ifndef WLDP_RATE_HPP
#define WLDP_RATE_HPP

// Minimax evaluation of the largest-eigenvalue rate function:
//   I(x) = inf_{profile} sup_{theta >= 0} { J(x, theta) - F(theta, q_x(theta)-scaled profile) }
// in three flavours (finite-N, the single-coordinate reduction and the
// two-scale reduction), plus curve generation and detection of the first
// departure from the GOE rate.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "wldp/entry_dist.hpp"
#include "wldp/free_energy.hpp"
#include "wldp/numerics.hpp"
#include "wldp/semicircle.hpp"

namespace wldp::rate {

struct FiniteN {
  std::vector<double> z;
  double N;
  double R;
};

struct Hat {
  double alpha;
};

struct Tilde {
  std::vector<double> w_check;
  double alpha_tilde;
  double R;
  std::optional<double> t;
};

struct LocalizationSpec {
  std::variant<FiniteN, Hat, Tilde> mode;
  double cap = 0.95;  // feasibility bound 1 - rho

  void validate() const {
    if (!(cap > 0.0 && cap < 1.0)) throw std::invalid_argument("localization: cap must lie in (0, 1)");
    constexpr double slack = 1e-12;
    std::visit(
        [&](const auto& m) {
          using M = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<M, FiniteN>) {
            if (!(m.N >= 1.0)) throw std::invalid_argument("localization: N must be >= 1");
            if (!(m.R >= 1.0)) throw std::invalid_argument("localization: R must be >= 1");
            if (free_energy::norm2(m.z) > cap + slack)
              throw std::invalid_argument("localization: |z|^2 exceeds the cap");
          } else if constexpr (std::is_same_v<M, Hat>) {
            if (!(m.alpha >= 0.0 && m.alpha <= cap + slack))
              throw std::invalid_argument("localization: alpha must lie in [0, cap]");
          } else {
            if (!(m.R >= 1.0)) throw std::invalid_argument("localization: R must be >= 1");
            if (!(m.alpha_tilde >= 0.0)) throw std::invalid_argument("localization: alpha_tilde must be >= 0");
            if (free_energy::norm2(m.w_check) + m.alpha_tilde > cap + slack)
              throw std::invalid_argument("localization: |w_check|^2 + alpha_tilde exceeds the cap");
          }
        },
        mode);
  }

  std::string describe() const {
    std::ostringstream os;
    os.precision(6);
    std::visit(
        [&](const auto& m) {
          using M = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<M, FiniteN>) {
            os << "finite_n(|z|^2=" << free_energy::norm2(m.z) << ", support=" << m.z.size() << ", N=" << m.N
               << ", R=" << m.R << ")";
          } else if constexpr (std::is_same_v<M, Hat>) {
            os << "hat(alpha=" << m.alpha << ")";
          } else {
            os << "tilde(|w_check|^2=" << free_energy::norm2(m.w_check) << ", support=" << m.w_check.size()
               << ", alpha_tilde=" << m.alpha_tilde << ", R=" << m.R << ")";
          }
        },
        mode);
    return os.str();
  }
};

struct ThetaOptimum {
  double theta_star;
  double value;
};

inline constexpr double kThetaOffset = 1e-6;
inline constexpr int kThetaGrid = 512;
inline constexpr double kThetaTol = 1e-10;
inline constexpr double kThetaMax = 1024.0;

/// sup_theta { J(x, theta) - penalty(theta) } over theta >= theta_-(x) + tau,
/// with theta_-(x) itself kept as a candidate.
inline ThetaOptimum sup_theta(const semicircle::Site& site, const std::function<double(double)>& penalty,
                              std::optional<double> bracket_hint = std::nullopt) {
  auto objective = [&](double theta) { return site.j(theta) - penalty(theta); };
  const double lo = site.point.theta_minus + kThetaOffset;

  ThetaOptimum best{site.point.theta_minus, objective(site.point.theta_minus)};
  auto consider = [&](double theta, double value) {
    if (value > best.value) best = {theta, value};
  };

  double T = std::max(bracket_hint.value_or(8.0), 2.0 * lo);
  double running = objective(lo);
  consider(lo, running);
  while (true) {
    for (int j = 1; j <= 16; ++j) {
      const double th = lo + (T - lo) * j / 16.0;
      const double v = objective(th);
      running = std::max(running, v);
    }
    if (objective(T) <= running - 1.0) break;
    T *= 2.0;
    if (T > kThetaMax) throw std::runtime_error("unbounded objective");
  }

  const auto grid = numerics::linspace(lo, T, kThetaGrid);
  std::vector<double> vals(grid.size());
  std::size_t arg = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    vals[i] = objective(grid[i]);
    if (vals[i] > vals[arg]) arg = i;
  }
  consider(grid[arg], vals[arg]);
  const double a = grid[arg == 0 ? 0 : arg - 1];
  const double b = grid[std::min(arg + 1, grid.size() - 1)];
  if (b > a) {
    const auto refined = numerics::golden_section_max(objective, a, b, kThetaTol);
    consider(refined.arg, refined.value);
  }
  return best;
}

inline ThetaOptimum sup_theta(double x, const std::function<double(double)>& penalty,
                              std::optional<double> bracket_hint = std::nullopt) {
  return sup_theta(semicircle::Site(x), penalty, bracket_hint);
}

namespace detail {

inline std::vector<double> scale(const std::vector<double>& v, double c) {
  std::vector<double> out(v);
  for (auto& e : out) e *= c;
  return out;
}

}  // namespace detail

/// Penalty theta -> F(theta, profile scaled by the overlap) for a given spec.
/// `hat` may be supplied to reuse a tabulated F^ across calls.
inline std::function<double(double)> make_penalty(const EntryDistribution& dist, const semicircle::Site& site,
                                                  const LocalizationSpec& spec,
                                                  std::shared_ptr<const free_energy::HatFreeEnergy> hat = nullptr) {
  return std::visit(
      [&](const auto& m) -> std::function<double(double)> {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, Hat>) {
          const double alpha = m.alpha;
          if (alpha == 0.0) return [](double theta) { return theta * theta; };
          if (!hat) hat = std::make_shared<free_energy::HatFreeEnergy>(dist);
          return [hat, site, alpha](double theta) { return (*hat)(theta, site.q2(theta) * alpha); };
        } else if constexpr (std::is_same_v<M, FiniteN>) {
          return [dist, site, m](double theta) {
            return free_energy::f_restricted(dist, theta, detail::scale(m.z, site.q(theta)), m.N, m.R);
          };
        } else {
          return [dist, site, m](double theta) {
            const double q = site.q(theta);
            return free_energy::f_tilde(dist, theta, detail::scale(m.w_check, q), q * q * m.alpha_tilde, m.R, m.t);
          };
        }
      },
      spec.mode);
}

inline ThetaOptimum joint_rate(const EntryDistribution& dist, const semicircle::Site& site,
                               const LocalizationSpec& spec,
                               std::shared_ptr<const free_energy::HatFreeEnergy> hat = nullptr) {
  spec.validate();
  return sup_theta(site, make_penalty(dist, site, spec, std::move(hat)));
}

inline ThetaOptimum joint_rate(const EntryDistribution& dist, double x, const LocalizationSpec& spec) {
  return joint_rate(dist, semicircle::Site(x), spec);
}

enum class Mode { FiniteN, Hat, Tilde };

inline const char* mode_name(Mode m) {
  switch (m) {
    case Mode::FiniteN: return "finite_n";
    case Mode::Hat: return "hat";
    case Mode::Tilde: return "tilde";
  }
  return "?";
}

/// Search settings for the outer infimum.
struct RateOptions {
  Mode mode = Mode::Hat;
  double cap = 0.95;
  // Hat
  int alpha_grid = 201;
  // FiniteN / Tilde
  double N = 1e6;
  std::optional<double> R;               // default N^{1/5}
  std::optional<std::vector<int>> k_values;  // default 1, 2, 4, ..., ceil(sqrt N)
  int mass_grid = 101;                   // c^2 grid on [0, cap]
  int alpha_tilde_grid = 21;             // Tilde only
  std::optional<double> xi;              // Tilde coordinate threshold, default N^{-0.05}
  std::optional<double> t;               // Tilde: replace psi_max by psi(t)

  double radius() const { return R.value_or(std::pow(N, 0.2)); }
  double threshold() const { return xi.value_or(std::pow(N, -0.05)); }
  std::vector<int> supports() const {
    if (k_values) return *k_values;
    std::vector<int> ks;
    const int top = static_cast<int>(std::ceil(std::sqrt(N)));
    for (int k = 1; k < top; k *= 2) ks.push_back(k);
    ks.push_back(top);
    return ks;
  }
};

struct RatePoint {
  double x = 0.0;
  double rate = kInf;
  double theta_star = std::numeric_limits<double>::quiet_NaN();
  std::optional<LocalizationSpec> minimizer;
  double goe_rate = kInf;
  std::vector<std::string> warnings;
  std::string error;  // non-empty when the evaluation failed

  bool ok() const { return error.empty(); }
  /// Localized mass of the minimizer (alpha, |z|^2 or |w_check|^2 + alpha_tilde).
  double localized_mass() const {
    if (!minimizer) return std::numeric_limits<double>::quiet_NaN();
    return std::visit(
        [](const auto& m) {
          using M = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<M, Hat>) return m.alpha;
          else if constexpr (std::is_same_v<M, FiniteN>) return free_energy::norm2(m.z);
          else return free_energy::norm2(m.w_check) + m.alpha_tilde;
        },
        minimizer->mode);
  }
};

inline constexpr double kTieTol = 1e-9;
inline constexpr double kCapWarn = 1e-3;

namespace detail {

struct Candidate {
  double rate;
  double theta;
  LocalizationSpec spec;
  double order_key;  // smaller wins ties
};

inline void keep_best(std::optional<Candidate>& best, Candidate c) {
  if (!best || c.rate < best->rate - kTieTol ||
      (c.rate <= best->rate + kTieTol && c.order_key < best->order_key))
    best = std::move(c);
}

inline std::vector<double> flat_profile(double mass, int k) {
  if (mass <= 0.0) return {};
  return std::vector<double>(static_cast<std::size_t>(k), std::sqrt(mass / k));
}

inline RatePoint hat_point(const EntryDistribution& dist, const semicircle::Site& site, const RateOptions& opt,
                           std::shared_ptr<const free_energy::HatFreeEnergy> hat) {
  if (!hat) hat = std::make_shared<free_energy::HatFreeEnergy>(dist);
  auto eval = [&](double alpha) {
    return joint_rate(dist, site, LocalizationSpec{Hat{alpha}, opt.cap}, hat);
  };
  const auto grid = numerics::linspace(0.0, opt.cap, static_cast<std::size_t>(std::max(opt.alpha_grid, 2)));
  std::vector<ThetaOptimum> vals;
  vals.reserve(grid.size());
  for (double a : grid) vals.push_back(eval(a));

  std::optional<Candidate> best;
  const std::size_t n = grid.size();
  for (std::size_t i = 0; i < n; ++i) {
    const bool left_ok = i == 0 || vals[i].value <= vals[i - 1].value;
    const bool right_ok = i + 1 == n || vals[i].value <= vals[i + 1].value;
    if (!(left_ok && right_ok)) continue;
    keep_best(best, {vals[i].value, vals[i].theta_star, {Hat{grid[i]}, opt.cap}, grid[i]});
    const double a = grid[i == 0 ? 0 : i - 1];
    const double b = grid[std::min(i + 1, n - 1)];
    auto f = [&](double alpha) { return eval(alpha).value; };
    const auto r = numerics::golden_section_min(f, a, b, 1e-7);
    const auto at = eval(r.arg);
    keep_best(best, {at.value, at.theta_star, {Hat{r.arg}, opt.cap}, r.arg});
  }
  RatePoint p;
  p.rate = best->rate;
  p.theta_star = best->theta;
  p.minimizer = best->spec;
  return p;
}

inline RatePoint family_point(const EntryDistribution& dist, const semicircle::Site& site, const RateOptions& opt) {
  const double R = opt.radius();
  const auto masses = numerics::linspace(0.0, opt.cap, static_cast<std::size_t>(std::max(opt.mass_grid, 2)));
  const auto ks = opt.supports();
  std::optional<Candidate> best;

  if (opt.mode == Mode::FiniteN) {
    for (double c2 : masses) {
      for (int k : ks) {
        if (c2 == 0.0 && k != ks.front()) continue;
        LocalizationSpec spec{FiniteN{flat_profile(c2, k), opt.N, R}, opt.cap};
        const auto r = joint_rate(dist, site, spec);
        keep_best(best, {r.value, r.theta_star, spec, c2 + 1e-6 * k});
      }
    }
  } else {
    const double xi = opt.threshold();
    const auto alphas =
        numerics::linspace(0.0, opt.cap, static_cast<std::size_t>(std::max(opt.alpha_tilde_grid, 2)));
    for (double at : alphas) {
      for (double c2 : masses) {
        if (c2 + at > opt.cap + 1e-12) continue;
        for (int k : ks) {
          if (c2 == 0.0 && k != ks.front()) continue;
          if (c2 > 0.0 && std::sqrt(c2 / k) < xi) continue;
          LocalizationSpec spec{Tilde{flat_profile(c2, k), at, R, opt.t}, opt.cap};
          const auto r = joint_rate(dist, site, spec);
          keep_best(best, {r.value, r.theta_star, spec, c2 + at + 1e-6 * k});
        }
      }
    }
  }
  RatePoint p;
  p.rate = best->rate;
  p.theta_star = best->theta;
  p.minimizer = best->spec;
  p.warnings.push_back("outer infimum restricted to flat profiles c 1_[k]/sqrt(k)");
  return p;
}

}  // namespace detail

/// Rate at x. Points below the bulk edge return the +inf sentinel.
inline RatePoint rate_point(const EntryDistribution& dist, double x, const RateOptions& opt,
                            std::shared_ptr<const free_energy::HatFreeEnergy> hat = nullptr) {
  if (!(opt.cap > 0.0 && opt.cap < 1.0)) throw std::invalid_argument("rate: cap must lie in (0, 1)");
  if (std::isnan(x)) throw std::invalid_argument("rate: x is NaN");
  if (x < 2.0) {
    RatePoint p;
    p.x = x;
    return p;
  }
  const semicircle::Site site(x);
  RatePoint p = opt.mode == Mode::Hat ? detail::hat_point(dist, site, opt, std::move(hat))
                                      : detail::family_point(dist, site, opt);
  p.x = x;
  p.goe_rate = semicircle::goe_rate(x);
  if (p.localized_mass() >= opt.cap - kCapWarn) p.warnings.push_back("minimizer within 1e-3 of the cap");
  return p;
}

struct RateCurve {
  std::vector<double> grid;
  std::vector<RatePoint> points;
  std::optional<double> x_mu;

  bool ok() const {
    return std::all_of(points.begin(), points.end(), [](const RatePoint& p) { return p.ok(); });
  }
  std::vector<std::string> diagnostics() const {
    std::vector<std::string> out;
    for (const auto& p : points) {
      if (p.ok()) continue;
      std::ostringstream os;
      os.precision(17);
      os << "x=" << p.x << ": " << p.error;
      out.push_back(os.str());
    }
    return out;
  }
};

/// Smallest grid x where the GOE rate exceeds the computed rate by more than tol.
inline std::optional<double> detect_x_mu(const std::vector<RatePoint>& points, double tol) {
  for (const auto& p : points) {
    if (!p.ok() || p.x < 2.0) continue;
    if (p.goe_rate - p.rate > tol) return p.x;
  }
  return std::nullopt;
}

/// Evaluates every grid point; output is independent of the thread count.
inline RateCurve rate_curve(const EntryDistribution& dist, const std::vector<double>& x_grid, const RateOptions& opt,
                            double tol = 1e-3, unsigned threads = 1) {
  if (!std::is_sorted(x_grid.begin(), x_grid.end())) throw std::invalid_argument("rate_curve: grid must be sorted");
  RateCurve curve;
  curve.grid = x_grid;
  curve.points.resize(x_grid.size());
  std::shared_ptr<const free_energy::HatFreeEnergy> hat;
  if (opt.mode == Mode::Hat) hat = std::make_shared<free_energy::HatFreeEnergy>(dist);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < x_grid.size(); i = next++) {
      try {
        curve.points[i] = rate_point(dist, x_grid[i], opt, hat);
      } catch (const std::exception& e) {
        RatePoint p;
        p.x = x_grid[i];
        p.rate = std::numeric_limits<double>::quiet_NaN();
        p.goe_rate = semicircle::goe_rate(x_grid[i]);
        p.error = e.what();
        curve.points[i] = std::move(p);
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(x_grid.size())));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  curve.x_mu = detect_x_mu(curve.points, tol);
  return curve;
}

/// Grid start, start + step, ... up to stop (inclusive within half a step).
inline std::vector<double> arithmetic_grid(double start, double stop, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("grid: step must be positive");
  if (stop < start) throw std::invalid_argument("grid: stop must be >= start");
  const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 0.5)) + 1;
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = start + static_cast<double>(i) * step;
  return g;
}

}  // namespace wldp::rate

#endif  // WLDP_RATE_HPP
