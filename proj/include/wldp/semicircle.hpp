#ifndef WLDP_SEMICIRCLE_HPP
#define WLDP_SEMICIRCLE_HPP

// Semicircle-law quantities at a point x >= 2 outside the bulk: the roots
// theta_-(x) <= 1/2 <= theta_+(x) of x = 2 theta + 1/(2 theta), the Stieltjes
// transform, the log-potential, the quenched spherical-integral limit
// J(x, theta), the overlap q_x(theta) and the GOE rate.

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "wldp/numerics.hpp"

namespace wldp::semicircle {

struct SpectralPoint {
  double x;
  double theta_minus;
  double theta_plus;

  /// G_sigma(x) = int dsigma(l) / (x - l) = 2 theta_-.
  double stieltjes() const { return 2.0 * theta_minus; }
};

inline void require_outside_bulk(double x, const char* what) {
  if (!(x >= 2.0)) throw std::domain_error(std::string(what) + ": x must be >= 2");
}

inline SpectralPoint theta_roots(double x) {
  require_outside_bulk(x, "theta_roots");
  const double disc = std::sqrt(x * x - 4.0);
  // theta_- via the product of roots avoids cancellation for large x.
  const double plus = 0.25 * (x + disc);
  return {x, 0.25 / plus, plus};
}

/// int log(x - l) dsigma(l). Uses l = 2 cos(phi), which turns the density
/// sqrt(4 - l^2) / (2 pi) dl into (2/pi) sin^2(phi) dphi on [0, pi].
inline double log_potential(double x) {
  require_outside_bulk(x, "log_potential");
  auto integrand = [x](double phi) {
    const double s = std::sin(phi);
    if (s == 0.0) return 0.0;
    const double gap = x - 2.0 * std::cos(phi);
    if (gap <= 0.0) return 0.0;  // x = 2, phi = 0: log singularity times sin^2 -> 0
    return std::log(gap) * s * s;
  };
  return 2.0 / std::numbers::pi * numerics::adaptive_simpson(integrand, 0.0, std::numbers::pi, 1e-12, 32, 50);
}

/// I^gamma(x) = (1/2) int_2^x sqrt(y^2 - 4) dy, +inf below the bulk edge.
inline double goe_rate(double x) {
  if (std::isnan(x)) return x;
  if (x < 2.0) return kInf;
  if (x == kInf) return kInf;
  const double r = std::sqrt(x * x - 4.0);
  return 0.5 * (0.5 * x * r - 2.0 * std::log(0.5 * (x + r)));
}

/// J(x, theta) with the log-potential precomputed (hot loops evaluate many
/// theta at a fixed x).
inline double j_value(const SpectralPoint& pt, double log_pot, double theta) {
  if (theta < 0.0) throw std::domain_error("j_value: theta must be >= 0");
  if (theta <= pt.theta_minus) return theta * theta;
  return theta * pt.x - 0.5 * log_pot - 0.5 * std::log(2.0 * theta) - 0.5;
}

inline double j_value(double x, double theta) {
  const auto pt = theta_roots(x);
  return j_value(pt, log_potential(x), theta);
}

/// q_x(theta) = (1 - theta_-/theta)_+^{1/2}.
inline double overlap(const SpectralPoint& pt, double theta) {
  if (theta <= pt.theta_minus) return 0.0;
  return std::sqrt(1.0 - pt.theta_minus / theta);
}

inline double overlap(double x, double theta) {
  if (theta < 0.0) throw std::domain_error("overlap: theta must be >= 0");
  return overlap(theta_roots(x), theta);
}

/// Precomputed per-x data used by the rate evaluators.
struct Site {
  SpectralPoint point;
  double log_pot;

  explicit Site(double x) : point(theta_roots(x)), log_pot(log_potential(x)) {}

  double j(double theta) const { return j_value(point, log_pot, theta); }
  double q(double theta) const { return overlap(point, theta); }
  double q2(double theta) const { return theta <= point.theta_minus ? 0.0 : 1.0 - point.theta_minus / theta; }
};

}  // namespace wldp::semicircle

#endif  // WLDP_SEMICIRCLE_HPP
