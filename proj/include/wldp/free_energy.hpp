#ifndef WLDP_FREE_ENERGY_HPP
#define WLDP_FREE_ENERGY_HPP

// Restricted annealed free energies of the spherical spin glass driven by a
// Wigner matrix: the finite-N form F_{N,R}(theta, w), its localized part,
// the N-free single-coordinate reduction F^(theta, alpha) and the two-scale
// reduction F~(theta, w_check, alpha_tilde).

#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <vector>

#include "wldp/entry_dist.hpp"
#include "wldp/gibbs.hpp"

namespace wldp::free_energy {

inline double norm2(const std::vector<double>& w) {
  double acc = 0.0;
  for (double x : w) acc += x * x;
  return acc;
}

/// (1/N) sum_{i<=j} Lambda(2^{eps_ij} theta sqrt(N) w_i w_j), with
/// 2^{eps_ij} = sqrt(2) on the diagonal and 2 off it. Equal coordinates are
/// grouped, which keeps flat profiles O(1).
inline double f_loc(const EntryDistribution& dist, double theta, const std::vector<double>& w, double N) {
  std::map<double, double> groups;
  for (double x : w)
    if (x != 0.0) groups[x] += 1.0;
  const double scale = theta * std::sqrt(N);
  double acc = 0.0;
  for (auto a = groups.begin(); a != groups.end(); ++a) {
    const double wa = a->first, ma = a->second;
    acc += ma * dist.log_laplace(std::numbers::sqrt2 * scale * wa * wa);
    acc += 0.5 * ma * (ma - 1.0) * dist.log_laplace(2.0 * scale * wa * wa);
    for (auto b = std::next(a); b != groups.end(); ++b)
      acc += ma * b->second * dist.log_laplace(2.0 * scale * wa * b->first);
  }
  return acc / N;
}

namespace detail {

inline void check_common(double theta, double N, double R) {
  if (!(theta >= 0.0)) throw std::domain_error("free energy: theta must be >= 0");
  if (!(N >= 1.0)) throw std::domain_error("free energy: N must be >= 1");
  if (!(R >= 1.0)) throw std::domain_error("free energy: R must be >= 1");
}

inline std::vector<double> scaled(const std::vector<double>& w, double c) {
  std::vector<double> out(w);
  for (auto& x : out) x *= c;
  return out;
}

}  // namespace detail

/// Norms within this distance of 1 use the norm-one branch F = F_loc.
inline constexpr double kUnitNormClamp = 1e-9;

/// F_{N,R}(theta, w) = theta^2 (1-|w|^2)^2 + F_loc + Phi_R(theta w, 1-|w|^2) - |w|^2/2.
inline double f_restricted(const EntryDistribution& dist, double theta, const std::vector<double>& w, double N,
                           double R) {
  detail::check_common(theta, N, R);
  const double m = norm2(w);
  if (m > 1.0 + 1e-12) throw std::domain_error("f_restricted: |w| must be <= 1");
  const double floc = f_loc(dist, theta, w, N);
  if (std::sqrt(m) > 1.0 - kUnitNormClamp) return floc;
  const double beta = 1.0 - m;
  const double phi = gibbs::phi(dist, detail::scaled(w, theta), beta, R);
  return theta * theta * beta * beta + floc + phi - 0.5 * m;
}

/// F^(theta, alpha) = theta^2 [(1-alpha)^2 + 2 psi_inf alpha^2] + Phi_inf(theta sqrt(alpha) e_1, 1-alpha) - alpha/2.
inline double f_hat(const EntryDistribution& dist, double theta, double alpha) {
  if (!(theta >= 0.0)) throw std::domain_error("f_hat: theta must be >= 0");
  if (!(alpha >= 0.0 && alpha < 1.0)) throw std::domain_error("f_hat: alpha must lie in [0, 1)");
  const double quad = theta * theta * ((1.0 - alpha) * (1.0 - alpha) + 2.0 * dist.psi_infty() * alpha * alpha);
  const double phi = gibbs::phi_unbounded(dist, {theta * std::sqrt(alpha)}, 1.0 - alpha);
  return quad + phi - 0.5 * alpha;
}

/// F~_{N,R}(theta, w_check, alpha_tilde); psi_max is replaced by psi(t) when t is given.
inline double f_tilde(const EntryDistribution& dist, double theta, const std::vector<double>& w_check,
                      double alpha_tilde, double R, std::optional<double> t = std::nullopt) {
  if (!(theta >= 0.0)) throw std::domain_error("f_tilde: theta must be >= 0");
  if (!(R >= 1.0)) throw std::domain_error("f_tilde: R must be >= 1");
  if (!(alpha_tilde >= 0.0 && alpha_tilde <= 1.0)) throw std::domain_error("f_tilde: alpha_tilde must lie in [0, 1]");
  const double cha = norm2(w_check);
  const double beta = 1.0 - alpha_tilde - cha;
  if (beta < 0.0) throw std::domain_error("f_tilde: beta = 1 - alpha_tilde - |w_check|^2 is negative");
  if (beta == 0.0) throw std::domain_error("f_tilde: beta = 0 leaves no delocalized mass");
  const double psi_loc = t ? dist.psi(*t) : dist.psi_max();
  const double bracket = beta * beta + 2.0 * beta * alpha_tilde + 2.0 * psi_loc * alpha_tilde * alpha_tilde +
                         2.0 * dist.psi_infty() * (cha * cha + 2.0 * alpha_tilde * cha);
  const double phi = gibbs::phi(dist, detail::scaled(w_check, theta), beta, R);
  return theta * theta * bracket + phi - 0.5 * (1.0 - beta);
}

/// Fast evaluator of F^ for rate sweeps.
///
/// By the dilation identity Phi_inf(v e_1, b) = phi1(v sqrt(b)) + (1-b)/2 + log(b)/2
/// with phi1(s) = Phi_inf(s e_1, 1), so
///   F^(theta, alpha) = theta^2 [(1-alpha)^2 + 2 psi_inf alpha^2] + phi1(theta sqrt(alpha(1-alpha))) + log(1-alpha)/2.
/// phi1 is tabulated on a uniform grid with exact slopes (envelope theorem:
/// phi1'(s) = int 2y Lambda'(2sy) dnu*(y)) and interpolated by cubic Hermite
/// segments. Segments are filled lazily and are thread-safe.
class HatFreeEnergy {
 public:
  static constexpr double kSpacing = 1.0 / 128.0;
  static constexpr int kNodesPerSegment = 128;
  static constexpr int kSegments = 32;  // table covers s in [0, 32)

  explicit HatFreeEnergy(EntryDistribution dist)
      : dist_(std::move(dist)), segments_(std::make_unique<Segment[]>(kSegments)) {}

  const EntryDistribution& dist() const { return dist_; }

  double operator()(double theta, double alpha) const {
    if (!(alpha >= 0.0 && alpha < 1.0)) throw std::domain_error("f_hat: alpha must lie in [0, 1)");
    const double quad = theta * theta * ((1.0 - alpha) * (1.0 - alpha) + 2.0 * dist_.psi_infty() * alpha * alpha);
    if (alpha == 0.0) return quad;
    return quad + unit_phi(theta * std::sqrt(alpha * (1.0 - alpha))) + 0.5 * std::log1p(-alpha);
  }

  /// phi1(s) = Phi_inf(s e_1, 1), s >= 0.
  double unit_phi(double s) const {
    if (s == 0.0) return 0.0;
    const double u = s / kSpacing;
    const int seg = static_cast<int>(u) / kNodesPerSegment;
    if (seg >= kSegments) return direct(s).first;
    const Segment& table = segment(seg);
    const int local = static_cast<int>(u) - seg * kNodesPerSegment;
    const double t = u - static_cast<double>(seg * kNodesPerSegment + local);
    const double f0 = table.value[local], f1 = table.value[local + 1];
    const double d0 = table.slope[local] * kSpacing, d1 = table.slope[local + 1] * kSpacing;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * f0 + (t3 - 2 * t2 + t) * d0 + (-2 * t3 + 3 * t2) * f1 + (t3 - t2) * d1;
  }

  /// Value and slope of phi1 from a fresh Gibbs solve.
  std::pair<double, double> direct(double s) const {
    if (s == 0.0) return {0.0, 0.0};
    const auto sol = gibbs::solve_unbounded(gibbs::Hamiltonian(dist_, {s}), 1.0);
    auto f = [&](double y) { return 2.0 * y * dist_.log_laplace(2.0 * s * y, 1) * sol.density(y); };
    const double slope = numerics::adaptive_simpson(f, sol.support_lo(), sol.support_hi(), 1e-12, 32);
    return {sol.value(), slope};
  }

 private:
  struct Segment {
    std::once_flag once;
    std::array<double, kNodesPerSegment + 1> value{};
    std::array<double, kNodesPerSegment + 1> slope{};
  };

  const Segment& segment(int seg) const {
    Segment& table = segments_[seg];
    std::call_once(table.once, [&] {
      for (int i = 0; i <= kNodesPerSegment; ++i) {
        const auto [v, d] = direct(static_cast<double>(seg * kNodesPerSegment + i) * kSpacing);
        table.value[i] = v;
        table.slope[i] = d;
      }
    });
    return table;
  }

  EntryDistribution dist_;
  std::unique_ptr<Segment[]> segments_;
};

}  // namespace wldp::free_energy

#endif  // WLDP_FREE_ENERGY_HPP
