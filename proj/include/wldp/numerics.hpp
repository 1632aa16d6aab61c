#ifndef WLDP_NUMERICS_HPP
#define WLDP_NUMERICS_HPP

// Small numerical kernels shared by every module: adaptive Simpson
// quadrature (scalar and vector-valued), golden-section search, and
// stable log-sum-exp helpers.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace wldp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

namespace numerics {

/// log(exp(a) + exp(b)) without overflow.
inline double log_add_exp(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

inline double log_sum_exp(std::span<const double> xs) {
  double m = -kInf;
  for (double x : xs) m = std::max(m, x);
  if (m == -kInf || m == kInf) return m;
  double acc = 0.0;
  for (double x : xs) acc += std::exp(x - m);
  return m + std::log(acc);
}

namespace detail {

template <std::size_t K>
using Vec = std::array<double, K>;

template <std::size_t K>
inline Vec<K> axpy(const Vec<K>& a, double s, const Vec<K>& b) {
  Vec<K> out;
  for (std::size_t k = 0; k < K; ++k) out[k] = a[k] + s * b[k];
  return out;
}

inline constexpr double kRelativeFloor = 1e-12;

template <std::size_t K, class F>
void simpson_recurse(F& f, double a, double b, const Vec<K>& fa, const Vec<K>& fm,
                     const Vec<K>& fb, const Vec<K>& whole, double tol, std::size_t checked,
                     int depth, Vec<K>& acc) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const Vec<K> flm = f(lm);
  const Vec<K> frm = f(rm);
  const double h6 = (b - a) / 12.0;
  Vec<K> left, right;
  double err = 0.0;
  double mag = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    left[k] = h6 * (fa[k] + 4.0 * flm[k] + fm[k]);
    right[k] = h6 * (fm[k] + 4.0 * frm[k] + fb[k]);
    if (k < checked) {
      err = std::max(err, std::abs(left[k] + right[k] - whole[k]));
      mag = std::max(mag, std::abs(left[k]) + std::abs(right[k]));
    }
  }
  // Integrands of the form exp(large - large) carry rounding noise well above
  // machine epsilon, so a relative floor stops bisection that cannot help.
  const double floor = kRelativeFloor * mag;
  if (depth <= 0 || err <= std::max(15.0 * tol, floor) || lm <= a || rm >= b) {
    for (std::size_t k = 0; k < K; ++k)
      acc[k] += left[k] + right[k] + (left[k] + right[k] - whole[k]) / 15.0;
    return;
  }
  simpson_recurse<K>(f, a, m, fa, flm, fm, left, 0.5 * tol, checked, depth - 1, acc);
  simpson_recurse<K>(f, m, b, fm, frm, fb, right, 0.5 * tol, checked, depth - 1, acc);
}

}  // namespace detail

/// Vector-valued adaptive Simpson on [a, b]. The interval is first split into
/// `panels` equal pieces; each piece is refined until the Richardson error of
/// the first `checked` components is below its share of `abs_tol`.
template <std::size_t K, class F>
std::array<double, K> adaptive_simpson_vec(F&& f, double a, double b, double abs_tol,
                                           std::size_t checked = K, int panels = 16,
                                           int max_depth = 30) {
  std::array<double, K> acc{};
  if (!(b > a)) return acc;
  const double width = (b - a) / panels;
  const double panel_tol = abs_tol / panels;
  auto fa = f(a);
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * width;
    const double hi = (p + 1 == panels) ? b : lo + width;
    const double mid = 0.5 * (lo + hi);
    const auto fm = f(mid);
    const auto fb = f(hi);
    std::array<double, K> whole;
    for (std::size_t k = 0; k < K; ++k) whole[k] = (hi - lo) / 6.0 * (fa[k] + 4.0 * fm[k] + fb[k]);
    detail::simpson_recurse<K>(f, lo, hi, fa, fm, fb, whole, panel_tol, checked, max_depth, acc);
    fa = fb;
  }
  return acc;
}

template <class F>
double adaptive_simpson(F&& f, double a, double b, double abs_tol, int panels = 16,
                        int max_depth = 30) {
  auto wrapped = [&f](double x) { return std::array<double, 1>{f(x)}; };
  return adaptive_simpson_vec<1>(wrapped, a, b, abs_tol, 1, panels, max_depth)[0];
}

struct ScalarOptimum {
  double arg;
  double value;
};

/// Golden-section search for a maximum of a unimodal function on [a, b].
template <class F>
ScalarOptimum golden_section_max(F&& f, double a, double b, double x_tol = 1e-10,
                                 int max_iter = 300) {
  constexpr double inv_phi = 0.6180339887498948482;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < max_iter && (b - a) > x_tol; ++it) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return fc >= fd ? ScalarOptimum{c, fc} : ScalarOptimum{d, fd};
}

template <class F>
ScalarOptimum golden_section_min(F&& f, double a, double b, double x_tol = 1e-10,
                                 int max_iter = 300) {
  auto neg = [&f](double x) { return -f(x); };
  auto r = golden_section_max(neg, a, b, x_tol, max_iter);
  return {r.arg, -r.value};
}

/// n equally spaced points on [a, b], endpoints included.
inline std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = a;
    return out;
  }
  for (std::size_t i = 0; i < n; ++i)
    out[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  out.back() = b;
  return out;
}

}  // namespace numerics
}  // namespace wldp

#endif  // WLDP_NUMERICS_HPP
