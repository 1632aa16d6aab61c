#ifndef WLDP_MONTE_CARLO_HPP
#define WLDP_MONTE_CARLO_HPP

// Finite-N spectral experiments on Wigner matrices with entries from an
// EntryDistribution: sampling (optionally under the rank-one exponential
// tilt), top eigenpair extraction, eigenvector localization statistics and
// three experiment kinds (bbp, localization, tail).

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "wldp/entry_dist.hpp"
#include "wldp/rng.hpp"

namespace wldp::mc {

struct Tilt {
  double theta;
  std::vector<double> u;  // unit vector
};

struct WignerSample {
  std::size_t N = 0;
  Eigen::MatrixXd matrix;
  std::string dist;
  std::optional<Tilt> tilt;
};

/// Entry tilt parameter t_ij = 2^{eps_ij} theta sqrt(N) u_i u_j, with
/// 2^{eps_ij} = sqrt(2) on the diagonal and 2 off it.
inline double entry_tilt(const Tilt& tilt, std::size_t i, std::size_t j, std::size_t N) {
  const double factor = i == j ? std::numbers::sqrt2 : 2.0;
  return factor * tilt.theta * std::sqrt(static_cast<double>(N)) * tilt.u[i] * tilt.u[j];
}

inline void check_tilt(const std::optional<Tilt>& tilt, std::size_t N) {
  if (!tilt) return;
  if (tilt->u.size() != N) throw std::invalid_argument("sample_wigner: tilt vector has wrong dimension");
  if (!(tilt->theta >= 0.0) || !std::isfinite(tilt->theta)) throw std::invalid_argument("sample_wigner: theta must be >= 0");
  double n2 = 0.0;
  for (double x : tilt->u) n2 += x * x;
  if (std::abs(std::sqrt(n2) - 1.0) > 1e-9) throw std::invalid_argument("sample_wigner: tilt vector must be a unit vector");
}

/// H_ij = sqrt(2^{1[i=j]} / N) X_ij with X_ij iid from dist (or its tilt).
template <class Gen>
WignerSample sample_wigner(const EntryDistribution& dist, std::size_t N, const std::optional<Tilt>& tilt, Gen& gen) {
  if (N < 2) throw std::invalid_argument("sample_wigner: N must be >= 2");
  check_tilt(tilt, N);
  WignerSample s;
  s.N = N;
  s.dist = dist.name();
  s.tilt = tilt;
  s.matrix.resize(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
  const double off = 1.0 / std::sqrt(static_cast<double>(N));
  const double diag = std::sqrt(2.0 / static_cast<double>(N));
  for (std::size_t j = 0; j < N; ++j) {
    for (std::size_t i = 0; i <= j; ++i) {
      const double t = tilt ? entry_tilt(*tilt, i, j, N) : 0.0;
      const double x = dist.draw(gen, t) * (i == j ? diag : off);
      s.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = x;
      s.matrix(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = x;
    }
  }
  return s;
}

struct EigenPair {
  double lambda;
  Eigen::VectorXd v;
  double residual;
  std::string method;
};

inline double eigen_residual(const Eigen::MatrixXd& H, double lambda, const Eigen::VectorXd& v) {
  return (H * v - lambda * v).norm();
}

inline EigenPair dense_top(const Eigen::MatrixXd& H) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
  if (es.info() != Eigen::Success) throw std::runtime_error("dense eigensolver failed");
  const Eigen::Index n = H.rows();
  const double lambda = es.eigenvalues()(n - 1);
  Eigen::VectorXd v = es.eigenvectors().col(n - 1);
  return {lambda, v, eigen_residual(H, lambda, v), "dense"};
}

struct LanczosOptions {
  int krylov = 60;
  int max_restarts = 200;
  double tol = 1e-10;
};

/// Top eigenpair by explicitly restarted Lanczos with full
/// reorthogonalization; each restart begins from the current Ritz vector.
/// Returns nullopt when the restart budget is exhausted.
inline std::optional<EigenPair> lanczos_top(const Eigen::MatrixXd& H, const LanczosOptions& opt = {}) {
  const Eigen::Index n = H.rows();
  const int m = static_cast<int>(std::min<Eigen::Index>(opt.krylov, n));
  Eigen::VectorXd start(n);
  Philox4x32 gen(0x1a2c05ULL, 0);
  for (Eigen::Index i = 0; i < n; ++i) start(i) = gen.uniform() - 0.5;
  start.normalize();

  Eigen::MatrixXd V(n, m);
  for (int restart = 0; restart <= opt.max_restarts; ++restart) {
    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(m), beta = Eigen::VectorXd::Zero(m);
    V.col(0) = start;
    int used = m;
    for (int k = 0; k < m; ++k) {
      Eigen::VectorXd w = H * V.col(k);
      alpha(k) = V.col(k).dot(w);
      // Two passes of classical Gram-Schmidt against the whole basis.
      for (int pass = 0; pass < 2; ++pass) w -= V.leftCols(k + 1) * (V.leftCols(k + 1).transpose() * w);
      const double b = w.norm();
      if (k + 1 == m) {
        beta(k) = b;
        break;
      }
      if (b < 1e-14 * std::max(1.0, std::abs(alpha(k)))) {
        used = k + 1;  // invariant subspace found
        beta(k) = 0.0;
        break;
      }
      beta(k) = b;
      V.col(k + 1) = w / b;
    }
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(used, used);
    for (int k = 0; k < used; ++k) {
      T(k, k) = alpha(k);
      if (k + 1 < used) T(k, k + 1) = T(k + 1, k) = beta(k);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    const double theta = es.eigenvalues()(used - 1);
    Eigen::VectorXd y = V.leftCols(used) * es.eigenvectors().col(used - 1);
    y.normalize();
    const double res = eigen_residual(H, theta, y);
    if (res < opt.tol * std::max(1.0, std::abs(theta))) return EigenPair{theta, y, res, "lanczos"};
    start = y;
  }
  return std::nullopt;
}

inline constexpr std::size_t kDenseLimit = 2000;
inline constexpr double kResidualTol = 1e-8;

/// Largest eigenvalue and a unit eigenvector: dense solve for N <= 2000,
/// Lanczos above (with a dense fallback when Lanczos stalls and N allows).
inline EigenPair lambda1_and_vector(const Eigen::MatrixXd& H) {
  if (H.rows() != H.cols() || H.rows() == 0) throw std::invalid_argument("lambda1: matrix must be square and nonempty");
  if (!H.allFinite()) throw std::invalid_argument("lambda1: matrix has non-finite entries");
  const auto N = static_cast<std::size_t>(H.rows());
  EigenPair out;
  if (N <= kDenseLimit) {
    out = dense_top(H);
  } else {
    auto l = lanczos_top(H);
    if (!l) throw std::runtime_error("lambda1: Lanczos did not converge within the restart budget");
    out = std::move(*l);
  }
  if (!(out.residual < kResidualTol * std::max(1.0, std::abs(out.lambda))))
    throw std::runtime_error("lambda1: eigen-residual above tolerance");
  return out;
}

inline EigenPair lambda1_and_vector(const WignerSample& s) { return lambda1_and_vector(s.matrix); }

struct Localization {
  double mass_eta;     // |v^(eta)|_2
  double linf;         // |v|_inf
  std::size_t support_eta;
};

/// Statistics of the part of v above the threshold N^{-1/2 + eta}.
inline Localization eigvec_localization(const Eigen::VectorXd& v, double eta) {
  if (!(eta > 0.0 && eta < 0.25)) throw std::invalid_argument("eigvec_localization: eta must lie in (0, 1/4)");
  if (std::abs(v.norm() - 1.0) > 1e-6) throw std::invalid_argument("eigvec_localization: vector must be unit");
  const double N = static_cast<double>(v.size());
  const double thr = std::pow(N, -0.5 + eta);
  Localization out{0.0, 0.0, 0};
  double m2 = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double a = std::abs(v(i));
    out.linf = std::max(out.linf, a);
    if (a >= thr) {
      m2 += a * a;
      ++out.support_eta;
    }
  }
  out.mass_eta = std::min(1.0, std::sqrt(m2));
  out.linf = std::min(1.0, out.linf);
  return out;
}

enum class Kind { Bbp, Localization, Tail };

inline const char* kind_name(Kind k) {
  switch (k) {
    case Kind::Bbp: return "bbp";
    case Kind::Localization: return "localization";
    case Kind::Tail: return "tail";
  }
  return "?";
}

struct ExperimentConfig {
  Kind kind = Kind::Bbp;
  EntryDistribution dist = EntryDistribution::gaussian();
  std::size_t N = 200;
  std::size_t reps = 20;
  std::uint64_t seed = 1;
  double eta = 0.125;
  double theta = 0.0;                   // tilt strength; 0 = untilted
  std::optional<std::vector<double>> u; // tilt direction, default uniform
  double spike = 0.0;                   // planted d e_1 e_1^T
  double selection = 0.01;              // localization: top fraction kept
  double x = 2.0;                       // tail threshold
  unsigned threads = 1;
};

struct Prediction {
  std::optional<double> value;
  std::string text;
};

struct ConditionalStats {
  std::string label = "selection-conditioned";
  std::size_t selected = 0;
  double lambda1_cutoff = 0.0;
  double linf_conditional = 0.0;
  double linf_unconditional = 0.0;
  double mass_eta_conditional = 0.0;
  double mass_eta_unconditional = 0.0;
  double support_eta_conditional = 0.0;
  double support_eta_unconditional = 0.0;
};

struct TailEstimate {
  std::string status;  // "ok" or "insufficient reps"
  std::string diagnostic;
  double x = 0.0;
  std::size_t count = 0;
  double frequency = 0.0;
  double wilson_lo = 0.0;
  double wilson_hi = 0.0;
  double log_frequency = 0.0;     // log(count / reps)
  double rate_estimate = 0.0;     // -log(count / reps) / N
};

struct MCReport {
  static constexpr int kVersion = 1;
  Kind kind = Kind::Bbp;
  std::string dist;
  std::uint64_t seed = 0;
  std::size_t reps = 0;
  std::size_t N = 0;
  double eta = 0.0;
  double theta = 0.0;
  double spike = 0.0;
  std::vector<double> lambda1;
  double mean = 0.0;
  double stderr_mean = 0.0;
  std::vector<Localization> eigvec;
  std::optional<Prediction> prediction;
  std::optional<ConditionalStats> conditional;
  std::optional<TailEstimate> tail;
};

inline Prediction bbp_prediction(double theta, double spike) {
  if (spike > 0.0) {
    if (spike > 1.0) return {spike + 1.0 / spike, "d + 1/d"};
    return {2.0, "bulk edge 2"};
  }
  if (theta >= 0.5) return {2.0 * theta + 0.5 / theta, "2 theta + 1/(2 theta)"};
  return {std::nullopt, "<= 2 + kappa"};
}

/// Wilson score interval for a binomial proportion at z = 1.96.
inline std::pair<double, double> wilson_interval(std::size_t k, std::size_t n, double z = 1.959963984540054) {
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(k) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2.0 * nn)) / denom;
  const double half = z / denom * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

inline constexpr std::size_t kMinTailCount = 5;

namespace detail {

inline void validate(const ExperimentConfig& c) {
  if (c.reps < 1) throw std::invalid_argument("experiment: reps must be >= 1");
  if (c.N < 2) throw std::invalid_argument("experiment: N must be >= 2");
  if (!(c.eta > 0.0 && c.eta < 0.25)) throw std::invalid_argument("experiment: eta must lie in (0, 1/4)");
  if (!(c.theta >= 0.0)) throw std::invalid_argument("experiment: theta must be >= 0");
  if (c.theta > 0.0 && c.spike != 0.0) throw std::invalid_argument("experiment: tilt and planted spike are exclusive");
  if (!(c.selection > 0.0 && c.selection <= 1.0)) throw std::invalid_argument("experiment: selection must lie in (0, 1]");
}

}  // namespace detail

/// Runs `reps` independent replicas; replica r draws from Philox stream r so
/// the report does not depend on `threads`.
inline MCReport experiment(const ExperimentConfig& cfg) {
  detail::validate(cfg);
  std::optional<Tilt> tilt;
  if (cfg.theta > 0.0) {
    std::vector<double> u = cfg.u.value_or(std::vector<double>(cfg.N, 1.0 / std::sqrt(static_cast<double>(cfg.N))));
    tilt = Tilt{cfg.theta, std::move(u)};
    check_tilt(tilt, cfg.N);
  }

  MCReport rep;
  rep.kind = cfg.kind;
  rep.dist = cfg.dist.name();
  rep.seed = cfg.seed;
  rep.reps = cfg.reps;
  rep.N = cfg.N;
  rep.eta = cfg.eta;
  rep.theta = cfg.theta;
  rep.spike = cfg.spike;
  rep.lambda1.assign(cfg.reps, 0.0);
  rep.eigvec.assign(cfg.reps, Localization{});
  std::vector<std::string> errors(cfg.reps);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t r = next++; r < cfg.reps; r = next++) {
      try {
        Philox4x32 gen(cfg.seed, r);
        auto s = sample_wigner(cfg.dist, cfg.N, tilt, gen);
        if (cfg.spike != 0.0) s.matrix(0, 0) += cfg.spike;
        const auto pair = lambda1_and_vector(s);
        rep.lambda1[r] = pair.lambda;
        rep.eigvec[r] = eigvec_localization(pair.v, cfg.eta);
      } catch (const std::exception& e) {
        errors[r] = e.what();
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(cfg.threads, static_cast<unsigned>(cfg.reps)));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (std::size_t r = 0; r < cfg.reps; ++r)
    if (!errors[r].empty()) throw std::runtime_error("replica " + std::to_string(r) + ": " + errors[r]);

  const double nr = static_cast<double>(cfg.reps);
  rep.mean = std::accumulate(rep.lambda1.begin(), rep.lambda1.end(), 0.0) / nr;
  if (cfg.reps > 1) {
    double ss = 0.0;
    for (double l : rep.lambda1) ss += (l - rep.mean) * (l - rep.mean);
    rep.stderr_mean = std::sqrt(ss / (nr - 1.0) / nr);
  }

  switch (cfg.kind) {
    case Kind::Bbp:
      rep.prediction = bbp_prediction(cfg.theta, cfg.spike);
      break;
    case Kind::Localization: {
      ConditionalStats c;
      std::vector<std::size_t> order(cfg.reps);
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return rep.lambda1[a] > rep.lambda1[b]; });
      c.selected = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(cfg.selection * nr)));
      c.lambda1_cutoff = rep.lambda1[order[c.selected - 1]];
      for (std::size_t r = 0; r < cfg.reps; ++r) {
        c.linf_unconditional += rep.eigvec[r].linf / nr;
        c.mass_eta_unconditional += rep.eigvec[r].mass_eta / nr;
        c.support_eta_unconditional += static_cast<double>(rep.eigvec[r].support_eta) / nr;
      }
      const double ns = static_cast<double>(c.selected);
      for (std::size_t i = 0; i < c.selected; ++i) {
        const auto& e = rep.eigvec[order[i]];
        c.linf_conditional += e.linf / ns;
        c.mass_eta_conditional += e.mass_eta / ns;
        c.support_eta_conditional += static_cast<double>(e.support_eta) / ns;
      }
      rep.conditional = c;
      break;
    }
    case Kind::Tail: {
      TailEstimate t;
      t.x = cfg.x;
      t.count = static_cast<std::size_t>(
          std::count_if(rep.lambda1.begin(), rep.lambda1.end(), [&](double l) { return l >= cfg.x; }));
      t.frequency = static_cast<double>(t.count) / nr;
      std::tie(t.wilson_lo, t.wilson_hi) = wilson_interval(t.count, cfg.reps);
      if (t.count < kMinTailCount) {
        std::ostringstream os;
        os << "observed count " << t.count << " < " << kMinTailCount << " at x = " << cfg.x
           << "; the event is beyond reach with " << cfg.reps << " reps";
        t.status = "insufficient reps";
        t.diagnostic = os.str();
      } else {
        t.status = "ok";
        t.log_frequency = std::log(t.frequency);
        t.rate_estimate = -t.log_frequency / static_cast<double>(cfg.N);
      }
      rep.tail = t;
      break;
    }
  }
  return rep;
}

}  // namespace wldp::mc

#endif  // WLDP_MONTE_CARLO_HPP
