// Prints one PASS/FAIL line per acceptance criterion; exits nonzero if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "../oracles.hpp"
#include "wldp/wldp.hpp"

using namespace wldp;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (ok) return;
    pass = false;
    if (!detail.empty()) detail += "; ";
    detail += what;
  }
};

std::string num(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

// Curves are shared between criteria 2 and 7.
rate::RateCurve& fig1_curve() {
  static rate::RateCurve c =
      rate::rate_curve(EntryDistribution::sparse_gaussian(0.5), rate::arithmetic_grid(2.0, 3.5, 0.02), {});
  return c;
}

rate::RateCurve& gaussian_curve() {
  static rate::RateCurve c =
      rate::rate_curve(EntryDistribution::gaussian(), rate::arithmetic_grid(2.0, 3.5, 0.02), {});
  return c;
}

Outcome goe_identity() {
  Outcome o;
  for (double x : {2.1, 2.5, 3.0, 4.0, 5.0}) {
    const auto opt = rate::sup_theta(x, [](double t) { return t * t; });
    o.require(std::abs(opt.value - semicircle::goe_rate(x)) < 1e-6, "value at x=" + num(x));
    o.require(std::abs(opt.theta_star - semicircle::theta_roots(x).theta_plus) < 1e-7, "argmax at x=" + num(x));
  }
  return o;
}

Outcome figure_one() {
  Outcome o;
  const auto& c = fig1_curve();
  o.require(c.ok(), "curve has failed points");
  double max_dev = 0.0;
  for (const auto& p : c.points) {
    if (p.x <= 2.40 + 1e-12) max_dev = std::max(max_dev, std::abs(p.rate - p.goe_rate));
    if (p.x >= 2.70 - 1e-12) o.require(p.rate < p.goe_rate - 1e-3, "(b) not separated at x=" + num(p.x));
  }
  o.require(max_dev < 1e-3, "(a) deviation " + num(max_dev));
  if (!c.x_mu) {
    o.require(false, "(c) no x_mu detected");
    return o;
  }
  o.require(*c.x_mu >= 2.42 && *c.x_mu <= 2.62, "(c) x_mu=" + num(*c.x_mu));
  for (const auto& p : c.points)
    if (p.x == *c.x_mu) {
      const double a = p.localized_mass();
      o.require(a >= 0.24 && a <= 0.32, "(d) alpha*=" + num(a));
      o.detail += o.pass ? "x_mu=" + num(*c.x_mu) + " alpha*=" + num(a) : "";
    }
  return o;
}

Outcome classification() {
  Outcome o;
  o.require(EntryDistribution::rademacher().is_sharp(), "rademacher");
  o.require(!EntryDistribution::sparse_rademacher(0.30).is_sharp(), "sparse_rademacher 0.30");
  o.require(EntryDistribution::sparse_rademacher(0.34).is_sharp(), "sparse_rademacher 0.34");
  for (double p : {0.25, 0.5, 0.75})
    o.require(!EntryDistribution::sparse_gaussian(p).is_sharp(), "sparse_gaussian " + num(p));
  o.require(!EntryDistribution::bernoulli(0.3).is_sharp(), "bernoulli 0.3");
  o.require(EntryDistribution::bernoulli(0.5).is_sharp(), "bernoulli 0.5");
  return o;
}

Outcome gibbs_suite() {
  Outcome o;
  Philox4x32 gen(404, 0);
  const std::vector<EntryDistribution> ds{EntryDistribution::sparse_gaussian(0.5),
                                          EntryDistribution::sparse_rademacher(0.4), EntryDistribution::rademacher(),
                                          EntryDistribution::bernoulli(0.3)};
  auto random_v = [&](double scale) {
    return std::vector<double>{scale * (gen.uniform() - 0.5), scale * (gen.uniform() - 0.5)};
  };
  auto scaled = [](const std::vector<double>& v, double a) {
    std::vector<double> out(v);
    for (auto& e : out) e *= a;
    return out;
  };

  double worst_res = 0.0, worst_scale = 0.0, worst_dil = 0.0, worst_w2 = 0.0, worst_bf = 0.0;
  for (int k = 0; k < 50; ++k) {
    const auto& d = ds[k % ds.size()];
    const double R = 3.0 + 5.0 * gen.uniform();
    const double alpha = 0.3 + 1.2 * gen.uniform();
    const auto v = random_v(0.8);
    const auto sol = gibbs::gibbs_solve({v, d, R, alpha});
    worst_res = std::max(worst_res, sol.residual());
    const double a = std::sqrt(alpha);
    const double rhs = gibbs::phi(d, scaled(v, a), 1.0, R / a) + 0.5 * (1 - alpha) + 0.5 * std::log(alpha);
    worst_scale = std::max(worst_scale, std::abs(sol.value() - rhs));
  }
  for (int k = 0; k < 10; ++k) {
    const auto& d = ds[k % ds.size()];
    const double R = 4.0 + 4.0 * gen.uniform();
    const double a = 0.5 + gen.uniform();
    const auto v = random_v(0.6);
    const double lhs = gibbs::phi(d, scaled(v, a), 1.0, R / a);
    const double rhs = gibbs::phi(d, v, a * a, R) - 0.5 * (1 - a * a) - std::log(a);
    worst_dil = std::max(worst_dil, std::abs(lhs - rhs));
  }
  for (int k = 0; k < 20; ++k) {
    const auto& d = ds[k % ds.size()];
    const double R = 3.0 + 3.0 * gen.uniform();
    const double a = 0.3 + 0.7 * gen.uniform();
    const double b = a + (1.5 - a) * gen.uniform();
    const auto v = random_v(0.6);
    const auto na = gibbs::gibbs_solve({scaled(v, a), d, R / a, 1.0});
    const auto nb = gibbs::gibbs_solve({scaled(v, b), d, R / b, 1.0});
    worst_w2 = std::max(worst_w2, gibbs::wasserstein2(na, nb) - 2.0 * std::sqrt(1.0 - a / b));
  }
  for (int k = 0; k < 10; ++k) {
    const auto& d = ds[k % ds.size()];
    const double R = 2.0 + gen.uniform();
    const double alpha = 0.5 + 0.5 * gen.uniform();
    const auto v = random_v(0.5);
    const double exact = gibbs::phi(d, v, alpha, R);
    const double brute = oracle::brute_force_phi(gibbs::Hamiltonian(d, v), R, alpha, 61);
    worst_bf = std::max(worst_bf, std::abs(brute - exact));
  }
  o.require(worst_res < 1e-9, "residual " + num(worst_res));
  o.require(worst_scale < 1e-6, "scaling " + num(worst_scale));
  o.require(worst_dil < 1e-6, "dilation " + num(worst_dil));
  o.require(worst_w2 <= 1e-3, "W2 excess " + num(worst_w2));
  o.require(worst_bf < 5e-3, "brute force " + num(worst_bf));
  return o;
}

Outcome free_energy_suite() {
  Outcome o;
  using namespace free_energy;
  for (const auto& d : {EntryDistribution::rademacher(), EntryDistribution::sparse_gaussian(0.5),
                        EntryDistribution::sparse_rademacher(0.25)})
    for (double theta : {0.5, 1.0, 2.0})
      for (double R : {6.0, 8.0, 12.0}) {
        const double f = f_restricted(d, theta, {}, 1e4, R);
        o.require(f <= theta * theta + 1e-12 && f >= theta * theta - 10.0 * std::exp(-R * R / 8.0),
                  d.name() + " zero profile theta=" + num(theta) + " R=" + num(R));
      }

  Philox4x32 gen(505, 0);
  const auto sg = EntryDistribution::sparse_gaussian(0.5);
  for (int k = 0; k < 10; ++k) {
    const double theta = 0.3 + 1.5 * gen.uniform();
    const std::vector<double> w{0.6 * gen.uniform(), 0.4 * gen.uniform()};
    o.require(f_restricted(sg, theta, w, 1e4, 4.0) <= f_restricted(sg, theta, w, 1e4, 8.0) + 1e-10, "monotone in R");
  }

  const double alpha = 0.3;
  double prev = -kInf;
  for (double N : {1e3, 1e4, 1e5, 1e6}) {
    const double f = f_restricted(sg, 1.0, {std::sqrt(alpha)}, N, std::pow(N, 0.2));
    o.require(f >= prev - 1e-9, "monotone in N at N=" + num(N));
    prev = f;
  }
  o.require(std::abs(prev - f_hat(sg, 1.0, alpha)) < 5e-3, "limit " + num(prev) + " vs " + num(f_hat(sg, 1.0, alpha)));

  const auto sr = EntryDistribution::sparse_rademacher(0.25);
  for (int k = 0; k < 100; ++k) {
    const double t = 10.0 * (gen.uniform() - 0.5);
    const double theta = 2.0 * gen.uniform();
    const double a = 0.5 * gen.uniform();
    const std::vector<double> w{0.5 * gen.uniform(), 0.3 * gen.uniform()};
    const double R = 3.0 + 5.0 * gen.uniform();
    if (f_tilde(sr, theta, w, a, R, t) > f_tilde(sr, theta, w, a, R) + 1e-12) {
      o.require(false, "F~(t) > F~ at instance " + std::to_string(k));
      break;
    }
  }
  return o;
}

Outcome monte_carlo_suite() {
  Outcome o;
  mc::ExperimentConfig cfg;
  cfg.seed = 2024;
  cfg.N = 300;
  cfg.reps = 50;
  const double goe = mc::experiment(cfg).mean;
  o.require(goe >= 1.85 && goe <= 2.02, "GOE mean " + num(goe));

  cfg.N = 400;
  cfg.reps = 20;
  cfg.theta = 1.0;
  const double bbp = mc::experiment(cfg).mean;
  o.require(bbp >= 2.4 && bbp <= 2.6, "BBP theta=1 mean " + num(bbp));
  cfg.theta = 0.3;
  const double sub = mc::experiment(cfg).mean;
  o.require(sub >= 1.9 && sub <= 2.1, "BBP theta=0.3 mean " + num(sub));

  cfg.theta = 0.0;
  cfg.spike = 3.0;
  const double spike = mc::experiment(cfg).mean;
  o.require(std::abs(spike - 10.0 / 3.0) < 0.15, "spike mean " + num(spike));

  mc::ExperimentConfig loc;
  loc.kind = mc::Kind::Localization;
  loc.dist = EntryDistribution::sparse_gaussian(0.5);
  loc.N = 300;
  loc.reps = 2000;
  loc.eta = 0.1;
  loc.selection = 0.01;
  loc.seed = 11;
  const auto c = *mc::experiment(loc).conditional;
  o.require(c.linf_conditional > c.linf_unconditional,
            "linf conditional " + num(c.linf_conditional) + " vs " + num(c.linf_unconditional));
  return o;
}

Outcome curve_properties() {
  Outcome o;
  for (const auto* c : {&fig1_curve(), &gaussian_curve()}) {
    o.require(c->ok(), "curve has failed points");
    for (std::size_t i = 0; i < c->points.size(); ++i) {
      const auto& p = c->points[i];
      o.require(p.rate >= -1e-6 && p.rate <= p.goe_rate + 1e-6, "bounds at x=" + num(p.x));
      if (i > 0) o.require(p.rate >= c->points[i - 1].rate - 1e-6, "monotonicity at x=" + num(p.x));
    }
  }
  double gauss_dev = 0.0;
  for (const auto& p : gaussian_curve().points) gauss_dev = std::max(gauss_dev, std::abs(p.rate - p.goe_rate));
  o.require(!gaussian_curve().x_mu && gauss_dev < 1e-4, "gaussian curve deviates by " + num(gauss_dev));
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 goe-identity", goe_identity},       {"2 figure-1", figure_one},
      {"3 classification", classification},   {"4 gibbs-suite", gibbs_suite},
      {"5 free-energy-suite", free_energy_suite}, {"6 monte-carlo", monte_carlo_suite},
      {"7 curve-properties", curve_properties}};
  int failures = 0;
  for (const auto& [name, body] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = body();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s criterion %s (%.1fs)%s%s\n", o.pass ? "PASS" : "FAIL", name.c_str(), secs,
                o.detail.empty() ? "" : ": ", o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
