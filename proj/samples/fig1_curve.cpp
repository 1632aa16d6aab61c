// Rate curve for sparse Gaussian entries with p = 1/2 against the GOE rate,
// with the localized mass of the optimizing profile.
#include <cstdio>
#include <thread>

#include "wldp/wldp.hpp"

int main() {
  const auto dist = wldp::EntryDistribution::sparse_gaussian(0.5);
  wldp::rate::RateOptions opt;
  const auto grid = wldp::rate::arithmetic_grid(2.0, 3.5, 0.02);
  const auto curve =
      wldp::rate::rate_curve(dist, grid, opt, 1e-3, std::max(1u, std::thread::hardware_concurrency()));
  std::printf("%6s %12s %12s %10s\n", "x", "rate", "goe_rate", "alpha*");
  for (const auto& p : curve.points)
    std::printf("%6.2f %12.8f %12.8f %10.6f\n", p.x, p.rate, p.goe_rate, p.localized_mass());
  if (curve.x_mu) std::printf("first departure from the GOE rate at x = %.2f\n", *curve.x_mu);
}
