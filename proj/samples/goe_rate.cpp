// Prints the GOE rate next to the variational formula sup_theta {J - theta^2}.
#include <cstdio>

#include "wldp/wldp.hpp"

int main() {
  std::printf("%6s %14s %14s %10s\n", "x", "goe_rate", "variational", "theta*");
  for (double x = 2.0; x <= 5.0 + 1e-12; x += 0.25) {
    const wldp::semicircle::Site site(x);
    const auto opt = wldp::rate::sup_theta(site, [](double t) { return t * t; });
    std::printf("%6.2f %14.10f %14.10f %10.6f\n", x, wldp::semicircle::goe_rate(x), opt.value, opt.theta_star);
  }
}
