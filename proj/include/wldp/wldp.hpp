#ifndef WLDP_WLDP_HPP
#define WLDP_WLDP_HPP

// Umbrella header for the numerical core. The JSON-facing headers
// (wldp/io.hpp, wldp/cli.hpp) are included separately because they need
// nlohmann/json.

#include "wldp/entry_dist.hpp"
#include "wldp/free_energy.hpp"
#include "wldp/gibbs.hpp"
#include "wldp/monte_carlo.hpp"
#include "wldp/numerics.hpp"
#include "wldp/rate.hpp"
#include "wldp/rng.hpp"
#include "wldp/semicircle.hpp"

#endif  // WLDP_WLDP_HPP
