// Mean top eigenvalue of tilted Gaussian Wigner matrices across the BBP transition.
#include <cstdio>

#include "wldp/wldp.hpp"

int main() {
  wldp::mc::ExperimentConfig cfg;
  cfg.N = 300;
  cfg.reps = 10;
  cfg.seed = 42;
  std::printf("%6s %10s %10s %s\n", "theta", "mean", "stderr", "prediction");
  for (double theta : {0.0, 0.25, 0.5, 0.75, 1.0, 1.5}) {
    cfg.theta = theta;
    const auto rep = wldp::mc::experiment(cfg);
    const auto pred = wldp::mc::bbp_prediction(theta, 0.0);
    if (pred.value)
      std::printf("%6.2f %10.5f %10.5f %.5f\n", theta, rep.mean, rep.stderr_mean, *pred.value);
    else
      std::printf("%6.2f %10.5f %10.5f %s\n", theta, rep.mean, rep.stderr_mean, pred.text.c_str());
  }
}
