#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "wldp/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Rate functions and spectral experiments for Wigner matrices"};
  std::string config;
  wldp::cli::Overrides over;
  std::string out;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  double tol = 0.0;
  app.add_option("--config", config, "JSON run configuration")->required()->check(CLI::ExistingFile);
  auto* out_opt = app.add_option("--out", out, "output path (stdout when absent)");
  auto* seed_opt = app.add_option("--seed", seed, "64-bit seed for Monte Carlo runs");
  auto* threads_opt = app.add_option("--threads", threads, "worker thread cap")->check(CLI::PositiveNumber);
  auto* tol_opt = app.add_option("--tol", tol, "threshold for detecting departure from the GOE rate");
  CLI11_PARSE(app, argc, argv);

  std::ifstream in(config, std::ios::binary);
  if (!in) {
    std::cerr << "error: cannot read config '" << config << "'\n";
    return 1;
  }
  std::stringstream text;
  text << in.rdbuf();

  wldp::cli::RunSpec spec;
  try {
    spec = wldp::cli::parse_config(text.str());
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  }
  if (*out_opt) over.out = out;
  if (*seed_opt) over.seed = seed;
  if (*threads_opt) over.threads = threads;
  if (*tol_opt) over.tol = tol;
  wldp::cli::apply(spec, over);
  return wldp::cli::run(spec, std::cout, std::cerr);
}
