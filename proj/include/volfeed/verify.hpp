#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "volfeed/simulator.hpp"

namespace volfeed {

// Closed-loop consistency checks: simulate a configuration with known
// kernels, run the full estimation pipeline on the output, and compare
// against the configured truth. Thresholds are fixed here, not options.
struct VerifyCheck {
  std::string name;
  bool passed = false;
  double max_z = 0.0;  // NaN when a z-score is not meaningful
  std::string detail;
};

struct VerifyOptions {
  std::size_t estimate_tau_max = 50;
  std::size_t check_tau = 40;     // per-lag kernel checks cover tau <= this
  std::size_t v_tau_lo = 5;       // v consistency window
  std::size_t v_tau_hi = 40;
  int replicas = 1;               // replica i runs with seed + i
};

struct VerifyReport {
  std::vector<VerifyCheck> checks;
  bool all_passed = false;
  std::string config_name;
  std::uint64_t seed = 0;
  int replicas = 1;

  std::string render() const;
};

VerifyReport run_verification(const SimConfig& config,
                              const VerifyOptions& options = {});

// The built-in configuration used when the CLI gets no --config.
SimConfig builtin_verify_config();

}  // namespace volfeed
