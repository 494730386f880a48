#include "volfeed/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "volfeed/config.hpp"
#include "volfeed/errors.hpp"
#include "volfeed/rng.hpp"

namespace volfeed {

void SimConfig::validate() const {
  if (!(sigma0 > 0.0)) throw ConfigError("sigma0 must be positive");
  if (k_plus.empty()) throw ConfigError("kernels must have at least one lag");
  if (k_plus.size() != k_minus.size())
    throw ConfigError("k_plus and k_minus must have equal length");
  for (double k : k_plus)
    if (!std::isfinite(k)) throw ConfigError("k_plus has a non-finite entry");
  for (double k : k_minus)
    if (!std::isfinite(k)) throw ConfigError("k_minus has a non-finite entry");
  if (length < 1) throw ConfigError("length must be at least 1");
  if (burn_in < 2 * tau_max())
    throw ConfigError("burn_in " + std::to_string(burn_in) +
                      " must be at least 2 * tau_max = " +
                      std::to_string(2 * tau_max()));
  if (!(sigma_floor > 0.0) || sigma_floor > 0.5)
    throw ConfigError("sigma_floor must lie in (0, 0.5]");
  if (!er_defaulted && (!std::isfinite(er_plus) || !std::isfinite(er_minus)))
    throw ConfigError("er_plus/er_minus must be finite");
}

namespace {

constexpr double kMaxFloorRate = 0.05;

// One continuous realization; segments share the return ring and the random
// stream, so a parameter switch leaves the history intact.
class FeedbackEngine {
 public:
  FeedbackEngine(std::size_t capacity, double seed_sigma, std::uint64_t seed)
      : ring_(capacity), capacity_(capacity), rng_(seed) {
    for (std::size_t i = 0; i < capacity_; ++i)
      ring_[i] = rng_.normal(0.0, seed_sigma);
    head_ = capacity_ - 1;  // slot of the most recent value
  }

  void run_segment(const SimConfig& cfg, std::size_t burn,
                   std::vector<double>& out, std::size_t& floor_hits) {
    const std::size_t k = cfg.tau_max();
    const double* kp = cfg.k_plus.data();
    const double* km = cfg.k_minus.data();
    const double erp = cfg.er_defaulted
                           ? cfg.sigma0 / std::sqrt(2.0 * std::numbers::pi)
                           : cfg.er_plus;
    const double erm = cfg.er_defaulted
                           ? -cfg.sigma0 / std::sqrt(2.0 * std::numbers::pi)
                           : cfg.er_minus;
    const double floor_sigma = cfg.sigma_floor * cfg.sigma0;
    const std::size_t steps = burn + cfg.length;
    for (std::size_t step = 0; step < steps; ++step) {
      // feedback sum over the last k returns, most recent first
      double feedback = 0.0;
      std::size_t tau = 0;
      const std::size_t first = std::min(k, head_ + 1);
      for (std::size_t j = head_ + 1; tau < first; --j, ++tau) {
        const double past = ring_[j - 1];
        feedback += kp[tau] * ((past > 0.0 ? past : 0.0) - erp) +
                    km[tau] * ((past < 0.0 ? past : 0.0) - erm);
      }
      for (std::size_t j = capacity_; tau < k; --j, ++tau) {
        const double past = ring_[j - 1];
        feedback += kp[tau] * ((past > 0.0 ? past : 0.0) - erp) +
                    km[tau] * ((past < 0.0 ? past : 0.0) - erm);
      }
      double sigma = cfg.sigma0 + feedback;
      const bool retained = step >= burn;
      if (sigma < floor_sigma) {
        sigma = floor_sigma;
        if (retained) ++floor_hits;
      }
      const double r = sigma * rng_.normal();
      head_ = head_ + 1 == capacity_ ? 0 : head_ + 1;
      ring_[head_] = r;
      if (retained) out.push_back(r);
    }
  }

 private:
  std::vector<double> ring_;
  std::size_t capacity_;
  std::size_t head_ = 0;
  Rng rng_;
};

SimResult run_segments(const std::vector<SimConfig>& segments,
                       std::vector<std::size_t>* boundaries) {
  std::size_t capacity = 0;
  std::size_t total_length = 0;
  for (const SimConfig& cfg : segments) {
    capacity = std::max(capacity, cfg.tau_max());
    total_length += cfg.length;
  }

  const SimConfig& first = segments.front();
  FeedbackEngine engine(capacity, first.sigma0, first.seed);

  SimResult result;
  result.series.symbol = "sim";
  result.series.cutoff = 0.0;
  result.series.returns.reserve(total_length);
  for (std::size_t s = 0; s < segments.size(); ++s) {
    if (boundaries && s > 0)
      boundaries->push_back(result.series.returns.size());
    engine.run_segment(segments[s], s == 0 ? segments[s].burn_in : 0,
                       result.series.returns, result.floor_hits);
  }
  result.floor_rate =
      static_cast<double>(result.floor_hits) / static_cast<double>(total_length);
  if (result.floor_rate > kMaxFloorRate)
    throw NumericalError(
        "volatility floor hit on " +
        std::to_string(100.0 * result.floor_rate) +
        "% of steps; the feedback is too strong for the model regime");
  return result;
}

}  // namespace

SimResult simulate(const SimConfig& config) {
  config.validate();
  return run_segments({config}, nullptr);
}

RegimeSwitchResult simulate_regime_switch(const std::vector<SimConfig>& segments) {
  if (segments.empty()) throw ConfigError("need at least one segment");
  segments.front().validate();
  for (std::size_t s = 0; s < segments.size(); ++s) {
    const SimConfig& cfg = segments[s];
    if (s > 0) {
      if (!(cfg.sigma0 > 0.0)) throw ConfigError("sigma0 must be positive");
      if (cfg.k_plus.empty() || cfg.k_plus.size() != cfg.k_minus.size())
        throw ConfigError("segment " + std::to_string(s) +
                          ": bad kernel arrays");
      if (!(cfg.sigma_floor > 0.0) || cfg.sigma_floor > 0.5)
        throw ConfigError("sigma_floor must lie in (0, 0.5]");
    }
    if (cfg.length < 10 * cfg.tau_max())
      throw ConfigError("segment " + std::to_string(s) + " length " +
                        std::to_string(cfg.length) +
                        " must be at least 10 * tau_max");
  }

  RegimeSwitchResult out;
  SimResult sim = run_segments(segments, &out.boundaries);
  out.series = std::move(sim.series);
  out.floor_hits = sim.floor_hits;
  return out;
}

SimConfig load_sim_config(const std::string& path) {
  const KeyValueFile kv = KeyValueFile::load(path);
  SimConfig cfg;
  cfg.sigma0 = kv.get_double("sigma0");
  cfg.k_plus = kv.get_double_list("k_plus");
  cfg.k_minus = kv.get_double_list("k_minus");
  cfg.length = kv.get_size("length", 0);
  if (cfg.length == 0) throw ConfigError(path + ": missing or zero 'length'");
  cfg.burn_in = kv.get_size("burn_in", 2 * cfg.tau_max());
  cfg.seed = kv.get_u64("seed", 1);
  cfg.sigma_floor = kv.get_double("sigma_floor", 0.05);
  if (kv.has("er_plus") != kv.has("er_minus"))
    throw ConfigError(path + ": er_plus and er_minus must be given together");
  if (kv.has("er_plus")) {
    cfg.er_plus = kv.get_double("er_plus");
    cfg.er_minus = kv.get_double("er_minus");
    cfg.er_defaulted = false;
  }
  cfg.validate();
  return cfg;
}

}  // namespace volfeed
