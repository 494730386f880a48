#include "volfeed/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>

#include "volfeed/errors.hpp"
#include "volfeed/kernel.hpp"
#include "volfeed/moments.hpp"
#include "volfeed/numerics.hpp"
#include "volfeed/observables.hpp"
#include "volfeed/version.hpp"

namespace volfeed {

namespace {

constexpr double kZLimit = 3.0;
constexpr double kRecoveryFraction = 0.9;

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

struct ReplicaChecks {
  VerifyCheck kernel_recovery;
  VerifyCheck v_consistency;
  VerifyCheck delta_consistency;
  VerifyCheck moment_consistency;
};

ReplicaChecks run_replica(const SimConfig& cfg, const VerifyOptions& opt) {
  const SimResult sim = simulate(cfg);
  const std::size_t est_tau =
      std::min(opt.estimate_tau_max, sim.series.returns.size() - 1);
  const ObservableSet obs = estimate_observables(sim.series, est_tau);
  const KernelEstimate est = invert_observables(obs);

  // configured truth, zero beyond the kernel range
  std::vector<double> true_p(est_tau, 0.0), true_m(est_tau, 0.0);
  for (std::size_t i = 0; i < est_tau && i < cfg.tau_max(); ++i) {
    true_p[i] = cfg.k_plus[i];
    true_m[i] = cfg.k_minus[i];
  }
  const KernelEstimate truth = make_kernels(true_p, true_m, cfg.sigma0);

  ReplicaChecks out;

  {  // per-lag kernel recovery within 3 SE on at least 90% of checked lags
    const std::size_t upto = std::min(opt.check_tau, est_tau);
    std::size_t within = 0;
    double max_z = 0.0;
    for (std::size_t i = 0; i < upto; ++i) {
      const double zp = (est.k_plus[i] - true_p[i]) /
                        (est.se_k_plus[i] > 0 ? est.se_k_plus[i] : 1.0);
      const double zm = (est.k_minus[i] - true_m[i]) /
                        (est.se_k_minus[i] > 0 ? est.se_k_minus[i] : 1.0);
      const double z = std::max(std::abs(zp), std::abs(zm));
      max_z = std::max(max_z, z);
      if (z <= kZLimit) ++within;
    }
    out.kernel_recovery.name = "kernel_recovery";
    out.kernel_recovery.max_z = max_z;
    out.kernel_recovery.passed =
        static_cast<double>(within) >=
        kRecoveryFraction * static_cast<double>(upto);
    out.kernel_recovery.detail = std::to_string(within) + "/" +
                                 std::to_string(upto) + " lags within 3 SE";
  }

  {  // v(tau) against the first-order prediction from the true kernels
    const double s4 = obs.sigma * obs.sigma * obs.sigma * obs.sigma;
    const double front = 2.0 * std::sqrt(2.0 / std::numbers::pi);
    const std::size_t lo = std::max<std::size_t>(opt.v_tau_lo, 1);
    const std::size_t hi = std::min(opt.v_tau_hi, est_tau);
    std::size_t within = 0, total = 0;
    double max_z = 0.0;
    for (std::size_t tau = lo; tau <= hi; ++tau) {
      const std::size_t i = tau - 1;
      const double predicted = front * s4 * truth.k_v[i];
      const double z = (obs.v[i] - predicted) /
                       (obs.se_v[i] > 0 ? obs.se_v[i] : 1.0);
      max_z = std::max(max_z, std::abs(z));
      ++total;
      if (std::abs(z) <= kZLimit) ++within;
    }
    out.v_consistency.name = "v_consistency";
    out.v_consistency.max_z = max_z;
    out.v_consistency.passed =
        static_cast<double>(within) >=
        kRecoveryFraction * static_cast<double>(total);
    out.v_consistency.detail = std::to_string(within) + "/" +
                               std::to_string(total) +
                               " lags within 3 SE of the predicted v";
  }

  const double delta_true = delta_correction(truth);
  const SampleMoments moments = sample_moments(sim.series);

  {  // E[r^2] = sigma0^2 (1 + Delta)
    NeumaierSum ss;
    for (double r : sim.series.returns) {
      const double d = r * r - moments.variance;
      ss.add(d * d);
    }
    const std::size_t n = sim.series.returns.size();
    const double sd_r2 = std::sqrt(ss.value() / static_cast<double>(n));
    const double se_m2 =
        sd_r2 * std::sqrt(obs.autocorr_factor / static_cast<double>(n));
    const double predicted = cfg.sigma0 * cfg.sigma0 * (1.0 + delta_true);
    const double z = (moments.variance - predicted) / (se_m2 > 0 ? se_m2 : 1.0);
    out.delta_consistency.name = "delta_consistency";
    out.delta_consistency.max_z = std::abs(z);
    out.delta_consistency.passed = std::abs(z) <= kZLimit;
    out.delta_consistency.detail =
        "sample E[r^2]/sigma0^2 - 1 = " +
        fmt(moments.variance / (cfg.sigma0 * cfg.sigma0) - 1.0) +
        " vs Delta = " + fmt(delta_true);
  }

  {  // normalized even moments against the Delta-corrected predictions;
     // se from the delta method for m_n / m_2^(n/2), inflated by the same
     // autocorrelation factor as the variance check
    NeumaierSum sw, su, sx, sww, suu, sxx, suw, sxw;
    for (double r : sim.series.returns) {
      const double w = r * r, u = w * w, x = u * w;
      sw.add(w);
      su.add(u);
      sx.add(x);
      sww.add(w * w);
      suu.add(u * u);
      sxx.add(x * x);
      suw.add(u * w);
      sxw.add(x * w);
    }
    const double n = static_cast<double>(sim.series.returns.size());
    const double wb = sw.value() / n, ub = su.value() / n, xb = sx.value() / n;
    const double var_w = sww.value() / n - wb * wb;
    const double var_u = suu.value() / n - ub * ub;
    const double var_x = sxx.value() / n - xb * xb;
    const double cov_uw = suw.value() / n - ub * wb;
    const double cov_xw = sxw.value() / n - xb * wb;
    const double w2 = wb * wb, w3 = w2 * wb;
    const double var_m4 = var_u / (w2 * w2) +
                          4.0 * ub * ub * var_w / (w3 * w3) -
                          4.0 * ub * cov_uw / (w2 * w3);
    const double var_m6 = var_x / (w3 * w3) +
                          9.0 * xb * xb * var_w / (w2 * w3 * w3) -
                          6.0 * xb * cov_xw / (w2 * w2 * w3);
    const double scale = obs.autocorr_factor / n;
    const double se_m4 = std::sqrt(std::max(var_m4, 0.0) * scale);
    const double se_m6 = std::sqrt(std::max(var_m6, 0.0) * scale);

    bool passed = true;
    double max_z = 0.0;
    std::ostringstream detail;
    const double se[2] = {se_m4, se_m6};
    int slot = 0;
    for (int mom : {4, 6}) {
      const double gaussian = gaussian_even_moment(mom);
      const double corrected =
          gaussian * (1.0 + 0.5 * mom * (mom - 2) * delta_true);
      const double sample = moments.even_moments.at(mom);
      const double s = se[slot++];
      const double z = s > 0 ? (sample - corrected) / s : 0.0;
      max_z = std::max(max_z, std::abs(z));
      passed = passed && std::abs(z) <= kZLimit;
      if (mom > 4) detail << ", ";
      detail << "M" << mom << " = " << fmt(sample) << " (corrected "
             << fmt(corrected) << ", gaussian " << fmt(gaussian) << ", z = "
             << fmt(z) << ")";
    }
    out.moment_consistency.name = "moment_consistency";
    out.moment_consistency.max_z = max_z;
    out.moment_consistency.passed = passed;
    out.moment_consistency.detail = detail.str();
  }

  return out;
}

void fold(VerifyCheck& total, const VerifyCheck& rep, int index) {
  if (index == 0) {
    total = rep;
    return;
  }
  total.passed = total.passed && rep.passed;
  if (std::isnan(total.max_z) || rep.max_z > total.max_z)
    total.max_z = std::isnan(rep.max_z) ? total.max_z : std::max(total.max_z, rep.max_z);
  total.detail += " | replica " + std::to_string(index) + ": " + rep.detail;
}

}  // namespace

SimConfig builtin_verify_config() {
  // One-sided short exponential kernel, deep inside the model's validity
  // domain. Three effects pin the shape. Stationarity: the mean volatility
  // obeys a linear recursion with gain sqrt(2/pi) * sum K_V, which must stay
  // well below 1 (near it the process either saturates the volatility floor
  // or blows up); here the gain is 0.036. Bias: the estimator inverts
  // first-order identities whose leading corrections are driven by the
  // kernel self-overlap sum_u K(tau+u) K(u) and by the cumulative gain, both
  // of which shrink with a short decay time; at T = 5 and this amplitude the
  // worst-lag bias stays near one standard error for the length below.
  // Noise: 1.6e7 samples resolve K_V(1) at roughly ten standard errors, so
  // the recovery checks bind. K_+ = 0 doubles as a null channel and makes
  // K_L = -K_V exactly.
  SimConfig cfg;
  cfg.sigma0 = 0.01;
  const std::size_t tau_max = 50;
  cfg.k_plus.assign(tau_max, 0.0);
  cfg.k_minus.resize(tau_max);
  for (std::size_t i = 0; i < tau_max; ++i) {
    const double tau = static_cast<double>(i + 1);
    cfg.k_minus[i] = -0.020 * std::exp(-tau / 5.0);
  }
  cfg.length = 16000000;
  cfg.burn_in = 1000;
  cfg.seed = 42;
  cfg.sigma_floor = 0.05;
  return cfg;
}

VerifyReport run_verification(const SimConfig& config,
                              const VerifyOptions& options) {
  if (options.replicas < 1) throw ConfigError("replicas must be at least 1");
  config.validate();

  VerifyReport report;
  report.seed = config.seed;
  report.replicas = options.replicas;

  VerifyCheck kernel, v, delta, moment;
  for (int rep = 0; rep < options.replicas; ++rep) {
    SimConfig cfg = config;
    cfg.seed = config.seed + static_cast<std::uint64_t>(rep);
    const ReplicaChecks checks = run_replica(cfg, options);
    fold(kernel, checks.kernel_recovery, rep);
    fold(v, checks.v_consistency, rep);
    fold(delta, checks.delta_consistency, rep);
    fold(moment, checks.moment_consistency, rep);
  }
  report.checks = {kernel, v, delta, moment};
  report.all_passed = true;
  for (const VerifyCheck& c : report.checks)
    report.all_passed = report.all_passed && c.passed;
  return report;
}

std::string VerifyReport::render() const {
  std::ostringstream out;
  out << "verification report\n";
  out << "tool = volfeed " << kVersion << "\n";
  out << "config = " << (config_name.empty() ? "builtin" : config_name) << "\n";
  out << "seed = " << seed << "\n";
  out << "replicas = " << replicas << "\n";
  for (const VerifyCheck& c : checks) {
    out << (c.passed ? "[PASS] " : "[FAIL] ") << c.name << ": " << c.detail;
    if (!std::isnan(c.max_z)) out << " (max |z| = " << fmt(c.max_z) << ")";
    out << "\n";
  }
  out << "result: " << (all_passed ? "PASS" : "FAIL") << "\n";
  return out.str();
}

}  // namespace volfeed
