#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace volfeed {

enum class FitForm { truncated_power_law, two_exponential };

// Parametric kernel fit. Forms, indexed by lag tau = 1..m:
//   truncated power law: K(tau) = A tau^-b exp(-tau/T)
//   two-exponential:     K(tau) = A1 exp(-tau/T1) + A2 exp(-tau/T2), T1 <= T2
struct KernelFit {
  FitForm form = FitForm::truncated_power_law;

  double A = 0.0, b = 0.0, T = 0.0;
  double A1 = 0.0, T1 = 0.0, A2 = 0.0, T2 = 0.0;

  // 95% half-widths from the linearized covariance at the optimum, ordered
  // (A, b, T) or (A1, T1, A2, T2).
  std::vector<double> ci95;
  double residual_rms = 0.0;
  double objective = 0.0;  // weighted sum of squared residuals
  bool converged = false;
  int iterations = 0;
  // T ran past the fitted lag range: the data cannot tell the truncated
  // power law from a pure one.
  bool power_law_regime = false;
};

struct FitOptions {
  std::optional<double> fix_b;  // truncated power law only
  int max_iterations = 500;
};

// Damped Gauss-Newton (Levenberg-Marquardt) with analytic Jacobians, T
// optimized as log T to keep it positive, and a fixed grid of starting
// points whose best (converged, lowest objective, lowest start index)
// result is returned. weights: per-lag, typically 1/se^2; empty = uniform.
KernelFit fit_truncated_power_law(std::span<const double> values,
                                  std::span<const double> weights = {},
                                  const FitOptions& options = {});

KernelFit fit_two_exponential(std::span<const double> values,
                              std::span<const double> weights = {},
                              const FitOptions& options = {});

std::string fit_report(const KernelFit& fit);
std::string fit_csv_header();
std::string fit_csv_row(const KernelFit& fit);

namespace fitdetail {

// Model values and parameter gradients, exposed for derivative checks.
// Truncated power law uses p = (A, b, u) with T = exp(u); two-exponential
// uses p = (A1, u1, A2, u2).
double tpl_value(const double* p, double tau);
void tpl_gradient(const double* p, double tau, double* g);
double twoexp_value(const double* p, double tau);
void twoexp_gradient(const double* p, double tau, double* g);

}  // namespace fitdetail

}  // namespace volfeed
