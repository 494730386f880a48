#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "volfeed/observables.hpp"

namespace volfeed {

// Feedback kernels of the asymmetric volatility model
//   r(t) = sigma(t) eps(t),
//   sigma(t) = sigma_0 + sum_tau K_+(tau) (r_+(t-tau) - E r_+)
//            + sum_tau K_-(tau) (r_-(t-tau) - E r_-).
// At first order in K the observables are linear in the kernels:
//   l_plus  = sigma^3 [ (1 - 1/pi) K_+ + (1/pi) K_- ]
//   l_minus = sigma^3 [ (1/pi) K_+ + (1 - 1/pi) K_- ]
//   l_total = 2 sigma^3 K_L
//   v       = 2 sqrt(2/pi) sigma^4 K_V
// with K_V = (K_+ - K_-)/2 and K_L = (K_+ + K_-)/2. The 2x2 map from
// (K_+, K_-) to (l_plus, l_minus) inverts in closed form:
//   K_+ = [ (pi - 1) l_plus - l_minus ] / ( sigma^3 (pi - 2) )
//   K_- = -[ l_plus - (pi - 1) l_minus ] / ( sigma^3 (pi - 2) )
// Sample sigma stands in for sigma_0 throughout; the difference is second
// order in K.
struct KernelEstimate {
  std::vector<int> lags;
  std::vector<double> k_plus, k_minus;
  std::vector<double> k_v, k_l;  // derived exactly from k_plus/k_minus
  std::vector<double> se_k_plus, se_k_minus;
  std::vector<double> se_k_v, se_k_l;  // propagated from the observable SEs
  double sigma = 0.0;
  // Set when max(|k_plus|, |k_minus|) > 0.6: the first-order inversion is
  // no longer trustworthy there.
  bool beyond_perturbative = false;
};

KernelEstimate invert_observables(const ObservableSet& obs);

// Build a KernelEstimate from known kernels (simulation truth, fixtures).
KernelEstimate make_kernels(std::vector<double> k_plus,
                            std::vector<double> k_minus, double sigma);

struct ForwardObservables {
  std::vector<double> l_plus, l_minus;
};

ForwardObservables forward_observables(const KernelEstimate& kernels);
std::vector<double> forward_leverage(const KernelEstimate& kernels);   // l_total
std::vector<double> forward_volatility(const KernelEstimate& kernels); // v

// Feedback strength entering the variance and moment corrections:
//   Delta(K) = 1/2 (1 - 1/pi) sum (K_+ + K_-)^2 + (2/pi - 1) sum K_+ K_-
double delta_correction(const KernelEstimate& kernels);

// E[r^2] = sigma_0^2 (1 + Delta); returns predicted E[r^2] / sigma_0^2.
double variance_inflation(const KernelEstimate& kernels);

// M_n ~ (n-1)!! (1 + n(n-2)/2 Delta) for even n.
std::map<int, double> predict_even_moments(const KernelEstimate& kernels,
                                           int n_max);

struct DenseMatrix {
  std::size_t n = 0;
  std::vector<double> data;

  explicit DenseMatrix(std::size_t size = 0) : n(size), data(size * size, 0.0) {}
  double at(std::size_t i, std::size_t j) const { return data[i * n + j]; }
  double& at(std::size_t i, std::size_t j) { return data[i * n + j]; }
};

// Quadratic-ARCH form equivalent at first order:
//   sigma^2(t) = sigma_0^2 + sum linear(tau) r(t-tau)
//              + sum quadratic(tau, tau') r(t-tau) r(t-tau')
//   linear(tau)          = 2 sigma K_L(tau)
//   quadratic(tau, tau)  = K_V(tau)^2 + K_L(tau)^2
//   quadratic(tau, tau') = K_L(tau) K_L(tau'),  tau != tau'
// quadratic = k_l k_l^T + diag(k_v^2), hence positive semidefinite.
struct QarchKernels {
  std::vector<int> lags;
  std::vector<double> linear;
  DenseMatrix quadratic;
  double diagonal_dominance = 0.0;  // mean diag / mean |off-diag|
};

QarchKernels to_qarch(const KernelEstimate& kernels);

void write_kernels_csv(const std::string& path, const KernelEstimate& kernels);
void write_qarch_matrix_csv(const std::string& path, const QarchKernels& q);
void write_qarch_linear_csv(const std::string& path, const QarchKernels& q);

}  // namespace volfeed
