#pragma once

#include <cstddef>
#include <map>

#include "volfeed/marketdata.hpp"
#include "volfeed/parallel.hpp"

namespace volfeed {

// Half-normal moments of a standard Gaussian noise factor:
//   e_plus     = E[eps_+]        = 1/sqrt(2 pi)
//   e_plus_sq  = E[eps_+^2]      = 1/2
//   e_plus_cu  = E[eps_+^3]      = sqrt(2/pi)
//   var_half   = Var(eps_+)      = (1 - 1/pi)/2
//   cross_half = Cov(eps_+, eps_-)  = 1/(2 pi)   (E[eps_+ eps_-] = 0)
// These closed forms feed every first-order kernel formula below.
struct GaussianConstants {
  double e_plus;
  double e_plus_sq;
  double e_plus_cu;
  double var_half;
  double cross_half;
};

GaussianConstants gaussian_constants();

// E[eps^n] = (n-1)!! for even n in [2, 20].
double gaussian_even_moment(int n);

struct SampleMoments {
  double mean = 0.0;
  double variance = 0.0;  // raw second moment E[r^2], no demeaning
  double sigma = 0.0;
  double mean_plus = 0.0;
  double mean_minus = 0.0;
  double mean_abs = 0.0;
  // M_n = E[r^n] / (E[r^2])^(n/2) for even n in {2, 4, 6, 8, 10}.
  std::map<int, double> even_moments;
  std::size_t n = 0;
};

// Means are raw (see sigma-conventions note in kernel.hpp); degeneracy is
// still judged on the demeaned variance so that a constant series errors out.
SampleMoments sample_moments(const ReturnSeries& series,
                             Exec policy = Exec::parallel);

}  // namespace volfeed
