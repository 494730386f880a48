#include "volfeed/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <vector>

#include "volfeed/csv.hpp"
#include "volfeed/errors.hpp"
#include "volfeed/parallel.hpp"

namespace volfeed {

namespace fitdetail {

double tpl_value(const double* p, double tau) {
  const double t_scale = std::exp(p[2]);
  return p[0] * std::exp(-p[1] * std::log(tau) - tau / t_scale);
}

void tpl_gradient(const double* p, double tau, double* g) {
  const double f = tpl_value(p, tau);
  g[0] = p[0] != 0.0 ? f / p[0]
                     : std::exp(-p[1] * std::log(tau) - tau / std::exp(p[2]));
  g[1] = -std::log(tau) * f;
  g[2] = f * tau / std::exp(p[2]);
}

double twoexp_value(const double* p, double tau) {
  return p[0] * std::exp(-tau / std::exp(p[1])) +
         p[2] * std::exp(-tau / std::exp(p[3]));
}

void twoexp_gradient(const double* p, double tau, double* g) {
  const double t1 = std::exp(p[1]);
  const double t2 = std::exp(p[3]);
  const double e1 = std::exp(-tau / t1);
  const double e2 = std::exp(-tau / t2);
  g[0] = e1;
  g[1] = p[0] * e1 * tau / t1;
  g[2] = e2;
  g[3] = p[2] * e2 * tau / t2;
}

}  // namespace fitdetail

namespace {

constexpr double kObjectiveTol = 1e-10;
constexpr double kStepTol = 1e-12;
constexpr double kLambdaInit = 1e-3;
constexpr double kLambdaMax = 1e12;

struct LmModel {
  int np = 0;
  std::function<double(const double*, double)> value;
  std::function<void(const double*, double, double*)> grad;
};

struct LmRun {
  std::vector<double> p;
  double objective = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
};

// Gaussian elimination with partial pivoting on a square system stored
// row-major. Small fixed sizes only (np <= 4).
bool solve_linear(std::vector<double> a, std::vector<double> rhs, int np,
                  std::vector<double>& out) {
  for (int col = 0; col < np; ++col) {
    int pivot = col;
    for (int row = col + 1; row < np; ++row)
      if (std::abs(a[row * np + col]) > std::abs(a[pivot * np + col]))
        pivot = row;
    if (std::abs(a[pivot * np + col]) < 1e-300) return false;
    if (pivot != col) {
      for (int j = 0; j < np; ++j)
        std::swap(a[col * np + j], a[pivot * np + j]);
      std::swap(rhs[col], rhs[pivot]);
    }
    const double inv = 1.0 / a[col * np + col];
    for (int row = col + 1; row < np; ++row) {
      const double factor = a[row * np + col] * inv;
      if (factor == 0.0) continue;
      for (int j = col; j < np; ++j) a[row * np + j] -= factor * a[col * np + j];
      rhs[row] -= factor * rhs[col];
    }
  }
  out.assign(np, 0.0);
  for (int row = np - 1; row >= 0; --row) {
    double acc = rhs[row];
    for (int j = row + 1; j < np; ++j) acc -= a[row * np + j] * out[j];
    out[row] = acc / a[row * np + row];
  }
  return true;
}

double objective_of(const LmModel& model, std::span<const double> y,
                    std::span<const double> w, const std::vector<double>& p) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double resid = y[i] - model.value(p.data(), static_cast<double>(i + 1));
    s += w[i] * resid * resid;
  }
  return std::isfinite(s) ? s : std::numeric_limits<double>::infinity();
}

void normal_equations(const LmModel& model, std::span<const double> y,
                      std::span<const double> w, const std::vector<double>& p,
                      std::vector<double>& jtwj, std::vector<double>& jtwr) {
  const int np = model.np;
  jtwj.assign(np * np, 0.0);
  jtwr.assign(np, 0.0);
  std::vector<double> g(np);
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double tau = static_cast<double>(i + 1);
    const double resid = y[i] - model.value(p.data(), tau);
    model.grad(p.data(), tau, g.data());
    for (int a = 0; a < np; ++a) {
      jtwr[a] += w[i] * g[a] * resid;
      for (int b = 0; b < np; ++b) jtwj[a * np + b] += w[i] * g[a] * g[b];
    }
  }
}

LmRun lm_minimize(const LmModel& model, std::span<const double> y,
                  std::span<const double> w, std::vector<double> p0,
                  int max_iterations) {
  LmRun run;
  run.p = std::move(p0);
  run.objective = objective_of(model, y, w, run.p);
  double lambda = kLambdaInit;
  std::vector<double> jtwj, jtwr, damped, delta;

  while (run.iterations < max_iterations) {
    normal_equations(model, y, w, run.p, jtwj, jtwr);
    damped = jtwj;
    for (int a = 0; a < model.np; ++a)
      damped[a * model.np + a] *= 1.0 + lambda;
    ++run.iterations;
    if (!solve_linear(damped, jtwr, model.np, delta)) {
      lambda *= 10.0;
      if (lambda > kLambdaMax) break;
      continue;
    }
    std::vector<double> trial = run.p;
    double step = 0.0;
    for (int a = 0; a < model.np; ++a) {
      trial[a] += delta[a];
      step = std::max(step, std::abs(delta[a]));
    }
    const double trial_objective = objective_of(model, y, w, trial);
    if (trial_objective <= run.objective) {
      const double drop = run.objective - trial_objective;
      run.p = std::move(trial);
      run.objective = trial_objective;
      lambda = std::max(lambda / 3.0, 1e-12);
      if (drop <= kObjectiveTol * std::max(run.objective, 1e-300) ||
          step < kStepTol) {
        run.converged = true;
        break;
      }
    } else {
      lambda *= 4.0;
      if (lambda > kLambdaMax) break;  // no acceptable direction left
    }
  }
  return run;
}

// Linearized 95% half-widths in the transformed parameter space. A tiny
// ridge keeps the covariance finite when a parameter is unidentified (for
// instance a two-exponential collapsing onto a single exponential).
std::vector<double> half_widths(const LmModel& model, std::span<const double> y,
                                std::span<const double> w,
                                const std::vector<double>& p, double objective) {
  const int np = model.np;
  const std::size_t m = y.size();
  std::vector<double> jtwj, jtwr;
  normal_equations(model, y, w, p, jtwj, jtwr);
  double max_diag = 0.0;
  for (int a = 0; a < np; ++a)
    max_diag = std::max(max_diag, jtwj[a * np + a]);
  const double ridge = 1e-12 * std::max(max_diag, 1e-300);
  for (int a = 0; a < np; ++a) jtwj[a * np + a] += ridge;

  const double dof = static_cast<double>(m) - static_cast<double>(np);
  const double scale = dof > 0.0 ? objective / dof : 0.0;
  std::vector<double> out(np, 0.0);
  for (int a = 0; a < np; ++a) {
    std::vector<double> e(np, 0.0), col;
    e[a] = 1.0;
    if (!solve_linear(jtwj, e, np, col)) {
      out[a] = std::numeric_limits<double>::infinity();
      continue;
    }
    out[a] = 1.96 * std::sqrt(std::max(0.0, col[a] * scale));
  }
  return out;
}

void check_input(std::span<const double> values, std::span<const double> weights) {
  if (values.size() < 10)
    throw ConfigError("kernel fit needs at least 10 lags, got " +
                      std::to_string(values.size()));
  if (!weights.empty() && weights.size() != values.size())
    throw ConfigError("weights must match values in length");
  bool any = false;
  for (double v : values)
    if (v != 0.0) any = true;
  if (!any) throw NumericalError("kernel is identically zero, nothing to fit");
  for (double w : weights)
    if (!(w >= 0.0) || !std::isfinite(w))
      throw ConfigError("weights must be finite and non-negative");
}

std::vector<double> effective_weights(std::span<const double> values,
                                      std::span<const double> weights) {
  if (!weights.empty()) return {weights.begin(), weights.end()};
  return std::vector<double>(values.size(), 1.0);
}

double amplitude_scale(std::span<const double> values) {
  if (values[0] != 0.0) return values[0];
  double best = 0.0;
  for (double v : values)
    if (std::abs(v) > std::abs(best)) best = v;
  return best;
}

double unweighted_rms(const LmModel& model, std::span<const double> y,
                      const std::vector<double>& p) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double resid = y[i] - model.value(p.data(), static_cast<double>(i + 1));
    s += resid * resid;
  }
  return std::sqrt(s / static_cast<double>(y.size()));
}

// Runs every start point and keeps the run with the lowest objective,
// breaking ties toward converged runs and then the lower start index.
LmRun multistart(const LmModel& model, std::span<const double> y,
                 std::span<const double> w,
                 const std::vector<std::vector<double>>& starts,
                 int max_iterations) {
  std::vector<LmRun> runs(starts.size());
  parallel_for(starts.size(), Exec::parallel, [&](std::size_t i) {
    runs[i] = lm_minimize(model, y, w, starts[i], max_iterations);
  });
  std::size_t best = 0;
  for (std::size_t i = 1; i < runs.size(); ++i) {
    const LmRun& a = runs[i];
    const LmRun& b = runs[best];
    if (a.objective < b.objective ||
        (a.objective == b.objective && a.converged && !b.converged))
      best = i;
  }
  return runs[best];
}

}  // namespace

KernelFit fit_truncated_power_law(std::span<const double> values,
                                  std::span<const double> weights,
                                  const FitOptions& options) {
  check_input(values, weights);
  const std::vector<double> w = effective_weights(values, weights);
  const double a0 = amplitude_scale(values);
  const double m = static_cast<double>(values.size());

  LmModel model;
  const bool fixed_b = options.fix_b.has_value();
  const double b_fixed = options.fix_b.value_or(0.0);
  if (fixed_b) {
    model.np = 2;
    model.value = [b_fixed](const double* p, double tau) {
      const double full[3] = {p[0], b_fixed, p[1]};
      return fitdetail::tpl_value(full, tau);
    };
    model.grad = [b_fixed](const double* p, double tau, double* g) {
      const double full[3] = {p[0], b_fixed, p[1]};
      double gf[3];
      fitdetail::tpl_gradient(full, tau, gf);
      g[0] = gf[0];
      g[1] = gf[2];
    };
  } else {
    model.np = 3;
    model.value = fitdetail::tpl_value;
    model.grad = fitdetail::tpl_gradient;
  }

  std::vector<std::vector<double>> starts;
  for (double amp : {a0, 2.0 * a0})
    for (double b0 : {0.0, 0.5})
      for (double t0 : {50.0, 400.0}) {
        if (fixed_b) {
          if (b0 != 0.0) continue;  // b is not searched when pinned
          starts.push_back({amp, std::log(t0)});
        } else {
          starts.push_back({amp, b0, std::log(t0)});
        }
      }

  const LmRun run = multistart(model, values, w, starts, options.max_iterations);
  const std::vector<double> ci = half_widths(model, values, w, run.p, run.objective);

  KernelFit fit;
  fit.form = FitForm::truncated_power_law;
  fit.A = run.p[0];
  fit.b = fixed_b ? b_fixed : run.p[1];
  fit.T = std::exp(fixed_b ? run.p[1] : run.p[2]);
  if (fixed_b) {
    fit.ci95 = {ci[0], 0.0, ci[1] * fit.T};  // delta method for T = exp(u)
  } else {
    fit.ci95 = {ci[0], ci[1], ci[2] * fit.T};
  }
  fit.objective = run.objective;
  fit.residual_rms = unweighted_rms(model, values, run.p);
  fit.converged = run.converged;
  fit.iterations = run.iterations;
  fit.power_law_regime = fit.T > m;
  return fit;
}

KernelFit fit_two_exponential(std::span<const double> values,
                              std::span<const double> weights,
                              const FitOptions& options) {
  check_input(values, weights);
  const std::vector<double> w = effective_weights(values, weights);
  const double a0 = amplitude_scale(values);

  LmModel model;
  model.np = 4;
  model.value = fitdetail::twoexp_value;
  model.grad = fitdetail::twoexp_gradient;

  std::vector<std::vector<double>> starts;
  for (auto [t1, t2] : {std::pair{10.0, 200.0}, std::pair{30.0, 600.0}})
    for (double split : {0.7, 0.5})
      starts.push_back(
          {split * a0, std::log(t1), (1.0 - split) * a0, std::log(t2)});

  const LmRun run = multistart(model, values, w, starts, options.max_iterations);
  const std::vector<double> ci = half_widths(model, values, w, run.p, run.objective);

  KernelFit fit;
  fit.form = FitForm::two_exponential;
  fit.A1 = run.p[0];
  fit.T1 = std::exp(run.p[1]);
  fit.A2 = run.p[2];
  fit.T2 = std::exp(run.p[3]);
  fit.ci95 = {ci[0], ci[1] * fit.T1, ci[2], ci[3] * fit.T2};
  if (fit.T1 > fit.T2) {  // canonical order: T1 <= T2
    std::swap(fit.A1, fit.A2);
    std::swap(fit.T1, fit.T2);
    std::swap(fit.ci95[0], fit.ci95[2]);
    std::swap(fit.ci95[1], fit.ci95[3]);
  }
  fit.objective = run.objective;
  fit.residual_rms = unweighted_rms(model, values, run.p);
  fit.converged = run.converged;
  fit.iterations = run.iterations;
  fit.power_law_regime = false;
  return fit;
}

std::string fit_report(const KernelFit& fit) {
  std::ostringstream out;
  auto line = [&](const char* name, double v, double ci) {
    out << "  " << name << " = " << format_double(v, 8) << " +- "
        << format_double(ci, 4) << "\n";
  };
  if (fit.form == FitForm::truncated_power_law) {
    out << "truncated power law: K(tau) = A tau^-b exp(-tau/T)\n";
    line("A", fit.A, fit.ci95[0]);
    line("b", fit.b, fit.ci95[1]);
    line("T", fit.T, fit.ci95[2]);
  } else {
    out << "two-exponential: K(tau) = A1 exp(-tau/T1) + A2 exp(-tau/T2)\n";
    line("A1", fit.A1, fit.ci95[0]);
    line("T1", fit.T1, fit.ci95[1]);
    line("A2", fit.A2, fit.ci95[2]);
    line("T2", fit.T2, fit.ci95[3]);
  }
  out << "  residual rms = " << format_double(fit.residual_rms, 6) << "\n";
  out << "  iterations = " << fit.iterations << "\n";
  out << "  converged = " << (fit.converged ? "yes" : "no") << "\n";
  if (fit.power_law_regime)
    out << "  note: T exceeds the fitted lag range; the cutoff is not "
           "resolved, consistent with a pure power law\n";
  return out.str();
}

std::string fit_csv_header() {
  return "form,A,b,T,A1,T1,A2,T2,ci_A,ci_b,ci_T,ci_A1,ci_T1,ci_A2,ci_T2,"
         "residual_rms,converged";
}

std::string fit_csv_row(const KernelFit& fit) {
  std::ostringstream out;
  auto field = [&](double v) { out << ',' << format_double(v); };
  auto blank = [&](int k) {
    for (int i = 0; i < k; ++i) out << ',';
  };
  if (fit.form == FitForm::truncated_power_law) {
    out << "truncated_power_law";
    field(fit.A);
    field(fit.b);
    field(fit.T);
    blank(4);
    field(fit.ci95[0]);
    field(fit.ci95[1]);
    field(fit.ci95[2]);
    blank(4);
  } else {
    out << "two_exponential";
    blank(3);
    field(fit.A1);
    field(fit.T1);
    field(fit.A2);
    field(fit.T2);
    blank(3);
    field(fit.ci95[0]);
    field(fit.ci95[1]);
    field(fit.ci95[2]);
    field(fit.ci95[3]);
  }
  field(fit.residual_rms);
  out << ',' << (fit.converged ? 1 : 0);
  return out.str();
}

}  // namespace volfeed
