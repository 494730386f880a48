#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "volfeed/config.hpp"
#include "volfeed/csv.hpp"
#include "volfeed/errors.hpp"
#include "volfeed/fitting.hpp"
#include "volfeed/kernel.hpp"
#include "volfeed/manifest.hpp"
#include "volfeed/marketdata.hpp"
#include "volfeed/moments.hpp"
#include "volfeed/observables.hpp"
#include "volfeed/parallel.hpp"
#include "volfeed/rolling.hpp"
#include "volfeed/simulator.hpp"
#include "volfeed/svgplot.hpp"
#include "volfeed/verify.hpp"
#include "volfeed/version.hpp"

namespace fs = std::filesystem;
using namespace volfeed;

namespace {

std::string stem_of(const std::string& path) {
  return fs::path(path).stem().string();
}

std::string join(const fs::path& dir, const std::string& name) {
  return (dir / name).string();
}

ReturnSeries load_input(const std::string& path, bool as_returns, double cutoff,
                        bool demean, const CsvColumns& cols) {
  ReturnSeries rs = as_returns ? load_returns(path, cols)
                               : to_returns(load_prices(path, cols), cutoff);
  if (demean) rs = demeaned(rs);
  return rs;
}

// cap the number of plotted points so rolling charts stay a sane size
template <typename T>
std::vector<T> thin(const std::vector<T>& xs, std::size_t max_points) {
  if (xs.size() <= max_points) return xs;
  const std::size_t stride = (xs.size() + max_points - 1) / max_points;
  std::vector<T> out;
  out.reserve(max_points);
  for (std::size_t i = 0; i < xs.size(); i += stride) out.push_back(xs[i]);
  return out;
}

std::vector<double> fit_weights(const std::vector<double>& se) {
  std::vector<double> w;
  w.reserve(se.size());
  for (double s : se) {
    if (!(s > 0.0)) return {};  // fall back to uniform weights
    w.push_back(1.0 / (s * s));
  }
  return w;
}

struct CommonOptions {
  std::vector<std::string> inputs;
  std::size_t tau_max = 800;
  double cutoff = 0.15;
  bool as_returns = false;
  bool demean = false;
  CsvColumns cols;
};

void add_common(CLI::App* cmd, CommonOptions& opt) {
  // no ExistingFile check here: an unreadable data file is an input error
  // (exit 2) surfaced by the loader, not a flag-parsing error
  cmd->add_option("inputs", opt.inputs, "input CSV files")->required();
  cmd->add_option("--tau-max", opt.tau_max, "largest lag to estimate")
      ->capture_default_str();
  cmd->add_option("--cutoff", opt.cutoff,
                  "single-day price-move cutoff for jump removal")
      ->capture_default_str();
  cmd->add_flag("--returns", opt.as_returns,
                "inputs are return CSVs (date,return), not prices");
  cmd->add_flag("--demean", opt.demean, "subtract the sample mean return");
  cmd->add_option("--date-col", opt.cols.date, "date column name");
  cmd->add_option("--close-col", opt.cols.close, "close column name");
  cmd->add_option("--return-col", opt.cols.ret, "return column name");
}

int cmd_observables(const CommonOptions& opt, bool normalize,
                    const fs::path& out_dir) {
  RunManifest manifest;
  manifest.command = "observables";
  manifest.tool_version = kVersion;
  manifest.config = {{"tau_max", std::to_string(opt.tau_max)},
                     {"cutoff", format_double(opt.cutoff, 6)},
                     {"normalize", normalize ? "1" : "0"},
                     {"demean", opt.demean ? "1" : "0"},
                     {"input_mode", opt.as_returns ? "returns" : "prices"}};

  SvgChart chart;
  chart.title = "signed leverage correlations";
  chart.x_label = "lag (days)";
  chart.y_label = "L/sigma^3";
  for (const std::string& path : opt.inputs) {
    manifest.inputs.emplace_back(path, fnv1a64_file_hex(path));
    const ReturnSeries rs =
        load_input(path, opt.as_returns, opt.cutoff, opt.demean, opt.cols);
    const ObservableSet obs = estimate_observables(rs, opt.tau_max);
    const std::string out_csv = join(out_dir, stem_of(path) + "_observables.csv");
    write_observables_csv(out_csv, normalize ? normalized(obs) : obs);
    manifest.outputs.push_back(out_csv);

    const ObservableSet scaled = normalized(obs);
    std::vector<double> taus(scaled.lags.begin(), scaled.lags.end());
    chart.series.push_back({rs.symbol + " L+/s^3", taus, scaled.l_plus, "", false, false});
    chart.series.push_back({rs.symbol + " L-/s^3", taus, scaled.l_minus, "", true, false});
    std::printf("%s: %zu returns, sigma = %s, zeroed %zu\n", rs.symbol.c_str(),
                rs.returns.size(), format_double(obs.sigma, 6).c_str(),
                rs.zeroed_count);
  }
  chart.hlines = {{0.0, ""}};
  const std::string svg = join(out_dir, "observables.svg");
  chart.write(svg);
  manifest.outputs.push_back(svg);
  manifest.write(join(out_dir, "observables_manifest.txt"));
  return 0;
}

int cmd_calibrate(const CommonOptions& opt, const std::string& fit_form,
                  std::optional<double> fix_b, bool qarch,
                  const fs::path& out_dir) {
  RunManifest manifest;
  manifest.command = "calibrate";
  manifest.tool_version = kVersion;
  manifest.config = {{"tau_max", std::to_string(opt.tau_max)},
                     {"cutoff", format_double(opt.cutoff, 6)},
                     {"fit", fit_form},
                     {"qarch", qarch ? "1" : "0"},
                     {"demean", opt.demean ? "1" : "0"},
                     {"input_mode", opt.as_returns ? "returns" : "prices"}};
  if (fix_b) manifest.config.emplace_back("fix_b", format_double(*fix_b, 6));

  const bool do_tpl = fit_form == "tpl" || fit_form == "both";
  const bool do_twoexp = fit_form == "2exp" || fit_form == "both";

  for (const std::string& path : opt.inputs) {
    manifest.inputs.emplace_back(path, fnv1a64_file_hex(path));
    const ReturnSeries rs =
        load_input(path, opt.as_returns, opt.cutoff, opt.demean, opt.cols);
    const ObservableSet obs = estimate_observables(rs, opt.tau_max);
    const KernelEstimate ke = invert_observables(obs);
    const std::string stem = stem_of(path);

    const std::string kernels_csv = join(out_dir, stem + "_kernels.csv");
    write_kernels_csv(kernels_csv, ke);
    manifest.outputs.push_back(kernels_csv);
    if (ke.beyond_perturbative)
      warn(stem + ": kernel amplitudes exceed 0.6, first-order inversion "
                  "is unreliable");

    // parametric fits target the volatility-feedback amplitude k_v
    const std::vector<double> weights = fit_weights(ke.se_k_v);
    FitOptions fopt;
    fopt.fix_b = fix_b;
    std::vector<KernelFit> fits;
    if (do_tpl) fits.push_back(fit_truncated_power_law(ke.k_v, weights, fopt));
    if (do_twoexp) fits.push_back(fit_two_exponential(ke.k_v, weights, {}));

    const std::string fits_csv = join(out_dir, stem + "_fits.csv");
    {
      std::ofstream outf(fits_csv, std::ios::binary);
      if (!outf) throw InputError("cannot write " + fits_csv);
      outf << fit_csv_header() << '\n';
      for (const KernelFit& fit : fits) outf << fit_csv_row(fit) << '\n';
    }
    manifest.outputs.push_back(fits_csv);

    const std::string report_path = join(out_dir, stem + "_fit_report.txt");
    {
      std::ofstream outf(report_path, std::ios::binary);
      if (!outf) throw InputError("cannot write " + report_path);
      outf << stem << ": k_v fits over " << ke.lags.size() << " lags, sigma = "
           << format_double(ke.sigma, 8) << "\n";
      outf << "first-order validity: "
           << (ke.beyond_perturbative ? "exceeded (|k| > 0.6)" : "ok") << "\n\n";
      for (const KernelFit& fit : fits) outf << fit_report(fit) << "\n";
    }
    manifest.outputs.push_back(report_path);

    if (qarch) {
      const QarchKernels q = to_qarch(ke);
      const std::string qm = join(out_dir, stem + "_qarch.csv");
      const std::string ql = join(out_dir, stem + "_qarch_linear.csv");
      write_qarch_matrix_csv(qm, q);
      write_qarch_linear_csv(ql, q);
      manifest.outputs.push_back(qm);
      manifest.outputs.push_back(ql);
      std::printf("%s: qarch diagonal dominance = %s\n", stem.c_str(),
                  format_double(q.diagonal_dominance, 4).c_str());
    }

    SvgChart chart;
    chart.title = stem + " feedback kernels";
    chart.x_label = "lag (days)";
    chart.y_label = "kernel amplitude";
    std::vector<double> taus(ke.lags.begin(), ke.lags.end());
    chart.series.push_back({"k_v", taus, ke.k_v, "", false, true});
    chart.series.push_back({"k_l", taus, ke.k_l, "", false, true});
    for (const KernelFit& fit : fits) {
      std::vector<double> fitted(taus.size());
      for (std::size_t i = 0; i < taus.size(); ++i) {
        if (fit.form == FitForm::truncated_power_law) {
          const double p[3] = {fit.A, fit.b, std::log(fit.T)};
          fitted[i] = fitdetail::tpl_value(p, taus[i]);
        } else {
          const double p[4] = {fit.A1, std::log(fit.T1), fit.A2,
                               std::log(fit.T2)};
          fitted[i] = fitdetail::twoexp_value(p, taus[i]);
        }
      }
      chart.series.push_back({fit.form == FitForm::truncated_power_law
                                  ? "k_v fit: power law"
                                  : "k_v fit: two-exp",
                              taus, fitted, "", false, false});
    }
    chart.hlines = {{0.0, ""}};
    const std::string svg = join(out_dir, stem + "_calibrate.svg");
    chart.write(svg);
    manifest.outputs.push_back(svg);

    std::printf("%s: sigma = %s, max |k| at lag 1: k_v = %s, k_l = %s\n",
                stem.c_str(), format_double(ke.sigma, 6).c_str(),
                format_double(ke.k_v.empty() ? 0.0 : ke.k_v[0], 4).c_str(),
                format_double(ke.k_l.empty() ? 0.0 : ke.k_l[0], 4).c_str());
  }
  manifest.write(join(out_dir, "calibrate_manifest.txt"));
  return 0;
}

int cmd_simulate(const std::string& config_path, const std::string& out_name,
                 std::optional<std::uint64_t> seed_override,
                 const fs::path& out_dir) {
  SimConfig cfg = load_sim_config(config_path);
  if (seed_override) cfg.seed = *seed_override;
  const SimResult result = simulate(cfg);

  const std::string out_csv = join(out_dir, out_name);
  write_returns_csv(out_csv, result.series);

  RunManifest manifest;
  manifest.command = "simulate";
  manifest.tool_version = kVersion;
  manifest.inputs.emplace_back(config_path, fnv1a64_file_hex(config_path));
  manifest.config = {
      {"sigma0", format_double(cfg.sigma0)},
      {"tau_max", std::to_string(cfg.tau_max())},
      {"length", std::to_string(cfg.length)},
      {"burn_in", std::to_string(cfg.burn_in)},
      {"sigma_floor", format_double(cfg.sigma_floor, 6)},
      {"er_mode", cfg.er_defaulted ? "leading_order" : "explicit"}};
  manifest.seed = cfg.seed;
  manifest.outputs.push_back(out_csv);
  manifest.write(join(out_dir, "simulate_manifest.txt"));

  std::printf("simulated %zu returns, floor hits %zu (%.3f%%)\n",
              result.series.returns.size(), result.floor_hits,
              100.0 * result.floor_rate);
  return 0;
}

int cmd_verify(const std::string& config_path, int replicas,
               std::optional<std::uint64_t> seed_override,
               const fs::path& out_dir) {
  SimConfig cfg;
  RunManifest manifest;
  manifest.command = "verify";
  manifest.tool_version = kVersion;
  std::string config_name = "builtin";
  if (config_path.empty()) {
    cfg = builtin_verify_config();
  } else {
    cfg = load_sim_config(config_path);
    manifest.inputs.emplace_back(config_path, fnv1a64_file_hex(config_path));
    config_name = config_path;
  }
  if (seed_override) cfg.seed = *seed_override;

  VerifyOptions opt;
  opt.replicas = replicas;
  VerifyReport report = run_verification(cfg, opt);
  report.config_name = config_name;

  const std::string report_path = join(out_dir, "verify_report.txt");
  {
    std::ofstream outf(report_path, std::ios::binary);
    if (!outf) throw InputError("cannot write " + report_path);
    outf << report.render();
  }
  std::fputs(report.render().c_str(), stdout);

  manifest.config = {{"config", config_name},
                     {"replicas", std::to_string(replicas)},
                     {"tau_max", std::to_string(cfg.tau_max())},
                     {"length", std::to_string(cfg.length)}};
  manifest.seed = cfg.seed;
  manifest.outputs.push_back(report_path);
  manifest.write(join(out_dir, "verify_manifest.txt"));
  return report.all_passed ? 0 : 5;
}

int cmd_roll(const CommonOptions& opt, const std::string& index_path,
             std::size_t window, std::size_t lag_average, std::size_t step,
             const fs::path& out_dir) {
  RollingConfig rcfg;
  rcfg.window = window;
  rcfg.lag_average = lag_average;
  rcfg.step = step;

  RunManifest manifest;
  manifest.command = "roll";
  manifest.tool_version = kVersion;
  manifest.config = {{"window", std::to_string(window)},
                     {"lag_average", std::to_string(lag_average)},
                     {"step", std::to_string(step)},
                     {"cutoff", format_double(opt.cutoff, 6)},
                     {"input_mode", opt.as_returns ? "returns" : "prices"}};

  std::vector<RollingIndicator> indicators;
  for (const std::string& path : opt.inputs) {
    manifest.inputs.emplace_back(path, fnv1a64_file_hex(path));
    const ReturnSeries rs =
        load_input(path, opt.as_returns, opt.cutoff, opt.demean, opt.cols);
    indicators.push_back(rolling_indicators(rs, rcfg));
    const std::string out_csv = join(out_dir, stem_of(path) + "_indicator.csv");
    write_rolling_csv(out_csv, indicators.back());
    manifest.outputs.push_back(out_csv);
  }

  RollingIndicator market = market_average(indicators);
  if (!index_path.empty()) {
    manifest.inputs.emplace_back(index_path, fnv1a64_file_hex(index_path));
    const IndexSeries idx = load_index(index_path, opt.cols);
    const SigmaSeries sigma = index_volatility(index_returns(idx), rcfg);
    attach_index_volatility(market, sigma);
  }
  const std::string market_csv = join(out_dir, "market_indicator.csv");
  write_rolling_csv(market_csv, market);
  manifest.outputs.push_back(market_csv);

  // time axis for the plots: evaluation index (dates stay in the CSVs)
  std::vector<double> t;
  t.reserve(market.indices.size());
  for (std::size_t i : market.indices) t.push_back(static_cast<double>(i));
  const std::vector<double> tx = thin(t, 2000);

  SvgChart kv_chart;
  kv_chart.title = "rolling volatility feedback";
  kv_chart.x_label = "evaluation index";
  kv_chart.y_label = "lag-averaged K_V";
  kv_chart.series.push_back({"market K_V", tx, thin(market.k_bar_v, 2000), "", false, false});
  kv_chart.hlines = {{0.06, "low"}, {0.13, "medium"}, {0.20, "high"}};
  const std::string kv_svg = join(out_dir, "rolling_kv.svg");
  kv_chart.write(kv_svg);
  manifest.outputs.push_back(kv_svg);

  SvgChart kl_chart;
  kl_chart.title = "rolling leverage feedback";
  kl_chart.x_label = "evaluation index";
  kl_chart.y_label = "lag-averaged K_L";
  kl_chart.series.push_back({"market K_L", tx, thin(market.k_bar_l, 2000), "", false, false});
  kl_chart.hlines = {{-0.02, "low"}, {-0.03, "medium"}, {-0.06, "high"}};
  const std::string kl_svg = join(out_dir, "rolling_kl.svg");
  kl_chart.write(kl_svg);
  manifest.outputs.push_back(kl_svg);

  if (!market.sigma_r.empty()) {
    SvgChart sg;
    sg.title = "rolling index volatility";
    sg.x_label = "evaluation index";
    sg.y_label = "sigma_R";
    sg.series.push_back({"sigma_R", tx, thin(market.sigma_r, 2000), "", false, false});
    const std::string sg_svg = join(out_dir, "rolling_sigma.svg");
    sg.write(sg_svg);
    manifest.outputs.push_back(sg_svg);
  }

  manifest.write(join(out_dir, "roll_manifest.txt"));
  std::printf("rolling indicators: %zu stocks, %zu evaluations\n",
              indicators.size(), market.indices.size());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"volatility feedback calibration toolkit"};
  app.fallthrough();
  app.require_subcommand(1);

  int threads = 0;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed_override;
  app.add_option("--threads", threads, "worker thread count (0 = default)");
  app.add_option("--out-dir", out_dir, "output directory")
      ->capture_default_str();
  app.add_option("--seed", seed_override, "override the configured seed");

  CommonOptions obs_opt;
  bool normalize = false;
  CLI::App* obs_cmd =
      app.add_subcommand("observables", "estimate L+(tau), L-(tau), V(tau)");
  add_common(obs_cmd, obs_opt);
  obs_cmd->add_flag("--normalize", normalize,
                    "write dimensionless l/sigma^3, v/sigma^4");

  CommonOptions cal_opt;
  std::string fit_form = "both";
  double fix_b_value = 0.0;
  bool qarch = false;
  CLI::App* cal_cmd = app.add_subcommand(
      "calibrate", "invert observables into kernels and fit them");
  add_common(cal_cmd, cal_opt);
  cal_cmd->add_option("--fit", fit_form, "tpl | 2exp | both")
      ->check(CLI::IsMember({"tpl", "2exp", "both"}))
      ->capture_default_str();
  CLI::Option* fix_b_opt =
      cal_cmd->add_option("--fix-b", fix_b_value, "pin the power-law exponent");
  cal_cmd->add_flag("--qarch", qarch, "also write the quadratic-ARCH kernels");

  std::string sim_config;
  std::string sim_out = "sim_returns.csv";
  CLI::App* sim_cmd =
      app.add_subcommand("simulate", "generate a synthetic return series");
  sim_cmd->add_option("--config", sim_config, "simulation config file")
      ->required()
      ->check(CLI::ExistingFile);
  sim_cmd->add_option("--out", sim_out, "output returns CSV name")
      ->capture_default_str();

  std::string verify_config;
  int replicas = 1;
  CLI::App* verify_cmd = app.add_subcommand(
      "verify", "closed-loop simulate + estimate consistency checks");
  verify_cmd->add_option("--config", verify_config,
                         "simulation config (default: built-in)")
      ->check(CLI::ExistingFile);
  verify_cmd->add_option("--replicas", replicas, "independent replicas")
      ->capture_default_str();

  CommonOptions roll_opt;
  std::string index_path;
  std::size_t window = 400, lag_average = 10, step = 1;
  CLI::App* roll_cmd = app.add_subcommand(
      "roll", "rolling-window non-stationarity indicators");
  add_common(roll_cmd, roll_opt);
  roll_cmd->add_option("--index", index_path, "index CSV (date,close,divisor)")
      ->check(CLI::ExistingFile);
  roll_cmd->add_option("--window", window, "window length")
      ->capture_default_str();
  roll_cmd->add_option("--lag-avg", lag_average, "lags averaged")
      ->capture_default_str();
  roll_cmd->add_option("--step", step, "evaluation stride")
      ->capture_default_str();

  int rc = 0;
  try {
    app.parse(argc, argv);
    set_thread_count(threads);
    fs::path out(out_dir);
    fs::create_directories(out);
    if (*obs_cmd) rc = cmd_observables(obs_opt, normalize, out);
    if (*cal_cmd)
      rc = cmd_calibrate(cal_opt, fit_form,
                         *fix_b_opt ? std::optional<double>(fix_b_value)
                                    : std::nullopt,
                         qarch, out);
    if (*sim_cmd) rc = cmd_simulate(sim_config, sim_out, seed_override, out);
    if (*verify_cmd)
      rc = cmd_verify(verify_config, replicas, seed_override, out);
    if (*roll_cmd)
      rc = cmd_roll(roll_opt, index_path, window, lag_average, step, out);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 3;
  } catch (const InputError& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return 2;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 3;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  }
  return rc;
}
