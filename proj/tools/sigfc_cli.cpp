// sigfc_cli: signatures, kernel weights, fits, forecasts and backtests from CSV panels.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "run_config.hpp"
#include "sigfc/sigfc.hpp"

using namespace sigfc;
using sigfc::cli::json;
using sigfc::cli::RunConfig;

namespace {

// Flags shared by every subcommand; each one overrides the config file.
struct CommonFlags {
  std::string config;
  std::optional<std::string> input, output, date_column, target_column;
  std::optional<std::size_t> threads;
  int verbose = 0;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool needs_input = true) {
  cmd->add_option("-c,--config", f.config, "JSON run configuration (schema 1)")->check(CLI::ExistingFile);
  if (needs_input) {
    cmd->add_option("-i,--input", f.input, "input CSV panel");
    cmd->add_option("--date-column", f.date_column, "name of the date column");
    cmd->add_option("--target-column", f.target_column, "name of the target column");
  }
  cmd->add_option("-o,--output", f.output, "output file (default: stdout)");
  cmd->add_option("-j,--threads", f.threads, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_flag("-v,--verbose", f.verbose, "progress and screening report on stderr");
}

RunConfig resolve(const CommonFlags& f) {
  RunConfig rc = f.config.empty() ? cli::parse_config(json{{"schema", 1}}) : cli::load_config(f.config);
  if (f.input) rc.input = *f.input;
  if (f.output) rc.output = *f.output;
  if (f.date_column) rc.ingest.date_column = *f.date_column;
  if (f.target_column) rc.ingest.target_column = *f.target_column;
  if (f.threads) rc.forecast.threads = *f.threads;
  rc.verbosity += f.verbose;
  if (rc.ingest.date_column == rc.ingest.target_column)
    throw InvalidArgument("date and target columns must differ");
  return rc;
}

FactorPanel load_panel(const RunConfig& rc) {
  if (rc.input.empty()) throw InvalidArgument("no input file (use --input or \"input\" in the config)");
  return io::ingest_csv(rc.input, rc.ingest);
}

/// '#' header: command, extra settings, then the effective config.
std::string header(const std::string& command, const RunConfig& rc, const json& extra = json::object()) {
  std::ostringstream out;
  out << "# sigfc " << command << '\n';
  for (const auto& item : extra.items()) out << "# " << item.key() << " = " << item.value().dump() << '\n';
  std::istringstream cfg(cli::effective_json(rc).dump(2));
  std::string line;
  while (std::getline(cfg, line)) out << "# " << line << '\n';
  return out.str();
}

void emit(const RunConfig& rc, const std::string& text) {
  if (rc.output.empty()) {
    std::fwrite(text.data(), 1, text.size(), stdout);
    std::fflush(stdout);
    return;
  }
  std::ofstream out(rc.output, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidArgument("cannot write '" + rc.output + "'");
  out << text;
  if (!out) throw DataError("failed writing '" + rc.output + "'");
}

std::string join_index(const std::vector<std::size_t>& idx) {
  std::string s;
  for (std::size_t i = 0; i < idx.size(); ++i) s += (i ? "_" : "") + std::to_string(idx[i]);
  return s;
}

const std::vector<double>& column_of(const FactorPanel& p, const std::string& name, const RunConfig& rc) {
  if (name == rc.ingest.target_column) return p.target;
  for (std::size_t j = 0; j < p.factor_count(); ++j)
    if (p.factor_names[j] == name) return p.factors[j];
  throw DataError("column '" + name + "' not found in '" + rc.input + "'");
}

void warn_fallbacks(const std::vector<ForecastRow>& rows) {
  std::size_t n = 0;
  for (const auto& r : rows) n += r.fallback;
  if (n)
    std::cerr << "warning: " << n << " of " << rows.size()
              << " fits could not use the selected lambda (weighted design too degenerate) and fell back to a larger one\n";
}

std::string percent_cell(const std::optional<double>& e) { return e ? format_percent(*e, 2) : "undefined"; }

void report_screening(const std::vector<ScreeningDecision>& report, const RunConfig& rc) {
  if (rc.verbosity < 1) return;
  for (const auto& d : report) {
    std::cerr << "screen: " << d.factor << " " << to_string(d.action) << " corr=" << io::format_fixed(d.correlation, 4);
    if (d.action == ScreenAction::collinear)
      std::cerr << " partner=" << d.partner << " partner_corr=" << io::format_fixed(d.partner_correlation, 4);
    std::cerr << '\n';
  }
}

// Commands

struct SigFlags {
  std::optional<std::string> column;
  std::optional<std::size_t> depth, window;
  bool augment = false;
};

std::string cmd_sig(const RunConfig& rc, const SigFlags& f) {
  const auto panel = load_panel(rc);
  const std::string name = f.column.value_or(rc.ingest.target_column);
  const auto& series = column_of(panel, name, rc);
  const std::size_t depth = f.depth.value_or(rc.forecast.depth);
  const std::size_t l = f.window.value_or(series.size() - 1);
  if (l + 1 > series.size())
    throw DataError("window " + std::to_string(l) + " needs " + std::to_string(l + 1) + " points, column has " +
                    std::to_string(series.size()));
  const DataStream s = DataStream::from_series(std::span<const double>(series).last(l + 1));
  const auto sig = f.augment ? signature(augment_time(s), depth) : signature(s, depth);
  std::string out = header("sig", rc, {{"column", name}, {"depth", depth}, {"window", l}, {"augment", f.augment}});
  out += "level,multi_index,value\n";
  for (std::size_t k = 0; k <= depth; ++k) {
    const auto level = sig.level(k);
    for (std::size_t i = 0; i < level.size(); ++i)
      out += std::to_string(k) + ',' + join_index(multi_index(sig.dim(), k, i)) + ',' + io::format_double(level[i]) +
             '\n';
  }
  return out;
}

struct KernelFlags {
  std::optional<std::string> column;
  std::optional<std::size_t> depth, window;
  std::optional<bool> augment;
};

std::string cmd_kernel(const RunConfig& rc, const KernelFlags& f) {
  const auto panel = load_panel(rc);
  const std::string name = f.column.value_or(rc.ingest.target_column);
  const auto& series = column_of(panel, name, rc);
  const KernelConfig kcfg{f.depth.value_or(rc.forecast.depth), f.window.value_or(rc.forecast.window), 1.0,
                          f.augment.value_or(rc.forecast.augment_kernel)};
  kcfg.validate();
  const std::size_t l = kcfg.window;
  if (series.size() < l + 1) throw DataError("series shorter than one window");
  auto window = [&](std::size_t end) {
    return DataStream::from_series(std::span<const double>(series).subspan(end - l, l + 1));
  };
  const auto last = window(series.size() - 1);
  std::string out = header("kernel", rc,
                           {{"column", name}, {"depth", kcfg.depth}, {"window", l}, {"augment", kcfg.augment}});
  out += "date,kernel,distance\n";
  for (std::size_t end = l; end < series.size(); ++end) {
    const auto w = window(end);
    out += panel.dates[end] + ',' + io::format_double(sig_kernel(w, last, kcfg)) + ',' +
           io::format_double(sig_distance(w, last, kcfg)) + '\n';
  }
  return out;
}

std::string cmd_weights(const RunConfig& rc, std::size_t horizon) {
  const auto panel = load_panel(rc);
  rc.forecast.validate();
  const auto screened = screen_factors(panel, rc.forecast.rho_min, rc.forecast.rho_max);
  report_screening(screened.report, rc);
  const std::size_t t = panel.length() - 1;
  if (panel.length() < min_history(horizon, rc.forecast))
    throw DataError("insufficient history: horizon " + std::to_string(horizon) + " needs " +
                    std::to_string(min_history(horizon, rc.forecast)) + " observations, have " +
                    std::to_string(panel.length()));
  const auto w = horizon_weights(screened.panel, horizon, rc.forecast, t);
  std::string out = header("weights", rc, {{"horizon", horizon}});
  out += "date,weight\n";
  for (std::size_t tau = 0; tau < w.weights.size(); ++tau)
    out += panel.dates[tau] + ',' + io::format_double(w.weights[tau]) + '\n';
  return out;
}

std::vector<std::string> feature_names(const FactorPanel& p, const ForecastConfig& cfg) {
  std::vector<std::string> names = p.factor_names;
  const std::size_t d = cfg.augment_features ? 2 : 1;
  for (std::size_t k = 0; k <= cfg.depth; ++k) {
    std::size_t size = 1;
    for (std::size_t i = 0; i < k; ++i) size *= d;
    for (std::size_t i = 0; i < size; ++i) names.push_back("sig[" + join_index(multi_index(d, k, i)) + "]");
  }
  return names;
}

std::string cmd_fit(const RunConfig& rc, std::size_t horizon, std::optional<double> lambda) {
  const auto panel = load_panel(rc);
  rc.forecast.validate();
  const auto screened = screen_factors(panel, rc.forecast.rho_min, rc.forecast.rho_max);
  report_screening(screened.report, rc);
  const std::size_t t = panel.length() - 1;
  const double lam = lambda ? *lambda : select_lambda(screened.panel, horizon, rc.forecast, t).lambda;
  const auto hf = fit_horizon(screened.panel, horizon, rc.forecast, lam, t);
  const auto names = feature_names(screened.panel, rc.forecast);
  std::string out = header("fit", rc,
                           {{"horizon", horizon},
                            {"lambda", lam},
                            {"forecast", io::format_double(hf.forecast)},
                            {"empty_selection", hf.fit.empty_selection}});
  out += "feature,coefficient,selected\n";
  for (std::size_t j = 0; j < names.size(); ++j) {
    const bool sel = std::find(hf.fit.support.begin(), hf.fit.support.end(), j) != hf.fit.support.end();
    out += names[j] + ',' + io::format_double(hf.fit.coefficients[static_cast<Eigen::Index>(j)]) + ',' +
           (sel ? "1" : "0") + '\n';
  }
  return out;
}

std::string cmd_forecast(const RunConfig& rc) {
  const auto panel = load_panel(rc);
  const auto fc = forecast(panel, rc.forecast);
  report_screening(fc.screening, rc);
  warn_fallbacks(fc.rows);
  std::string out = header("forecast", rc);
  out += "origin_date,horizon,forecast\n";
  for (const auto& r : fc.rows)
    out += r.origin_date + ',' + std::to_string(r.horizon) + ',' + io::format_double(r.forecast) + '\n';
  return out;
}

std::vector<std::size_t> backtest_origins(const FactorPanel& panel, const RunConfig& rc) {
  std::vector<std::size_t> origins;
  if (!rc.origins.empty()) {
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < panel.length(); ++i) index[panel.dates[i]] = i;
    for (const auto& d : rc.origins) {
      const auto it = index.find(d);
      if (it == index.end()) throw DataError("backtest origin " + d + " is not a date in '" + rc.input + "'");
      origins.push_back(it->second);
    }
    return origins;
  }
  // Default: origins in the second half of the panel, so that every fit has
  // at least half the history behind it.
  const std::size_t h = rc.forecast.horizons;
  const std::size_t first = std::max(min_history(h, rc.forecast) - 1, panel.length() / 2);
  if (panel.length() < first + h + 1)
    throw DataError("panel of length " + std::to_string(panel.length()) + " admits no backtest origin (needs " +
                    std::to_string(first + h + 1) + " observations)");
  for (std::size_t o = first; o + h < panel.length(); o += rc.origin_step) origins.push_back(o);
  return origins;
}

std::string cmd_backtest(const RunConfig& rc) {
  const auto panel = load_panel(rc);
  rc.forecast.validate();
  const auto origins = backtest_origins(panel, rc);
  if (rc.verbosity >= 1) std::cerr << "backtest: " << origins.size() << " origins\n";
  const auto bt = backtest(panel, rc.forecast, origins);
  warn_fallbacks(bt.rows);
  std::string out = header("backtest", rc, {{"origins", origins.size()}});
  out += "origin_date,horizon,actual,forecast,relative_error\n";
  for (const auto& r : bt.rows)
    out += r.origin_date + ',' + std::to_string(r.horizon) + ',' + io::format_double(*r.actual) + ',' +
           io::format_double(r.forecast) + ',' + percent_cell(r.relative_error) + '\n';
  out += "\nhorizon,mean_relative_error,count,undefined\n";
  for (const auto& s : bt.summary)
    out += std::to_string(s.horizon) + ',' +
           (s.count ? format_percent(s.mean_relative_error, 2) : std::string("undefined")) + ',' +
           std::to_string(s.count) + ',' + std::to_string(s.undefined) + '\n';
  return out;
}

std::string cmd_synth(RunConfig rc, std::optional<std::uint64_t> seed) {
  if (seed) rc.seed = seed;
  if (!rc.seed) throw InvalidArgument("synth requires a seed (--seed or \"seed\" in the config)");
  const auto sp = gen_synthetic(*rc.seed, rc.synth);
  std::ostringstream body;
  io::write_panel(body, sp.panel, rc.ingest.date_column, rc.ingest.target_column);
  return header("synth", rc) + body.str();
}

int exit_code(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::usage: return 1;
    case ErrorKind::data: return 2;
    case ErrorKind::numerical: return 3;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Signature-kernel forecasting toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "sigfc 1.0");

  CommonFlags common;

  auto* sig = app.add_subcommand("sig", "truncated signature of a column's trailing window");
  SigFlags sig_flags;
  add_common(sig, common);
  sig->add_option("--column", sig_flags.column, "column to sign (default: target)");
  sig->add_option("-N,--depth", sig_flags.depth, "truncation depth (0 allowed)");
  sig->add_option("-l,--window", sig_flags.window, "window length l; signs the last l+1 points (default: all)");
  sig->add_flag("--augment", sig_flags.augment, "time-augment before signing");

  auto* kernel = app.add_subcommand("kernel", "signature kernel of every window against the last one");
  KernelFlags kernel_flags;
  add_common(kernel, common);
  kernel->add_option("--column", kernel_flags.column, "column to window (default: target)");
  kernel->add_option("-N,--depth", kernel_flags.depth, "truncation depth");
  kernel->add_option("-l,--window", kernel_flags.window, "window length l");
  kernel->add_option("--augment", kernel_flags.augment, "time-augment windows (true/false)");

  std::size_t horizon = 1;
  std::optional<double> lambda;
  auto* weights = app.add_subcommand("weights", "adaptive sample weights at the last origin");
  add_common(weights, common);
  weights->add_option("-H,--horizon", horizon, "horizon Δt")->check(CLI::PositiveNumber);

  auto* fit = app.add_subcommand("fit", "two-step LASSO fit for one horizon at the last origin");
  add_common(fit, common);
  fit->add_option("-H,--horizon", horizon, "horizon Δt")->check(CLI::PositiveNumber);
  fit->add_option("--lambda", lambda, "penalty (default: rolling-origin selection from the grid)")
      ->check(CLI::NonNegativeNumber);

  auto* fc = app.add_subcommand("forecast", "forecast every horizon from the last observation");
  add_common(fc, common);

  std::vector<std::string> origins;
  std::optional<std::size_t> origin_step;
  auto* bt = app.add_subcommand("backtest", "rolling-origin backtest with relative errors");
  add_common(bt, common);
  bt->add_option("--origins", origins, "origin dates (default: second half of the panel)");
  bt->add_option("--origin-step", origin_step, "spacing of default origins")->check(CLI::PositiveNumber);

  std::optional<std::uint64_t> seed;
  auto* synth = app.add_subcommand("synth", "generate a synthetic regime-switching panel");
  add_common(synth, common, false);
  synth->add_option("--seed", seed, "random seed (required here or in the config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    RunConfig rc = resolve(common);
    std::string text;
    if (*sig) {
      text = cmd_sig(rc, sig_flags);
    } else if (*kernel) {
      text = cmd_kernel(rc, kernel_flags);
    } else if (*weights) {
      text = cmd_weights(rc, horizon);
    } else if (*fit) {
      text = cmd_fit(rc, horizon, lambda);
    } else if (*fc) {
      text = cmd_forecast(rc);
    } else if (*bt) {
      if (!origins.empty()) rc.origins = origins;
      if (origin_step) rc.origin_step = *origin_step;
      text = cmd_backtest(rc);
    } else if (*synth) {
      text = cmd_synth(rc, seed);
    }
    emit(rc, text);
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
