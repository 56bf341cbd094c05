#pragma once

// JSON run configuration for sigfc_cli.

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sigfc/dates.hpp"
#include "sigfc/error.hpp"
#include "sigfc/io.hpp"
#include "sigfc/pipeline.hpp"

namespace sigfc::cli {

using json = nlohmann::json;

inline constexpr int schema_version = 1;

struct RunConfig {
  std::string input;
  std::string output;  // empty: stdout
  io::IngestOptions ingest;
  std::optional<std::uint64_t> seed;
  int verbosity = 0;
  ForecastConfig forecast;
  // backtest origins as dates; empty means the second half of the panel at origin_step
  std::vector<std::string> origins;
  std::size_t origin_step = 1;
  RegimeSpec synth;
};

inline RegimeSpec default_synth_spec() {
  RegimeSpec spec;
  spec.length = 200;
  spec.factors = 2;
  spec.level = 10.0;
  spec.regimes = {{0.02, 1.5, 12.0, 0.0, 0.15, {0.6, 0.0}}, {-0.01, 1.5, 12.0, 3.141592653589793, 0.15, {-0.6, 0.0}}};
  spec.schedule = {{0, 0}, {50, 1}, {100, 0}, {150, 1}};
  return spec;
}

namespace detail {

inline void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw InvalidArgument("config: '" + where + "' must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& item : obj.items())
    if (!ok.count(item.key()))
      throw InvalidArgument("config: unknown key '" + (where.empty() ? "" : where + ".") + item.key() + "'");
}

template <class T>
T get(const json& obj, const char* key, const std::string& where, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw InvalidArgument("config: '" + (where.empty() ? "" : where + ".") + key + "' has the wrong type");
  }
}

inline std::size_t get_count(const json& obj, const char* key, const std::string& where, std::size_t fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw InvalidArgument("config: '" + (where.empty() ? "" : where + ".") + key + "' must be a non-negative integer");
  return v.get<std::size_t>();
}

inline Regime parse_regime(const json& r, const std::string& where) {
  check_keys(r, where, {"trend", "seasonal_amplitude", "seasonal_period", "seasonal_phase", "noise", "loadings"});
  Regime g;
  g.trend = get(r, "trend", where, g.trend);
  g.seasonal_amplitude = get(r, "seasonal_amplitude", where, g.seasonal_amplitude);
  g.seasonal_period = get(r, "seasonal_period", where, g.seasonal_period);
  g.seasonal_phase = get(r, "seasonal_phase", where, g.seasonal_phase);
  g.noise = get(r, "noise", where, g.noise);
  g.loadings = get(r, "loadings", where, g.loadings);
  return g;
}

inline json regime_json(const Regime& g) {
  return {{"trend", g.trend},
          {"seasonal_amplitude", g.seasonal_amplitude},
          {"seasonal_period", g.seasonal_period},
          {"seasonal_phase", g.seasonal_phase},
          {"noise", g.noise},
          {"loadings", g.loadings}};
}

}  // namespace detail

/// Parses a config document. Every key is optional except "schema"; unknown
/// keys at any level are errors.
inline RunConfig parse_config(const json& doc) {
  using detail::get;
  using detail::get_count;
  detail::check_keys(doc, "", {"schema", "input", "output", "date_column", "target_column", "factors", "frequency",
                               "seed", "verbosity", "threads", "forecast", "backtest", "synth"});
  if (!doc.contains("schema")) throw InvalidArgument("config: missing \"schema\" (expected 1)");
  if (!doc.at("schema").is_number_integer() || doc.at("schema").get<int>() != schema_version)
    throw InvalidArgument("config: unsupported schema " + doc.at("schema").dump() + " (expected 1)");

  RunConfig rc;
  rc.input = get(doc, "input", "", rc.input);
  rc.output = get(doc, "output", "", rc.output);
  rc.ingest.date_column = get(doc, "date_column", "", rc.ingest.date_column);
  rc.ingest.target_column = get(doc, "target_column", "", rc.ingest.target_column);
  if (doc.contains("factors")) {
    const auto& f = doc.at("factors");
    detail::check_keys(f, "factors", {"allow", "deny"});
    rc.ingest.allow = get(f, "allow", "factors", rc.ingest.allow);
    rc.ingest.deny = get(f, "deny", "factors", rc.ingest.deny);
  }
  if (doc.contains("frequency")) {
    const auto s = get<std::string>(doc, "frequency", "", "none");
    const auto f = dates::parse_frequency(s);
    if (!f) throw InvalidArgument("config: frequency must be none, daily, weekly or monthly, got '" + s + "'");
    rc.ingest.frequency = *f;
  }
  if (doc.contains("seed")) {
    const auto& s = doc.at("seed");
    if (!s.is_number_unsigned()) throw InvalidArgument("config: 'seed' must be a non-negative integer");
    rc.seed = s.get<std::uint64_t>();
  }
  rc.verbosity = get(doc, "verbosity", "", rc.verbosity);
  rc.forecast.threads = get_count(doc, "threads", "", rc.forecast.threads);

  if (doc.contains("forecast")) {
    const auto& f = doc.at("forecast");
    const std::string w = "forecast";
    detail::check_keys(f, w, {"horizons", "window", "depth", "temperature", "lambda_grid", "rho_min", "rho_max",
                              "augment_kernel", "augment_features", "kernel_windows", "validation_fraction"});
    auto& c = rc.forecast;
    c.horizons = get_count(f, "horizons", w, c.horizons);
    c.window = get_count(f, "window", w, c.window);
    c.depth = get_count(f, "depth", w, c.depth);
    c.temperature = get(f, "temperature", w, c.temperature);
    c.lambda_grid = get(f, "lambda_grid", w, c.lambda_grid);
    c.rho_min = get(f, "rho_min", w, c.rho_min);
    c.rho_max = get(f, "rho_max", w, c.rho_max);
    c.augment_kernel = get(f, "augment_kernel", w, c.augment_kernel);
    c.augment_features = get(f, "augment_features", w, c.augment_features);
    if (f.contains("kernel_windows")) {
      const auto s = get<std::string>(f, "kernel_windows", w, "joint");
      if (s == "joint")
        c.kernel_windows = KernelWindows::joint;
      else if (s == "target")
        c.kernel_windows = KernelWindows::target;
      else
        throw InvalidArgument("config: forecast.kernel_windows must be joint or target, got '" + s + "'");
    }
    c.validation_fraction = get(f, "validation_fraction", w, c.validation_fraction);
  }
  if (doc.contains("backtest")) {
    const auto& b = doc.at("backtest");
    detail::check_keys(b, "backtest", {"origins", "origin_step"});
    rc.origins = get(b, "origins", "backtest", rc.origins);
    rc.origin_step = get_count(b, "origin_step", "backtest", rc.origin_step);
    if (rc.origin_step == 0) throw InvalidArgument("config: backtest.origin_step must be >= 1");
  }
  rc.synth = default_synth_spec();
  if (doc.contains("synth")) {
    const auto& s = doc.at("synth");
    const std::string w = "synth";
    detail::check_keys(s, w, {"length", "factors", "level", "factor_persistence", "factor_volatility", "regimes",
                              "schedule", "start_date", "step_days"});
    auto& g = rc.synth;
    g.length = get_count(s, "length", w, g.length);
    g.factors = get_count(s, "factors", w, g.factors);
    g.level = get(s, "level", w, g.level);
    g.factor_persistence = get(s, "factor_persistence", w, g.factor_persistence);
    g.factor_volatility = get(s, "factor_volatility", w, g.factor_volatility);
    if (s.contains("regimes")) {
      if (!s.at("regimes").is_array()) throw InvalidArgument("config: synth.regimes must be an array");
      g.regimes.clear();
      for (std::size_t i = 0; i < s.at("regimes").size(); ++i)
        g.regimes.push_back(detail::parse_regime(s.at("regimes")[i], "synth.regimes[" + std::to_string(i) + "]"));
    }
    if (s.contains("schedule")) {
      try {
        g.schedule = s.at("schedule").get<std::vector<std::pair<std::size_t, std::size_t>>>();
      } catch (const json::exception&) {
        throw InvalidArgument("config: synth.schedule must be a list of [start, regime] pairs");
      }
    }
    g.start_date = get(s, "start_date", w, g.start_date);
    g.step_days = get_count(s, "step_days", w, g.step_days);
  }

  if (rc.ingest.date_column.empty() || rc.ingest.target_column.empty())
    throw InvalidArgument("config: column names must be non-empty");
  if (rc.ingest.date_column == rc.ingest.target_column)
    throw InvalidArgument("config: date_column and target_column must differ");
  return rc;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open config '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidArgument("config '" + path + "': " + e.what());
  }
  return parse_config(doc);
}

/// Effective configuration, defaults resolved. Thread count and output path
/// are left out: neither changes results, and reruns that differ only in
/// those must produce identical bytes.
inline json effective_json(const RunConfig& rc) {
  const auto& c = rc.forecast;
  json j;
  j["schema"] = schema_version;
  j["input"] = rc.input;
  j["date_column"] = rc.ingest.date_column;
  j["target_column"] = rc.ingest.target_column;
  j["factors"] = {{"allow", rc.ingest.allow}, {"deny", rc.ingest.deny}};
  j["frequency"] = dates::to_string(rc.ingest.frequency);
  j["seed"] = rc.seed ? json(*rc.seed) : json(nullptr);
  j["verbosity"] = rc.verbosity;
  j["forecast"] = {{"horizons", c.horizons},
                   {"window", c.window},
                   {"depth", c.depth},
                   {"temperature", c.temperature},
                   {"lambda_grid", c.lambda_grid},
                   {"rho_min", c.rho_min},
                   {"rho_max", c.rho_max},
                   {"augment_kernel", c.augment_kernel},
                   {"augment_features", c.augment_features},
                   {"kernel_windows", c.kernel_windows == KernelWindows::joint ? "joint" : "target"},
                   {"validation_fraction", c.validation_fraction}};
  j["backtest"] = {{"origins", rc.origins}, {"origin_step", rc.origin_step}};
  json regimes = json::array();
  for (const auto& g : rc.synth.regimes) regimes.push_back(detail::regime_json(g));
  j["synth"] = {{"length", rc.synth.length},
                {"factors", rc.synth.factors},
                {"level", rc.synth.level},
                {"factor_persistence", rc.synth.factor_persistence},
                {"factor_volatility", rc.synth.factor_volatility},
                {"regimes", regimes},
                {"schedule", rc.synth.schedule},
                {"start_date", rc.synth.start_date},
                {"step_days", rc.synth.step_days}};
  return j;
}

}  // namespace sigfc::cli
