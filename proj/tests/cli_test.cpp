#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out, err;
};

fs::path workdir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("sigfc_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path write_file(const std::string& name, const std::string& text) {
  const auto p = workdir() / name;
  std::ofstream(p, std::ios::binary) << text;
  return p;
}

Run run(const std::string& args) {
  const auto out = workdir() / "stdout.txt";
  const auto err = workdir() / "stderr.txt";
  const std::string cmd = std::string(SIGFC_CLI) + " " + args + " >" + out.string() + " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

// Non-comment lines of a CSV output.
std::vector<std::string> body(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line))
    if (line.empty() || line.front() != '#') lines.push_back(line);
  return lines;
}

std::vector<std::string> cells(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream s(line);
  std::string c;
  while (std::getline(s, c, ',')) out.push_back(c);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string series_csv(const std::vector<double>& y, const std::string& start = "2020-01-") {
  std::ostringstream s;
  s << "date,y\n";
  for (std::size_t i = 0; i < y.size(); ++i) {
    char day[8];
    std::snprintf(day, sizeof day, "%02zu", i + 1);
    s << (i < 31 ? start + day : "2020-02-" + std::to_string(10 + i - 31)) << ',' << y[i] << '\n';
  }
  return s.str();
}

// Daily panel of constant value, any length.
std::string constant_csv(std::size_t n, double c) {
  std::ostringstream s;
  s << "date,y\n";
  for (std::size_t i = 0; i < n; ++i) {
    const int year = 2000 + static_cast<int>(i / 12);
    const int month = 1 + static_cast<int>(i % 12);
    char d[16];
    std::snprintf(d, sizeof d, "%04d-%02d-01", year, month);
    s << d << ',' << c << '\n';
  }
  return s.str();
}

std::string synth_panel() {
  static const std::string path = [] {
    const auto p = workdir() / "synth.csv";
    const auto r = run("synth --seed 11 -o " + p.string());
    EXPECT_EQ(r.code, 0) << r.err;
    return p.string();
  }();
  return path;
}

}  // namespace

TEST(CliSig, RampGivesPowersOfIncrement) {
  const auto in = write_file("ramp.csv", series_csv({0, 1, 2, 3, 4}));
  const auto r = run("sig -i " + in.string() + " --depth 3");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto lines = body(r.out);
  ASSERT_EQ(lines.size(), 5u);
  EXPECT_EQ(lines[0], "level,multi_index,value");
  const double expected[] = {1, 4, 8, 64.0 / 6.0};
  const char* idx[] = {"", "0", "0_0", "0_0_0"};
  for (std::size_t k = 0; k < 4; ++k) {
    const auto c = cells(lines[k + 1]);
    ASSERT_EQ(c.size(), 3u) << lines[k + 1];
    EXPECT_EQ(c[0], std::to_string(k));
    EXPECT_EQ(c[1], idx[k]);
    EXPECT_NEAR(std::stod(c[2]), expected[k], 1e-12);
  }
}

TEST(CliSig, DepthZeroIsOneRow) {
  const auto in = write_file("ramp0.csv", series_csv({0, 1, 2}));
  const auto r = run("sig -i " + in.string() + " --depth 0");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(body(r.out), (std::vector<std::string>{"level,multi_index,value", "0,,1"}));
}

TEST(CliSig, RowCountIsSignatureDimension) {
  const auto in = write_file("walk.csv", series_csv({0, 1.5, -2, 0.25, 3, 1}));
  const auto r = run("sig -i " + in.string() + " --depth 3 --augment --window 4");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(body(r.out).size(), 1u + 15u);
  // A window of 4 spans 5 points: time moves 1, y moves 1 - 1.5.
  EXPECT_EQ(body(r.out)[2], "1,0,1");
  EXPECT_EQ(body(r.out)[3], "1,1,-0.5");
}

TEST(CliForecast, TwelveRowsAndByteIdenticalRerun) {
  const auto cfg = write_file("fc.json", R"({"schema": 1, "forecast": {"horizons": 12, "lambda_grid": [0, 0.01]}})");
  const auto a = run("forecast -c " + cfg.string() + " -i " + synth_panel());
  ASSERT_EQ(a.code, 0) << a.err;
  const auto lines = body(a.out);
  ASSERT_EQ(lines.size(), 13u);
  EXPECT_EQ(lines[0], "origin_date,horizon,forecast");
  for (std::size_t h = 1; h <= 12; ++h) EXPECT_EQ(cells(lines[h])[1], std::to_string(h));
  const auto b = run("forecast -c " + cfg.string() + " -i " + synth_panel() + " -j 4");
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out.find('\r'), std::string::npos);
}

TEST(CliForecast, ConstantSeries) {
  const auto in = write_file("const.csv", constant_csv(40, 2.75));
  const auto r = run("forecast -i " + in.string());
  ASSERT_EQ(r.code, 0) << r.err;
  const auto lines = body(r.out);
  ASSERT_EQ(lines.size(), 13u);
  for (std::size_t i = 1; i < lines.size(); ++i) EXPECT_NEAR(std::stod(cells(lines[i])[2]), 2.75, 1e-8);
}

TEST(CliForecast, EchoesEffectiveConfig) {
  const auto cfg = write_file("echo.json", R"({"schema": 1, "forecast": {"temperature": 0.25}})");
  const auto r = run("forecast -c " + cfg.string() + " -i " + synth_panel());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("# sigfc forecast\n", 0), 0u);
  EXPECT_NE(r.out.find("#     \"temperature\": 0.25"), std::string::npos);
  EXPECT_NE(r.out.find("#     \"rho_min\": 0.2"), std::string::npos);
}

TEST(CliBacktest, PerfectForecastIsZeroPercent) {
  const auto in = write_file("const_bt.csv", constant_csv(60, 3.5));
  const auto r = run("backtest -i " + in.string() + " --origin-step 5");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto lines = body(r.out);
  ASSERT_EQ(lines[0], "origin_date,horizon,actual,forecast,relative_error");
  std::size_t rows = 0;
  for (std::size_t i = 1; i < lines.size() && !lines[i].empty(); ++i, ++rows) EXPECT_EQ(cells(lines[i])[4], "0.00%");
  EXPECT_GT(rows, 0u);
}

TEST(CliBacktest, AggregateIsMeanOfRows) {
  const auto cfg = write_file("bt.json", R"({"schema": 1, "forecast": {"horizons": 3, "window": 6, "depth": 2},
                                            "backtest": {"origin_step": 7}})");
  const auto r = run("backtest -c " + cfg.string() + " -i " + synth_panel());
  ASSERT_EQ(r.code, 0) << r.err;
  const auto lines = body(r.out);
  std::vector<double> sum(3, 0.0);
  std::vector<int> count(3, 0);
  std::size_t i = 1;
  for (; i < lines.size() && !lines[i].empty(); ++i) {
    const auto c = cells(lines[i]);
    const double actual = std::stod(c[2]), fc = std::stod(c[3]);
    const double pct = std::stod(c[4]);
    EXPECT_NEAR(pct, 100 * std::abs(actual - fc) / std::abs(actual), 0.005 + 1e-9);
    sum[std::stoul(c[1]) - 1] += std::abs(actual - fc) / std::abs(actual);
    ++count[std::stoul(c[1]) - 1];
  }
  ASSERT_LT(i + 1, lines.size());
  EXPECT_EQ(lines[i + 1], "horizon,mean_relative_error,count,undefined");
  for (std::size_t h = 0; h < 3; ++h) {
    const auto c = cells(lines[i + 2 + h]);
    EXPECT_EQ(std::stoi(c[2]), count[h]);
    EXPECT_NEAR(std::stod(c[1]), 100 * sum[h] / count[h], 0.005 + 1e-9);
  }
}

TEST(CliBacktest, OriginsByDate) {
  const auto r = run("backtest -i " + synth_panel() + " --origins 2020-01-05 2020-06-07");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto lines = body(r.out);
  EXPECT_EQ(cells(lines[1])[0], "2020-01-05");
  EXPECT_EQ(cells(lines[13])[0], "2020-06-07");
  EXPECT_EQ(run("backtest -i " + synth_panel() + " --origins 1999-01-01").code, 2);
}

TEST(CliSynth, RequiresSeedAndIsDeterministic) {
  const auto missing = run("synth");
  EXPECT_EQ(missing.code, 1);
  EXPECT_NE(missing.err.find("seed"), std::string::npos);
  EXPECT_TRUE(missing.out.empty());
  const auto a = run("synth --seed 5");
  const auto b = run("synth --seed 5");
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out, run("synth --seed 6").out);
  EXPECT_EQ(body(a.out).size(), 201u);
}

TEST(CliErrors, ExitCodes) {
  const auto panel = synth_panel();
  EXPECT_EQ(run("").code, 1);
  EXPECT_EQ(run("frobnicate").code, 1);
  EXPECT_EQ(run("forecast --bogus").code, 1);
  EXPECT_EQ(run("forecast").code, 1);  // no input
  EXPECT_EQ(run("sig --help").code, 0);

  const auto typo = write_file("typo.json", R"({"schema": 1, "forecast": {"rho_mim": 0.3}})");
  const auto r = run("forecast -c " + typo.string() + " -i " + panel);
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("forecast.rho_mim"), std::string::npos) << r.err;
  EXPECT_TRUE(r.out.empty());

  EXPECT_EQ(run("forecast -c " + write_file("noschema.json", "{}").string() + " -i " + panel).code, 1);
  EXPECT_EQ(run("forecast -c " + write_file("schema2.json", R"({"schema": 2})").string() + " -i " + panel).code, 1);
  EXPECT_EQ(run("forecast -c " + write_file("broken.json", "{").string() + " -i " + panel).code, 1);
  EXPECT_EQ(run("forecast -c " + write_file("badgrid.json", R"({"schema": 1, "forecast": {"lambda_grid": []}})").string() +
                " -i " + panel)
                .code,
            1);

  const auto dup = write_file("dup.csv", "date,y\n2020-01-01,1\n2020-01-01,2\n");
  const auto d = run("forecast -i " + dup.string());
  EXPECT_EQ(d.code, 2);
  EXPECT_NE(d.err.find("2020-01-01"), std::string::npos);

  const auto short_panel = write_file("short.csv", series_csv({1, 2, 3, 4, 5, 6, 7, 8}));
  const auto s = run("forecast -i " + short_panel.string());
  EXPECT_EQ(s.code, 2);
  EXPECT_NE(s.err.find("insufficient history"), std::string::npos);

  EXPECT_EQ(run("sig -i " + (workdir() / "absent.csv").string()).code, 2);
}

TEST(CliWeightsAndFit, ShapesAndConsistency) {
  const auto w = run("weights -i " + synth_panel() + " -H 2");
  ASSERT_EQ(w.code, 0) << w.err;
  const auto wl = body(w.out);
  EXPECT_EQ(wl[0], "date,weight");
  EXPECT_EQ(wl.size(), 1u + 198u);  // samples τ = 0 .. t - Δt
  double sum = 0.0;
  for (std::size_t i = 1; i < wl.size(); ++i) sum += std::stod(cells(wl[i])[1]);
  EXPECT_NEAR(sum, 1.0, 1e-12);

  const auto f = run("fit -i " + synth_panel() + " -H 1 --lambda 0.01");
  ASSERT_EQ(f.code, 0) << f.err;
  const auto fl = body(f.out);
  EXPECT_EQ(fl[0], "feature,coefficient,selected");
  bool saw_intercept = false;
  for (std::size_t i = 1; i < fl.size(); ++i) {
    const auto c = cells(fl[i]);
    if (c[0] == "sig[]") {
      saw_intercept = true;
      EXPECT_EQ(c[2], "1");
    }
    if (c[2] == "0") {
      EXPECT_EQ(std::stod(c[1]), 0.0);
    }
  }
  EXPECT_TRUE(saw_intercept);

  const auto k = run("kernel -i " + synth_panel() + " --window 5 --depth 2");
  ASSERT_EQ(k.code, 0) << k.err;
  const auto kl = body(k.out);
  EXPECT_EQ(kl[0], "date,kernel,distance");
  EXPECT_EQ(kl.size(), 1u + 200u - 5u);
  EXPECT_EQ(std::stod(cells(kl.back())[2]), 0.0);
}
