#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "eqlink/cli/commands.hpp"
#include "eqlink/cli/instrument_file.hpp"
#include "eqlink/error.hpp"
#include "eqlink/pricer.hpp"

using namespace eqlink;
using namespace eqlink::cli;

namespace {

const std::filesystem::path kData = EQLINK_DATA_DIR;

CommandOutput run(std::vector<std::string> args) {
  args.insert(args.begin(), "eqlink");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

std::string data(const char* name) { return (kData / name).string(); }

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::filesystem::path write_temp(const std::string& name, const std::string& text) {
  const auto p = std::filesystem::temp_directory_path() / name;
  std::ofstream(p) << text;
  return p;
}

}  // namespace

TEST(InstrumentFile, EveryExampleLoadsAndPrices) {
  int count = 0;
  for (const auto& entry : std::filesystem::directory_iterator(kData)) {
    if (entry.path().extension() != ".json") continue;
    ++count;
    const auto file = load_instrument(entry.path());
    EXPECT_TRUE(file.validate().ok()) << entry.path();
    if (file.has_basket()) {
      EXPECT_NO_THROW(asian_call_price(file.basket(), file.corr, file.observation(), file.discount()))
          << entry.path();
    }
    if (file.segfund) {
      EXPECT_NO_THROW(segfund_put_price(*file.segfund, file.indices, file.corr, file.discount(),
                                        *file.segfund_maturity))
          << entry.path();
    }
  }
  EXPECT_GE(count, 4);
}

TEST(InstrumentFile, SchemaErrors) {
  using nlohmann::json;
  const json base = json::parse(R"({
    "indices": [{"name": "A", "spot": 100, "vol": 0.2, "div_yield": 0}],
    "weights": [100], "correlation": [[1]], "rate": 0.01,
    "observation": {"times": [1], "maturity": 1}})");
  EXPECT_NO_THROW(parse_instrument(base));

  auto unknown = base;
  unknown["volatility_surface"] = 1;
  EXPECT_THROW(parse_instrument(unknown), Error);

  auto wrong_type = base;
  wrong_type["rate"] = "two percent";
  EXPECT_THROW(parse_instrument(wrong_type), Error);

  auto lonely_weights = base;
  lonely_weights.erase("observation");
  EXPECT_THROW(parse_instrument(lonely_weights), Error);

  auto bad_corr = base;
  bad_corr["indices"].push_back(base["indices"][0]);
  bad_corr["weights"] = {50, 50};
  bad_corr["correlation"] = json::parse("[[1, 1.5], [1.5, 1]]");
  try {
    parse_instrument(bad_corr);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInvalidMarket);
  }
  EXPECT_NO_THROW(parse_instrument(bad_corr, false));
}

TEST(Cli, PriceReportHasFitLine) {
  const auto r = run({"price", data("benchmark_basket.json")});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_TRUE(std::regex_search(r.out, std::regex(R"(a=-?[0-9.e+-]+ b=-?[0-9.e+-]+ c=[0-9.e+-]+)")));
  EXPECT_NE(r.out.find("strike>shift"), std::string::npos);
}

TEST(Cli, ZeroVolFileIsDegenerate) {
  const auto r = run({"price", data("zero_vol.json"), "--format", "csv"});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_NE(r.out.find("degenerate"), std::string::npos);
  const auto rows = lines(r.out);
  ASSERT_GE(rows.size(), 2u);
  const auto header = split(rows[0], ',');
  const auto values = split(rows[1], ',');
  const auto col = std::find(header.begin(), header.end(), "model") - header.begin();
  ASSERT_LT(col, static_cast<long>(values.size()));
  EXPECT_EQ(std::stod(values[col]), 0.0);
}

TEST(Cli, MalformedJsonFailsWithoutOutput) {
  const auto p = write_temp("eqlink_malformed.json", "{\"indices\": [ {\"spot\": 1,");
  const auto r = run({"price", p.string()});
  EXPECT_NE(r.exit_code, 0);
  EXPECT_TRUE(r.out.empty());
  EXPECT_FALSE(r.err.empty());
}

TEST(Cli, MissingFileAndBadUsage) {
  EXPECT_NE(run({"price", data("does_not_exist.json")}).exit_code, 0);
  EXPECT_EQ(run({"price"}).exit_code, 2);
  EXPECT_EQ(run({"frobnicate"}).exit_code, 2);
  EXPECT_EQ(run({"price", data("benchmark_basket.json"), "--format", "xml"}).exit_code, 2);
}

TEST(Cli, CompareCsvLayoutAndBlankMcColumns) {
  const auto r = run({"compare", data("benchmark_basket.json"), "--mc-paths", "0", "--format", "csv"});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto rows = lines(r.out);
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[0], "shift,model,mc,mc_se,levy");
  double prev = 0.0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto f = split(rows[i], ',');
    ASSERT_EQ(f.size(), 5u);
    EXPECT_TRUE(f[2].empty());
    EXPECT_TRUE(f[3].empty());
    EXPECT_FALSE(f[4].empty());
    const double model = std::stod(f[1]);
    EXPECT_GE(model, prev);
    prev = model;
  }
}

TEST(Cli, CompareIsDeterministic) {
  const std::vector<std::string> args{"compare", data("benchmark_basket.json"), "--mc-paths", "4000",
                                      "--seed", "7", "--format", "csv"};
  const auto a = run(args);
  auto with_threads = args;
  with_threads.insert(with_threads.end(), {"--threads", "3"});
  const auto b = run(with_threads);
  ASSERT_EQ(a.exit_code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out, run(args).out);
}

TEST(Cli, NotionalNormalizeIsPresentation) {
  const auto file = load_instrument(data("benchmark_basket.json"));
  double total = 0.0;
  for (double w : *file.weights) total += w;
  const auto raw = run({"price", data("benchmark_basket.json"), "--format", "json", "--precision", "17"});
  const auto norm = run({"price", data("benchmark_basket.json"), "--format", "json", "--precision", "17",
                         "--notional-normalize"});
  ASSERT_EQ(raw.exit_code, 0) << raw.err;
  ASSERT_EQ(norm.exit_code, 0) << norm.err;
  const double v_raw = nlohmann::json::parse(raw.out).at("model_price").get<double>();
  const double v_norm = nlohmann::json::parse(norm.out).at("model_price").get<double>();
  EXPECT_NEAR(v_norm * total / 100.0, v_raw, 1e-12 * v_raw);
}

TEST(Cli, GreeksCsvHeaderAndSymmetry) {
  const auto a = run({"greeks", data("symmetric_pair.json"), "--index", "1", "--format", "csv"});
  const auto b = run({"greeks", data("symmetric_pair.json"), "--index", "2", "--format", "csv"});
  ASSERT_EQ(a.exit_code, 0) << a.err;
  ASSERT_EQ(b.exit_code, 0) << b.err;
  const auto rows = lines(a.out);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0], "hedge_ratio,model,mc,levy");
  EXPECT_EQ(rows[1].rfind("price_delta,", 0), 0u);
  EXPECT_EQ(rows[2].rfind("vega,", 0), 0u);
  EXPECT_EQ(a.out, b.out);
}

TEST(Cli, GreeksBreachCheckReportsAgreement) {
  const auto r = run({"greeks", data("benchmark_basket.json"), "--method", "analytic"});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(r.out.find("BREACH"), std::string::npos);
  EXPECT_NE(r.out.find("analytic vs fd: ok"), std::string::npos);
}

TEST(Cli, GreeksIndexOutOfRange) {
  const auto r = run({"greeks", data("benchmark_basket.json"), "--index", "6"});
  EXPECT_NE(r.exit_code, 0);
  EXPECT_TRUE(r.out.empty());
  EXPECT_NE(run({"greeks", data("benchmark_basket.json"), "--index", "0"}).exit_code, 0);
}

TEST(Cli, SegfundUniformFeeWeights) {
  const std::string text = R"({
    "indices": [{"name": "A", "spot": 200, "vol": 0.2, "div_yield": 0},
                {"name": "B", "spot": 50, "vol": 0.1, "div_yield": 0}],
    "correlation": [[1, 0.3], [0.3, 1]], "rate": 0.02,
    "segfund": {"principal": 100, "allocations": [0.5, 0.5], "fee_times": [1, 2, 3],
                "management_fees": [0.015, 0.01, 0.005], "protection_fees": [0.005, 0.01, 0.015],
                "maturity": 4}})";
  const auto p = write_temp("eqlink_segfund_uniform.json", text);
  const auto r = run({"segfund", p.string(), "--format", "json", "--precision", "17"});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto doc = nlohmann::json::parse(r.out);
  const auto w = doc.at("terminal_weights").get<std::vector<double>>();
  ASSERT_EQ(w.size(), 2u);
  const double f = std::pow(1.0 - 0.02, 3);
  EXPECT_NEAR(w[0], 0.25 * f, 1e-15);
  EXPECT_NEAR(w[1], 1.0 * f, 1e-15);
}

TEST(Cli, SegfundRequiresBlock) {
  const auto r = run({"segfund", data("benchmark_basket.json")});
  EXPECT_NE(r.exit_code, 0);
  EXPECT_TRUE(r.out.empty());
}

TEST(Cli, ValidateReportsViolations) {
  const std::string text = R"({
    "indices": [{"name": "A", "spot": 100, "vol": 0.2, "div_yield": 0},
                {"name": "B", "spot": 100, "vol": 0.2, "div_yield": 0}],
    "weights": [50, 50], "correlation": [[1, 1.5], [1.5, 1]], "rate": 0.0,
    "observation": {"times": [1.0, 0.5], "maturity": 1.0}})";
  const auto p = write_temp("eqlink_invalid_market.json", text);
  const auto r = run({"validate", p.string()});
  EXPECT_EQ(r.exit_code, 1);
  const std::string all = r.out + r.err;
  EXPECT_NE(all.find("correlation out of range"), std::string::npos);
  EXPECT_NE(all.find("times not increasing"), std::string::npos);
  EXPECT_EQ(run({"validate", data("benchmark_basket.json")}).exit_code, 0);
}
