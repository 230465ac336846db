#include "eqlink/cli/commands.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "eqlink/error.hpp"
#include "eqlink/greeks.hpp"
#include "eqlink/montecarlo.hpp"
#include "eqlink/pricer.hpp"

namespace eqlink::cli {

using nlohmann::json;

namespace {

constexpr double kGreeksCheckTol = 1e-5;

std::string num(double x, int precision) {
  if (std::isnan(x)) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", precision, x);
  return buf;
}

// Rounded to the requested significant digits so JSON and text agree.
json jnum(double x, int precision) {
  if (!std::isfinite(x)) return nullptr;
  return std::stod(num(x, precision));
}

std::string fit_line(const FitVariant& fit, int precision) {
  if (const auto* s = std::get_if<ShiftedLognormalFit>(&fit)) {
    return "a=" + num(s->a, precision) + " b=" + num(s->b, precision) + " c=" + num(s->c, precision);
  }
  if (const auto* l = std::get_if<LognormalFit>(&fit)) {
    return "a=" + num(l->a_l, precision) + " b=" + num(l->b_l, precision);
  }
  return "none";
}

json fit_json(const FitVariant& fit, int precision) {
  if (const auto* s = std::get_if<ShiftedLognormalFit>(&fit)) {
    return {{"a", jnum(s->a, precision)}, {"b", jnum(s->b, precision)}, {"c", jnum(s->c, precision)}};
  }
  if (const auto* l = std::get_if<LognormalFit>(&fit)) {
    return {{"a", jnum(l->a_l, precision)}, {"b", jnum(l->b_l, precision)}};
  }
  return nullptr;
}

// Left-aligned text table.
std::string text_table(const std::vector<std::string>& header,
                       const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream os;
  auto line = [&](const std::vector<std::string>& cells) {
    std::string s;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      std::string cell = cells[c];
      if (c + 1 < cells.size()) cell.resize(width[c] + 2, ' ');
      s += cell;
    }
    while (!s.empty() && s.back() == ' ') s.pop_back();
    os << s << '\n';
  };
  line(header);
  for (const auto& row : rows) line(row);
  return os.str();
}

std::string csv_table(const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows) {
  std::ostringstream os;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t c = 0; c < cells.size(); ++c) os << (c ? "," : "") << cells[c];
    os << '\n';
  };
  line(header);
  for (const auto& row : rows) line(row);
  return os.str();
}

std::string key_values(const std::vector<std::pair<std::string, std::string>>& kv) {
  std::size_t width = 0;
  for (const auto& [k, _] : kv) width = std::max(width, k.size());
  std::ostringstream os;
  for (const auto& [k, v] : kv) {
    std::string key = k;
    key.resize(width + 2, ' ');
    os << key << v << '\n';
  }
  return os.str();
}

McConfig mc_config(std::uint64_t paths, std::uint64_t seed, unsigned threads, bool antithetic = false) {
  McConfig c;
  c.n_paths = paths;
  c.seed = seed;
  c.threads = threads;
  c.antithetic = antithetic;
  return c;
}

}  // namespace

OutputFormat parse_format(const std::string& name) {
  if (name == "text") return OutputFormat::kText;
  if (name == "csv") return OutputFormat::kCsv;
  if (name == "json") return OutputFormat::kJson;
  throw Error(ErrorKind::kInvalidInput, "unknown format '" + name + "'");
}

GreeksMethodOption parse_greeks_method(const std::string& name) {
  if (name == "analytic") return GreeksMethodOption::kAnalytic;
  if (name == "fd") return GreeksMethodOption::kFd;
  if (name == "mc-fd") return GreeksMethodOption::kMcFd;
  if (name == "all") return GreeksMethodOption::kAll;
  throw Error(ErrorKind::kInvalidInput, "unknown greeks method '" + name + "'");
}

CommandOutput cmd_price(const InstrumentFile& file, const PriceOptions& opts, const OutputOptions& out) {
  const BasketSpec basket = file.basket().with_vol_shift(opts.vol_shift);
  const PriceResult res = asian_call_price(basket, file.corr, file.observation(), file.discount());
  const double strike = basket.strike();
  const double shown = opts.notional_normalize ? res.value / strike * 100.0 : res.value;
  const int p = out.precision;

  std::optional<double> security;
  if (file.guarantee) {
    security = security_value(*file.guarantee, basket, file.corr, file.observation(), file.discount()).value;
    if (opts.notional_normalize) *security = *security / strike * 100.0;
  }

  CommandOutput o;
  switch (out.format) {
    case OutputFormat::kText: {
      std::vector<std::pair<std::string, std::string>> kv{
          {"model price", num(shown, p) + (opts.notional_normalize ? " (% of notional)" : "")},
          {"fit", fit_line(res.fit, p)},
          {"discount factor", num(res.discount_factor, p)},
          {"branch", std::string(to_string(res.branch))},
          {"vol shift", num(opts.vol_shift, p) + "%"}};
      if (security) kv.emplace_back("security value", num(*security, p));
      o.out = key_values(kv);
      break;
    }
    case OutputFormat::kCsv: {
      std::vector<std::string> header{"model", "a", "b", "c", "discount_factor", "branch"};
      std::vector<std::string> row{num(shown, p), "", "", "", num(res.discount_factor, p),
                                   std::string(to_string(res.branch))};
      if (const auto* s = std::get_if<ShiftedLognormalFit>(&res.fit)) {
        row[1] = num(s->a, p);
        row[2] = num(s->b, p);
        row[3] = num(s->c, p);
      }
      if (security) {
        header.emplace_back("security_value");
        row.push_back(num(*security, p));
      }
      o.out = csv_table(header, {row});
      break;
    }
    case OutputFormat::kJson: {
      json j{{"model_price", jnum(shown, p)},
             {"notional_normalized", opts.notional_normalize},
             {"fit", fit_json(res.fit, p)},
             {"discount_factor", jnum(res.discount_factor, p)},
             {"branch", std::string(to_string(res.branch))},
             {"vol_shift", opts.vol_shift}};
      if (security) j["security_value"] = jnum(*security, p);
      o.out = j.dump(2) + "\n";
      break;
    }
  }
  return o;
}

CommandOutput cmd_compare(const InstrumentFile& file, const CompareOptions& opts,
                          const OutputOptions& out) {
  const BasketSpec base = file.basket();
  const double scale = opts.notional_normalize ? 100.0 / base.strike() : 1.0;
  const int p = out.precision;
  const std::vector<std::string> header{"shift", "model", "mc", "mc_se", "levy"};
  std::vector<std::vector<std::string>> rows;
  json jrows = json::array();
  for (double shift : opts.shifts) {
    const BasketSpec basket = base.with_vol_shift(shift);
    const double model = asian_call_price(basket, file.corr, file.observation(), file.discount()).value;
    const double levy = levy_call_price(basket, file.corr, file.observation(), file.discount()).value;
    std::optional<McEstimate> mc;
    if (opts.mc_paths > 0) {
      mc = mc_price(AsianCallContract{basket, file.corr, file.observation(), file.discount()},
                    mc_config(opts.mc_paths, opts.seed, opts.threads, opts.antithetic));
    }
    rows.push_back({num(shift, p), num(model * scale, p), mc ? num(mc->mean * scale, p) : "",
                    mc ? num(mc->std_error * scale, p) : "", num(levy * scale, p)});
    jrows.push_back({{"shift", shift},
                     {"model", jnum(model * scale, p)},
                     {"mc", mc ? jnum(mc->mean * scale, p) : json(nullptr)},
                     {"mc_se", mc ? jnum(mc->std_error * scale, p) : json(nullptr)},
                     {"levy", jnum(levy * scale, p)}});
  }
  CommandOutput o;
  switch (out.format) {
    case OutputFormat::kText: o.out = text_table(header, rows); break;
    case OutputFormat::kCsv: o.out = csv_table(header, rows); break;
    case OutputFormat::kJson:
      o.out = json{{"notional_normalized", opts.notional_normalize},
                   {"mc_paths", opts.mc_paths},
                   {"seed", opts.seed},
                   {"rows", jrows}}
                  .dump(2) +
              "\n";
      break;
  }
  return o;
}

CommandOutput cmd_greeks(const InstrumentFile& file, const GreeksOptions& opts, const OutputOptions& out) {
  const BasketSpec basket = file.basket();
  if (opts.index >= basket.size()) {
    throw Error(ErrorKind::kInvalidInput, "index " + std::to_string(opts.index + 1) + " out of range 1.." +
                                              std::to_string(basket.size()));
  }
  const auto& schedule = file.observation();
  const auto discount = file.discount();
  const std::size_t j = opts.index;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double vega_scale = opts.vega_per_point ? 0.01 : 1.0;
  const bool want_model_analytic = opts.method != GreeksMethodOption::kFd;
  const bool want_mc = opts.method == GreeksMethodOption::kMcFd || opts.method == GreeksMethodOption::kAll;
  const bool want_levy = opts.method == GreeksMethodOption::kFd || opts.method == GreeksMethodOption::kAll;

  BumpSpec bump;
  bump.index = j;
  const BasketPricer model_pricer = [&](const BasketSpec& b) {
    return asian_call_price(b, file.corr, schedule, discount).value;
  };

  double model_delta = nan, model_vega = nan;
  std::string check;
  if (want_model_analytic) {
    const GreeksResult g = analytic_greeks(basket, file.corr, schedule, discount);
    model_delta = g.deltas[j];
    model_vega = g.vegas[j];
    if (!g.diagnostic.empty()) check = g.diagnostic;
    if (g.method == GreeksMethod::kAnalytic) {
      BumpSpec fourth = bump;
      fourth.scheme = FdScheme::kCentral4;
      const GreeksResult fd = fd_greeks(model_pricer, basket, fourth);
      auto rel = [](double x, double y) { return std::abs(x - y) / std::max(std::abs(y), 1e-12); };
      const bool ok = rel(model_delta, fd.deltas[j]) <= kGreeksCheckTol &&
                      rel(model_vega, fd.vegas[j]) <= kGreeksCheckTol;
      check = ok ? "analytic vs fd: ok" : "analytic vs fd: BREACH (tolerance 1e-5 relative)";
    }
  } else {
    const GreeksResult g = fd_greeks(model_pricer, basket, bump);
    model_delta = g.deltas[j];
    model_vega = g.vegas[j];
  }

  double mc_delta = nan, mc_vega = nan;
  if (want_mc && opts.mc_paths > 0) {
    const AsianCallContract contract{basket, file.corr, schedule, discount};
    const McConfig cfg = mc_config(opts.mc_paths, opts.seed, opts.threads);
    mc_delta = mc_fd_greek(contract, j, Greek::kDelta, bump.spot_rel, cfg).mean;
    mc_vega = mc_fd_greek(contract, j, Greek::kVega, bump.vol_abs, cfg).mean;
  }

  double levy_delta = nan, levy_vega = nan;
  if (want_levy) {
    const BasketPricer levy_pricer = [&](const BasketSpec& b) {
      return levy_call_price(b, file.corr, schedule, discount).value;
    };
    const GreeksResult g = fd_greeks(levy_pricer, basket, bump);
    levy_delta = g.deltas[j];
    levy_vega = g.vegas[j];
  }

  const int p = out.precision;
  const std::vector<std::vector<std::string>> rows{
      {"price_delta", num(model_delta, p), num(mc_delta, p), num(levy_delta, p)},
      {"vega", num(model_vega * vega_scale, p), num(mc_vega * vega_scale, p), num(levy_vega * vega_scale, p)}};

  CommandOutput o;
  switch (out.format) {
    case OutputFormat::kText: {
      auto text_rows = rows;
      text_rows[0][0] = "Price Delta";
      text_rows[1][0] = opts.vega_per_point ? "Vega (per vol point)" : "Vega";
      o.out = "hedge ratios with respect to index " + std::to_string(j + 1) + " (" +
              basket.indices()[j].name + ")\n" +
              text_table({"hedge ratio", "model", "mc", "levy"}, text_rows);
      if (!check.empty()) o.out += "check: " + check + "\n";
      break;
    }
    case OutputFormat::kCsv:
      o.out = csv_table({"hedge_ratio", "model", "mc", "levy"}, rows);
      if (!check.empty()) o.err = "check: " + check + "\n";
      break;
    case OutputFormat::kJson: {
      json j_out{{"index", j + 1},
                 {"vega_per_point", opts.vega_per_point},
                 {"price_delta",
                  {{"model", jnum(model_delta, p)}, {"mc", jnum(mc_delta, p)}, {"levy", jnum(levy_delta, p)}}},
                 {"vega",
                  {{"model", jnum(model_vega * vega_scale, p)},
                   {"mc", jnum(mc_vega * vega_scale, p)},
                   {"levy", jnum(levy_vega * vega_scale, p)}}}};
      if (!check.empty()) j_out["check"] = check;
      o.out = j_out.dump(2) + "\n";
      break;
    }
  }
  return o;
}

CommandOutput cmd_segfund(const InstrumentFile& file, const SegfundOptions& opts, const OutputOptions& out) {
  if (!file.segfund || !file.segfund_maturity) {
    throw Error(ErrorKind::kInvalidInput, "instrument has no segfund block");
  }
  const SegFundSpec& fund = *file.segfund;
  const double maturity = *file.segfund_maturity;
  const auto weights = segfund_terminal_weights(fund, file.indices);
  const PriceResult res = segfund_put_price(fund, file.indices, file.corr, file.discount(), maturity);
  std::optional<McEstimate> mc;
  if (opts.mc_paths > 0) {
    mc = mc_price(SegFundContract{fund, file.indices, file.corr, file.discount(), maturity},
                  mc_config(opts.mc_paths, opts.seed, opts.threads));
  }
  const int p = out.precision;
  CommandOutput o;
  switch (out.format) {
    case OutputFormat::kText: {
      std::string w;
      for (double x : weights) w += (w.empty() ? "" : " ") + num(x, p);
      std::vector<std::pair<std::string, std::string>> kv{
          {"terminal weights", w},
          {"fit", fit_line(res.fit, p)},
          {"put value", num(res.value, p)},
          {"discount factor", num(res.discount_factor, p)},
          {"branch", std::string(to_string(res.branch))}};
      if (mc) kv.emplace_back("mc value", num(mc->mean, p) + " +- " + num(mc->std_error, p));
      o.out = key_values(kv);
      break;
    }
    case OutputFormat::kCsv: {
      std::vector<std::string> header{"put", "mc", "mc_se", "a", "b", "c"};
      std::vector<std::string> row{num(res.value, p), mc ? num(mc->mean, p) : "", mc ? num(mc->std_error, p) : "",
                                   "", "", ""};
      if (const auto* s = std::get_if<ShiftedLognormalFit>(&res.fit)) {
        row[3] = num(s->a, p);
        row[4] = num(s->b, p);
        row[5] = num(s->c, p);
      }
      for (std::size_t i = 0; i < weights.size(); ++i) {
        header.push_back("w" + std::to_string(i + 1));
        row.push_back(num(weights[i], p));
      }
      o.out = csv_table(header, {row});
      break;
    }
    case OutputFormat::kJson: {
      json jw = json::array();
      for (double x : weights) jw.push_back(jnum(x, p));
      json j{{"terminal_weights", jw},
             {"fit", fit_json(res.fit, p)},
             {"put_value", jnum(res.value, p)},
             {"discount_factor", jnum(res.discount_factor, p)},
             {"branch", std::string(to_string(res.branch))}};
      if (mc) j["mc"] = {{"mean", jnum(mc->mean, p)}, {"std_error", jnum(mc->std_error, p)}};
      o.out = j.dump(2) + "\n";
      break;
    }
  }
  return o;
}

CommandOutput cmd_validate(const InstrumentFile& file, const OutputOptions& out) {
  const ValidationReport r = file.validate();
  CommandOutput o;
  o.exit_code = r.ok() ? 0 : 1;
  switch (out.format) {
    case OutputFormat::kText:
    case OutputFormat::kCsv:
      if (r.ok()) {
        o.out = "ok\n";
      } else {
        for (const auto& v : r.violations) o.out += "violation: " + v + "\n";
      }
      break;
    case OutputFormat::kJson:
      o.out = json{{"ok", r.ok()}, {"violations", r.violations}}.dump(2) + "\n";
      break;
  }
  return o;
}

CommandOutput run_cli(int argc, const char* const* argv) {
  CLI::App app{"Equity-linked security pricer: shifted-lognormal basket Asian options, "
               "hedge ratios, Monte Carlo benchmarks and segregated fund guarantees"};
  app.require_subcommand(1);
  // Global options may follow the subcommand; subcommands inherit this.
  app.fallthrough();

  std::string format = "text";
  int precision = 6;
  unsigned threads = 0;
  app.add_option("--format", format, "Output format")
      ->check(CLI::IsMember({"text", "csv", "json"}))
      ->capture_default_str();
  app.add_option("--precision", precision, "Significant digits")->check(CLI::Range(1, 17))->capture_default_str();
  app.add_option("--threads", threads, "Monte Carlo worker threads (0: EQLINK_THREADS or all cores)");

  std::string file;
  PriceOptions price_opts;
  CompareOptions compare_opts;
  GreeksOptions greeks_opts;
  SegfundOptions segfund_opts;
  std::size_t greeks_index = 1;
  std::string greeks_method = "analytic";

  auto* price = app.add_subcommand("price", "Model price of the embedded Asian option");
  price->add_option("file", file, "Instrument JSON")->required();
  price->add_option("--vol-shift", price_opts.vol_shift, "Relative shift of every vol, in percent");
  price->add_flag("--notional-normalize", price_opts.notional_normalize,
                  "Report as a percentage of the sum of weights");

  auto* compare = app.add_subcommand("compare", "Model vs Monte Carlo vs Levy across vol shifts");
  compare->add_option("file", file, "Instrument JSON")->required();
  compare->add_option("--shifts", compare_opts.shifts, "Vol shifts in percent")->delimiter(',');
  compare->add_option("--mc-paths", compare_opts.mc_paths, "Monte Carlo paths (0 disables)")
      ->capture_default_str();
  compare->add_option("--seed", compare_opts.seed, "Monte Carlo seed")->capture_default_str();
  compare->add_flag("--antithetic", compare_opts.antithetic, "Antithetic variates");
  compare->add_flag("--notional-normalize", compare_opts.notional_normalize,
                    "Report as a percentage of the sum of weights");

  auto* greeks = app.add_subcommand("greeks", "Delta and vega with respect to one index");
  greeks->add_option("file", file, "Instrument JSON")->required();
  greeks->add_option("--index", greeks_index, "Index number, 1-based")->capture_default_str();
  greeks->add_option("--method", greeks_method, "analytic | fd | mc-fd | all")
      ->check(CLI::IsMember({"analytic", "fd", "mc-fd", "all"}))
      ->capture_default_str();
  greeks->add_option("--mc-paths", greeks_opts.mc_paths, "Monte Carlo paths for mc-fd")->capture_default_str();
  greeks->add_option("--seed", greeks_opts.seed, "Monte Carlo seed")->capture_default_str();
  greeks->add_flag("--vega-per-point", greeks_opts.vega_per_point, "Vega per percentage point of vol");

  auto* segfund = app.add_subcommand("segfund", "Value the maturity guarantee of a segregated fund");
  segfund->add_option("file", file, "Instrument JSON")->required();
  segfund->add_option("--mc-paths", segfund_opts.mc_paths, "Monte Carlo check paths (0 disables)")
      ->capture_default_str();
  segfund->add_option("--seed", segfund_opts.seed, "Monte Carlo seed")->capture_default_str();

  auto* validate = app.add_subcommand("validate", "Check an instrument file and report violations");
  validate->add_option("file", file, "Instrument JSON")->required();

  CommandOutput o;
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream out, err;
    o.exit_code = app.exit(e, out, err);
    o.out = out.str();
    o.err = err.str();
    if (o.exit_code != 0) o.exit_code = 2;
    return o;
  }

  const OutputOptions out{parse_format(format), precision};
  try {
    if (validate->parsed()) return cmd_validate(load_instrument(file, false), out);
    const InstrumentFile inst = load_instrument(file);
    if (price->parsed()) return cmd_price(inst, price_opts, out);
    if (compare->parsed()) {
      compare_opts.threads = threads;
      return cmd_compare(inst, compare_opts, out);
    }
    if (greeks->parsed()) {
      if (greeks_index < 1) throw Error(ErrorKind::kInvalidInput, "index is 1-based");
      greeks_opts.index = greeks_index - 1;
      greeks_opts.method = parse_greeks_method(greeks_method);
      greeks_opts.threads = threads;
      return cmd_greeks(inst, greeks_opts, out);
    }
    if (segfund->parsed()) {
      segfund_opts.threads = threads;
      return cmd_segfund(inst, segfund_opts, out);
    }
  } catch (const Error& e) {
    o.err = std::string("error: ") + e.what() + "\n";
    o.exit_code = e.kind() == ErrorKind::kInvalidInput ? 2 : 1;
    return o;
  } catch (const std::exception& e) {
    o.err = std::string("error: ") + e.what() + "\n";
    o.exit_code = 1;
    return o;
  }
  o.exit_code = 2;
  o.err = "error: no command\n";
  return o;
}

}  // namespace eqlink::cli
