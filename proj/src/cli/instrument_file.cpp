#include "eqlink/cli/instrument_file.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>

#include "eqlink/error.hpp"

namespace eqlink::cli {

using nlohmann::json;

namespace {

[[noreturn]] void schema_error(const std::string& what) {
  throw Error(ErrorKind::kInvalidInput, "schema: " + what);
}

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) schema_error(where + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (key.starts_with("_") || key == "description") continue;
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      schema_error("unknown key '" + key + "' in " + where);
    }
  }
}

const json& require(const json& obj, const std::string& key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) schema_error("missing '" + key + "' in " + where);
  return *it;
}

double number(const json& v, const std::string& what) {
  if (!v.is_number()) schema_error(what + " must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) schema_error(what + " must be finite");
  return x;
}

std::vector<double> numbers(const json& v, const std::string& what) {
  if (!v.is_array()) schema_error(what + " must be an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(number(v[i], what + "[" + std::to_string(i) + "]"));
  }
  return out;
}

std::string text(const json& v, const std::string& what) {
  if (!v.is_string()) schema_error(what + " must be a string");
  return v.get<std::string>();
}

IndexSpec parse_index(const json& v, std::size_t i) {
  const std::string where = "indices[" + std::to_string(i) + "]";
  check_keys(v, where, {"name", "spot", "vol", "div_yield", "drift_override"});
  IndexSpec idx;
  idx.name = v.contains("name") ? text(v["name"], where + ".name") : "index " + std::to_string(i + 1);
  idx.spot = number(require(v, "spot", where), where + ".spot");
  idx.vol = number(require(v, "vol", where), where + ".vol");
  if (v.contains("div_yield")) idx.div_yield = number(v["div_yield"], where + ".div_yield");
  if (v.contains("drift_override") && !v["drift_override"].is_null()) {
    idx.drift_override = number(v["drift_override"], where + ".drift_override");
  }
  return idx;
}

ObservationSchedule parse_observation(const json& v) {
  const std::string where = "observation";
  check_keys(v, where, {"times", "maturity", "valuation_date", "dates", "maturity_date"});
  const bool by_times = v.contains("times");
  const bool by_dates = v.contains("dates");
  if (by_times == by_dates) schema_error("observation needs exactly one of 'times' or 'dates'");
  if (by_times) {
    ObservationSchedule s;
    s.times = numbers(v["times"], "observation.times");
    s.maturity = number(require(v, "maturity", where), "observation.maturity");
    return s;
  }
  const std::string valuation = text(require(v, "valuation_date", where), "observation.valuation_date");
  const std::string maturity = text(require(v, "maturity_date", where), "observation.maturity_date");
  const json& dates_json = v["dates"];
  if (!dates_json.is_array()) schema_error("observation.dates must be an array of strings");
  std::vector<std::string> dates;
  for (std::size_t i = 0; i < dates_json.size(); ++i) {
    dates.push_back(text(dates_json[i], "observation.dates[" + std::to_string(i) + "]"));
  }
  return build_schedule_from_dates(valuation, dates, maturity);
}

SegFundSpec parse_segfund(const json& v, double& maturity) {
  const std::string where = "segfund";
  check_keys(v, where,
             {"principal", "allocations", "fee_times", "management_fees", "protection_fees", "maturity"});
  SegFundSpec f;
  f.principal = number(require(v, "principal", where), "segfund.principal");
  f.allocations = numbers(require(v, "allocations", where), "segfund.allocations");
  f.fee_times = v.contains("fee_times") ? numbers(v["fee_times"], "segfund.fee_times") : std::vector<double>{};
  f.mgmt_fees = v.contains("management_fees") ? numbers(v["management_fees"], "segfund.management_fees")
                                              : std::vector<double>{};
  f.protection_fees = v.contains("protection_fees")
                          ? numbers(v["protection_fees"], "segfund.protection_fees")
                          : std::vector<double>{};
  maturity = number(require(v, "maturity", where), "segfund.maturity");
  return f;
}

}  // namespace

BasketSpec InstrumentFile::basket() const {
  if (!weights) throw Error(ErrorKind::kInvalidInput, "instrument has no basket weights");
  return build_basket(indices, *weights);
}

const ObservationSchedule& InstrumentFile::observation() const {
  if (!schedule) throw Error(ErrorKind::kInvalidInput, "instrument has no observation schedule");
  return *schedule;
}

ValidationReport InstrumentFile::validate() const {
  ValidationReport r;
  auto merge = [&](const ValidationReport& other) {
    for (const auto& v : other.violations) {
      if (std::find(r.violations.begin(), r.violations.end(), v) == r.violations.end()) r.add(v);
    }
  };
  merge(validate_indices(indices));
  if (corr.size() != indices.size()) {
    r.add("correlation size does not match indices");
  } else {
    merge(validate_correlation(corr));
  }
  if (!std::isfinite(rate)) r.add("rate not finite");
  if (weights) {
    if (weights->size() != indices.size()) {
      r.add("weights do not match the number of indices");
    } else {
      for (std::size_t j = 0; j < weights->size(); ++j) {
        if (!((*weights)[j] > 0.0)) r.add("index " + std::to_string(j + 1) + ": weight must be positive");
      }
    }
  }
  if (has_basket() && r.ok()) {
    merge(validate_market(basket(), corr, *schedule, discount()));
  } else if (schedule) {
    // Report schedule problems even when the basket itself is broken.
    const auto& t = schedule->times;
    if (t.empty()) r.add("observation schedule is empty");
    for (std::size_t k = 1; k < t.size(); ++k) {
      if (!(t[k] > t[k - 1])) r.add("times not increasing at observation " + std::to_string(k + 1));
    }
  }
  if (guarantee && !(guarantee->guaranteed_amount >= 0.0)) r.add("guarantee must be nonnegative");
  if (segfund && segfund_maturity) merge(validate_segfund(*segfund, indices, corr, *segfund_maturity));
  if (!weights && !segfund) r.add("instrument has neither a basket nor a segfund section");
  return r;
}

InstrumentFile parse_instrument(const json& doc, bool enforce) {
  check_keys(doc, "instrument",
             {"indices", "correlation", "rate", "weights", "observation", "guarantee", "segfund"});
  InstrumentFile f;
  const json& idx = require(doc, "indices", "instrument");
  if (!idx.is_array() || idx.empty()) schema_error("indices must be a nonempty array");
  for (std::size_t i = 0; i < idx.size(); ++i) f.indices.push_back(parse_index(idx[i], i));

  const json& corr = require(doc, "correlation", "instrument");
  if (!corr.is_array()) schema_error("correlation must be an array of rows");
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < corr.size(); ++i) {
    rows.push_back(numbers(corr[i], "correlation[" + std::to_string(i) + "]"));
  }
  f.corr = CorrelationMatrix(rows);
  f.rate = number(require(doc, "rate", "instrument"), "rate");

  if (doc.contains("weights")) f.weights = numbers(doc["weights"], "weights");
  if (doc.contains("observation")) f.schedule = parse_observation(doc["observation"]);
  if (f.weights.has_value() != f.schedule.has_value()) {
    schema_error("'weights' and 'observation' must be given together");
  }
  if (doc.contains("guarantee")) f.guarantee = GuaranteeSpec{number(doc["guarantee"], "guarantee")};
  if (doc.contains("segfund")) {
    double maturity = 0.0;
    f.segfund = parse_segfund(doc["segfund"], maturity);
    f.segfund_maturity = maturity;
  }
  if (enforce) require_valid(f.validate());
  return f;
}

InstrumentFile load_instrument(const std::filesystem::path& path, bool enforce) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kInvalidInput, "cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kInvalidInput, "malformed JSON in " + path.string() + ": " + e.what());
  }
  return parse_instrument(doc, enforce);
}

}  // namespace eqlink::cli
