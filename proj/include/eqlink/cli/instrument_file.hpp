#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "eqlink/market_model.hpp"

namespace eqlink::cli {

/// Machine-readable instrument and market description. The basket and
/// segregated-fund sections are each optional; commands check for what they
/// need.
struct InstrumentFile {
  std::vector<IndexSpec> indices;
  CorrelationMatrix corr;
  double rate = 0.0;
  std::optional<std::vector<double>> weights;
  std::optional<ObservationSchedule> schedule;
  std::optional<GuaranteeSpec> guarantee;
  std::optional<SegFundSpec> segfund;
  std::optional<double> segfund_maturity;

  DiscountSpec discount() const { return DiscountSpec{rate}; }
  bool has_basket() const { return weights.has_value() && schedule.has_value(); }
  /// Throws Error(kInvalidInput) when the file has no basket section.
  BasketSpec basket() const;
  const ObservationSchedule& observation() const;

  /// All market-model checks applicable to the sections present.
  ValidationReport validate() const;
};

/// Structural parse. With `enforce` set, the market-model invariants are
/// checked too and violations throw Error(kInvalidMarket).
InstrumentFile parse_instrument(const nlohmann::json& doc, bool enforce = true);
InstrumentFile load_instrument(const std::filesystem::path& path, bool enforce = true);

}  // namespace eqlink::cli
