#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "eqlink/cli/instrument_file.hpp"

namespace eqlink::cli {

enum class OutputFormat { kText, kCsv, kJson };

OutputFormat parse_format(const std::string& name);

struct OutputOptions {
  OutputFormat format = OutputFormat::kText;
  int precision = 6;  // significant digits
};

/// A command's complete output. Nothing is printed until a command has
/// finished, so failures never leave partial output behind.
struct CommandOutput {
  std::string out;
  std::string err;
  int exit_code = 0;
};

struct PriceOptions {
  double vol_shift = 0.0;  // percent, relative to every vol
  bool notional_normalize = false;
};

struct CompareOptions {
  std::vector<double> shifts{-50.0, 0.0, 50.0, 100.0};
  std::uint64_t mc_paths = 500'000;
  std::uint64_t seed = 42;
  bool antithetic = false;
  bool notional_normalize = false;
  unsigned threads = 0;
};

enum class GreeksMethodOption { kAnalytic, kFd, kMcFd, kAll };

GreeksMethodOption parse_greeks_method(const std::string& name);

struct GreeksOptions {
  std::size_t index = 0;  // zero-based
  GreeksMethodOption method = GreeksMethodOption::kAnalytic;
  std::uint64_t mc_paths = 500'000;
  std::uint64_t seed = 42;
  unsigned threads = 0;
  /// Report vega per percentage point of vol instead of per unit.
  bool vega_per_point = false;
};

struct SegfundOptions {
  std::uint64_t mc_paths = 0;
  std::uint64_t seed = 42;
  unsigned threads = 0;
};

CommandOutput cmd_price(const InstrumentFile& file, const PriceOptions& opts, const OutputOptions& out);
CommandOutput cmd_compare(const InstrumentFile& file, const CompareOptions& opts,
                          const OutputOptions& out);
CommandOutput cmd_greeks(const InstrumentFile& file, const GreeksOptions& opts,
                         const OutputOptions& out);
CommandOutput cmd_segfund(const InstrumentFile& file, const SegfundOptions& opts,
                          const OutputOptions& out);
/// Reports every violation; exit code 1 when any is found.
CommandOutput cmd_validate(const InstrumentFile& file, const OutputOptions& out);

/// Parses argv, loads the file and dispatches. Errors become a nonzero exit
/// code and a message in `err`, with `out` left empty.
CommandOutput run_cli(int argc, const char* const* argv);

}  // namespace eqlink::cli
