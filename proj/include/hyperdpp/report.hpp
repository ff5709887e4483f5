#pragma once

// Plain-text renderings of sweep results: the CSV schema
//   R,expectation,variance_lunule,variance_direct,variance_empirical,stderr,ratio,C,pass
// with shortest round-trip decimals and empty cells for absent values.

#include "hyperdpp/bounds.hpp"

#include <charconv>
#include <optional>
#include <ostream>
#include <string>
#include <system_error>
#include <vector>

namespace hyperdpp {

inline constexpr const char* csv_header =
    "R,expectation,variance_lunule,variance_direct,variance_empirical,stderr,ratio,C,pass";

/// Shortest decimal that reads back as the same double.
inline std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  if (res.ec != std::errc{}) return "nan";
  return std::string(buf, res.ptr);
}

inline std::string format_optional(const std::optional<double>& x) {
  return x ? format_double(*x) : std::string();
}

struct CsvOptions {
  /// the variance subcommand leaves C and pass empty
  bool with_bound = true;
};

inline void write_csv_row(std::ostream& out, const VarianceReport& v, const CsvOptions& opt = {}) {
  const bool ok = v.error.empty();
  auto cell = [ok](double x) { return ok ? format_double(x) : std::string(); };
  out << format_double(v.R) << ',' << cell(v.expectation) << ',' << cell(v.variance_lunule) << ','
      << cell(v.variance_direct) << ',' << format_optional(v.variance_empirical) << ','
      << format_optional(v.stderr_empirical) << ',' << cell(v.ratio) << ',';
  if (opt.with_bound) out << format_double(v.C) << ',' << (v.pass ? "true" : "false");
  else out << ',';
  out << '\n';
}

inline void write_csv(std::ostream& out, const std::vector<VarianceReport>& rows, const CsvOptions& opt = {}) {
  out << csv_header << '\n';
  for (const auto& v : rows) write_csv_row(out, v, opt);
}

}  // namespace hyperdpp
