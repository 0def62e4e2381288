#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "bmf/harness.hpp"
#include "bmf/oplab.hpp"

namespace bmf {

inline constexpr const char* version_string = "belavkin-mf 0.1.0";

// 17 significant digits, C locale.
std::string format_double(double x);

/// CSV text with a fixed header and LF line endings.
class CsvText {
 public:
  explicit CsvText(const std::vector<std::string>& header);
  CsvText& row(const std::vector<std::string>& fields);
  const std::string& str() const { return text_; }

 private:
  std::size_t columns_;
  std::string text_;
};

std::string num(double x);
std::string num(std::size_t x);

// Writes to a temporary file in the same directory, then renames over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& content);

// 64-bit FNV-1a, as 16 lower-case hex digits.
std::string fnv1a_hex(const std::string& bytes);

std::string indicators_csv(const std::vector<IndicatorSample>& rows);
std::string indicator_summary_csv(const std::vector<IndicatorSummary>& rows);
std::string pair_csv(const std::vector<PairSample>& rows);
std::string convergence_drift_csv(const std::vector<DriftRecord>& rows);
std::string delta_csv(const std::vector<DeltaStats>& rows, const std::vector<std::size_t>& reps);
std::string delta_summary_csv(const std::vector<DeltaSummary>& rows);
std::string h1_moments_csv(const std::vector<double>& t, int p, const std::vector<double>& moments);
std::string picard_csv(const std::vector<double>& residuals);

nlohmann::json proptest_report(const std::vector<CheckReport>& reports);

}  // namespace bmf
