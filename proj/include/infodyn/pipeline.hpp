#pragma once

#include <string>
#include <vector>

#include "infodyn/config.hpp"
#include "infodyn/rates.hpp"
#include "infodyn/significance.hpp"
#include "infodyn/var_model.hpp"

namespace infodyn {

inline constexpr const char* kToolVersion = "0.1.0";

// Parses a CSV of time samples (rows) by channels (columns). An optional
// header row supplies channel names; under the auto policy the first row is
// treated as a header when any of its cells is non-numeric. Ragged rows,
// non-numeric or non-finite cells and files with fewer than 2 data rows are
// validation errors naming the offending line.
TimeSeriesData ingest_csv(const std::string& path, double fs,
                          HeaderPolicy header);

// In-place mean removal or per-channel linear detrending.
void detrend(TimeSeriesData& data, DetrendMode mode);

// Everything one analysis run produces; emitted as a stable file set.
struct ResultBundle {
  AnalysisConfig config;  // echo of the validated configuration
  std::string input_path;
  RateTable table;
  std::vector<SignificanceReport> reports;
};

// Runs estimator -> PSD -> all_rates -> optional significance, in that
// order. Errors are tagged with the stage they occurred in.
ResultBundle run_pipeline(const AnalysisConfig& config,
                          const TimeSeriesData& data, int jobs = 1,
                          const std::string& input_path = "");

// Writes the bundle into config.output_dir:
//   profiles.csv             long format: measure,blocks,frequency_hz,value
//   band_table.json          full-band and per-band integrals with coverage
//   significance_report.json significance reports (empty array when none)
//   provenance.json          tool version, seed, config echo, timestamp
// Values are reported in the configured log base; frequencies in Hz. Block
// ids in output are 1-based. Returns the list of files written.
std::vector<std::string> emit(const ResultBundle& bundle);

// Serialization helpers shared by emit and the CLI (values already in the
// requested log base; conversion happens inside).
std::string profiles_csv_text(const ResultBundle& bundle);
std::string band_table_json_text(const ResultBundle& bundle);
std::string significance_json_text(const ResultBundle& bundle);
std::string provenance_json_text(const ResultBundle& bundle);

// Writes a TimeSeriesData as CSV with a header row of channel names.
void write_csv(const TimeSeriesData& data, const std::string& path);

}  // namespace infodyn
