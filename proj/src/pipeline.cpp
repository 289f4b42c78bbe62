#include "infodyn/pipeline.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "infodyn/errors.hpp"

namespace infodyn {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string current;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(trim(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  cells.push_back(trim(current));
  return cells;
}

bool parse_cell(const std::string& cell, double& out) {
  if (cell.empty()) return false;
  errno = 0;
  char* end = nullptr;
  out = std::strtod(cell.c_str(), &end);
  return errno == 0 && end == cell.c_str() + cell.size();
}

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Tags errors with the pipeline stage they occurred in, preserving the type.
template <typename F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const validation_error& e) {
    throw validation_error("[" + std::string(name) + "] " + e.what());
  } catch (const numerical_error& e) {
    throw numerical_error("[" + std::string(name) + "] " + e.what(), e.omega());
  } catch (const estimation_error& e) {
    throw estimation_error("[" + std::string(name) + "] " + e.what());
  }
}

double log_base_factor(const AnalysisConfig& config) {
  return config.log_base == LogBase::kBits ? 1.0 / std::log(2.0) : 1.0;
}

const char* units_name(const AnalysisConfig& config) {
  return config.log_base == LogBase::kBits ? "bits" : "nats";
}

std::vector<int> one_based(const std::vector<int>& blocks) {
  std::vector<int> out;
  out.reserve(blocks.size());
  for (int b : blocks) out.push_back(b + 1);
  return out;
}

std::string blocks_label(const std::vector<int>& blocks) {
  std::string out;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (i) out += '-';
    out += std::to_string(blocks[i] + 1);
  }
  return out;
}

std::string estimator_label(const EstimatorSpec& spec) {
  std::ostringstream out;
  if (spec.kind == EstimatorKind::kVar) {
    out << "var(";
    if (spec.var_order > 0) {
      out << "order=" << spec.var_order;
    } else {
      out << (spec.criterion == OrderCriterion::kAic ? "aic" : "bic")
          << ",pmax=" << spec.p_max;
    }
    out << ")";
  } else {
    out << "wc(";
    if (spec.wc_tau > 0) {
      out << "tau=" << spec.wc_tau;
    } else {
      out << "bandwidth=" << spec.wc_bandwidth_hz << "Hz";
    }
    out << ")";
  }
  return out.str();
}

ordered_json config_echo(const AnalysisConfig& config) {
  ordered_json j;
  j["estimator"] = config.estimator.kind == EstimatorKind::kVar ? "var" : "wc";
  j["var_order"] = config.estimator.var_order;
  j["var_criterion"] =
      config.estimator.criterion == OrderCriterion::kAic ? "aic" : "bic";
  j["var_pmax"] = config.estimator.p_max;
  j["wc_tau"] = config.estimator.wc_tau;
  j["wc_bandwidth_hz"] = config.estimator.wc_bandwidth_hz;
  j["grid"] = config.grid;
  ordered_json blocks = ordered_json::array();
  for (const auto& group : config.blocks) blocks.push_back(one_based(group));
  j["blocks"] = blocks;  // empty = one block per channel
  ordered_json bands = ordered_json::array();
  for (const BandSpec& band : config.bands) {
    bands.push_back({{"name", band.name},
                     {"f_low_hz", band.f_low},
                     {"f_high_hz", band.f_high}});
  }
  j["bands"] = bands;
  j["max_order"] = config.max_order;
  j["log_base"] = units_name(config);
  j["seed"] = config.seed;
  j["output_dir"] = config.output_dir;
  j["fs"] = config.fs;
  j["header"] = config.header == HeaderPolicy::kAuto
                    ? "auto"
                    : (config.header == HeaderPolicy::kYes ? "yes" : "no");
  j["detrend"] = config.detrend == DetrendMode::kNone
                     ? "none"
                     : (config.detrend == DetrendMode::kMean ? "mean" : "linear");
  std::vector<std::string> sig;
  if (config.significance_er) sig.push_back("er");
  if (config.significance_mir) sig.push_back("mir");
  if (config.significance_oir) sig.push_back("oir");
  j["significance"] = sig;
  j["n_surrogates"] = config.n_surrogates;
  j["alpha"] = config.alpha;
  j["iaafft_iterations"] = config.iaafft_iterations;
  j["block_length"] = config.block_length;
  return j;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw validation_error("cannot write file: " + path);
  out << text;
  out.flush();
  if (!out) throw validation_error("write failed: " + path);
}

}  // namespace

// ---------------------------------------------------------------------------
// Ingestion
// ---------------------------------------------------------------------------

TimeSeriesData ingest_csv(const std::string& path, double fs,
                          HeaderPolicy header) {
  if (!(fs > 0.0)) throw validation_error("fs must be positive");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw validation_error("cannot open file: " + path);

  std::vector<std::vector<std::string>> rows;
  std::vector<int> row_lines;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    rows.push_back(split_csv_line(line));
    row_lines.push_back(line_no);
  }
  if (rows.empty()) throw validation_error(path + ": file has no data rows");

  const std::size_t q = rows[0].size();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != q) {
      throw validation_error(path + ": line " + std::to_string(row_lines[r]) +
                             ": expected " + std::to_string(q) +
                             " columns, found " + std::to_string(rows[r].size()));
    }
  }

  // Header detection: explicit policy, or any non-numeric first-row cell.
  bool has_header = header == HeaderPolicy::kYes;
  if (header == HeaderPolicy::kAuto) {
    for (const std::string& cell : rows[0]) {
      double ignored;
      if (!parse_cell(cell, ignored)) {
        has_header = true;
        break;
      }
    }
  }

  TimeSeriesData data;
  data.fs = fs;
  const std::size_t first = has_header ? 1 : 0;
  const std::size_t n_rows = rows.size() - first;
  if (n_rows < 2) {
    throw validation_error(path + ": fewer than 2 data rows");
  }
  if (has_header) data.channel_names = rows[0];
  data.samples.resize(static_cast<long>(n_rows), static_cast<long>(q));
  for (std::size_t r = first; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < q; ++c) {
      double value;
      if (!parse_cell(rows[r][c], value)) {
        throw validation_error(path + ": line " + std::to_string(row_lines[r]) +
                               ", column " + std::to_string(c + 1) +
                               ": non-numeric cell '" + rows[r][c] + "'");
      }
      if (!std::isfinite(value)) {
        throw validation_error(path + ": line " + std::to_string(row_lines[r]) +
                               ", column " + std::to_string(c + 1) +
                               ": non-finite value '" + rows[r][c] + "'");
      }
      data.samples(static_cast<long>(r - first), static_cast<long>(c)) = value;
    }
  }
  data.validate();
  return data;
}

void detrend(TimeSeriesData& data, DetrendMode mode) {
  if (mode == DetrendMode::kNone) return;
  const long length = data.length();
  for (int c = 0; c < data.channels(); ++c) {
    auto col = data.samples.col(c);
    if (mode == DetrendMode::kMean) {
      col.array() -= col.mean();
      continue;
    }
    // Least-squares line a + b*t over t = 0..L-1.
    const double t_mean = static_cast<double>(length - 1) / 2.0;
    const double y_mean = col.mean();
    double num = 0.0;
    double den = 0.0;
    for (long t = 0; t < length; ++t) {
      const double dt = static_cast<double>(t) - t_mean;
      num += dt * (col[t] - y_mean);
      den += dt * dt;
    }
    const double slope = den > 0.0 ? num / den : 0.0;
    for (long t = 0; t < length; ++t) {
      col[t] -= y_mean + slope * (static_cast<double>(t) - t_mean);
    }
  }
}

// ---------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------

ResultBundle run_pipeline(const AnalysisConfig& config,
                          const TimeSeriesData& data, int jobs,
                          const std::string& input_path) {
  config.validate();
  data.validate();
  const int q = data.channels();

  BlockStructure blocks;
  int max_order = 0;
  stage("validation", [&] {
    blocks.assignment =
        config.blocks.empty() ? BlockStructure::singletons(q).assignment
                              : config.blocks;
    blocks.validate(q);
    max_order = config.max_order == 0 ? blocks.n_blocks() : config.max_order;
    if (max_order < 1 || max_order > blocks.n_blocks()) {
      throw validation_error("max_order must lie in [1, " +
                             std::to_string(blocks.n_blocks()) + "]");
    }
    for (const BandSpec& band : config.bands) band.validate(data.fs);
  });

  TimeSeriesData prepared = data;
  detrend(prepared, config.detrend);

  const FrequencyGrid grid = FrequencyGrid::linear(config.grid, data.fs);
  const SpectralMatrix psd = stage(
      "estimation", [&] { return estimate_psd(prepared, config.estimator, grid); });

  ResultBundle bundle;
  bundle.config = config;
  bundle.config.fs = data.fs;  // echo the rate actually used
  bundle.input_path = input_path;
  bundle.table = stage("rates", [&] {
    return all_rates(psd, blocks, max_order, config.bands, jobs);
  });

  if (config.any_significance()) {
    stage("significance", [&] {
      PipelineSpec pspec;
      pspec.estimator = config.estimator;
      pspec.blocks = blocks;
      pspec.grid_points = config.grid;
      ResamplingConfig rc;
      rc.n_surrogates = config.n_surrogates;
      rc.alpha = config.alpha;
      rc.iaafft_iterations = config.iaafft_iterations;
      rc.block_length = config.block_length;
      rc.master_seed = config.seed;
      if (config.significance_er) {
        rc.method = ResamplingMethod::kShuffle;
        auto reports = validate_er(prepared, pspec, config.bands, rc, jobs);
        bundle.reports.insert(bundle.reports.end(), reports.begin(),
                              reports.end());
      }
      if (config.significance_mir) {
        if (blocks.n_blocks() < 2) {
          throw validation_error("MIR significance needs at least 2 blocks");
        }
        rc.method = ResamplingMethod::kIaafft;
        auto reports = validate_mir(prepared, pspec, config.bands, rc, jobs);
        bundle.reports.insert(bundle.reports.end(), reports.begin(),
                              reports.end());
      }
      if (config.significance_oir) {
        if (blocks.n_blocks() < 3 || max_order < 3) {
          throw validation_error(
              "OIR significance needs at least 3 blocks and max_order >= 3");
        }
        std::vector<Multiplet> multiplets;
        for (int n = 3; n <= max_order; ++n) {
          for (Multiplet& m : enumerate_multiplets(blocks.n_blocks(), n)) {
            multiplets.push_back(std::move(m));
          }
        }
        rc.method = ResamplingMethod::kBlockBootstrap;
        auto reports =
            validate_oir(prepared, pspec, multiplets, config.bands, rc, jobs);
        bundle.reports.insert(bundle.reports.end(), reports.begin(),
                              reports.end());
      }
      return 0;
    });
  }
  return bundle;
}

// ---------------------------------------------------------------------------
// Emission
// ---------------------------------------------------------------------------

std::string profiles_csv_text(const ResultBundle& bundle) {
  const double factor = log_base_factor(bundle.config);
  std::string out = "measure,blocks,frequency_hz,value\n";
  for (const RateEntry& entry : bundle.table.entries) {
    const std::string measure = measure_name(entry.profile.kind);
    const std::string label = blocks_label(entry.profile.blocks);
    const FrequencyGrid& grid = entry.profile.grid;
    for (int i = 0; i < grid.n_freq; ++i) {
      out += measure;
      out += ',';
      out += label;
      out += ',';
      out += g17(grid.freq_hz(i));
      out += ',';
      out += g17(entry.profile.values[i] * factor);
      out += '\n';
    }
  }
  return out;
}

std::string band_table_json_text(const ResultBundle& bundle) {
  const double factor = log_base_factor(bundle.config);
  ordered_json j;
  j["units"] = units_name(bundle.config);
  j["fs_hz"] = bundle.config.fs;
  ordered_json bands = ordered_json::array();
  for (const BandSpec& band : bundle.table.bands) {
    bands.push_back({{"name", band.name},
                     {"f_low_hz", band.f_low},
                     {"f_high_hz", band.f_high}});
  }
  j["bands"] = bands;
  ordered_json entries = ordered_json::array();
  for (const RateEntry& entry : bundle.table.entries) {
    ordered_json e;
    e["measure"] = measure_name(entry.profile.kind);
    e["blocks"] = one_based(entry.profile.blocks);
    e["full_band"] = {{"value", entry.full_band.value * factor},
                      {"coverage", entry.full_band.coverage}};
    ordered_json band_values = ordered_json::array();
    for (std::size_t b = 0; b < entry.band_values.size(); ++b) {
      band_values.push_back({{"name", bundle.table.bands[b].name},
                             {"value", entry.band_values[b].value * factor},
                             {"coverage", entry.band_values[b].coverage}});
    }
    e["bands"] = band_values;
    e["singular_points"] = entry.profile.singular_points;
    entries.push_back(std::move(e));
  }
  j["entries"] = entries;
  return j.dump(2) + "\n";
}

std::string significance_json_text(const ResultBundle& bundle) {
  const double factor = log_base_factor(bundle.config);
  ordered_json j;
  j["units"] = units_name(bundle.config);
  j["alpha"] = bundle.config.alpha;
  j["n_surrogates"] = bundle.config.n_surrogates;
  ordered_json reports = ordered_json::array();
  for (const SignificanceReport& report : bundle.reports) {
    ordered_json r;
    r["measure"] = report.measure;
    r["blocks"] = one_based(report.blocks);
    r["sidedness"] = report.sidedness;
    r["dropped_surrogates"] = report.dropped_surrogates;
    ordered_json decisions = ordered_json::array();
    for (const BandDecision& d : report.decisions) {
      ordered_json dj;
      dj["band"] = d.band_name;
      dj["f_low_hz"] = d.f_low;
      dj["f_high_hz"] = d.f_high;
      dj["original"] = d.original * factor;
      dj["coverage"] = d.coverage;
      dj["threshold_low"] = d.threshold_low * factor;
      dj["threshold_high"] = d.threshold_high * factor;
      dj["significant"] = d.significant;
      dj["crossed_side"] = d.crossed_side;
      ordered_json values = ordered_json::array();
      for (double v : d.surrogate_values) values.push_back(v * factor);
      dj["surrogate_values"] = std::move(values);
      decisions.push_back(std::move(dj));
    }
    r["decisions"] = decisions;
    reports.push_back(std::move(r));
  }
  j["reports"] = reports;
  return j.dump(2) + "\n";
}

std::string provenance_json_text(const ResultBundle& bundle) {
  ordered_json j;
  j["tool"] = "infodyn";
  j["version"] = kToolVersion;
  j["input"] = bundle.input_path;
  j["seed"] = bundle.config.seed;
  j["estimator"] = estimator_label(bundle.config.estimator);
  j["units"] = units_name(bundle.config);

  std::time_t now = std::time(nullptr);
  char stamp[32];
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  j["timestamp_utc"] = stamp;

  int singular_total = 0;
  for (const RateEntry& entry : bundle.table.entries) {
    singular_total += entry.profile.singular_points;
  }
  j["entries"] = bundle.table.entries.size();
  j["singular_points_total"] = singular_total;
  j["config"] = config_echo(bundle.config);
  return j.dump(2) + "\n";
}

std::vector<std::string> emit(const ResultBundle& bundle) {
  namespace fs = std::filesystem;
  const fs::path dir(bundle.config.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw validation_error("cannot create output directory " + dir.string() +
                           ": " + ec.message());
  }
  std::vector<std::string> written;
  const auto write = [&](const char* name, const std::string& text) {
    const std::string path = (dir / name).string();
    write_text_file(path, text);
    written.push_back(path);
  };
  write("profiles.csv", profiles_csv_text(bundle));
  write("band_table.json", band_table_json_text(bundle));
  write("significance_report.json", significance_json_text(bundle));
  write("provenance.json", provenance_json_text(bundle));
  return written;
}

void write_csv(const TimeSeriesData& data, const std::string& path) {
  std::string text;
  const int q = data.channels();
  for (int c = 0; c < q; ++c) {
    if (c) text += ',';
    text += data.channel_names.empty() ? "Y" + std::to_string(c + 1)
                                       : data.channel_names[c];
  }
  text += '\n';
  for (long r = 0; r < data.length(); ++r) {
    for (int c = 0; c < q; ++c) {
      if (c) text += ',';
      text += g17(data.samples(r, c));
    }
    text += '\n';
  }
  write_text_file(path, text);
}

}  // namespace infodyn
