#include "infodyn/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "infodyn/errors.hpp"

namespace infodyn {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

[[noreturn]] void fail(int line, const std::string& what) {
  throw validation_error("config line " + std::to_string(line) + ": " + what);
}

long parse_long(const std::string& value, int line) {
  errno = 0;
  char* end = nullptr;
  const long v = std::strtol(value.c_str(), &end, 10);
  if (errno != 0 || end == value.c_str() || *end != '\0') {
    fail(line, "expected an integer, got '" + value + "'");
  }
  return v;
}

double parse_double(const std::string& value, int line) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (errno != 0 || end == value.c_str() || *end != '\0') {
    fail(line, "expected a number, got '" + value + "'");
  }
  return v;
}

std::uint64_t parse_u64(const std::string& value, int line) {
  errno = 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(value.c_str(), &end, 10);
  if (errno != 0 || end == value.c_str() || *end != '\0' ||
      value.find('-') != std::string::npos) {
    fail(line, "expected an unsigned integer, got '" + value + "'");
  }
  return static_cast<std::uint64_t>(v);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string current;
  for (char c : s) {
    if (c == sep) {
      parts.push_back(current);
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  parts.push_back(current);
  return parts;
}

std::vector<std::vector<int>> parse_blocks(const std::string& value, int line) {
  std::vector<std::vector<int>> blocks;
  for (const std::string& group : split(value, ';')) {
    std::vector<int> channels;
    for (const std::string& item : split(group, ',')) {
      const std::string t = trim(item);
      if (t.empty()) fail(line, "empty channel entry in blocks");
      const long ch = parse_long(t, line);
      if (ch < 1) fail(line, "channel indices in blocks are 1-based");
      channels.push_back(static_cast<int>(ch - 1));
    }
    if (channels.empty()) fail(line, "empty block in blocks");
    blocks.push_back(std::move(channels));
  }
  if (blocks.empty()) fail(line, "blocks must name at least one block");
  return blocks;
}

std::vector<BandSpec> parse_bands(const std::string& value, int line) {
  std::vector<BandSpec> bands;
  for (const std::string& item : split(value, ';')) {
    const std::string t = trim(item);
    if (t.empty()) fail(line, "empty band entry");
    const auto colon = t.find(':');
    if (colon == std::string::npos || colon == 0) {
      fail(line, "band must be NAME:low-high, got '" + t + "'");
    }
    BandSpec band;
    band.name = trim(t.substr(0, colon));
    const std::string range = trim(t.substr(colon + 1));
    errno = 0;
    char* end = nullptr;
    band.f_low = std::strtod(range.c_str(), &end);
    if (errno != 0 || end == range.c_str() || *end != '-') {
      fail(line, "band range must be low-high, got '" + range + "'");
    }
    const char* rest = end + 1;
    band.f_high = std::strtod(rest, &end);
    if (errno != 0 || end == rest || *trim(end).c_str() != '\0') {
      fail(line, "band range must be low-high, got '" + range + "'");
    }
    bands.push_back(std::move(band));
  }
  return bands;
}

void parse_significance(const std::string& value, int line,
                        AnalysisConfig& config) {
  config.significance_er = false;
  config.significance_mir = false;
  config.significance_oir = false;
  const std::string t = trim(value);
  if (t == "none") return;
  if (t == "all") {
    config.significance_er = true;
    config.significance_mir = true;
    config.significance_oir = true;
    return;
  }
  for (const std::string& item : split(t, ',')) {
    const std::string m = trim(item);
    if (m == "er") {
      config.significance_er = true;
    } else if (m == "mir") {
      config.significance_mir = true;
    } else if (m == "oir") {
      config.significance_oir = true;
    } else {
      fail(line, "significance expects none, all or a list of er, mir, oir");
    }
  }
}

// Parses `key = value` lines, rejecting unknown and duplicate keys, and
// invokes `apply(key, value, line)` per assignment.
template <typename Apply>
void parse_flat(const std::string& text, const std::set<std::string>& known,
                const Apply& apply) {
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  std::set<std::string> seen;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string stripped = trim(raw);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      fail(line, "expected key = value, got '" + stripped + "'");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) fail(line, "empty key");
    if (known.count(key) == 0) fail(line, "unknown key '" + key + "'");
    if (!seen.insert(key).second) fail(line, "duplicate key '" + key + "'");
    if (value.empty()) fail(line, "empty value for key '" + key + "'");
    apply(key, value, line);
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw validation_error("cannot open file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

void AnalysisConfig::validate() const {
  estimator.validate();
  if (grid < 2) throw validation_error("grid must be at least 2");
  if (!(fs > 0.0)) throw validation_error("fs must be positive");
  if (max_order < 0) throw validation_error("max_order must be non-negative");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw validation_error("alpha must lie in (0, 1)");
  }
  if (n_surrogates < 20) {
    throw validation_error("n_surrogates must be at least 20");
  }
  if (iaafft_iterations < 1) {
    throw validation_error("iaafft_iterations must be positive");
  }
  if (block_length < 0) {
    throw validation_error("block_length must be non-negative");
  }
  if (output_dir.empty()) throw validation_error("output_dir must not be empty");
  for (const BandSpec& band : bands) band.validate(fs);
}

AnalysisConfig AnalysisConfig::parse_string(const std::string& text) {
  static const std::set<std::string> known = {
      "estimator",   "var_order",       "var_criterion",
      "var_pmax",    "wc_tau",          "wc_bandwidth_hz",
      "grid",        "blocks",          "bands",
      "max_order",   "log_base",        "seed",
      "output_dir",  "fs",              "header",
      "detrend",     "significance",    "n_surrogates",
      "alpha",       "iaafft_iterations", "block_length"};

  AnalysisConfig config;
  parse_flat(text, known, [&](const std::string& key, const std::string& value,
                              int line) {
    if (key == "estimator") {
      if (value == "var") {
        config.estimator.kind = EstimatorKind::kVar;
      } else if (value == "wc") {
        config.estimator.kind = EstimatorKind::kWc;
      } else {
        fail(line, "estimator must be var or wc");
      }
    } else if (key == "var_order") {
      config.estimator.var_order = static_cast<int>(parse_long(value, line));
    } else if (key == "var_criterion") {
      if (value == "aic") {
        config.estimator.criterion = OrderCriterion::kAic;
      } else if (value == "bic") {
        config.estimator.criterion = OrderCriterion::kBic;
      } else {
        fail(line, "var_criterion must be aic or bic");
      }
    } else if (key == "var_pmax") {
      config.estimator.p_max = static_cast<int>(parse_long(value, line));
    } else if (key == "wc_tau") {
      config.estimator.wc_tau = static_cast<int>(parse_long(value, line));
    } else if (key == "wc_bandwidth_hz") {
      config.estimator.wc_bandwidth_hz = parse_double(value, line);
    } else if (key == "grid") {
      config.grid = static_cast<int>(parse_long(value, line));
    } else if (key == "blocks") {
      config.blocks = parse_blocks(value, line);
    } else if (key == "bands") {
      config.bands = parse_bands(value, line);
    } else if (key == "max_order") {
      config.max_order = static_cast<int>(parse_long(value, line));
    } else if (key == "log_base") {
      if (value == "nats") {
        config.log_base = LogBase::kNats;
      } else if (value == "bits") {
        config.log_base = LogBase::kBits;
      } else {
        fail(line, "log_base must be nats or bits");
      }
    } else if (key == "seed") {
      config.seed = parse_u64(value, line);
    } else if (key == "output_dir") {
      config.output_dir = value;
    } else if (key == "fs") {
      config.fs = parse_double(value, line);
    } else if (key == "header") {
      if (value == "auto") {
        config.header = HeaderPolicy::kAuto;
      } else if (value == "yes") {
        config.header = HeaderPolicy::kYes;
      } else if (value == "no") {
        config.header = HeaderPolicy::kNo;
      } else {
        fail(line, "header must be auto, yes or no");
      }
    } else if (key == "detrend") {
      if (value == "none") {
        config.detrend = DetrendMode::kNone;
      } else if (value == "mean") {
        config.detrend = DetrendMode::kMean;
      } else if (value == "linear") {
        config.detrend = DetrendMode::kLinear;
      } else {
        fail(line, "detrend must be none, mean or linear");
      }
    } else if (key == "significance") {
      parse_significance(value, line, config);
    } else if (key == "n_surrogates") {
      config.n_surrogates = static_cast<int>(parse_long(value, line));
    } else if (key == "alpha") {
      config.alpha = parse_double(value, line);
    } else if (key == "iaafft_iterations") {
      config.iaafft_iterations = static_cast<int>(parse_long(value, line));
    } else if (key == "block_length") {
      config.block_length = static_cast<int>(parse_long(value, line));
    }
  });
  config.validate();
  return config;
}

AnalysisConfig AnalysisConfig::parse_file(const std::string& path) {
  return parse_string(read_text_file(path));
}

namespace {

Eigen::MatrixXd parse_matrix(const std::string& value, int q, int line) {
  const std::vector<std::string> rows = split(value, ';');
  if (static_cast<int>(rows.size()) != q) {
    fail(line, "matrix must have " + std::to_string(q) + " rows separated by ';'");
  }
  Eigen::MatrixXd m(q, q);
  for (int r = 0; r < q; ++r) {
    std::istringstream in(rows[r]);
    std::string cell;
    int c = 0;
    while (in >> cell) {
      // Allow commas between entries.
      if (!cell.empty() && cell.back() == ',') cell.pop_back();
      if (cell.empty()) continue;
      if (c >= q) fail(line, "matrix row has more than " + std::to_string(q) + " entries");
      m(r, c) = parse_double(cell, line);
      ++c;
    }
    if (c != q) {
      fail(line, "matrix row " + std::to_string(r + 1) + " has " +
                     std::to_string(c) + " entries, expected " + std::to_string(q));
    }
  }
  return m;
}

}  // namespace

VarModel parse_model_string(const std::string& text) {
  // First pass: collect assignments with their line numbers.
  std::map<std::string, std::pair<std::string, int>> values;
  {
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
      ++line;
      const auto hash = raw.find('#');
      if (hash != std::string::npos) raw.erase(hash);
      const std::string stripped = trim(raw);
      if (stripped.empty()) continue;
      const auto eq = stripped.find('=');
      if (eq == std::string::npos) {
        fail(line, "expected key = value, got '" + stripped + "'");
      }
      const std::string key = trim(stripped.substr(0, eq));
      const std::string value = trim(stripped.substr(eq + 1));
      if (key.empty()) fail(line, "empty key");
      if (values.count(key)) fail(line, "duplicate key '" + key + "'");
      if (value.empty()) fail(line, "empty value for key '" + key + "'");
      values[key] = {value, line};
    }
  }

  auto require = [&](const std::string& key) -> const std::pair<std::string, int>& {
    const auto it = values.find(key);
    if (it == values.end()) {
      throw validation_error("model file: missing key '" + key + "'");
    }
    return it->second;
  };

  VarModel model;
  {
    const auto& [value, line] = require("q");
    model.q = static_cast<int>(parse_long(value, line));
  }
  {
    const auto& [value, line] = require("p");
    model.p = static_cast<int>(parse_long(value, line));
  }
  if (model.q < 1) throw validation_error("model file: q must be positive");
  if (model.p < 1) throw validation_error("model file: p must be positive");
  if (const auto it = values.find("fs"); it != values.end()) {
    model.fs = parse_double(it->second.first, it->second.second);
  }

  std::set<std::string> consumed = {"q", "p", "fs"};
  for (int k = 1; k <= model.p; ++k) {
    const std::string key = "a" + std::to_string(k);
    const auto& [value, line] = require(key);
    model.coeffs.push_back(parse_matrix(value, model.q, line));
    consumed.insert(key);
  }
  {
    const auto& [value, line] = require("sigma");
    model.sigma_u = parse_matrix(value, model.q, line);
    consumed.insert("sigma");
  }
  for (const auto& [key, entry] : values) {
    if (consumed.count(key) == 0) {
      fail(entry.second, "unknown key '" + key + "'");
    }
  }
  model.validate();
  return model;
}

VarModel parse_model_file(const std::string& path) {
  return parse_model_string(read_text_file(path));
}

}  // namespace infodyn
