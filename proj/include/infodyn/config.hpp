#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "infodyn/rates.hpp"
#include "infodyn/spectral.hpp"
#include "infodyn/var_model.hpp"

namespace infodyn {

enum class DetrendMode { kNone, kMean, kLinear };
enum class HeaderPolicy { kAuto, kYes, kNo };
enum class LogBase { kNats, kBits };

// Flat key = value analysis configuration. Unknown and duplicate keys are
// errors (fail-closed); '#' starts a comment. Recognized keys:
//
//   estimator          var | wc                        (default var)
//   var_order          fixed VAR order, 0 = select     (default 0)
//   var_criterion      aic | bic                       (default bic)
//   var_pmax           max order for selection         (default 10)
//   wc_tau             WC truncation lag               (one of wc_tau /
//   wc_bandwidth_hz    WC bandwidth in Hz               wc_bandwidth_hz)
//   grid               frequency grid points           (default 4096)
//   blocks             1-based channels, e.g. 1,2;3,4  (default singletons)
//   bands              e.g. LF:0.04-0.15;HF:0.15-0.4   (default none)
//   max_order          largest OIR order, 0 = all      (default 0)
//   log_base           nats | bits                     (default nats)
//   seed               master seed                     (default 0)
//   output_dir         emit directory                  (default .)
//   fs                 sampling rate in Hz             (default 1)
//   header             auto | yes | no                 (default auto)
//   detrend            none | mean | linear            (default none)
//   significance       none | all | list of er,mir,oir (default none)
//   n_surrogates       surrogate/bootstrap count       (default 100)
//   alpha              significance level              (default 0.05)
//   iaafft_iterations  iAAFT iteration cap             (default 100)
//   block_length       bootstrap block length, 0 auto  (default 0)
struct AnalysisConfig {
  EstimatorSpec estimator;
  int grid = 4096;
  std::vector<std::vector<int>> blocks;  // 0-based after parsing; empty = singletons
  std::vector<BandSpec> bands;
  int max_order = 0;
  LogBase log_base = LogBase::kNats;
  std::uint64_t seed = 0;
  std::string output_dir = ".";
  double fs = 1.0;
  HeaderPolicy header = HeaderPolicy::kAuto;
  DetrendMode detrend = DetrendMode::kNone;
  bool significance_er = false;
  bool significance_mir = false;
  bool significance_oir = false;
  int n_surrogates = 100;
  double alpha = 0.05;
  int iaafft_iterations = 100;
  int block_length = 0;

  bool any_significance() const {
    return significance_er || significance_mir || significance_oir;
  }
  void validate() const;

  static AnalysisConfig parse_string(const std::string& text);
  static AnalysisConfig parse_file(const std::string& path);
};

// Model specification file for `simulate --model`: keys q, p, fs, a1..ap and
// sigma, where matrices are written row-major with ';' between rows, e.g.
//   q = 2
//   p = 1
//   a1 = 0.5 0.1 ; 0.0 0.3
//   sigma = 1 0 ; 0 1
VarModel parse_model_string(const std::string& text);
VarModel parse_model_file(const std::string& path);

}  // namespace infodyn
