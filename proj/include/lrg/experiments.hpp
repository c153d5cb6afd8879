#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "lrg/decay.hpp"
#include "lrg/multiscale.hpp"

namespace lrg {

/// A configuration value failed validation; the message names the offending field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::string experiment = "default";
  std::string output = "out";
  int d = 1, L = 3, k = 1, m = 2;
  MultiscaleParams params;
  int fourier_M_init = 0;  ///< 0 selects the default starting resolution 8 L^k
  double q_max = 0.05;
  int shells = 4;
  DecayWindow window;
  std::vector<double> q_grid = default_q_grid();
  std::uint64_t seed = 20240601;

  LatticeGeometry geometry() const;
};

/// Throws ConfigError unless the name matches [A-Za-z0-9_.-]+ (it is written unquoted into CSV).
void validate_experiment_name(const std::string& name);

/// Strict JSON parsing: unknown keys, wrong types and invalid values raise ConfigError.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// One judged (or informational) metric. `tolerance` is a comparator string such as
/// "<=1e-09", ">0", ">=0.1", "==1", "finite", or "-" for informational rows.
struct MetricRow {
  std::string metric;
  double value = 0.0;
  std::string tolerance = "-";
  std::string pass = "info";  ///< "true", "false" or "info"
};

/// Re-evaluates a tolerance string against a value ("info" for "-").
std::string judge(double value, const std::string& tolerance);

struct SuiteResult {
  std::string name;
  std::vector<MetricRow> rows;
  double wall_time_s = 0.0;
  bool passed() const;
};

/// Suite names in execution order (without "all").
const std::vector<std::string>& suite_names();

SuiteResult run_suite(const std::string& name, const ExperimentConfig& cfg);

inline const char* kCsvHeader = "experiment,d,L,k,m,a,mu0,metric,value,tolerance,pass";

/// Writes <dir>/<suite>.csv.
void write_csv(const std::filesystem::path& dir, const SuiteResult& suite, const ExperimentConfig& cfg);
/// Writes <dir>/summary.json with one object per suite.
void write_summary(const std::filesystem::path& dir, const std::vector<SuiteResult>& suites,
                   const ExperimentConfig& cfg);

}  // namespace lrg
