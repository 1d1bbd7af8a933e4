#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace subrad::scan {

enum class ScanMode {
  decay_map,
  decay_vs_k,
  size_map,
  hosvd_analyze,
  entropy_map,
  correlations,
  driven_map,
  driven_spectrum,
};

enum class OutputFormat { csv, json };

std::string_view to_string(ScanMode mode);
std::optional<ScanMode> parse_mode(std::string_view name);
const std::vector<std::string>& mode_names();

// Extra fine detuning windows around the most subradiant single-excitation
// resonances of each array.
struct Refinement {
  double half_width = 0.1;
  double step = 0.001;
  int resonances = 2;
};

struct ScanSpec {
  ScanMode mode = ScanMode::decay_map;
  std::vector<int> n_atoms;
  std::vector<double> d_over_lambda;
  std::vector<int> k;  // empty: every k in 1..N for each N
  std::vector<double> power;
  std::vector<double> detuning;
  std::optional<Refinement> refine;
  bool phase_on_drive = true;
  double drive_scale = 1.0;
  double gamma_1d = 1.0;
  std::filesystem::path output_dir = "out";
  int workers = 1;
  std::uint64_t seed = 0;  // reserved: no stochastic paths yet
  OutputFormat format = OutputFormat::csv;

  nlohmann::json to_json() const;
};

// Usage-level problem with a config file or command line. `where` is
// "file:line:column" when the location is known.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string where, std::string field, const std::string& message);
  const std::string& where() const { return where_; }
  const std::string& field() const { return field_; }

 private:
  std::string where_;
  std::string field_;
};

// Parses a YAML document. `mode_override` replaces (and must agree with) a
// mode given in the file.
ScanSpec parse_config(std::string_view text, std::string_view source_name,
                      std::optional<ScanMode> mode_override = std::nullopt);
ScanSpec validate_config(const std::filesystem::path& path, std::optional<ScanMode> mode_override = std::nullopt);

// Re-checks invariants after command-line overrides.
void check_spec(const ScanSpec& spec);

struct CellStatus {
  nlohmann::json params;
  bool ok = true;
  std::string message;
};

struct RunManifest {
  ScanSpec spec;
  std::string tool_version;
  double wall_time_s = 0.0;
  std::vector<CellStatus> cells;
  std::vector<std::string> outputs;  // file names relative to output_dir

  bool all_ok() const;
  int exit_code() const { return all_ok() ? 0 : 3; }
  nlohmann::json to_json() const;
};

inline constexpr std::string_view kManifestName = "manifest.json";
std::string_view tool_version();

// Runs the sweep, writes data files and the manifest into spec.output_dir.
RunManifest run_scan(const ScanSpec& spec);

}  // namespace subrad::scan
