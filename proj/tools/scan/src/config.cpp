#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "subrad/driven.hpp"
#include "subrad/lattice.hpp"
#include "subrad/scan.hpp"
#include "subrad/tensor.hpp"

namespace subrad::scan {

namespace {

constexpr std::uint64_t kMaxSectorDim = 5000;

struct ModeName {
  ScanMode mode;
  std::string_view name;
};

constexpr ModeName kModes[] = {
    {ScanMode::decay_map, "decay-map"},         {ScanMode::decay_vs_k, "decay-vs-k"},
    {ScanMode::size_map, "size-map"},           {ScanMode::hosvd_analyze, "hosvd-analyze"},
    {ScanMode::entropy_map, "entropy-map"},     {ScanMode::correlations, "correlations"},
    {ScanMode::driven_map, "driven-map"},       {ScanMode::driven_spectrum, "driven-spectrum"},
};

std::string join_modes() {
  std::string out;
  for (const auto& m : kModes) {
    if (!out.empty()) out += ", ";
    out += m.name;
  }
  return out;
}

bool is_driven(ScanMode m) { return m == ScanMode::driven_map || m == ScanMode::driven_spectrum; }

class Parser {
 public:
  explicit Parser(std::string_view source) : source_(source) {}

  [[noreturn]] void fail(const YAML::Node& node, const std::string& field, const std::string& msg) const {
    std::string where(source_);
    if (node.IsDefined() && !node.Mark().is_null()) {
      where += ":" + std::to_string(node.Mark().line + 1) + ":" + std::to_string(node.Mark().column + 1);
    }
    throw ConfigError(where, field, msg);
  }

  [[noreturn]] void fail(const std::string& field, const std::string& msg) const {
    throw ConfigError(std::string(source_), field, msg);
  }

  void check_keys(const YAML::Node& map, const std::string& section, std::initializer_list<std::string_view> allowed) {
    if (!map.IsMap()) fail(map, section, "expected a mapping");
    for (const auto& kv : map) {
      const auto key = kv.first.as<std::string>();
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        std::string list;
        for (auto a : allowed) {
          if (!list.empty()) list += ", ";
          list += a;
        }
        fail(kv.first, section.empty() ? key : section + "." + key, "unknown key (allowed: " + list + ")");
      }
    }
  }

  double real(const YAML::Node& node, const std::string& field) const {
    if (!node.IsScalar()) fail(node, field, "expected a number");
    try {
      const double v = node.as<double>();
      if (!std::isfinite(v)) fail(node, field, "expected a finite number");
      return v;
    } catch (const YAML::Exception&) {
      fail(node, field, "expected a number, got '" + node.Scalar() + "'");
    }
  }

  long integer(const YAML::Node& node, const std::string& field) const {
    if (!node.IsScalar()) fail(node, field, "expected an integer");
    try {
      return node.as<long>();
    } catch (const YAML::Exception&) {
      fail(node, field, "expected an integer, got '" + node.Scalar() + "'");
    }
  }

  bool boolean(const YAML::Node& node, const std::string& field) const {
    try {
      return node.as<bool>();
    } catch (const YAML::Exception&) {
      fail(node, field, "expected true or false");
    }
  }

  // {start, stop, count} or {start, stop, step}; both ends inclusive.
  std::vector<double> real_range(const YAML::Node& node, const std::string& field) {
    check_keys(node, field, {"start", "stop", "count", "step"});
    if (!node["start"] || !node["stop"]) fail(node, field, "range needs 'start' and 'stop'");
    const double start = real(node["start"], field + ".start");
    const double stop = real(node["stop"], field + ".stop");
    if (!(stop > start)) fail(node, field, "range needs stop > start");
    std::vector<double> out;
    if (node["count"] && node["step"]) fail(node, field, "give either 'count' or 'step', not both");
    if (node["count"]) {
      const long count = integer(node["count"], field + ".count");
      if (count < 2) fail(node["count"], field + ".count", "count must be at least 2");
      for (long i = 0; i < count; ++i) out.push_back(start + (stop - start) * static_cast<double>(i) / static_cast<double>(count - 1));
    } else if (node["step"]) {
      const double step = real(node["step"], field + ".step");
      if (!(step > 0.0)) fail(node["step"], field + ".step", "step must be positive");
      const auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9));
      if (count > 10'000'000) fail(node, field, "range has too many points");
      for (long i = 0; i <= count; ++i) out.push_back(start + static_cast<double>(i) * step);
    } else {
      fail(node, field, "range needs 'count' or 'step'");
    }
    return out;
  }

  std::vector<double> real_grid(const YAML::Node& node, const std::string& field) {
    std::vector<double> out;
    if (node.IsScalar()) {
      out.push_back(real(node, field));
    } else if (node.IsMap()) {
      out = real_range(node, field);
    } else if (node.IsSequence()) {
      for (const auto& item : node) {
        if (item.IsMap()) {
          auto seg = real_range(item, field);
          out.insert(out.end(), seg.begin(), seg.end());
        } else {
          out.push_back(real(item, field));
        }
      }
    } else {
      fail(node, field, "expected a number, a list or a {start, stop, count|step} range");
    }
    if (out.empty()) fail(node, field, "grid is empty");
    return out;
  }

  std::vector<int> int_grid(const YAML::Node& node, const std::string& field) {
    std::vector<int> out;
    const auto push = [&](const YAML::Node& n, long v) {
      if (v < -1'000'000 || v > 1'000'000) fail(n, field, "integer out of range");
      out.push_back(static_cast<int>(v));
    };
    if (node.IsScalar()) {
      push(node, integer(node, field));
    } else if (node.IsMap()) {
      check_keys(node, field, {"start", "stop", "step"});
      if (!node["start"] || !node["stop"]) fail(node, field, "range needs 'start' and 'stop'");
      const long start = integer(node["start"], field + ".start");
      const long stop = integer(node["stop"], field + ".stop");
      const long step = node["step"] ? integer(node["step"], field + ".step") : 1;
      if (step < 1) fail(node, field, "step must be >= 1");
      if (stop < start) fail(node, field, "range needs stop >= start");
      for (long v = start; v <= stop; v += step) push(node, v);
    } else if (node.IsSequence()) {
      for (const auto& item : node) push(item, integer(item, field));
    } else {
      fail(node, field, "expected an integer, a list or a {start, stop} range");
    }
    if (out.empty()) fail(node, field, "grid is empty");
    return out;
  }

 private:
  std::string_view source_;
};

template <typename T>
bool strictly_increasing(const std::vector<T>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] > v[i - 1])) return false;
  }
  return true;
}

}  // namespace

ConfigError::ConfigError(std::string where, std::string field, const std::string& message)
    : std::runtime_error(where + (field.empty() ? std::string() : ": field '" + field + "'") + ": " + message),
      where_(std::move(where)),
      field_(std::move(field)) {}

std::string_view to_string(ScanMode mode) {
  for (const auto& m : kModes) {
    if (m.mode == mode) return m.name;
  }
  return "?";
}

std::optional<ScanMode> parse_mode(std::string_view name) {
  for (const auto& m : kModes) {
    if (m.name == name) return m.mode;
  }
  return std::nullopt;
}

const std::vector<std::string>& mode_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& m : kModes) v.emplace_back(m.name);
    return v;
  }();
  return names;
}

void check_spec(const ScanSpec& spec) {
  const auto bad = [](const std::string& field, const std::string& msg) -> void { throw ConfigError("spec", field, msg); };
  if (spec.n_atoms.empty()) bad("array.n_atoms", "grid is empty");
  if (spec.d_over_lambda.empty()) bad("array.d_over_lambda", "grid is empty");
  if (!(spec.gamma_1d > 0.0)) bad("array.gamma_1d", "must be positive");
  if (spec.workers < 1) bad("run.workers", "must be at least 1");
  for (double d : spec.d_over_lambda) {
    if (!(d >= 0.0)) bad("array.d_over_lambda", "periods must be non-negative");
  }
  const int n_min = *std::min_element(spec.n_atoms.begin(), spec.n_atoms.end());
  for (int n : spec.n_atoms) {
    if (n < 1 || n > kMaxAtoms) bad("array.n_atoms", "N must be in [1, " + std::to_string(kMaxAtoms) + "]");
  }
  for (int k : spec.k) {
    if (k < 1) bad("excitations", "k must be at least 1");
    if (k > n_min) bad("excitations", "k = " + std::to_string(k) + " exceeds N = " + std::to_string(n_min));
  }
  if (!is_driven(spec.mode)) {
    for (int n : spec.n_atoms) {
      const int k_hi = spec.k.empty() ? n : std::min(n, *std::max_element(spec.k.begin(), spec.k.end()));
      for (int k = 1; k <= k_hi; ++k) {
        if (!spec.k.empty() && std::find(spec.k.begin(), spec.k.end(), k) == spec.k.end()) continue;
        if (binomial(n, k) > kMaxSectorDim) {
          bad("excitations", "sector N=" + std::to_string(n) + ", k=" + std::to_string(k) + " has dimension " +
                                 std::to_string(binomial(n, k)) + " > " + std::to_string(kMaxSectorDim));
        }
      }
    }
  }
  if (spec.mode == ScanMode::entropy_map && spec.n_atoms.size() != 1) {
    bad("array.n_atoms", "entropy-map takes a single N");
  }
  if (spec.mode == ScanMode::hosvd_analyze) {
    for (int n : spec.n_atoms) {
      for (int k : spec.k) {
        if (!can_materialize(n, k)) bad("excitations", "hosvd-analyze is limited to N <= 12 and k <= 5");
      }
      if (spec.k.empty() && !can_materialize(n, n)) bad("excitations", "hosvd-analyze needs an explicit k list for N > 5");
    }
  }
  if (is_driven(spec.mode)) {
    if (spec.mode == ScanMode::driven_map && spec.n_atoms.size() != 1) bad("array.n_atoms", "driven-map takes a single N");
    for (int n : spec.n_atoms) {
      if (n > kMaxDrivenAtoms) bad("array.n_atoms", "driven modes support N <= " + std::to_string(kMaxDrivenAtoms));
    }
    if (spec.power.empty()) bad("drive.power", "grid is empty");
    for (double p : spec.power) {
      if (!(p >= 0.0)) bad("drive.power", "power must be non-negative");
    }
    if (spec.detuning.empty()) bad("drive.detuning", "grid is empty");
    if (!strictly_increasing(spec.detuning)) bad("drive.detuning", "grid must be strictly increasing");
    if (!(spec.drive_scale > 0.0)) bad("drive.scale", "must be positive");
    if (spec.refine && (!(spec.refine->step > 0.0) || !(spec.refine->half_width > 0.0) || spec.refine->resonances < 1)) {
      bad("drive.refine", "needs half_width > 0, step > 0, resonances >= 1");
    }
  }
}

ScanSpec parse_config(std::string_view text, std::string_view source_name, std::optional<ScanMode> mode_override) {
  Parser p(source_name);
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw ConfigError(std::string(source_name) + ":" + std::to_string(e.mark.line + 1) + ":" +
                          std::to_string(e.mark.column + 1),
                      "", "YAML syntax error: " + e.msg);
  }
  if (!root.IsMap()) p.fail(root, "", "top level must be a mapping");
  p.check_keys(root, "", {"mode", "array", "excitations", "drive", "run"});

  ScanSpec spec;
  if (root["mode"]) {
    const auto name = root["mode"].as<std::string>();
    const auto mode = parse_mode(name);
    if (!mode) p.fail(root["mode"], "mode", "unknown mode '" + name + "' (allowed: " + join_modes() + ")");
    if (mode_override && *mode_override != *mode) {
      p.fail(root["mode"], "mode",
             "file requests '" + name + "' but the command is '" + std::string(to_string(*mode_override)) + "'");
    }
    spec.mode = *mode;
  } else if (mode_override) {
    spec.mode = *mode_override;
  } else {
    p.fail("mode", "missing (allowed: " + join_modes() + ")");
  }

  const YAML::Node array = root["array"];
  if (!array) p.fail(root, "array", "missing section");
  p.check_keys(array, "array", {"n_atoms", "d_over_lambda", "gamma_1d"});
  if (!array["n_atoms"]) p.fail(array, "array.n_atoms", "missing");
  spec.n_atoms = p.int_grid(array["n_atoms"], "array.n_atoms");
  if (!array["d_over_lambda"]) p.fail(array, "array.d_over_lambda", "missing");
  spec.d_over_lambda = p.real_grid(array["d_over_lambda"], "array.d_over_lambda");
  if (array["gamma_1d"]) spec.gamma_1d = p.real(array["gamma_1d"], "array.gamma_1d");

  const int n_min = *std::min_element(spec.n_atoms.begin(), spec.n_atoms.end());
  if (root["excitations"]) {
    spec.k = p.int_grid(root["excitations"], "excitations");
    for (int k : spec.k) {
      if (k > n_min) {
        p.fail(root["excitations"], "excitations",
               "k = " + std::to_string(k) + " exceeds N = " + std::to_string(n_min));
      }
    }
  } else if (spec.mode == ScanMode::hosvd_analyze || spec.mode == ScanMode::correlations) {
    p.fail(root, "excitations", "required by mode " + std::string(to_string(spec.mode)));
  }

  if (const YAML::Node drive = root["drive"]) {
    p.check_keys(drive, "drive", {"power", "detuning", "refine", "phase_on_drive", "scale"});
    if (drive["power"]) spec.power = p.real_grid(drive["power"], "drive.power");
    if (drive["detuning"]) {
      spec.detuning = p.real_grid(drive["detuning"], "drive.detuning");
      if (!strictly_increasing(spec.detuning)) {
        p.fail(drive["detuning"], "drive.detuning", "grid must be strictly increasing");
      }
    }
    if (drive["phase_on_drive"]) spec.phase_on_drive = p.boolean(drive["phase_on_drive"], "drive.phase_on_drive");
    if (drive["scale"]) spec.drive_scale = p.real(drive["scale"], "drive.scale");
    if (const YAML::Node refine = drive["refine"]) {
      p.check_keys(refine, "drive.refine", {"half_width", "step", "resonances"});
      Refinement r;
      if (refine["half_width"]) r.half_width = p.real(refine["half_width"], "drive.refine.half_width");
      if (refine["step"]) r.step = p.real(refine["step"], "drive.refine.step");
      if (refine["resonances"]) r.resonances = static_cast<int>(p.integer(refine["resonances"], "drive.refine.resonances"));
      spec.refine = r;
    }
  }
  if (is_driven(spec.mode)) {
    if (spec.power.empty()) p.fail(root, "drive.power", "required by mode " + std::string(to_string(spec.mode)));
    if (spec.detuning.empty()) p.fail(root, "drive.detuning", "required by mode " + std::string(to_string(spec.mode)));
  }

  if (const YAML::Node run = root["run"]) {
    p.check_keys(run, "run", {"output", "workers", "seed", "format"});
    if (run["output"]) spec.output_dir = run["output"].as<std::string>();
    if (run["workers"]) {
      const long w = p.integer(run["workers"], "run.workers");
      if (w < 1 || w > 1024) p.fail(run["workers"], "run.workers", "must be in [1, 1024]");
      spec.workers = static_cast<int>(w);
    }
    if (run["seed"]) spec.seed = static_cast<std::uint64_t>(p.integer(run["seed"], "run.seed"));
    if (run["format"]) {
      const auto f = run["format"].as<std::string>();
      if (f == "csv") {
        spec.format = OutputFormat::csv;
      } else if (f == "json") {
        spec.format = OutputFormat::json;
      } else {
        p.fail(run["format"], "run.format", "expected csv or json, got '" + f + "'");
      }
    }
  }

  try {
    check_spec(spec);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string(source_name), e.field(), std::string(e.what()).substr(e.where().size() + 2));
  }
  return spec;
}

ScanSpec validate_config(const std::filesystem::path& path, std::optional<ScanMode> mode_override) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), "", "cannot open config file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string(), mode_override);
}

nlohmann::json ScanSpec::to_json() const {
  nlohmann::json j;
  j["mode"] = std::string(scan::to_string(mode));
  j["n_atoms"] = n_atoms;
  j["d_over_lambda"] = d_over_lambda;
  j["k"] = k;
  j["power"] = power;
  j["detuning_points"] = detuning.size();
  if (!detuning.empty()) j["detuning_range"] = {detuning.front(), detuning.back()};
  if (refine) {
    j["refine"] = {{"half_width", refine->half_width}, {"step", refine->step}, {"resonances", refine->resonances}};
  }
  j["phase_on_drive"] = phase_on_drive;
  j["drive_scale"] = drive_scale;
  j["gamma_1d"] = gamma_1d;
  j["output"] = output_dir.string();
  j["workers"] = workers;
  j["seed"] = seed;
  j["format"] = format == OutputFormat::csv ? "csv" : "json";
  return j;
}

}  // namespace subrad::scan
