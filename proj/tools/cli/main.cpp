#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "subrad/scan.hpp"

namespace {

constexpr int kUsageError = 2;

struct Overrides {
  std::string config;
  std::string out;
  std::optional<int> workers;
  std::optional<long> seed;
  std::string format;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("-c,--config", o.config, "YAML config file")->required()->check(CLI::ExistingFile);
  cmd->add_option("-o,--out", o.out, "output directory (overrides run.output)");
  cmd->add_option("-w,--workers", o.workers, "worker threads")->check(CLI::Range(1, 1024));
  cmd->add_option("--seed", o.seed, "reserved; recorded in the manifest");
  cmd->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
}

subrad::scan::ScanSpec load(const Overrides& o, std::optional<subrad::scan::ScanMode> mode) {
  auto spec = subrad::scan::validate_config(o.config, mode);
  if (!o.out.empty()) spec.output_dir = o.out;
  if (o.workers) spec.workers = *o.workers;
  if (o.seed) spec.seed = static_cast<std::uint64_t>(*o.seed);
  if (!o.format.empty()) {
    spec.format = o.format == "json" ? subrad::scan::OutputFormat::json : subrad::scan::OutputFormat::csv;
  }
  subrad::scan::check_spec(spec);
  return spec;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Subradiant states of atom arrays coupled to a waveguide"};
  app.set_version_flag("--version", std::string(subrad::scan::tool_version()));
  app.require_subcommand(1);

  Overrides overrides;
  std::optional<subrad::scan::ScanMode> selected;
  bool validate_only = false;

  for (const auto& name : subrad::scan::mode_names()) {
    auto* cmd = app.add_subcommand(name, "run a " + name + " sweep");
    add_common(cmd, overrides);
    const auto mode = *subrad::scan::parse_mode(name);
    cmd->callback([&selected, mode] { selected = mode; });
  }
  auto* validate = app.add_subcommand("validate", "parse and check a config without running it");
  validate->add_option("-c,--config", overrides.config, "YAML config file")->required()->check(CLI::ExistingFile);
  validate->callback([&validate_only] { validate_only = true; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kUsageError;
  }

  try {
    if (validate_only) {
      const auto spec = subrad::scan::validate_config(overrides.config);
      std::cout << spec.to_json().dump(2) << '\n';
      return 0;
    }
    const auto spec = load(overrides, selected);
    const auto manifest = subrad::scan::run_scan(spec);
    for (const auto& cell : manifest.cells) {
      if (!cell.ok) std::cerr << "cell " << cell.params.dump() << " failed: " << cell.message << '\n';
    }
    std::cerr << manifest.outputs.size() << " file(s) written to " << spec.output_dir.string() << " in "
              << manifest.wall_time_s << " s\n";
    return manifest.exit_code();
  } catch (const subrad::scan::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  }
}
