#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "subrad/driven.hpp"
#include "subrad/io.hpp"
#include "subrad/observables.hpp"
#include "subrad/parallel.hpp"
#include "subrad/scan.hpp"
#include "subrad/spectrum.hpp"
#include "subrad/tensor.hpp"

namespace subrad::scan {

namespace {

using nlohmann::json;

// Short, stable tag for file names: 0.05 -> "0.05", 1e-06 -> "1e-06".
std::string tag(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

std::vector<int> k_values(const ScanSpec& spec, int n) {
  std::vector<int> out;
  if (spec.k.empty()) {
    for (int k = 1; k <= n; ++k) out.push_back(k);
  } else {
    for (int k : spec.k) {
      if (k <= n) out.push_back(k);
    }
  }
  return out;
}

struct SectorCell {
  int n = 0;
  double d = 0.0;
  int k = 0;
};

// (N, d, k) loop order, k <= N.
std::vector<SectorCell> sector_cells(const ScanSpec& spec) {
  std::vector<SectorCell> cells;
  for (int n : spec.n_atoms) {
    for (double d : spec.d_over_lambda) {
      for (int k : k_values(spec, n)) cells.push_back({n, d, k});
    }
  }
  return cells;
}

json cell_params(const SectorCell& c) { return {{"N", c.n}, {"d_over_lambda", c.d}, {"k", c.k}}; }

class Writer {
 public:
  Writer(const ScanSpec& spec, RunManifest& manifest) : dir_(spec.output_dir), manifest_(manifest) {}

  void write(const std::string& name, const std::function<void(std::ostream&)>& body) {
    std::ostringstream buf;
    body(buf);
    const auto path = dir_ / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << buf.str();
    if (!out) throw std::runtime_error("write failed for " + path.string());
    manifest_.outputs.push_back(name);
  }

  void write_json(const std::string& name, const json& j) {
    write(name, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
  }

 private:
  std::filesystem::path dir_;
  RunManifest& manifest_;
};

// Runs body over cells on spec.workers threads and records per-cell status.
// A throwing cell is marked failed; its slot in `done` stays false.
template <typename Cell>
std::vector<char> run_cells(RunManifest& manifest, const std::vector<Cell>& cells,
                            const std::function<json(const Cell&)>& params,
                            const std::function<void(std::size_t)>& body, int workers) {
  std::vector<char> done(cells.size(), 0);  // not vector<bool>: written from several threads
  std::vector<std::string> errors(cells.size());
  parallel_for(cells.size(), workers, [&](std::size_t i) {
    try {
      body(i);
      done[i] = 1;
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  for (std::size_t i = 0; i < cells.size(); ++i) {
    manifest.cells.push_back({params(cells[i]), done[i] != 0, errors[i]});
  }
  return done;
}

void run_decay(const ScanSpec& spec, RunManifest& manifest, Writer& writer, const std::string& stem) {
  const auto cells = sector_cells(spec);
  std::vector<double> gamma(cells.size());
  const auto done = run_cells<SectorCell>(
      manifest, cells, cell_params,
      [&](std::size_t i) {
        const auto& c = cells[i];
        gamma[i] = min_decay_rate(ArrayConfig::from_period(c.n, c.d, spec.gamma_1d), c.k);
      },
      spec.workers);
  DecayMap map;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (done[i]) map.rows.push_back({cells[i].d, cells[i].k, cells[i].n, gamma[i]});
  }
  if (spec.format == OutputFormat::csv) {
    writer.write(stem + ".csv", [&](std::ostream& os) { io::write_decay_map_csv(os, map); });
  } else {
    writer.write_json(stem + ".json", io::to_json(map));
  }
}

struct HosvdCell {
  double gamma = 0.0;
  Complex epsilon;
  HosvdResult result;
  HosvdResiduals residuals;
  std::vector<double> fermionic;
  std::vector<double> dimerized;  // empty for odd N
};

void run_hosvd(const ScanSpec& spec, RunManifest& manifest, Writer& writer) {
  const auto cells = sector_cells(spec);
  std::vector<HosvdCell> out(cells.size());
  const auto done = run_cells<SectorCell>(
      manifest, cells, cell_params,
      [&](std::size_t i) {
        const auto& c = cells[i];
        const auto cfg = ArrayConfig::from_period(c.n, c.d, spec.gamma_1d);
        const auto basis = enumerate_sector(c.n, c.k);
        const auto states = diagonalize_sector(build_hamiltonian(cfg, basis));
        const auto psi = to_symmetric_tensor(states.front(), basis);
        auto& r = out[i];
        r.gamma = states.front().gamma;
        r.epsilon = states.front().epsilon;
        r.result = hosvd(psi);
        r.residuals = hosvd_residuals(psi, r.result);
        if (c.n >= 2) r.fermionic = ansatz_overlap(r.result, Ansatz::fermionic);
        if (c.n % 2 == 0) r.dimerized = ansatz_overlap(r.result, Ansatz::dimerized);
      },
      spec.workers);

  if (spec.format == OutputFormat::json) {
    json arr = json::array();
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (!done[i]) continue;
      const auto& r = out[i];
      json j = io::to_json(r.result);
      j["N"] = cells[i].n;
      j["d_over_lambda"] = cells[i].d;
      j["k"] = cells[i].k;
      j["gamma"] = io::round_sig12(r.gamma);
      j["epsilon"] = {io::round_sig12(r.epsilon.real()), io::round_sig12(r.epsilon.imag())};
      j["residuals"] = {{"reconstruction", io::round_sig12(r.residuals.reconstruction)},
                        {"unitarity", io::round_sig12(r.residuals.unitarity)},
                        {"quasi_diagonality", io::round_sig12(r.residuals.quasi_diagonality)},
                        {"weight_defect", io::round_sig12(r.residuals.weight_defect)}};
      auto rounded = [](const std::vector<double>& v) {
        json a = json::array();
        for (double x : v) a.push_back(io::round_sig12(x));
        return a;
      };
      j["overlap_fermionic"] = rounded(r.fermionic);
      j["overlap_dimerized"] = rounded(r.dimerized);
      arr.push_back(std::move(j));
    }
    writer.write_json("hosvd.json", arr);
    return;
  }

  writer.write("hosvd_summary.csv", [&](std::ostream& os) {
    os << "N,d_over_lambda,k,gamma,entropy,reconstruction,unitarity,quasi_diagonality,weight_defect\n";
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (!done[i]) continue;
      const auto& r = out[i];
      os << cells[i].n << ',' << io::format_double(cells[i].d) << ',' << cells[i].k << ','
         << io::format_double(r.gamma) << ',' << io::format_double(r.result.entropy) << ','
         << io::format_double(r.residuals.reconstruction) << ',' << io::format_double(r.residuals.unitarity) << ','
         << io::format_double(r.residuals.quasi_diagonality) << ','
         << io::format_double(r.residuals.weight_defect) << '\n';
    }
  });
  writer.write("hosvd_lambda.csv", [&](std::ostream& os) {
    os << "N,d_over_lambda,k,alpha,lambda,overlap_fermionic,overlap_dimerized\n";
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (!done[i]) continue;
      const auto& r = out[i];
      const auto cell = [](const std::vector<double>& v, Eigen::Index a) {
        return a < static_cast<Eigen::Index>(v.size()) ? io::format_double(v[static_cast<std::size_t>(a)])
                                                       : std::string();
      };
      for (Eigen::Index a = 0; a < r.result.singular_values.size(); ++a) {
        os << cells[i].n << ',' << io::format_double(cells[i].d) << ',' << cells[i].k << ',' << a + 1 << ','
           << io::format_double(r.result.singular_values(a)) << ',' << cell(r.fermionic, a) << ','
           << cell(r.dimerized, a) << '\n';
      }
    }
  });
}

void run_entropy(const ScanSpec& spec, RunManifest& manifest, Writer& writer) {
  const auto cells = sector_cells(spec);
  std::vector<double> entropy(cells.size());
  const auto done = run_cells<SectorCell>(
      manifest, cells, cell_params,
      [&](std::size_t i) {
        const auto& c = cells[i];
        const auto cfg = ArrayConfig::from_period(c.n, c.d, spec.gamma_1d);
        const auto basis = enumerate_sector(c.n, c.k);
        const auto state = diagonalize_sector(build_hamiltonian(cfg, basis)).front();
        // Only the Gram spectrum is needed; skip the dense core.
        const auto gram = to_symmetric_tensor(state, basis).unfolding_gram();
        Eigen::SelfAdjointEigenSolver<CMatrix> eig(gram, Eigen::EigenvaluesOnly);
        std::vector<double> lambda;
        for (Eigen::Index a = 0; a < eig.eigenvalues().size(); ++a) {
          lambda.push_back(std::sqrt(std::max(0.0, eig.eigenvalues()(a))));
        }
        std::sort(lambda.rbegin(), lambda.rend());
        entropy[i] = entanglement_entropy(lambda);
      },
      spec.workers);
  std::vector<io::EntropyMapRow> rows;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (done[i]) rows.push_back({cells[i].d, cells[i].k, entropy[i]});
  }
  if (spec.format == OutputFormat::csv) {
    writer.write("entropy_map.csv", [&](std::ostream& os) { io::write_entropy_map_csv(os, rows); });
  } else {
    writer.write_json("entropy_map.json", io::to_json(rows));
  }
}

void run_correlations(const ScanSpec& spec, RunManifest& manifest, Writer& writer) {
  const auto cells = sector_cells(spec);
  std::vector<CorrelationMatrix> corr(cells.size());
  std::vector<std::optional<DimerizationScore>> score(cells.size());
  const auto done = run_cells<SectorCell>(
      manifest, cells, cell_params,
      [&](std::size_t i) {
        const auto& c = cells[i];
        const auto cfg = ArrayConfig::from_period(c.n, c.d, spec.gamma_1d);
        const auto basis = enumerate_sector(c.n, c.k);
        const auto state = diagonalize_sector(build_hamiltonian(cfg, basis)).front();
        corr[i] = correlation_matrix(state, basis);
        if (c.n % 2 == 0) score[i] = dimerization_score(corr[i]);
      },
      spec.workers);

  json all = json::array();
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (!done[i]) continue;
    const auto& c = cells[i];
    if (spec.format == OutputFormat::csv) {
      const auto name = "correlations_N" + std::to_string(c.n) + "_k" + std::to_string(c.k) + "_d" + tag(c.d) + ".csv";
      writer.write(name, [&](std::ostream& os) { io::write_correlation_csv(os, corr[i]); });
    } else {
      json j = io::to_json(corr[i]);
      j["d_over_lambda"] = c.d;
      j["k"] = c.k;
      all.push_back(std::move(j));
    }
  }
  if (spec.format == OutputFormat::json) writer.write_json("correlations.json", all);

  const auto opt = [](const std::optional<DimerizationScore>& s, bool offset) {
    if (!s) return std::string();
    return io::format_double(offset ? s->offset_score : s->score);
  };
  writer.write("dimerization.csv", [&](std::ostream& os) {
    os << "N,d_over_lambda,k,score,offset_score\n";
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (!done[i]) continue;
      os << cells[i].n << ',' << io::format_double(cells[i].d) << ',' << cells[i].k << ',' << opt(score[i], false)
         << ',' << opt(score[i], true) << '\n';
    }
  });
}

struct DrivenCell {
  int n = 0;
  double d = 0.0;
  double power = 0.0;
};

json driven_params(const DrivenCell& c) { return {{"N", c.n}, {"d_over_lambda", c.d}, {"power", c.power}}; }

ScatteringSpectrum driven_cell(const ScanSpec& spec, const DrivenCell& c) {
  const auto cfg = ArrayConfig::from_period(c.n, c.d, spec.gamma_1d);
  DriveConfig drive;
  drive.power = c.power;
  drive.phase_on_drive = spec.phase_on_drive;
  drive.amplitude_scale = spec.drive_scale;
  if (spec.refine) {
    const auto centers = subradiant_resonances(cfg, std::min(spec.refine->resonances, c.n));
    drive.detunings = refined_grid(spec.detuning, centers, spec.refine->half_width, spec.refine->step);
  } else {
    drive.detunings = spec.detuning;
  }
  return incoherent_spectrum(cfg, drive, spec.workers);
}

// Driven cells are few and heavy: run them one at a time and parallelize
// over the detuning grid inside each.
std::vector<DrivenCell> driven_cells(const ScanSpec& spec) {
  std::vector<DrivenCell> cells;
  for (int n : spec.n_atoms) {
    for (double d : spec.d_over_lambda) {
      for (double p : spec.power) cells.push_back({n, d, p});
    }
  }
  return cells;
}

void run_driven_spectrum(const ScanSpec& spec, RunManifest& manifest, Writer& writer) {
  const auto cells = driven_cells(spec);
  std::vector<ScatteringSpectrum> spectra(cells.size());
  const auto done = run_cells<DrivenCell>(
      manifest, cells, driven_params, [&](std::size_t i) { spectra[i] = driven_cell(spec, cells[i]); }, 1);

  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (!done[i]) continue;
    const auto& c = cells[i];
    const auto stem = "spectrum_N" + std::to_string(c.n) + "_d" + tag(c.d) + "_P" + tag(c.power);
    if (spec.format == OutputFormat::csv) {
      writer.write(stem + ".csv", [&](std::ostream& os) { io::write_spectrum_csv(os, spectra[i]); });
    } else {
      writer.write_json(stem + ".json", io::to_json(spectra[i]));
    }
  }
  writer.write("peaks.csv", [&](std::ostream& os) {
    os << "N,d_over_lambda,power,position,height,fwhm\n";
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (!done[i]) continue;
      for (const auto& p : find_peaks(spectra[i].detunings, spectra[i].incoherent)) {
        os << cells[i].n << ',' << io::format_double(cells[i].d) << ',' << io::format_double(cells[i].power) << ','
           << io::format_double(p.position) << ',' << io::format_double(p.height) << ','
           << io::format_double(p.fwhm) << '\n';
      }
    }
  });
}

void run_driven_map(const ScanSpec& spec, RunManifest& manifest, Writer& writer) {
  std::vector<DrivenCell> cells;
  for (double p : spec.power) {
    for (double d : spec.d_over_lambda) cells.push_back({spec.n_atoms.front(), d, p});
  }
  std::vector<std::optional<double>> fwhm(cells.size());
  const auto done = run_cells<DrivenCell>(
      manifest, cells, driven_params,
      [&](std::size_t i) { fwhm[i] = driven_cell(spec, cells[i]).narrowest_fwhm; }, 1);
  std::vector<io::LinewidthMapRow> rows;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (done[i]) rows.push_back({cells[i].power, cells[i].d, fwhm[i]});
  }
  if (spec.format == OutputFormat::csv) {
    writer.write("linewidth_map.csv", [&](std::ostream& os) { io::write_linewidth_map_csv(os, rows); });
  } else {
    writer.write_json("linewidth_map.json", io::to_json(rows));
  }
}

}  // namespace

std::string_view tool_version() { return SUBRAD_VERSION; }

bool RunManifest::all_ok() const {
  return std::all_of(cells.begin(), cells.end(), [](const CellStatus& c) { return c.ok; });
}

nlohmann::json RunManifest::to_json() const {
  json cell_list = json::array();
  for (const auto& c : cells) {
    json j = {{"params", c.params}, {"ok", c.ok}};
    if (!c.ok) j["error"] = c.message;
    cell_list.push_back(std::move(j));
  }
  const auto failed = std::count_if(cells.begin(), cells.end(), [](const CellStatus& c) { return !c.ok; });
  return {{"tool", "subrad"},
          {"version", tool_version},
          {"config", spec.to_json()},
          {"wall_time_s", wall_time_s},
          {"cells_total", cells.size()},
          {"cells_failed", failed},
          {"cells", cell_list},
          {"outputs", outputs}};
}

RunManifest run_scan(const ScanSpec& spec) {
  check_spec(spec);
  const auto t0 = std::chrono::steady_clock::now();
  std::filesystem::create_directories(spec.output_dir);

  RunManifest manifest;
  manifest.spec = spec;
  manifest.tool_version = std::string(tool_version());
  Writer writer(spec, manifest);

  switch (spec.mode) {
    case ScanMode::decay_map: run_decay(spec, manifest, writer, "decay_map"); break;
    case ScanMode::decay_vs_k: run_decay(spec, manifest, writer, "decay_vs_k"); break;
    case ScanMode::size_map: run_decay(spec, manifest, writer, "size_map"); break;
    case ScanMode::hosvd_analyze: run_hosvd(spec, manifest, writer); break;
    case ScanMode::entropy_map: run_entropy(spec, manifest, writer); break;
    case ScanMode::correlations: run_correlations(spec, manifest, writer); break;
    case ScanMode::driven_map: run_driven_map(spec, manifest, writer); break;
    case ScanMode::driven_spectrum: run_driven_spectrum(spec, manifest, writer); break;
  }

  manifest.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::ofstream out(spec.output_dir / std::string(kManifestName), std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write manifest in " + spec.output_dir.string());
  out << manifest.to_json().dump(2) << '\n';
  return manifest;
}

}  // namespace subrad::scan
