// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/SVD>

#include "../oracles.hpp"
#include "subrad/driven.hpp"
#include "subrad/observables.hpp"
#include "subrad/scan.hpp"
#include "subrad/spectrum.hpp"
#include "subrad/tensor.hpp"

using namespace subrad;

namespace {

int failures = 0;

void report(int id, bool ok, const std::string& what, const std::string& detail) {
  std::printf("%s criterion %d: %s [%s]\n", ok ? "PASS" : "FAIL", id, what.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::vector<double> linspace(double a, double b, double step) {
  std::vector<double> out;
  const auto n = static_cast<long>(std::floor((b - a) / step + 1e-9));
  for (long i = 0; i <= n; ++i) out.push_back(a + double(i) * step);
  return out;
}

EigenState darkest(int n, double d, int k, SectorBasis& basis) {
  basis = enumerate_sector(n, k);
  return diagonalize_sector(build_hamiltonian(ArrayConfig::from_period(n, d), basis)).front();
}

void scaling_law() {
  std::vector<int> ns;
  for (int n = 6; n <= 16; ++n) ns.push_back(n);
  std::vector<double> ds;
  for (int i = 1; i <= 8; ++i) ds.push_back(0.01 * i);
  const auto fit = scaling_fit(ns, ds);
  const bool ok = std::abs(fit.exponent_n + 3.0) <= 0.3 && std::abs(fit.exponent_d - 2.0) <= 0.2;
  report(1, ok, "min decay rate ~ d^2 / N^3",
         fmt("exponent_N=%.4f", fit.exponent_n) + fmt(" (-3 +- 0.3), exponent_d=%.4f", fit.exponent_d) +
             " (2 +- 0.2)");
}

void sum_rule() {
  const auto cfg = ArrayConfig::from_period(10, 0.05);
  const auto r2 = fermionic_sum_rule(cfg, 2);
  const auto r3 = fermionic_sum_rule(cfg, 3);
  const auto r6 = fermionic_sum_rule(cfg, 6);
  const bool ok = r2.rel_error < 0.25 && r3.rel_error < 0.25 && r6.rel_error > 1.0;
  report(2, ok, "fermionic sum rule, N=10 d=0.05",
         fmt("rel_error k=2 %.3f", r2.rel_error) + fmt(", k=3 %.3f (< 0.25)", r3.rel_error) +
             fmt(", k=6 %.3f (> 1)", r6.rel_error) + fmt("; against total rate k=2 %.3f", r2.rel_error_total) +
             fmt(", k=3 %.3f", r3.rel_error_total) + fmt(", k=6 %.3f", r6.rel_error_total));
}

void half_filling() {
  bool ok = true;
  std::string detail;
  for (int n : {6, 8, 10}) {
    const auto cfg = ArrayConfig::from_period(n, 0.05);
    const double below = min_decay_rate(cfg, n / 2);
    const double above = min_decay_rate(cfg, n / 2 + 1);
    const double ratio = above / below;
    ok = ok && ratio > 10.0 && above > 0.1;
    detail += "N=" + std::to_string(n) + fmt(" ratio %.2f", ratio) + fmt(" gamma %.3f; ", above);
  }
  detail += "need ratio > 10 and gamma > 0.1";
  report(3, ok, "jump of the minimum rate above half filling", detail);
}

void darkness() {
  // Pascal's triangle, independent of the library binomial.
  std::vector<std::vector<unsigned long long>> c(17, std::vector<unsigned long long>(18, 0));
  for (int n = 0; n <= 16; ++n) {
    c[n][0] = 1;
    for (int k = 1; k <= n; ++k) c[n][k] = c[n - 1][k - 1] + (k <= n - 1 ? c[n - 1][k] : 0);
  }
  int checked = 0, wrong = 0;
  for (int n = 1; n <= 16; ++n)
    for (int k = 1; k <= n; ++k) {
      ++checked;
      if (darkness_bound(n, k) != (c[n][k] > c[n][k - 1])) ++wrong;
    }
  report(4, wrong == 0, "darkness bound iff C(N,k) > C(N,k-1), N <= 16",
         std::to_string(checked) + " cases, " + std::to_string(wrong) + " mismatches");
}

void hosvd_exactness() {
  double worst_rec = 0, worst_unit = 0, worst_diag = 0, worst_w = 0, worst_svd = 0;
  int analyzed = 0;
  for (int n = 2; n <= 10; ++n)
    for (double d : {0.01, 0.05, 0.2})
      for (int k = 1; k <= std::min(5, n); ++k) {
        SectorBasis b(1, 0);
        const auto s = darkest(n, d, k, b);
        const auto psi = to_symmetric_tensor(s, b);
        const auto r = hosvd(psi);
        const auto res = hosvd_residuals(psi, r);
        worst_rec = std::max(worst_rec, res.reconstruction);
        worst_unit = std::max(worst_unit, res.unitarity);
        worst_diag = std::max(worst_diag, res.quasi_diagonality);
        worst_w = std::max(worst_w, res.weight_defect);
        if (k == 2) {
          Eigen::JacobiSVD<CMatrix> svd(psi.unfolding());
          worst_svd = std::max(worst_svd, (svd.singularValues() - r.singular_values).cwiseAbs().maxCoeff());
        }
        ++analyzed;
      }
  const bool ok = worst_rec < 1e-10 && worst_unit < 1e-10 && worst_diag < 1e-10 && worst_w < 1e-10 && worst_svd < 1e-10;
  report(5, ok, "HOSVD exactness on " + std::to_string(analyzed) + " eigenstates (N <= 10, k <= 5)",
         fmt("reconstruction %.1e", worst_rec) + fmt(", unitarity %.1e", worst_unit) +
             fmt(", quasi-diagonality %.1e", worst_diag) + fmt(", weight %.1e", worst_w) +
             fmt(", k=2 vs SVD %.1e", worst_svd));
}

void dimer_benchmark() {
  SectorBasis b(1, 0);
  const auto s = darkest(4, 0.01, 2, b);
  const CVector ref = oracle::dimer_state(b);
  const double overlap = std::norm(ref.dot(s.amplitudes));
  const auto r = hosvd(to_symmetric_tensor(s, b));
  const double h = 1.0 / std::sqrt(2.0);
  const bool ok = overlap > 0.95 && std::abs(r.singular_values(0) - h) < 0.05 &&
                  std::abs(r.singular_values(1) - h) < 0.05 && std::abs(r.entropy - std::log(2.0)) < 0.1;
  report(6, ok, "N=4 d=0.01 k=2 dark state is the double dimer",
         fmt("|<dimer|psi>|^2=%.5f", overlap) + fmt(", lambda=(%.4f", r.singular_values(0)) +
             fmt(", %.4f)", r.singular_values(1)) + fmt(", S=%.4f", r.entropy));
}

void dimerization() {
  SectorBasis b(1, 0);
  const auto s = darkest(10, 0.05, 5, b);
  const auto c = correlation_matrix(s, b);
  const auto score = dimerization_score(c);
  const int first = score.offset_score > score.score ? 1 : 0;
  double diag_dev = 0, pair_dev = 0;
  for (int j = 0; j < 10; ++j) diag_dev = std::max(diag_dev, std::abs(c.values(j, j).real() - 0.5));
  for (int j = first; j + 1 < 10; j += 2) pair_dev = std::max(pair_dev, std::abs(c.values(j, j + 1) + 0.5));
  const auto r = hosvd(to_symmetric_tensor(s, b));
  const auto fer = ansatz_overlap(r, Ansatz::fermionic);
  const auto dim = ansatz_overlap(r, Ansatz::dimerized);
  bool wins = fer.size() == dim.size() && !dim.empty();
  double margin = 1.0;
  for (std::size_t a = 0; a < std::min(fer.size(), dim.size()); ++a) {
    wins = wins && dim[a] > fer[a];
    margin = std::min(margin, dim[a] - fer[a]);
  }
  const bool ok = diag_dev < 0.05 && pair_dev < 0.05 && wins;
  report(7, ok, "dimerization at half filling, N=10 k=5 d=0.05",
         fmt("max |n_j - 1/2|=%.4f", diag_dev) + fmt(", max |pair + 1/2|=%.4f", pair_dev) +
             " (registration " + std::to_string(first + 1) + ")" +
             fmt(", min(dimerized - fermionic overlap)=%.4f", margin));
}

void entropy_map() {
  std::vector<double> s;
  for (int k = 1; k <= 5; ++k) {
    SectorBasis b(1, 0);
    s.push_back(hosvd(to_symmetric_tensor(darkest(10, 0.05, k, b), b)).entropy);
  }
  bool monotone = true;
  for (std::size_t i = 1; i < s.size(); ++i) monotone = monotone && s[i] >= s[i - 1];
  const bool ok = monotone && s[0] < 0.1 && s[4] > s[1];
  std::string detail = "S(k=1..5) =";
  for (double v : s) detail += fmt(" %.4f", v);
  report(8, ok, "entropy grows with filling up to N/2, N=10 d=0.05", detail);
}

// Base grid of the power scans plus fine windows around the two darkest
// single-excitation resonances.
struct FigureGrid {
  std::vector<double> points;
  std::vector<double> resonances;
  double fine_step = 0.0005;
};

FigureGrid figure_grid(const ArrayConfig& cfg) {
  FigureGrid g;
  g.resonances = subradiant_resonances(cfg, 2);
  const auto coarse = refined_grid(linspace(-25, 5, 0.1), std::vector<double>{0.0}, 3.0, 0.01);
  g.points = refined_grid(coarse, g.resonances, 0.15, g.fine_step);
  return g;
}

DriveConfig drive_at(double p, std::vector<double> grid) {
  DriveConfig d;
  d.power = p;
  d.detunings = std::move(grid);
  return d;
}

void linear_limit(const FigureGrid& grid, const ScatteringSpectrum& s, const ArrayConfig& cfg) {
  double dr = 0, dt = 0, max_i = 0;
  for (std::size_t i = 0; i < s.detunings.size(); ++i) {
    const auto ref = oracle::chain_scattering(cfg.n_atoms(), cfg.phase(), s.detunings[i]);
    dr = std::max(dr, std::abs(std::abs(s.r[i]) - std::abs(ref.r)));
    dt = std::max(dt, std::abs(std::abs(s.t[i]) - std::abs(ref.t)));
    max_i = std::max(max_i, std::abs(s.incoherent[i]));
  }
  const auto peaks = find_peaks(s.detunings, s.incoherent);
  double worst_shift = 0;
  std::string shifts;
  for (double r : grid.resonances) {
    double best = 1e9;
    for (const auto& p : peaks)
      if (std::abs(p.position - r) < std::abs(best)) best = p.position - r;
    worst_shift = std::max(worst_shift, std::abs(best));
    shifts += fmt(" %.5f", best);
  }
  const bool ok = dr < 1e-4 && dt < 1e-4 && max_i < 1e-6 && worst_shift <= grid.fine_step * (1 + 1e-9);
  report(9, ok, "weak drive P=1e-6, N=4 d=0.05",
         fmt("max ||r|-|r_ref||=%.1e", dr) + fmt(", max ||t|-|t_ref||=%.1e", dt) + fmt(" (< 1e-4); max I=%.2e", max_i) +
             " (< 1e-6); peak minus resonance:" + shifts + fmt(" (within %.4f)", grid.fine_step));
}

void power_broadening(const FigureGrid& grid, const ArrayConfig& cfg) {
  bool monotone = true, occupation_ok = true;
  std::optional<double> last, top;
  std::string detail;
  double max_occ = 0;
  for (double p : {0.01, 0.1, 1.0, 10.0}) {
    const auto s = incoherent_spectrum(cfg, drive_at(p, grid.points));
    max_occ = std::max(max_occ, s.max_occupation);
    occupation_ok = occupation_ok && s.max_occupation <= 0.5 + 1e-6;
    const auto w = s.narrowest_fwhm;
    detail += fmt("P=%g ", p) + (w ? fmt("%.4f; ", *w) : std::string("none; "));
    if (w && last && *w < *last) monotone = false;
    if (w) last = w;
    top = w;
  }
  const bool gone = !top || *top >= 1.0;
  report(10, monotone && gone && occupation_ok, "power broadening, N=4 d=0.05",
         "narrowest FWHM " + detail + fmt("max occupation %.4f", max_occ));
}

std::string read_all(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

void determinism() {
  namespace fs = std::filesystem;
  const std::vector<std::string> configs = {
      "mode: decay-map\narray: {n_atoms: [6, 8], d_over_lambda: {start: 0.02, stop: 0.4, count: 6}}\n",
      "mode: entropy-map\narray: {n_atoms: 8, d_over_lambda: [0.05, 0.2]}\nexcitations: {start: 1, stop: 4}\n",
      "mode: hosvd-analyze\narray: {n_atoms: [4, 8], d_over_lambda: [0.01, 0.05]}\nexcitations: [1, 2, 3]\n",
      "mode: correlations\narray: {n_atoms: 8, d_over_lambda: [0.05, 0.1]}\nexcitations: [2, 4]\n",
      "mode: driven-spectrum\narray: {n_atoms: 3, d_over_lambda: 0.05}\n"
      "drive: {power: [0.01, 1], detuning: {start: -2, stop: 1, step: 0.05}, refine: {half_width: 0.05, step: 0.005}}\n",
      "mode: driven-map\narray: {n_atoms: 2, d_over_lambda: [0.05, 0.1]}\n"
      "drive: {power: [0.1, 1], detuning: {start: -3, stop: 3, step: 0.02}}\n",
  };
  int identical = 0, compared = 0;
  for (std::size_t c = 0; c < configs.size(); ++c) {
    std::vector<std::vector<std::pair<std::string, std::string>>> runs;
    for (int workers : {1, 1, 3}) {
      const auto dir = fs::temp_directory_path() / ("subrad_acceptance_" + std::to_string(c) + "_" +
                                                    std::to_string(runs.size()));
      fs::remove_all(dir);
      auto spec = scan::parse_config(configs[c], "acceptance");
      spec.output_dir = dir;
      spec.workers = workers;
      const auto m = scan::run_scan(spec);
      std::vector<std::pair<std::string, std::string>> files;
      for (const auto& name : m.outputs) files.emplace_back(name, read_all(dir / name));
      runs.push_back(std::move(files));
    }
    for (std::size_t r = 1; r < runs.size(); ++r) {
      ++compared;
      if (runs[r] == runs[0] && !runs[0].empty()) ++identical;
    }
  }
  report(11, identical == compared, "byte-identical data files across repeats and worker counts",
         std::to_string(identical) + "/" + std::to_string(compared) + " comparisons identical over " +
             std::to_string(configs.size()) + " modes");
}

}  // namespace

int main() {
  scaling_law();
  sum_rule();
  half_filling();
  darkness();
  hosvd_exactness();
  dimer_benchmark();
  dimerization();
  entropy_map();
  {
    const auto cfg = ArrayConfig::from_period(4, 0.05);
    const auto grid = figure_grid(cfg);
    const auto weak = incoherent_spectrum(cfg, drive_at(1e-6, grid.points));
    linear_limit(grid, weak, cfg);
    power_broadening(grid, cfg);
  }
  determinism();
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
