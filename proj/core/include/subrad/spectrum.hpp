#pragma once

#include <span>
#include <vector>

#include "subrad/lattice.hpp"

namespace subrad {

// Eigenpair of a sector Hamiltonian. The eigenvalue of H is k*epsilon;
// epsilon and gamma are per excitation, so the total decay rate of the
// state is k*gamma.
struct EigenState {
  Complex epsilon;
  double gamma = 0.0;  // -Im(epsilon)
  CVector amplitudes;  // unit 2-norm over the sector basis
  int k = 0;
};

// Full spectrum sorted by ascending gamma, then ascending Re(epsilon), then
// by index of the largest-magnitude amplitude. Each eigenvector is rotated so
// that its largest-magnitude component is real and positive.
std::vector<EigenState> diagonalize_sector(const SectorHamiltonian& h);

// Most subradiant (smallest gamma) eigenstate of sector k.
EigenState most_subradiant_state(const ArrayConfig& config, int k);

double min_decay_rate(const ArrayConfig& config, int k);

// Sum of the k smallest single-excitation rates against the exact sector
// minimum. `rel_error` = |approx - exact| / exact with both quantities as
// defined for the per-excitation rate. `rel_error_total` compares against the
// total decay rate k*exact, which is what the product-state eigenvalue sums to.
struct SumRuleResult {
  double approx = 0.0;
  double exact = 0.0;
  double rel_error = 0.0;
  double rel_error_total = 0.0;
  bool ansatz_regime = true;  // 2k <= N
};

SumRuleResult fermionic_sum_rule(const ArrayConfig& config, int k);

// True iff C(N,k) > C(N,k-1): a k-excitation state has more free amplitudes
// than there are decay channels into the k-1 sector.
bool darkness_bound(int n_atoms, int k);

struct ScalingFitOptions {
  double d_for_size_fit = 0.02;  // fixed period for the fit over N
  int n_for_period_fit = 10;     // fixed array size for the fit over d
  double gamma_1d = 1.0;
};

struct ScalingFit {
  double exponent_n = 0.0;
  double exponent_d = 0.0;
};

// Log-log least-squares slopes of the single-excitation min gamma versus N
// and versus d/lambda0.
ScalingFit scaling_fit(std::span<const int> n_range, std::span<const double> d_range,
                       const ScalingFitOptions& options = {});

// Slope of the least-squares line through (log x, log y).
double loglog_slope(std::span<const double> x, std::span<const double> y);

struct DecayMapRow {
  double d_over_lambda = 0.0;
  int k = 0;
  int n_atoms = 0;
  double min_gamma = 0.0;
};

struct DecayMap {
  std::vector<DecayMapRow> rows;
};

// One row per (d, k, N) cell with k <= N, in (N, d, k) loop order.
DecayMap decay_map(std::span<const double> d_values, std::span<const int> k_values,
                   std::span<const int> n_values, double gamma_1d = 1.0, int workers = 1);

// Exploratory: min gamma of sector k next to that of sector N-k.
struct ElectronHolePair {
  double particles = 0.0;
  double holes = 0.0;
};
ElectronHolePair electron_hole_rates(const ArrayConfig& config, int k);

}  // namespace subrad
