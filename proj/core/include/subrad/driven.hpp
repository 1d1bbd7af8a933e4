#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/SparseCore>

#include "subrad/lattice.hpp"

namespace subrad {

// Coherent pump injected from the left end of the waveguide.
//
// The input amplitude is Omega_in = amplitude_scale * gamma_1d * sqrt(P), so
// P is the incident photon flux in units of gamma_1d. Atom j (0-based, at
// x_j = j d) sees Omega_in e^{i phi j} when phase_on_drive is set and
// Omega_in otherwise.
struct DriveConfig {
  double power = 0.0;
  std::vector<double> detunings;  // omega - omega0 in units of gamma_1d
  bool phase_on_drive = true;
  double amplitude_scale = 1.0;

  void validate() const;
  double input_amplitude(const ArrayConfig& config) const;
};

inline constexpr int kMaxDrivenAtoms = 5;

struct DensityMatrix {
  int n_atoms = 0;
  CMatrix rho;              // 2^N x 2^N, bit j of the index = atom j excited
  double residual = 0.0;    // max |L(rho)| before hermitization
  double min_eigenvalue = 0.0;
};

// Gamma_nm = 2 gamma_1d cos(phi (m - n)).
RMatrix collective_decay_matrix(const ArrayConfig& config);

// Master equation in the frame rotating at the drive frequency:
//   d rho/dt = -i (H_eff rho - rho H_eff^dag) + sum_nm Gamma_nm sigma_m rho sigma_n^dag,
//   H_eff = -delta sum sigma^dag sigma + H_drive + sum_nm (-i gamma_1d e^{i phi|m-n|}) sigma_n^dag sigma_m.
// The Hermitian part of the last term is the sin(phi|m-n|) exchange and the
// anti-Hermitian part is the collective decay Gamma_nm / 2.
class SteadyStateSolver {
 public:
  SteadyStateSolver(const ArrayConfig& config, const DriveConfig& drive);

  // Thread-safe; each call factorizes its own matrix.
  DensityMatrix solve(double detuning) const;

  int dim() const { return dim_; }
  // Generator at a given detuning, vec(rho) column-major.
  Eigen::SparseMatrix<Complex> generator(double detuning) const;

 private:
  int n_atoms_;
  int dim_;
  Eigen::SparseMatrix<Complex> base_;       // generator at zero detuning
  Eigen::SparseMatrix<Complex> detuning_;   // d L / d delta (diagonal)
  Eigen::SparseMatrix<Complex> trace_row_;  // row 0 holds the trace functional
};

DensityMatrix steady_state(const ArrayConfig& config, const DriveConfig& drive, double detuning);

std::vector<double> occupations(const DensityMatrix& rho);
Complex lowering_expectation(const DensityMatrix& rho, int site);

struct CoherentAmplitudes {
  Complex r;
  Complex t;
};

// r = -(i gamma/Omega_in) sum_j e^{+i phi j} <sigma_j>,
// t = 1 - (i gamma/Omega_in) sum_j e^{-i phi j} <sigma_j>.
// With Omega_in = 0 the single-photon (coupled-dipole) response is returned.
CoherentAmplitudes coherent_amplitudes(const ArrayConfig& config, const DriveConfig& drive,
                                       const DensityMatrix& rho, double detuning);

// Linear (weak-drive) response from the coupled-dipole equations
// (delta - G) sigma = Omega.
CoherentAmplitudes linear_response(const ArrayConfig& config, const DriveConfig& drive, double detuning);

struct ScatteringSpectrum {
  std::vector<double> detunings;
  std::vector<Complex> r;
  std::vector<Complex> t;
  std::vector<double> incoherent;  // 1 - |r|^2 - |t|^2
  std::optional<double> narrowest_fwhm;
  double max_occupation = 0.0;
};

ScatteringSpectrum incoherent_spectrum(const ArrayConfig& config, const DriveConfig& drive, int workers = 1);

struct Peak {
  double position = 0.0;
  double height = 0.0;
  double fwhm = 0.0;
};

// Strict local maxima above noise_floor whose half-height crossings exist on
// both sides; FWHM from linear interpolation of those crossings.
std::vector<Peak> find_peaks(std::span<const double> x, std::span<const double> y, double noise_floor = 1e-9);

// The grid must resolve the narrowest feature with a few points per FWHM.
std::optional<double> narrowest_linewidth(const ScatteringSpectrum& spectrum);

// Sorted union of `base` and uniform windows of +-half_width around each
// centre. Points closer than 1e-12 are merged.
std::vector<double> refined_grid(std::span<const double> base, std::span<const double> centers,
                                 double half_width, double step);

// Re(epsilon) of the `count` most subradiant single-excitation states.
std::vector<double> subradiant_resonances(const ArrayConfig& config, int count);

}  // namespace subrad
