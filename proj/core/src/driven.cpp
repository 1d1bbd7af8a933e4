#include "subrad/driven.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SparseLU>

#include "subrad/parallel.hpp"
#include "subrad/spectrum.hpp"

namespace subrad {

namespace {

using Triplet = Eigen::Triplet<Complex>;
using SparseC = Eigen::SparseMatrix<Complex>;

constexpr double kResidualLimit = 1e-8;
constexpr double kPsdSlack = 1e-9;

bool has(int state, int site) { return (state >> site) & 1; }

Complex drive_amplitude(const ArrayConfig& config, const DriveConfig& drive, int site) {
  const double omega = drive.input_amplitude(config);
  if (!drive.phase_on_drive) return Complex{omega, 0.0};
  return omega * std::exp(kI * (config.phase() * site));
}

// Dense H_eff on the full 2^N space at zero detuning.
CMatrix effective_hamiltonian(const ArrayConfig& config, const DriveConfig& drive) {
  const int n = config.n_atoms();
  const int dim = 1 << n;
  const CMatrix g = coupling_kernel(config);
  CMatrix h = CMatrix::Zero(dim, dim);
  for (int c = 0; c < dim; ++c) {
    for (int from = 0; from < n; ++from) {
      if (!has(c, from)) continue;
      h(c, c) += g(from, from);
      for (int to = 0; to < n; ++to) {
        if (has(c, to)) continue;
        h(c ^ (1 << from) ^ (1 << to), c) += g(to, from);
      }
    }
    for (int j = 0; j < n; ++j) {
      const Complex w = drive_amplitude(config, drive, j);
      if (has(c, j)) {
        h(c ^ (1 << j), c) += std::conj(w);  // w* sigma_j
      } else {
        h(c | (1 << j), c) += w;  // w sigma_j^dag
      }
    }
  }
  return h;
}

}  // namespace

void DriveConfig::validate() const {
  if (!(power >= 0.0) || !std::isfinite(power)) throw std::domain_error("DriveConfig: power must be >= 0");
  if (!(amplitude_scale > 0.0) || !std::isfinite(amplitude_scale)) {
    throw std::domain_error("DriveConfig: amplitude_scale must be positive");
  }
  for (std::size_t i = 1; i < detunings.size(); ++i) {
    if (!(detunings[i] > detunings[i - 1])) {
      throw std::domain_error("DriveConfig: detuning grid must be strictly increasing");
    }
  }
}

double DriveConfig::input_amplitude(const ArrayConfig& config) const {
  return amplitude_scale * config.gamma_1d() * std::sqrt(power);
}

RMatrix collective_decay_matrix(const ArrayConfig& config) {
  const int n = config.n_atoms();
  RMatrix gamma(n, n);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) gamma(a, b) = 2.0 * config.gamma_1d() * std::cos(config.phase() * (b - a));
  }
  return gamma;
}

SteadyStateSolver::SteadyStateSolver(const ArrayConfig& config, const DriveConfig& drive)
    : n_atoms_(config.n_atoms()), dim_(1 << config.n_atoms()) {
  drive.validate();
  if (n_atoms_ > kMaxDrivenAtoms) {
    throw std::domain_error("steady_state: density-matrix solver supports N <= " + std::to_string(kMaxDrivenAtoms));
  }
  const RMatrix decay = collective_decay_matrix(config);
  const double min_ev = Eigen::SelfAdjointEigenSolver<RMatrix>(decay, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
  if (min_ev < -1e-12 * std::max(1.0, decay.cwiseAbs().maxCoeff())) {
    throw NumericalError("collective decay matrix is not positive semidefinite (min eigenvalue " +
                         std::to_string(min_ev) + ")");
  }

  const int d = dim_;
  const CMatrix h = effective_hamiltonian(config, drive);
  const auto vec = [d](int a, int b) { return a + d * b; };
  std::vector<Triplet> trip;
  trip.reserve(static_cast<std::size_t>(d) * d * (2 * n_atoms_ * n_atoms_ + 8));
  for (int a = 0; a < d; ++a) {
    for (int c = 0; c < d; ++c) {
      if (h(a, c) == Complex{0.0, 0.0}) continue;
      // -i H rho  and  +i rho H^dag
      for (int b = 0; b < d; ++b) trip.emplace_back(vec(a, b), vec(c, b), -kI * h(a, c));
      for (int b = 0; b < d; ++b) trip.emplace_back(vec(b, a), vec(b, c), kI * std::conj(h(a, c)));
    }
  }
  for (int c = 0; c < d; ++c) {
    for (int e = 0; e < d; ++e) {
      for (int m = 0; m < n_atoms_; ++m) {
        if (!has(c, m)) continue;
        for (int n = 0; n < n_atoms_; ++n) {
          if (!has(e, n)) continue;
          // Gamma_nm sigma_m rho sigma_n^dag moves |c><e| to |c-m><e-n|.
          trip.emplace_back(vec(c ^ (1 << m), e ^ (1 << n)), vec(c, e), Complex{decay(n, m), 0.0});
        }
      }
    }
  }
  for (int i = 0; i < d * d; ++i) trip.emplace_back(i, i, Complex{0.0, 0.0});
  base_.resize(d * d, d * d);
  base_.setFromTriplets(trip.begin(), trip.end());

  std::vector<Triplet> diag;
  for (int a = 0; a < d; ++a) {
    for (int b = 0; b < d; ++b) {
      const int na = std::popcount(static_cast<unsigned>(a));
      const int nb = std::popcount(static_cast<unsigned>(b));
      diag.emplace_back(vec(a, b), vec(a, b), kI * static_cast<double>(na - nb));
    }
  }
  detuning_.resize(d * d, d * d);
  detuning_.setFromTriplets(diag.begin(), diag.end());

  std::vector<Triplet> tr;
  for (int a = 0; a < d; ++a) tr.emplace_back(0, vec(a, a), Complex{1.0, 0.0});
  trace_row_.resize(d * d, d * d);
  trace_row_.setFromTriplets(tr.begin(), tr.end());
}

Eigen::SparseMatrix<Complex> SteadyStateSolver::generator(double detuning) const {
  return SparseC(base_ + detuning * detuning_);
}

DensityMatrix SteadyStateSolver::solve(double detuning) const {
  const int d = dim_;
  const SparseC gen = generator(detuning);
  // Adding the trace functional to row 0 keeps the system regular exactly
  // when the steady state is unique: trace(L x) = 0 for every x.
  SparseC a = gen + trace_row_;
  a.makeCompressed();
  Eigen::SparseLU<SparseC> lu;
  lu.compute(a);
  CVector rhs = CVector::Zero(d * d);
  rhs(0) = 1.0;
  CVector x;
  if (lu.info() == Eigen::Success) x = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !x.allFinite()) {
    Eigen::FullPivLU<CMatrix> dense{CMatrix(gen)};
    throw NumericalError("steady_state: generator kernel has dimension " +
                         std::to_string(dense.dimensionOfKernel()) + " at detuning " + std::to_string(detuning));
  }

  DensityMatrix out;
  out.n_atoms = n_atoms_;
  out.residual = (gen * x).cwiseAbs().maxCoeff();
  if (out.residual > kResidualLimit) {
    // One step of iterative refinement before giving up.
    x += lu.solve(rhs - a * x);
    out.residual = (gen * x).cwiseAbs().maxCoeff();
  }
  if (out.residual > kResidualLimit) {
    throw NumericalError("steady_state: residual " + std::to_string(out.residual) + " at detuning " +
                         std::to_string(detuning));
  }
  CMatrix rho = Eigen::Map<const CMatrix>(x.data(), d, d);
  rho = 0.5 * (rho + rho.adjoint()).eval();
  rho /= rho.trace().real();
  out.min_eigenvalue = Eigen::SelfAdjointEigenSolver<CMatrix>(rho, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
  if (out.min_eigenvalue < -kPsdSlack) {
    throw NumericalError("steady_state: density matrix not positive semidefinite (min eigenvalue " +
                         std::to_string(out.min_eigenvalue) + ")");
  }
  out.rho = std::move(rho);
  return out;
}

DensityMatrix steady_state(const ArrayConfig& config, const DriveConfig& drive, double detuning) {
  return SteadyStateSolver(config, drive).solve(detuning);
}

std::vector<double> occupations(const DensityMatrix& rho) {
  std::vector<double> occ(static_cast<std::size_t>(rho.n_atoms), 0.0);
  for (Eigen::Index a = 0; a < rho.rho.rows(); ++a) {
    for (int j = 0; j < rho.n_atoms; ++j) {
      if (has(static_cast<int>(a), j)) occ[static_cast<std::size_t>(j)] += rho.rho(a, a).real();
    }
  }
  return occ;
}

Complex lowering_expectation(const DensityMatrix& rho, int site) {
  // Tr(rho sigma_j) = sum_{b with j} rho(b, b - j)
  Complex s{0.0, 0.0};
  for (Eigen::Index b = 0; b < rho.rho.rows(); ++b) {
    if (has(static_cast<int>(b), site)) s += rho.rho(b, b ^ (Eigen::Index{1} << site));
  }
  return s;
}

namespace {

CoherentAmplitudes amplitudes_from_dipoles(const ArrayConfig& config, std::span<const Complex> sigma, double omega) {
  const double g = config.gamma_1d();
  Complex back{0.0, 0.0}, fwd{0.0, 0.0};
  for (std::size_t j = 0; j < sigma.size(); ++j) {
    const double phase = config.phase() * static_cast<double>(j);
    back += std::exp(kI * phase) * sigma[j];
    fwd += std::exp(-kI * phase) * sigma[j];
  }
  return {-kI * g / omega * back, 1.0 - kI * g / omega * fwd};
}

}  // namespace

CoherentAmplitudes linear_response(const ArrayConfig& config, const DriveConfig& drive, double detuning) {
  const int n = config.n_atoms();
  DriveConfig unit = drive;
  unit.power = 1.0;
  unit.amplitude_scale = 1.0 / config.gamma_1d();  // Omega_in = 1
  CVector omega(n);
  for (int j = 0; j < n; ++j) omega(j) = drive_amplitude(config, unit, j);
  const CMatrix system = detuning * CMatrix::Identity(n, n) - coupling_kernel(config);
  const CVector sigma = system.fullPivLu().solve(omega);
  return amplitudes_from_dipoles(config, std::span<const Complex>(sigma.data(), static_cast<std::size_t>(n)), 1.0);
}

CoherentAmplitudes coherent_amplitudes(const ArrayConfig& config, const DriveConfig& drive,
                                       const DensityMatrix& rho, double detuning) {
  const double omega = drive.input_amplitude(config);
  if (omega == 0.0) return linear_response(config, drive, detuning);
  std::vector<Complex> sigma(static_cast<std::size_t>(config.n_atoms()));
  for (int j = 0; j < config.n_atoms(); ++j) sigma[static_cast<std::size_t>(j)] = lowering_expectation(rho, j);
  return amplitudes_from_dipoles(config, sigma, omega);
}

ScatteringSpectrum incoherent_spectrum(const ArrayConfig& config, const DriveConfig& drive, int workers) {
  const SteadyStateSolver solver(config, drive);
  ScatteringSpectrum out;
  const std::size_t count = drive.detunings.size();
  out.detunings = drive.detunings;
  out.r.resize(count);
  out.t.resize(count);
  out.incoherent.resize(count);
  std::vector<double> max_occ(count, 0.0);
  parallel_for(count, workers, [&](std::size_t i) {
    const double delta = drive.detunings[i];
    const DensityMatrix rho = solver.solve(delta);
    const CoherentAmplitudes amp = coherent_amplitudes(config, drive, rho, delta);
    out.r[i] = amp.r;
    out.t[i] = amp.t;
    out.incoherent[i] = 1.0 - std::norm(amp.r) - std::norm(amp.t);
    const auto occ = occupations(rho);
    max_occ[i] = *std::max_element(occ.begin(), occ.end());
  });
  if (!max_occ.empty()) out.max_occupation = *std::max_element(max_occ.begin(), max_occ.end());
  out.narrowest_fwhm = narrowest_linewidth(out);
  return out;
}

std::vector<Peak> find_peaks(std::span<const double> x, std::span<const double> y, double noise_floor) {
  if (x.size() != y.size()) throw std::domain_error("find_peaks: size mismatch");
  std::vector<Peak> peaks;
  const std::size_t n = y.size();
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(y[i] > y[i - 1] && y[i] > y[i + 1] && y[i] > noise_floor)) continue;
    const double half = 0.5 * y[i];
    std::size_t lo = i;
    while (lo > 0 && y[lo] > half) --lo;
    std::size_t hi = i;
    while (hi + 1 < n && y[hi] > half) ++hi;
    if (y[lo] > half || y[hi] > half) continue;
    const double left = x[lo] + (half - y[lo]) * (x[lo + 1] - x[lo]) / (y[lo + 1] - y[lo]);
    const double right = x[hi - 1] + (half - y[hi - 1]) * (x[hi] - x[hi - 1]) / (y[hi] - y[hi - 1]);
    peaks.push_back(Peak{x[i], y[i], right - left});
  }
  return peaks;
}

std::optional<double> narrowest_linewidth(const ScatteringSpectrum& spectrum) {
  const auto peaks = find_peaks(spectrum.detunings, spectrum.incoherent);
  if (peaks.empty()) return std::nullopt;
  return std::min_element(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) { return a.fwhm < b.fwhm; })
      ->fwhm;
}

std::vector<double> refined_grid(std::span<const double> base, std::span<const double> centers, double half_width,
                                 double step) {
  if (!(step > 0.0) || !(half_width >= 0.0)) throw std::domain_error("refined_grid: need step > 0, half_width >= 0");
  std::vector<double> pts(base.begin(), base.end());
  for (double c : centers) {
    const auto count = static_cast<long>(std::floor(2.0 * half_width / step + 1e-9));
    for (long i = 0; i <= count; ++i) pts.push_back(c - half_width + static_cast<double>(i) * step);
  }
  std::sort(pts.begin(), pts.end());
  std::vector<double> out;
  for (double p : pts) {
    if (out.empty() || p - out.back() > 1e-12) out.push_back(p);
  }
  return out;
}

std::vector<double> subradiant_resonances(const ArrayConfig& config, int count) {
  const auto states = diagonalize_sector(build_hamiltonian(config, enumerate_sector(config.n_atoms(), 1)));
  std::vector<double> out;
  for (int i = 0; i < count && i < static_cast<int>(states.size()); ++i) {
    out.push_back(states[static_cast<std::size_t>(i)].epsilon.real());
  }
  return out;
}

}  // namespace subrad
