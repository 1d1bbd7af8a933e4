#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "subrad/types.hpp"

namespace subrad {

// A chain of N identical two-level atoms coupled to a 1D waveguide with
// period d. All energies and rates are measured in units of gamma_1d.
class ArrayConfig {
 public:
  // phase = 2*pi*d/lambda0, reduced to [0, 2*pi).
  static ArrayConfig from_period(int n_atoms, double d_over_lambda, double gamma_1d = 1.0);
  static ArrayConfig from_phase(int n_atoms, double phase, double gamma_1d = 1.0);

  int n_atoms() const { return n_atoms_; }
  double phase() const { return phase_; }
  double d_over_lambda() const { return d_over_lambda_; }
  double gamma_1d() const { return gamma_1d_; }
  // Intensity decay rate of a single atom into the waveguide, 2*gamma_1d.
  double big_gamma_1d() const { return 2.0 * gamma_1d_; }

  ArrayConfig with_atoms(int n_atoms) const;

 private:
  ArrayConfig(int n_atoms, double phase, double d_over_lambda, double gamma_1d);

  int n_atoms_;
  double phase_;
  double d_over_lambda_;
  double gamma_1d_;
};

using SiteMask = std::uint32_t;
inline constexpr int kMaxAtoms = 24;

// Binomial coefficient C(n, k); zero outside 0 <= k <= n.
std::uint64_t binomial(int n, int k);

// All k-subsets of N sites, lexicographically ordered by their sorted site
// lists. Sites are 0-based internally; bit s of a mask marks site s excited.
class SectorBasis {
 public:
  SectorBasis(int n_atoms, int n_excitations);

  int n_atoms() const { return n_atoms_; }
  int n_excitations() const { return k_; }
  std::size_t dim() const { return states_.size(); }

  SiteMask state(std::size_t index) const { return states_[index]; }
  std::span<const SiteMask> states() const { return states_; }
  std::vector<int> sites(std::size_t index) const;

  // Lexicographic rank of a k-subset mask. Throws std::domain_error if the
  // mask does not belong to this sector.
  std::size_t index_of(SiteMask mask) const;

 private:
  int n_atoms_;
  int k_;
  std::vector<SiteMask> states_;
};

SectorBasis enumerate_sector(int n_atoms, int k);

// Restriction of H = -i gamma_1d sum_{n,m} sigma_n^dag sigma_m e^{i phi |m-n|}
// to one excitation sector. Complex symmetric, not Hermitian.
struct SectorHamiltonian {
  SectorBasis basis;
  CMatrix matrix;
};

SectorHamiltonian build_hamiltonian(const ArrayConfig& config, const SectorBasis& basis);

// Single-excitation kernel G_{nm} = -i gamma_1d e^{i phi |m-n|}.
CMatrix coupling_kernel(const ArrayConfig& config);

inline int popcount(SiteMask m) { return __builtin_popcount(m); }

}  // namespace subrad
