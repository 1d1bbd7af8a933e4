#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "subrad/lattice.hpp"
#include "subrad/spectrum.hpp"

namespace subrad {

// Order-k tensor with every mode of extent N, stored row-major
// (the last index varies fastest).
class DenseTensor {
 public:
  DenseTensor(int order, int extent);

  int order() const { return order_; }
  int extent() const { return extent_; }
  std::size_t size() const { return data_.size(); }

  Complex& operator[](std::size_t flat) { return data_[flat]; }
  const Complex& operator[](std::size_t flat) const { return data_[flat]; }
  Complex& at(std::span<const int> index) { return data_[flatten(index)]; }
  const Complex& at(std::span<const int> index) const { return data_[flatten(index)]; }

  std::size_t flatten(std::span<const int> index) const;
  std::vector<int> unflatten(std::size_t flat) const;

  double frobenius_norm() const;

  // Mode-m product: T'_{..a..} = sum_n A(a, n) T_{..n..}.
  DenseTensor mode_product(int mode, const CMatrix& a) const;

  std::span<const Complex> data() const { return data_; }

 private:
  int order_;
  int extent_;
  std::vector<Complex> data_;
};

// Largest tensors we are willing to materialize as N^k dense storage.
inline constexpr int kMaxMaterializedOrder = 5;
inline constexpr int kMaxMaterializedExtent = 12;
bool can_materialize(int n_atoms, int k);

// psi_{n1..nk} of a k-excitation state: each subset amplitude is spread
// evenly over its k! index orderings and the whole tensor has unit
// Frobenius norm. Entries with a repeated index are zero.
class SymmetricWavefunction {
 public:
  SymmetricWavefunction(SectorBasis basis, CVector subset_amplitudes);

  int n_atoms() const { return basis_.n_atoms(); }
  int k() const { return basis_.n_excitations(); }
  const SectorBasis& basis() const { return basis_; }
  const CVector& subset_amplitudes() const { return amplitudes_; }

  Complex entry(std::span<const int> index) const;

  // Gram matrix M M^dag of the mode-1 unfolding M (N x N^{k-1}), built from
  // the subset amplitudes without forming M. Equal for every mode.
  CMatrix unfolding_gram() const;

  // Throws std::domain_error beyond the materialization limits.
  DenseTensor materialize() const;
  CMatrix unfolding() const;

 private:
  SectorBasis basis_;
  CVector amplitudes_;
  double entry_scale_;
};

SymmetricWavefunction to_symmetric_tensor(const EigenState& state, const SectorBasis& basis);

struct HosvdResult {
  int k = 0;
  CMatrix factor;                   // N x N unitary, column alpha is U^alpha
  std::optional<DenseTensor> core;  // absent beyond materialization limits
  RVector singular_values;          // lambda_alpha, descending
  double entropy = 0.0;
};

// Symmetric higher-order SVD psi = Lambda x_1 U x_2 U ... x_k U.
// Within an exactly degenerate block of singular values the columns are
// replaced by a pivoted-QR basis of the block projector; every column is
// phase-fixed so its largest component is real positive.
HosvdResult hosvd(const SymmetricWavefunction& psi);

// S = -sum lambda^2 ln lambda^2 (natural log, 0 ln 0 = 0).
double entanglement_entropy(const HosvdResult& result);
double entanglement_entropy(std::span<const double> lambda);

struct HosvdResiduals {
  double reconstruction = 0.0;     // ||Lambda x U - psi||_F
  double unitarity = 0.0;          // max |U^dag U - 1|
  double quasi_diagonality = 0.0;  // max off-diagonal of the mode-1 core Gram
  double weight_defect = 0.0;      // |sum lambda^2 - 1|
};
HosvdResiduals hosvd_residuals(const SymmetricWavefunction& psi, const HosvdResult& result);

enum class Ansatz { fermionic, dimerized };

// Normalized analytic single-particle profiles, one per column.
// fermionic: (-1)^n sin(pi alpha n / N), alpha = 1..N-1.
// dimerized: U_{2j-1} = -U_{2j} ~ cos(2 pi j alpha / N), alpha = 0..N/2
// (even N only).
RMatrix ansatz_family(int n_atoms, Ansatz ansatz);

struct OverlapOptions {
  int dominant = -1;              // size of the dominant block; -1 means k
  double degeneracy_rtol = 0.05;  // adjacent lambdas closer than this share a block
};

// Squared overlaps of the dominant HOSVD columns with the ansatz family.
// Near-degenerate groups of columns are rotated inside their span to best
// match a set of family members (principal angles); isolated columns are
// matched one-to-one. Family members are not reused across groups.
std::vector<double> ansatz_overlap(const HosvdResult& result, Ansatz ansatz,
                                   const OverlapOptions& options = {});

// Re-expresses a k-excitation state as N-k holes in the fully inverted
// array: subset S maps to its complement with sign (-1)^{#(s in S, c in C: s > c)},
// i.e. the parity of sorting the concatenation (S, complement). Applying it
// twice returns the state times (-1)^{k(N-k)}. The energy fields are carried
// over unchanged.
std::pair<EigenState, SectorBasis> hole_transform(const EigenState& state, const SectorBasis& basis);

}  // namespace subrad
