#pragma once

#include "subrad/lattice.hpp"
#include "subrad/spectrum.hpp"

namespace subrad {

// values(m, n) = <psi| sigma_m^dag sigma_n |psi> for a normalized right
// eigenvector (plain inner product, not the biorthogonal pairing).
struct CorrelationMatrix {
  CMatrix values;
  int n_atoms() const { return static_cast<int>(values.rows()); }
};

CorrelationMatrix correlation_matrix(const EigenState& state, const SectorBasis& basis);

// Dimer order parameter: -2 * mean_j Re<sigma_a^dag sigma_b> over a pair
// partition. The ideal pattern <sigma_{2j-1}^dag sigma_{2j}> = -1/2 scores 1.
struct DimerizationScore {
  double score = 0.0;         // pairs (1,2),(3,4),...
  double offset_score = 0.0;  // pairs (2,3),(4,5),...,(N-2,N-1)
  double best() const { return std::max(score, offset_score); }
};

// Throws std::domain_error for odd N.
DimerizationScore dimerization_score(const CorrelationMatrix& corr);

}  // namespace subrad
