#include "subrad/observables.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

namespace subrad {

CorrelationMatrix correlation_matrix(const EigenState& state, const SectorBasis& basis) {
  if (static_cast<std::size_t>(state.amplitudes.size()) != basis.dim()) {
    throw std::domain_error("correlation_matrix: state does not match basis");
  }
  const int n = basis.n_atoms();
  const double norm2 = state.amplitudes.squaredNorm();
  if (!(norm2 > 0.0)) throw std::domain_error("correlation_matrix: zero state");
  const CVector& psi = state.amplitudes;
  CMatrix c = CMatrix::Zero(n, n);
  for (std::size_t idx = 0; idx < basis.dim(); ++idx) {
    const SiteMask s = basis.state(idx);
    const Complex a = psi(static_cast<Eigen::Index>(idx));
    for (SiteMask occ = s; occ != 0; occ &= occ - 1) {
      const int from = std::countr_zero(occ);
      c(from, from) += std::norm(a);
      // sigma_to^dag sigma_from |S> = |S - from + to>
      for (int to = 0; to < n; ++to) {
        if (s & (SiteMask{1} << to)) continue;
        const SiteMask moved = (s & ~(SiteMask{1} << from)) | (SiteMask{1} << to);
        c(to, from) += std::conj(psi(static_cast<Eigen::Index>(basis.index_of(moved)))) * a;
      }
    }
  }
  return CorrelationMatrix{c / norm2};
}

DimerizationScore dimerization_score(const CorrelationMatrix& corr) {
  const int n = corr.n_atoms();
  if (n < 2 || n % 2 != 0) throw std::domain_error("dimerization_score: needs an even number of atoms");
  DimerizationScore out;
  double sum = 0.0;
  for (int j = 0; j < n / 2; ++j) sum += corr.values(2 * j, 2 * j + 1).real();
  out.score = -2.0 * sum / (n / 2);
  if (n >= 4) {
    sum = 0.0;
    const int pairs = n / 2 - 1;
    for (int j = 0; j < pairs; ++j) sum += corr.values(2 * j + 1, 2 * j + 2).real();
    out.offset_score = -2.0 * sum / pairs;
  } else {
    out.offset_score = -1.0;
  }
  return out;
}

}  // namespace subrad
