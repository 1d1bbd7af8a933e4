#include "subrad/tensor.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

namespace subrad {

namespace {

std::size_t int_pow(int base, int exp) {
  std::size_t r = 1;
  for (int i = 0; i < exp; ++i) r *= static_cast<std::size_t>(base);
  return r;
}

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

void fix_phase(CMatrix& u, Eigen::Index col) {
  Eigen::Index best = 0;
  double best_abs = -1.0;
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    const double a = std::abs(u(i, col));
    if (a > best_abs + 1e-12) {
      best_abs = a;
      best = i;
    }
  }
  if (best_abs <= 0.0) return;
  u.col(col) *= std::conj(u(best, col)) / best_abs;
  u(best, col) = Complex{u(best, col).real(), 0.0};
}

}  // namespace

DenseTensor::DenseTensor(int order, int extent) : order_(order), extent_(extent) {
  if (order < 0 || extent < 1) throw std::domain_error("DenseTensor: bad shape");
  data_.assign(int_pow(extent, order), Complex{0.0, 0.0});
}

std::size_t DenseTensor::flatten(std::span<const int> index) const {
  if (static_cast<int>(index.size()) != order_) throw std::domain_error("DenseTensor: index rank mismatch");
  std::size_t flat = 0;
  for (int i : index) {
    if (i < 0 || i >= extent_) throw std::out_of_range("DenseTensor: index out of range");
    flat = flat * static_cast<std::size_t>(extent_) + static_cast<std::size_t>(i);
  }
  return flat;
}

std::vector<int> DenseTensor::unflatten(std::size_t flat) const {
  std::vector<int> index(static_cast<std::size_t>(order_));
  for (int m = order_ - 1; m >= 0; --m) {
    index[static_cast<std::size_t>(m)] = static_cast<int>(flat % static_cast<std::size_t>(extent_));
    flat /= static_cast<std::size_t>(extent_);
  }
  return index;
}

double DenseTensor::frobenius_norm() const {
  double s = 0.0;
  for (const Complex& z : data_) s += std::norm(z);
  return std::sqrt(s);
}

DenseTensor DenseTensor::mode_product(int mode, const CMatrix& a) const {
  if (mode < 0 || mode >= order_) throw std::domain_error("mode_product: bad mode");
  if (a.rows() != extent_ || a.cols() != extent_) throw std::domain_error("mode_product: matrix must be N x N");
  DenseTensor out(order_, extent_);
  const std::size_t n = static_cast<std::size_t>(extent_);
  const std::size_t inner = int_pow(extent_, order_ - 1 - mode);
  const std::size_t outer = int_pow(extent_, mode);
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t row = 0; row < n; ++row) {
      Complex* dst = &out.data_[(o * n + row) * inner];
      for (std::size_t col = 0; col < n; ++col) {
        const Complex coef = a(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
        if (coef == Complex{0.0, 0.0}) continue;
        const Complex* src = &data_[(o * n + col) * inner];
        for (std::size_t i = 0; i < inner; ++i) dst[i] += coef * src[i];
      }
    }
  }
  return out;
}

bool can_materialize(int n_atoms, int k) {
  return k <= kMaxMaterializedOrder && n_atoms <= kMaxMaterializedExtent;
}

SymmetricWavefunction::SymmetricWavefunction(SectorBasis basis, CVector subset_amplitudes)
    : basis_(std::move(basis)), amplitudes_(std::move(subset_amplitudes)) {
  if (static_cast<std::size_t>(amplitudes_.size()) != basis_.dim()) {
    throw std::domain_error("SymmetricWavefunction: amplitude count does not match basis dimension");
  }
  const double norm = amplitudes_.norm();
  if (!(norm > 0.0)) throw std::domain_error("SymmetricWavefunction: zero state");
  amplitudes_ /= norm;
  entry_scale_ = 1.0 / std::sqrt(factorial(basis_.n_excitations()));
}

Complex SymmetricWavefunction::entry(std::span<const int> index) const {
  if (static_cast<int>(index.size()) != k()) throw std::domain_error("entry: index rank mismatch");
  SiteMask mask = 0;
  for (int i : index) {
    if (i < 0 || i >= n_atoms()) throw std::out_of_range("entry: site out of range");
    const SiteMask bit = SiteMask{1} << i;
    if (mask & bit) return Complex{0.0, 0.0};
    mask |= bit;
  }
  return amplitudes_(static_cast<Eigen::Index>(basis_.index_of(mask))) * entry_scale_;
}

CMatrix SymmetricWavefunction::unfolding_gram() const {
  const int n = n_atoms();
  const int k = this->k();
  CMatrix gram = CMatrix::Zero(n, n);
  if (k == 0) return gram;
  for (std::size_t idx = 0; idx < basis_.dim(); ++idx) {
    const SiteMask s = basis_.state(idx);
    const Complex a = amplitudes_(static_cast<Eigen::Index>(idx));
    if (a == Complex{0.0, 0.0}) continue;
    for (SiteMask occ = s; occ != 0; occ &= occ - 1) {
      const int site = std::countr_zero(occ);
      const SiteMask rest = s & ~(SiteMask{1} << site);
      for (int other = 0; other < n; ++other) {
        if (rest & (SiteMask{1} << other)) continue;
        const SiteMask partner = rest | (SiteMask{1} << other);
        gram(site, other) += a * std::conj(amplitudes_(static_cast<Eigen::Index>(basis_.index_of(partner))));
      }
    }
  }
  return gram / static_cast<double>(k);
}

DenseTensor SymmetricWavefunction::materialize() const {
  if (!can_materialize(n_atoms(), k())) {
    throw std::domain_error("SymmetricWavefunction: N^k tensor too large to materialize");
  }
  DenseTensor t(k(), n_atoms());
  for (std::size_t idx = 0; idx < basis_.dim(); ++idx) {
    std::vector<int> perm = basis_.sites(idx);
    const Complex value = amplitudes_(static_cast<Eigen::Index>(idx)) * entry_scale_;
    do {
      t.at(perm) = value;
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
  return t;
}

CMatrix SymmetricWavefunction::unfolding() const {
  const DenseTensor t = materialize();
  const auto rows = static_cast<Eigen::Index>(n_atoms());
  const auto cols = static_cast<Eigen::Index>(int_pow(n_atoms(), k() - 1));
  CMatrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = t[static_cast<std::size_t>(r * cols + c)];
  }
  return m;
}

SymmetricWavefunction to_symmetric_tensor(const EigenState& state, const SectorBasis& basis) {
  if (state.k != basis.n_excitations()) {
    throw std::domain_error("to_symmetric_tensor: state and basis disagree on k");
  }
  return SymmetricWavefunction(basis, state.amplitudes);
}

HosvdResult hosvd(const SymmetricWavefunction& psi) {
  const int n = psi.n_atoms();
  const int k = psi.k();
  if (k < 1) throw std::domain_error("hosvd: need at least one excitation");

  Eigen::SelfAdjointEigenSolver<CMatrix> eig(psi.unfolding_gram());
  if (eig.info() != Eigen::Success) {
    throw NumericalError("hosvd: Gram eigensolver failed for " + matrix_fingerprint(psi.unfolding_gram()));
  }
  // Descending order.
  const RVector weights = eig.eigenvalues().reverse();
  CMatrix u = eig.eigenvectors().rowwise().reverse();

  constexpr double kDegenerateTol = 1e-10;
  for (int begin = 0; begin < n;) {
    int end = begin + 1;
    while (end < n && std::abs(weights(end - 1) - weights(end)) <= kDegenerateTol) ++end;
    const int m = end - begin;
    if (m > 1) {
      const CMatrix block = u.middleCols(begin, m);
      const CMatrix projector = block * block.adjoint();
      Eigen::ColPivHouseholderQR<CMatrix> qr(projector);
      const CMatrix q = qr.householderQ() * CMatrix::Identity(n, m);
      u.middleCols(begin, m) = q;
    }
    begin = end;
  }
  for (int c = 0; c < n; ++c) fix_phase(u, c);

  HosvdResult result;
  result.k = k;
  result.factor = u;
  result.singular_values.resize(n);
  if (can_materialize(n, k)) {
    DenseTensor core = psi.materialize();
    const CMatrix u_dag = u.adjoint();
    for (int mode = 0; mode < k; ++mode) core = core.mode_product(mode, u_dag);
    const std::size_t slab = core.size() / static_cast<std::size_t>(n);
    for (int a = 0; a < n; ++a) {
      double s = 0.0;
      for (std::size_t i = 0; i < slab; ++i) s += std::norm(core[static_cast<std::size_t>(a) * slab + i]);
      result.singular_values(a) = std::sqrt(s);
    }
    result.core = std::move(core);
  } else {
    for (int a = 0; a < n; ++a) result.singular_values(a) = std::sqrt(std::max(weights(a), 0.0));
  }
  result.entropy = entanglement_entropy(result);
  return result;
}

double entanglement_entropy(std::span<const double> lambda) {
  double s = 0.0;
  for (double l : lambda) {
    const double w = l * l;
    if (w > 0.0) s -= w * std::log(w);
  }
  return std::max(s, 0.0);
}

double entanglement_entropy(const HosvdResult& result) {
  return entanglement_entropy(
      std::span<const double>(result.singular_values.data(), static_cast<std::size_t>(result.singular_values.size())));
}

HosvdResiduals hosvd_residuals(const SymmetricWavefunction& psi, const HosvdResult& result) {
  HosvdResiduals r;
  const auto n = result.factor.rows();
  r.unitarity = (result.factor.adjoint() * result.factor - CMatrix::Identity(n, n)).cwiseAbs().maxCoeff();
  r.weight_defect = std::abs(result.singular_values.squaredNorm() - 1.0);
  if (!result.core) {
    throw std::domain_error("hosvd_residuals: core tensor was not materialized");
  }
  const DenseTensor& core = *result.core;
  DenseTensor rebuilt = core;
  for (int mode = 0; mode < core.order(); ++mode) rebuilt = rebuilt.mode_product(mode, result.factor);
  const DenseTensor original = psi.materialize();
  double err = 0.0;
  for (std::size_t i = 0; i < original.size(); ++i) err += std::norm(rebuilt[i] - original[i]);
  r.reconstruction = std::sqrt(err);

  const std::size_t slab = core.size() / static_cast<std::size_t>(n);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < n; ++b) {
      if (a == b) continue;
      Complex s{0.0, 0.0};
      for (std::size_t i = 0; i < slab; ++i) {
        s += std::conj(core[static_cast<std::size_t>(a) * slab + i]) * core[static_cast<std::size_t>(b) * slab + i];
      }
      r.quasi_diagonality = std::max(r.quasi_diagonality, std::abs(s));
    }
  }
  return r;
}

RMatrix ansatz_family(int n_atoms, Ansatz ansatz) {
  if (n_atoms < 2) throw std::domain_error("ansatz_family: need at least two atoms");
  std::vector<RVector> cols;
  if (ansatz == Ansatz::fermionic) {
    for (int alpha = 1; alpha < n_atoms; ++alpha) {
      RVector f(n_atoms);
      for (int site = 1; site <= n_atoms; ++site) {
        f(site - 1) = ((site % 2 == 0) ? 1.0 : -1.0) * std::sin(kPi * alpha * site / n_atoms);
      }
      cols.push_back(f);
    }
  } else {
    if (n_atoms % 2 != 0) throw std::domain_error("ansatz_family: dimerized profiles need an even number of atoms");
    for (int alpha = 0; alpha <= n_atoms / 2; ++alpha) {
      RVector f(n_atoms);
      for (int pair = 1; pair <= n_atoms / 2; ++pair) {
        const double c = std::cos(2.0 * kPi * pair * alpha / n_atoms);
        f(2 * pair - 2) = c;
        f(2 * pair - 1) = -c;
      }
      cols.push_back(f);
    }
  }
  RMatrix family(n_atoms, static_cast<Eigen::Index>(cols.size()));
  Eigen::Index out = 0;
  for (const RVector& f : cols) {
    const double norm = f.norm();
    if (norm < 1e-12) continue;
    family.col(out++) = f / norm;
  }
  return family.leftCols(out);
}

namespace {

// Squared principal cosines between span(cols) and span(members), descending.
std::vector<double> principal_overlaps(const CMatrix& cols, const CMatrix& members) {
  Eigen::JacobiSVD<CMatrix> basis_svd(members, Eigen::ComputeThinU);
  Eigen::Index rank = 0;
  const auto& sv = basis_svd.singularValues();
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > 1e-10 * sv(0)) ++rank;
  }
  std::vector<double> out(static_cast<std::size_t>(cols.cols()), 0.0);
  if (rank == 0) return out;
  const CMatrix q = basis_svd.matrixU().leftCols(rank);
  Eigen::JacobiSVD<CMatrix> cos_svd(cols.adjoint() * q);
  for (Eigen::Index i = 0; i < cos_svd.singularValues().size() && i < cols.cols(); ++i) {
    const double c = std::min(cos_svd.singularValues()(i), 1.0);
    out[static_cast<std::size_t>(i)] = c * c;
  }
  return out;
}

// Calls fn on every m-subset of `pool` (as index vectors into pool).
template <typename Fn>
void for_each_subset(const std::vector<int>& pool, int m, Fn&& fn) {
  const int p = static_cast<int>(pool.size());
  if (m > p) return;
  std::vector<int> c(static_cast<std::size_t>(m));
  std::iota(c.begin(), c.end(), 0);
  std::vector<int> chosen(static_cast<std::size_t>(m));
  while (true) {
    for (int i = 0; i < m; ++i) chosen[static_cast<std::size_t>(i)] = pool[static_cast<std::size_t>(c[static_cast<std::size_t>(i)])];
    fn(chosen);
    int i = m - 1;
    while (i >= 0 && c[static_cast<std::size_t>(i)] == p - m + i) --i;
    if (i < 0) return;
    ++c[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < m; ++j) c[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j - 1)] + 1;
  }
}

}  // namespace

std::vector<double> ansatz_overlap(const HosvdResult& result, Ansatz ansatz, const OverlapOptions& options) {
  const auto n = static_cast<int>(result.factor.rows());
  const CMatrix family = ansatz_family(n, ansatz).cast<Complex>();
  const int dominant = std::clamp(options.dominant < 0 ? result.k : options.dominant, 0, n);

  std::vector<int> unused(static_cast<std::size_t>(family.cols()));
  std::iota(unused.begin(), unused.end(), 0);
  std::vector<double> overlaps;
  overlaps.reserve(static_cast<std::size_t>(dominant));

  for (int begin = 0; begin < dominant;) {
    int end = begin + 1;
    while (end < dominant) {
      const double hi = result.singular_values(end - 1);
      const double lo = result.singular_values(end);
      if (hi - lo > options.degeneracy_rtol * hi) break;
      ++end;
    }
    const int m = end - begin;
    const CMatrix cols = result.factor.middleCols(begin, m);

    double best_score = -1.0;
    std::vector<double> best_overlaps(static_cast<std::size_t>(m), 0.0);
    std::vector<int> best_members;
    const int take = std::min<int>(m, static_cast<int>(unused.size()));
    if (take > 0) {
      for_each_subset(unused, take, [&](const std::vector<int>& members) {
        CMatrix chosen(n, take);
        for (int i = 0; i < take; ++i) chosen.col(i) = family.col(members[static_cast<std::size_t>(i)]);
        const std::vector<double> ov = principal_overlaps(cols, chosen);
        const double score = std::accumulate(ov.begin(), ov.end(), 0.0);
        if (score > best_score + 1e-14) {
          best_score = score;
          best_overlaps = ov;
          best_members = members;
        }
      });
    }
    for (int member : best_members) std::erase(unused, member);
    overlaps.insert(overlaps.end(), best_overlaps.begin(), best_overlaps.end());
    begin = end;
  }
  return overlaps;
}

std::pair<EigenState, SectorBasis> hole_transform(const EigenState& state, const SectorBasis& basis) {
  if (state.k != basis.n_excitations() || static_cast<std::size_t>(state.amplitudes.size()) != basis.dim()) {
    throw std::domain_error("hole_transform: state does not match basis");
  }
  const int n = basis.n_atoms();
  const SiteMask full = (n == 32) ? ~SiteMask{0} : ((SiteMask{1} << n) - 1);
  SectorBasis holes(n, n - basis.n_excitations());
  EigenState out = state;
  out.k = holes.n_excitations();
  out.amplitudes = CVector::Zero(static_cast<Eigen::Index>(holes.dim()));
  for (std::size_t idx = 0; idx < basis.dim(); ++idx) {
    const SiteMask s = basis.state(idx);
    const SiteMask c = full & ~s;
    int inversions = 0;
    for (SiteMask occ = s; occ != 0; occ &= occ - 1) {
      const int site = std::countr_zero(occ);
      inversions += popcount(c & ((SiteMask{1} << site) - 1));
    }
    const double sign = (inversions % 2 == 0) ? 1.0 : -1.0;
    out.amplitudes(static_cast<Eigen::Index>(holes.index_of(c))) = sign * state.amplitudes(static_cast<Eigen::Index>(idx));
  }
  return {std::move(out), std::move(holes)};
}

}  // namespace subrad
