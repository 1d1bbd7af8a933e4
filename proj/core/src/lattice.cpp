#include "subrad/lattice.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <sstream>
#include <stdexcept>

namespace subrad {

std::string matrix_fingerprint(const CMatrix& m) {
  std::uint64_t h = 1469598103934665603ULL;
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      const double parts[2] = {m(i, j).real(), m(i, j).imag()};
      unsigned char bytes[sizeof parts];
      std::memcpy(bytes, parts, sizeof parts);
      for (unsigned char b : bytes) {
        h ^= b;
        h *= 1099511628211ULL;
      }
    }
  }
  std::ostringstream os;
  os << m.rows() << "x" << m.cols() << ":" << std::hex << h;
  return os.str();
}

ArrayConfig::ArrayConfig(int n_atoms, double phase, double d_over_lambda, double gamma_1d)
    : n_atoms_(n_atoms), phase_(phase), d_over_lambda_(d_over_lambda), gamma_1d_(gamma_1d) {
  if (n_atoms < 1 || n_atoms > kMaxAtoms) {
    throw std::domain_error("ArrayConfig: n_atoms must be in [1, " + std::to_string(kMaxAtoms) +
                            "], got " + std::to_string(n_atoms));
  }
  if (!(gamma_1d > 0.0) || !std::isfinite(gamma_1d)) {
    throw std::domain_error("ArrayConfig: gamma_1d must be positive and finite");
  }
  if (!std::isfinite(phase)) throw std::domain_error("ArrayConfig: phase must be finite");
}

namespace {
double reduce_phase(double phase) {
  double r = std::fmod(phase, 2.0 * kPi);
  if (r < 0.0) r += 2.0 * kPi;
  return r;
}
}  // namespace

ArrayConfig ArrayConfig::from_period(int n_atoms, double d_over_lambda, double gamma_1d) {
  if (!(d_over_lambda >= 0.0) || !std::isfinite(d_over_lambda)) {
    throw std::domain_error("ArrayConfig: d/lambda0 must be finite and non-negative");
  }
  return ArrayConfig(n_atoms, reduce_phase(2.0 * kPi * d_over_lambda), d_over_lambda, gamma_1d);
}

ArrayConfig ArrayConfig::from_phase(int n_atoms, double phase, double gamma_1d) {
  const double reduced = std::isfinite(phase) ? reduce_phase(phase) : phase;
  return ArrayConfig(n_atoms, reduced, reduced / (2.0 * kPi), gamma_1d);
}

ArrayConfig ArrayConfig::with_atoms(int n_atoms) const {
  return ArrayConfig(n_atoms, phase_, d_over_lambda_, gamma_1d_);
}

std::uint64_t binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t c = 1;
  for (int i = 1; i <= k; ++i) c = c * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
  return c;
}

SectorBasis::SectorBasis(int n_atoms, int n_excitations) : n_atoms_(n_atoms), k_(n_excitations) {
  if (n_atoms < 1 || n_atoms > kMaxAtoms) {
    throw std::domain_error("enumerate_sector: n_atoms out of range: " + std::to_string(n_atoms));
  }
  if (n_excitations < 0 || n_excitations > n_atoms) {
    throw std::domain_error("enumerate_sector: k=" + std::to_string(n_excitations) +
                            " outside [0, " + std::to_string(n_atoms) + "]");
  }
  states_.reserve(binomial(n_atoms, n_excitations));
  // Walk k-combinations in lexicographic order of the sorted site lists.
  std::vector<int> c(static_cast<std::size_t>(k_));
  for (int i = 0; i < k_; ++i) c[static_cast<std::size_t>(i)] = i;
  while (true) {
    SiteMask m = 0;
    for (int s : c) m |= SiteMask{1} << s;
    states_.push_back(m);
    int i = k_ - 1;
    while (i >= 0 && c[static_cast<std::size_t>(i)] == n_atoms_ - k_ + i) --i;
    if (i < 0) break;
    ++c[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < k_; ++j) c[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j - 1)] + 1;
  }
}

std::vector<int> SectorBasis::sites(std::size_t index) const {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(k_));
  for (SiteMask m = states_.at(index); m != 0; m &= m - 1) out.push_back(std::countr_zero(m));
  return out;
}

std::size_t SectorBasis::index_of(SiteMask mask) const {
  if (popcount(mask) != k_ || (n_atoms_ < 32 && (mask >> n_atoms_) != 0)) {
    throw std::domain_error("SectorBasis::index_of: mask not in sector");
  }
  // Count subsets that precede this one lexicographically.
  std::uint64_t rank = 0;
  int prev = -1;
  int slot = 0;
  for (SiteMask m = mask; m != 0; m &= m - 1, ++slot) {
    const int s = std::countr_zero(m);
    for (int j = prev + 1; j < s; ++j) rank += binomial(n_atoms_ - 1 - j, k_ - 1 - slot);
    prev = s;
  }
  return static_cast<std::size_t>(rank);
}

SectorBasis enumerate_sector(int n_atoms, int k) { return SectorBasis(n_atoms, k); }

CMatrix coupling_kernel(const ArrayConfig& config) {
  const int n = config.n_atoms();
  CMatrix g(n, n);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      g(a, b) = -kI * config.gamma_1d() * std::exp(kI * (config.phase() * std::abs(a - b)));
    }
  }
  return g;
}

SectorHamiltonian build_hamiltonian(const ArrayConfig& config, const SectorBasis& basis) {
  if (basis.n_atoms() != config.n_atoms()) {
    throw std::domain_error("build_hamiltonian: basis has " + std::to_string(basis.n_atoms()) +
                            " sites but config has " + std::to_string(config.n_atoms()));
  }
  const CMatrix g = coupling_kernel(config);
  const auto dim = static_cast<Eigen::Index>(basis.dim());
  const int n = config.n_atoms();
  CMatrix h = CMatrix::Zero(dim, dim);
  for (Eigen::Index col = 0; col < dim; ++col) {
    const SiteMask s = basis.state(static_cast<std::size_t>(col));
    h(col, col) = g(0, 0) * static_cast<double>(basis.n_excitations());
    // sigma_to^dag sigma_from: hop an excitation from an occupied site to an empty one.
    for (SiteMask occ = s; occ != 0; occ &= occ - 1) {
      const int from = std::countr_zero(occ);
      for (int to = 0; to < n; ++to) {
        if (s & (SiteMask{1} << to)) continue;
        const SiteMask target = (s & ~(SiteMask{1} << from)) | (SiteMask{1} << to);
        h(static_cast<Eigen::Index>(basis.index_of(target)), col) += g(to, from);
      }
    }
  }
  return SectorHamiltonian{basis, std::move(h)};
}

}  // namespace subrad
