#include "subrad/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include <lapacke.h>

#include "subrad/parallel.hpp"

namespace subrad {

namespace {

Eigen::Index largest_component(const CVector& v) {
  Eigen::Index best = 0;
  double best_abs = -1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double a = std::abs(v(i));
    if (a > best_abs) {
      best_abs = a;
      best = i;
    }
  }
  return best;
}

}  // namespace

std::vector<EigenState> diagonalize_sector(const SectorHamiltonian& h) {
  const int k = h.basis.n_excitations();
  const auto dim = h.matrix.rows();
  std::vector<EigenState> states;
  states.reserve(static_cast<std::size_t>(dim));

  if (k == 0) {
    // Vacuum: H acts as zero.
    states.push_back(EigenState{Complex{0.0, 0.0}, 0.0, CVector::Ones(1), 0});
    return states;
  }

  // Right eigenvectors from LAPACK; several times faster than the Eigen
  // complex Schur path at sector dims of a few hundred.
  CMatrix a = h.matrix;
  CVector values(dim);
  CMatrix vectors(dim, dim);
  const auto n = static_cast<lapack_int>(dim);
  const lapack_int info =
      LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'V', n, reinterpret_cast<lapack_complex_double*>(a.data()), n,
                    reinterpret_cast<lapack_complex_double*>(values.data()), nullptr, 1,
                    reinterpret_cast<lapack_complex_double*>(vectors.data()), n);
  if (info != 0) {
    throw NumericalError("diagonalize_sector: zgeev failed (info " + std::to_string(info) + ") for matrix " +
                         matrix_fingerprint(h.matrix));
  }

  std::vector<Eigen::Index> pivot;
  for (Eigen::Index j = 0; j < dim; ++j) {
    CVector v = vectors.col(j);
    v /= v.norm();
    const Eigen::Index p = largest_component(v);
    v *= std::conj(v(p)) / std::abs(v(p));
    v(p) = Complex{std::abs(v(p)), 0.0};
    const Complex eps = values(j) / static_cast<double>(k);
    states.push_back(EigenState{eps, -eps.imag(), std::move(v), k});
    pivot.push_back(p);
  }

  std::vector<std::size_t> order(states.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (states[a].gamma != states[b].gamma) return states[a].gamma < states[b].gamma;
    if (states[a].epsilon.real() != states[b].epsilon.real()) {
      return states[a].epsilon.real() < states[b].epsilon.real();
    }
    return pivot[a] < pivot[b];
  });
  std::vector<EigenState> sorted;
  sorted.reserve(states.size());
  for (std::size_t i : order) sorted.push_back(std::move(states[i]));
  return sorted;
}

EigenState most_subradiant_state(const ArrayConfig& config, int k) {
  if (k < 1 || k > config.n_atoms()) {
    throw std::domain_error("most_subradiant_state: k must be in [1, N]");
  }
  auto states = diagonalize_sector(build_hamiltonian(config, enumerate_sector(config.n_atoms(), k)));
  return std::move(states.front());
}

double min_decay_rate(const ArrayConfig& config, int k) {
  return most_subradiant_state(config, k).gamma;
}

SumRuleResult fermionic_sum_rule(const ArrayConfig& config, int k) {
  const int n = config.n_atoms();
  if (k < 1 || k > n) throw std::domain_error("fermionic_sum_rule: k must be in [1, N]");
  const auto singles = diagonalize_sector(build_hamiltonian(config, enumerate_sector(n, 1)));
  SumRuleResult out;
  for (int nu = 0; nu < k; ++nu) out.approx += singles[static_cast<std::size_t>(nu)].gamma;
  out.exact = (k == 1) ? singles.front().gamma : min_decay_rate(config, k);
  out.rel_error = (k == 1) ? 0.0 : std::abs(out.approx - out.exact) / out.exact;
  const double total = k * out.exact;
  out.rel_error_total = (k == 1) ? 0.0 : std::abs(out.approx - total) / total;
  out.ansatz_regime = 2 * k <= n;
  return out;
}

bool darkness_bound(int n_atoms, int k) {
  if (n_atoms < 0 || k < 0 || k > n_atoms) {
    throw std::domain_error("darkness_bound: need 0 <= k <= N");
  }
  return binomial(n_atoms, k) > binomial(n_atoms, k - 1);
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::domain_error("loglog_slope: size mismatch");
  if (x.size() < 2) throw std::domain_error("loglog_slope: need at least two points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw std::domain_error("loglog_slope: non-positive value");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) throw std::domain_error("loglog_slope: all abscissae coincide");
  return sxy / sxx;
}

ScalingFit scaling_fit(std::span<const int> n_range, std::span<const double> d_range,
                       const ScalingFitOptions& options) {
  if (n_range.size() < 2 || d_range.size() < 2) {
    throw std::domain_error("scaling_fit: need at least two grid points along each axis");
  }
  std::vector<double> xs, ys;
  for (int n : n_range) {
    xs.push_back(n);
    ys.push_back(min_decay_rate(ArrayConfig::from_period(n, options.d_for_size_fit, options.gamma_1d), 1));
  }
  ScalingFit fit;
  fit.exponent_n = loglog_slope(xs, ys);
  xs.clear();
  ys.clear();
  for (double d : d_range) {
    xs.push_back(d);
    ys.push_back(min_decay_rate(ArrayConfig::from_period(options.n_for_period_fit, d, options.gamma_1d), 1));
  }
  fit.exponent_d = loglog_slope(xs, ys);
  return fit;
}

DecayMap decay_map(std::span<const double> d_values, std::span<const int> k_values,
                   std::span<const int> n_values, double gamma_1d, int workers) {
  DecayMap map;
  for (int n : n_values) {
    for (double d : d_values) {
      for (int k : k_values) {
        if (k >= 1 && k <= n) map.rows.push_back(DecayMapRow{d, k, n, 0.0});
      }
    }
  }
  parallel_for(map.rows.size(), workers, [&](std::size_t i) {
    auto& row = map.rows[i];
    row.min_gamma = min_decay_rate(ArrayConfig::from_period(row.n_atoms, row.d_over_lambda, gamma_1d), row.k);
  });
  return map;
}

ElectronHolePair electron_hole_rates(const ArrayConfig& config, int k) {
  const int n = config.n_atoms();
  if (k < 1 || k >= n) throw std::domain_error("electron_hole_rates: need 1 <= k < N");
  return {min_decay_rate(config, k), min_decay_rate(config, n - k)};
}

}  // namespace subrad
