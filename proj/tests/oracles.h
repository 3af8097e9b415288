#pragma once

// Independent reference computations used only by the tests. Nothing here
// calls into the discrimination or attack code paths it is used to check.

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <random>
#include <utility>
#include <vector>

#include "fockqkd/fock.h"

namespace fockqkd::oracle {

// Random state on `modes` modes with total photons <= max_photons. Roughly
// half of the admissible patterns are populated.
inline FockVector random_state(std::mt19937_64& gen, std::size_t modes, int max_photons,
                               bool normalized = true) {
  std::normal_distribution<double> gauss;
  std::bernoulli_distribution keep(0.5);
  FockVector v(modes, max_photons);
  for (const auto& p : enumerate_patterns(modes, max_photons)) {
    if (keep(gen)) v.add(p, {gauss(gen), gauss(gen)});
  }
  if (v.empty()) v.add(OccupationPattern(std::vector<int>(modes, 0)), 1.0);
  if (!normalized) return v;
  return normalize(v).state;
}

using DensityMatrix = std::map<std::pair<OccupationPattern, OccupationPattern>, Complex>;

inline void add_projector(DensityMatrix& rho, const FockVector& v, double weight) {
  for (const auto& [p, a] : v.terms()) {
    for (const auto& [q, b] : v.terms()) rho[{p, q}] += weight * a * std::conj(b);
  }
}

inline double max_difference(const DensityMatrix& a, const DensityMatrix& b) {
  double m = 0.0;
  for (const auto& [k, x] : a) {
    auto it = b.find(k);
    m = std::max(m, std::abs(x - (it == b.end() ? Complex{} : it->second)));
  }
  for (const auto& [k, y] : b) {
    if (!a.count(k)) m = std::max(m, std::abs(y));
  }
  return m;
}

// Determinant by Gaussian elimination with partial pivoting.
inline Complex determinant(std::vector<std::vector<Complex>> m) {
  const std::size_t n = m.size();
  Complex det = 1.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t pivot = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(m[r][c]) > std::abs(m[pivot][c])) pivot = r;
    }
    if (m[pivot][c] == Complex{}) return 0.0;
    if (pivot != c) {
      std::swap(m[pivot], m[c]);
      det = -det;
    }
    det *= m[c][c];
    for (std::size_t r = c + 1; r < n; ++r) {
      const Complex f = m[r][c] / m[c][c];
      for (std::size_t k = c; k < n; ++k) m[r][k] -= f * m[c][k];
    }
  }
  return det;
}

// Largest k such that some k x k principal minor of the Gram matrix of
// `states` exceeds `threshold` in magnitude. For a PSD matrix the rank is
// witnessed by a principal minor.
inline int rank_by_minors(const std::vector<FockVector>& states, double threshold) {
  const std::size_t n = states.size();
  std::vector<std::vector<Complex>> g(n, std::vector<Complex>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) g[i][j] = inner_product(states[i], states[j]);
  }
  int best = 0;
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) idx.push_back(i);
    }
    std::vector<std::vector<Complex>> sub(idx.size(), std::vector<Complex>(idx.size()));
    for (std::size_t a = 0; a < idx.size(); ++a) {
      for (std::size_t b = 0; b < idx.size(); ++b) sub[a][b] = g[idx[a]][idx[b]];
    }
    if (std::abs(determinant(sub)) > threshold) best = std::max(best, static_cast<int>(idx.size()));
  }
  return best;
}

// Brute-force search for the best equal-probability unambiguous measurement
// of two unit states. In the two-dimensional span, unambiguity forces
// E_0 = a |phi_0><phi_0| with phi_0 orthogonal to psi_1 and
// E_1 = b |phi_1><phi_1| with phi_1 orthogonal to psi_0. The grid over
// (a, b) in [0, 1]^2 is scanned at 1e-2, then refined at `resolution` in a
// window around the coarse optimum; a point is admissible when
// I - E_0 - E_1 is positive semidefinite.
inline double two_state_usd_grid(const FockVector& psi0, const FockVector& psi1,
                                 double resolution = 1e-4) {
  const Complex s = inner_product(psi0, psi1);
  const FockVector residual = psi1 - s * psi0;
  const double r = residual.norm();
  // Coordinates: psi0 = (1, 0), psi1 = (s, r).
  const Complex phi0[2] = {r, -std::conj(s)};  // orthogonal to psi1, unit norm
  const Complex phi1[2] = {0.0, 1.0};           // orthogonal to psi0

  auto admissible = [&](double a, double b) {
    Complex m[2][2];
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        m[i][j] = (i == j ? 1.0 : 0.0) - a * phi0[i] * std::conj(phi0[j]) -
                  b * phi1[i] * std::conj(phi1[j]);
      }
    }
    const double tr = (m[0][0] + m[1][1]).real();
    const double det = (m[0][0] * m[1][1] - m[0][1] * m[1][0]).real();
    return tr >= -1e-12 && det >= -1e-12;
  };
  // p_i = <psi_i|E_i|psi_i>
  const double p_unit0 = std::norm(std::conj(phi0[0]) * 1.0);
  const double p_unit1 = std::norm(std::conj(phi1[1]) * r);

  auto scan = [&](double a_lo, double a_hi, double b_lo, double b_hi, double step, double& best_a,
                  double& best_b) {
    double best = -1.0;
    const int na = static_cast<int>(std::round((a_hi - a_lo) / step));
    const int nb = static_cast<int>(std::round((b_hi - b_lo) / step));
    for (int i = 0; i <= na; ++i) {
      const double a = a_lo + i * step;
      for (int j = 0; j <= nb; ++j) {
        const double b = b_lo + j * step;
        if (!admissible(a, b)) continue;
        const double q = std::min(a * p_unit0, b * p_unit1);
        if (q > best) {
          best = q;
          best_a = a;
          best_b = b;
        }
      }
    }
    return best;
  };

  double a = 0.0;
  double b = 0.0;
  scan(0.0, 1.0, 0.0, 1.0, 1e-2, a, b);
  const double w = 2e-2;
  return scan(std::max(0.0, a - w), std::min(1.0, a + w), std::max(0.0, b - w),
              std::min(1.0, b + w), resolution, a, b);
}

}  // namespace fockqkd::oracle
