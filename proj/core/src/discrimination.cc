#include "fockqkd/discrimination.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "fockqkd/errors.h"

namespace fockqkd {
namespace {

using Eigen::MatrixXcd;
using Eigen::VectorXd;

struct SpanDecomposition {
  Eigen::MatrixXcd eigenvectors;  // columns of G's eigenvectors kept
  Eigen::VectorXd eigenvalues;    // kept eigenvalues, ascending
  int rank = 0;
};

SpanDecomposition decompose(const GramMatrix& g, double tol) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> solver(g);
  const VectorXd& w = solver.eigenvalues();
  const double top = w.size() ? w.maxCoeff() : 0.0;
  SpanDecomposition out;
  std::vector<Eigen::Index> kept;
  for (Eigen::Index k = 0; k < w.size(); ++k) {
    if (top > 0.0 && w[k] > tol * top) kept.push_back(k);
  }
  out.rank = static_cast<int>(kept.size());
  out.eigenvectors.resize(g.rows(), out.rank);
  out.eigenvalues.resize(out.rank);
  for (int c = 0; c < out.rank; ++c) {
    out.eigenvectors.col(c) = solver.eigenvectors().col(kept[c]);
    out.eigenvalues[c] = w[kept[c]];
  }
  return out;
}

FockVector combine(const std::vector<FockVector>& states, const Eigen::VectorXcd& coeffs) {
  FockVector out(states.front().mode_count(), states.front().max_photons());
  for (std::size_t j = 0; j < states.size(); ++j) {
    const Complex c = coeffs[static_cast<Eigen::Index>(j)];
    if (c == Complex{}) continue;
    out += c * states[j];
  }
  return out;
}

double min_eigenvalue(const MatrixXcd& m) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> solver(m, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

double max_eigenvalue(const MatrixXcd& m) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> solver(m, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().maxCoeff();
}

SpanDecomposition require_full_rank(const StateEnsemble& ensemble, double tol) {
  ensemble.validate();
  SpanDecomposition span = decompose(gram(ensemble), tol);
  const int n = static_cast<int>(ensemble.size());
  if (span.rank < n) {
    throw NotDiscriminableError("not discriminable (rank " + std::to_string(span.rank) + " < " +
                                    std::to_string(n) + ")",
                                span.rank, n);
  }
  return span;
}

}  // namespace

StateEnsemble StateEnsemble::uniform(std::vector<FockVector> states) {
  StateEnsemble e;
  e.priors.assign(states.size(), states.empty() ? 0.0 : 1.0 / static_cast<double>(states.size()));
  e.states = std::move(states);
  return e;
}

void StateEnsemble::validate() const {
  if (states.empty()) throw ParameterError("empty ensemble");
  if (priors.size() != states.size()) throw ParameterError("one prior per state required");
  const std::size_t modes = states.front().mode_count();
  for (const auto& s : states) {
    if (s.mode_count() != modes) throw DimensionError("ensemble states differ in mode count");
    if (std::abs(s.norm() - 1.0) > 1e-12) throw ParameterError("ensemble states must be unit norm");
  }
  double sum = 0.0;
  for (double p : priors) {
    if (!(p >= 0.0)) throw ParameterError("priors must be non-negative");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw ParameterError("priors must sum to one");
}

GramMatrix gram(const std::vector<FockVector>& states) {
  const auto n = static_cast<Eigen::Index>(states.size());
  if (n == 0) throw ParameterError("Gram matrix of an empty ensemble");
  GramMatrix g(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    g(i, i) = inner_product(states[i], states[i]);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      g(i, j) = inner_product(states[i], states[j]);
      g(j, i) = std::conj(g(i, j));
    }
  }
  return g;
}

GramMatrix gram(const StateEnsemble& ensemble) { return gram(ensemble.states); }

int numerical_rank(const GramMatrix& g, double tol) { return decompose(g, tol).rank; }

std::vector<FockVector> reciprocal_states(const StateEnsemble& ensemble, double tol) {
  const SpanDecomposition span = require_full_rank(ensemble, tol);
  // G^-1 = V diag(1/w) V^H; dual_i = sum_j (G^-1)_{ji} psi_j.
  const MatrixXcd& v = span.eigenvectors;
  const MatrixXcd g_inv = v * span.eigenvalues.cwiseInverse().asDiagonal() * v.adjoint();
  std::vector<FockVector> duals;
  for (Eigen::Index i = 0; i < g_inv.cols(); ++i) {
    duals.push_back(combine(ensemble.states, g_inv.col(i)));
  }
  return duals;
}

Eigen::MatrixXcd UsdPovm::conclusive_element(std::size_t i) const {
  const auto col = dual_coords_.col(static_cast<Eigen::Index>(i));
  return q_[i] * col * col.adjoint();
}

Eigen::MatrixXcd UsdPovm::inconclusive_element() const {
  const auto r = static_cast<Eigen::Index>(basis_.size());
  MatrixXcd e = MatrixXcd::Identity(r, r);
  for (std::size_t i = 0; i < q_.size(); ++i) e -= conclusive_element(i);
  return e;
}

std::vector<double> UsdPovm::outcome_probabilities(const FockVector& state) const {
  const auto r = static_cast<Eigen::Index>(basis_.size());
  Eigen::VectorXcd c(r);
  for (Eigen::Index k = 0; k < r; ++k) c[k] = inner_product(basis_[k], state);
  const double total = state.squared_norm();

  std::vector<double> p;
  p.reserve(q_.size() + 1);
  for (std::size_t i = 0; i < q_.size(); ++i) {
    const Complex overlap = dual_coords_.col(static_cast<Eigen::Index>(i)).dot(c);
    p.push_back(q_[i] * std::norm(overlap));
  }
  const Complex in_span = c.dot(inconclusive_element() * c);
  p.push_back(total - c.squaredNorm() + in_span.real());
  return p;
}

UsdPovm build_usd_povm(const StateEnsemble& ensemble, const std::vector<double>& q) {
  const SpanDecomposition span = require_full_rank(ensemble, kDiscriminabilityTolerance);
  if (q.size() != ensemble.size()) throw ParameterError("one conclusive weight per state required");

  UsdPovm povm;
  const MatrixXcd& v = span.eigenvectors;
  const VectorXd& w = span.eigenvalues;
  // Orthonormal span basis e_k = sum_j V_jk psi_j / sqrt(w_k). In it the
  // states have coordinates sqrt(W) V^H and the duals W^{-1/2} V^H.
  for (Eigen::Index k = 0; k < w.size(); ++k) {
    povm.basis_.push_back(combine(ensemble.states, v.col(k) / std::sqrt(w[k])));
  }
  povm.dual_coords_ = w.cwiseSqrt().cwiseInverse().asDiagonal() * v.adjoint();
  const MatrixXcd g_inv = v * w.cwiseInverse().asDiagonal() * v.adjoint();
  for (Eigen::Index i = 0; i < g_inv.cols(); ++i) {
    povm.duals_.push_back(combine(ensemble.states, g_inv.col(i)));
  }
  povm.q_ = q;

  UsdCertificate cert{};
  cert.min_conclusive_eigenvalue = std::numeric_limits<double>::infinity();
  MatrixXcd sum = MatrixXcd::Zero(w.size(), w.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    const MatrixXcd e = povm.conclusive_element(i);
    cert.min_conclusive_eigenvalue = std::min(cert.min_conclusive_eigenvalue, min_eigenvalue(e));
    sum += e;
    for (std::size_t j = 0; j < q.size(); ++j) {
      if (i == j) continue;
      const double talk = q[i] * std::norm(inner_product(povm.duals_[i], ensemble.states[j]));
      cert.max_cross_talk = std::max(cert.max_cross_talk, talk);
    }
  }
  const MatrixXcd inconclusive = povm.inconclusive_element();
  cert.min_inconclusive_eigenvalue = min_eigenvalue(inconclusive);
  cert.completeness_error =
      (sum + inconclusive - MatrixXcd::Identity(w.size(), w.size())).cwiseAbs().maxCoeff();
  povm.certificate_ = cert;
  return povm;
}

UsdPovm usd_povm_equal(const StateEnsemble& ensemble) {
  const SpanDecomposition span = require_full_rank(ensemble, kDiscriminabilityTolerance);
  const MatrixXcd duals = span.eigenvalues.cwiseSqrt().cwiseInverse().asDiagonal() *
                          span.eigenvectors.adjoint();
  const double q = 1.0 / max_eigenvalue(duals * duals.adjoint());

  UsdPovm povm = build_usd_povm(ensemble, std::vector<double>(ensemble.size(), q));
  const UsdCertificate& cert = povm.certificate();
  if (cert.min_inconclusive_eigenvalue < -1e-10 || cert.min_inconclusive_eigenvalue > 1e-6) {
    throw ConsistencyError("inconclusive element not tight at the optimum: lambda_min = " +
                           std::to_string(cert.min_inconclusive_eigenvalue));
  }
  if (cert.max_cross_talk > 1e-10) {
    throw ConsistencyError("conclusive elements are not unambiguous");
  }
  return povm;
}

UsdPovm usd_povm_scaled(const StateEnsemble& ensemble, const std::vector<double>& direction,
                        double tol) {
  if (direction.size() != ensemble.size()) {
    throw ParameterError("one direction component per state required");
  }
  if (std::any_of(direction.begin(), direction.end(), [](double d) { return !(d >= 0.0); }) ||
      std::all_of(direction.begin(), direction.end(), [](double d) { return d == 0.0; })) {
    throw ParameterError("direction must be non-negative and nonzero");
  }
  const SpanDecomposition span = require_full_rank(ensemble, kDiscriminabilityTolerance);
  const MatrixXcd duals = span.eigenvalues.cwiseSqrt().cwiseInverse().asDiagonal() *
                          span.eigenvectors.adjoint();
  const auto r = duals.rows();
  MatrixXcd weighted = MatrixXcd::Zero(r, r);
  double hi = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < direction.size(); ++i) {
    const auto col = duals.col(static_cast<Eigen::Index>(i));
    weighted += direction[i] * col * col.adjoint();
    // <dual_i|E_?|dual_i> >= 0 bounds the scale from above.
    if (direction[i] > 0.0) hi = std::min(hi, 1.0 / (direction[i] * col.squaredNorm()));
  }
  auto feasible = [&](double s) {
    return min_eigenvalue(MatrixXcd::Identity(r, r) - s * weighted) >= 0.0;
  };
  double lo = 0.0;
  if (feasible(hi)) {
    lo = hi;
  } else {
    while (hi - lo > tol * hi) {
      const double mid = 0.5 * (lo + hi);
      (feasible(mid) ? lo : hi) = mid;
    }
  }
  std::vector<double> q(direction.size());
  std::transform(direction.begin(), direction.end(), q.begin(), [&](double d) { return lo * d; });
  return build_usd_povm(ensemble, q);
}

std::size_t sample_index(const std::vector<double>& probabilities, CounterRng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    acc += probabilities[i];
    if (u < acc) return i;
  }
  // Rounding left a sliver above the running sum; give it to the last
  // outcome with positive mass.
  for (std::size_t i = probabilities.size(); i-- > 0;) {
    if (probabilities[i] > 0.0) return i;
  }
  return probabilities.size() - 1;
}

std::optional<std::size_t> simulate_usd(const UsdPovm& povm, const FockVector& state,
                                        CounterRng& rng) {
  std::vector<double> p = povm.outcome_probabilities(state);
  const double sum = std::accumulate(p.begin(), p.end(), 0.0);
  if (std::abs(sum - 1.0) > 1e-8) {
    throw ConsistencyError("USD outcome probabilities sum to " + std::to_string(sum));
  }
  for (double& x : p) x = std::max(x, 0.0);
  const std::size_t k = sample_index(p, rng);
  if (k == povm.size()) return std::nullopt;
  return k;
}

}  // namespace fockqkd
