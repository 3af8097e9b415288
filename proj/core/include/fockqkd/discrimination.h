#pragma once

// Linear-independence analysis and unambiguous state discrimination (USD).
//
// All spectral work happens on the span of the ensemble, whose dimension is
// at most the number of states, never on the ambient Fock space.

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "fockqkd/counter_rng.h"
#include "fockqkd/fock.h"

namespace fockqkd {

inline constexpr double kDefaultRankTolerance = 1e-8;
// Relative eigenvalue floor below which an ensemble counts as linearly
// dependent for discrimination. Weak-pulse ensembles at alpha = 0.01 have
// lambda_min / lambda_max ~ 2e-10, so this sits well below the reporting
// tolerance while staying above double-precision noise (~1e-16).
inline constexpr double kDiscriminabilityTolerance = 1e-12;

struct StateEnsemble {
  std::vector<FockVector> states;
  std::vector<double> priors;

  static StateEnsemble uniform(std::vector<FockVector> states);

  std::size_t size() const { return states.size(); }
  // Throws on empty ensembles, mode mismatches, non-unit states or bad priors.
  void validate() const;
};

using GramMatrix = Eigen::MatrixXcd;

GramMatrix gram(const StateEnsemble& ensemble);
GramMatrix gram(const std::vector<FockVector>& states);

// Eigenvalues above tol * (largest eigenvalue).
int numerical_rank(const GramMatrix& g, double tol = kDefaultRankTolerance);

// Dual vectors with <dual_i|psi_j> = delta_ij. Throws NotDiscriminableError
// when the Gram matrix is rank deficient at `tol`.
std::vector<FockVector> reciprocal_states(const StateEnsemble& ensemble,
                                          double tol = kDiscriminabilityTolerance);

struct UsdCertificate {
  double min_conclusive_eigenvalue;    // over all E_i
  double min_inconclusive_eigenvalue;  // of E_? on the span
  double max_cross_talk;               // max_{i != j} <psi_j|E_i|psi_j>
  double completeness_error;           // |sum E_i + E_? - I| on the span
};

// Conclusive elements E_i = q_i |dual_i><dual_i| and the inconclusive
// remainder, represented in an orthonormal basis of the ensemble span.
class UsdPovm {
 public:
  std::size_t size() const { return duals_.size(); }
  std::size_t span_dimension() const { return static_cast<std::size_t>(basis_.size()); }

  // q_i = <psi_i|E_i|psi_i>.
  const std::vector<double>& conclusive_probabilities() const { return q_; }
  const std::vector<FockVector>& reciprocal_states() const { return duals_; }
  const std::vector<FockVector>& span_basis() const { return basis_; }
  const UsdCertificate& certificate() const { return certificate_; }

  // Matrices in span_basis() coordinates.
  Eigen::MatrixXcd conclusive_element(std::size_t i) const;
  Eigen::MatrixXcd inconclusive_element() const;

  // Born probabilities of every conclusive outcome followed by the
  // inconclusive one, for a unit-norm state. Components outside the span
  // land on the inconclusive outcome.
  std::vector<double> outcome_probabilities(const FockVector& state) const;

 private:
  friend UsdPovm build_usd_povm(const StateEnsemble&, const std::vector<double>&);

  std::vector<FockVector> basis_;
  std::vector<FockVector> duals_;
  Eigen::MatrixXcd dual_coords_;  // column i = dual_i in span coordinates
  std::vector<double> q_;
  UsdCertificate certificate_{};
};

// POVM with the conclusive probabilities `q` exactly as given (no
// optimization); the certificate reports whether it is a valid POVM.
UsdPovm build_usd_povm(const StateEnsemble& ensemble, const std::vector<double>& q);

// Equal conclusive probability q for every state, maximal subject to E_? >= 0:
// q = 1 / lambda_max(sum_i |dual_i><dual_i|). The certificate must show
// lambda_min(E_?) within [-1e-10, 1e-6]; otherwise ConsistencyError.
UsdPovm usd_povm_equal(const StateEnsemble& ensemble);

// Largest s such that q_i = s * direction_i keeps E_? positive semidefinite,
// found by bisection on s with an eigenvalue feasibility test. Stops when
// the bracket is narrower than tol * s.
UsdPovm usd_povm_scaled(const StateEnsemble& ensemble, const std::vector<double>& direction,
                        double tol = 1e-8);

// Samples an outcome: the index of the identified state, or nullopt for
// inconclusive. Throws ConsistencyError if the Born probabilities do not sum
// to one within 1e-8.
std::optional<std::size_t> simulate_usd(const UsdPovm& povm, const FockVector& state,
                                        CounterRng& rng);

// Draws an index from a discrete distribution.
std::size_t sample_index(const std::vector<double>& probabilities, CounterRng& rng);

}  // namespace fockqkd
