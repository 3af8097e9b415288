#include "fockqkd/fock.h"

#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "fockqkd/errors.h"
#include "oracles.h"

using namespace fockqkd;

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;
constexpr double kPi = std::numbers::pi;

FockVector ket(std::initializer_list<int> counts) { return FockVector::basis_state(counts); }

double distance(const FockVector& a, const FockVector& b) { return (a - b).norm(); }

}  // namespace

TEST(fock, pattern_rejects_negative_counts) {
  EXPECT_THROW(OccupationPattern({1, -1}), ParameterError);
  EXPECT_EQ(OccupationPattern({1, 0, 2}).to_string(), "1,0,2");
  EXPECT_EQ(OccupationPattern({1, 0, 2}).total(), 3);
}

TEST(fock, add_enforces_truncation_and_modes) {
  FockVector v(2, 2);
  EXPECT_THROW(v.add({2, 1}, 1.0), TruncationError);
  EXPECT_THROW(v.add({1, 0, 0}, 1.0), DimensionError);
  EXPECT_THROW(v.add({1, 0}, Complex(NAN, 0.0)), ParameterError);
  v.add({1, 0}, 1.0).add({1, 0}, -1.0 + 1e-16);
  EXPECT_TRUE(v.empty());
}

TEST(fock, inner_product_basics) {
  EXPECT_EQ(inner_product(ket({1, 0}), ket({1, 0})), Complex(1.0));
  EXPECT_EQ(inner_product(ket({1, 0}), ket({0, 1})), Complex(0.0));

  FockVector zero_x(2);
  zero_x.add({1, 0}, 1 / kSqrt2).add({0, 1}, 1 / kSqrt2);
  FockVector one_x(2);
  one_x.add({1, 0}, 1 / kSqrt2).add({0, 1}, -1 / kSqrt2);
  EXPECT_NEAR(std::abs(inner_product(zero_x, one_x)), 0.0, 1e-16);

  EXPECT_THROW(inner_product(ket({1, 0}), ket({1, 0, 0})), DimensionError);
}

TEST(fock, inner_product_conjugate_symmetric_and_positive) {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 50; ++trial) {
    const auto u = oracle::random_state(gen, 3, 4, false);
    const auto v = oracle::random_state(gen, 3, 4, false);
    const Complex uv = inner_product(u, v);
    const Complex vu = inner_product(v, u);
    EXPECT_NEAR(std::abs(uv - std::conj(vu)), 0.0, 1e-12);
    EXPECT_GT(inner_product(u, u).real(), 0.0);
    EXPECT_NEAR(inner_product(u, u).imag(), 0.0, 1e-15);
  }
}

TEST(fock, normalize_returns_weight_and_phase_convention) {
  const double chi = 0.2;
  FockVector v(2);
  v.add({1, 0}, chi / 2);
  auto [unit, weight] = normalize(v);
  EXPECT_NEAR(weight, 0.01, 1e-15);
  EXPECT_EQ(unit.amplitude({1, 0}), Complex(1.0));

  FockVector w(2);
  w.add({1, 0}, 1.0).add({0, 1}, 1.0);
  auto n = normalize(w);
  EXPECT_NEAR(n.squared_norm, 2.0, 1e-15);
  EXPECT_NEAR(n.state.amplitude({1, 0}).real(), 1 / kSqrt2, 1e-15);
  EXPECT_NEAR(n.state.amplitude({0, 1}).real(), 1 / kSqrt2, 1e-15);

  // First pattern in order is (0,1); its amplitude becomes real positive.
  FockVector p(2);
  p.add({0, 1}, Complex(0.0, -2.0)).add({1, 0}, 1.0);
  const auto phased = normalize(p).state;
  EXPECT_NEAR(phased.amplitude({0, 1}).imag(), 0.0, 1e-15);
  EXPECT_GT(phased.amplitude({0, 1}).real(), 0.0);

  EXPECT_THROW(normalize(FockVector(2)), NearZeroVectorError);
}

TEST(fock, tensor_composes_modes) {
  const auto t = tensor(ket({0, 1}), ket({1, 0}));
  EXPECT_EQ(t.mode_count(), 4u);
  EXPECT_EQ(t.amplitude({0, 1, 1, 0}), Complex(1.0));
  EXPECT_EQ(t.size(), 1u);

  const auto vac = tensor(FockVector::vacuum(2), FockVector::vacuum(2));
  EXPECT_EQ(vac.amplitude({0, 0, 0, 0}), Complex(1.0));

  EXPECT_THROW(tensor(ket({2, 0}), ket({0, 2}), 3), TruncationError);
}

TEST(fock, tensor_norm_multiplies) {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 40; ++trial) {
    const auto u = oracle::random_state(gen, 2, 3, false);
    const auto v = oracle::random_state(gen, 2, 3, false);
    // Direct expansion: |u (x) v|^2 = sum_{p,q} |u_p|^2 |v_q|^2.
    double expected = 0.0;
    for (const auto& [p, a] : u.terms()) {
      for (const auto& [q, b] : v.terms()) expected += std::norm(a) * std::norm(b);
    }
    EXPECT_NEAR(tensor(u, v, 6).squared_norm(), expected, 1e-12 * expected);
    EXPECT_NEAR(tensor(u, v, 6).norm(), u.norm() * v.norm(), 1e-12 * u.norm() * v.norm());
  }
}

TEST(fock, rotate_single_photon_to_diagonal) {
  const auto r = rotate_modes(ket({1, 0}), 0, 1, kPi / 4);
  FockVector expected(2);
  expected.add({1, 0}, 1 / kSqrt2).add({0, 1}, 1 / kSqrt2);
  EXPECT_LT(distance(r, expected), 1e-15);
}

TEST(fock, rotate_by_zero_is_identity) {
  std::mt19937_64 gen(3);
  const auto v = oracle::random_state(gen, 3, 5);
  EXPECT_LT(distance(rotate_modes(v, 0, 2, 0.0), v), 1e-15);
}

TEST(fock, rotate_two_photons) {
  const auto r = rotate_modes(ket({2, 0}), 0, 1, kPi / 4);
  FockVector expected(2);
  expected.add({2, 0}, 0.5).add({1, 1}, 1 / kSqrt2).add({0, 2}, 0.5);
  EXPECT_LT(distance(r, expected), 1e-15);
}

TEST(fock, rotate_rejects_bad_modes) {
  EXPECT_THROW(rotate_modes(ket({1, 0}), 0, 0, 0.1), DimensionError);
  EXPECT_THROW(rotate_modes(ket({1, 0}), 0, 2, 0.1), DimensionError);
}

TEST(fock, rotation_is_unitary_and_invertible) {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  for (int trial = 0; trial < 100; ++trial) {
    const auto v = oracle::random_state(gen, 3, 6);
    const double theta = angle(gen);
    const auto r = rotate_modes(v, 0, 2, theta);
    EXPECT_NEAR(r.norm(), 1.0, 1e-12);
    EXPECT_LT(distance(rotate_modes(r, 0, 2, -theta), v), 1e-12);
  }
}

TEST(fock, projection_of_ideal_singlet) {
  FockVector singlet(4);
  singlet.add({0, 1, 1, 0}, 1 / kSqrt2).add({1, 0, 0, 1}, -1 / kSqrt2);
  const std::size_t alice[] = {0, 1};
  const int h_click[] = {0, 1};
  const auto w = project_counts(singlet, alice, h_click);
  EXPECT_NEAR(w.weight, 0.5, 1e-15);
  EXPECT_LT(distance(w.state, ket({1, 0})), 1e-15);

  const int v_click[] = {1, 0};
  const auto none = project_counts(ket({0, 1, 1, 0}), alice, v_click);
  EXPECT_EQ(none.weight, 0.0);
  EXPECT_TRUE(none.is_null());
}

TEST(fock, projection_errors) {
  const std::size_t dup[] = {0, 0};
  const int counts[] = {0, 1};
  EXPECT_THROW(project_counts(ket({0, 1, 1, 0}), dup, counts), DimensionError);
  const std::size_t bad[] = {0, 7};
  EXPECT_THROW(project_counts(ket({0, 1, 1, 0}), bad, counts), DimensionError);
}

TEST(fock, projection_is_complete) {
  std::mt19937_64 gen(23);
  for (int trial = 0; trial < 100; ++trial) {
    const auto v = oracle::random_state(gen, 4, 6);
    const std::size_t modes[] = {static_cast<std::size_t>(trial % 4),
                                 static_cast<std::size_t>((trial + 1) % 4)};
    double total = 0.0;
    for (const auto& target : enumerate_patterns(2, 6)) {
      total += project_counts(v, modes, target.counts()).weight;
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(fock, loss_on_single_photon) {
  const double t = 0.3;
  const auto branches = apply_loss(ket({1, 0}), 0, t);
  ASSERT_EQ(branches.size(), 2u);
  EXPECT_NEAR(branches[0].weight, t, 1e-15);
  EXPECT_LT(distance(branches[0].state, ket({1, 0})), 1e-15);
  EXPECT_NEAR(branches[1].weight, 1 - t, 1e-15);
  EXPECT_LT(distance(branches[1].state, ket({0, 0})), 1e-15);
}

TEST(fock, loss_with_full_transmission_is_identity) {
  std::mt19937_64 gen(29);
  const auto v = oracle::random_state(gen, 2, 6);
  auto branches = apply_loss(v, 1, 1.0);
  ASSERT_EQ(branches.size(), 1u);
  EXPECT_EQ(branches[0].weight, 1.0);
  EXPECT_LT(distance(branches[0].state, v), 1e-15);
  branches = apply_loss(branches[0].state, 0, 1.0);
  EXPECT_LT(distance(branches[0].state, v), 1e-15);

  EXPECT_THROW(apply_loss(v, 0, 1.5), ParameterError);
  EXPECT_THROW(apply_loss(v, 0, -0.1), ParameterError);
}

TEST(fock, loss_conserves_probability_and_scales_mean) {
  std::mt19937_64 gen(31);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const auto v = oracle::random_state(gen, 2, 6);
    const double t = unit(gen);
    const auto branches = apply_loss(v, 0, t);
    double total = 0.0;
    double mean_after = 0.0;
    for (const auto& b : branches) {
      total += b.weight;
      for (const auto& [p, a] : b.state.terms()) mean_after += b.weight * p[0] * std::norm(a);
    }
    double mean_before = 0.0;
    for (const auto& [p, a] : v.terms()) mean_before += p[0] * std::norm(a);
    EXPECT_NEAR(total, 1.0, 1e-12);
    EXPECT_NEAR(mean_after, t * mean_before, 1e-10);
  }
}

TEST(fock, loss_composes_multiplicatively) {
  std::mt19937_64 gen(37);
  std::uniform_real_distribution<double> unit(0.05, 0.95);
  for (int trial = 0; trial < 20; ++trial) {
    const auto v = oracle::random_state(gen, 2, 5);
    const double t1 = unit(gen);
    const double t2 = unit(gen);
    oracle::DensityMatrix twice;
    for (const auto& b1 : apply_loss(v, 0, t1)) {
      for (const auto& b2 : apply_loss(b1.state, 0, t2)) {
        oracle::add_projector(twice, b2.state, b1.weight * b2.weight);
      }
    }
    oracle::DensityMatrix once;
    for (const auto& b : apply_loss(v, 0, t1 * t2)) oracle::add_projector(once, b.state, b.weight);
    EXPECT_LT(oracle::max_difference(twice, once), 1e-12);
  }
}

TEST(fock, dump_format) {
  FockVector v(2);
  v.add({1, 0}, Complex(0.5, -0.25)).add({0, 1}, 1.0);
  EXPECT_EQ(dump(v), "0,1\t1\t0\n1,0\t0.5\t-0.25\n");
}

TEST(fock, photon_number_distribution_and_mean) {
  FockVector v(2);
  v.add({0, 0}, 1.0).add({2, 0}, 1.0).add({1, 1}, Complex(0.0, 1.0)).add({0, 1}, 1.0);
  const auto dist = photon_number_distribution(v);
  EXPECT_NEAR(dist[0], 0.25, 1e-15);
  EXPECT_NEAR(dist[1], 0.25, 1e-15);
  EXPECT_NEAR(dist[2], 0.5, 1e-15);
  EXPECT_NEAR(mean_photon_number(v, 0), (2.0 + 1.0) / 4.0, 1e-15);
}

TEST(fock, enumerate_patterns_counts) {
  // Number of patterns with total <= N on m modes is C(N + m, m).
  EXPECT_EQ(enumerate_patterns(2, 6).size(), 28u);
  EXPECT_EQ(enumerate_patterns(4, 6).size(), 210u);
  const auto p = enumerate_patterns(2, 1);
  ASSERT_EQ(p.size(), 3u);
  EXPECT_EQ(p[0], OccupationPattern({0, 0}));
  EXPECT_EQ(p[2], OccupationPattern({1, 0}));
}
