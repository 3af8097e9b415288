#include "fockqkd/sources.h"

#include <cmath>
#include <numbers>

#include "fockqkd/errors.h"

namespace fockqkd {
namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;
constexpr double kPi = std::numbers::pi;

void check_bit(int bit) {
  if (bit != 0 && bit != 1) throw ParameterError("bit must be 0 or 1");
}

double binomial_probability(int n, int k, double p) {
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c * std::pow(p, k) * std::pow(1.0 - p, n - k);
}

// Single-mode pulse amplitudes c_n for n = 0..max.
std::vector<double> pulse_amplitudes(const SourceParams& params) {
  const double a = params.amplitude;
  std::vector<double> c;
  if (params.exact_coherent) {
    double term = std::exp(-a * a / 2.0);
    for (int n = 0; n <= params.max_photons; ++n) {
      c.push_back(term);
      term *= a / std::sqrt(static_cast<double>(n + 1));
    }
    return c;
  }
  c = {1.0 - a * a / 2.0, a};
  if (params.order == 2) c.push_back(a * a / kSqrt2);
  return c;
}

}  // namespace

std::string to_string(SourceKind kind) {
  switch (kind) {
    case SourceKind::kWcp: return "wcp";
    case SourceKind::kPdc: return "pdc";
    case SourceKind::kSinglePhoton: return "single";
  }
  return "?";
}

std::string to_string(Basis basis) { return basis == Basis::kRectilinear ? "+" : "x"; }

SourceKind parse_source_kind(const std::string& name) {
  if (name == "wcp") return SourceKind::kWcp;
  if (name == "pdc") return SourceKind::kPdc;
  if (name == "single") return SourceKind::kSinglePhoton;
  throw ParameterError("unknown source kind '" + name + "'");
}

void SourceParams::validate() const {
  if (kind != SourceKind::kSinglePhoton && !(amplitude > 0.0 && amplitude < 1.0)) {
    throw ParameterError("source amplitude must lie in (0, 1)");
  }
  if (order != 1 && order != 2) throw ParameterError("expansion order must be 1 or 2");
  if (!(eta_alice > 0.0 && eta_alice <= 1.0)) {
    throw ParameterError("Alice detector efficiency must lie in (0, 1]");
  }
  const int needed = kind == SourceKind::kPdc ? 4 : (exact_coherent ? 0 : order);
  if (max_photons < needed || max_photons < 1) {
    throw ParameterError("truncation too small for the requested source");
  }
}

double measurement_angle(Basis basis) { return basis == Basis::kRectilinear ? 0.0 : -kPi / 4.0; }

FockVector ideal_bb84_ket(Basis basis, int bit, int max_photons) {
  check_bit(bit);
  FockVector v(2, max_photons);
  if (basis == Basis::kRectilinear) {
    v.add(bit == 0 ? OccupationPattern{1, 0} : OccupationPattern{0, 1}, 1.0);
  } else {
    v.add({1, 0}, 1.0 / kSqrt2);
    v.add({0, 1}, (bit == 0 ? 1.0 : -1.0) / kSqrt2);
  }
  return v;
}

ModifiedQubit single_photon_state(Basis basis, int bit, int max_photons) {
  FockVector ket = ideal_bb84_ket(basis, bit, max_photons);
  return {basis, bit, ket, ket, 1.0};
}

ModifiedQubit wcp_state(const SourceParams& params, Basis basis, int bit) {
  if (params.kind != SourceKind::kWcp) throw ParameterError("wcp_state needs a WCP source");
  params.validate();
  check_bit(bit);

  const std::vector<double> c = pulse_amplitudes(params);
  // Rectilinear pulses live in a single polarization mode; diagonal ones are
  // the vertical pulse rotated by +-pi/4.
  const std::size_t mode = (basis == Basis::kRectilinear && bit == 1) ? 1 : 0;
  FockVector pulse(2, params.max_photons);
  for (std::size_t n = 0; n < c.size(); ++n) {
    std::vector<int> counts(2, 0);
    counts[mode] = static_cast<int>(n);
    pulse.add(OccupationPattern(std::move(counts)), c[n]);
  }
  if (basis == Basis::kDiagonal) {
    pulse = rotate_modes(pulse, 0, 1, bit == 0 ? kPi / 4.0 : -kPi / 4.0);
  }
  return {basis, bit, normalize(pulse).state, pulse, 1.0};
}

FockVector pdc_modified_singlet(const SourceParams& params) {
  if (params.kind != SourceKind::kPdc) throw ParameterError("modified singlet needs a PDC source");
  params.validate();
  const double x = params.amplitude;
  FockVector v(4, params.max_photons);
  v.add({0, 0, 0, 0}, 1.0 - x * x / 2.0);

  const double h = x / 2.0;
  v.add({0, 1, 1, 0}, h);
  v.add({1, 1, 0, 0}, h);
  v.add({0, 0, 1, 1}, -h);
  v.add({1, 0, 0, 1}, -h);
  if (params.order == 1) return v;

  const double q = x * x / 4.0;
  v.add({0, 2, 2, 0}, q);
  v.add({2, 2, 0, 0}, q);
  v.add({0, 0, 2, 2}, q);
  v.add({2, 0, 0, 2}, q);
  v.add({1, 1, 1, 1}, -2.0 * q);
  v.add({1, 0, 1, 2}, kSqrt2 * q);
  v.add({0, 1, 2, 1}, -kSqrt2 * q);
  v.add({1, 2, 1, 0}, kSqrt2 * q);
  v.add({2, 1, 0, 1}, -kSqrt2 * q);
  return v;
}

std::vector<AliceOutcome> alice_measure(const FockVector& pair, Basis basis, double eta_alice) {
  if (pair.mode_count() != 4) {
    throw DimensionError("Alice's measurement needs a four-mode pair state");
  }
  if (!(eta_alice > 0.0 && eta_alice <= 1.0)) {
    throw ParameterError("Alice detector efficiency must lie in (0, 1]");
  }
  const double total = pair.squared_norm();
  if (std::sqrt(total) <= kNearZeroNorm) throw NearZeroVectorError("empty pair state");

  const FockVector rotated = rotate_modes(pair, kAliceV, kAliceH, measurement_angle(basis));
  const std::array<std::size_t, 2> alice_modes{kAliceV, kAliceH};

  std::vector<AliceOutcome> outcomes;
  for (const auto& emitted : enumerate_patterns(2, pair.max_photons())) {
    FockVector bob = project_counts_unnormalized(rotated, alice_modes, emitted.counts());
    if (bob.empty()) continue;
    const double emitted_probability = bob.squared_norm() / total;
    const FockVector bob_state = normalize(bob).state;

    for (int dv = 0; dv <= emitted[0]; ++dv) {
      for (int dh = 0; dh <= emitted[1]; ++dh) {
        const double p_detect = binomial_probability(emitted[0], dv, eta_alice) *
                                binomial_probability(emitted[1], dh, eta_alice);
        if (p_detect == 0.0) continue;
        AliceOutcome out{emitted, OccupationPattern{dv, dh}, dv + dh == 1, std::nullopt,
                         {bob_state, emitted_probability * p_detect}, bob};
        // The partner of a horizontal click is Bob's vertical photon: bit 0.
        if (out.accepted) out.bit = dh == 1 ? 0 : 1;
        if (p_detect != 1.0) out.bob_raw *= std::sqrt(p_detect);
        outcomes.push_back(std::move(out));
      }
    }
  }
  return outcomes;
}

ModifiedQubit pdc_qubit(const SourceParams& params, Basis basis, int bit) {
  check_bit(bit);
  const FockVector pair = pdc_modified_singlet(params);
  for (auto& outcome : alice_measure(pair, basis, 1.0)) {
    if (outcome.accepted && outcome.bit == bit) {
      return {basis, bit, std::move(outcome.bob.state), std::move(outcome.bob_raw),
              outcome.bob.weight};
    }
  }
  throw ConsistencyError("no accepted heralding outcome for the requested bit");
}

std::array<ModifiedQubit, 4> signal_states(const SourceParams& params) {
  params.validate();
  auto make = [&](Basis basis, int bit) {
    switch (params.kind) {
      case SourceKind::kWcp: return wcp_state(params, basis, bit);
      case SourceKind::kPdc: return pdc_qubit(params, basis, bit);
      case SourceKind::kSinglePhoton: return single_photon_state(basis, bit, params.max_photons);
    }
    throw ParameterError("unknown source kind");
  };
  if (params.kind == SourceKind::kPdc && params.eta_alice < 1.0) {
    throw ParameterError("heralded states are mixed when eta_alice < 1");
  }
  return {make(Basis::kRectilinear, 0), make(Basis::kRectilinear, 1), make(Basis::kDiagonal, 0),
          make(Basis::kDiagonal, 1)};
}

}  // namespace fockqkd
