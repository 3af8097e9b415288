#pragma once

// Photon sources for BB84: weak coherent pulses, the downconversion pair
// source with Alice's heralding measurement, and an ideal single-photon
// reference source.

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "fockqkd/fock.h"

namespace fockqkd {

enum class SourceKind { kWcp, kPdc, kSinglePhoton };
enum class Basis { kRectilinear, kDiagonal };

std::string to_string(SourceKind kind);
std::string to_string(Basis basis);
SourceKind parse_source_kind(const std::string& name);

// Mode indices. Four-mode pair states are (a_v, a_h, b_v, b_h).
inline constexpr std::size_t kAliceV = 0;
inline constexpr std::size_t kAliceH = 1;
inline constexpr std::size_t kBobV = 2;
inline constexpr std::size_t kBobH = 3;

struct SourceParams {
  SourceKind kind = SourceKind::kWcp;
  // alpha for WCP, chi for PDC; ignored by the single-photon source.
  double amplitude = 0.3;
  // Highest power of the amplitude kept in the kets (1 or 2).
  int order = 2;
  // Per-photon detection efficiency of Alice's heralding detectors (PDC).
  double eta_alice = 1.0;
  // WCP only: Poissonian amplitudes up to max_photons instead of the
  // second-order expansion.
  bool exact_coherent = false;
  int max_photons = kDefaultMaxPhotons;

  void validate() const;
};

struct ModifiedQubit {
  Basis basis;
  int bit;
  FockVector state;  // unit norm, Bob modes (v, h)
  FockVector raw;    // as produced by the source, before normalization
  double emission_probability;
};

// Rotation Bob or Alice applies before counting photons so that a click on
// the vertical detector reads bit 0 in the chosen basis. Preparing |0_x>
// from |1,0> uses the opposite angle.
double measurement_angle(Basis basis);

// Ideal BB84 kets on (v, h): |0_+> = |1,0>, |1_+> = |0,1>,
// |0_x> = (|1,0> + |0,1>)/sqrt2, |1_x> = (|1,0> - |0,1>)/sqrt2.
FockVector ideal_bb84_ket(Basis basis, int bit, int max_photons = kDefaultMaxPhotons);

ModifiedQubit single_photon_state(Basis basis, int bit, int max_photons = kDefaultMaxPhotons);

// Weak coherent pulse polarized along the BB84 state (basis, bit), to the
// requested order in alpha:
//   (1 - a^2/2)|0> + a|1> + (a^2/sqrt2)|2>  in the polarization mode.
ModifiedQubit wcp_state(const SourceParams& params, Basis basis, int bit);

// The pair-source output on (a_v, a_h, b_v, b_h), unnormalized, with the
// chi^2 bracket dropped at order 1.
FockVector pdc_modified_singlet(const SourceParams& params);

struct AliceOutcome {
  OccupationPattern emitted;   // photons that reached Alice's rotated detectors
  OccupationPattern detected;  // counts registered after detector inefficiency
  bool accepted;               // exactly one click
  std::optional<int> bit;      // set iff accepted
  WeightedState bob;           // Bob's normalized state, weight = outcome probability
  FockVector bob_raw;          // Bob's component scaled as in the input state
};

// Every outcome of Alice measuring her arm of `pair` in `basis`, with each
// photon independently detected with probability `eta_alice` (no dark
// counts). Probabilities are relative to |pair|^2 and sum to one.
std::vector<AliceOutcome> alice_measure(const FockVector& pair, Basis basis, double eta_alice);

// Accepted branch for (basis, bit) with ideal heralding detectors.
ModifiedQubit pdc_qubit(const SourceParams& params, Basis basis, int bit);

// The four signal states in the order (+,0), (+,1), (x,0), (x,1).
// Throws ParameterError for PDC with eta_alice < 1, whose accepted states are
// mixed.
std::array<ModifiedQubit, 4> signal_states(const SourceParams& params);

// Index into signal_states() order.
inline constexpr std::size_t signal_index(Basis basis, int bit) {
  return (basis == Basis::kRectilinear ? 0 : 2) + static_cast<std::size_t>(bit);
}

}  // namespace fockqkd
