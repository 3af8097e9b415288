#pragma once

// BB84 over a lossy channel: analytic yields, photon statistics, the
// conclusive-measurement intercept-resend attack and its loss threshold, and
// a pulse-level Monte Carlo of the honest and attacked protocol.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fockqkd/sources.h"

namespace fockqkd {

struct ChannelModel {
  // Per-photon survival probability.
  double transmission = 1.0;

  static ChannelModel from_loss_db(double loss_db);
  double loss_db() const;
  void validate() const;
};

struct PhotonStatistics {
  double p0 = 1.0;
  double p1 = 0.0;
  double p_multi = 0.0;
  // P(n >= 2 | n >= 1); zero with conditional_defined = false for vacuum.
  double p_multi_given_nonvacuum = 0.0;
  bool conditional_defined = false;
};

PhotonStatistics photon_statistics(const std::vector<double>& distribution);

struct MultiphotonReport {
  // Bob-bound photon numbers; for PDC conditioned on Alice accepting.
  PhotonStatistics bob;
  // PDC only: number of downconverted pairs in the unheralded source output.
  std::optional<PhotonStatistics> pairs;
  // Fraction of pulses Alice keeps (1 for WCP and single photons).
  double acceptance_probability = 1.0;
};

// Photon-number distribution of the Bob-bound signal, averaged over Alice's
// basis and bit (PDC: conditioned on acceptance).
std::vector<double> bob_photon_distribution(const SourceParams& source);

MultiphotonReport multiphoton_stats(const SourceParams& source);

// Probability per (accepted) pulse that Bob registers at least one photon:
// sum_n p_n (1 - (1 - t eta_B)^n).
double honest_yield(const SourceParams& source, const ChannelModel& channel, double eta_bob);
double honest_yield(const std::vector<double>& distribution, double transmission, double eta_bob);

// Per-pulse probability that Eve's equal-probability USD measurement is
// conclusive, averaged over the four signal states. Zero when the signal
// states are linearly dependent.
double eve_conclusive_rate(const SourceParams& source);

// Largest t with eve_rate * eta_B >= honest_yield(t), to 1e-12 absolute by
// bisection. nullopt when Eve is never conclusive.
std::optional<double> critical_transmission(const SourceParams& source, double eta_bob);
std::optional<double> critical_transmission(double eve_rate,
                                            const std::vector<double>& distribution,
                                            double eta_bob);

enum class Attack { kNone, kConclusive };

std::string to_string(Attack attack);
Attack parse_attack(const std::string& name);

struct ProtocolConfig {
  SourceParams source;
  ChannelModel channel;
  double eta_bob = 1.0;
  std::uint64_t pulses = 100000;
  std::uint64_t seed = 1;

  void validate() const;
};

struct SimReport {
  Attack attack = Attack::kNone;
  // False when the requested attack has no conclusive outcome on this
  // source; the run then proceeds without an eavesdropper.
  bool attack_available = true;

  std::uint64_t pulses_sent = 0;
  std::uint64_t alice_accepted = 0;
  std::uint64_t bob_click_events = 0;  // at least one detector fired
  std::uint64_t double_clicks = 0;     // both fired; discarded
  std::uint64_t bob_detections = 0;    // exactly one detector fired
  std::uint64_t sifted_bits = 0;
  std::uint64_t sifted_errors = 0;
  std::uint64_t eve_conclusive_count = 0;
  std::uint64_t eve_known_sifted = 0;

  double yield = 0.0;              // bob_detections / pulses_sent
  double accepted_yield = 0.0;     // bob_detections / alice_accepted
  double accepted_click_yield = 0.0;  // bob_click_events / alice_accepted
  double qber = 0.0;
  double eve_known_fraction_of_sifted = 0.0;
};

// Pulse i draws from CounterRng(seed, i), so reports depend only on the
// configuration.
SimReport run_protocol_monte_carlo(const ProtocolConfig& config, Attack attack);

}  // namespace fockqkd
