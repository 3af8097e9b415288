#include "fockqkd/attack.h"

#include <array>
#include <cmath>
#include <numeric>

#include "fockqkd/counter_rng.h"
#include "fockqkd/discrimination.h"
#include "fockqkd/errors.h"

namespace fockqkd {
namespace {

constexpr std::array<Basis, 2> kBases{Basis::kRectilinear, Basis::kDiagonal};

void accumulate(std::vector<double>& into, const std::vector<double>& dist, double weight) {
  if (into.size() < dist.size()) into.resize(dist.size(), 0.0);
  for (std::size_t n = 0; n < dist.size(); ++n) into[n] += weight * dist[n];
}

struct Emission {
  double probability;
  bool accepted;
  int bit;
  std::size_t state_id;
};

// A detection outcome in Bob's rotated frame: photons on (v, h).
struct PatternDraw {
  int v;
  int h;
  double probability;
};

// Everything a pulse needs, precomputed once per run.
class PulseModel {
 public:
  PulseModel(const ProtocolConfig& config, Attack attack) {
    const SourceParams& source = config.source;
    if (source.kind == SourceKind::kPdc) {
      const FockVector pair = pdc_modified_singlet(source);
      for (std::size_t b = 0; b < 2; ++b) {
        for (const auto& outcome : alice_measure(pair, kBases[b], source.eta_alice)) {
          emissions_[b].push_back({outcome.bob.weight, outcome.accepted, outcome.bit.value_or(-1),
                                   add_state(outcome.bob.state)});
        }
      }
    } else {
      const auto signals = signal_states(source);
      for (std::size_t b = 0; b < 2; ++b) {
        for (int bit = 0; bit < 2; ++bit) {
          const auto& q = signals[signal_index(kBases[b], bit)];
          emissions_[b].push_back({0.5, true, bit, add_state(q.state)});
        }
      }
    }
    for (std::size_t b = 0; b < 2; ++b) {
      for (const auto& e : emissions_[b]) emission_probabilities_[b].push_back(e.probability);
    }

    if (attack == Attack::kConclusive) {
      attack_available_ = setup_attack(source);
    }
    for (const auto& state : states_) {
      std::array<std::vector<PatternDraw>, 2> per_basis;
      for (std::size_t b = 0; b < 2; ++b) {
        const FockVector rotated = rotate_modes(state, 0, 1, measurement_angle(kBases[b]));
        for (const auto& [p, a] : rotated.terms()) {
          per_basis[b].push_back({p[0], p[1], std::norm(a)});
        }
      }
      patterns_.push_back(std::move(per_basis));
    }
  }

  bool attack_available() const { return attack_available_; }
  const std::vector<Emission>& emissions(std::size_t basis) const { return emissions_[basis]; }
  const std::vector<double>& emission_probabilities(std::size_t basis) const {
    return emission_probabilities_[basis];
  }
  const std::vector<PatternDraw>& patterns(std::size_t state, std::size_t basis) const {
    return patterns_[state][basis];
  }
  const std::vector<double>& eve_outcomes(std::size_t state) const { return eve_outcomes_[state]; }
  std::size_t resend_state(std::size_t label) const { return resend_ids_[label]; }
  Basis label_basis(std::size_t label) const { return label < 2 ? kBases[0] : kBases[1]; }
  int label_bit(std::size_t label) const { return static_cast<int>(label % 2); }

 private:
  std::size_t add_state(const FockVector& state) {
    states_.push_back(state);
    return states_.size() - 1;
  }

  bool setup_attack(const SourceParams& source) {
    if (source.kind == SourceKind::kPdc && source.eta_alice < 1.0) {
      throw ParameterError("conclusive attack on mixed heralded states is not supported");
    }
    const auto signals = signal_states(source);
    std::vector<FockVector> kets;
    for (const auto& q : signals) kets.push_back(q.state);
    std::optional<UsdPovm> povm;
    try {
      povm = usd_povm_equal(StateEnsemble::uniform(kets));
    } catch (const NotDiscriminableError&) {
      return false;
    }
    for (const auto& state : states_) {
      std::vector<double> p = povm->outcome_probabilities(state);
      for (double& x : p) x = std::max(x, 0.0);
      eve_outcomes_.push_back(std::move(p));
    }
    for (std::size_t label = 0; label < 4; ++label) {
      resend_ids_[label] = add_state(
          ideal_bb84_ket(label_basis(label), label_bit(label), source.max_photons));
    }
    return true;
  }

  std::vector<FockVector> states_;
  std::array<std::vector<Emission>, 2> emissions_;
  std::array<std::vector<double>, 2> emission_probabilities_;
  std::vector<std::array<std::vector<PatternDraw>, 2>> patterns_;
  std::vector<std::vector<double>> eve_outcomes_;
  std::array<std::size_t, 4> resend_ids_{};
  bool attack_available_ = false;
};

int thin(int photons, double survival, CounterRng& rng) {
  int kept = 0;
  for (int k = 0; k < photons; ++k) kept += rng.bernoulli(survival) ? 1 : 0;
  return kept;
}

const PatternDraw& draw_pattern(const std::vector<PatternDraw>& patterns, CounterRng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (const auto& p : patterns) {
    acc += p.probability;
    if (u < acc) return p;
  }
  return patterns.back();
}

double ratio(std::uint64_t num, std::uint64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

ChannelModel ChannelModel::from_loss_db(double loss_db) {
  if (!(loss_db >= 0.0)) throw ParameterError("loss in dB must be non-negative");
  return {std::pow(10.0, -loss_db / 10.0)};
}

double ChannelModel::loss_db() const { return 10.0 * std::log10(1.0 / transmission); }

void ChannelModel::validate() const {
  if (!(transmission >= 0.0 && transmission <= 1.0)) {
    throw ParameterError("transmission must lie in [0, 1]");
  }
}

PhotonStatistics photon_statistics(const std::vector<double>& distribution) {
  PhotonStatistics s;
  s.p0 = distribution.empty() ? 1.0 : distribution[0];
  s.p1 = distribution.size() > 1 ? distribution[1] : 0.0;
  s.p_multi = 0.0;
  for (std::size_t n = 2; n < distribution.size(); ++n) s.p_multi += distribution[n];
  const double nonvacuum = s.p1 + s.p_multi;
  s.conditional_defined = nonvacuum > 0.0;
  s.p_multi_given_nonvacuum = s.conditional_defined ? s.p_multi / nonvacuum : 0.0;
  return s;
}

std::vector<double> bob_photon_distribution(const SourceParams& source) {
  source.validate();
  std::vector<double> dist;
  if (source.kind != SourceKind::kPdc) {
    for (const auto& q : signal_states(source)) {
      accumulate(dist, photon_number_distribution(q.state), 0.25);
    }
    return dist;
  }
  const FockVector pair = pdc_modified_singlet(source);
  double accepted = 0.0;
  for (Basis basis : kBases) {
    for (const auto& outcome : alice_measure(pair, basis, source.eta_alice)) {
      if (!outcome.accepted) continue;
      accepted += 0.5 * outcome.bob.weight;
      accumulate(dist, photon_number_distribution(outcome.bob.state), 0.5 * outcome.bob.weight);
    }
  }
  for (double& p : dist) p /= accepted;
  return dist;
}

MultiphotonReport multiphoton_stats(const SourceParams& source) {
  MultiphotonReport report;
  report.bob = photon_statistics(bob_photon_distribution(source));
  if (source.kind != SourceKind::kPdc) return report;

  const FockVector pair = pdc_modified_singlet(source);
  const std::vector<double> photons = photon_number_distribution(pair);
  std::vector<double> pairs(photons.size() / 2 + 1, 0.0);
  for (std::size_t n = 0; n < photons.size(); ++n) pairs[n / 2] += photons[n];
  report.pairs = photon_statistics(pairs);

  double accepted = 0.0;
  for (Basis basis : kBases) {
    for (const auto& outcome : alice_measure(pair, basis, source.eta_alice)) {
      if (outcome.accepted) accepted += 0.5 * outcome.bob.weight;
    }
  }
  report.acceptance_probability = accepted;
  return report;
}

double honest_yield(const std::vector<double>& distribution, double transmission, double eta_bob) {
  const double miss = 1.0 - transmission * eta_bob;
  double y = 0.0;
  double miss_n = 1.0;
  for (double p : distribution) {
    y += p * (1.0 - miss_n);
    miss_n *= miss;
  }
  return y;
}

double honest_yield(const SourceParams& source, const ChannelModel& channel, double eta_bob) {
  channel.validate();
  if (!(eta_bob > 0.0 && eta_bob <= 1.0)) throw ParameterError("eta_bob must lie in (0, 1]");
  return honest_yield(bob_photon_distribution(source), channel.transmission, eta_bob);
}

double eve_conclusive_rate(const SourceParams& source) {
  const auto signals = signal_states(source);
  std::vector<FockVector> kets;
  for (const auto& q : signals) kets.push_back(q.state);
  const StateEnsemble ensemble = StateEnsemble::uniform(std::move(kets));
  try {
    const UsdPovm povm = usd_povm_equal(ensemble);
    const auto& q = povm.conclusive_probabilities();
    return std::inner_product(q.begin(), q.end(), ensemble.priors.begin(), 0.0);
  } catch (const NotDiscriminableError&) {
    return 0.0;
  }
}

std::optional<double> critical_transmission(double eve_rate,
                                            const std::vector<double>& distribution,
                                            double eta_bob) {
  if (!(eta_bob > 0.0 && eta_bob <= 1.0)) throw ParameterError("eta_bob must lie in (0, 1]");
  if (!(eve_rate > 0.0)) return std::nullopt;
  const double eve_yield = eve_rate * eta_bob;
  auto eve_keeps_up = [&](double t) { return eve_yield >= honest_yield(distribution, t, eta_bob); };
  if (eve_keeps_up(1.0)) return 1.0;
  double lo = 0.0;
  double hi = 1.0;
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    (eve_keeps_up(mid) ? lo : hi) = mid;
  }
  return lo;
}

std::optional<double> critical_transmission(const SourceParams& source, double eta_bob) {
  return critical_transmission(eve_conclusive_rate(source), bob_photon_distribution(source),
                               eta_bob);
}

std::string to_string(Attack attack) {
  return attack == Attack::kNone ? "none" : "conclusive";
}

Attack parse_attack(const std::string& name) {
  if (name == "none") return Attack::kNone;
  if (name == "conclusive") return Attack::kConclusive;
  throw ParameterError("unknown attack '" + name + "'");
}

void ProtocolConfig::validate() const {
  source.validate();
  channel.validate();
  if (!(eta_bob > 0.0 && eta_bob <= 1.0)) throw ParameterError("eta_bob must lie in (0, 1]");
  if (pulses == 0) throw ParameterError("pulse count must be positive");
}

SimReport run_protocol_monte_carlo(const ProtocolConfig& config, Attack attack) {
  config.validate();
  const PulseModel model(config, attack);

  SimReport r;
  r.attack = attack;
  r.attack_available = attack == Attack::kNone || model.attack_available();
  const bool eve_active = attack == Attack::kConclusive && model.attack_available();
  // Loss is polarization independent, so it commutes with Bob's basis
  // rotation and acts as per-photon thinning of his counts.
  const double survival = config.channel.transmission * config.eta_bob;

  for (std::uint64_t pulse = 0; pulse < config.pulses; ++pulse) {
    CounterRng rng(config.seed, pulse);
    ++r.pulses_sent;
    const std::size_t alice_basis = rng.below(2);
    const Emission& e =
        model.emissions(alice_basis)[sample_index(model.emission_probabilities(alice_basis), rng)];
    if (!e.accepted) continue;
    ++r.alice_accepted;

    const std::size_t bob_basis = rng.below(2);
    int v = 0;
    int h = 0;
    bool eve_knows = false;
    if (eve_active) {
      const std::size_t outcome = sample_index(model.eve_outcomes(e.state_id), rng);
      if (outcome < 4) {
        ++r.eve_conclusive_count;
        eve_knows = true;
        const auto& p = draw_pattern(model.patterns(model.resend_state(outcome), bob_basis), rng);
        v = thin(p.v, config.eta_bob, rng);
        h = thin(p.h, config.eta_bob, rng);
      }
    } else {
      const auto& p = draw_pattern(model.patterns(e.state_id, bob_basis), rng);
      v = thin(p.v, survival, rng);
      h = thin(p.h, survival, rng);
    }

    if (v == 0 && h == 0) continue;
    ++r.bob_click_events;
    if (v > 0 && h > 0) {
      ++r.double_clicks;
      continue;
    }
    ++r.bob_detections;
    if (bob_basis != alice_basis) continue;
    ++r.sifted_bits;
    const int bob_bit = v > 0 ? 0 : 1;
    if (bob_bit != e.bit) ++r.sifted_errors;
    if (eve_knows) ++r.eve_known_sifted;
  }

  r.yield = ratio(r.bob_detections, r.pulses_sent);
  r.accepted_yield = ratio(r.bob_detections, r.alice_accepted);
  r.accepted_click_yield = ratio(r.bob_click_events, r.alice_accepted);
  r.qber = ratio(r.sifted_errors, r.sifted_bits);
  r.eve_known_fraction_of_sifted = ratio(r.eve_known_sifted, r.sifted_bits);
  return r;
}

}  // namespace fockqkd
