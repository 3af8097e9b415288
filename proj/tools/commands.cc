#include "commands.h"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

#include "fockqkd/attack.h"
#include "fockqkd/discrimination.h"
#include "fockqkd/errors.h"
#include "fockqkd/sources.h"

namespace fockqkd::cli {
namespace {

using json = nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x + 0.0);
  return std::string(buf, r.ptr);
}

// Flag values as parsed. Whether a flag was given is asked of CLI11.
struct Flags {
  std::string config_path;
  std::string source;
  std::vector<double> alpha;
  std::vector<double> chi;
  int order = 2;
  std::vector<double> eta_alice;
  std::vector<double> eta_bob;
  double transmission = 1.0;
  double loss_db = 0.0;
  std::uint64_t pulses = 0;
  std::uint64_t seed = 0;
  int max_photons = kDefaultMaxPhotons;
  bool exact_coherent = false;
  std::string out_path;
  std::string format = "csv";
  std::string attack = "none";
  bool toy = false;
};

// Fully resolved run description. Grids have one entry outside `threshold`.
struct Settings {
  SourceParams source;
  std::vector<double> amplitudes;
  std::vector<double> eta_alice;
  std::vector<double> eta_bob;
  ChannelModel channel;
  std::uint64_t pulses = 100000;
  std::uint64_t seed = 1;
  Attack attack = Attack::kNone;
};

void add_shared(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config_path, "JSON configuration file; flags override it");
  sub->add_option("--source", f.source, "wcp, pdc or single")
      ->check(CLI::IsMember({"wcp", "pdc", "single"}));
  sub->add_option("--alpha", f.alpha, "WCP amplitude (comma list for threshold)")->delimiter(',');
  sub->add_option("--chi", f.chi, "PDC amplitude (comma list for threshold)")->delimiter(',');
  sub->add_option("--order", f.order, "expansion order")->check(CLI::IsMember({1, 2}));
  sub->add_option("--eta-alice", f.eta_alice, "Alice heralding efficiency")->delimiter(',');
  sub->add_option("--eta-bob", f.eta_bob, "Bob detector efficiency")->delimiter(',');
  auto* t = sub->add_option("--transmission", f.transmission, "channel transmission t");
  auto* db = sub->add_option("--loss-db", f.loss_db, "channel loss in dB");
  t->excludes(db);
  sub->add_option("--pulses", f.pulses, "Monte Carlo pulse count");
  sub->add_option("--seed", f.seed, "Monte Carlo seed");
  sub->add_option("--max-photons", f.max_photons, "Fock truncation");
  sub->add_flag("--exact-coherent", f.exact_coherent, "Poissonian WCP amplitudes");
  sub->add_option("--out", f.out_path, "write output here instead of stdout");
  sub->add_option("--format", f.format, "threshold output format")
      ->check(CLI::IsMember({"csv", "jsonl"}));
}

std::vector<double> number_list(const json& j, const char* name) {
  if (j.is_number()) return {j.get<double>()};
  if (j.is_array()) {
    std::vector<double> v;
    for (const auto& x : j) {
      if (!x.is_number()) throw UsageError(std::string(name) + " must hold numbers");
      v.push_back(x.get<double>());
    }
    return v;
  }
  throw UsageError(std::string(name) + " must be a number or a list of numbers");
}

template <typename T>
T get_as(const json& j, const char* name) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw UsageError(std::string("bad value for ") + name);
  }
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const char* where) {
  if (!j.is_object()) throw UsageError(std::string(where) + " must be an object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw UsageError("unknown key '" + key + "' in " + where);
  }
}

void apply_config(const std::string& path, Settings& s) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  // A simulate report carries its configuration under "config".
  if (doc.is_object() && doc.contains("config") && doc.contains("report")) doc = doc["config"];
  check_keys(doc, {"source", "channel", "eta_bob", "pulses", "seed", "attack"}, "config");

  if (doc.contains("source")) {
    const json& src = doc["source"];
    check_keys(src, {"kind", "amplitude", "order", "eta_alice", "exact_coherent", "max_photons"},
               "source");
    if (src.contains("kind")) s.source.kind = parse_source_kind(get_as<std::string>(src["kind"], "kind"));
    if (src.contains("amplitude")) s.amplitudes = number_list(src["amplitude"], "amplitude");
    if (src.contains("order")) s.source.order = get_as<int>(src["order"], "order");
    if (src.contains("eta_alice")) s.eta_alice = number_list(src["eta_alice"], "eta_alice");
    if (src.contains("exact_coherent")) {
      s.source.exact_coherent = get_as<bool>(src["exact_coherent"], "exact_coherent");
    }
    if (src.contains("max_photons")) s.source.max_photons = get_as<int>(src["max_photons"], "max_photons");
  }
  if (doc.contains("channel")) {
    const json& ch = doc["channel"];
    check_keys(ch, {"transmission", "loss_db"}, "channel");
    if (ch.contains("transmission") && ch.contains("loss_db")) {
      throw UsageError("channel takes transmission or loss_db, not both");
    }
    if (ch.contains("transmission")) s.channel.transmission = get_as<double>(ch["transmission"], "transmission");
    if (ch.contains("loss_db")) s.channel = ChannelModel::from_loss_db(get_as<double>(ch["loss_db"], "loss_db"));
  }
  if (doc.contains("eta_bob")) s.eta_bob = number_list(doc["eta_bob"], "eta_bob");
  if (doc.contains("pulses")) s.pulses = get_as<std::uint64_t>(doc["pulses"], "pulses");
  if (doc.contains("seed")) s.seed = get_as<std::uint64_t>(doc["seed"], "seed");
  if (doc.contains("attack")) s.attack = parse_attack(get_as<std::string>(doc["attack"], "attack"));
}

Settings resolve(const CLI::App& sub, const Flags& f) {
  Settings s;
  s.amplitudes = {s.source.amplitude};
  s.eta_alice = {1.0};
  s.eta_bob = {1.0};
  if (!f.config_path.empty()) apply_config(f.config_path, s);

  auto given = [&](const char* name) {
    const CLI::Option* opt = sub.get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
  };
  if (given("--source")) s.source.kind = parse_source_kind(f.source);
  if (given("--alpha") && given("--chi")) throw UsageError("give --alpha or --chi, not both");
  if (given("--alpha")) {
    if (s.source.kind != SourceKind::kWcp) throw UsageError("--alpha applies to the wcp source");
    s.amplitudes = f.alpha;
  }
  if (given("--chi")) {
    if (s.source.kind != SourceKind::kPdc) throw UsageError("--chi applies to the pdc source");
    s.amplitudes = f.chi;
  }
  if (given("--order")) s.source.order = f.order;
  if (given("--eta-alice")) s.eta_alice = f.eta_alice;
  if (given("--eta-bob")) s.eta_bob = f.eta_bob;
  if (given("--transmission")) s.channel.transmission = f.transmission;
  if (given("--loss-db")) s.channel = ChannelModel::from_loss_db(f.loss_db);
  if (given("--pulses")) s.pulses = f.pulses;
  if (given("--seed")) s.seed = f.seed;
  if (given("--max-photons")) s.source.max_photons = f.max_photons;
  if (f.exact_coherent) s.source.exact_coherent = true;
  if (given("--attack")) s.attack = parse_attack(f.attack);

  if (s.amplitudes.empty() || s.eta_alice.empty() || s.eta_bob.empty()) {
    throw UsageError("parameter grids must not be empty");
  }
  for (double eta : s.eta_bob) {
    if (!(eta > 0.0 && eta <= 1.0)) throw UsageError("eta_bob must lie in (0, 1]");
  }
  s.channel.validate();
  for (double a : s.amplitudes) {
    for (double e : s.eta_alice) {
      SourceParams p = s.source;
      p.amplitude = a;
      p.eta_alice = e;
      p.validate();
    }
  }
  s.source.amplitude = s.amplitudes.front();
  s.source.eta_alice = s.eta_alice.front();
  return s;
}

void require_single_point(const Settings& s) {
  if (s.amplitudes.size() != 1 || s.eta_alice.size() != 1 || s.eta_bob.size() != 1) {
    throw UsageError("lists of values are only accepted by threshold");
  }
}

std::string describe(const SourceParams& p) {
  std::string d = "source=" + to_string(p.kind);
  if (p.kind == SourceKind::kSinglePhoton) return d;
  d += " amplitude=" + fmt(p.amplitude) + " order=" + std::to_string(p.order);
  if (p.kind == SourceKind::kPdc) d += " eta_alice=" + fmt(p.eta_alice);
  if (p.exact_coherent) d += " exact_coherent";
  return d;
}

void print_gram(std::ostream& os, const GramMatrix& g) {
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    for (Eigen::Index j = 0; j < g.cols(); ++j) {
      os << (j ? " " : "") << fmt(g(i, j).real()) << (g(i, j).imag() < 0 ? "" : "+")
         << fmt(g(i, j).imag()) << "i";
    }
    os << '\n';
  }
}

int cmd_states(const Settings& s, std::ostream& os) {
  require_single_point(s);
  os << describe(s.source) << '\n';
  std::vector<FockVector> kets;
  if (s.source.kind == SourceKind::kPdc && s.source.eta_alice < 1.0) {
    // Accepted pulses are mixtures; list every heralded branch instead.
    os << "heralded states are mixed; accepted branches follow\n";
    const FockVector pair = pdc_modified_singlet(s.source);
    for (Basis basis : {Basis::kRectilinear, Basis::kDiagonal}) {
      for (const auto& o : alice_measure(pair, basis, s.source.eta_alice)) {
        if (!o.accepted) continue;
        os << "# branch basis=" << to_string(basis) << " bit=" << *o.bit
           << " emitted=" << o.emitted.to_string() << " detected=" << o.detected.to_string()
           << " probability=" << fmt(o.bob.weight) << '\n';
        os << dump(o.bob.state);
        kets.push_back(o.bob.state);
      }
    }
    os << "# gram\n";
    const GramMatrix g = gram(kets);
    print_gram(os, g);
    os << "support_rank " << numerical_rank(g) << '\n';
    return kExitOk;
  }
  for (const auto& q : signal_states(s.source)) {
    os << "# state basis=" << to_string(q.basis) << " bit=" << q.bit
       << " emission_probability=" << fmt(q.emission_probability) << '\n';
    os << dump(q.state);
    kets.push_back(q.state);
  }
  os << "# gram\n";
  const GramMatrix g = gram(kets);
  print_gram(os, g);
  os << "rank " << numerical_rank(g) << '\n';
  return kExitOk;
}

int cmd_usd(const Settings& s, bool toy, std::ostream& os) {
  std::vector<FockVector> kets;
  if (toy) {
    os << "ensemble toy: |1,0> and (|1,0>+|0,1>)/sqrt2\n";
    FockVector b(2);
    b.add({1, 0}, 1 / std::sqrt(2.0)).add({0, 1}, 1 / std::sqrt(2.0));
    kets = {FockVector::basis_state({1, 0}), b};
  } else {
    require_single_point(s);
    os << "ensemble " << describe(s.source) << '\n';
    for (const auto& q : signal_states(s.source)) kets.push_back(q.state);
  }
  const StateEnsemble e = StateEnsemble::uniform(kets);
  const int rank = numerical_rank(gram(e));
  os << "states " << e.size() << '\n' << "rank " << rank << '\n';
  std::optional<UsdPovm> povm;
  try {
    povm = usd_povm_equal(e);
  } catch (const NotDiscriminableError& err) {
    os << "not discriminable (rank " << err.rank() << ")\n";
    return kExitOk;
  }
  os << "conclusive_probability " << fmt(povm->conclusive_probabilities().front()) << '\n';
  for (std::size_t i = 0; i < povm->size(); ++i) {
    os << "reciprocal_norm " << i << ' ' << fmt(povm->reciprocal_states()[i].norm()) << '\n';
  }
  const auto& c = povm->certificate();
  os << "certificate min_conclusive_eigenvalue " << fmt(c.min_conclusive_eigenvalue) << '\n'
     << "certificate min_inconclusive_eigenvalue " << fmt(c.min_inconclusive_eigenvalue) << '\n'
     << "certificate max_cross_talk " << fmt(c.max_cross_talk) << '\n'
     << "certificate completeness_error " << fmt(c.completeness_error) << '\n';
  return kExitOk;
}

struct ThresholdRow {
  SourceParams source;
  double eta_bob;
  std::optional<double> p1;
  std::optional<double> p_multi_cond;
  std::optional<double> rate;
  std::optional<double> t_star;
  std::string error;
};

ThresholdRow threshold_row(const SourceParams& source, double eta_bob) {
  ThresholdRow row{source, eta_bob, {}, {}, {}, {}, {}};
  try {
    const auto stats = multiphoton_stats(source);
    row.p1 = stats.bob.p1;
    row.p_multi_cond =
        stats.pairs ? stats.pairs->p_multi_given_nonvacuum : stats.bob.p_multi_given_nonvacuum;
    row.rate = eve_conclusive_rate(source);
    row.t_star = critical_transmission(*row.rate, bob_photon_distribution(source), eta_bob);
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  return row;
}

void write_csv_row(std::ostream& os, const ThresholdRow& r) {
  auto cell = [&](const std::optional<double>& x) { return x ? fmt(*x) : std::string("error"); };
  os << to_string(r.source.kind) << ',' << fmt(r.source.amplitude) << ',' << r.source.order << ','
     << fmt(r.source.eta_alice) << ',' << fmt(r.eta_bob) << ',' << cell(r.p1) << ','
     << cell(r.p_multi_cond) << ',' << cell(r.rate) << ',';
  if (!r.error.empty()) {
    os << "error,error,error\n";
  } else if (!r.t_star) {
    os << "none,none,none\n";
  } else {
    os << fmt(*r.t_star) << ',' << fmt(100.0 * (1.0 - *r.t_star)) << ','
       << fmt(10.0 * std::log10(1.0 / *r.t_star)) << '\n';
  }
}

void write_jsonl_row(std::ostream& os, const ThresholdRow& r) {
  auto value = [](const std::optional<double>& x) { return x ? json(*x) : json(nullptr); };
  json j;
  j["source"] = to_string(r.source.kind);
  j["amplitude"] = r.source.amplitude;
  j["order"] = r.source.order;
  j["eta_alice"] = r.source.eta_alice;
  j["eta_bob"] = r.eta_bob;
  j["p1"] = value(r.p1);
  j["p_multi_cond"] = value(r.p_multi_cond);
  j["conclusive_rate"] = value(r.rate);
  j["t_star"] = value(r.t_star);
  j["fatal_loss_percent"] = r.t_star ? json(100.0 * (1.0 - *r.t_star)) : json(nullptr);
  j["fatal_loss_db"] = r.t_star ? json(10.0 * std::log10(1.0 / *r.t_star)) : json(nullptr);
  if (!r.error.empty()) j["error"] = r.error;
  os << j.dump() << '\n';
}

int cmd_threshold(const Settings& s, const std::string& format, std::ostream& os,
                  std::ostream& err) {
  if (format == "csv") os << kThresholdHeader << '\n';
  std::size_t failed = 0;
  std::size_t total = 0;
  for (double a : s.amplitudes) {
    for (double ea : s.eta_alice) {
      for (double eb : s.eta_bob) {
        SourceParams p = s.source;
        p.amplitude = a;
        p.eta_alice = ea;
        const ThresholdRow row = threshold_row(p, eb);
        ++total;
        if (!row.error.empty()) {
          ++failed;
          err << "row " << total << ": " << row.error << '\n';
        }
        if (format == "csv") write_csv_row(os, row);
        else write_jsonl_row(os, row);
      }
    }
  }
  return failed == total ? kExitFailure : kExitOk;
}

json config_json(const Settings& s) {
  json src;
  src["kind"] = to_string(s.source.kind);
  src["amplitude"] = s.source.amplitude;
  src["order"] = s.source.order;
  src["eta_alice"] = s.source.eta_alice;
  src["exact_coherent"] = s.source.exact_coherent;
  src["max_photons"] = s.source.max_photons;
  json j;
  j["source"] = src;
  j["channel"] = {{"transmission", s.channel.transmission}};
  j["eta_bob"] = s.eta_bob.front();
  j["pulses"] = s.pulses;
  j["seed"] = s.seed;
  j["attack"] = to_string(s.attack);
  return j;
}

json report_json(const SimReport& r, const ChannelModel& channel) {
  json j;
  j["attack"] = to_string(r.attack);
  j["attack_available"] = r.attack_available;
  j["pulses_sent"] = r.pulses_sent;
  j["alice_accepted"] = r.alice_accepted;
  j["bob_click_events"] = r.bob_click_events;
  j["double_clicks"] = r.double_clicks;
  j["bob_detections"] = r.bob_detections;
  j["sifted_bits"] = r.sifted_bits;
  j["sifted_errors"] = r.sifted_errors;
  j["eve_conclusive_count"] = r.eve_conclusive_count;
  j["eve_known_sifted"] = r.eve_known_sifted;
  j["yield"] = r.yield;
  j["accepted_yield"] = r.accepted_yield;
  j["accepted_click_yield"] = r.accepted_click_yield;
  j["qber"] = r.qber;
  j["eve_known_fraction_of_sifted"] = r.eve_known_fraction_of_sifted;
  j["channel_loss_db"] = channel.transmission > 0.0 ? json(channel.loss_db()) : json(nullptr);
  return j;
}

int cmd_simulate(const Settings& s, std::ostream& os) {
  require_single_point(s);
  ProtocolConfig c;
  c.source = s.source;
  c.channel = s.channel;
  c.eta_bob = s.eta_bob.front();
  c.pulses = s.pulses;
  c.seed = s.seed;
  c.validate();
  const SimReport r = run_protocol_monte_carlo(c, s.attack);
  json doc;
  doc["config"] = config_json(s);
  doc["report"] = report_json(r, s.channel);
  os << doc.dump(2) << '\n';
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fock-space BB84 source analysis and attack simulation", "fockqkd"};
  app.require_subcommand(1);
  Flags f;
  auto* states = app.add_subcommand("states", "print the four signal states, Gram matrix and rank");
  auto* usd = app.add_subcommand("usd", "optimal equal-probability unambiguous discrimination");
  auto* threshold = app.add_subcommand("threshold", "critical transmission over a parameter grid");
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo protocol run, JSON report");
  for (auto* sub : {states, usd, threshold, simulate}) add_shared(sub, f);
  usd->add_flag("--toy", f.toy, "use the built-in two-state ensemble");
  simulate->add_option("--attack", f.attack, "none or conclusive")
      ->check(CLI::IsMember({"none", "conclusive"}));

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    const CLI::App* sub = app.get_subcommands().front();
    const Settings s = resolve(*sub, f);

    std::ofstream file;
    if (!f.out_path.empty()) {
      file.open(f.out_path);
      if (!file) throw UsageError("cannot write '" + f.out_path + "'");
    }
    std::ostream& os = f.out_path.empty() ? out : file;

    int code = kExitOk;
    if (sub == states) code = cmd_states(s, os);
    else if (sub == usd) code = cmd_usd(s, f.toy, os);
    else if (sub == threshold) code = cmd_threshold(s, f.format, os, err);
    else code = cmd_simulate(s, os);
    os.flush();
    if (!os) {
      err << "error: failed writing output\n";
      return kExitFailure;
    }
    return code;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParameterError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace fockqkd::cli
