#include "fockqkd/fock.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include "fockqkd/errors.h"

namespace fockqkd {
namespace {

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

// pow with 0^0 = 1 and integer exponents.
double ipow(double base, int exp) {
  double r = 1.0;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

void append_double(std::string& out, double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x + 0.0);
  out.append(buf, res.ptr);
}

void check_mode(const FockVector& v, std::size_t mode) {
  if (mode >= v.mode_count()) {
    throw DimensionError("mode index " + std::to_string(mode) + " out of range for " +
                         std::to_string(v.mode_count()) + "-mode state");
  }
}

}  // namespace

OccupationPattern::OccupationPattern(std::initializer_list<int> counts)
    : OccupationPattern(std::vector<int>(counts)) {}

OccupationPattern::OccupationPattern(std::vector<int> counts) : counts_(std::move(counts)) {
  for (int c : counts_) {
    if (c < 0) throw ParameterError("occupation numbers must be non-negative");
  }
}

int OccupationPattern::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), 0);
}

std::string OccupationPattern::to_string() const {
  std::string s;
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(counts_[i]);
  }
  return s;
}

FockVector::FockVector(std::size_t mode_count, int max_photons)
    : mode_count_(mode_count), max_photons_(max_photons) {
  if (max_photons < 0) throw ParameterError("truncation must be non-negative");
}

FockVector FockVector::vacuum(std::size_t mode_count, int max_photons) {
  FockVector v(mode_count, max_photons);
  v.add(OccupationPattern(std::vector<int>(mode_count, 0)), 1.0);
  return v;
}

FockVector FockVector::basis_state(const OccupationPattern& pattern, int max_photons) {
  FockVector v(pattern.mode_count(), max_photons);
  v.add(pattern, 1.0);
  return v;
}

Complex FockVector::amplitude(const OccupationPattern& pattern) const {
  auto it = terms_.find(pattern);
  return it == terms_.end() ? Complex{} : it->second;
}

FockVector& FockVector::add(const OccupationPattern& pattern, Complex amplitude) {
  if (pattern.mode_count() != mode_count_) {
    throw DimensionError("pattern has " + std::to_string(pattern.mode_count()) +
                         " modes, state has " + std::to_string(mode_count_));
  }
  if (!std::isfinite(amplitude.real()) || !std::isfinite(amplitude.imag())) {
    throw ParameterError("non-finite amplitude");
  }
  if (amplitude == Complex{}) return *this;
  if (pattern.total() > max_photons_) {
    throw TruncationError("pattern " + pattern.to_string() + " exceeds truncation " +
                          std::to_string(max_photons_));
  }
  auto [it, inserted] = terms_.try_emplace(pattern, amplitude);
  if (!inserted) it->second += amplitude;
  if (std::abs(it->second) < kAmplitudeDropTolerance) terms_.erase(it);
  return *this;
}

double FockVector::squared_norm() const {
  double s = 0.0;
  for (const auto& [p, a] : terms_) s += std::norm(a);
  return s;
}

double FockVector::norm() const { return std::sqrt(squared_norm()); }

void FockVector::check_compatible(const FockVector& other) const {
  if (other.mode_count_ != mode_count_) {
    throw DimensionError("mode-count mismatch: " + std::to_string(mode_count_) + " vs " +
                         std::to_string(other.mode_count_));
  }
}

FockVector& FockVector::operator+=(const FockVector& other) {
  check_compatible(other);
  max_photons_ = std::max(max_photons_, other.max_photons_);
  for (const auto& [p, a] : other.terms_) add(p, a);
  return *this;
}

FockVector& FockVector::operator-=(const FockVector& other) {
  check_compatible(other);
  max_photons_ = std::max(max_photons_, other.max_photons_);
  for (const auto& [p, a] : other.terms_) add(p, -a);
  return *this;
}

FockVector& FockVector::operator*=(Complex factor) {
  for (auto it = terms_.begin(); it != terms_.end();) {
    it->second *= factor;
    if (std::abs(it->second) < kAmplitudeDropTolerance) {
      it = terms_.erase(it);
    } else {
      ++it;
    }
  }
  return *this;
}

Complex inner_product(const FockVector& bra, const FockVector& ket) {
  if (bra.mode_count() != ket.mode_count()) {
    throw DimensionError("inner product of " + std::to_string(bra.mode_count()) + "-mode and " +
                         std::to_string(ket.mode_count()) + "-mode states");
  }
  const auto& small = bra.size() <= ket.size() ? bra : ket;
  const auto& large = bra.size() <= ket.size() ? ket : bra;
  Complex s{};
  for (const auto& [p, a] : small.terms()) {
    auto it = large.terms().find(p);
    if (it == large.terms().end()) continue;
    s += (&small == &bra) ? std::conj(a) * it->second : std::conj(it->second) * a;
  }
  return s;
}

Normalized normalize(const FockVector& v) {
  const double sq = v.squared_norm();
  if (std::sqrt(sq) <= kNearZeroNorm) {
    throw NearZeroVectorError("cannot normalize a vector of norm " + std::to_string(std::sqrt(sq)));
  }
  const Complex lead = v.terms().begin()->second;
  const Complex phase = std::conj(lead) / std::abs(lead);
  FockVector out = v;
  out *= phase / std::sqrt(sq);
  return {std::move(out), sq};
}

FockVector tensor(const FockVector& u, const FockVector& v, int max_photons) {
  if (max_photons < 0) max_photons = std::max(u.max_photons(), v.max_photons());
  FockVector out(u.mode_count() + v.mode_count(), max_photons);
  for (const auto& [pu, au] : u.terms()) {
    for (const auto& [pv, av] : v.terms()) {
      std::vector<int> counts(pu.counts().begin(), pu.counts().end());
      counts.insert(counts.end(), pv.counts().begin(), pv.counts().end());
      out.add(OccupationPattern(std::move(counts)), au * av);
    }
  }
  return out;
}

FockVector rotate_modes(const FockVector& v, std::size_t i, std::size_t j, double theta) {
  check_mode(v, i);
  check_mode(v, j);
  if (i == j) throw DimensionError("rotation needs two distinct modes");

  const double c = std::cos(theta);
  const double s = std::sin(theta);
  FockVector out(v.mode_count(), v.max_photons());
  for (const auto& [p, a] : v.terms()) {
    const int n = p[i];
    const int m = p[j];
    const double norm_in = std::sqrt(factorial(n) * factorial(m));
    std::vector<int> counts(p.counts().begin(), p.counts().end());
    // (c a_i + s a_j)^n (-s a_i + c a_j)^m, expanded term by term.
    for (int k = 0; k <= n; ++k) {
      const double ck = binomial(n, k) * ipow(c, k) * ipow(s, n - k);
      if (ck == 0.0) continue;
      for (int l = 0; l <= m; ++l) {
        const double cl = binomial(m, l) * ipow(-s, l) * ipow(c, m - l);
        if (cl == 0.0) continue;
        const int ni = k + l;
        const int nj = n + m - ni;
        counts[i] = ni;
        counts[j] = nj;
        const double norm_out = std::sqrt(factorial(ni) * factorial(nj));
        out.add(OccupationPattern(counts), a * (ck * cl * norm_out / norm_in));
      }
    }
  }
  return out;
}

FockVector project_counts_unnormalized(const FockVector& v, std::span<const std::size_t> modes,
                                       std::span<const int> counts) {
  if (modes.size() != counts.size()) {
    throw DimensionError("projection needs one target count per mode");
  }
  std::vector<bool> removed(v.mode_count(), false);
  for (std::size_t m : modes) {
    check_mode(v, m);
    if (removed[m]) throw DimensionError("projection modes must be distinct");
    removed[m] = true;
  }
  for (int c : counts) {
    if (c < 0) throw ParameterError("target counts must be non-negative");
  }

  FockVector out(v.mode_count() - modes.size(), v.max_photons());
  for (const auto& [p, a] : v.terms()) {
    bool match = true;
    for (std::size_t k = 0; k < modes.size() && match; ++k) match = p[modes[k]] == counts[k];
    if (!match) continue;
    std::vector<int> rest;
    rest.reserve(out.mode_count());
    for (std::size_t m = 0; m < v.mode_count(); ++m) {
      if (!removed[m]) rest.push_back(p[m]);
    }
    out.add(OccupationPattern(std::move(rest)), a);
  }
  return out;
}

WeightedState project_counts(const FockVector& v, std::span<const std::size_t> modes,
                             std::span<const int> counts) {
  const double total = v.squared_norm();
  if (std::sqrt(total) <= kNearZeroNorm) throw NearZeroVectorError("projecting a null state");
  FockVector kept = project_counts_unnormalized(v, modes, counts);
  if (kept.empty()) return {FockVector(kept.mode_count(), kept.max_photons()), 0.0};
  const double weight = kept.squared_norm() / total;
  if (std::sqrt(kept.squared_norm()) <= kNearZeroNorm) {
    return {FockVector(kept.mode_count(), kept.max_photons()), weight};
  }
  return {normalize(kept).state, weight};
}

std::vector<WeightedState> apply_loss(const FockVector& v, std::size_t mode, double t) {
  check_mode(v, mode);
  if (!(t >= 0.0 && t <= 1.0)) throw ParameterError("transmission must lie in [0, 1]");
  const double total = v.squared_norm();
  if (std::sqrt(total) <= kNearZeroNorm) throw NearZeroVectorError("loss applied to a null state");

  int max_in_mode = 0;
  for (const auto& [p, a] : v.terms()) max_in_mode = std::max(max_in_mode, p[mode]);

  std::vector<WeightedState> branches;
  for (int lost = 0; lost <= max_in_mode; ++lost) {
    FockVector branch(v.mode_count(), v.max_photons());
    for (const auto& [p, a] : v.terms()) {
      const int n = p[mode];
      if (n < lost) continue;
      const double kraus = std::sqrt(binomial(n, lost) * ipow(t, n - lost) * ipow(1.0 - t, lost));
      if (kraus == 0.0) continue;
      std::vector<int> counts(p.counts().begin(), p.counts().end());
      counts[mode] = n - lost;
      branch.add(OccupationPattern(std::move(counts)), a * kraus);
    }
    const double weight = branch.squared_norm() / total;
    if (branch.empty() || std::sqrt(branch.squared_norm()) <= kNearZeroNorm) continue;
    branches.push_back({normalize(branch).state, weight});
  }
  return branches;
}

double mean_photon_number(const FockVector& v, std::size_t mode) {
  check_mode(v, mode);
  const double total = v.squared_norm();
  if (total == 0.0) throw NearZeroVectorError("mean photon number of a null state");
  double s = 0.0;
  for (const auto& [p, a] : v.terms()) s += p[mode] * std::norm(a);
  return s / total;
}

std::vector<double> photon_number_distribution(const FockVector& v) {
  const double total = v.squared_norm();
  if (total == 0.0) throw NearZeroVectorError("photon statistics of a null state");
  std::vector<double> dist(static_cast<std::size_t>(v.max_photons()) + 1, 0.0);
  for (const auto& [p, a] : v.terms()) dist[p.total()] += std::norm(a) / total;
  return dist;
}

std::string dump(const FockVector& v) {
  std::string out;
  for (const auto& [p, a] : v.terms()) {
    out += p.to_string();
    out += '\t';
    append_double(out, a.real());
    out += '\t';
    append_double(out, a.imag());
    out += '\n';
  }
  return out;
}

std::vector<OccupationPattern> enumerate_patterns(std::size_t mode_count, int max_photons) {
  std::vector<OccupationPattern> out;
  std::vector<int> counts(mode_count, 0);
  // Odometer over counts with a running total bound; yields lexicographic order.
  auto recurse = [&](auto&& self, std::size_t mode, int budget) -> void {
    if (mode == mode_count) {
      out.emplace_back(counts);
      return;
    }
    for (int c = 0; c <= budget; ++c) {
      counts[mode] = c;
      self(self, mode + 1, budget - c);
    }
    counts[mode] = 0;
  };
  recurse(recurse, 0, max_photons);
  return out;
}

}  // namespace fockqkd
