#pragma once

// Sparse states on a truncated multimode bosonic Fock space.
//
// A FockVector maps occupation patterns (photons per mode) to complex
// amplitudes. Every stored pattern respects the vector's truncation: the
// total photon number never exceeds max_photons(). Amplitudes whose
// magnitude falls below kAmplitudeDropTolerance are not stored.
//
// Mode ordering used throughout the library: four-mode states are
// (Alice vertical, Alice horizontal, Bob vertical, Bob horizontal), and
// Bob-only states are (vertical, horizontal).

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace fockqkd {

using Complex = std::complex<double>;

inline constexpr double kAmplitudeDropTolerance = 1e-15;
inline constexpr double kNearZeroNorm = 1e-12;
inline constexpr int kDefaultMaxPhotons = 6;

class OccupationPattern {
 public:
  OccupationPattern() = default;
  OccupationPattern(std::initializer_list<int> counts);
  explicit OccupationPattern(std::vector<int> counts);

  std::size_t mode_count() const { return counts_.size(); }
  int operator[](std::size_t mode) const { return counts_[mode]; }
  std::span<const int> counts() const { return counts_; }
  int total() const;

  // Comma-separated counts, e.g. "1,0,2".
  std::string to_string() const;

  auto operator<=>(const OccupationPattern&) const = default;

 private:
  std::vector<int> counts_;
};

class FockVector {
 public:
  using Terms = std::map<OccupationPattern, Complex>;

  explicit FockVector(std::size_t mode_count, int max_photons = kDefaultMaxPhotons);

  static FockVector vacuum(std::size_t mode_count, int max_photons = kDefaultMaxPhotons);
  static FockVector basis_state(const OccupationPattern& pattern,
                                int max_photons = kDefaultMaxPhotons);

  std::size_t mode_count() const { return mode_count_; }
  int max_photons() const { return max_photons_; }
  const Terms& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }

  Complex amplitude(const OccupationPattern& pattern) const;

  // Accumulates `amplitude` onto `pattern`. Throws DimensionError on a
  // mode-count mismatch and TruncationError above max_photons().
  FockVector& add(const OccupationPattern& pattern, Complex amplitude);

  double squared_norm() const;
  double norm() const;

  FockVector& operator+=(const FockVector& other);
  FockVector& operator-=(const FockVector& other);
  FockVector& operator*=(Complex factor);

  friend FockVector operator+(FockVector lhs, const FockVector& rhs) { return lhs += rhs; }
  friend FockVector operator-(FockVector lhs, const FockVector& rhs) { return lhs -= rhs; }
  friend FockVector operator*(Complex factor, FockVector v) { return v *= factor; }
  friend FockVector operator*(FockVector v, Complex factor) { return v *= factor; }

 private:
  void check_compatible(const FockVector& other) const;

  std::size_t mode_count_;
  int max_photons_;
  Terms terms_;
};

// A normalized state paired with the probability of the branch it describes.
// A zero-probability branch carries an empty state; see is_null().
struct WeightedState {
  FockVector state;
  double weight = 0.0;

  bool is_null() const { return state.empty(); }
};

struct Normalized {
  FockVector state;
  double squared_norm;
};

// <bra|ket>, antilinear in the first argument.
Complex inner_product(const FockVector& bra, const FockVector& ket);

// Unit vector with the first nonzero amplitude (in pattern order) made real
// and positive, plus the squared norm of the input.
Normalized normalize(const FockVector& v);

// Product state; `max_photons` < 0 keeps the larger of the two truncations.
FockVector tensor(const FockVector& u, const FockVector& v, int max_photons = -1);

// Two-mode rotation of the creation operators,
//   a_i^+ -> cos(theta) a_i^+ + sin(theta) a_j^+
//   a_j^+ -> -sin(theta) a_i^+ + cos(theta) a_j^+,
// so that rotate_modes(|1,0>, 0, 1, pi/4) = (|1,0> + |0,1>)/sqrt(2).
FockVector rotate_modes(const FockVector& v, std::size_t i, std::size_t j, double theta);

// Component of `v` whose occupations on `modes` equal `counts`, with those
// modes removed. Not renormalized.
FockVector project_counts_unnormalized(const FockVector& v, std::span<const std::size_t> modes,
                                       std::span<const int> counts);

// Normalized projection plus its probability relative to |v|^2.
WeightedState project_counts(const FockVector& v, std::span<const std::size_t> modes,
                             std::span<const int> counts);

// Pure-state unraveling of a beam-splitter loss channel of transmission `t`
// on one mode, indexed by the number of photons lost. Zero-probability
// branches are omitted.
std::vector<WeightedState> apply_loss(const FockVector& v, std::size_t mode, double t);

// Expected photon number in `mode`, for a state of any norm.
double mean_photon_number(const FockVector& v, std::size_t mode);

// Probability of each total photon number 0..max_photons() (normalized to
// the state's squared norm).
std::vector<double> photon_number_distribution(const FockVector& v);

// One line per term: `pattern TAB re TAB im`, in pattern order.
std::string dump(const FockVector& v);

// All patterns on `mode_count` modes with total photons <= max_photons, in
// lexicographic order.
std::vector<OccupationPattern> enumerate_patterns(std::size_t mode_count, int max_photons);

}  // namespace fockqkd
