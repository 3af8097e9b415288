#pragma once

#include <stdexcept>
#include <string>

namespace fockqkd {

// Mode-count mismatch or an out-of-range mode index.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A pattern would exceed the state's total-photon truncation.
class TruncationError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// A physical parameter outside its admissible range.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NearZeroVectorError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// The ensemble is linearly dependent, so no unambiguous measurement exists.
class NotDiscriminableError : public std::runtime_error {
 public:
  NotDiscriminableError(const std::string& what, int rank, int size)
      : std::runtime_error(what), rank_(rank), size_(size) {}

  int rank() const { return rank_; }
  int ensemble_size() const { return size_; }

 private:
  int rank_;
  int size_;
};

// An internal numerical check (probability sum, positivity certificate) failed.
class ConsistencyError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace fockqkd
