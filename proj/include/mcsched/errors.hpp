#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mcsched {

// Thrown before any allocation whose size would exceed a configured bound
// (state-space size, arrival support size, compiled transition count).
class CapacityError : public std::runtime_error {
 public:
  CapacityError(const std::string& what, std::size_t required, std::size_t limit)
      : std::runtime_error(what + " (required " + std::to_string(required) +
                           ", limit " + std::to_string(limit) + ")"),
        required_(required),
        limit_(limit) {}

  std::size_t required() const { return required_; }
  std::size_t limit() const { return limit_; }

 private:
  std::size_t required_;
  std::size_t limit_;
};

// Exact policy evaluation requires a single recurrent class; the two states
// identify disjoint closed classes of the induced chain.
class UnichainViolationError : public std::runtime_error {
 public:
  UnichainViolationError(std::size_t state_a, std::size_t state_b)
      : std::runtime_error("policy induces multiple recurrent classes (e.g. states " +
                           std::to_string(state_a) + " and " + std::to_string(state_b) + ")"),
        state_a_(state_a),
        state_b_(state_b) {}

  std::size_t state_a() const { return state_a_; }
  std::size_t state_b() const { return state_b_; }

 private:
  std::size_t state_a_;
  std::size_t state_b_;
};

// Markov arrival chain failed the irreducibility or aperiodicity check.
class ErgodicityError : public std::runtime_error {
 public:
  explicit ErgodicityError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mcsched
