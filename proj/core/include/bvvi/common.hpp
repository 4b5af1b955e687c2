#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bvvi {

using Vec = std::vector<double>;

/// Default limit on the number of histories at the deepest level of a tree.
inline constexpr std::uint64_t kDefaultHistoryCap = 1'000'000;
/// Default limit on the size of a deterministic policy space.
inline constexpr std::uint64_t kDefaultPolicyCap = std::uint64_t{1} << 24;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An exhaustive computation would exceed its configured size limit.
class CapExceeded : public Error {
 public:
  CapExceeded(const std::string& what, std::uint64_t count, std::uint64_t cap);
  std::uint64_t count() const noexcept { return count_; }
  std::uint64_t cap() const noexcept { return cap_; }

 private:
  std::uint64_t count_;
  std::uint64_t cap_;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

/// Risk level is zero or large enough that exp(gamma * return) leaves the
/// comfortable double range.
class NumericRangeError : public Error {
 public:
  using Error::Error;
};

/// A history has probability zero, so its value is undefined.
class UnreachableHistory : public Error {
 public:
  using Error::Error;
};

class MissingHindsight : public Error {
 public:
  using Error::Error;
};

class StepRangeError : public Error {
 public:
  using Error::Error;
};

inline double dot(std::span<const double> x, std::span<const double> y) {
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
  return acc;
}

/// base^exp, saturating at UINT64_MAX.
std::uint64_t saturating_pow(std::uint64_t base, std::uint64_t exp);

/// Throws CapExceeded naming `what` when count > cap.
void require_within_cap(const std::string& what, std::uint64_t count, std::uint64_t cap);

}  // namespace bvvi
