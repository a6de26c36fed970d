#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace gwlp {

using Complex = std::complex<double>;
__extension__ using Int128 = __int128;
__extension__ using UInt128 = unsigned __int128;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Precondition violated by a caller-supplied value.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A dense materialization or sweep would exceed its configured cap.
class ResourceLimit : public Error {
 public:
  using Error::Error;
};

/// Malformed design or spectrum text. `line()` is 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A J-characteristic vector that does not invert to a nonnegative integer design.
class InconsistentSpectrum : public Error {
 public:
  using Error::Error;
};

struct Tolerances {
  double internal = 1e-9;
  double cross_route = 1e-8;
};

/// Caps on dense work. Every operation that materializes something of size
/// proportional to s (or s^2) checks one of these first.
struct Limits {
  std::uint64_t dense_table = std::uint64_t{1} << 12;
  std::uint64_t factorized = std::uint64_t{1} << 24;
  std::uint64_t densify = std::uint64_t{1} << 20;
  std::uint64_t kron_entries = std::uint64_t{1} << 24;
  std::uint64_t projector = std::uint64_t{1} << 12;
  std::size_t assignments = 256;
};

namespace detail {

inline std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b, const char* what) {
  std::uint64_t r = 0;
  if (__builtin_mul_overflow(a, b, &r) || r > (std::uint64_t{1} << 62)) {
    throw ResourceLimit(std::string(what) + ": size overflows 2^62");
  }
  return r;
}

}  // namespace detail

}  // namespace gwlp
