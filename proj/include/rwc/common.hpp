#pragma once

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace rwc {

using std::int64_t;
using std::uint32_t;
using std::uint64_t;

// Dense internal node index in [0, n). Original file labels are kept
// separately as int64 to allow sparse/large label spaces.
using NodeId = std::int32_t;

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input files or invalid user-supplied parameters.
class InputError : public Error {
 public:
  using Error::Error;
};

// A dense-only routine was asked to run above its size cap.
class CapExceededError : public Error {
 public:
  using Error::Error;
};

// Cooperative wall-clock budget exceeded (benchmark row timeouts).
class DeadlineError : public Error {
 public:
  using Error::Error;
};

class Stopwatch {
 public:
  Stopwatch() : start_(clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(clock::now() - start_).count();
  }
  void restart() { start_ = clock::now(); }

 private:
  using clock = std::chrono::steady_clock;
  clock::time_point start_;
};

// Shortest round-trip formatting: parses back to the identical double and is
// reproducible byte-for-byte across runs and worker counts.
inline std::string format_double(double x) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

inline bool is_finite(double x) { return std::isfinite(x); }

}  // namespace rwc
