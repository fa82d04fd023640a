#pragma once

#include <stdexcept>
#include <string>

namespace softcache {

/// Base class for all library errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed input file. Carries the 1-based line number when known.
struct ParseError : Error {
  ParseError(const std::string& msg, long line_no = 0)
      : Error(line_no > 0 ? msg + " (line " + std::to_string(line_no) + ")" : msg),
        line(line_no) {}
  long line;
};

/// Semantically invalid data (bad ids, duplicate edges, broken invariants).
struct ValidationError : Error {
  using Error::Error;
};

/// Index outside [0, K), [0, N) or [0, M).
struct IndexError : Error {
  using Error::Error;
};

/// Pre/post-condition violation on an API call (capacity, duplicates, regime).
struct ContractError : Error {
  using Error::Error;
};

/// Operation requires the other utility mode (Acceptance vs Satisfaction).
struct ModeError : ContractError {
  using ContractError::ContractError;
};

/// Solver or oracle declines an instance that exceeds its configured limits.
struct Refused : Error {
  using Error::Error;
};

/// Bad CLI configuration (unknown keys, missing files, invalid values).
struct ConfigError : Error {
  using Error::Error;
};

namespace detail {

inline void check_index(long v, long bound, const char* what) {
  if (v < 0 || v >= bound)
    throw IndexError(std::string(what) + " index " + std::to_string(v) +
                     " out of range [0, " + std::to_string(bound) + ")");
}

}  // namespace detail

}  // namespace softcache
