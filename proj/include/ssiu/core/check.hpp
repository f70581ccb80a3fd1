// Copyright 2026 SSIU Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <sstream>
#include <stdexcept>
#include <string>

namespace ssiu {

// Error hierarchy used across the library. Precondition violations throw
// invalid_argument; numerical breakdowns (NaN/Inf, non-convergence) throw
// numerical_error; I/O problems throw io_error.
class numerical_error : public std::runtime_error {
 public:
  explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

class io_error : public std::runtime_error {
 public:
  explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {
[[noreturn]] inline void throw_invalid(const char* cond, const std::string& msg) {
  std::ostringstream os;
  os << "invalid argument: " << msg << " (failed: " << cond << ")";
  throw std::invalid_argument(os.str());
}
}  // namespace detail

}  // namespace ssiu

#define SSIU_CHECK(cond, msg)                          \
  do {                                                 \
    if (!(cond)) {                                     \
      std::ostringstream os_;                          \
      os_ << msg;                                      \
      ::ssiu::detail::throw_invalid(#cond, os_.str()); \
    }                                                  \
  } while (0)
