#pragma once

#include <stdexcept>
#include <string>

namespace pkx {

// Bad user input: out-of-domain arguments, inconsistent specs, unknown
// config keys. CLI maps this to exit code 2.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed file content. Messages carry "path:line" where applicable.
// CLI maps this to exit code 2 as well.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure (e.g. kriging system still singular after the jitter
// retry). CLI maps this to exit code 3.
class SolveError : public std::runtime_error {
 public:
  explicit SolveError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace pkx
