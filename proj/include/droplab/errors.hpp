#pragma once

#include <stdexcept>
#include <string>

namespace droplab {

/// A numeric argument outside the documented domain of an operation
/// (p outside (1/2, 1), l <= e, scale too coarse, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Invalid invocation of the harness (bad flag, bad config file entry).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// File system failure; the message carries the offending path.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace droplab
