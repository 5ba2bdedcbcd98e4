// lidarperf - performance testing toolkit for LiDAR perception pipelines
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace lidarperf {

/// Base class for all lidarperf errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed input file (bad JSON, missing field, wrong type).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Structurally well-formed data that violates a domain invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Out-of-domain argument to an operation.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Regression could not be solved (rank-deficient design).
class FitError : public Error {
 public:
  using Error::Error;
};

/// Statistical test has no usable data (e.g. all paired differences zero).
class DegenerateSampleError : public Error {
 public:
  using Error::Error;
};

/// Queueing formula asked for a steady state that does not exist.
class UnstableQueueError : public Error {
 public:
  using Error::Error;
};

}  // namespace lidarperf
