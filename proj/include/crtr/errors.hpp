#pragma once

#include <stdexcept>
#include <string>

namespace crtr {

/// Invalid action for the given state.
struct IllegalActionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Non-finite loss or gradient; the offending step is aborted.
struct TrainingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Enumeration or allocation would exceed a stated capacity.
struct ResourceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Bad experiment configuration (maps to CLI exit code 1).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Correlation requested on rank-degenerate input.
struct UndefinedCorrelationError : std::domain_error {
  using std::domain_error::domain_error;
};

}  // namespace crtr
