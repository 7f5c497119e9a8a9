#pragma once

#include <stdexcept>
#include <string>

namespace mstlab {

// Raised when an experiment configuration fails validation (unknown keys,
// out-of-range values, kind/subcommand mismatch).
struct config_error : std::runtime_error {
  explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Raised when a queried vertex pair lies in different tree components.
struct no_path_error : std::runtime_error {
  explicit no_path_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Raised when an edge slated for removal disconnects the graph; callers that
// care about such edges must branch on this instead of receiving a delta.
struct bridge_error : std::runtime_error {
  explicit bridge_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Raised when a statistic is undefined or degenerate (zero variance,
// single-replicate variance, constant weight law where spread is required).
struct degenerate_statistic_error : std::runtime_error {
  explicit degenerate_statistic_error(const std::string& msg)
      : std::runtime_error(msg) {}
};

}  // namespace mstlab
