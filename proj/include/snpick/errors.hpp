#pragma once

#include <stdexcept>
#include <string>

namespace snpick {

// File/format problems: missing files, malformed headers, bad samples.
struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid configuration or arguments (bad dimensions, apertures, seeds...).
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Model fitting failures (rank deficiency, non-monotone data).
struct fit_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Simulator-level failures (area too small, pick outside area).
struct sim_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace snpick
