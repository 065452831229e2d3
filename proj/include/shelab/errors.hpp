#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace shelab {

// Invalid user-supplied configuration (bad parameter ranges, malformed config
// files, unknown enum names).  The command-line driver maps this to exit
// code 2.
class config_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A simulated field stopped being finite (NaN or infinity appeared in the
// state).  Carries enough context to identify the offending trajectory.  The
// command-line driver maps this to exit code 3.
class instability_error : public std::runtime_error {
 public:
  instability_error(const std::string& what, std::size_t path_id,
                    std::size_t step)
      : std::runtime_error(what + " (path " + std::to_string(path_id) +
                           ", step " + std::to_string(step) + ")"),
        path_id(path_id),
        step(step) {}

  std::size_t path_id;
  std::size_t step;
};

}  // namespace shelab
