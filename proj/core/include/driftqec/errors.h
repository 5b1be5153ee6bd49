#pragma once

#include <stdexcept>
#include <string>

namespace driftqec {

/// Invalid inputs: bad ranges, malformed files, impossible configurations.
/// The command-line tool maps this to exit code 2.
class ConfigError : public std::invalid_argument {
   public:
    explicit ConfigError(const std::string &what) : std::invalid_argument(what) {
    }
};

/// Inputs were well formed but the computation could not produce a result
/// (degenerate regression, uninformative trace). Exit code 3.
class NumericalError : public std::runtime_error {
   public:
    explicit NumericalError(const std::string &what) : std::runtime_error(what) {
    }
};

}  // namespace driftqec
