#pragma once

#include <stdexcept>
#include <string>

namespace evtest {

/// Raised for domain errors: invalid parameters, malformed data, violated
/// preconditions. The CLI maps it to exit code 1.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace evtest
