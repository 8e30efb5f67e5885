#pragma once

#include <stdexcept>
#include <string>

namespace densnet {

/// Raised for every contract violation in the library (bad input, malformed
/// files, layout mismatches). Messages name the offending value.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace densnet
