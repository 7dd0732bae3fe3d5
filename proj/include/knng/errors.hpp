#pragma once

#include <stdexcept>
#include <string>

namespace knng {

// Bad input data, file, or configuration. CLI maps this to exit code 2.
struct DataError : std::runtime_error {
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Broken internal invariant. CLI maps this to exit code 3.
struct InternalError : std::logic_error {
  explicit InternalError(const std::string& msg) : std::logic_error(msg) {}
};

}  // namespace knng
