#pragma once

#include <stdexcept>
#include <string>

namespace bytespan {

// Raised for malformed or inconsistent input data (files, vocabularies,
// signal tracks). The CLI maps this to exit code 2.
class data_error : public std::runtime_error {
 public:
  explicit data_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace bytespan
