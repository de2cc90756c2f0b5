#pragma once

#include <stdexcept>
#include <string>

namespace wfn {

// Error taxonomy mirrors CLI exit codes: config=2, data=3, pipeline=4.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DataError : std::runtime_error {
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

struct PipelineError : std::runtime_error {
  explicit PipelineError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed model files are a data problem.
struct FormatError : DataError {
  explicit FormatError(const std::string& msg) : DataError(msg) {}
};

}  // namespace wfn
