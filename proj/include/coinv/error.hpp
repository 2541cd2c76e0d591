#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace coinv {

// Base for every error raised by the library. `kind()` is a stable tag used
// in CLI diagnostics and report failure markers.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define COINV_DEFINE_ERROR(Name)                                    \
  class Name : public Error {                                       \
   public:                                                          \
    explicit Name(const std::string& what) : Error(#Name, what) {}  \
  };

COINV_DEFINE_ERROR(DuplicateId)
COINV_DEFINE_ERROR(IoError)
COINV_DEFINE_ERROR(InvalidGraph)
COINV_DEFINE_ERROR(UnknownNode)
COINV_DEFINE_ERROR(EmptyGraph)
COINV_DEFINE_ERROR(Disconnected)
COINV_DEFINE_ERROR(NodeSetMismatch)
COINV_DEFINE_ERROR(UnpartitionedNode)
COINV_DEFINE_ERROR(FitDiverged)
COINV_DEFINE_ERROR(InsufficientData)
COINV_DEFINE_ERROR(EmptySample)
COINV_DEFINE_ERROR(DegenerateSample)
COINV_DEFINE_ERROR(SampleTooSmall)
COINV_DEFINE_ERROR(MissingBins)
COINV_DEFINE_ERROR(InfeasibleConfig)
COINV_DEFINE_ERROR(ConfigError)

#undef COINV_DEFINE_ERROR

class MalformedRow : public Error {
 public:
  MalformedRow(std::size_t line, const std::string& what)
      : Error("MalformedRow", "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace coinv
