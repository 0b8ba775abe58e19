#ifndef HAMFLOW_ERRORS_HPP
#define HAMFLOW_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hamflow {

enum class ErrorCode {
  Parse,
  UnknownIdentifier,
  Domain,
  ChartMismatch,
  NonZeroDt,
  NonIntegrable,
  SingularMassMatrix,
  NewtonDivergence,
  NonFiniteState,
  Validation,
  UnknownCheck,
  Io,
};

// Single exception type for the whole library. `offset` is a byte offset
// into the source text for parse-stage errors; `detail` carries the
// offending sub-expression for domain errors.
class Error : public std::runtime_error {
 public:
  static constexpr std::size_t no_offset = static_cast<std::size_t>(-1);

  Error(ErrorCode code, const std::string& message,
        std::size_t offset = no_offset, std::string detail = {})
      : std::runtime_error(message),
        code_(code),
        offset_(offset),
        detail_(std::move(detail)) {}

  ErrorCode code() const noexcept { return code_; }
  std::size_t offset() const noexcept { return offset_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::size_t offset_;
  std::string detail_;
};

}  // namespace hamflow

#endif  // HAMFLOW_ERRORS_HPP
