#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qclab {

enum class ErrorKind {
  SizeMismatch,
  SyntaxError,
  UnknownIdentifier,
  DimensionExceeded,
  EvalDomainError,
  DegenerateCoframe,
  DegenerateLevi,
  NotQuaternionic,
  NotPositive,
  BiquardConditionFail,
  IllConditioned,
  QPreservationFail,
  TorsionStructureFail,
  StepTooSmall,
  NonPositiveFactor,
  UnsupportedDimension,
  SchemaError,
  IoError,
};

std::string_view error_kind_name(ErrorKind k);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Parse and schema errors carry a byte offset (or line number for config files).
class LocatedError : public Error {
 public:
  LocatedError(ErrorKind kind, const std::string& what, std::size_t location)
      : Error(kind, what), location_(location) {}
  std::size_t location() const noexcept { return location_; }

 private:
  std::size_t location_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace qclab
