#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace admit {

/// Error classes surfaced to users; the names are printed verbatim by the CLI
/// and the live service.
enum class ErrorKind
{
  singular,
  nonfinite_state,
  not_hurwitz,
  no_cqlf,
  uncovered_state,
  unmatchable,
  invalid_config,
  parse_error,
  io_error,
};

std::string_view to_string(ErrorKind kind);

class AdmitError : public std::runtime_error
{
 public:
  AdmitError(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace admit
