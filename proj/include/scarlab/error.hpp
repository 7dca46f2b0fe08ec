#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace scarlab {

enum class ErrorCode {
  EmptySector,
  Overflow,
  SectorEscape,
  TooLarge,
  NonHermitian,
  BadCut,
  NotSubset,
  SectorMismatch,
  TooFew,
  ZeroState,
  NotInSector,
  DimensionMismatch,
  EmptyBatch,
  NoScars,
  Incompatible,
  Degenerate,
  InvalidArgument,
  Config,
  Io,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  // Configuration and user-input problems, as opposed to numerical failures.
  bool is_user_error() const noexcept {
    return code_ == ErrorCode::Config || code_ == ErrorCode::Io || code_ == ErrorCode::InvalidArgument;
  }

 private:
  ErrorCode code_;
};

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) throw Error(code, what);
}

}  // namespace scarlab
