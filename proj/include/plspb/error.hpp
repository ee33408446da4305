#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace plspb {

enum class Errc {
  InvalidArgument,
  ZeroPart,
  DegenerateSplit,
  DimensionMismatch,
  RankDeficient,
  ConstantResponse,
  OneSidedLoading,
  DegenerateSubcomposition,
  Collinear,
  EmptyInput,
  NonBinary,
  TooFewSamples,
  NotPositiveDefinite,
  Io,
  Parse,
};

std::string_view errc_name(Errc code) noexcept;

/// Every failure raised by the library carries one of the codes above so the
/// CLI can map it to a message and exit status.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace plspb
