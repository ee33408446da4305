#include "plspb/error.hpp"

namespace plspb {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::ZeroPart: return "ZeroPart";
    case Errc::DegenerateSplit: return "DegenerateSplit";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::RankDeficient: return "RankDeficient";
    case Errc::ConstantResponse: return "ConstantResponse";
    case Errc::OneSidedLoading: return "OneSidedLoading";
    case Errc::DegenerateSubcomposition: return "DegenerateSubcomposition";
    case Errc::Collinear: return "Collinear";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::NonBinary: return "NonBinary";
    case Errc::TooFewSamples: return "TooFewSamples";
    case Errc::NotPositiveDefinite: return "NotPositiveDefinite";
    case Errc::Io: return "Io";
    case Errc::Parse: return "Parse";
  }
  return "Unknown";
}

}  // namespace plspb
