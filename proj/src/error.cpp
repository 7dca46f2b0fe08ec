#include "scarlab/error.hpp"

namespace scarlab {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptySector: return "EmptySector";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::SectorEscape: return "SectorEscape";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::NonHermitian: return "NonHermitian";
    case ErrorCode::BadCut: return "BadCut";
    case ErrorCode::NotSubset: return "NotSubset";
    case ErrorCode::SectorMismatch: return "SectorMismatch";
    case ErrorCode::TooFew: return "TooFew";
    case ErrorCode::ZeroState: return "ZeroState";
    case ErrorCode::NotInSector: return "NotInSector";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptyBatch: return "EmptyBatch";
    case ErrorCode::NoScars: return "NoScars";
    case ErrorCode::Incompatible: return "Incompatible";
    case ErrorCode::Degenerate: return "Degenerate";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Config: return "Config";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace scarlab
