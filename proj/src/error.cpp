#include "causalflag/error.hpp"

namespace causalflag {

const char* error_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NotHermitian: return "NotHermitian";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::Singular: return "Singular";
    case ErrorCode::NotInGroup: return "NotInGroup";
    case ErrorCode::OddRank: return "OddRank";
    case ErrorCode::NotUnimodular: return "NotUnimodular";
    case ErrorCode::ModelMismatch: return "ModelMismatch";
    case ErrorCode::NotInChart: return "NotInChart";
    case ErrorCode::NotTransverse: return "NotTransverse";
    case ErrorCode::IllConditioned: return "IllConditioned";
    case ErrorCode::DegenerateFrame: return "DegenerateFrame";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::PointsNotInBothCharts: return "PointsNotInBothCharts";
    case ErrorCode::NotPairwiseTransverse: return "NotPairwiseTransverse";
    case ErrorCode::DegenerateSignature: return "DegenerateSignature";
    case ErrorCode::UnknownPreset: return "UnknownPreset";
    case ErrorCode::BallTooLarge: return "BallTooLarge";
    case ErrorCode::NoGap: return "NoGap";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::NoCertificate: return "NoCertificate";
    case ErrorCode::NotInLevi: return "NotInLevi";
    case ErrorCode::LimitSetNotNegative: return "LimitSetNotNegative";
    case ErrorCode::NotInDomain: return "NotInDomain";
    case ErrorCode::BoundaryNotBracketed: return "BoundaryNotBracketed";
    case ErrorCode::Parse: return "Parse";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace causalflag
