#pragma once

#include <stdexcept>
#include <string>

namespace causalflag {

enum class ErrorCode {
  InvalidArgument = 1,
  NotHermitian,
  NonConvergence,
  Singular,
  NotInGroup,
  OddRank,
  NotUnimodular,
  ModelMismatch,
  NotInChart,
  NotTransverse,
  IllConditioned,
  DegenerateFrame,
  EmptyInput,
  PointsNotInBothCharts,
  NotPairwiseTransverse,
  DegenerateSignature,
  UnknownPreset,
  BallTooLarge,
  NoGap,
  TooFewPoints,
  NoCertificate,
  NotInLevi,
  LimitSetNotNegative,
  NotInDomain,
  BoundaryNotBracketed,
  Parse,
  Io,
};

const char* error_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

}  // namespace causalflag
