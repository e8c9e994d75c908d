#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace deltap {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

// Per-coordinate absolute tolerance used by validation unless overridden.
inline constexpr double kDefaultTol = 1e-9;

enum class ErrorCode {
  DimensionMismatch,
  NotSquare,
  NonFinite,
  NotStochastic,
  NegativeEntry,
  NotIdempotent,
  NotBaseElement,
  InvalidPartition,
  RepOutsideBlock,
  DimensionTooLarge,
  HorizonExceeded,
  NoConvergence,
  HypothesisNotMet,
  NoWindowFound,
  WitnessInvalid,
  InvalidParams,
  FixedPointViolated,
  CannotValidate,
  DegenerateKernel,
  ParseError,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

inline void require_square(const Matrix& m, std::string_view what) {
  if (m.rows() != m.cols()) {
    fail(ErrorCode::NotSquare, std::string(what) + " is " + std::to_string(m.rows()) + "x" +
                                   std::to_string(m.cols()));
  }
}

inline void require_same_dim(Index a, Index b, std::string_view what) {
  if (a != b) {
    fail(ErrorCode::DimensionMismatch,
         std::string(what) + ": " + std::to_string(a) + " vs " + std::to_string(b));
  }
}

}  // namespace deltap
