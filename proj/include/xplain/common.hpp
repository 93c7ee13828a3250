#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace xplain {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

enum class ErrorCode {
  MissingFile,
  TargetColumnAbsent,
  NonBinaryTarget,
  UnparseableNumeric,
  MalformedCsv,
  InvalidConfig,
  InvalidFraction,
  StratificationImpossible,
  DimensionMismatch,
  NonFiniteInput,
  NonConvergence,
  DegenerateWeights,
  EmptyBackground,
  VectorTooShort,
  LengthMismatch,
  EmptyTestSplit,
  MissingCell,
  UnknownTechnique,
  IndexOutOfRange,
};

std::string_view to_string(ErrorCode code);

// All library failures surface as this exception; `code()` identifies the
// contract that was violated.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Deterministic generator seeded from a base seed plus a stream of indices,
// e.g. (seed, instance) or (seed, trial). Distinct index tuples give
// independent streams regardless of evaluation order.
template <typename... Ix>
std::mt19937_64 derived_rng(std::uint64_t seed, Ix... indices) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(indices)...};
  return std::mt19937_64(seq);
}

template <typename... Ix>
std::uint64_t derived_seed(std::uint64_t seed, Ix... indices) {
  auto rng = derived_rng(seed, indices...);
  return rng();
}

}  // namespace xplain
