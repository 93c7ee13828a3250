#include "xplain/common.hpp"
#include "xplain/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace xplain {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingFile: return "MissingFile";
    case ErrorCode::TargetColumnAbsent: return "TargetColumnAbsent";
    case ErrorCode::NonBinaryTarget: return "NonBinaryTarget";
    case ErrorCode::UnparseableNumeric: return "UnparseableNumeric";
    case ErrorCode::MalformedCsv: return "MalformedCsv";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::InvalidFraction: return "InvalidFraction";
    case ErrorCode::StratificationImpossible: return "StratificationImpossible";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::DegenerateWeights: return "DegenerateWeights";
    case ErrorCode::EmptyBackground: return "EmptyBackground";
    case ErrorCode::VectorTooShort: return "VectorTooShort";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::EmptyTestSplit: return "EmptyTestSplit";
    case ErrorCode::MissingCell: return "MissingCell";
    case ErrorCode::UnknownTechnique: return "UnknownTechnique";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

std::size_t worker_count() {
  if (const char* env = std::getenv("XPLAIN_THREADS")) {
    char* end = nullptr;
    const long value = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && value > 0) return static_cast<std::size_t>(value);
  }
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body,
                  std::size_t workers) {
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(count, 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto run = [&] {
    while (!failed.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        failed = true;
      }
    }
  };

  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  for (std::size_t t = 1; t < workers; ++t) pool.emplace_back(run);
  run();
  pool.clear();

  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace xplain
