#ifndef CLINASSERT_BENCH_HPP
#define CLINASSERT_BENCH_HPP

#include <chrono>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <numeric>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "clinassert/error.hpp"
#include "clinassert/evaluation.hpp"

namespace clinassert {

inline constexpr std::size_t kMinBenchRepetitions = 3;

inline double seconds_per_100_rows(double seconds, std::size_t rows) {
  if (rows == 0) throw Error("latency normalization needs at least one row");
  return seconds * 100.0 / static_cast<double>(rows);
}

/// CPU model and logical core count, e.g. "Intel(R) Xeon(R) CPU @ 2.20GHz x8".
inline std::string hardware_descriptor() {
  std::string model = "unknown cpu";
  std::ifstream cpuinfo("/proc/cpuinfo");
  std::string line;
  while (std::getline(cpuinfo, line)) {
    if (line.rfind("model name", 0) == 0) {
      if (auto colon = line.find(':'); colon != std::string::npos) model = normalize_space(line.substr(colon + 1));
      break;
    }
  }
  return model + " x" + std::to_string(std::thread::hardware_concurrency());
}

/// Mean and sample standard deviation of per-run wall times, normalized to
/// seconds per 100 rows.
inline LatencyStats summarize_latency(std::span<const double> run_seconds, std::size_t rows, bool parallel = false) {
  if (run_seconds.size() < kMinBenchRepetitions)
    throw ConfigError("benchmark needs at least " + std::to_string(kMinBenchRepetitions) + " repetitions");
  std::vector<double> normalized;
  for (double s : run_seconds) normalized.push_back(seconds_per_100_rows(s, rows));
  const double n = static_cast<double>(normalized.size());
  const double mean = std::accumulate(normalized.begin(), normalized.end(), 0.0) / n;
  double sq = 0.0;
  for (double v : normalized) sq += (v - mean) * (v - mean);
  LatencyStats stats;
  stats.mean_seconds_per_100 = mean;
  stats.stddev_seconds_per_100 = std::sqrt(sq / (n - 1.0));
  stats.rows = rows;
  stats.repetitions = run_seconds.size();
  stats.parallel = parallel;
  stats.hardware = hardware_descriptor();
  return stats;
}

/// Times `run` (which returns the number of rows it processed) once for
/// warm-up and then `repetitions` times.
template <class Runner, class Clock = std::chrono::steady_clock>
LatencyStats bench(Runner&& run, std::size_t repetitions, bool parallel = false) {
  if (repetitions < kMinBenchRepetitions)
    throw ConfigError("benchmark needs at least " + std::to_string(kMinBenchRepetitions) + " repetitions");
  const std::size_t rows = run();
  if (rows == 0) throw Error("benchmark corpus is empty");
  std::vector<double> seconds;
  for (std::size_t i = 0; i < repetitions; ++i) {
    const auto start = Clock::now();
    const std::size_t n = run();
    const auto stop = Clock::now();
    if (n != rows) throw Error("benchmark runner processed a different number of rows between runs");
    seconds.push_back(std::chrono::duration<double>(stop - start).count());
  }
  return summarize_latency(seconds, rows, parallel);
}

}  // namespace clinassert

#endif  // CLINASSERT_BENCH_HPP
