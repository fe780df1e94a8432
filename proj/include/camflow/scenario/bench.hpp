#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace camflow::scenario {

enum class Workload : std::uint8_t { flow_check, pipe_roundtrip, message_strip };

std::string_view to_string(Workload w) noexcept;
/// Throws Error{invalid_argument} for an empty or unknown name.
Workload parse_workload(std::string_view name);

/// Per-operation latencies in nanoseconds.
struct LatencyStats {
  std::size_t samples = 0;
  double mean_ns = 0;
  double p50_ns = 0;
  double p90_ns = 0;
  double p99_ns = 0;
  double min_ns = 0;
  double max_ns = 0;
  double ops_per_second = 0;
};

LatencyStats summarize(std::vector<double> samples_ns);

struct BenchRow {
  std::size_t labels = 0;
  LatencyStats stats;
};

struct BenchReport {
  Workload workload = Workload::flow_check;
  std::size_t iterations = 0;
  std::vector<BenchRow> rows;
};

/// Default iteration count: 10^5 for flow-check, 10^4 otherwise.
std::size_t default_iterations(Workload w) noexcept;

/// Runs `iterations` operations per label size. Each label size n gives every
/// entity (or attribute) n secrecy and n integrity tags.
BenchReport run_bench(Workload workload, const std::vector<std::size_t>& label_sizes,
                      std::size_t iterations);

std::string format_report(const BenchReport& report);

}  // namespace camflow::scenario
