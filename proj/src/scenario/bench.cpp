#include "camflow/scenario/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "camflow/error.hpp"
#include "camflow/mw/middleware.hpp"
#include "camflow/sim/kernel.hpp"

namespace camflow::scenario {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ns(Clock::time_point start) {
  return std::chrono::duration<double, std::nano>(Clock::now() - start).count();
}

SecurityContext context_of(const std::vector<Tag>& secrecy, const std::vector<Tag>& integrity) {
  return SecurityContext(Label(TagKind::secrecy, secrecy), Label(TagKind::integrity, integrity));
}

struct Tags {
  std::vector<Tag> secrecy;
  std::vector<Tag> integrity;
};

Tags declare_tags(NamingAuthority& authority, std::size_t n) {
  Tags t;
  for (std::size_t i = 0; i < n; ++i) {
    t.secrecy.push_back(authority.declare(TagKind::secrecy, "s" + std::to_string(i)));
    t.integrity.push_back(authority.declare(TagKind::integrity, "i" + std::to_string(i)));
  }
  return t;
}

// Single checks are too short to time one by one, so each sample covers a
// batch and is divided back down.
std::vector<double> bench_flow_check(std::size_t n, std::size_t iterations) {
  constexpr std::size_t kBatch = 100;
  std::vector<Tag> s, in;
  for (std::size_t i = 0; i < n; ++i) {
    s.push_back(Tag{i + 1, TagKind::secrecy});
    in.push_back(Tag{n + i + 1, TagKind::integrity});
  }
  const SecurityContext source = context_of(s, in);
  const SecurityContext sink = context_of(s, in);
  std::vector<double> samples;
  std::size_t batches = std::max<std::size_t>(1, iterations / kBatch);
  samples.reserve(batches);
  std::size_t allowed = 0;
  for (std::size_t b = 0; b < batches; ++b) {
    auto start = Clock::now();
    for (std::size_t i = 0; i < kBatch; ++i) allowed += can_flow(source, sink).allowed;
    samples.push_back(elapsed_ns(start) / kBatch);
  }
  if (allowed != batches * kBatch) throw Error(Errc::invalid_argument, "flow check bench denied");
  return samples;
}

std::vector<double> bench_pipe_roundtrip(std::size_t n, std::size_t iterations) {
  NamingAuthority authority;
  audit::AuditLog log;
  sim::Kernel kernel(authority, log);
  kernel.add_machine("bench");
  Tags tags = declare_tags(authority, n);
  sim::BootSpec spec;
  spec.context = context_of(tags.secrecy, tags.integrity);
  spec.name = "writer";
  auto writer = kernel.boot_process("bench", spec);
  spec.name = "reader";
  auto reader = kernel.boot_process("bench", spec);
  auto pipe = kernel.create_object(writer, sim::EntityClass::pipe, "pipe");
  const std::string chunk(64, 'x');

  std::vector<double> samples;
  samples.reserve(iterations);
  for (std::size_t i = 0; i < iterations; ++i) {
    auto start = Clock::now();
    kernel.write(writer, pipe, chunk);
    kernel.read(reader, pipe);
    samples.push_back(elapsed_ns(start));
  }
  return samples;
}

std::vector<double> bench_message_strip(std::size_t n, std::size_t iterations) {
  NamingAuthority authority;
  audit::AuditLog log;
  sim::Kernel kernel(authority, log);
  kernel.add_machine("a");
  kernel.add_machine("b");
  Tags tags = declare_tags(authority, n);
  Tag extra = authority.declare(TagKind::secrecy, "extra");
  SecurityContext ctx = context_of(tags.secrecy, tags.integrity);

  sim::BootSpec spec;
  spec.trusted = true;
  spec.name = "proxy-a";
  auto proxy_a = kernel.boot_process("a", spec);
  spec.name = "proxy-b";
  auto proxy_b = kernel.boot_process("b", spec);
  spec.trusted = false;
  spec.context = ctx;
  spec.name = "sender";
  auto sender = kernel.boot_process("a", spec);
  spec.name = "receiver";
  auto receiver = kernel.boot_process("b", spec);

  std::vector<Tag> claimed = tags.secrecy;
  claimed.insert(claimed.end(), tags.integrity.begin(), tags.integrity.end());
  mw::Middleware middleware(kernel);
  middleware.register_endpoint(sender, proxy_a, {sender, claimed, {}});
  middleware.register_endpoint(receiver, proxy_b, {receiver, claimed, {}});

  SecurityContext secret = ctx;
  secret.secrecy.insert(extra);
  middleware.define_schema(mw::MessageSchema(
      "record", {{"id", std::nullopt}, {"shared", ctx}, {"secret", secret}, {"note", std::nullopt}}));
  auto conn = middleware.connect(sender, receiver);
  if (conn.status != mw::ConnectionStatus::established) {
    throw Error(Errc::not_established, "bench connection refused");
  }
  const auto msg = mw::make_message(middleware.schema("record"), {{"id", "42"},
                                                                  {"shared", "payload"},
                                                                  {"secret", "hidden"},
                                                                  {"note", "n"}});
  std::vector<double> samples;
  samples.reserve(iterations);
  for (std::size_t i = 0; i < iterations; ++i) {
    auto start = Clock::now();
    middleware.send(sender, conn.id, msg);
    middleware.receive(receiver, conn.id);
    samples.push_back(elapsed_ns(start));
  }
  return samples;
}

double percentile(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) return 0;
  double rank = p * static_cast<double>(sorted.size() - 1);
  auto lo = static_cast<std::size_t>(std::floor(rank));
  auto hi = static_cast<std::size_t>(std::ceil(rank));
  double frac = rank - static_cast<double>(lo);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

}  // namespace

std::string_view to_string(Workload w) noexcept {
  switch (w) {
    case Workload::flow_check: return "flow-check";
    case Workload::pipe_roundtrip: return "pipe-roundtrip";
    case Workload::message_strip: return "message-strip";
  }
  return "flow-check";
}

Workload parse_workload(std::string_view name) {
  if (name == "flow-check") return Workload::flow_check;
  if (name == "pipe-roundtrip") return Workload::pipe_roundtrip;
  if (name == "message-strip") return Workload::message_strip;
  if (name.empty()) throw Error(Errc::invalid_argument, "missing workload name");
  throw Error(Errc::invalid_argument, "unknown workload '" + std::string(name) + "'");
}

std::size_t default_iterations(Workload w) noexcept {
  return w == Workload::flow_check ? 100000 : 10000;
}

LatencyStats summarize(std::vector<double> samples) {
  LatencyStats s;
  s.samples = samples.size();
  if (samples.empty()) return s;
  std::sort(samples.begin(), samples.end());
  s.mean_ns = std::accumulate(samples.begin(), samples.end(), 0.0) /
              static_cast<double>(samples.size());
  s.p50_ns = percentile(samples, 0.50);
  s.p90_ns = percentile(samples, 0.90);
  s.p99_ns = percentile(samples, 0.99);
  s.min_ns = samples.front();
  s.max_ns = samples.back();
  s.ops_per_second = s.mean_ns > 0 ? 1e9 / s.mean_ns : 0;
  return s;
}

BenchReport run_bench(Workload workload, const std::vector<std::size_t>& label_sizes,
                      std::size_t iterations) {
  if (iterations == 0) throw Error(Errc::invalid_argument, "iterations must be positive");
  BenchReport report{workload, iterations, {}};
  for (std::size_t n : label_sizes) {
    std::vector<double> samples;
    switch (workload) {
      case Workload::flow_check: samples = bench_flow_check(n, iterations); break;
      case Workload::pipe_roundtrip: samples = bench_pipe_roundtrip(n, iterations); break;
      case Workload::message_strip: samples = bench_message_strip(n, iterations); break;
    }
    report.rows.push_back(BenchRow{n, summarize(std::move(samples))});
  }
  return report;
}

std::string format_report(const BenchReport& report) {
  std::string out = "workload: " + std::string(to_string(report.workload)) + "\n";
  out += "iterations: " + std::to_string(report.iterations) + "\n";
  char line[160];
  std::snprintf(line, sizeof line, "%8s %12s %12s %12s %12s %14s\n", "labels", "mean_ns", "p50_ns",
                "p90_ns", "p99_ns", "ops_per_s");
  out += line;
  for (const auto& row : report.rows) {
    const auto& s = row.stats;
    std::snprintf(line, sizeof line, "%8zu %12.1f %12.1f %12.1f %12.1f %14.0f\n", row.labels,
                  s.mean_ns, s.p50_ns, s.p90_ns, s.p99_ns, s.ops_per_second);
    out += line;
  }
  if (report.rows.size() >= 2 && report.rows.front().stats.mean_ns > 0) {
    const auto& base = report.rows.front();
    for (std::size_t i = 1; i < report.rows.size(); ++i) {
      std::snprintf(line, sizeof line, "overhead %zu vs %zu labels: %+.1f%%\n",
                    report.rows[i].labels, base.labels,
                    100.0 * (report.rows[i].stats.mean_ns / base.stats.mean_ns - 1.0));
      out += line;
    }
  }
  return out;
}

}  // namespace camflow::scenario
