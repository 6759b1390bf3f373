#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "qclab/config_io.hpp"
#include "qclab/twistor.hpp"

// Per-point pipelines shared by the command-line tool and the acceptance suite.

namespace qclab {

inline constexpr int kSchemaVersion = 1;

struct RunSpec {
  QCChart chart;
  std::vector<std::vector<double>> points;
  int fiber = 4;            // fibre points per base point
  std::uint64_t seed = 1;   // fibre rotation and sampled pairs
  Settings settings{};
  int threads = 1;
  bool oracle = false;      // run the direct twistor oracle where applicable
};

// QCLAB_THREADS if set to a positive integer, else 1.
int default_threads();

// out[i] = fn(i); work is spread over up to `threads` workers but the result
// order is the index order.
template <class R, class F>
std::vector<R> parallel_map(int count, int threads, F fn) {
  std::vector<R> out(static_cast<std::size_t>(count));
  const int workers = std::max(1, std::min(threads, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) out[i] = fn(i);
    });
  }
  for (auto& t : pool) t.join();
  return out;
}

struct InvariantRow {
  int index = 0;
  std::vector<double> u;
  std::string error;  // empty when the pipeline succeeded
  double T0_norm = 0.0;
  double U_norm = 0.0;
  double scal = 0.0;
  double tau = 0.0;
  double ricci_residual = 0.0;
  double alpha_residual = 0.0;
  double connection_residual = 0.0;  // max of the connection-layer residuals
  double torsion_residual = 0.0;     // max of the structural torsion identities
};
std::vector<InvariantRow> run_invariants(const RunSpec& spec);

struct NormalityRow {
  int index = 0;
  int point = 0;
  int fiber = 0;
  std::vector<double> u;
  VTriple x{};
  std::string error;
  double T0_norm = 0.0;
  double U_norm = 0.0;
  double scal = 0.0;
  double tau = 0.0;
  double residual = 0.0;
  double mte = 0.0;  // max of the MTE residuals
  Verdict verdict = Verdict::inconclusive;
  Signature signature;
  std::optional<double> oracle_deviation;
};
std::vector<NormalityRow> run_normality(const RunSpec& spec);
// normal if every row is normal, not_normal if any row is, otherwise inconclusive.
Verdict summary_verdict(const std::vector<NormalityRow>& rows);

enum class CheckStatus { pass, fail, skipped };
std::string_view check_status_name(CheckStatus s);

struct CheckResult {
  std::string name;
  double value = 0.0;      // max over the points where the check ran
  double tolerance = 0.0;
  int evaluated = 0;       // points (or twistor points) where it ran
  CheckStatus status = CheckStatus::skipped;
};

struct IdentityReport {
  std::vector<CheckResult> checks;
  std::vector<std::string> errors;  // "point i: Kind: message"
  bool ok() const;
};
IdentityReport run_identities(const RunSpec& spec);

}  // namespace qclab
