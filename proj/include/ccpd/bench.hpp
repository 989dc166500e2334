#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ccpd/doa.hpp"
#include "ccpd/geometry.hpp"
#include "ccpd/jevd.hpp"
#include "ccpd/localization.hpp"
#include "ccpd/scene.hpp"

namespace ccpd::bench {

enum class Preset { case1, case2, custom };

Preset parse_preset(std::string_view name);
std::string_view to_string(Preset p);

struct TransmitConfig {
  int rows = 4;
  int cols = 4;
  Vec3 center = Vec3::Zero();
};

struct ReceiverConfig {
  Vec3 center = Vec3::Zero();
  CoprimeAxisSpec axis_x;
  CoprimeAxisSpec axis_y;
};

/// Fully resolved Monte Carlo configuration. Lengths are in wavelengths.
struct BenchConfig {
  Preset preset = Preset::case1;
  TransmitConfig transmit;
  std::vector<ReceiverConfig> receivers;
  std::size_t targets = 10;   // R
  std::size_t pulses = 15;    // K
  std::size_t samples = 64;   // T
  Box box;
  std::vector<double> snr_grid;
  std::size_t trials = 200;
  std::uint64_t seed = 1;
  std::string output = "results.csv";

  std::size_t transmitters() const { return static_cast<std::size_t>(transmit.rows * transmit.cols); }
  /// Throws ConfigError naming the violated invariant.
  void validate() const;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

BenchConfig preset_config(Preset p);

/// JSON document; see README for the schema. Unknown keys are rejected.
BenchConfig parse_config(std::string_view text);
BenchConfig load_config(const std::filesystem::path& path);

/// Comma-separated dB values; "inf" requests noiseless data.
std::vector<double> parse_snr_list(std::string_view text);

struct TrialTimes {
  StageTimes solve;
  double doa_ms = 0.0;
  double localize_ms = 0.0;
};

struct TrialRecord {
  double snr_db = 0.0;
  long trial = 0;
  double mae_deg = 0.0;
  double rmse_lambda = 0.0;
  double cpu_ms = 0.0;
  TrialTimes stages;
  double offdiag_residual = 0.0;
  std::size_t matrices_used = 0;
  bool failed = false;
  std::string failure_reason;
};

struct AggregateRow {
  double snr_db = 0.0;
  double mae_deg = 0.0;      // mean over non-failed trials
  double rmse_lambda = 0.0;  // root of the mean squared per-trial RMSE
  double cpu_ms = 0.0;
  double offdiag_residual = 0.0;
  double failure_rate = 0.0;
  std::size_t completed = 0;
};

struct SweepResult {
  std::vector<TrialRecord> records;
  std::vector<AggregateRow> aggregates;
};

/// One Monte Carlo trial. Scene, waveforms and RCS depend only on
/// trial_seed, so every SNR of a given trial sees the same scene. Solver
/// failures are recorded in the result, never thrown.
TrialRecord run_trial(const BenchConfig& config, double snr_db, std::uint64_t trial_seed,
                      long trial_index = 0);

/// Seed of trial `index` derived from the master seed.
std::uint64_t trial_seed(std::uint64_t master, std::size_t index);

/// trials x |snr_grid| trials, run concurrently; records sorted by
/// (snr, trial). `threads` = 0 uses the OpenMP default.
SweepResult run_sweep(const BenchConfig& config, int threads = 0);

std::vector<AggregateRow> aggregate(std::span<const TrialRecord> records);

/// Mean great-circle error in degrees over all (array, target) pairs; the
/// estimate for column r is scored against truth column matching.truth_of[r].
double compute_mae(const std::vector<std::vector<DoaEstimate>>& doas,
                   const std::vector<std::vector<Direction>>& truth, const Matching& matching);

/// sqrt(mean_r |est_r - truth_{matching(r)}|^2)
double compute_rmse(std::span<const Vec3> positions, std::span<const Vec3> truth,
                    const Matching& matching);

inline constexpr std::string_view kCsvHeader =
    "kind,snr_db,trial,mae_deg,rmse_lambda,cpu_ms,offdiag_residual,failed";

struct CsvRow {
  std::string kind;  // "trial" or "agg"
  double snr_db = 0.0;
  long trial = 0;
  double mae_deg = 0.0;
  double rmse_lambda = 0.0;
  double cpu_ms = 0.0;
  double offdiag_residual = 0.0;
  double failed = 0.0;  // 0/1 per trial, failure rate for agg rows
};

std::vector<CsvRow> to_csv_rows(std::span<const TrialRecord> records,
                                std::span<const AggregateRow> aggregates);
std::string format_csv(std::span<const CsvRow> rows);
std::vector<CsvRow> parse_csv(std::string_view text);

/// Throws std::runtime_error on IO failure.
void write_csv(std::span<const TrialRecord> records, std::span<const AggregateRow> aggregates,
               const std::filesystem::path& path);
std::vector<CsvRow> read_csv(const std::filesystem::path& path);

/// Shortest round-trip decimal representation, locale independent.
std::string format_double(double x);

}  // namespace ccpd::bench
