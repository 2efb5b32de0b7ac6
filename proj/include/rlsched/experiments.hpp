#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rlsched/env.hpp"
#include "rlsched/evaluation.hpp"
#include "rlsched/ppo.hpp"

namespace rlsched {

inline constexpr const char* kVersion = "rlsched 1.0.0";

// Minimal CSV table: header row plus string cells.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Throws FormatError when the column is absent.
  std::size_t column(const std::string& name) const;
  bool has_column(const std::string& name) const;
  std::vector<double> numbers(const std::string& name) const;
};

CsvTable read_csv(std::istream& in);
CsvTable read_csv(const std::filesystem::path& path);
void write_csv(const CsvTable& table, std::ostream& out);
void write_csv(const CsvTable& table, const std::filesystem::path& path);

// Shortest decimal text that round-trips the double.
std::string format_number(double v);

CsvTable curve_table(const std::vector<CurvePoint>& curve);

struct CurveBand {
  std::vector<double> step, mean, std;
  std::vector<std::size_t> n;
};

// Mean and sample std across seeds at each logged step.
CurveBand aggregate_curves(const std::vector<std::vector<CurvePoint>>& curves);
CsvTable band_table(const CurveBand& band);

struct TrainingRequest {
  EnvConfig env;
  PPOConfig ppo;
  std::vector<std::uint64_t> seeds;
  std::filesystem::path out_dir = ".";
  std::string tag = "run";
  std::size_t jobs = 1;  // seeds trained concurrently
};

struct SeedOutcome {
  std::uint64_t seed = 0;
  std::optional<std::filesystem::path> curve_file;
  std::optional<std::filesystem::path> params_file;
  std::string error;  // empty on success
  std::vector<CurvePoint> curve;
};

struct TrainingSummary {
  std::vector<SeedOutcome> seeds;
  std::optional<std::filesystem::path> aggregate_file;
  std::filesystem::path manifest_file;
};

// Trains one agent per seed, writing <tag>_seed<k>_curve.csv,
// <tag>_seed<k>.params, <tag>_aggregate.csv and <tag>_manifest.json.
// A failing seed is recorded and does not stop the batch.
TrainingSummary run_training(const TrainingRequest& request);

ParamsMetadata params_metadata(const EnvConfig& config);

void write_eval_reports(const std::vector<EvalReport>& reports, const std::filesystem::path& path);
void write_pairwise(const std::vector<PairwiseTest>& tests, const std::filesystem::path& path);
void write_transfer(const std::vector<TransferRow>& rows, const std::filesystem::path& path);

struct TimingSample {
  std::string variant;
  int scenario = 0;
  std::int64_t horizon = 0;
  std::size_t steps = 0;
  std::size_t input_width = 0;
  std::size_t parameters = 0;
  double seconds = 0.0;
};

// Wall-clock seconds spent in train() for the given configuration.
TimingSample measure_training_time(const EnvConfig& env, const PPOConfig& ppo,
                                   std::uint64_t seed);

struct TimingComparison {
  std::vector<TimingSample> samples;
  double compact_ratio = 0.0;  // median time at H=60 over median at H=20
  double image_ratio = 0.0;
  bool ordinal_claim_holds = false;  // compact_ratio < image_ratio
};

TimingComparison compare_horizon_scaling(int scenario_id, std::size_t steps,
                                         std::size_t repetitions, std::uint64_t seed);

}  // namespace rlsched
