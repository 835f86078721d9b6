#pragma once

#include <array>
#include <fstream>
#include <string>
#include <vector>

namespace sacx::metrics {

inline constexpr const char* kCsvHeader =
    "env_steps,seed,return,success,episode_len,expected_v,entropy,alpha,ent_reward_mean";

inline constexpr std::array<const char*, 7> kMetricNames = {
    "return", "success", "episode_len", "expected_v", "entropy", "alpha", "ent_reward_mean"};

struct MetricsRow {
  long env_steps = 0;
  uint64_t seed = 0;
  double ret = 0.0;
  double success = 0.0;
  double episode_len = 0.0;
  double expected_v = 0.0;
  double entropy = 0.0;
  double alpha = 0.0;
  double ent_reward_mean = 0.0;

  double metric(int i) const;
};

// Writes the pinned schema; flushes after every row so an aborted run still
// leaves a usable partial file.
class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path);
  void write(const MetricsRow& row);

 private:
  std::ofstream out_;
};

std::vector<MetricsRow> read_csv(const std::string& path);

// Two-sided Student-t quantile, P(T <= x) = p.
double student_t_quantile(int dof, double p);

struct Ci {
  double mean = 0.0, lo = 0.0, hi = 0.0;
};

// Student-t interval on the mean. Values are sorted before the reduction so
// the result is invariant to input order.
Ci t_interval(std::vector<double> values, double confidence);

struct AggregateTable {
  std::vector<long> env_steps;
  int n_seeds = 0;
  // metrics[m][row] follows kMetricNames.
  std::array<std::vector<Ci>, 7> metrics;
};

// Per-step mean and confidence band across per-seed metric files. Requires
// at least two files with identical env_steps grids.
AggregateTable aggregate_ci(const std::vector<std::string>& files, double confidence = 0.95);

void write_aggregate_csv(const AggregateTable& table, const std::string& path);

// Streaming standardization of rewards: clip((r - mean) / max(std, eps), lo, hi),
// where mean/std are running statistics updated with every observed reward
// before it is transformed.
class RewardNormalizer {
 public:
  RewardNormalizer(double clip_lo, double clip_hi, double eps = 1e-8);
  double normalize(double reward);

  long count() const { return count_; }
  double mean() const { return mean_; }
  double variance() const { return count_ > 0 ? m2_ / static_cast<double>(count_) : 0.0; }

 private:
  double clip_lo_, clip_hi_, eps_;
  long count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

}  // namespace sacx::metrics
