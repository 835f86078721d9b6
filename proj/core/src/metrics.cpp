#include "sacx/metrics.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace sacx::metrics {

double MetricsRow::metric(int i) const {
  switch (i) {
    case 0: return ret;
    case 1: return success;
    case 2: return episode_len;
    case 3: return expected_v;
    case 4: return entropy;
    case 5: return alpha;
    case 6: return ent_reward_mean;
  }
  throw std::out_of_range("metrics: metric index");
}

CsvWriter::CsvWriter(const std::string& path) : out_(path) {
  if (!out_) {
    throw std::runtime_error("metrics: cannot open '" + path + "' for writing");
  }
  out_ << kCsvHeader << '\n';
  out_.flush();
}

void CsvWriter::write(const MetricsRow& row) {
  out_.precision(10);
  out_ << row.env_steps << ',' << row.seed << ',' << row.ret << ',' << row.success << ','
       << row.episode_len << ',' << row.expected_v << ',' << row.entropy << ',' << row.alpha
       << ',' << row.ent_reward_mean << '\n';
  out_.flush();
}

std::vector<MetricsRow> read_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) {
    throw std::runtime_error("metrics: cannot open '" + path + "'");
  }
  std::string line;
  if (!std::getline(is, line) || line != kCsvHeader) {
    throw std::runtime_error("metrics: '" + path + "' does not start with the expected header");
  }
  std::vector<MetricsRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<double> vals;
    while (std::getline(ss, field, ',')) {
      vals.push_back(std::stod(field));
    }
    if (vals.size() != 9) {
      throw std::runtime_error("metrics: malformed row in '" + path + "'");
    }
    MetricsRow r;
    r.env_steps = static_cast<long>(vals[0]);
    r.seed = static_cast<uint64_t>(vals[1]);
    r.ret = vals[2];
    r.success = vals[3];
    r.episode_len = vals[4];
    r.expected_v = vals[5];
    r.entropy = vals[6];
    r.alpha = vals[7];
    r.ent_reward_mean = vals[8];
    rows.push_back(r);
  }
  return rows;
}

double student_t_quantile(int dof, double p) {
  boost::math::students_t dist(static_cast<double>(dof));
  return boost::math::quantile(dist, p);
}

Ci t_interval(std::vector<double> values, double confidence) {
  const size_t n = values.size();
  if (n < 2) {
    throw std::invalid_argument("metrics: a confidence interval needs at least two values");
  }
  std::sort(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  const double t = student_t_quantile(static_cast<int>(n) - 1, 0.5 + confidence / 2.0);
  const double half = t * sd / std::sqrt(static_cast<double>(n));
  return Ci{mean, mean - half, mean + half};
}

AggregateTable aggregate_ci(const std::vector<std::string>& files, double confidence) {
  if (files.size() < 2) {
    throw std::invalid_argument("metrics: aggregation needs at least two seed files");
  }
  std::vector<std::vector<MetricsRow>> per_file;
  for (const std::string& f : files) {
    auto rows = read_csv(f);
    std::sort(rows.begin(), rows.end(),
              [](const MetricsRow& a, const MetricsRow& b) { return a.env_steps < b.env_steps; });
    per_file.push_back(std::move(rows));
  }
  const size_t n_rows = per_file[0].size();
  for (const auto& rows : per_file) {
    if (rows.size() != n_rows) {
      throw std::invalid_argument("metrics: seed files have different numbers of eval points");
    }
    for (size_t i = 0; i < n_rows; ++i) {
      if (rows[i].env_steps != per_file[0][i].env_steps) {
        throw std::invalid_argument("metrics: seed files have misaligned env_steps grids");
      }
    }
  }

  AggregateTable table;
  table.n_seeds = static_cast<int>(files.size());
  for (size_t i = 0; i < n_rows; ++i) {
    table.env_steps.push_back(per_file[0][i].env_steps);
    for (int m = 0; m < 7; ++m) {
      std::vector<double> vals;
      vals.reserve(per_file.size());
      for (const auto& rows : per_file) {
        vals.push_back(rows[i].metric(m));
      }
      table.metrics[m].push_back(t_interval(std::move(vals), confidence));
    }
  }
  return table;
}

void write_aggregate_csv(const AggregateTable& table, const std::string& path) {
  std::ofstream os(path);
  if (!os) {
    throw std::runtime_error("metrics: cannot open '" + path + "' for writing");
  }
  os << "env_steps,n_seeds";
  for (const char* name : kMetricNames) {
    os << ',' << name << "_mean," << name << "_lo," << name << "_hi";
  }
  os << '\n';
  os.precision(10);
  for (size_t i = 0; i < table.env_steps.size(); ++i) {
    os << table.env_steps[i] << ',' << table.n_seeds;
    for (int m = 0; m < 7; ++m) {
      const Ci& ci = table.metrics[m][i];
      os << ',' << ci.mean << ',' << ci.lo << ',' << ci.hi;
    }
    os << '\n';
  }
}

RewardNormalizer::RewardNormalizer(double clip_lo, double clip_hi, double eps)
    : clip_lo_(clip_lo), clip_hi_(clip_hi), eps_(eps) {
  if (!(clip_lo_ < clip_hi_)) {
    throw std::invalid_argument("metrics: reward clip bounds must satisfy lo < hi");
  }
}

double RewardNormalizer::normalize(double reward) {
  ++count_;
  const double delta = reward - mean_;
  mean_ += delta / static_cast<double>(count_);
  m2_ += delta * (reward - mean_);
  const double sd = std::sqrt(variance());
  const double z = (reward - mean_) / std::max(sd, eps_);
  return std::min(std::max(z, clip_lo_), clip_hi_);
}

}  // namespace sacx::metrics
