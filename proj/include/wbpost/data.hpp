#pragma once

// Right-censored lifetime samples and their sufficient statistics.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace wbpost {

/// One recorded lifetime: `time` is min(failure, censoring), `event` is 1 for
/// an observed failure and 0 for a right-censored unit.
struct Observation {
  double time = 1.0;
  int event = 1;

  friend bool operator==(const Observation&, const Observation&) = default;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-empty sample with finite positive times and 0/1 events. Row order is
/// storage order only.
class Dataset {
 public:
  explicit Dataset(std::vector<Observation> observations);

  const std::vector<Observation>& observations() const { return rows_; }
  std::size_t size() const { return rows_.size(); }

  /// Same events, every time multiplied by `factor`.
  Dataset scaled(double factor) const;

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  std::vector<Observation> rows_;
};

/// Everything the propriety theorem consumes.
struct DatasetSummary {
  std::size_t n = 0;
  std::size_t m = 0;                    // number of events
  std::size_t distinct_uncensored = 0;  // distinct times among events
  double x_max = 0.0;                   // over all rows, censored included
  double sum_delta_log_x = 0.0;         // sum of log(time) over events
  double h = 0.0;                       // m*log(x_max) - sum_delta_log_x

  friend bool operator==(const DatasetSummary&, const DatasetSummary&) = default;
};

/// Parses a `time,event` CSV. Errors carry the 1-based data row number.
Dataset load_csv(const std::filesystem::path& path);
Dataset parse_csv(const std::string& text);

/// Writes the format accepted by load_csv; times use shortest round-trip form.
std::string to_csv(const Dataset& d);
void write_csv(const Dataset& d, const std::filesystem::path& path);

DatasetSummary summarize(const Dataset& d);

/// Exponential censoring rate giving P(C < X) = censor_fraction for
/// X ~ Weibull(eta, beta). Zero when censor_fraction is zero.
double censoring_rate_for(double eta, double beta, double censor_fraction);

/// Weibull(eta, beta) failure times, independently censored by an
/// exponential whose rate comes from censoring_rate_for. Deterministic in seed.
Dataset simulate_dataset(double eta, double beta, std::size_t n,
                         double censor_fraction, std::uint64_t seed);

}  // namespace wbpost
