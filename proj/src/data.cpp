#include "wbpost/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <string_view>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/tools/roots.hpp>

namespace wbpost {

namespace {

std::string row_error(const std::string& what, std::size_t row) {
  return what + " at row " + std::to_string(row);
}

std::string_view trim_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

}  // namespace

Dataset::Dataset(std::vector<Observation> observations)
    : rows_(std::move(observations)) {
  if (rows_.empty()) throw DataError("dataset is empty");
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    const auto& o = rows_[i];
    if (!std::isfinite(o.time)) throw DataError(row_error("non-finite time", i + 1));
    if (o.time <= 0.0) throw DataError(row_error("non-positive time", i + 1));
    if (o.event != 0 && o.event != 1)
      throw DataError(row_error("event not in {0,1}", i + 1));
  }
}

Dataset Dataset::scaled(double factor) const {
  if (!(factor > 0.0) || !std::isfinite(factor))
    throw DataError("scale factor must be positive and finite");
  auto rows = rows_;
  for (auto& o : rows) o.time *= factor;
  return Dataset(std::move(rows));
}

Dataset parse_csv(const std::string& text) {
  std::string_view rest(text);
  // Tolerate a UTF-8 byte order mark.
  if (rest.substr(0, 3) == "\xEF\xBB\xBF") rest.remove_prefix(3);
  if (rest.empty()) throw DataError("empty file");

  auto next_line = [&rest]() {
    const auto pos = rest.find('\n');
    std::string_view line = rest.substr(0, pos);
    rest = pos == std::string_view::npos ? std::string_view{} : rest.substr(pos + 1);
    return trim_cr(line);
  };

  if (next_line() != "time,event")
    throw DataError("header must be exactly 'time,event'");

  std::vector<Observation> rows;
  std::size_t row = 0;
  while (!rest.empty()) {
    const auto line = next_line();
    ++row;
    if (line.empty()) {
      // Only trailing blank lines are allowed.
      if (rest.find_first_not_of("\r\n") == std::string_view::npos) break;
      throw DataError(row_error("blank line", row));
    }
    const auto comma = line.find(',');
    if (comma == std::string_view::npos)
      throw DataError(row_error("missing column", row));
    const auto time_field = line.substr(0, comma);
    const auto event_field = line.substr(comma + 1);
    if (event_field.find(',') != std::string_view::npos)
      throw DataError(row_error("extra column", row));

    double time = 0.0;
    auto [tp, tec] = std::from_chars(time_field.data(),
                                     time_field.data() + time_field.size(), time);
    if (tec != std::errc{} || tp != time_field.data() + time_field.size() ||
        time_field.empty())
      throw DataError(row_error("non-numeric time", row));
    if (!std::isfinite(time)) throw DataError(row_error("non-numeric time", row));
    if (time <= 0.0) throw DataError(row_error("non-positive time", row));

    int event = -1;
    auto [ep, eec] = std::from_chars(event_field.data(),
                                     event_field.data() + event_field.size(), event);
    if (eec != std::errc{} || ep != event_field.data() + event_field.size() ||
        event_field.empty())
      throw DataError(row_error("non-integer event", row));
    if (event != 0 && event != 1) throw DataError(row_error("event not in {0,1}", row));

    rows.push_back({time, event});
  }
  if (rows.empty()) throw DataError("no data rows");
  return Dataset(std::move(rows));
}

Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str());
}

std::string to_csv(const Dataset& d) {
  std::string out = "time,event\n";
  char buf[64];
  for (const auto& o : d.observations()) {
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, o.time);
    out.append(buf, p);
    out += o.event == 1 ? ",1\n" : ",0\n";
  }
  return out;
}

void write_csv(const Dataset& d, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << to_csv(d);
}

DatasetSummary summarize(const Dataset& d) {
  DatasetSummary s;
  s.n = d.size();
  std::vector<double> event_times;
  for (const auto& o : d.observations()) {
    s.x_max = std::max(s.x_max, o.time);
    if (o.event == 1) event_times.push_back(o.time);
  }
  // Sorting fixes the summation order, so the summary is bit-identical under
  // any row permutation.
  std::sort(event_times.begin(), event_times.end());
  s.m = event_times.size();
  // Count distinct values without std::unique, which would scramble the tail
  // that the loop below still reads.
  for (std::size_t i = 0; i < event_times.size(); ++i)
    if (i == 0 || event_times[i] != event_times[i - 1]) ++s.distinct_uncensored;
  const double log_max = std::log(s.x_max);
  for (double t : event_times) {
    const double lx = std::log(t);
    s.sum_delta_log_x += lx;
    // Each term is exactly zero for a tie at the maximum.
    s.h += log_max - lx;
  }
  return s;
}

double censoring_rate_for(double eta, double beta, double censor_fraction) {
  if (!(eta > 0.0) || !(beta > 0.0))
    throw DataError("eta and beta must be positive");
  if (!(censor_fraction >= 0.0) || censor_fraction >= 1.0)
    throw DataError("censor_fraction must lie in [0,1)");
  if (censor_fraction == 0.0) return 0.0;

  // With Y = (eta X)^beta ~ Exp(1) and C ~ Exp(rate):
  //   P(C < X) = 1 - E[exp(-(rate/eta) Y^(1/beta))].
  const double inv_beta = 1.0 / beta;
  boost::math::quadrature::exp_sinh<double> integrator;
  auto censored = [&](double log_c) {
    const double c = std::exp(log_c);
    auto f = [&](double y) { return std::exp(-y - c * std::pow(y, inv_beta)); };
    return 1.0 - integrator.integrate(f, 0.0, std::numeric_limits<double>::infinity());
  };

  double lo = -40.0;
  double hi = 0.0;
  while (censored(hi) < censor_fraction) {
    lo = hi;
    hi += 4.0;
    if (hi > 200.0) throw DataError("censoring rate search diverged");
  }
  auto eps = boost::math::tools::eps_tolerance<double>(50);
  std::uintmax_t iters = 200;
  auto [a, b] = boost::math::tools::toms748_solve(
      [&](double lc) { return censored(lc) - censor_fraction; }, lo, hi, eps, iters);
  return eta * std::exp(0.5 * (a + b));
}

Dataset simulate_dataset(double eta, double beta, std::size_t n,
                         double censor_fraction, std::uint64_t seed) {
  if (n == 0) throw DataError("n must be at least 1");
  const double rate = censoring_rate_for(eta, beta, censor_fraction);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<Observation> rows;
  rows.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    double y = 0.0;
    while (y == 0.0) y = -std::log1p(-unif(rng));
    const double failure = std::pow(y, 1.0 / beta) / eta;
    double censor = std::numeric_limits<double>::infinity();
    if (rate > 0.0) censor = -std::log1p(-unif(rng)) / rate;
    if (failure <= censor)
      rows.push_back({failure, 1});
    else
      rows.push_back({censor, 0});
  }
  return Dataset(std::move(rows));
}

}  // namespace wbpost
