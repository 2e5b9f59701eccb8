#include "nfscale/series.hpp"

#include <algorithm>
#include <cmath>

#include "nfscale/error.hpp"

namespace nfscale {

ThroughputSeries::ThroughputSeries(std::vector<ChainId> chains, std::size_t seconds)
    : chains_(std::move(chains)), seconds_(seconds), bytes_(chains_.size(), std::vector<std::uint64_t>(seconds)) {}

std::size_t ThroughputSeries::index_of(const ChainId& chain) const {
  const auto it = std::find(chains_.begin(), chains_.end(), chain);
  if (it == chains_.end()) throw Error(Errc::UnknownChain, "series has no chain " + chain.to_string());
  return static_cast<std::size_t>(it - chains_.begin());
}

void ThroughputSeries::add(const ChainId& chain, double time, std::uint64_t bytes) {
  if (time < 0.0) throw Error(Errc::InvalidArgument, "negative time");
  const auto second = static_cast<std::size_t>(std::floor(time));
  auto& row = bytes_[index_of(chain)];
  if (second >= seconds_) {
    seconds_ = second + 1;
    for (auto& r : bytes_) r.resize(seconds_);
  }
  row[second] += bytes;
}

std::uint64_t ThroughputSeries::at(const ChainId& chain, std::size_t second) const {
  const auto& row = bytes_[index_of(chain)];
  return second < row.size() ? row[second] : 0;
}

std::uint64_t ThroughputSeries::total(std::size_t second) const {
  std::uint64_t sum = 0;
  for (const auto& row : bytes_) sum += second < row.size() ? row[second] : 0;
  return sum;
}

double ThroughputSeries::share(const ChainId& chain, std::size_t from, std::size_t to) const {
  const auto all = shares(from, to);
  const auto it = all.find(chain);
  if (it == all.end()) throw Error(Errc::UnknownChain, "series has no chain " + chain.to_string());
  return it->second;
}

std::map<ChainId, double> ThroughputSeries::shares(std::size_t from, std::size_t to) const {
  to = std::min(to, seconds_);
  std::map<ChainId, std::uint64_t> sums;
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < chains_.size(); ++i) {
    auto& s = sums[chains_[i]];
    for (std::size_t t = from; t < to; ++t) s += bytes_[i][t];
    total += s;
  }
  std::map<ChainId, double> out;
  for (const auto& [c, s] : sums) out[c] = total ? static_cast<double>(s) / static_cast<double>(total) : 0.0;
  return out;
}

std::string ThroughputSeries::to_csv() const {
  std::string out = "time_s,chain_fwd_tag,bytes\n";
  for (std::size_t t = 0; t < seconds_; ++t) {
    for (std::size_t i = 0; i < chains_.size(); ++i) {
      out += std::to_string(t);
      out += ',';
      out += std::to_string(chains_[i].forward_tag());
      out += ',';
      out += std::to_string(bytes_[i][t]);
      out += '\n';
    }
  }
  return out;
}

namespace {

std::size_t horizon_of(const ThroughputSeries& series, double horizon_s) {
  if (horizon_s <= 0.0) return series.seconds();
  return std::min(series.seconds(), static_cast<std::size_t>(std::ceil(horizon_s)));
}

std::size_t first_bucket(double event_time) {
  if (event_time < 0.0) throw Error(Errc::InvalidArgument, "negative event time");
  return static_cast<std::size_t>(std::floor(event_time));
}

}  // namespace

double measure_convergence(const ThroughputSeries& series, double event_time, const std::vector<ChainId>& live,
                           const ConvergenceOptions& options) {
  if (live.empty()) throw Error(Errc::InvalidArgument, "no live chains");
  if (options.dwell_s == 0) throw Error(Errc::InvalidArgument, "dwell must be positive");
  const double fair = 1.0 / static_cast<double>(live.size());
  const double lo = fair * (1.0 - options.band);
  const double hi = fair * (1.0 + options.band);
  const auto end = horizon_of(series, options.horizon_s);

  auto balanced = [&](std::size_t t) {
    const auto total = series.total(t);
    if (total == 0) return false;
    return std::all_of(live.begin(), live.end(), [&](const ChainId& c) {
      const double s = static_cast<double>(series.at(c, t)) / static_cast<double>(total);
      return s >= lo && s <= hi;
    });
  };

  std::size_t run = 0;
  for (std::size_t t = first_bucket(event_time); t < end; ++t) {
    run = balanced(t) ? run + 1 : 0;
    if (run == options.dwell_s) {
      const double start = static_cast<double>(t + 1 - options.dwell_s);
      return std::max(0.0, start - event_time);
    }
  }
  throw Error(Errc::NeverConverged, "shares never stayed within the band after t=" + std::to_string(event_time));
}

double measure_drain(const ThroughputSeries& series, double event_time, const ChainId& chain, double horizon_s) {
  const auto end = horizon_of(series, horizon_s);
  const auto begin = first_bucket(event_time);
  std::size_t quiet_from = begin;
  for (std::size_t t = begin; t < end; ++t) {
    if (series.at(chain, t) != 0) quiet_from = t + 1;
  }
  if (quiet_from >= end) {
    throw Error(Errc::NeverConverged, chain.to_string() + " still carries bytes at the horizon");
  }
  return std::max(0.0, static_cast<double>(quiet_from) - event_time);
}

}  // namespace nfscale
