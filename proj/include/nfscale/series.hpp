#pragma once

// Per-second, per-chain byte counts and the measurements taken from them.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "nfscale/hashcore.hpp"

namespace nfscale {

class ThroughputSeries {
 public:
  ThroughputSeries() = default;
  ThroughputSeries(std::vector<ChainId> chains, std::size_t seconds);

  std::string scenario;
  std::uint64_t seed = 0;

  const std::vector<ChainId>& chains() const noexcept { return chains_; }
  std::size_t seconds() const noexcept { return seconds_; }

  /// Counts `bytes` in the bucket holding `time`; times past the end grow the series.
  void add(const ChainId& chain, double time, std::uint64_t bytes);
  std::uint64_t at(const ChainId& chain, std::size_t second) const;
  std::uint64_t total(std::size_t second) const;
  /// Share of `chain` in [from, to) seconds; 0 when nothing was counted.
  double share(const ChainId& chain, std::size_t from, std::size_t to) const;
  std::map<ChainId, double> shares(std::size_t from, std::size_t to) const;

  /// `time_s,chain_fwd_tag,bytes`, one row per second and declared chain.
  std::string to_csv() const;

  bool operator==(const ThroughputSeries&) const = default;

 private:
  std::size_t index_of(const ChainId& chain) const;

  std::vector<ChainId> chains_;
  std::size_t seconds_ = 0;
  std::vector<std::vector<std::uint64_t>> bytes_;  // [chain][second]
};

struct ConvergenceOptions {
  double band = 0.10;  // relative to the fair share 1/N
  std::size_t dwell_s = 2;
  double horizon_s = 0.0;  // 0: end of the series
};

/// Seconds from `event_time` to the start of the first `dwell_s` buckets in
/// which every chain of `live` carries 1/N within the band. Throws NeverConverged.
double measure_convergence(const ThroughputSeries& series, double event_time, const std::vector<ChainId>& live,
                           const ConvergenceOptions& options = {});

/// Seconds from `event_time` to the first bucket after which `chain` carries
/// no bytes. Throws NeverConverged if it still carries bytes at the horizon.
double measure_drain(const ThroughputSeries& series, double event_time, const ChainId& chain,
                     double horizon_s = 0.0);

}  // namespace nfscale
