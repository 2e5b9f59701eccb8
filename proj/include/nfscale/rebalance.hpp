#pragma once

// Probability algebra for weighted bucket allocation.
//
// A chain's probability p_i is the share of buckets it holds. A traffic
// window records t_i bytes per chain (both directions). The session bias
// b_i = t_i / (T p_i) measures how far a chain's traffic strays from its
// probability; the redistribution, add and remove rules pick new
// probabilities that would have equalised the last window's traffic.
//
// Every division by t_i uses max(t_i, 1).

#include <cstdint>
#include <map>

#include "nfscale/hashcore.hpp"

namespace nfscale {

inline constexpr double kDefaultWindowSeconds = 5.0;

struct TrafficWindow {
  double length_s = kDefaultWindowSeconds;
  std::map<ChainId, std::uint64_t> bytes;

  std::uint64_t total() const noexcept;
  /// Bytes for `id`, zero when absent.
  std::uint64_t at(const ChainId& id) const noexcept;
};

/// Adds `other`'s byte counts into `into`; keeps the longer window length.
void merge_into(TrafficWindow& into, const TrafficWindow& other);

struct WeightProfile {
  std::map<ChainId, double> probs;

  double sum() const noexcept;
  std::size_t size() const noexcept { return probs.size(); }
  bool contains(const ChainId& id) const { return probs.contains(id); }

  /// 1/N for each chain.
  static WeightProfile uniform(const std::vector<ChainId>& chains);
};

struct BiasVector {
  std::map<ChainId, double> biases;
};

/// b_i = t_i / (T p_i). Throws EmptyWindow when T == 0 and ZeroProbability
/// when some p_i == 0.
BiasVector bias(const WeightProfile& p, const TrafficWindow& t);

/// p_i' = p_i / (t_i * sum_j p_j / t_j).
WeightProfile redistribute(const WeightProfile& p, const TrafficWindow& t);

/// Existing chains get N/(N+1) of the redistributed profile; the new chain
/// gets exactly 1/(N+1). Throws DuplicateChain when `new_id` is present.
WeightProfile add_chain(const WeightProfile& p, const TrafficWindow& t, const ChainId& new_id);

/// Redistributes over the survivors; the victim stays in the result with
/// probability 0. Throws UnknownChain or LastChain.
WeightProfile remove_chain(const WeightProfile& p, const TrafficWindow& t, const ChainId& victim);

/// Largest-remainder rounding of p_i * L, ties to the lower forward tag.
/// Chains with p_i == 0 get 0 and are listed in the result.
Allocation allocate_buckets(const WeightProfile& p, std::uint32_t buckets);

}  // namespace nfscale
