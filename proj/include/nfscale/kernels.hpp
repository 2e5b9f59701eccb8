#pragma once

// Batch kernels over the bucket vector. Each parallel kernel has a serial
// reference with the same signature; tests compare the two and bench/
// measures them.

#include <cstdint>
#include <map>
#include <span>

#include "nfscale/hashcore.hpp"

namespace nfscale {

/// out[i] = lookup(buckets, keys[i]). OpenMP over i.
void lookup_batch(const BucketVector& buckets, std::span<const SessionKey> keys,
                  std::span<ChainId> out);
void lookup_batch_serial(const BucketVector& buckets, std::span<const SessionKey> keys,
                         std::span<ChainId> out);

/// Slot-occupancy histogram: result[s] = number of keys with hash % L == s.
std::vector<std::uint64_t> slot_histogram(std::span<const SessionKey> keys, std::uint32_t buckets);
std::vector<std::uint64_t> slot_histogram_serial(std::span<const SessionKey> keys,
                                                 std::uint32_t buckets);

/// Number of keys that land on each chain.
std::map<ChainId, std::uint64_t> chain_share(const BucketVector& buckets,
                                             std::span<const SessionKey> keys);
std::map<ChainId, std::uint64_t> chain_share_serial(const BucketVector& buckets,
                                                    std::span<const SessionKey> keys);

}  // namespace nfscale
