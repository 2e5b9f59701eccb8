#include "nfscale/kernels.hpp"

#include <cstddef>

#include "nfscale/error.hpp"

namespace nfscale {

namespace {

void check_sizes(std::span<const SessionKey> keys, std::span<ChainId> out) {
  if (keys.size() != out.size()) {
    throw Error(Errc::InvalidArgument, "output span size differs from key count");
  }
}

}  // namespace

void lookup_batch(const BucketVector& buckets, std::span<const SessionKey> keys,
                  std::span<ChainId> out) {
  check_sizes(keys, out);
  if (buckets.empty()) throw Error(Errc::NoLiveChains, "bucket vector is empty");
  const auto slots = buckets.slots();
  const std::uint64_t L = slots.size();
  const auto n = static_cast<std::ptrdiff_t>(keys.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = slots[hash_key(keys[i]) % L];
}

void lookup_batch_serial(const BucketVector& buckets, std::span<const SessionKey> keys,
                         std::span<ChainId> out) {
  check_sizes(keys, out);
  for (std::size_t i = 0; i < keys.size(); ++i) out[i] = lookup(buckets, keys[i]);
}

std::vector<std::uint64_t> slot_histogram(std::span<const SessionKey> keys, std::uint32_t buckets) {
  if (buckets == 0) throw Error(Errc::InvalidArgument, "bucket count must be positive");
  std::vector<std::uint64_t> hist(buckets, 0);
  std::uint64_t* data = hist.data();
  const auto n = static_cast<std::ptrdiff_t>(keys.size());
#pragma omp parallel for schedule(static) reduction(+ : data[:buckets])
  for (std::ptrdiff_t i = 0; i < n; ++i) ++data[hash_key(keys[i]) % buckets];
  return hist;
}

std::vector<std::uint64_t> slot_histogram_serial(std::span<const SessionKey> keys,
                                                 std::uint32_t buckets) {
  if (buckets == 0) throw Error(Errc::InvalidArgument, "bucket count must be positive");
  std::vector<std::uint64_t> hist(buckets, 0);
  for (const auto& k : keys) ++hist[hash_key(k) % buckets];
  return hist;
}

std::map<ChainId, std::uint64_t> chain_share(const BucketVector& buckets,
                                             std::span<const SessionKey> keys) {
  // Slot histogram in parallel, then fold slots onto chains.
  const auto hist = slot_histogram(keys, static_cast<std::uint32_t>(buckets.size()));
  std::map<ChainId, std::uint64_t> share;
  for (const auto& id : buckets.chains()) share[id] = 0;
  const auto slots = buckets.slots();
  for (std::size_t s = 0; s < hist.size(); ++s) share[slots[s]] += hist[s];
  return share;
}

std::map<ChainId, std::uint64_t> chain_share_serial(const BucketVector& buckets,
                                                    std::span<const SessionKey> keys) {
  std::map<ChainId, std::uint64_t> share;
  for (const auto& id : buckets.chains()) share[id] = 0;
  for (const auto& k : keys) ++share[lookup(buckets, k)];
  return share;
}

}  // namespace nfscale
