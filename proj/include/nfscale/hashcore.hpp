#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace nfscale {

/// Network endpoint. IPv4 addresses are stored in IPv4-mapped IPv6 form so
/// that both families share one ordering.
struct Endpoint {
  std::array<std::uint8_t, 16> address{};
  std::uint16_t port = 0;

  static Endpoint v4(std::uint32_t addr, std::uint16_t port);
  static Endpoint v6(const std::array<std::uint8_t, 16>& addr, std::uint16_t port);
  /// Parses "a.b.c.d:port". Throws Error(InvalidArgument) on malformed input.
  static Endpoint parse(std::string_view text);

  bool is_v4() const noexcept;
  std::string to_string() const;

  auto operator<=>(const Endpoint&) const = default;
};

/// Direction-invariant session identity: the two endpoints in sorted order.
struct SessionKey {
  Endpoint lo;
  Endpoint hi;

  auto operator<=>(const SessionKey&) const = default;
};

SessionKey canonical_key(const Endpoint& src, const Endpoint& dst) noexcept;

/// FNV-1a over the canonical key bytes, finished with an fmix64 avalanche.
/// Stable across processes and builds.
std::uint64_t hash_key(const SessionKey& key) noexcept;

inline constexpr std::uint16_t kMinTag = 2;
inline constexpr std::uint16_t kMaxTag = 4094;

/// Tag pair naming one chain instance. Ordered by forward tag first.
class ChainId {
 public:
  constexpr ChainId() = default;
  /// Throws Error(InvalidArgument) if a tag is outside [2, 4094] or the tags are equal.
  ChainId(std::uint16_t forward_tag, std::uint16_t reverse_tag);

  constexpr std::uint16_t forward_tag() const noexcept { return forward_; }
  constexpr std::uint16_t reverse_tag() const noexcept { return reverse_; }
  constexpr bool valid() const noexcept { return forward_ != 0; }
  bool shares_tag_with(const ChainId& other) const noexcept;
  std::string to_string() const;

  auto operator<=>(const ChainId&) const = default;

 private:
  std::uint16_t forward_ = 0;
  std::uint16_t reverse_ = 0;
};

inline constexpr std::uint32_t kDefaultBuckets = 1024;
inline constexpr std::uint32_t kBucketsPerChain = 64;

struct HashParams {
  std::uint64_t seed = 0x5eed;
  std::uint32_t buckets = kDefaultBuckets;
  /// Upper bound on simultaneously present chains; buckets must be >= 64x this.
  std::uint32_t max_chains = kDefaultBuckets / kBucketsPerChain;

  /// Throws Error(InvalidArgument) when the invariants do not hold.
  void validate() const;

  bool operator==(const HashParams&) const = default;
};

using Allocation = std::vector<std::pair<ChainId, std::uint32_t>>;

/// SplitMix64; the shuffle generator shared by master and slave.
class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t state) noexcept : state_(state) {}

  constexpr std::uint64_t next() noexcept {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// Immutable L-slot table of chain ids.
class BucketVector {
 public:
  BucketVector() = default;

  std::span<const ChainId> slots() const noexcept { return slots_; }
  std::size_t size() const noexcept { return slots_.size(); }
  bool empty() const noexcept { return slots_.empty(); }
  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t generation() const noexcept { return generation_; }

  /// Number of slots holding `id`.
  std::uint32_t count(const ChainId& id) const noexcept;
  /// Distinct chains present, ascending.
  std::vector<ChainId> chains() const;

  bool operator==(const BucketVector&) const = default;

 private:
  friend BucketVector build_buckets(const Allocation&, const HashParams&, std::uint64_t);

  std::vector<ChainId> slots_;
  std::uint64_t seed_ = 0;
  std::uint64_t generation_ = 0;
};

/// Lays out `count` slots per chain in ascending chain order, then applies a
/// Fisher-Yates shuffle (i from L-1 down to 1, j = next() % (i + 1)) driven
/// by SplitMix64(seed ^ generation). The allocation order passed in does not
/// affect the result.
///
/// Throws Error(AllocationMismatch) if the counts do not sum to L, and
/// Error(InvalidArgument) for duplicate chain ids.
BucketVector build_buckets(const Allocation& alloc, const HashParams& params,
                           std::uint64_t generation);

/// slots[hash_key(key) % L]. Throws Error(NoLiveChains) on an empty vector.
ChainId lookup(const BucketVector& buckets, const SessionKey& key);

}  // namespace nfscale

template <>
struct std::hash<nfscale::SessionKey> {
  std::size_t operator()(const nfscale::SessionKey& k) const noexcept {
    return static_cast<std::size_t>(nfscale::hash_key(k));
  }
};

template <>
struct std::hash<nfscale::ChainId> {
  std::size_t operator()(const nfscale::ChainId& c) const noexcept {
    return (std::size_t{c.forward_tag()} << 16) | c.reverse_tag();
  }
};
