#include "nfscale/hashcore.hpp"

#include <algorithm>
#include <charconv>
#include <set>

#include "nfscale/error.hpp"

namespace nfscale {

namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

constexpr std::array<std::uint8_t, 12> kV4MappedPrefix = {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0xff, 0xff};

std::uint64_t fnv1a(std::uint64_t h, std::uint8_t byte) noexcept {
  h ^= byte;
  return h * kFnvPrime;
}

std::uint64_t fnv1a_endpoint(std::uint64_t h, const Endpoint& e) noexcept {
  for (auto b : e.address) h = fnv1a(h, b);
  h = fnv1a(h, static_cast<std::uint8_t>(e.port >> 8));
  return fnv1a(h, static_cast<std::uint8_t>(e.port & 0xff));
}

std::uint64_t fmix64(std::uint64_t k) noexcept {
  k ^= k >> 33;
  k *= 0xff51afd7ed558ccdULL;
  k ^= k >> 33;
  k *= 0xc4ceb9fe1a85ec53ULL;
  k ^= k >> 33;
  return k;
}

}  // namespace

Endpoint Endpoint::v4(std::uint32_t addr, std::uint16_t port) {
  Endpoint e;
  std::copy(kV4MappedPrefix.begin(), kV4MappedPrefix.end(), e.address.begin());
  e.address[12] = static_cast<std::uint8_t>(addr >> 24);
  e.address[13] = static_cast<std::uint8_t>(addr >> 16);
  e.address[14] = static_cast<std::uint8_t>(addr >> 8);
  e.address[15] = static_cast<std::uint8_t>(addr);
  e.port = port;
  return e;
}

Endpoint Endpoint::v6(const std::array<std::uint8_t, 16>& addr, std::uint16_t port) {
  return Endpoint{addr, port};
}

Endpoint Endpoint::parse(std::string_view text) {
  auto fail = [&] { return Error(Errc::InvalidArgument, "bad endpoint '" + std::string(text) + "'"); };
  const auto colon = text.rfind(':');
  if (colon == std::string_view::npos) throw fail();
  std::uint32_t addr = 0;
  std::string_view host = text.substr(0, colon);
  for (int octet = 0; octet < 4; ++octet) {
    const auto dot = host.find('.');
    if ((octet < 3) == (dot == std::string_view::npos)) throw fail();
    std::string_view part = host.substr(0, dot);
    unsigned value = 0;
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), value);
    if (ec != std::errc{} || ptr != part.data() + part.size() || value > 255) throw fail();
    addr = (addr << 8) | value;
    host = dot == std::string_view::npos ? std::string_view{} : host.substr(dot + 1);
  }
  std::string_view port_text = text.substr(colon + 1);
  unsigned port = 0;
  auto [ptr, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
  if (ec != std::errc{} || ptr != port_text.data() + port_text.size() || port > 0xffff) throw fail();
  return v4(addr, static_cast<std::uint16_t>(port));
}

bool Endpoint::is_v4() const noexcept {
  return std::equal(kV4MappedPrefix.begin(), kV4MappedPrefix.end(), address.begin());
}

std::string Endpoint::to_string() const {
  std::string out;
  if (is_v4()) {
    for (int i = 12; i < 16; ++i) {
      out += std::to_string(address[i]);
      if (i != 15) out += '.';
    }
  } else {
    static constexpr char kHex[] = "0123456789abcdef";
    out += '[';
    for (int i = 0; i < 16; i += 2) {
      if (i) out += ':';
      for (int j = i; j < i + 2; ++j) {
        out += kHex[address[j] >> 4];
        out += kHex[address[j] & 0xf];
      }
    }
    out += ']';
  }
  return out + ':' + std::to_string(port);
}

SessionKey canonical_key(const Endpoint& src, const Endpoint& dst) noexcept {
  if (dst < src) return SessionKey{dst, src};
  return SessionKey{src, dst};
}

std::uint64_t hash_key(const SessionKey& key) noexcept {
  std::uint64_t h = fnv1a_endpoint(kFnvOffset, key.lo);
  h = fnv1a_endpoint(h, key.hi);
  return fmix64(h);
}

ChainId::ChainId(std::uint16_t forward_tag, std::uint16_t reverse_tag)
    : forward_(forward_tag), reverse_(reverse_tag) {
  auto in_range = [](std::uint16_t t) { return t >= kMinTag && t <= kMaxTag; };
  if (!in_range(forward_tag) || !in_range(reverse_tag)) {
    throw Error(Errc::InvalidArgument, "tag outside [2, 4094] in " + to_string());
  }
  if (forward_tag == reverse_tag) {
    throw Error(Errc::InvalidArgument, "forward and reverse tag equal in " + to_string());
  }
}

bool ChainId::shares_tag_with(const ChainId& other) const noexcept {
  return forward_ == other.forward_ || forward_ == other.reverse_ || reverse_ == other.forward_ ||
         reverse_ == other.reverse_;
}

std::string ChainId::to_string() const {
  return "(" + std::to_string(forward_) + "," + std::to_string(reverse_) + ")";
}

void HashParams::validate() const {
  if (buckets == 0) throw Error(Errc::InvalidArgument, "bucket count must be positive");
  if (max_chains == 0) throw Error(Errc::InvalidArgument, "max_chains must be positive");
  if (static_cast<std::uint64_t>(buckets) < std::uint64_t{kBucketsPerChain} * max_chains) {
    throw Error(Errc::InvalidArgument, "bucket count " + std::to_string(buckets) +
                                           " below 64 x max_chains (" +
                                           std::to_string(max_chains) + ")");
  }
}

std::uint32_t BucketVector::count(const ChainId& id) const noexcept {
  return static_cast<std::uint32_t>(std::count(slots_.begin(), slots_.end(), id));
}

std::vector<ChainId> BucketVector::chains() const {
  std::set<ChainId> seen(slots_.begin(), slots_.end());
  return {seen.begin(), seen.end()};
}

BucketVector build_buckets(const Allocation& alloc, const HashParams& params,
                           std::uint64_t generation) {
  Allocation sorted = alloc;
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i > 0 && sorted[i].first == sorted[i - 1].first) {
      throw Error(Errc::InvalidArgument, "duplicate chain " + sorted[i].first.to_string());
    }
    total += sorted[i].second;
  }
  if (total != params.buckets) {
    throw Error(Errc::AllocationMismatch, "counts sum to " + std::to_string(total) +
                                              ", expected " + std::to_string(params.buckets));
  }

  BucketVector bv;
  bv.seed_ = params.seed;
  bv.generation_ = generation;
  bv.slots_.reserve(params.buckets);
  for (const auto& [id, count] : sorted) bv.slots_.insert(bv.slots_.end(), count, id);

  SplitMix64 rng(params.seed ^ generation);
  for (std::size_t i = bv.slots_.size(); i > 1; --i) {
    const std::size_t j = rng.next() % i;
    std::swap(bv.slots_[i - 1], bv.slots_[j]);
  }
  return bv;
}

ChainId lookup(const BucketVector& buckets, const SessionKey& key) {
  if (buckets.empty()) throw Error(Errc::NoLiveChains, "bucket vector is empty");
  return buckets.slots()[hash_key(key) % buckets.size()];
}

}  // namespace nfscale
