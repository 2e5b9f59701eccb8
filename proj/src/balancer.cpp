#include "nfscale/balancer.hpp"

#include <algorithm>

#include "nfscale/error.hpp"

namespace nfscale {

SessionTable::SessionTable(double timeout_s) : timeout_(timeout_s) {
  if (!(timeout_s > 0.0)) throw Error(Errc::InvalidArgument, "session timeout must be positive");
}

SessionRecord* SessionTable::find_active(const SessionKey& key, double now) {
  auto it = entries_.find(key);
  if (it == entries_.end() || !active(it->second, now)) return nullptr;
  return &it->second;
}

const SessionRecord* SessionTable::find(const SessionKey& key) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

void SessionTable::upsert(const SessionKey& key, SessionRecord rec) { entries_[key] = rec; }

bool SessionTable::any_active_on(const ChainId& id, double now) const {
  return std::any_of(entries_.begin(), entries_.end(), [&](const auto& kv) {
    return kv.second.assigned == id && active(kv.second, now);
  });
}

std::size_t SessionTable::expire(double now) {
  return std::erase_if(entries_, [&](const auto& kv) { return !active(kv.second, now); });
}

namespace {

// The window restricted to the profile's chains, or equal traffic when the
// live chains saw nothing.
TrafficWindow algebra_window(const WeightProfile& profile, const TrafficWindow& window) {
  TrafficWindow out;
  out.length_s = window.length_s;
  std::uint64_t total = 0;
  for (const auto& [id, p] : profile.probs) {
    out.bytes[id] = window.at(id);
    total += window.at(id);
  }
  if (total == 0) {
    for (auto& [id, b] : out.bytes) b = 1;
  }
  return out;
}

Plan finish_plan(WeightProfile next, std::uint32_t buckets, std::uint64_t generation,
                 std::optional<ChainId> drain) {
  Plan plan;
  plan.generation = generation;
  plan.drain = drain;
  for (auto& [id, count] : allocate_buckets(next, buckets)) {
    if (count > 0) plan.allocation.emplace_back(id, count);
  }
  std::erase_if(next.probs, [](const auto& kv) { return kv.second == 0.0; });
  plan.profile = std::move(next);
  return plan;
}

}  // namespace

Plan plan_initial(const std::vector<ChainId>& chains, std::uint32_t buckets, std::uint64_t generation) {
  if (chains.empty()) throw Error(Errc::NoLiveChains, "initial plan needs at least one chain");
  return finish_plan(WeightProfile::uniform(chains), buckets, generation, std::nullopt);
}

Plan plan_add(const WeightProfile& current, const TrafficWindow& window, const ChainId& added,
              std::uint32_t buckets, std::uint64_t generation) {
  if (current.probs.empty()) return plan_initial({added}, buckets, generation);
  auto next = add_chain(current, algebra_window(current, window), added);
  return finish_plan(std::move(next), buckets, generation, std::nullopt);
}

Plan plan_remove(const WeightProfile& current, const TrafficWindow& window, const ChainId& victim,
                 std::uint32_t buckets, std::uint64_t generation) {
  auto next = remove_chain(current, algebra_window(current, window), victim);
  return finish_plan(std::move(next), buckets, generation, victim);
}

Plan plan_rebalance(const WeightProfile& current, const TrafficWindow& window, std::uint32_t buckets,
                    std::uint64_t generation) {
  auto next = redistribute(current, algebra_window(current, window));
  return finish_plan(std::move(next), buckets, generation, std::nullopt);
}

Balancer::Balancer(Role role, HashParams params, double session_timeout_s)
    : role_(role), params_(params), table_(session_timeout_s) {
  params_.validate();
}

Assignment Balancer::map_locked(const LogicalPacket& p) {
  const SessionKey key = p.key();
  Assignment out;
  out.generation = buckets_ ? buckets_->generation() : 0;
  if (SessionRecord* rec = table_.find_active(key, p.timestamp)) {
    rec->last_seen = p.timestamp;
    out.chain = rec->assigned;
    out.from_table = true;
  } else {
    if (!buckets_) throw Error(Errc::NoLiveChains, "no bucket vector installed");
    out.chain = lookup(*buckets_, key);
    table_.upsert(key, SessionRecord{p.timestamp, out.chain});
  }
  counters_.bytes[out.chain] += p.bytes;
  return out;
}

ChainId Balancer::map_packet(const LogicalPacket& p) { return map_packet_traced(p).chain; }

Assignment Balancer::map_packet_traced(const LogicalPacket& p) {
  std::lock_guard lock(mu_);
  return map_locked(p);
}

Observation Balancer::observe(const SessionKey& key, const ChainId& observed, double now) {
  std::lock_guard lock(mu_);
  SessionRecord* rec = table_.find_active(key, now);
  if (!rec) {
    table_.upsert(key, SessionRecord{now, observed});
    return Observation::Learned;
  }
  rec->last_seen = now;
  if (rec->assigned == observed) return Observation::Refreshed;
  if (role_ == Role::Master) {
    rec->assigned = observed;
    return Observation::Corrected;
  }
  return Observation::Diverged;
}

void Balancer::reconcile(const SessionKey& key, const ChainId& observed, double now) {
  if (role_ != Role::Master) throw Error(Errc::WrongRole, "reconcile runs on the master only");
  observe(key, observed, now);
}

void Balancer::begin_drain(const ChainId& victim, const TrafficWindow& window,
                           std::uint64_t generation) {
  Plan plan = plan_remove(profile(), window, victim, params_.buckets, generation);
  commit(prepare(std::move(plan)));
}

bool Balancer::path_active(const ChainId& id, double now) const {
  std::lock_guard lock(mu_);
  return table_.any_active_on(id, now);
}

void Balancer::apply_allocation(const Allocation& alloc, std::uint64_t generation) {
  Plan plan;
  plan.generation = generation;
  plan.allocation = alloc;
  for (const auto& [id, count] : alloc) {
    if (count > 0) plan.profile.probs[id] = static_cast<double>(count) / params_.buckets;
  }
  commit(prepare(std::move(plan)));
}

PreparedPlan Balancer::prepare(Plan plan) const {
  auto built = std::make_shared<const BucketVector>(build_buckets(plan.allocation, params_, plan.generation));
  return PreparedPlan{std::move(plan), std::move(built)};
}

void Balancer::commit(PreparedPlan prepared) {
  std::lock_guard lock(mu_);
  buckets_ = std::move(prepared.buckets);
  profile_ = std::move(prepared.plan.profile);
  if (prepared.plan.drain) draining_.insert(*prepared.plan.drain);
  for (const auto& [id, p] : profile_.probs) draining_.erase(id);
}

TrafficWindow Balancer::snapshot_window(double now) {
  std::lock_guard lock(mu_);
  TrafficWindow out;
  out.length_s = now - window_start_;
  for (const auto& [id, p] : profile_.probs) out.bytes[id] = 0;
  for (const auto& id : draining_) out.bytes[id] = 0;
  for (const auto& [id, b] : counters_.bytes) out.bytes[id] += b;
  counters_.bytes.clear();
  window_start_ = now;
  return out;
}

std::size_t Balancer::expire_sessions(double now) {
  std::lock_guard lock(mu_);
  return table_.expire(now);
}

void Balancer::release(const ChainId& id) {
  std::lock_guard lock(mu_);
  draining_.erase(id);
}

std::shared_ptr<const BucketVector> Balancer::buckets() const {
  std::lock_guard lock(mu_);
  return buckets_;
}

WeightProfile Balancer::profile() const {
  std::lock_guard lock(mu_);
  return profile_;
}

std::set<ChainId> Balancer::draining() const {
  std::lock_guard lock(mu_);
  return draining_;
}

std::vector<ChainId> Balancer::live_chains() const {
  std::lock_guard lock(mu_);
  std::vector<ChainId> out;
  for (const auto& [id, p] : profile_.probs) out.push_back(id);
  return out;
}

std::uint64_t Balancer::generation() const {
  std::lock_guard lock(mu_);
  return buckets_ ? buckets_->generation() : 0;
}

std::optional<SessionRecord> Balancer::record(const SessionKey& key) const {
  std::lock_guard lock(mu_);
  const SessionRecord* rec = table_.find(key);
  return rec ? std::optional<SessionRecord>(*rec) : std::nullopt;
}

std::size_t Balancer::table_size() const {
  std::lock_guard lock(mu_);
  return table_.size();
}

}  // namespace nfscale
