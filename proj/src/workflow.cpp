#include "sdlcsim/workflow.hpp"

#include <algorithm>
#include <sstream>

namespace sdlcsim {

ResourcePool::ResourcePool(std::string name, std::int64_t capacity)
    : name_(std::move(name)), capacity_(capacity) {
    if (capacity_ < 0) {
        throw std::invalid_argument("pool capacity must be nonnegative");
    }
}

bool ResourcePool::request(std::int64_t entity, std::int64_t units, SimTime now) {
    if (units < 1) {
        throw std::invalid_argument("capture units must be >= 1");
    }
    if (pending_.empty() && units <= free_units()) {
        busy_ += units;
        return true;
    }
    pending_.push_back({entity, units, now});
    queued_units_ += units;
    return false;
}

std::vector<PendingRequest> ResourcePool::release(std::int64_t units, SimTime now) {
    (void)now;
    if (units > busy_) {
        throw NegativeBusy("releasing " + std::to_string(units) + " units of '" + name_ +
                           "' with only " + std::to_string(busy_) + " busy");
    }
    busy_ -= units;
    std::vector<PendingRequest> granted;
    while (!pending_.empty() && pending_.front().units <= free_units()) {
        PendingRequest head = pending_.front();
        pending_.pop_front();
        queued_units_ -= head.units;
        busy_ += head.units;
        granted.push_back(head);
    }
    return granted;
}

bool branch_decide(double p_error, RngStream& rng) {
    return rng.u01() < p_error;
}

std::optional<int> next_phase(int phase, bool error, int phase_count) {
    if (error) {
        return std::max(phase - 1, 0);
    }
    if (phase + 1 < phase_count) {
        return phase + 1;
    }
    return std::nullopt; // delivered
}

namespace {

// Substream purposes under one replication: arrivals, class mix, and one
// stream per entity.
constexpr std::uint64_t kArrivalStream = 0;
constexpr std::uint64_t kMixStream = 1;
constexpr std::uint64_t kEntityStream = 2;

std::vector<double> mix_weights(const ScenarioConfig& config) {
    std::vector<double> weights;
    weights.reserve(config.classes.size());
    for (const auto& cls : config.classes) {
        weights.push_back(cls.probability);
    }
    return weights;
}

} // namespace

ProcessNetwork::ProcessNetwork(const ScenarioConfig& config, Kernel& kernel,
                               std::uint64_t master_seed, int replication,
                               RunStats& stats, SimOptions options)
    : config_(config),
      kernel_(kernel),
      stats_(stats),
      options_(options),
      master_seed_(master_seed),
      replication_(replication),
      arrival_rng_(RngStream::from_path(master_seed,
                                        {static_cast<std::uint64_t>(replication), kArrivalStream})),
      mix_rng_(RngStream::from_path(master_seed,
                                    {static_cast<std::uint64_t>(replication), kMixStream})),
      mix_(mix_weights(config)) {
    const auto class_count = config_.classes.size();
    const auto phase_count = config_.phases.size();
    const auto pool_count = config_.pools.size();

    stats_.replication = replication;
    stats_.config_digest = scenario_digest(config);
    stats_.received_per_class.assign(class_count, 0);
    stats_.delivered_per_class.assign(class_count, 0);
    stats_.arrival_times_per_class.assign(class_count, {});
    stats_.delivery_times_per_class.assign(class_count, {});
    stats_.pools.assign(pool_count, {});
    stats_.transitions.assign(class_count,
                              std::vector<PhaseTransitionCounts>(phase_count));
    stats_.phase_visits_per_class.assign(class_count, 0);

    pools_.reserve(pool_count);
    for (const auto& pool : config_.pools) {
        pools_.emplace_back(pool.name, pool.capacity);
    }
    pool_marks_.assign(pool_count, 0.0);

    // source -> "received" counter -> capture/task/release/branch per phase
    // -> "delivered" counter -> sink
    nodes_.push_back({NodeType::Source, 1, -1, -1, "", -1, -1});
    nodes_.push_back({NodeType::Counter, 2, -1, -1, "received", -1, -1});
    capture_of_phase_.resize(phase_count, -1);
    for (std::size_t p = 0; p < phase_count; ++p) {
        const int base = static_cast<int>(nodes_.size());
        const int pool = config_.pool_index(config_.phases[p].pool);
        capture_of_phase_[p] = base;
        nodes_.push_back({NodeType::Capture, base + 1, pool, static_cast<int>(p), "", -1, -1});
        nodes_.push_back({NodeType::Task, base + 2, -1, static_cast<int>(p), "", -1, -1});
        nodes_.push_back({NodeType::Release, base + 3, pool, static_cast<int>(p), "", -1, -1});
        nodes_.push_back({NodeType::Branch, -1, -1, static_cast<int>(p), "", -1, -1});
    }
    const int delivered_counter = static_cast<int>(nodes_.size());
    nodes_.push_back({NodeType::Counter, delivered_counter + 1, -1, -1, "delivered", -1, -1});
    nodes_.push_back({NodeType::Sink, -1, -1, -1, "", -1, -1});
    for (std::size_t p = 0; p < phase_count; ++p) {
        Node& branch = nodes_[static_cast<std::size_t>(capture_of_phase_[p]) + 3];
        branch.on_error = capture_of_phase_[static_cast<std::size_t>(std::max<int>(
            static_cast<int>(p) - 1, 0))];
        branch.on_ok = p + 1 < phase_count ? capture_of_phase_[p + 1] : delivered_counter;
    }

    counters_["received"] = 0;
    counters_["delivered"] = 0;
    entities_.reserve(static_cast<std::size_t>(
        std::min<std::int64_t>(config_.project_limit, std::int64_t{1} << 20)));
}

void ProcessNetwork::prime() {
    if (config_.project_limit > 0) {
        kernel_.schedule(sample_continuous(config_.arrival, arrival_rng_), source_node_);
    }
    for (std::size_t p = 0; p < pools_.size(); ++p) {
        record_pool_row(static_cast<int>(p));
    }
}

void ProcessNetwork::dispatch(const Event& ev) {
    const Node& node = nodes_[static_cast<std::size_t>(ev.target)];
    if (node.type == NodeType::Source) {
        handle_arrival();
        return;
    }
    walk(entities_[static_cast<std::size_t>(ev.entity)], ev.target);
}

void ProcessNetwork::handle_arrival() {
    const SimTime now = kernel_.now();
    // Schedule the successor first so arrival events keep consecutive
    // sequence numbers regardless of how far this entity walks.
    if (emitted_ + 1 < config_.project_limit) {
        kernel_.schedule(now + sample_continuous(config_.arrival, arrival_rng_),
                         source_node_);
    }

    const std::int64_t id = emitted_++;
    const int class_index = static_cast<int>(sample(mix_, mix_rng_));
    Entity entity;
    entity.id = id;
    entity.class_index = class_index;
    entity.created_at = now;
    entity.rng = RngStream::from_path(
        master_seed_,
        {static_cast<std::uint64_t>(replication_), kEntityStream, static_cast<std::uint64_t>(id)});
    entities_.push_back(std::move(entity));

    kernel_.record_created();
    stats_.received_per_class[static_cast<std::size_t>(class_index)]++;
    stats_.arrival_times_per_class[static_cast<std::size_t>(class_index)].push_back(now);

    walk(entities_[static_cast<std::size_t>(id)], nodes_[static_cast<std::size_t>(source_node_)].next);
}

void ProcessNetwork::walk(Entity& entity, int node_id) {
    const SimTime now = kernel_.now();
    while (node_id >= 0) {
        const Node& node = nodes_[static_cast<std::size_t>(node_id)];
        switch (node.type) {
        case NodeType::Counter: {
            counters_[node.counter]++;
            node_id = node.next;
            break;
        }
        case NodeType::Capture: {
            const std::int64_t units =
                config_.classes[static_cast<std::size_t>(entity.class_index)]
                    .demands[static_cast<std::size_t>(node.phase)];
            auto& pool = pools_[static_cast<std::size_t>(node.pool)];
            auto& ps = stats_.pools[static_cast<std::size_t>(node.pool)];
            ps.requests++;
            integrate_pool(node.pool);
            if (pool.request(entity.id, units, now)) {
                entity.holding_pool = node.pool;
                entity.holding_units = units;
                record_pool_row(node.pool);
                node_id = node.next;
            } else {
                ps.queued_requests++;
                ps.max_queue_len = std::max(
                    ps.max_queue_len, static_cast<std::int64_t>(pool.pending().size()));
                entity.parked_at = node_id;
                record_pool_row(node.pool);
                node_id = -1; // suspended until granted
            }
            break;
        }
        case NodeType::Task: {
            const auto& law = config_.phases[static_cast<std::size_t>(node.phase)]
                                  .duration_per_class[static_cast<std::size_t>(entity.class_index)];
            const double duration = sample_continuous(law, entity.rng);
            entity.open_phase = node.phase;
            entity.open_start = now;
            kernel_.schedule(now + duration, node.next, entity.id);
            node_id = -1;
            break;
        }
        case NodeType::Release: {
            entity.visits.push_back({node.phase, entity.open_start, now});
            entity.open_phase = -1;
            stats_.phase_visits_per_class[static_cast<std::size_t>(entity.class_index)]++;

            integrate_pool(node.pool);
            auto granted = pools_[static_cast<std::size_t>(node.pool)].release(
                entity.holding_units, now);
            entity.holding_pool = -1;
            entity.holding_units = 0;
            record_pool_row(node.pool);

            for (const auto& grant : granted) {
                stats_.pools[static_cast<std::size_t>(node.pool)].wait_total +=
                    now - grant.enqueued_at;
                Entity& woken = entities_[static_cast<std::size_t>(grant.entity)];
                const int capture_node = woken.parked_at;
                woken.parked_at = -1;
                woken.holding_pool = node.pool;
                woken.holding_units = grant.units;
                // Task starts at grant time.
                walk(woken, nodes_[static_cast<std::size_t>(capture_node)].next);
            }
            node_id = node.next;
            break;
        }
        case NodeType::Branch: {
            const auto& cls = config_.classes[static_cast<std::size_t>(entity.class_index)];
            const bool error = branch_decide(cls.error_prob, entity.rng);
            auto& counts = stats_.transitions[static_cast<std::size_t>(entity.class_index)]
                                             [static_cast<std::size_t>(node.phase)];
            if (error) {
                counts.error++;
                entity.rework_count++;
                stats_.max_rework = std::max(stats_.max_rework, entity.rework_count);
                node_id = node.on_error;
            } else {
                counts.ok++;
                node_id = node.on_ok;
            }
            break;
        }
        case NodeType::Sink: {
            entity.delivered_at = now;
            stats_.delivered_per_class[static_cast<std::size_t>(entity.class_index)]++;
            stats_.delivery_times_per_class[static_cast<std::size_t>(entity.class_index)]
                .push_back(now);
            kernel_.record_delivery();
            node_id = -1;
            break;
        }
        case NodeType::Source: {
            node_id = -1; // sources never appear mid-walk
            break;
        }
        }
    }
}

void ProcessNetwork::integrate_pool(int pool) {
    const SimTime now = kernel_.now();
    auto& ps = stats_.pools[static_cast<std::size_t>(pool)];
    const auto& p = pools_[static_cast<std::size_t>(pool)];
    const double dt = now - pool_marks_[static_cast<std::size_t>(pool)];
    if (dt > 0.0) {
        ps.busy_integral += static_cast<double>(p.busy()) * dt;
        ps.demand_integral += static_cast<double>(p.busy() + p.queued_units()) * dt;
    }
    pool_marks_[static_cast<std::size_t>(pool)] = now;
}

void ProcessNetwork::record_pool_row(int pool) {
    if (!options_.collect_timeseries) {
        return;
    }
    const auto& p = pools_[static_cast<std::size_t>(pool)];
    stats_.timeseries.push_back({kernel_.now(), pool, p.busy(), p.queued_units()});
}

void ProcessNetwork::finalize(SimTime horizon) {
    stats_.horizon = horizon;
    for (std::size_t p = 0; p < pools_.size(); ++p) {
        // Integrate the tail; the mark is always <= horizon.
        const double dt = horizon - pool_marks_[p];
        if (dt > 0.0) {
            stats_.pools[p].busy_integral += static_cast<double>(pools_[p].busy()) * dt;
            stats_.pools[p].demand_integral +=
                static_cast<double>(pools_[p].busy() + pools_[p].queued_units()) * dt;
            pool_marks_[p] = horizon;
        }
        if (options_.collect_timeseries) {
            stats_.timeseries.push_back({horizon, static_cast<int>(p), pools_[p].busy(),
                                         pools_[p].queued_units()});
        }
    }
}

std::int64_t ProcessNetwork::counter(const std::string& name) const {
    auto it = counters_.find(name);
    return it == counters_.end() ? 0 : it->second;
}

std::vector<std::string> ProcessNetwork::blocked_requests() const {
    std::vector<std::string> out;
    for (const auto& pool : pools_) {
        for (const auto& req : pool.pending()) {
            std::ostringstream os;
            os << "entity " << req.entity << " blocked waiting for " << req.units
               << " unit(s) of '" << pool.name() << "' (capacity " << pool.capacity()
               << ", busy " << pool.busy() << ") since t=" << req.enqueued_at;
            out.push_back(os.str());
        }
    }
    return out;
}

} // namespace sdlcsim
