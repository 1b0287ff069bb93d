#pragma once

#include "sdlcsim/engine.hpp"
#include "sdlcsim/metrics.hpp"
#include "sdlcsim/random.hpp"
#include "sdlcsim/scenario.hpp"

#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace sdlcsim {

/// Releasing more units than are held is a model bug.
class NegativeBusy : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

struct PendingRequest {
    std::int64_t entity = -1;
    std::int64_t units = 0;
    SimTime enqueued_at = 0.0;
};

/// Integer-capacity pool with a strict FIFO pending queue. Grants are
/// all-or-nothing; a blocked head blocks everything behind it. A request
/// larger than the capacity queues and never grants (config validation
/// rejects such demands unless explicitly overridden), which surfaces as
/// a no-progress termination with the blocked request reported.
class ResourcePool {
public:
    ResourcePool(std::string name, std::int64_t capacity);

    const std::string& name() const { return name_; }
    std::int64_t capacity() const { return capacity_; }
    std::int64_t busy() const { return busy_; }
    std::int64_t free_units() const { return capacity_ - busy_; }
    std::int64_t queued_units() const { return queued_units_; }
    const std::deque<PendingRequest>& pending() const { return pending_; }

    /// True when granted immediately (fits and nothing is queued ahead);
    /// false when appended to the pending queue.
    bool request(std::int64_t entity, std::int64_t units, SimTime now);

    /// Returns units, then grants pending heads in FIFO order while they
    /// fit, stopping at the first that does not. Grant order is preserved.
    std::vector<PendingRequest> release(std::int64_t units, SimTime now);

private:
    std::string name_;
    std::int64_t capacity_;
    std::int64_t busy_ = 0;
    std::int64_t queued_units_ = 0;
    std::deque<PendingRequest> pending_;
};

/// Bernoulli error draw for a completed phase.
bool branch_decide(double p_error, RngStream& rng);

/// Routing after completing `phase` (0-based): ok advances, the last phase
/// delivers (nullopt); an error repeats the preceding phase (the first
/// phase repeats itself).
std::optional<int> next_phase(int phase, bool error, int phase_count);

enum class NodeType { Source, Counter, Capture, Task, Release, Branch, Sink };

struct Node {
    NodeType type = NodeType::Sink;
    int next = -1;
    int pool = -1;        // Capture/Release
    int phase = -1;       // Capture/Task/Release/Branch
    std::string counter;  // Counter
    int on_ok = -1;       // Branch
    int on_error = -1;    // Branch
};

struct PhaseVisit {
    int phase = -1;
    SimTime start = 0.0;
    SimTime end = 0.0;
};

struct Entity {
    std::int64_t id = -1;
    int class_index = 0;
    SimTime created_at = 0.0;
    std::optional<SimTime> delivered_at;
    std::vector<PhaseVisit> visits;
    std::int64_t rework_count = 0;

    int parked_at = -1;         // capture node while queued in a pool
    int holding_pool = -1;
    std::int64_t holding_units = 0;
    int open_phase = -1;        // phase whose task is in flight
    SimTime open_start = 0.0;

    RngStream rng{0, 0}; // entity-local stream: durations and error draws
};

struct SimOptions {
    bool collect_timeseries = false;
};

/// The process network for one replication: source -> received counter ->
/// per phase (capture -> task -> release -> branch) -> delivered counter ->
/// sink, with branch errors looping back one phase. Owns pools, entities,
/// and counters; writes into the replication's RunStats.
class ProcessNetwork {
public:
    ProcessNetwork(const ScenarioConfig& config, Kernel& kernel,
                   std::uint64_t master_seed, int replication, RunStats& stats,
                   SimOptions options = {});

    /// Schedules the first arrival and the initial time-series rows.
    void prime();

    /// Kernel event handler.
    void dispatch(const Event& ev);

    /// Integrates pool statistics up to the horizon and emits closing
    /// time-series rows.
    void finalize(SimTime horizon);

    const std::vector<ResourcePool>& pools() const { return pools_; }
    const std::vector<Entity>& entities() const { return entities_; }
    std::int64_t counter(const std::string& name) const;

    /// One line per blocked pending request (head-of-line view), for
    /// no-progress diagnostics.
    std::vector<std::string> blocked_requests() const;

private:
    void handle_arrival();
    void walk(Entity& entity, int node_id);
    void integrate_pool(int pool);
    void record_pool_row(int pool);

    const ScenarioConfig& config_;
    Kernel& kernel_;
    RunStats& stats_;
    SimOptions options_;
    std::uint64_t master_seed_ = 0;
    int replication_ = 0;

    RngStream arrival_rng_;
    RngStream mix_rng_;
    Categorical mix_;

    std::vector<ResourcePool> pools_;
    std::vector<double> pool_marks_; // last integration time per pool
    std::vector<Node> nodes_;
    std::vector<int> capture_of_phase_;
    std::vector<Entity> entities_;
    std::map<std::string, std::int64_t> counters_;
    int source_node_ = 0;
    std::int64_t emitted_ = 0;
};

} // namespace sdlcsim
