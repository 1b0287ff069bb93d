#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

namespace sdlcsim {

/// Simulated time, in days.
using SimTime = double;

/// Scheduling an event before the current clock is a model bug.
class ScheduleInPast : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

struct Event {
    SimTime time = 0.0;
    std::uint64_t seq = 0; // insertion counter; (time, seq) is the dispatch key
    int target = -1;       // node id
    std::int64_t entity = -1; // -1 for events not tied to an entity
};

struct StopCondition {
    enum class Kind { DeliveredCount, AtTime, EventListEmpty };

    Kind kind = Kind::EventListEmpty;
    std::int64_t deliveries = 0;
    SimTime at = 0.0;

    static StopCondition after_deliveries(std::int64_t n);
    static StopCondition at_time(SimTime t);
    static StopCondition when_empty();
};

enum class TerminationReason {
    StopConditionMet,
    EventListEmpty,
    NoProgress, // list drained with the stop condition unmet: deadlock or starved source
};

const char* to_string(TerminationReason reason);

struct RunOutcome {
    SimTime final_clock = 0.0;
    std::uint64_t dispatches = 0;
    TerminationReason reason = TerminationReason::EventListEmpty;
    std::int64_t created = 0;
    std::int64_t delivered = 0;
    std::int64_t in_system = 0;
    std::size_t remaining_events = 0;
    std::uint64_t trace_digest = 0;
};

using EventHandle = std::uint64_t;

/// Single-threaded discrete-event kernel: one clock, one future-event list.
/// Events dispatch in nondecreasing (time, seq) order, so equal timestamps
/// resolve strictly FIFO by insertion.
class Kernel {
public:
    using Handler = std::function<void(const Event&)>;

    void set_handler(Handler handler) { handler_ = std::move(handler); }

    SimTime now() const { return clock_; }

    /// Queues an event; the returned handle can cancel it before dispatch.
    EventHandle schedule(SimTime time, int target, std::int64_t entity = -1);

    /// True if the event was still pending and is now cancelled;
    /// dispatched or already-cancelled handles return false.
    bool cancel(EventHandle handle);

    // Entity accounting, driven by the model; feeds stop conditions and
    // the no-progress diagnosis.
    void record_created() { ++created_; }
    void record_delivery() { ++delivered_; }
    std::int64_t created() const { return created_; }
    std::int64_t delivered() const { return delivered_; }
    std::int64_t in_system() const { return created_ - delivered_; }

    std::size_t pending_events() const;

    RunOutcome run(const StopCondition& stop);

    std::uint64_t trace_digest() const { return digest_; }

private:
    struct Later {
        bool operator()(const Event& a, const Event& b) const {
            if (a.time != b.time) {
                return a.time > b.time;
            }
            return a.seq > b.seq;
        }
    };

    void fold_digest(const Event& ev);

    Handler handler_;
    std::priority_queue<Event, std::vector<Event>, Later> fel_;
    std::unordered_set<std::uint64_t> pending_; // seqs neither dispatched nor cancelled
    SimTime clock_ = 0.0;
    std::uint64_t next_seq_ = 0;
    std::uint64_t dispatches_ = 0;
    std::uint64_t digest_ = 0xcbf29ce484222325ull; // FNV-1a offset basis
    std::int64_t created_ = 0;
    std::int64_t delivered_ = 0;
};

} // namespace sdlcsim
