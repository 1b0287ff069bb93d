#include "sdlcsim/engine.hpp"

#include <bit>
#include <cstring>

namespace sdlcsim {

StopCondition StopCondition::after_deliveries(std::int64_t n) {
    if (n < 1) {
        throw std::invalid_argument("delivery stop condition requires n >= 1");
    }
    StopCondition s;
    s.kind = Kind::DeliveredCount;
    s.deliveries = n;
    return s;
}

StopCondition StopCondition::at_time(SimTime t) {
    if (t < 0.0) {
        throw std::invalid_argument("time stop condition requires t >= 0");
    }
    StopCondition s;
    s.kind = Kind::AtTime;
    s.at = t;
    return s;
}

StopCondition StopCondition::when_empty() {
    return StopCondition{};
}

const char* to_string(TerminationReason reason) {
    switch (reason) {
    case TerminationReason::StopConditionMet:
        return "stop_condition_met";
    case TerminationReason::EventListEmpty:
        return "event_list_empty";
    case TerminationReason::NoProgress:
        return "no_progress";
    }
    return "unknown";
}

EventHandle Kernel::schedule(SimTime time, int target, std::int64_t entity) {
    if (time < clock_) {
        throw ScheduleInPast("event scheduled at " + std::to_string(time) +
                             " before clock " + std::to_string(clock_));
    }
    Event ev{time, next_seq_++, target, entity};
    fel_.push(ev);
    pending_.insert(ev.seq);
    return ev.seq;
}

bool Kernel::cancel(EventHandle handle) {
    return pending_.erase(handle) > 0;
}

std::size_t Kernel::pending_events() const {
    return pending_.size();
}

void Kernel::fold_digest(const Event& ev) {
    constexpr std::uint64_t prime = 0x100000001b3ull;
    auto fold = [&](std::uint64_t word) {
        digest_ = (digest_ ^ word) * prime;
    };
    fold(std::bit_cast<std::uint64_t>(ev.time));
    fold(static_cast<std::uint64_t>(ev.target));
    fold(static_cast<std::uint64_t>(ev.entity + 1));
}

RunOutcome Kernel::run(const StopCondition& stop) {
    if (!handler_ && !fel_.empty()) {
        throw std::logic_error("no event handler bound to the kernel");
    }
    RunOutcome out;
    bool stop_met = false;

    while (true) {
        if (stop.kind == StopCondition::Kind::DeliveredCount &&
            delivered_ >= stop.deliveries) {
            stop_met = true;
            break;
        }

        // Drop events cancelled while queued.
        while (!fel_.empty() && pending_.count(fel_.top().seq) == 0) {
            fel_.pop();
        }
        if (fel_.empty()) {
            break;
        }

        if (stop.kind == StopCondition::Kind::AtTime && fel_.top().time > stop.at) {
            clock_ = stop.at;
            stop_met = true;
            break;
        }

        Event ev = fel_.top();
        fel_.pop();
        pending_.erase(ev.seq);
        clock_ = ev.time; // nondecreasing by heap order + schedule() guard
        fold_digest(ev);
        ++dispatches_;
        handler_(ev);
    }

    out.final_clock = clock_;
    out.dispatches = dispatches_;
    out.created = created_;
    out.delivered = delivered_;
    out.in_system = in_system();
    out.remaining_events = pending_events();
    out.trace_digest = digest_;
    if (stop_met) {
        out.reason = TerminationReason::StopConditionMet;
    } else if (stop.kind == StopCondition::Kind::EventListEmpty) {
        out.reason = TerminationReason::EventListEmpty;
    } else if (in_system() > 0 || stop.kind == StopCondition::Kind::DeliveredCount) {
        // List drained without meeting the stop condition: entities stuck
        // in a pool queue, or the source stopped short of the delivery target.
        out.reason = TerminationReason::NoProgress;
    } else {
        out.reason = TerminationReason::EventListEmpty;
    }
    return out;
}

} // namespace sdlcsim
