#include "sdlcsim/simulation.hpp"

#include <future>
#include <sstream>

namespace sdlcsim {

RunStats run_replication(const ScenarioConfig& config, std::uint64_t master_seed,
                         int replication, const SimOptions& options) {
    RunStats stats;
    Kernel kernel;
    ProcessNetwork network(config, kernel, master_seed, replication, stats, options);
    kernel.set_handler([&network](const Event& ev) { network.dispatch(ev); });
    network.prime();

    const RunOutcome outcome = kernel.run(config.stop());
    network.finalize(outcome.final_clock);

    stats.dispatches = outcome.dispatches;
    stats.trace_digest = outcome.trace_digest;
    stats.reason = outcome.reason;
    stats.in_system_at_end = outcome.in_system;
    if (outcome.reason == TerminationReason::NoProgress) {
        std::ostringstream os;
        os << "delivered " << outcome.delivered << " of " << config.project_limit;
        for (const auto& line : network.blocked_requests()) {
            os << "; " << line;
        }
        stats.no_progress_detail = os.str();
    }
    return stats;
}

std::vector<RunStats> run_replications(const ScenarioConfig& config,
                                       std::uint64_t master_seed, int count,
                                       bool parallel, const SimOptions& options) {
    if (count < 1) {
        throw std::invalid_argument("replication count must be >= 1");
    }
    std::vector<RunStats> results;
    results.reserve(static_cast<std::size_t>(count));
    if (!parallel || count == 1) {
        for (int r = 0; r < count; ++r) {
            results.push_back(run_replication(config, master_seed, r, options));
        }
        return results;
    }
    std::vector<std::future<RunStats>> futures;
    futures.reserve(static_cast<std::size_t>(count));
    for (int r = 0; r < count; ++r) {
        futures.push_back(std::async(std::launch::async, [&config, master_seed, r, options] {
            return run_replication(config, master_seed, r, options);
        }));
    }
    // Collect in replication order so merged output matches serial runs.
    for (auto& f : futures) {
        results.push_back(f.get());
    }
    return results;
}

Report run_report(const ScenarioConfig& config, std::uint64_t master_seed, int count,
                  bool parallel, const SimOptions& options) {
    return merge_replications(config, master_seed,
                              run_replications(config, master_seed, count, parallel, options));
}

} // namespace sdlcsim
