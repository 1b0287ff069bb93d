#include "sdlcsim/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace sdlcsim {

namespace {

void check_criterion(const StabilityCriterion& criterion) {
    if (criterion.epsilon < 0.0) {
        throw std::invalid_argument("criterion epsilon must be >= 0");
    }
    if (criterion.max_wait < 0.0) {
        throw std::invalid_argument("criterion max_wait must be >= 0");
    }
    if (criterion.replications < 1) {
        throw std::invalid_argument("criterion replications must be >= 1");
    }
    if (criterion.projects_per_rep < 10) {
        throw std::invalid_argument("criterion projects_per_rep must be >= 10");
    }
}

ScenarioConfig with_capacities(const ScenarioConfig& config,
                               const std::vector<std::int64_t>& capacities,
                               std::int64_t project_limit) {
    ScenarioConfig out = config;
    for (std::size_t p = 0; p < out.pools.size(); ++p) {
        out.pools[p].capacity = capacities[p];
    }
    out.project_limit = project_limit;
    return out;
}

std::string caps_to_string(const std::vector<std::int64_t>& caps) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < caps.size(); ++i) {
        os << (i > 0 ? "," : "") << caps[i];
    }
    os << ")";
    return os.str();
}

} // namespace

StabilityResult is_stable(const ScenarioConfig& config,
                          const std::vector<std::int64_t>& capacities,
                          const StabilityCriterion& criterion, std::uint64_t master_seed) {
    check_criterion(criterion);
    if (capacities.size() != config.pools.size()) {
        throw std::invalid_argument("capacity vector size does not match pool count");
    }
    const auto feasible = min_feasible_capacities(config);
    for (std::size_t p = 0; p < capacities.size(); ++p) {
        if (capacities[p] < feasible[p]) {
            throw std::invalid_argument(
                "capacities " + caps_to_string(capacities) +
                " fall below the feasibility lower bound " + caps_to_string(feasible));
        }
    }

    const ScenarioConfig candidate =
        with_capacities(config, capacities, criterion.projects_per_rep);
    const auto stats =
        run_replications(candidate, master_seed, criterion.replications, false, {});

    StabilityResult result;
    result.pool_mean_wait.assign(config.pools.size(), 0.0);
    std::vector<double> arrival_arts;
    std::vector<double> delivery_arts;

    for (const auto& s : stats) {
        if (s.reason != TerminationReason::StopConditionMet ||
            s.delivered_total() != criterion.projects_per_rep) {
            std::ostringstream os;
            os << "replication " << s.replication << " delivered " << s.delivered_total()
               << " of " << criterion.projects_per_rep << " (" << to_string(s.reason) << ")";
            if (!s.no_progress_detail.empty()) {
                os << ": " << s.no_progress_detail;
            }
            result.reasons.push_back(os.str());
        }
        const auto summary = summarize_replication(candidate, s);
        if (summary.arrival_art_overall) {
            arrival_arts.push_back(*summary.arrival_art_overall);
        }
        if (summary.delivery_art_overall) {
            delivery_arts.push_back(*summary.delivery_art_overall);
        }
        for (std::size_t p = 0; p < config.pools.size(); ++p) {
            result.pool_mean_wait[p] +=
                summary.pool_mean_wait[p] / static_cast<double>(stats.size());
        }
    }

    const auto arrival = summarize(arrival_arts);
    const auto delivery = summarize(delivery_arts);
    result.arrival_art = arrival.mean.value_or(0.0);
    result.delivery_art = delivery.mean.value_or(0.0);
    if (arrival.mean && delivery.mean) {
        const double bound = *arrival.mean * (1.0 + criterion.epsilon);
        if (*delivery.mean > bound) {
            std::ostringstream os;
            os << "delivery ArT mean " << *delivery.mean << " exceeds arrival ArT mean "
               << *arrival.mean << " x (1 + " << criterion.epsilon << ")";
            result.reasons.push_back(os.str());
        }
    }
    for (std::size_t p = 0; p < config.pools.size(); ++p) {
        if (result.pool_mean_wait[p] > criterion.max_wait) {
            std::ostringstream os;
            os << "pool '" << config.pools[p].name << "' mean queue wait "
               << result.pool_mean_wait[p] << " exceeds " << criterion.max_wait;
            result.reasons.push_back(os.str());
        }
    }

    result.pass = result.reasons.empty();
    return result;
}

OptimizationResult optimize(const ScenarioConfig& config, const StabilityCriterion& criterion,
                            std::uint64_t master_seed, const OptimizeOptions& options) {
    check_criterion(criterion);
    if (options.max_evaluations < 1) {
        throw std::invalid_argument("evaluation budget must be >= 1");
    }

    OptimizationResult result;
    const auto feasible = min_feasible_capacities(config);
    std::vector<std::int64_t> current = feasible;
    int simulated = 0;

    auto evaluate = [&](const std::vector<std::int64_t>& caps) -> StabilityResult {
        if (simulated >= options.max_evaluations) {
            throw BudgetExhausted("optimizer exceeded " +
                                  std::to_string(options.max_evaluations) +
                                  " simulated capacity vectors");
        }
        ++simulated;
        result.total_simulated_projects +=
            criterion.projects_per_rep * criterion.replications;
        auto stable = is_stable(config, caps, criterion, master_seed);
        Evaluation ev;
        ev.capacities = caps;
        ev.verdict = stable.pass ? Evaluation::Verdict::Pass : Evaluation::Verdict::Fail;
        ev.reasons = stable.reasons;
        ev.arrival_art = stable.arrival_art;
        ev.delivery_art = stable.delivery_art;
        ev.worst_wait = stable.pool_mean_wait.empty()
                            ? 0.0
                            : *std::max_element(stable.pool_mean_wait.begin(),
                                                stable.pool_mean_wait.end());
        result.evaluations.push_back(std::move(ev));
        return stable;
    };

    // Growth: bump the worst-wait pool until the criterion holds.
    while (true) {
        const auto stable = evaluate(current);
        if (stable.pass) {
            break;
        }
        std::size_t grow = 0;
        for (std::size_t p = 1; p < stable.pool_mean_wait.size(); ++p) {
            if (stable.pool_mean_wait[p] > stable.pool_mean_wait[grow]) {
                grow = p; // strict '>' keeps ties on the lowest index
            }
        }
        current[grow] += 1;
    }

    // Shrink: try single decrements, largest pool first, until none passes.
    bool improved = true;
    while (improved) {
        improved = false;
        std::vector<std::size_t> order(current.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (current[a] != current[b]) {
                return current[a] > current[b];
            }
            return a < b;
        });
        for (std::size_t p : order) {
            auto candidate = current;
            candidate[p] -= 1;
            if (candidate[p] < feasible[p]) {
                Evaluation ev;
                ev.capacities = candidate;
                ev.verdict = Evaluation::Verdict::Infeasible;
                ev.reasons = {"pool '" + config.pools[p].name + "' below feasibility bound " +
                              std::to_string(feasible[p])};
                result.evaluations.push_back(std::move(ev));
                continue;
            }
            if (evaluate(candidate).pass) {
                current = candidate;
                improved = true;
                break;
            }
        }
    }

    result.capacities = current;
    return result;
}

} // namespace sdlcsim
