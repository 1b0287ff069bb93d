#pragma once

#include "sdlcsim/scenario.hpp"
#include "sdlcsim/simulation.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace sdlcsim {

class BudgetExhausted : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Delivery keeps pace with arrivals: every project delivered, mean delivery
/// spacing within (1 + epsilon) of mean arrival spacing, and queue waits
/// bounded.
struct StabilityCriterion {
    double epsilon = 0.05;          // relative slack on the delivery/arrival ArT ratio
    double max_wait = 1.0;          // max mean pool-queue wait, days
    int replications = 20;
    std::int64_t projects_per_rep = 500;
};

struct StabilityResult {
    bool pass = false;
    std::vector<std::string> reasons;    // empty when passing
    double arrival_art = 0.0;            // cross-replication means
    double delivery_art = 0.0;
    std::vector<double> pool_mean_wait;  // per pool, cross-replication mean
};

/// Evaluates the criterion at the given capacities. Precondition:
/// capacities are component-wise >= min_feasible_capacities(config)
/// (throws std::invalid_argument otherwise). The same master seed drives
/// every candidate, so comparisons share random numbers.
StabilityResult is_stable(const ScenarioConfig& config,
                          const std::vector<std::int64_t>& capacities,
                          const StabilityCriterion& criterion,
                          std::uint64_t master_seed);

struct Evaluation {
    enum class Verdict { Pass, Fail, Infeasible };
    std::vector<std::int64_t> capacities;
    Verdict verdict = Verdict::Fail;
    std::vector<std::string> reasons;
    double arrival_art = 0.0;
    double delivery_art = 0.0;
    double worst_wait = 0.0;
};

struct OptimizationResult {
    std::vector<std::int64_t> capacities;
    std::vector<Evaluation> evaluations;
    std::int64_t total_simulated_projects = 0;
};

struct OptimizeOptions {
    int max_evaluations = 200; // simulated candidate vectors before giving up
};

/// Greedy search for a locally minimal stable capacity vector: grow the
/// worst-wait pool until stable, then walk capacities back down (largest
/// pool first) while single decrements still pass. Throws BudgetExhausted
/// when the evaluation cap is hit.
OptimizationResult optimize(const ScenarioConfig& config, const StabilityCriterion& criterion,
                            std::uint64_t master_seed, const OptimizeOptions& options = {});

} // namespace sdlcsim
