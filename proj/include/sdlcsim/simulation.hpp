#pragma once

#include "sdlcsim/metrics.hpp"
#include "sdlcsim/scenario.hpp"
#include "sdlcsim/workflow.hpp"

#include <cstdint>
#include <vector>

namespace sdlcsim {

/// Runs one replication to completion. Deterministic in
/// (config, master_seed, replication).
RunStats run_replication(const ScenarioConfig& config, std::uint64_t master_seed,
                         int replication, const SimOptions& options = {});

/// Runs `count` independent replications (indices 0..count-1). Parallel
/// execution yields the same results in the same order as serial.
std::vector<RunStats> run_replications(const ScenarioConfig& config,
                                       std::uint64_t master_seed, int count,
                                       bool parallel = false,
                                       const SimOptions& options = {});

Report run_report(const ScenarioConfig& config, std::uint64_t master_seed, int count,
                  bool parallel = false, const SimOptions& options = {});

} // namespace sdlcsim
