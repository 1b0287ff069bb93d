#pragma once

#include "sdlcsim/scenario.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace sdlcsim {

class ZeroHorizon : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class MixedConfigs : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct PoolRunStats {
    double busy_integral = 0.0;   // unit-days of held capacity
    double demand_integral = 0.0; // unit-days of held + queued capacity
    double wait_total = 0.0;      // queue wait summed over every capture request
    std::int64_t requests = 0;
    std::int64_t queued_requests = 0; // requests that did not grant immediately
    std::int64_t max_queue_len = 0;
};

struct PhaseTransitionCounts {
    std::int64_t ok = 0;
    std::int64_t error = 0;
};

struct TimeseriesRow {
    double time = 0.0;
    int pool = 0;
    std::int64_t busy = 0;
    std::int64_t queued = 0;
};

/// Everything one replication produces. Bit-for-bit reproducible from
/// (config, master seed, replication index).
struct RunStats {
    int replication = 0;
    std::uint64_t config_digest = 0;

    std::vector<std::int64_t> received_per_class;
    std::vector<std::int64_t> delivered_per_class;
    std::vector<std::vector<double>> arrival_times_per_class;
    std::vector<std::vector<double>> delivery_times_per_class;

    std::vector<PoolRunStats> pools;
    std::vector<std::vector<PhaseTransitionCounts>> transitions; // [class][phase]
    std::vector<std::int64_t> phase_visits_per_class;
    std::int64_t max_rework = 0;

    double horizon = 0.0; // time of the last dispatched event
    std::uint64_t dispatches = 0;
    std::uint64_t trace_digest = 0;
    TerminationReason reason = TerminationReason::EventListEmpty;
    std::string no_progress_detail;
    std::int64_t in_system_at_end = 0;

    std::vector<TimeseriesRow> timeseries; // only when requested

    std::int64_t received_total() const;
    std::int64_t delivered_total() const;
};

/// Mean gap between consecutive timestamps (sorted ascending); empty for
/// fewer than two timestamps.
std::optional<double> art_mean(const std::vector<double>& timestamps);

struct BusyAverage {
    double avg_busy = 0.0;    // time-averaged held units
    double utilization = 0.0; // avg_busy / capacity
    double avg_demand = 0.0;  // time-averaged held + queued units
};

BusyAverage busy_average(const PoolRunStats& pool, std::int64_t capacity, double horizon);

/// Expected visits per phase for the rework chain: completing phase i moves
/// to i+1 with probability 1-q (delivered after the last phase) and back to
/// max(i-1, first) with probability q. Solves v = e1 + P^T v.
std::vector<double> expected_phase_visits(double error_prob, int phase_count = 5);

/// Uncapacitated expected time-average busy units per pool:
/// L_p = lambda * sum_c mix_c * sum_{phases on p} visits * demand * E[duration].
std::vector<double> littles_law_expectations(const ScenarioConfig& config);

struct SummaryValue {
    std::optional<double> mean;
    std::optional<double> stddev; // sample (n-1) deviation; absent for n < 2
    std::int64_t n = 0;
};

SummaryValue summarize(const std::vector<double>& values);

/// Per-replication derived metrics, shared by the report writer and the
/// optimizer's stability test.
struct ReplicationSummary {
    int replication = 0;
    std::int64_t received_total = 0;
    std::int64_t delivered_total = 0;
    std::optional<double> arrival_art_overall;
    std::optional<double> delivery_art_overall;
    std::vector<std::optional<double>> arrival_art_per_class;
    std::vector<std::optional<double>> delivery_art_per_class;
    std::vector<BusyAverage> pool_busy;
    std::vector<double> pool_mean_wait; // wait_total / requests, 0 when unused
};

ReplicationSummary summarize_replication(const ScenarioConfig& config, const RunStats& stats);

struct Report {
    ScenarioConfig scenario;
    std::uint64_t seed = 0;
    std::vector<RunStats> replications;
    std::string tool_version;
};

/// Requires at least one replication, all from the same config (by digest).
Report merge_replications(const ScenarioConfig& config, std::uint64_t seed,
                          std::vector<RunStats> stats);

/// Deterministic bytes: fixed key order, trailing newline. Reruns with the
/// same seed and config serialize identically.
std::string report_to_json(const Report& report);

/// Step-function series per pool: header `time,pool,busy,queued`, times with
/// six decimal places.
std::string timeseries_to_csv(const RunStats& stats, const ScenarioConfig& config);

} // namespace sdlcsim
