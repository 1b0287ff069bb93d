#include "sdlcsim/metrics.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace sdlcsim {

namespace {

using Json = nlohmann::ordered_json;

constexpr const char* kToolVersion = "0.1.0";

// Gaussian elimination with partial pivoting; the systems here are tiny
// (one row per phase).
std::vector<double> solve_linear(std::vector<std::vector<double>> a,
                                 std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t row = col + 1; row < n; ++row) {
            if (std::abs(a[row][col]) > std::abs(a[pivot][col])) {
                pivot = row;
            }
        }
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        if (a[col][col] == 0.0) {
            throw std::runtime_error("singular visit-count system");
        }
        for (std::size_t row = col + 1; row < n; ++row) {
            const double f = a[row][col] / a[col][col];
            if (f == 0.0) {
                continue;
            }
            for (std::size_t k = col; k < n; ++k) {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    std::vector<double> x(n, 0.0);
    for (std::size_t row = n; row-- > 0;) {
        double acc = b[row];
        for (std::size_t k = row + 1; k < n; ++k) {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    return x;
}

std::vector<double> merged_sorted(const std::vector<std::vector<double>>& lists) {
    std::vector<double> all;
    std::size_t total = 0;
    for (const auto& l : lists) {
        total += l.size();
    }
    all.reserve(total);
    for (const auto& l : lists) {
        all.insert(all.end(), l.begin(), l.end());
    }
    std::sort(all.begin(), all.end());
    return all;
}

std::string hex_digest(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

Json optional_to_json(const std::optional<double>& v) {
    if (v) {
        return *v;
    }
    return nullptr;
}

Json summary_to_json(const SummaryValue& s) {
    Json j;
    if (s.mean) {
        j["mean"] = *s.mean;
    }
    if (s.stddev) {
        j["std"] = *s.stddev;
    }
    j["n"] = s.n;
    return j;
}

SummaryValue summarize_optional(const std::vector<std::optional<double>>& values) {
    std::vector<double> defined;
    for (const auto& v : values) {
        if (v) {
            defined.push_back(*v);
        }
    }
    return summarize(defined);
}

} // namespace

std::int64_t RunStats::received_total() const {
    return std::accumulate(received_per_class.begin(), received_per_class.end(),
                           std::int64_t{0});
}

std::int64_t RunStats::delivered_total() const {
    return std::accumulate(delivered_per_class.begin(), delivered_per_class.end(),
                           std::int64_t{0});
}

std::optional<double> art_mean(const std::vector<double>& timestamps) {
    if (timestamps.size() < 2) {
        return std::nullopt;
    }
    return (timestamps.back() - timestamps.front()) /
           static_cast<double>(timestamps.size() - 1);
}

BusyAverage busy_average(const PoolRunStats& pool, std::int64_t capacity, double horizon) {
    if (!(horizon > 0.0)) {
        throw ZeroHorizon("busy average requires a positive horizon");
    }
    BusyAverage out;
    out.avg_busy = pool.busy_integral / horizon;
    out.utilization = capacity > 0 ? out.avg_busy / static_cast<double>(capacity) : 0.0;
    out.avg_demand = pool.demand_integral / horizon;
    return out;
}

std::vector<double> expected_phase_visits(double error_prob, int phase_count) {
    if (!(error_prob >= 0.0 && error_prob < 1.0)) {
        throw std::invalid_argument("error probability must be in [0,1)");
    }
    if (phase_count < 1) {
        throw std::invalid_argument("phase count must be >= 1");
    }
    const auto n = static_cast<std::size_t>(phase_count);
    const double q = error_prob;

    // v = e1 + P^T v, with P the transient transition matrix: from phase i,
    // ok (1-q) moves to i+1 (absorbed after the last phase), error (q) moves
    // to max(i-1, 0).
    std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        a[i][i] += 1.0;
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (i + 1 < n) {
            a[i + 1][i] -= 1.0 - q; // ok: i -> i+1
        }
        const std::size_t back = i == 0 ? 0 : i - 1;
        a[back][i] -= q; // error: i -> max(i-1, 0)
    }
    std::vector<double> rhs(n, 0.0);
    rhs[0] = 1.0;
    return solve_linear(std::move(a), std::move(rhs));
}

std::vector<double> littles_law_expectations(const ScenarioConfig& config) {
    const double lambda = 1.0 / moments(config.arrival).mean;
    std::vector<double> expected(config.pools.size(), 0.0);
    for (std::size_t c = 0; c < config.classes.size(); ++c) {
        const auto& cls = config.classes[c];
        const auto visits =
            expected_phase_visits(cls.error_prob, static_cast<int>(config.phases.size()));
        for (std::size_t p = 0; p < config.phases.size(); ++p) {
            const int pool = config.pool_index(config.phases[p].pool);
            if (pool < 0 || p >= cls.demands.size()) {
                continue;
            }
            const double mean_duration =
                moments(config.phases[p].duration_per_class[c]).mean;
            expected[pool] += lambda * cls.probability * visits[p] *
                              static_cast<double>(cls.demands[p]) * mean_duration;
        }
    }
    return expected;
}

SummaryValue summarize(const std::vector<double>& values) {
    SummaryValue out;
    out.n = static_cast<std::int64_t>(values.size());
    if (values.empty()) {
        return out;
    }
    const double mean =
        std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    out.mean = mean;
    if (values.size() >= 2) {
        double ss = 0.0;
        for (double v : values) {
            ss += (v - mean) * (v - mean);
        }
        out.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return out;
}

ReplicationSummary summarize_replication(const ScenarioConfig& config, const RunStats& stats) {
    ReplicationSummary out;
    out.replication = stats.replication;
    out.received_total = stats.received_total();
    out.delivered_total = stats.delivered_total();
    out.arrival_art_overall = art_mean(merged_sorted(stats.arrival_times_per_class));
    out.delivery_art_overall = art_mean(merged_sorted(stats.delivery_times_per_class));
    for (std::size_t c = 0; c < config.classes.size(); ++c) {
        out.arrival_art_per_class.push_back(art_mean(stats.arrival_times_per_class[c]));
        out.delivery_art_per_class.push_back(art_mean(stats.delivery_times_per_class[c]));
    }
    for (std::size_t p = 0; p < config.pools.size(); ++p) {
        out.pool_busy.push_back(
            busy_average(stats.pools[p], config.pools[p].capacity, stats.horizon));
        const auto& ps = stats.pools[p];
        out.pool_mean_wait.push_back(
            ps.requests > 0 ? ps.wait_total / static_cast<double>(ps.requests) : 0.0);
    }
    return out;
}

Report merge_replications(const ScenarioConfig& config, std::uint64_t seed,
                          std::vector<RunStats> stats) {
    if (stats.empty()) {
        throw std::invalid_argument("at least one replication is required");
    }
    const std::uint64_t digest = scenario_digest(config);
    for (const auto& s : stats) {
        if (s.config_digest != digest) {
            throw MixedConfigs("replications come from different configs");
        }
    }
    std::sort(stats.begin(), stats.end(),
              [](const RunStats& a, const RunStats& b) { return a.replication < b.replication; });
    Report report;
    report.scenario = config;
    report.seed = seed;
    report.replications = std::move(stats);
    report.tool_version = kToolVersion;
    return report;
}

std::string report_to_json(const Report& report) {
    const auto& config = report.scenario;
    Json doc;
    doc["scenario"] = Json::parse(save_scenario(config));
    doc["seed"] = report.seed;
    doc["tool_version"] = report.tool_version;

    std::vector<ReplicationSummary> summaries;
    summaries.reserve(report.replications.size());
    for (const auto& stats : report.replications) {
        summaries.push_back(summarize_replication(config, stats));
    }

    doc["replications"] = Json::array();
    for (std::size_t r = 0; r < report.replications.size(); ++r) {
        const auto& stats = report.replications[r];
        const auto& sum = summaries[r];
        Json j;
        j["replication"] = stats.replication;
        j["reason"] = to_string(stats.reason);
        if (!stats.no_progress_detail.empty()) {
            j["no_progress_detail"] = stats.no_progress_detail;
        }
        j["final_clock"] = stats.horizon;
        j["dispatches"] = stats.dispatches;
        j["trace_digest"] = hex_digest(stats.trace_digest);
        j["in_system_at_end"] = stats.in_system_at_end;
        j["max_rework"] = stats.max_rework;

        Json received;
        received["total"] = sum.received_total;
        Json delivered;
        delivered["total"] = sum.delivered_total;
        Json arrival_art;
        arrival_art["overall"] = optional_to_json(sum.arrival_art_overall);
        Json delivery_art;
        delivery_art["overall"] = optional_to_json(sum.delivery_art_overall);
        for (std::size_t c = 0; c < config.classes.size(); ++c) {
            const auto& name = config.classes[c].name;
            received[name] = stats.received_per_class[c];
            delivered[name] = stats.delivered_per_class[c];
            arrival_art[name] = optional_to_json(sum.arrival_art_per_class[c]);
            delivery_art[name] = optional_to_json(sum.delivery_art_per_class[c]);
        }
        j["received"] = std::move(received);
        j["delivered"] = std::move(delivered);
        j["arrival_art"] = std::move(arrival_art);
        j["delivery_art"] = std::move(delivery_art);

        j["pools"] = Json::array();
        for (std::size_t p = 0; p < config.pools.size(); ++p) {
            Json pj;
            pj["name"] = config.pools[p].name;
            pj["capacity"] = config.pools[p].capacity;
            pj["avg_busy"] = sum.pool_busy[p].avg_busy;
            pj["utilization"] = sum.pool_busy[p].utilization;
            pj["avg_demand"] = sum.pool_busy[p].avg_demand;
            pj["mean_wait"] = sum.pool_mean_wait[p];
            pj["max_queue_len"] = stats.pools[p].max_queue_len;
            j["pools"].push_back(std::move(pj));
        }
        doc["replications"].push_back(std::move(j));
    }

    auto collect = [&](auto&& get) {
        std::vector<std::optional<double>> vals;
        vals.reserve(summaries.size());
        for (const auto& s : summaries) {
            vals.push_back(get(s));
        }
        return summarize_optional(vals);
    };
    using Sum = const ReplicationSummary&;

    Json agg;
    agg["received_total"] = summary_to_json(collect(
        [](Sum s) { return std::optional<double>(static_cast<double>(s.received_total)); }));
    agg["delivered_total"] = summary_to_json(collect(
        [](Sum s) { return std::optional<double>(static_cast<double>(s.delivered_total)); }));
    agg["arrival_art_overall"] =
        summary_to_json(collect([](Sum s) { return s.arrival_art_overall; }));
    agg["delivery_art_overall"] =
        summary_to_json(collect([](Sum s) { return s.delivery_art_overall; }));

    Json arrival_by_class;
    Json delivery_by_class;
    for (std::size_t c = 0; c < config.classes.size(); ++c) {
        arrival_by_class[config.classes[c].name] =
            summary_to_json(collect([c](Sum s) { return s.arrival_art_per_class[c]; }));
        delivery_by_class[config.classes[c].name] =
            summary_to_json(collect([c](Sum s) { return s.delivery_art_per_class[c]; }));
    }
    agg["arrival_art_per_class"] = std::move(arrival_by_class);
    agg["delivery_art_per_class"] = std::move(delivery_by_class);

    agg["pools"] = Json::array();
    for (std::size_t p = 0; p < config.pools.size(); ++p) {
        Json pj;
        pj["name"] = config.pools[p].name;
        pj["avg_busy"] = summary_to_json(collect(
            [p](Sum s) { return std::optional<double>(s.pool_busy[p].avg_busy); }));
        pj["utilization"] = summary_to_json(collect(
            [p](Sum s) { return std::optional<double>(s.pool_busy[p].utilization); }));
        pj["avg_demand"] = summary_to_json(collect(
            [p](Sum s) { return std::optional<double>(s.pool_busy[p].avg_demand); }));
        pj["mean_wait"] = summary_to_json(collect(
            [p](Sum s) { return std::optional<double>(s.pool_mean_wait[p]); }));
        agg["pools"].push_back(std::move(pj));
    }
    doc["aggregate"] = std::move(agg);

    return doc.dump(2) + "\n";
}

std::string timeseries_to_csv(const RunStats& stats, const ScenarioConfig& config) {
    std::string out = "time,pool,busy,queued\n";
    char buf[160];
    for (const auto& row : stats.timeseries) {
        std::snprintf(buf, sizeof(buf), "%.6f,%s,%lld,%lld\n", row.time,
                      config.pools[static_cast<std::size_t>(row.pool)].name.c_str(),
                      static_cast<long long>(row.busy), static_cast<long long>(row.queued));
        out += buf;
    }
    return out;
}

} // namespace sdlcsim
