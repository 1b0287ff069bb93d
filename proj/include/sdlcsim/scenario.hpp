#pragma once

#include "sdlcsim/engine.hpp"
#include "sdlcsim/random.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sdlcsim {

struct PoolSpec {
    std::string name;
    std::int64_t capacity = 0;
    bool operator==(const PoolSpec&) const = default;
};

struct ProjectClass {
    std::string name;
    double probability = 0.0; // mix weight
    double error_prob = 0.0;  // applied after every phase completion
    std::vector<std::int64_t> demands; // units of each phase's pool, one per phase
    bool operator==(const ProjectClass&) const = default;
};

struct PhaseSpec {
    std::string name;
    std::string pool;
    std::vector<Distribution> duration_per_class; // one law per class
    bool operator==(const PhaseSpec&) const = default;
};

struct ScenarioConfig {
    std::vector<PoolSpec> pools;
    std::vector<ProjectClass> classes;
    std::vector<PhaseSpec> phases;
    Distribution arrival = Uniform(0.0, 1.0);
    std::int64_t project_limit = 1;
    std::optional<std::uint64_t> seed;
    std::optional<int> replications;

    bool operator==(const ScenarioConfig&) const = default;

    /// Runs terminate once every sourced project is delivered, then drain.
    StopCondition stop() const { return StopCondition::after_deliveries(project_limit); }

    int pool_index(std::string_view name) const; // -1 when unknown
};

struct ValidationIssue {
    std::string path;
    std::string message;
};

class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(std::vector<ValidationIssue> issues);
    const std::vector<ValidationIssue>& issues() const { return issues_; }

private:
    std::vector<ValidationIssue> issues_;
};

/// The built-in reference scenario: five staffed phases, three project
/// classes (70/25/5 mix, 10/20/30% per-phase error), triangular arrivals,
/// 50 projects.
ScenarioConfig build_paper_scenario();

/// Issues are empty for a valid config. `allow_infeasible` skips only the
/// demand-vs-capacity deadlock check (used to exercise no-progress paths).
std::vector<ValidationIssue> validate_scenario(const ScenarioConfig& config,
                                               bool allow_infeasible = false);

ScenarioConfig load_scenario(const std::string& text, bool allow_infeasible = false);
ScenarioConfig load_scenario_file(const std::string& path, bool allow_infeasible = false);

/// Canonical JSON; load(save(config)) == config.
std::string save_scenario(const ScenarioConfig& config);

/// Per pool, the largest demand any (class, phase) pair places on it:
/// the smallest capacities that avoid a guaranteed deadlock.
std::vector<std::int64_t> min_feasible_capacities(const ScenarioConfig& config);

/// Hash of the canonical serialization; tags stats so replications from
/// different configs cannot be merged.
std::uint64_t scenario_digest(const ScenarioConfig& config);

} // namespace sdlcsim
