#include "sdlcsim/scenario.hpp"
#include "sdlcsim/simulation.hpp"

#include <doctest.h>

#include <algorithm>
#include <string>

using namespace sdlcsim;

namespace {

bool has_issue(const ValidationError& e, const std::string& path_part,
               const std::string& message_part) {
    return std::any_of(e.issues().begin(), e.issues().end(), [&](const ValidationIssue& it) {
        return it.path.find(path_part) != std::string::npos &&
               it.message.find(message_part) != std::string::npos;
    });
}

} // namespace

TEST_CASE("the built-in scenario carries the reference staffing numbers") {
    const auto cfg = build_paper_scenario();

    REQUIRE(cfg.pools.size() == 5);
    CHECK(cfg.pools[0].capacity == 5);
    CHECK(cfg.pools[1].capacity == 5);
    CHECK(cfg.pools[2].capacity == 10);
    CHECK(cfg.pools[3].capacity == 20);
    CHECK(cfg.pools[4].capacity == 5);

    REQUIRE(cfg.classes.size() == 3);
    CHECK(cfg.classes[0].probability == 0.70);
    CHECK(cfg.classes[1].probability == 0.25);
    CHECK(cfg.classes[2].probability == 0.05);
    CHECK(cfg.classes[0].error_prob == 0.1);
    CHECK(cfg.classes[1].error_prob == 0.2);
    CHECK(cfg.classes[2].error_prob == 0.3);
    CHECK(cfg.classes[0].demands == std::vector<std::int64_t>{1, 1, 2, 2, 1});
    CHECK(cfg.classes[1].demands == std::vector<std::int64_t>{2, 2, 4, 6, 2});
    CHECK(cfg.classes[2].demands == std::vector<std::int64_t>{5, 5, 10, 20, 5});

    REQUIRE(cfg.phases.size() == 5);
    CHECK(cfg.phases[0].duration_per_class[0] == Distribution{Uniform(3, 5)});
    CHECK(cfg.phases[1].duration_per_class[0] == Distribution{Uniform(5, 10)});
    CHECK(cfg.phases[2].duration_per_class[0] == Distribution{Uniform(15, 20)});
    CHECK(cfg.phases[3].duration_per_class[0] == Distribution{Uniform(5, 10)});
    CHECK(cfg.phases[4].duration_per_class[0] == Distribution{Uniform(1, 3)});

    CHECK(cfg.arrival == Distribution{Triangular(30, 35, 40)});
    CHECK(cfg.project_limit == 50);

    CHECK(validate_scenario(cfg).empty());
}

TEST_CASE("serialization round-trips the built-in scenario") {
    const auto cfg = build_paper_scenario();
    const auto restored = load_scenario(save_scenario(cfg));
    CHECK(restored == cfg);
}

TEST_CASE("class probabilities must sum to one") {
    auto cfg = build_paper_scenario();
    cfg.classes[2].probability = 0.1; // 0.7 + 0.25 + 0.1
    try {
        (void)load_scenario(save_scenario(cfg));
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        CHECK(has_issue(e, "classes[].probability", "sum 1.05"));
    }
}

TEST_CASE("demands beyond pool capacity are a deadlock") {
    auto cfg = build_paper_scenario();
    cfg.classes[2].demands[3] = 25; // tester capacity is 20
    try {
        (void)load_scenario(save_scenario(cfg));
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        CHECK(has_issue(e, "classes[2].demands[3]", "exceeds pool capacity"));
        CHECK(has_issue(e, "classes[2].demands[3]", "(deadlock)"));
    }

    // The override admits the config, and the run then genuinely deadlocks.
    const auto forced = load_scenario(save_scenario(cfg), /*allow_infeasible=*/true);
    const auto stats = run_replication(forced, 3, 0);
    CHECK(stats.reason == TerminationReason::NoProgress);
}

TEST_CASE("malformed text is a parse error") {
    CHECK_THROWS_AS((void)load_scenario("{ not json"), ParseError);
    CHECK_THROWS_AS((void)load_scenario(""), ParseError);
    CHECK_THROWS_AS((void)load_scenario("[1,2,3]"), ValidationError);
}

TEST_CASE("structural violations report field paths") {
    auto cfg = build_paper_scenario();

    SUBCASE("unknown pool") {
        cfg.phases[2].pool = "contractors";
        try {
            (void)load_scenario(save_scenario(cfg));
            FAIL("expected a validation error");
        } catch (const ValidationError& e) {
            CHECK(has_issue(e, "phases[2].pool", "unknown pool 'contractors'"));
        }
    }

    SUBCASE("negative capacity") {
        cfg.pools[0].capacity = -5;
        try {
            (void)load_scenario(save_scenario(cfg), true);
            FAIL("expected a validation error");
        } catch (const ValidationError& e) {
            CHECK(has_issue(e, "pools[0].capacity", ">= 1"));
        }
    }

    SUBCASE("empty phase list") {
        cfg.phases.clear();
        for (auto& cls : cfg.classes) {
            cls.demands.clear();
        }
        try {
            (void)load_scenario(save_scenario(cfg));
            FAIL("expected a validation error");
        } catch (const ValidationError& e) {
            CHECK(has_issue(e, "phases", "must not be empty"));
        }
    }

    SUBCASE("bad project limit") {
        cfg.project_limit = 0;
        CHECK_THROWS_AS((void)load_scenario(save_scenario(cfg)), ValidationError);
    }

    SUBCASE("unknown top-level key") {
        auto text = save_scenario(cfg);
        text.insert(1, "\"bogus\": 1,");
        try {
            (void)load_scenario(text);
            FAIL("expected a validation error");
        } catch (const ValidationError& e) {
            CHECK(has_issue(e, "bogus", "unknown key"));
        }
    }

    SUBCASE("misshapen distribution") {
        auto text = save_scenario(cfg);
        const std::string needle = "\"type\": \"triangular\"";
        text.replace(text.find(needle), needle.size(), "\"type\": \"gamma\"");
        try {
            (void)load_scenario(text);
            FAIL("expected a validation error");
        } catch (const ValidationError& e) {
            CHECK(has_issue(e, "arrival.type", "unknown distribution type"));
        }
    }
}

TEST_CASE("error probability of one is rejected") {
    auto cfg = build_paper_scenario();
    cfg.classes[0].error_prob = 1.0;
    const auto issues = validate_scenario(cfg);
    REQUIRE_FALSE(issues.empty());
    CHECK(issues[0].path == "classes[0].error_prob");
}

TEST_CASE("feasibility floor per pool is the max demand") {
    const auto cfg = build_paper_scenario();
    CHECK(min_feasible_capacities(cfg) ==
          std::vector<std::int64_t>{5, 5, 10, 20, 5});

    ScenarioConfig single;
    single.pools = {{"a", 9}, {"b", 9}, {"c", 9}, {"d", 9}, {"e", 9}};
    single.classes = {{"only", 1.0, 0.0, {1, 1, 1, 1, 1}}};
    for (int p = 0; p < 5; ++p) {
        single.phases.push_back(
            {"phase" + std::to_string(p), single.pools[static_cast<std::size_t>(p)].name,
             {Uniform(1, 2)}});
    }
    single.arrival = Uniform(5, 6);
    single.project_limit = 10;
    CHECK(min_feasible_capacities(single) ==
          std::vector<std::int64_t>{1, 1, 1, 1, 1});

    ScenarioConfig two;
    two.pools = {{"a", 9}};
    two.classes = {{"x", 0.5, 0.0, {2}}, {"y", 0.5, 0.0, {3}}};
    two.phases = {{"phase", "a", {Uniform(1, 2), Uniform(1, 2)}}};
    two.arrival = Uniform(5, 6);
    two.project_limit = 10;
    CHECK(min_feasible_capacities(two) == std::vector<std::int64_t>{3});
}

TEST_CASE("optional seed and replications round-trip") {
    auto cfg = build_paper_scenario();
    cfg.seed = 99;
    cfg.replications = 7;
    const auto restored = load_scenario(save_scenario(cfg));
    CHECK(restored.seed == std::optional<std::uint64_t>{99});
    CHECK(restored.replications == std::optional<int>{7});
    CHECK(restored == cfg);
}

namespace {

ScenarioConfig random_valid_config(RngStream& rng) {
    ScenarioConfig cfg;
    const int pool_count = 1 + static_cast<int>(rng.u01() * 4);
    for (int p = 0; p < pool_count; ++p) {
        cfg.pools.push_back({"pool" + std::to_string(p),
                             3 + static_cast<std::int64_t>(rng.u01() * 20)});
    }
    const int class_count = 1 + static_cast<int>(rng.u01() * 3);
    std::vector<double> weights;
    double weight_sum = 0.0;
    for (int c = 0; c < class_count; ++c) {
        weights.push_back(0.05 + rng.u01());
        weight_sum += weights.back();
    }
    const int phase_count = 1 + static_cast<int>(rng.u01() * 4);
    for (int c = 0; c < class_count; ++c) {
        ProjectClass cls;
        cls.name = "class" + std::to_string(c);
        cls.probability = weights[static_cast<std::size_t>(c)] / weight_sum;
        cls.error_prob = rng.u01() * 0.6;
        for (int p = 0; p < phase_count; ++p) {
            cls.demands.push_back(1); // capped below by pool capacities
        }
        cfg.classes.push_back(std::move(cls));
    }
    for (int p = 0; p < phase_count; ++p) {
        PhaseSpec phase;
        phase.name = "phase" + std::to_string(p);
        const auto pool = static_cast<std::size_t>(rng.u01() * pool_count);
        phase.pool = cfg.pools[pool].name;
        for (int c = 0; c < class_count; ++c) {
            const double lo = rng.u01() * 10.0;
            const double hi = lo + 0.5 + rng.u01() * 10.0;
            if (rng.u01() < 0.5) {
                phase.duration_per_class.emplace_back(Uniform(lo, hi));
            } else {
                const double mode = lo + rng.u01() * (hi - lo);
                phase.duration_per_class.emplace_back(Triangular(lo, mode, hi));
            }
            cfg.classes[static_cast<std::size_t>(c)].demands[static_cast<std::size_t>(p)] =
                1 + static_cast<std::int64_t>(rng.u01() *
                                              static_cast<double>(cfg.pools[pool].capacity));
        }
        cfg.phases.push_back(std::move(phase));
    }
    const double lo = 1.0 + rng.u01() * 20.0;
    cfg.arrival = Uniform(lo, lo + 1.0 + rng.u01() * 20.0);
    cfg.project_limit = 1 + static_cast<std::int64_t>(rng.u01() * 100);
    if (rng.u01() < 0.5) {
        cfg.seed = static_cast<std::uint64_t>(rng.u01() * 1e6);
    }
    if (rng.u01() < 0.5) {
        cfg.replications = 1 + static_cast<int>(rng.u01() * 10);
    }
    return cfg;
}

} // namespace

TEST_CASE("round-trip identity over randomized valid configs") {
    RngStream rng(20200, 0);
    for (int iter = 0; iter < 1000; ++iter) {
        const auto cfg = random_valid_config(rng);
        REQUIRE(validate_scenario(cfg).empty());
        const auto text = save_scenario(cfg);
        const auto restored = load_scenario(text);
        CHECK(restored == cfg);
        // canonical form is a fixed point
        CHECK(save_scenario(restored) == text);

        const auto feasible = min_feasible_capacities(cfg);
        for (std::size_t p = 0; p < cfg.pools.size(); ++p) {
            CHECK(feasible[p] <= cfg.pools[p].capacity);
        }
    }
}
