#include "sdlcsim/metrics.hpp"
#include "sdlcsim/optimizer.hpp"
#include "sdlcsim/scenario.hpp"
#include "sdlcsim/simulation.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using sdlcsim::ScenarioConfig;

namespace {

// Exit codes: 0 ok, 1 config/usage error, 2 no progress (deadlock or
// starved source), 3 optimizer budget exhausted.
constexpr int kExitOk = 0;
constexpr int kExitConfigError = 1;
constexpr int kExitNoProgress = 2;
constexpr int kExitBudgetExhausted = 3;

struct CommonArgs {
    std::string scenario_path;
    std::uint64_t seed = 42;
    bool seed_given = false;
    int replications = 5;
    bool replications_given = false;
    std::int64_t projects = 0; // 0 = keep the scenario's project_limit
    std::string out_dir = "out";
    bool parallel = false;
    bool allow_infeasible = false;
};

void add_common_options(CLI::App* cmd, CommonArgs& args, bool with_scenario,
                        bool scenario_required) {
    if (with_scenario) {
        auto* opt = cmd->add_option("--scenario", args.scenario_path, "Scenario JSON file");
        if (scenario_required) {
            opt->required();
        }
    }
    cmd->add_option("--seed", args.seed, "Master seed (default 42)")
        ->each([&args](const std::string&) { args.seed_given = true; });
    cmd->add_option("--replications", args.replications, "Replication count (default 5)")
        ->check(CLI::PositiveNumber)
        ->each([&args](const std::string&) { args.replications_given = true; });
    cmd->add_option("--projects", args.projects, "Override the scenario's project count")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--out", args.out_dir, "Output directory (default ./out)");
    cmd->add_flag("--parallel", args.parallel, "Run replications in parallel");
}

int report_config_error(const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kExitConfigError;
}

// Scenario-file values fill in whatever the flags did not set.
void apply_precedence(const ScenarioConfig& config, CommonArgs& args) {
    if (!args.seed_given && config.seed) {
        args.seed = *config.seed;
    }
    if (!args.replications_given && config.replications) {
        args.replications = *config.replications;
    }
}

bool write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        std::cerr << "cannot write " << path.string() << "\n";
        return false;
    }
    out << content;
    return out.good();
}

std::string format_optional(const std::optional<double>& v) {
    if (!v) {
        return "-";
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", *v);
    return buf;
}

void print_summary(const sdlcsim::Report& report) {
    const auto& config = report.scenario;
    std::vector<sdlcsim::ReplicationSummary> summaries;
    for (const auto& stats : report.replications) {
        summaries.push_back(sdlcsim::summarize_replication(config, stats));
    }
    const auto n = static_cast<double>(summaries.size());

    std::cout << "replications: " << summaries.size() << "  seed: " << report.seed << "\n";
    for (std::size_t r = 0; r < report.replications.size(); ++r) {
        const auto& stats = report.replications[r];
        std::cout << "  rep " << stats.replication << ": received "
                  << stats.received_total() << ", delivered " << stats.delivered_total()
                  << ", final clock " << std::fixed << std::setprecision(1) << stats.horizon
                  << std::defaultfloat << " days (" << to_string(stats.reason) << ")\n";
        if (!stats.no_progress_detail.empty()) {
            std::cout << "    " << stats.no_progress_detail << "\n";
        }
    }

    std::cout << "\nprojects (means across replications)\n";
    std::cout << std::left << std::setw(14) << "class" << std::right << std::setw(10)
              << "received" << std::setw(14) << "arrival ArT" << std::setw(11) << "delivered"
              << std::setw(14) << "delivery ArT" << "\n";
    auto art_row = [&](const std::string& name, auto received, auto delivered,
                       const std::optional<double>& arr, const std::optional<double>& del) {
        std::cout << std::left << std::setw(14) << name << std::right << std::setw(10)
                  << std::fixed << std::setprecision(1) << received << std::setw(14)
                  << format_optional(arr) << std::setw(11) << delivered << std::setw(14)
                  << format_optional(del) << std::defaultfloat << "\n";
    };
    for (std::size_t c = 0; c < config.classes.size(); ++c) {
        double received = 0;
        double delivered = 0;
        std::vector<double> arr;
        std::vector<double> del;
        for (std::size_t r = 0; r < report.replications.size(); ++r) {
            received += static_cast<double>(report.replications[r].received_per_class[c]) / n;
            delivered += static_cast<double>(report.replications[r].delivered_per_class[c]) / n;
            if (summaries[r].arrival_art_per_class[c]) {
                arr.push_back(*summaries[r].arrival_art_per_class[c]);
            }
            if (summaries[r].delivery_art_per_class[c]) {
                del.push_back(*summaries[r].delivery_art_per_class[c]);
            }
        }
        art_row(config.classes[c].name, received, delivered,
                sdlcsim::summarize(arr).mean, sdlcsim::summarize(del).mean);
    }
    {
        double received = 0;
        double delivered = 0;
        std::vector<double> arr;
        std::vector<double> del;
        for (std::size_t r = 0; r < report.replications.size(); ++r) {
            received += static_cast<double>(report.replications[r].received_total()) / n;
            delivered += static_cast<double>(report.replications[r].delivered_total()) / n;
            if (summaries[r].arrival_art_overall) {
                arr.push_back(*summaries[r].arrival_art_overall);
            }
            if (summaries[r].delivery_art_overall) {
                del.push_back(*summaries[r].delivery_art_overall);
            }
        }
        art_row("total", received, delivered, sdlcsim::summarize(arr).mean,
                sdlcsim::summarize(del).mean);
    }

    std::cout << "\nresources (time-averaged: avg busy units, utilization = busy/capacity,\n"
                 "avg demand = busy + queued units, mean queue wait per request in days)\n";
    std::cout << std::left << std::setw(14) << "pool" << std::right << std::setw(9) << "capacity"
              << std::setw(10) << "avg busy" << std::setw(13) << "utilization" << std::setw(12)
              << "avg demand" << std::setw(11) << "mean wait" << "\n";
    for (std::size_t p = 0; p < config.pools.size(); ++p) {
        double busy = 0;
        double util = 0;
        double demand = 0;
        double wait = 0;
        for (const auto& s : summaries) {
            busy += s.pool_busy[p].avg_busy / n;
            util += s.pool_busy[p].utilization / n;
            demand += s.pool_busy[p].avg_demand / n;
            wait += s.pool_mean_wait[p] / n;
        }
        std::cout << std::left << std::setw(14) << config.pools[p].name << std::right
                  << std::setw(9) << config.pools[p].capacity << std::fixed
                  << std::setprecision(2) << std::setw(10) << busy << std::setw(13) << util
                  << std::setw(12) << demand << std::setw(11) << wait << std::defaultfloat
                  << "\n";
    }
}

int do_run(const ScenarioConfig& config, const CommonArgs& args) {
    ScenarioConfig cfg = config;
    if (args.projects > 0) {
        cfg.project_limit = args.projects;
    }

    sdlcsim::Report report;
    try {
        report = sdlcsim::run_report(cfg, args.seed, args.replications, args.parallel,
                                     {.collect_timeseries = true});
    } catch (const std::exception& e) {
        return report_config_error(e);
    }

    std::error_code ec;
    fs::create_directories(args.out_dir, ec);
    if (ec) {
        std::cerr << "cannot create output directory " << args.out_dir << "\n";
        return kExitConfigError;
    }
    const fs::path out = args.out_dir;
    if (!write_file(out / "report.json", sdlcsim::report_to_json(report))) {
        return kExitConfigError;
    }
    for (const auto& stats : report.replications) {
        const std::string name = "timeseries_rep" + std::to_string(stats.replication) + ".csv";
        if (!write_file(out / name, sdlcsim::timeseries_to_csv(stats, cfg))) {
            return kExitConfigError;
        }
    }

    print_summary(report);
    std::cout << "\nwrote " << (out / "report.json").string() << " and "
              << report.replications.size() << " timeseries CSV file(s)\n";

    for (const auto& stats : report.replications) {
        if (stats.reason == sdlcsim::TerminationReason::NoProgress) {
            std::cerr << "no progress in replication " << stats.replication << ": "
                      << stats.no_progress_detail << "\n";
            return kExitNoProgress;
        }
    }
    return kExitOk;
}

int cmd_paper(const CommonArgs& args) {
    return do_run(sdlcsim::build_paper_scenario(), args);
}

int cmd_run(const CommonArgs& args) {
    ScenarioConfig config;
    try {
        config = sdlcsim::load_scenario_file(args.scenario_path, args.allow_infeasible);
    } catch (const std::exception& e) {
        return report_config_error(e);
    }
    CommonArgs effective = args;
    apply_precedence(config, effective);
    return do_run(config, effective);
}

int cmd_validate(const std::string& path) {
    try {
        sdlcsim::load_scenario_file(path);
    } catch (const sdlcsim::ValidationError& e) {
        for (const auto& issue : e.issues()) {
            std::cerr << issue.path << ": " << issue.message << "\n";
        }
        return kExitConfigError;
    } catch (const std::exception& e) {
        return report_config_error(e);
    }
    std::cout << path << ": OK\n";
    return kExitOk;
}

// Resolves a dot path into the scenario JSON document. Array steps accept
// an index or, for arrays of named objects, the object's name.
nlohmann::ordered_json* resolve_param(nlohmann::ordered_json& root, const std::string& path) {
    nlohmann::ordered_json* node = &root;
    std::stringstream ss(path);
    std::string token;
    while (std::getline(ss, token, '.')) {
        if (token.empty()) {
            return nullptr;
        }
        if (node->is_array()) {
            bool numeric = std::all_of(token.begin(), token.end(),
                                       [](unsigned char ch) { return std::isdigit(ch); });
            if (numeric) {
                const auto idx = static_cast<std::size_t>(std::stoull(token));
                if (idx >= node->size()) {
                    return nullptr;
                }
                node = &(*node)[idx];
                continue;
            }
            nlohmann::ordered_json* match = nullptr;
            for (auto& item : *node) {
                if (item.is_object() && item.contains("name") && item["name"] == token) {
                    match = &item;
                    break;
                }
            }
            if (match == nullptr) {
                return nullptr;
            }
            node = match;
            continue;
        }
        if (node->is_object() && node->contains(token)) {
            node = &(*node)[token];
            continue;
        }
        return nullptr;
    }
    return node;
}

int cmd_sweep(const CommonArgs& args, const std::string& param,
              const std::vector<double>& values) {
    if (values.empty()) {
        std::cerr << "sweep requires at least one value\n";
        return kExitConfigError;
    }
    std::string text;
    try {
        std::ifstream in(args.scenario_path, std::ios::binary);
        if (!in) {
            throw sdlcsim::ParseError("cannot open scenario file: " + args.scenario_path);
        }
        std::ostringstream buf;
        buf << in.rdbuf();
        text = buf.str();
    } catch (const std::exception& e) {
        return report_config_error(e);
    }

    nlohmann::ordered_json doc;
    try {
        doc = nlohmann::ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        return report_config_error(sdlcsim::ParseError(e.what()));
    }

    std::string csv = "value,replication,received,delivered,arrival_art,delivery_art,"
                      "max_pool_mean_wait\n";
    for (double value : values) {
        nlohmann::ordered_json candidate = doc;
        nlohmann::ordered_json* slot = resolve_param(candidate, param);
        if (slot == nullptr || !slot->is_number()) {
            std::cerr << "unknown numeric parameter path '" << param << "'\n";
            return kExitConfigError;
        }
        if (slot->is_number_integer() || slot->is_number_unsigned()) {
            if (value != std::floor(value)) {
                std::cerr << "parameter '" << param << "' takes integers, got " << value
                          << "\n";
                return kExitConfigError;
            }
            *slot = static_cast<std::int64_t>(value);
        } else {
            *slot = value;
        }

        ScenarioConfig config;
        try {
            config = sdlcsim::load_scenario(candidate.dump(), args.allow_infeasible);
        } catch (const std::exception& e) {
            std::cerr << "value " << value << ": " << e.what() << "\n";
            return kExitConfigError;
        }
        CommonArgs effective = args;
        apply_precedence(config, effective);
        if (effective.projects > 0) {
            config.project_limit = effective.projects;
        }

        const auto stats = sdlcsim::run_replications(config, effective.seed,
                                                     effective.replications, effective.parallel);
        for (const auto& s : stats) {
            const auto summary = sdlcsim::summarize_replication(config, s);
            const double worst_wait =
                summary.pool_mean_wait.empty()
                    ? 0.0
                    : *std::max_element(summary.pool_mean_wait.begin(),
                                        summary.pool_mean_wait.end());
            char buf[256];
            std::snprintf(buf, sizeof(buf), "%.10g,%d,%lld,%lld,%.6f,%.6f,%.6f\n", value,
                          s.replication, static_cast<long long>(s.received_total()),
                          static_cast<long long>(s.delivered_total()),
                          summary.arrival_art_overall.value_or(0.0),
                          summary.delivery_art_overall.value_or(0.0), worst_wait);
            csv += buf;
        }
    }

    std::error_code ec;
    fs::create_directories(args.out_dir, ec);
    const fs::path out = fs::path(args.out_dir) / "sweep.csv";
    if (!write_file(out, csv)) {
        return kExitConfigError;
    }
    std::cout << csv;
    std::cout << "wrote " << out.string() << "\n";
    return kExitOk;
}

int cmd_optimize(const CommonArgs& args, const sdlcsim::StabilityCriterion& criterion,
                 int budget) {
    ScenarioConfig config;
    try {
        config = args.scenario_path.empty()
                     ? sdlcsim::build_paper_scenario()
                     : sdlcsim::load_scenario_file(args.scenario_path);
    } catch (const std::exception& e) {
        return report_config_error(e);
    }
    CommonArgs effective = args;
    apply_precedence(config, effective);

    sdlcsim::OptimizationResult result;
    try {
        result = sdlcsim::optimize(config, criterion, effective.seed, {budget});
    } catch (const sdlcsim::BudgetExhausted& e) {
        std::cerr << e.what() << "\n";
        return kExitBudgetExhausted;
    } catch (const std::exception& e) {
        return report_config_error(e);
    }

    auto caps_str = [&](const std::vector<std::int64_t>& caps) {
        std::string s = "(";
        for (std::size_t i = 0; i < caps.size(); ++i) {
            s += (i > 0 ? "," : "") + std::to_string(caps[i]);
        }
        return s + ")";
    };

    std::cout << "evaluations:\n";
    for (std::size_t i = 0; i < result.evaluations.size(); ++i) {
        const auto& ev = result.evaluations[i];
        const char* verdict = ev.verdict == sdlcsim::Evaluation::Verdict::Pass ? "pass"
                              : ev.verdict == sdlcsim::Evaluation::Verdict::Fail
                                  ? "fail"
                                  : "infeasible";
        std::cout << "  [" << i << "] " << caps_str(ev.capacities) << " " << verdict;
        for (const auto& reason : ev.reasons) {
            std::cout << "; " << reason;
        }
        std::cout << "\n";
    }
    std::cout << "optimal capacities:\n";
    for (std::size_t p = 0; p < config.pools.size(); ++p) {
        std::cout << "  " << config.pools[p].name << ": " << result.capacities[p] << "\n";
    }
    std::cout << "total simulated projects: " << result.total_simulated_projects << "\n";

    nlohmann::ordered_json doc;
    doc["seed"] = effective.seed;
    doc["criterion"] = {{"epsilon", criterion.epsilon},
                        {"max_wait", criterion.max_wait},
                        {"replications", criterion.replications},
                        {"projects_per_rep", criterion.projects_per_rep}};
    doc["capacities"] = nlohmann::ordered_json::object();
    for (std::size_t p = 0; p < config.pools.size(); ++p) {
        doc["capacities"][config.pools[p].name] = result.capacities[p];
    }
    doc["total_simulated_projects"] = result.total_simulated_projects;
    doc["evaluations"] = nlohmann::ordered_json::array();
    for (const auto& ev : result.evaluations) {
        nlohmann::ordered_json j;
        j["capacities"] = ev.capacities;
        j["verdict"] = ev.verdict == sdlcsim::Evaluation::Verdict::Pass ? "pass"
                       : ev.verdict == sdlcsim::Evaluation::Verdict::Fail ? "fail"
                                                                          : "infeasible";
        j["reasons"] = ev.reasons;
        if (ev.verdict != sdlcsim::Evaluation::Verdict::Infeasible) {
            j["arrival_art"] = ev.arrival_art;
            j["delivery_art"] = ev.delivery_art;
            j["worst_wait"] = ev.worst_wait;
        }
        doc["evaluations"].push_back(std::move(j));
    }

    std::error_code ec;
    fs::create_directories(args.out_dir, ec);
    const fs::path out = fs::path(args.out_dir) / "optimize.json";
    if (!write_file(out, doc.dump(2) + "\n")) {
        return kExitConfigError;
    }
    std::cout << "wrote " << out.string() << "\n";
    return kExitOk;
}

} // namespace

namespace {

int run_main(int argc, char** argv) {
    CLI::App app{"sdlcsim: discrete-event staffing simulator for phase-gated delivery "
                 "pipelines"};
    app.require_subcommand(1);

    CommonArgs paper_args;
    paper_args.projects = 0;
    auto* paper = app.add_subcommand("paper", "Run the built-in reference scenario");
    add_common_options(paper, paper_args, false, false);

    CommonArgs run_args;
    auto* run = app.add_subcommand("run", "Run a scenario file");
    add_common_options(run, run_args, true, true);
    run->add_flag("--allow-infeasible", run_args.allow_infeasible,
                  "Skip the demand-vs-capacity deadlock check");

    std::string validate_path;
    auto* validate = app.add_subcommand("validate", "Validate a scenario file");
    validate->add_option("--scenario", validate_path, "Scenario JSON file")->required();

    CommonArgs sweep_args;
    std::string sweep_param;
    std::vector<double> sweep_values;
    auto* sweep = app.add_subcommand("sweep", "Run a scenario across parameter values");
    add_common_options(sweep, sweep_args, true, true);
    sweep->add_option("--param", sweep_param,
                      "Dot path of a numeric scenario field, e.g. pools.programmers.capacity")
        ->required();
    sweep->add_option("--values", sweep_values, "Values to sweep")->required()->delimiter(',');

    CommonArgs opt_args;
    sdlcsim::StabilityCriterion criterion;
    int budget = 200;
    auto* opt = app.add_subcommand("optimize",
                                   "Find minimal stable capacities (built-in scenario "
                                   "unless --scenario is given)");
    add_common_options(opt, opt_args, true, false);
    opt->add_option("--epsilon", criterion.epsilon, "Delivery/arrival ArT slack (default 0.05)");
    opt->add_option("--max-wait", criterion.max_wait,
                    "Max mean pool-queue wait in days (default 1.0)");
    opt->add_option("--opt-replications", criterion.replications,
                    "Replications per candidate (default 20)");
    opt->add_option("--opt-projects", criterion.projects_per_rep,
                    "Projects per replication (default 500)");
    opt->add_option("--budget", budget, "Max simulated candidate vectors (default 200)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfigError;
    }

    if (paper->parsed()) {
        return cmd_paper(paper_args);
    }
    if (run->parsed()) {
        return cmd_run(run_args);
    }
    if (validate->parsed()) {
        return cmd_validate(validate_path);
    }
    if (sweep->parsed()) {
        return cmd_sweep(sweep_args, sweep_param, sweep_values);
    }
    if (opt->parsed()) {
        return cmd_optimize(opt_args, criterion, budget);
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run_main(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfigError;
    }
}
