#include "sdlcsim/scenario.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace sdlcsim {

namespace {

using Json = nlohmann::ordered_json;

struct Issues {
    std::vector<ValidationIssue> items;

    void add(std::string path, std::string message) {
        items.push_back({std::move(path), std::move(message)});
    }

    bool empty() const { return items.empty(); }
};

std::string fmt_num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

const Json* field(const Json& obj, const char* key) {
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

bool integral_number(const Json& j, std::int64_t& out) {
    if (j.is_number_integer()) {
        out = j.get<std::int64_t>();
        return true;
    }
    if (j.is_number_float()) {
        const double v = j.get<double>();
        if (std::isfinite(v) && std::floor(v) == v &&
            std::abs(v) <= 9.0e18) {
            out = static_cast<std::int64_t>(v);
            return true;
        }
    }
    return false;
}

std::optional<double> expect_number(const Json& obj, const std::string& path,
                                    const char* key, Issues& issues) {
    const Json* f = field(obj, key);
    if (f == nullptr) {
        issues.add(path + "." + key, "is required");
        return std::nullopt;
    }
    if (!f->is_number()) {
        issues.add(path + "." + key, "must be a number");
        return std::nullopt;
    }
    return f->get<double>();
}

std::optional<std::int64_t> expect_integer(const Json& obj, const std::string& path,
                                           const char* key, Issues& issues) {
    const Json* f = field(obj, key);
    if (f == nullptr) {
        issues.add(path + "." + key, "is required");
        return std::nullopt;
    }
    std::int64_t v = 0;
    if (!f->is_number() || !integral_number(*f, v)) {
        issues.add(path + "." + key, "must be an integer");
        return std::nullopt;
    }
    return v;
}

std::optional<std::string> expect_string(const Json& obj, const std::string& path,
                                         const char* key, Issues& issues) {
    const Json* f = field(obj, key);
    if (f == nullptr) {
        issues.add(path + "." + key, "is required");
        return std::nullopt;
    }
    if (!f->is_string()) {
        issues.add(path + "." + key, "must be a string");
        return std::nullopt;
    }
    return f->get<std::string>();
}

std::optional<Distribution> parse_distribution(const Json& j, const std::string& path,
                                               Issues& issues) {
    if (!j.is_object()) {
        issues.add(path, "must be a distribution object");
        return std::nullopt;
    }
    auto type = expect_string(j, path, "type", issues);
    if (!type) {
        return std::nullopt;
    }
    try {
        if (*type == "triangular") {
            auto lo = expect_number(j, path, "min", issues);
            auto mode = expect_number(j, path, "mode", issues);
            auto hi = expect_number(j, path, "max", issues);
            if (lo && mode && hi) {
                return Distribution{Triangular(*lo, *mode, *hi)};
            }
            return std::nullopt;
        }
        if (*type == "uniform") {
            auto lo = expect_number(j, path, "min", issues);
            auto hi = expect_number(j, path, "max", issues);
            if (lo && hi) {
                return Distribution{Uniform(*lo, *hi)};
            }
            return std::nullopt;
        }
        if (*type == "categorical") {
            const Json* w = field(j, "weights");
            if (w == nullptr || !w->is_array()) {
                issues.add(path + ".weights", "must be an array of numbers");
                return std::nullopt;
            }
            std::vector<double> weights;
            for (std::size_t i = 0; i < w->size(); ++i) {
                if (!(*w)[i].is_number()) {
                    issues.add(path + ".weights[" + std::to_string(i) + "]",
                               "must be a number");
                    return std::nullopt;
                }
                weights.push_back((*w)[i].get<double>());
            }
            return Distribution{Categorical(std::move(weights))};
        }
        if (*type == "bernoulli") {
            auto p = expect_number(j, path, "p", issues);
            if (p) {
                return Distribution{Bernoulli(*p)};
            }
            return std::nullopt;
        }
    } catch (const std::invalid_argument& e) {
        issues.add(path, e.what());
        return std::nullopt;
    }
    issues.add(path + ".type", "unknown distribution type '" + *type + "'");
    return std::nullopt;
}

Json distribution_to_json(const Distribution& d) {
    Json j;
    if (const auto* tri = std::get_if<Triangular>(&d)) {
        j["type"] = "triangular";
        j["min"] = tri->min;
        j["mode"] = tri->mode;
        j["max"] = tri->max;
    } else if (const auto* uni = std::get_if<Uniform>(&d)) {
        j["type"] = "uniform";
        j["min"] = uni->min;
        j["max"] = uni->max;
    } else if (const auto* cat = std::get_if<Categorical>(&d)) {
        j["type"] = "categorical";
        j["weights"] = cat->weights;
    } else if (const auto* ber = std::get_if<Bernoulli>(&d)) {
        j["type"] = "bernoulli";
        j["p"] = ber->p;
    }
    return j;
}

bool continuous_nonnegative(const Distribution& d, double& lower) {
    if (const auto* tri = std::get_if<Triangular>(&d)) {
        lower = tri->min;
        return true;
    }
    if (const auto* uni = std::get_if<Uniform>(&d)) {
        lower = uni->min;
        return true;
    }
    return false;
}

} // namespace

int ScenarioConfig::pool_index(std::string_view name) const {
    for (std::size_t i = 0; i < pools.size(); ++i) {
        if (pools[i].name == name) {
            return static_cast<int>(i);
        }
    }
    return -1;
}

ValidationError::ValidationError(std::vector<ValidationIssue> issues)
    : std::runtime_error([&issues] {
          std::ostringstream os;
          os << "invalid scenario:";
          for (const auto& it : issues) {
              os << "\n  " << it.path << ": " << it.message;
          }
          return os.str();
      }()),
      issues_(std::move(issues)) {}

ScenarioConfig build_paper_scenario() {
    ScenarioConfig cfg;
    cfg.pools = {
        {"analysts", 5}, {"designers", 5}, {"programmers", 10},
        {"testers", 20}, {"maintenance", 5},
    };
    cfg.classes = {
        {"small", 0.70, 0.1, {1, 1, 2, 2, 1}},
        {"medium", 0.25, 0.2, {2, 2, 4, 6, 2}},
        {"large", 0.05, 0.3, {5, 5, 10, 20, 5}},
    };
    const std::vector<std::pair<std::string, Uniform>> phase_laws = {
        {"analysis", Uniform(3, 5)},    {"design", Uniform(5, 10)},
        {"implementation", Uniform(15, 20)}, {"testing", Uniform(5, 10)},
        {"maintenance", Uniform(1, 3)},
    };
    for (std::size_t p = 0; p < phase_laws.size(); ++p) {
        PhaseSpec phase;
        phase.name = phase_laws[p].first;
        phase.pool = cfg.pools[p].name;
        phase.duration_per_class.assign(cfg.classes.size(),
                                        Distribution{phase_laws[p].second});
        cfg.phases.push_back(std::move(phase));
    }
    cfg.arrival = Triangular(30, 35, 40);
    cfg.project_limit = 50;
    return cfg;
}

std::vector<ValidationIssue> validate_scenario(const ScenarioConfig& config,
                                               bool allow_infeasible) {
    Issues issues;

    if (config.pools.empty()) {
        issues.add("pools", "must not be empty");
    }
    std::set<std::string> pool_names;
    for (std::size_t i = 0; i < config.pools.size(); ++i) {
        const std::string path = "pools[" + std::to_string(i) + "]";
        const auto& pool = config.pools[i];
        if (pool.name.empty()) {
            issues.add(path + ".name", "must not be empty");
        }
        if (!pool_names.insert(pool.name).second) {
            issues.add(path + ".name", "duplicate pool name '" + pool.name + "'");
        }
        if (pool.capacity < 1) {
            issues.add(path + ".capacity",
                       "must be >= 1, got " + std::to_string(pool.capacity));
        }
    }

    if (config.classes.empty()) {
        issues.add("classes", "must not be empty");
    }
    double prob_sum = 0.0;
    for (std::size_t c = 0; c < config.classes.size(); ++c) {
        const std::string path = "classes[" + std::to_string(c) + "]";
        const auto& cls = config.classes[c];
        if (cls.name.empty()) {
            issues.add(path + ".name", "must not be empty");
        }
        if (!(cls.probability >= 0.0 && cls.probability <= 1.0)) {
            issues.add(path + ".probability", "must be in [0,1]");
        }
        prob_sum += cls.probability;
        if (!(cls.error_prob >= 0.0 && cls.error_prob < 1.0)) {
            issues.add(path + ".error_prob", "must be in [0,1)");
        }
        if (cls.demands.size() != config.phases.size()) {
            issues.add(path + ".demands",
                       "expected " + std::to_string(config.phases.size()) +
                           " entries, one per phase, got " +
                           std::to_string(cls.demands.size()));
        }
        for (std::size_t p = 0; p < cls.demands.size(); ++p) {
            if (cls.demands[p] < 1) {
                issues.add(path + ".demands[" + std::to_string(p) + "]",
                           "must be >= 1");
            }
        }
    }
    if (!config.classes.empty() && std::abs(prob_sum - 1.0) > 1e-9) {
        issues.add("classes[].probability", "sum " + fmt_num(prob_sum) + " ≠ 1");
    }

    if (config.phases.empty()) {
        issues.add("phases", "must not be empty");
    }
    std::set<std::string> phase_names;
    for (std::size_t p = 0; p < config.phases.size(); ++p) {
        const std::string path = "phases[" + std::to_string(p) + "]";
        const auto& phase = config.phases[p];
        if (phase.name.empty()) {
            issues.add(path + ".name", "must not be empty");
        }
        if (!phase_names.insert(phase.name).second) {
            issues.add(path + ".name", "duplicate phase name '" + phase.name + "'");
        }
        if (config.pool_index(phase.pool) < 0) {
            issues.add(path + ".pool", "unknown pool '" + phase.pool + "'");
        }
        if (phase.duration_per_class.size() != config.classes.size()) {
            issues.add(path + ".duration_per_class",
                       "expected " + std::to_string(config.classes.size()) +
                           " entries, one per class, got " +
                           std::to_string(phase.duration_per_class.size()));
        }
        for (std::size_t c = 0; c < phase.duration_per_class.size(); ++c) {
            double lower = 0.0;
            if (!continuous_nonnegative(phase.duration_per_class[c], lower)) {
                issues.add(path + ".duration_per_class[" + std::to_string(c) + "]",
                           "must be triangular or uniform");
            } else if (lower < 0.0) {
                issues.add(path + ".duration_per_class[" + std::to_string(c) + "]",
                           "duration support must be nonnegative");
            }
        }
    }

    double arrival_lower = 0.0;
    if (!continuous_nonnegative(config.arrival, arrival_lower)) {
        issues.add("arrival", "must be triangular or uniform");
    } else if (arrival_lower < 0.0) {
        issues.add("arrival", "support must be nonnegative");
    }

    if (config.project_limit < 1) {
        issues.add("project_limit", "must be >= 1");
    }
    if (config.replications && *config.replications < 1) {
        issues.add("replications", "must be >= 1");
    }

    // Feasibility: a demand beyond its pool's capacity can never be granted
    // and permanently blocks the FIFO queue.
    if (!allow_infeasible) {
        for (std::size_t c = 0; c < config.classes.size(); ++c) {
            const auto& cls = config.classes[c];
            for (std::size_t p = 0; p < cls.demands.size() && p < config.phases.size(); ++p) {
                const int pool = config.pool_index(config.phases[p].pool);
                if (pool < 0) {
                    continue;
                }
                const std::int64_t capacity = config.pools[pool].capacity;
                if (cls.demands[p] > capacity) {
                    issues.add("classes[" + std::to_string(c) + "].demands[" +
                                   std::to_string(p) + "]",
                               "demand " + std::to_string(cls.demands[p]) +
                                   " exceeds pool capacity " + std::to_string(capacity) +
                                   " (deadlock)");
                }
            }
        }
    }

    return issues.items;
}

ScenarioConfig load_scenario(const std::string& text, bool allow_infeasible) {
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(e.what());
    }
    if (!doc.is_object()) {
        throw ValidationError(
            std::vector<ValidationIssue>{{"", "document must be a JSON object"}});
    }

    Issues issues;
    ScenarioConfig cfg;

    static const std::set<std::string> known_keys = {
        "pools", "classes", "phases", "arrival",
        "project_limit", "seed", "replications",
    };
    for (const auto& [key, value] : doc.items()) {
        (void)value;
        if (known_keys.count(key) == 0) {
            issues.add(key, "unknown key");
        }
    }

    if (const Json* pools = field(doc, "pools"); pools == nullptr) {
        issues.add("pools", "is required");
    } else if (!pools->is_array()) {
        issues.add("pools", "must be an array");
    } else {
        for (std::size_t i = 0; i < pools->size(); ++i) {
            const std::string path = "pools[" + std::to_string(i) + "]";
            const Json& item = (*pools)[i];
            if (!item.is_object()) {
                issues.add(path, "must be an object");
                continue;
            }
            PoolSpec pool;
            if (auto name = expect_string(item, path, "name", issues)) {
                pool.name = *name;
            }
            if (auto cap = expect_integer(item, path, "capacity", issues)) {
                pool.capacity = *cap;
            }
            cfg.pools.push_back(std::move(pool));
        }
    }

    if (const Json* classes = field(doc, "classes"); classes == nullptr) {
        issues.add("classes", "is required");
    } else if (!classes->is_array()) {
        issues.add("classes", "must be an array");
    } else {
        for (std::size_t i = 0; i < classes->size(); ++i) {
            const std::string path = "classes[" + std::to_string(i) + "]";
            const Json& item = (*classes)[i];
            if (!item.is_object()) {
                issues.add(path, "must be an object");
                continue;
            }
            ProjectClass cls;
            if (auto name = expect_string(item, path, "name", issues)) {
                cls.name = *name;
            }
            if (auto prob = expect_number(item, path, "probability", issues)) {
                cls.probability = *prob;
            }
            if (auto err = expect_number(item, path, "error_prob", issues)) {
                cls.error_prob = *err;
            }
            if (const Json* demands = field(item, "demands"); demands == nullptr) {
                issues.add(path + ".demands", "is required");
            } else if (!demands->is_array()) {
                issues.add(path + ".demands", "must be an array of integers");
            } else {
                for (std::size_t d = 0; d < demands->size(); ++d) {
                    std::int64_t units = 0;
                    if (!(*demands)[d].is_number() || !integral_number((*demands)[d], units)) {
                        issues.add(path + ".demands[" + std::to_string(d) + "]",
                                   "must be an integer");
                    } else {
                        cls.demands.push_back(units);
                    }
                }
            }
            cfg.classes.push_back(std::move(cls));
        }
    }

    if (const Json* phases = field(doc, "phases"); phases == nullptr) {
        issues.add("phases", "is required");
    } else if (!phases->is_array()) {
        issues.add("phases", "must be an array");
    } else {
        for (std::size_t i = 0; i < phases->size(); ++i) {
            const std::string path = "phases[" + std::to_string(i) + "]";
            const Json& item = (*phases)[i];
            if (!item.is_object()) {
                issues.add(path, "must be an object");
                continue;
            }
            PhaseSpec phase;
            if (auto name = expect_string(item, path, "name", issues)) {
                phase.name = *name;
            }
            if (auto pool = expect_string(item, path, "pool", issues)) {
                phase.pool = *pool;
            }
            if (const Json* durs = field(item, "duration_per_class"); durs == nullptr) {
                issues.add(path + ".duration_per_class", "is required");
            } else if (!durs->is_array()) {
                issues.add(path + ".duration_per_class", "must be an array of distributions");
            } else {
                for (std::size_t d = 0; d < durs->size(); ++d) {
                    auto dist = parse_distribution(
                        (*durs)[d], path + ".duration_per_class[" + std::to_string(d) + "]",
                        issues);
                    if (dist) {
                        phase.duration_per_class.push_back(std::move(*dist));
                    }
                }
            }
            cfg.phases.push_back(std::move(phase));
        }
    }

    if (const Json* arrival = field(doc, "arrival"); arrival == nullptr) {
        issues.add("arrival", "is required");
    } else if (auto dist = parse_distribution(*arrival, "arrival", issues)) {
        cfg.arrival = std::move(*dist);
    }

    if (const Json* limit = field(doc, "project_limit"); limit == nullptr) {
        issues.add("project_limit", "is required");
    } else {
        std::int64_t v = 0;
        if (!limit->is_number() || !integral_number(*limit, v)) {
            issues.add("project_limit", "must be an integer");
        } else {
            cfg.project_limit = v;
        }
    }

    if (const Json* seed = field(doc, "seed"); seed != nullptr) {
        if (seed->is_number_unsigned()) {
            cfg.seed = seed->get<std::uint64_t>();
        } else {
            std::int64_t v = 0;
            if (seed->is_number() && integral_number(*seed, v) && v >= 0) {
                cfg.seed = static_cast<std::uint64_t>(v);
            } else {
                issues.add("seed", "must be a nonnegative integer");
            }
        }
    }

    if (const Json* reps = field(doc, "replications"); reps != nullptr) {
        std::int64_t v = 0;
        if (!reps->is_number() || !integral_number(*reps, v)) {
            issues.add("replications", "must be an integer");
        } else {
            cfg.replications = static_cast<int>(v);
        }
    }

    if (!issues.empty()) {
        throw ValidationError(std::move(issues.items));
    }

    auto semantic = validate_scenario(cfg, allow_infeasible);
    if (!semantic.empty()) {
        throw ValidationError(std::move(semantic));
    }
    return cfg;
}

ScenarioConfig load_scenario_file(const std::string& path, bool allow_infeasible) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParseError("cannot open scenario file: " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_scenario(buf.str(), allow_infeasible);
}

std::string save_scenario(const ScenarioConfig& config) {
    Json doc;
    doc["pools"] = Json::array();
    for (const auto& pool : config.pools) {
        Json j;
        j["name"] = pool.name;
        j["capacity"] = pool.capacity;
        doc["pools"].push_back(std::move(j));
    }
    doc["classes"] = Json::array();
    for (const auto& cls : config.classes) {
        Json j;
        j["name"] = cls.name;
        j["probability"] = cls.probability;
        j["error_prob"] = cls.error_prob;
        j["demands"] = cls.demands;
        doc["classes"].push_back(std::move(j));
    }
    doc["phases"] = Json::array();
    for (const auto& phase : config.phases) {
        Json j;
        j["name"] = phase.name;
        j["pool"] = phase.pool;
        j["duration_per_class"] = Json::array();
        for (const auto& dist : phase.duration_per_class) {
            j["duration_per_class"].push_back(distribution_to_json(dist));
        }
        doc["phases"].push_back(std::move(j));
    }
    doc["arrival"] = distribution_to_json(config.arrival);
    doc["project_limit"] = config.project_limit;
    if (config.seed) {
        doc["seed"] = *config.seed;
    }
    if (config.replications) {
        doc["replications"] = *config.replications;
    }
    return doc.dump(2);
}

std::vector<std::int64_t> min_feasible_capacities(const ScenarioConfig& config) {
    std::vector<std::int64_t> caps(config.pools.size(), 1);
    for (std::size_t p = 0; p < config.phases.size(); ++p) {
        const int pool = config.pool_index(config.phases[p].pool);
        if (pool < 0) {
            continue;
        }
        for (const auto& cls : config.classes) {
            if (p < cls.demands.size()) {
                caps[pool] = std::max(caps[pool], cls.demands[p]);
            }
        }
    }
    return caps;
}

std::uint64_t scenario_digest(const ScenarioConfig& config) {
    const std::string text = save_scenario(config);
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : text) {
        h = (h ^ ch) * 0x100000001b3ull;
    }
    return h;
}

} // namespace sdlcsim
