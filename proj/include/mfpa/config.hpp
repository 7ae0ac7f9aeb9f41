#pragma once

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mfpa/model.hpp"
#include "mfpa/simulator.hpp"

namespace mfpa {

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct RunConfig {
    MarketParams market;
    SimConfig sim;
    std::size_t n_grid = 201;  // value-coefficient grid resolution
    double y0_override = std::numeric_limits<double>::quiet_NaN();
    double z_shift = 0.0;  // contract Z corruption for diagnostics
    std::vector<std::pair<double, double>> deviation_grid = {
        {0.25, 0.0},  {-0.25, 0.0}, {0.5, 0.0},   {-0.5, 0.0},
        {0.0, 0.25},  {0.0, -0.25}, {0.0, 0.5},   {0.0, -0.5},
        {0.25, 0.25}, {-0.25, -0.25}};
    std::string sweep_param;
    std::vector<double> sweep_values;

    bool has_y0_override() const { return !std::isnan(y0_override); }
};

namespace detail {

inline void reject_unknown(const nlohmann::json& obj, const std::set<std::string>& known,
                           const std::string& section) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!known.count(it.key()))
            throw ConfigError("unknown key '" + it.key() + "' in section '" + section + "'");
    }
}

inline double require_number(const nlohmann::json& obj, const std::string& section,
                             const std::string& key) {
    if (!obj.contains(key))
        throw ConfigError("missing field '" + key + "' in section '" + section + "'");
    if (!obj[key].is_number())
        throw ConfigError("field '" + key + "' in section '" + section + "' must be a number");
    return obj[key].get<double>();
}

}  // namespace detail

// Applies a sweep value to a market parameter selected by name.
inline void set_market_field(MarketParams& p, const std::string& name, double value) {
    if (name == "gamma") p.gamma = value;
    else if (name == "sigma") p.sigma = value;
    else if (name == "k1") p.k1 = value;
    else if (name == "k2") p.k2 = value;
    else if (name == "delta") p.delta = value;
    else if (name == "beta") p.beta = value;
    else if (name == "theta") p.theta = value;
    else if (name == "horizon") p.horizon = value;
    else if (name == "reservation") p.reservation = value;
    else if (name == "m0") p.m0 = value;
    else if (name == "v0") p.v0 = value;
    else if (name == "f_slope") p.f_slope = value;
    else if (name == "f_intercept") p.f_intercept = value;
    else throw ConfigError("unknown market parameter '" + name + "'");
}

// Strict parse: every market field is mandatory, unknown keys anywhere
// are errors. "eta" (principal risk aversion of the general exponential
// objective) is accepted and ignored; the mean-variance objective built
// here does not use it.
inline RunConfig parse_config(const nlohmann::json& doc) {
    if (!doc.is_object()) throw ConfigError("config root must be a JSON object");
    detail::reject_unknown(doc, {"market", "sim", "run"}, "<root>");
    if (!doc.contains("market")) throw ConfigError("missing section 'market'");

    RunConfig cfg;
    const auto& market = doc["market"];
    detail::reject_unknown(market,
                           {"gamma", "sigma", "k1", "k2", "delta", "beta", "theta", "horizon",
                            "reservation", "m0", "v0", "f_slope", "f_intercept", "eta"},
                           "market");
    MarketParams& p = cfg.market;
    p.gamma = detail::require_number(market, "market", "gamma");
    p.sigma = detail::require_number(market, "market", "sigma");
    p.k1 = detail::require_number(market, "market", "k1");
    p.k2 = detail::require_number(market, "market", "k2");
    p.delta = detail::require_number(market, "market", "delta");
    p.beta = detail::require_number(market, "market", "beta");
    p.theta = detail::require_number(market, "market", "theta");
    p.horizon = detail::require_number(market, "market", "horizon");
    p.reservation = detail::require_number(market, "market", "reservation");
    p.m0 = detail::require_number(market, "market", "m0");
    p.v0 = detail::require_number(market, "market", "v0");
    p.f_slope = detail::require_number(market, "market", "f_slope");
    p.f_intercept = detail::require_number(market, "market", "f_intercept");

    if (doc.contains("sim")) {
        const auto& sim = doc["sim"];
        detail::reject_unknown(sim,
                              {"paths", "steps", "seed", "picard_tol", "picard_max_iters",
                               "antithetic", "snapshots", "threads"},
                              "sim");
        if (sim.contains("paths")) cfg.sim.n_paths = sim["paths"].get<std::size_t>();
        if (sim.contains("steps")) cfg.sim.n_steps = sim["steps"].get<std::size_t>();
        if (sim.contains("seed")) cfg.sim.seed = sim["seed"].get<std::uint64_t>();
        if (sim.contains("picard_tol")) cfg.sim.picard_tol = sim["picard_tol"].get<double>();
        if (sim.contains("picard_max_iters"))
            cfg.sim.picard_max_iters = sim["picard_max_iters"].get<int>();
        if (sim.contains("antithetic")) cfg.sim.antithetic = sim["antithetic"].get<bool>();
        if (sim.contains("snapshots")) cfg.sim.n_snapshots = sim["snapshots"].get<std::size_t>();
        if (sim.contains("threads")) cfg.sim.n_threads = sim["threads"].get<unsigned>();
        if (cfg.sim.n_paths == 0) throw ConfigError("sim.paths must be positive");
        if (cfg.sim.n_steps == 0) throw ConfigError("sim.steps must be positive");
        if (cfg.sim.n_snapshots < 2) throw ConfigError("sim.snapshots must be >= 2");
    }

    if (doc.contains("run")) {
        const auto& run = doc["run"];
        detail::reject_unknown(
            run, {"grid_points", "y0_override", "z_shift", "deviation_grid", "sweep_param",
                  "sweep_values"},
            "run");
        if (run.contains("grid_points")) cfg.n_grid = run["grid_points"].get<std::size_t>();
        if (cfg.n_grid < 2) throw ConfigError("run.grid_points must be >= 2");
        if (run.contains("y0_override")) cfg.y0_override = run["y0_override"].get<double>();
        if (run.contains("z_shift")) cfg.z_shift = run["z_shift"].get<double>();
        if (run.contains("deviation_grid")) {
            cfg.deviation_grid.clear();
            for (const auto& pair : run["deviation_grid"]) {
                if (!pair.is_array() || pair.size() != 2)
                    throw ConfigError("run.deviation_grid entries must be [e0, e1] pairs");
                cfg.deviation_grid.emplace_back(pair[0].get<double>(), pair[1].get<double>());
            }
            if (cfg.deviation_grid.empty())
                throw ConfigError("run.deviation_grid must be nonempty");
        }
        if (run.contains("sweep_param")) cfg.sweep_param = run["sweep_param"].get<std::string>();
        if (run.contains("sweep_values")) {
            for (const auto& v : run["sweep_values"]) {
                double value = v.get<double>();
                if (!std::isfinite(value)) throw ConfigError("sweep values must be finite");
                cfg.sweep_values.push_back(value);
            }
        }
        if (!cfg.sweep_param.empty() && cfg.sweep_values.empty())
            throw ConfigError("sweep_param given without sweep_values");
    }
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return parse_config(doc);
}

}  // namespace mfpa
