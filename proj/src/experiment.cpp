#include "mcache/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <nlohmann/json.hpp>

#include "mcache/approx_mdp.hpp"
#include "mcache/exact_solver.hpp"
#include "mcache/validation.hpp"

namespace mcache {

namespace {

namespace pt = boost::property_tree;

std::string fmt(double v, const char* format = "%.12g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, format, v);
    return buf;
}

double parse_double(const std::string& field, const std::string& text) {
    const std::string t = boost::trim_copy(text);
    if (t == "inf" || t == "infinity") return std::numeric_limits<double>::infinity();
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty())
        throw ConfigError(field, field + ": cannot parse '" + text + "' as a number");
    return v;
}

long long parse_integer(const std::string& field, const std::string& text) {
    const std::string t = boost::trim_copy(text);
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty())
        throw ConfigError(field, field + ": cannot parse '" + text + "' as an integer");
    return v;
}

std::size_t parse_count(const std::string& field, const std::string& text) {
    const long long v = parse_integer(field, text);
    if (v < 0) throw ConfigError(field, field + ": must be nonnegative");
    return static_cast<std::size_t>(v);
}

bool parse_bool(const std::string& field, const std::string& text) {
    const std::string t = boost::to_lower_copy(boost::trim_copy(text));
    if (t == "true" || t == "1" || t == "yes") return true;
    if (t == "false" || t == "0" || t == "no") return false;
    throw ConfigError(field, field + ": expected true or false, got '" + text + "'");
}

std::vector<std::string> split_list(const std::string& text, const char* separators) {
    std::vector<std::string> parts;
    const std::string t = boost::trim_copy(text);
    if (t.empty()) return parts;
    boost::split(parts, t, boost::is_any_of(separators));
    for (auto& p : parts) boost::trim(p);
    return parts;
}

std::vector<Point> parse_positions(const std::string& field, const std::string& text) {
    std::vector<Point> out;
    for (const auto& pair : split_list(text, ";")) {
        const auto xy = split_list(pair, ",");
        if (xy.size() != 2) throw ConfigError(field, field + ": expected 'x,y' pairs separated by ';'");
        out.push_back({parse_double(field, xy[0]), parse_double(field, xy[1])});
    }
    return out;
}

struct PendingPlacement {
    std::size_t count = 20;
    bool count_set = false;
    std::vector<Point> explicit_positions;
    bool positions_set = false;
};

using Setter = std::function<void(ExperimentSpec&, PendingPlacement&, const std::string& field, const std::string&)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = [] {
        std::map<std::string, Setter> m;
        auto real = [&m](const std::string& key, double ScenarioConfig::*member) {
            m["scenario." + key] = [member](ExperimentSpec& s, PendingPlacement&, const std::string& f,
                                            const std::string& v) { s.scenario.*member = parse_double(f, v); };
        };
        real("cell_radius", &ScenarioConfig::cell_radius);
        real("service_radius", &ScenarioConfig::cache_service_radius);
        real("pathloss_exponent", &ScenarioConfig::pathloss_exponent);
        real("reference_distance", &ScenarioConfig::reference_distance);
        real("noise_power", &ScenarioConfig::noise_power);
        real("shadowing_sigma_db", &ScenarioConfig::shadowing_sigma_db);
        real("file_bits", &ScenarioConfig::file_bits);
        real("w_e", &ScenarioConfig::w_e);
        real("w_t", &ScenarioConfig::w_t);
        real("request_intensity", &ScenarioConfig::request_intensity);
        real("lifetime", &ScenarioConfig::lifetime);
        real("max_transmit_power", &ScenarioConfig::max_transmit_power);

        m["scenario.antenna_count"] = [](ExperimentSpec& s, PendingPlacement&, const std::string& f,
                                         const std::string& v) {
            s.scenario.antenna_count = static_cast<int>(parse_integer(f, v));
        };
        m["scenario.segment_count"] = [](ExperimentSpec& s, PendingPlacement&, const std::string& f,
                                         const std::string& v) {
            s.scenario.segment_count = static_cast<int>(parse_integer(f, v));
        };
        m["scenario.integer_symbols"] = [](ExperimentSpec& s, PendingPlacement&, const std::string& f,
                                           const std::string& v) { s.scenario.integer_symbols = parse_bool(f, v); };
        m["scenario.cache_count"] = [](ExperimentSpec&, PendingPlacement& p, const std::string& f,
                                       const std::string& v) {
            p.count = parse_count(f, v);
            p.count_set = true;
        };
        m["scenario.cache_positions"] = [](ExperimentSpec&, PendingPlacement& p, const std::string& f,
                                           const std::string& v) {
            p.explicit_positions = parse_positions(f, v);
            p.positions_set = true;
        };
        m["scenario.cache_placement"] = [](ExperimentSpec& s, PendingPlacement&, const std::string& f,
                                           const std::string& v) {
            const std::string t = boost::trim_copy(v);
            if (t != "annulus" && t != "disjoint" && t != "explicit")
                throw ConfigError(f, f + ": expected annulus, disjoint or explicit, got '" + v + "'");
            s.cache_placement = t;
        };
        m["scenario.cache_seed"] = [](ExperimentSpec& s, PendingPlacement&, const std::string& f,
                                      const std::string& v) { s.cache_seed = parse_count(f, v); };

        m["experiment.kind"] = [](ExperimentSpec& s, PendingPlacement&, const std::string& f, const std::string& v) {
            const std::string t = boost::trim_copy(v);
            if (t == "sweep") s.experiment = ExperimentKind::sweep;
            else if (t == "bounds") s.experiment = ExperimentKind::bounds;
            else if (t == "validate") s.experiment = ExperimentKind::validate;
            else throw ConfigError(f, f + ": expected sweep, bounds or validate, got '" + v + "'");
        };
        m["experiment.lambda_t_grid"] = [](ExperimentSpec& s, PendingPlacement&, const std::string& f,
                                           const std::string& v) {
            s.lambda_t_grid.clear();
            for (const auto& item : split_list(v, ",")) s.lambda_t_grid.push_back(parse_double(f, item));
        };
        m["experiment.replications"] = [](ExperimentSpec& s, PendingPlacement&, const std::string& f,
                                          const std::string& v) { s.replications = parse_count(f, v); };
        m["experiment.seed"] = [](ExperimentSpec& s, PendingPlacement&, const std::string& f, const std::string& v) {
            s.seed = parse_count(f, v);
        };
        m["experiment.policies"] = [](ExperimentSpec& s, PendingPlacement&, const std::string& f,
                                      const std::string& v) {
            s.policies.clear();
            for (const auto& item : split_list(v, ",")) {
                const auto kind = parse_policy(item);
                if (!kind) throw ConfigError(f, f + ": unknown policy '" + item + "'");
                s.policies.push_back(*kind);
            }
        };
        m["experiment.output"] = [](ExperimentSpec& s, PendingPlacement&, const std::string&, const std::string& v) {
            s.output_path = boost::trim_copy(v);
        };
        m["experiment.fading_samples"] = [](ExperimentSpec& s, PendingPlacement&, const std::string& f,
                                            const std::string& v) { s.fading_samples = parse_count(f, v); };
        m["experiment.bounds_stages"] = [](ExperimentSpec& s, PendingPlacement&, const std::string& f,
                                           const std::string& v) { s.bounds_stages = parse_count(f, v); };
        return m;
    }();
    return table;
}

void place_caches(ExperimentSpec& spec, const PendingPlacement& pending) {
    auto& sc = spec.scenario;
    if (spec.cache_placement == "explicit") {
        if (!pending.positions_set)
            throw ConfigError("scenario.cache_positions", "scenario.cache_positions: required for explicit placement");
        if (pending.count_set && pending.count != pending.explicit_positions.size())
            throw ConfigError("scenario.cache_count", "scenario.cache_count: disagrees with cache_positions");
        sc.cache_positions = pending.explicit_positions;
        return;
    }
    if (pending.positions_set)
        throw ConfigError("scenario.cache_positions",
                          "scenario.cache_positions: only allowed with cache_placement = explicit");
    if (!(sc.cell_radius > 0.0) || !(sc.cache_service_radius > 0.0)) return;  // validate() reports it
    try {
        sc.cache_positions = spec.cache_placement == "disjoint"
                                 ? place_caches_disjoint(pending.count, sc.cell_radius, sc.cache_service_radius,
                                                         spec.cache_seed)
                                 : place_caches_annulus(pending.count, sc.cell_radius, sc.cache_service_radius,
                                                        spec.cache_seed);
    } catch (const std::runtime_error& e) {
        throw ConfigError("scenario.cache_count", std::string("scenario.cache_count: ") + e.what());
    }
}

void write_file_atomically(const std::string& path, const std::string& body) {
    const std::string tmp = path + ".partial";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp + " for writing");
        out << body;
        if (!out) throw std::runtime_error("write to " + tmp + " failed");
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) throw std::runtime_error("cannot rename " + tmp + " to " + path);
}

nlohmann::json scenario_json(const ScenarioConfig& sc) {
    nlohmann::json positions = nlohmann::json::array();
    for (const auto& p : sc.cache_positions) positions.push_back({p.x, p.y});
    return {
        {"cell_radius_m", sc.cell_radius},
        {"cache_positions_m", positions},
        {"service_radius_m", sc.cache_service_radius},
        {"antenna_count", sc.antenna_count},
        {"pathloss_exponent", sc.pathloss_exponent},
        {"reference_distance_m", sc.reference_distance},
        {"noise_power_w", sc.noise_power},
        {"shadowing_sigma_db", sc.shadowing_sigma_db},
        {"file_bits", sc.file_bits},
        {"segment_count", sc.segment_count},
        {"w_e", sc.w_e},
        {"w_t", sc.w_t},
        {"request_intensity", sc.request_intensity},
        {"lifetime", sc.lifetime},
        {"max_transmit_power_w", std::isfinite(sc.max_transmit_power) ? nlohmann::json(sc.max_transmit_power)
                                                                       : nlohmann::json("inf")},
        {"integer_symbols", sc.integer_symbols},
    };
}

std::string metadata(const ExperimentSpec& spec, const std::vector<std::string>& columns) {
    nlohmann::json policies = nlohmann::json::array();
    for (auto p : spec.policies) policies.push_back(std::string(to_string(p)));
    nlohmann::json flagged = nlohmann::json::array();
    for (const auto& [field, value] : non_paper_values(spec)) {
        const bool overridden =
            std::find(spec.explicit_keys.begin(), spec.explicit_keys.end(), field) != spec.explicit_keys.end();
        flagged.push_back({{"field", field}, {"value", value}, {"set_in_config", overridden}});
    }
    nlohmann::json meta = {
        {"experiment", std::string(to_string(spec.experiment))},
        {"seed", spec.seed},
        {"replications", spec.replications},
        {"lambda_t_grid", spec.lambda_t_grid},
        {"policies", policies},
        {"fading_samples", spec.fading_samples},
        {"bounds_stages", spec.bounds_stages},
        {"cache_placement", spec.cache_placement},
        {"cache_seed", spec.cache_seed},
        {"scenario", scenario_json(spec.scenario)},
        {"bandwidth_hz", kBandwidthHz},
        {"symbols_per_second", kBandwidthHz},
        {"cost_units", "w_e * joules + w_t * symbols"},
        {"columns", columns},
        {"non_paper_values", flagged},
    };
    return meta.dump(2) + "\n";
}

}  // namespace

std::string_view to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::sweep: return "sweep";
        case ExperimentKind::bounds: return "bounds";
        case ExperimentKind::validate: return "validate";
    }
    return "unknown";
}

ExperimentSpec parse_config(std::istream& in, const std::string& source_name) {
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError("", source_name + ":" + std::to_string(e.line()) + ": " + e.message());
    }

    ExperimentSpec spec;
    PendingPlacement pending;
    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty())
            throw ConfigError(section, "unknown key '" + section + "' outside any section");
        if (section != "scenario" && section != "experiment")
            throw ConfigError(section, "unknown section [" + section + "]");
        for (const auto& [key, value] : body) {
            const std::string field = section + "." + key;
            const auto it = setters().find(field);
            if (it == setters().end()) throw ConfigError(field, "unknown key '" + key + "' in [" + section + "]");
            it->second(spec, pending, field, value.data());
            spec.explicit_keys.push_back(field);
        }
    }
    place_caches(spec, pending);
    return spec;
}

ExperimentSpec load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open config file " + path);
    return parse_config(in, path);
}

void validate_spec(const ExperimentSpec& spec) {
    try {
        spec.scenario.validate();
    } catch (const std::invalid_argument& e) {
        const std::string what = e.what();
        throw ConfigError("scenario." + what.substr(0, what.find(':')), "scenario." + what);
    }
    if (spec.fading_samples == 0)
        throw ConfigError("experiment.fading_samples", "experiment.fading_samples: must be positive");
    switch (spec.experiment) {
        case ExperimentKind::sweep: {
            if (spec.lambda_t_grid.empty())
                throw ConfigError("experiment.lambda_t_grid", "experiment.lambda_t_grid: must not be empty");
            for (double g : spec.lambda_t_grid)
                if (!(g >= 0.0) || !std::isfinite(g))
                    throw ConfigError("experiment.lambda_t_grid", "experiment.lambda_t_grid: values must be >= 0");
            if (spec.replications < 2)
                throw ConfigError("experiment.replications", "experiment.replications: must be at least 2");
            if (spec.policies.empty())
                throw ConfigError("experiment.policies", "experiment.policies: must not be empty");
            if (spec.output_path.empty())
                throw ConfigError("experiment.output", "experiment.output: sweep needs an output path");
            if (std::find(spec.policies.begin(), spec.policies.end(), PolicyKind::exact_oracle) !=
                spec.policies.end())
                require_tractable(spec.scenario);
            break;
        }
        case ExperimentKind::bounds:
            if (spec.bounds_stages == 0)
                throw ConfigError("experiment.bounds_stages", "experiment.bounds_stages: must be positive");
            if (spec.output_path.empty())
                throw ConfigError("experiment.output", "experiment.output: bounds needs an output path");
            require_tractable(spec.scenario);
            break;
        case ExperimentKind::validate: break;
    }
}

std::vector<std::pair<std::string, std::string>> non_paper_values(const ExperimentSpec& spec) {
    const auto& sc = spec.scenario;
    std::string grid;
    for (double g : spec.lambda_t_grid) grid += (grid.empty() ? "" : ",") + fmt(g, "%g");
    return {
        {"scenario.noise_power", fmt(sc.noise_power)},
        {"scenario.shadowing_sigma_db", fmt(sc.shadowing_sigma_db)},
        {"scenario.reference_distance", fmt(sc.reference_distance)},
        {"scenario.request_intensity", fmt(sc.request_intensity)},
        {"scenario.lifetime", fmt(sc.lifetime)},
        {"scenario.cache_placement", spec.cache_placement},
        {"experiment.lambda_t_grid", grid},
        {"experiment.fading_samples", std::to_string(spec.fading_samples)},
    };
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows, std::uint64_t seed) {
    out << "policy,lambda_T,mean_cost,ci95_half_width,replications,seed\n";
    for (const auto& r : rows)
        out << to_string(r.policy) << ',' << fmt(r.lambda_t, "%g") << ',' << fmt(r.estimate.mean) << ','
            << fmt(r.estimate.half_width_95) << ',' << r.estimate.replications << ',' << seed << '\n';
}

void write_bounds_csv(std::ostream& out, const ScenarioConfig& scenario, std::size_t stages,
                      std::size_t fading_samples, std::uint64_t seed, Execution exec) {
    require_tractable(scenario);
    const FadingPool pool = sample_fading_pool(scenario, fading_samples, seed);
    const ValueTable table = value_iteration(scenario, stages, pool, exec);
    const ReferenceValues refs = build_reference_values(scenario, stages, pool, exec);
    out << "stages,state_hex,exact_value,approx_value,lower_bound,upper_bound\n";
    for (std::size_t k = 1; k <= stages; ++k) {
        for (std::uint64_t idx = 0; idx < table.state_count(); ++idx) {
            const auto state = BufferState::from_index(scenario.cache_count(), scenario.segments(), idx);
            const auto bounds = value_bounds(refs, state, k);
            out << k << ',' << state.hex() << ',' << fmt(table.value(k, idx)) << ','
                << fmt(approx_value(refs, state, k)) << ',' << (bounds.lower ? fmt(*bounds.lower) : std::string())
                << ',' << fmt(bounds.upper) << '\n';
        }
    }
}

int run(const ExperimentSpec& spec, std::ostream& log, Execution exec) {
    try {
        validate_spec(spec);
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const TractabilityError& e) {
        log << "refused: " << e.what() << '\n';
        return kExitConfigError;
    }

    std::ostringstream body;
    std::vector<std::string> columns;
    int status = kExitOk;
    switch (spec.experiment) {
        case ExperimentKind::sweep: {
            SweepOptions options;
            options.fading_samples = spec.fading_samples;
            options.pool_seed = spec.seed;
            const auto rows = sweep_request_intensity(spec.scenario, spec.policies, spec.lambda_t_grid,
                                                      spec.replications, spec.seed, options, exec);
            write_sweep_csv(body, rows, spec.seed);
            for (const auto& r : rows)
                log << to_string(r.policy) << " lambda_T=" << fmt(r.lambda_t, "%g") << " mean=" << fmt(r.estimate.mean, "%.6g")
                    << " +/- " << fmt(r.estimate.half_width_95, "%.3g") << '\n';
            columns = {"policy", "lambda_T", "mean_cost", "ci95_half_width", "replications", "seed"};
            break;
        }
        case ExperimentKind::bounds:
            write_bounds_csv(body, spec.scenario, spec.bounds_stages, spec.fading_samples, spec.seed, exec);
            columns = {"stages", "state_hex", "exact_value", "approx_value", "lower_bound", "upper_bound"};
            break;
        case ExperimentKind::validate: {
            const auto results = run_validation_suite(spec.scenario, spec.seed, spec.fading_samples, exec);
            body << "property,status,detail\n";
            for (const auto& r : results) {
                log << (r.passed ? "PASS " : "FAIL ") << r.property << (r.detail.empty() ? "" : ": ") << r.detail
                    << '\n';
                body << r.property << ',' << (r.passed ? "pass" : "fail") << ",\"" << r.detail << "\"\n";
                if (!r.passed) status = kExitValidationFailure;
            }
            columns = {"property", "status", "detail"};
            break;
        }
    }

    if (!spec.output_path.empty()) {
        write_file_atomically(spec.output_path, body.str());
        write_file_atomically(spec.output_path + ".meta.json", metadata(spec, columns));
        log << "wrote " << spec.output_path << '\n';
    }
    return status;
}

}  // namespace mcache
