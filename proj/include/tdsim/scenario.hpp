#pragma once

// Scenario assembly: built-in scenario definitions, the JSON configuration
// format (one base scenario + one override layer), validation, and the glue
// that turns a ScenarioSpec into a run.

#include "tdsim/engine.hpp"
#include "tdsim/errors.hpp"
#include "tdsim/model.hpp"
#include "tdsim/policy.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tdsim {

struct ScenarioSpec {
    std::string name;
    ModelParameters params;
    StockState initial;
    AllocationPolicy policy = AllocationPolicy::fixed(1.0);
    IntegrationSettings settings;

    void validate() const {
        params.validate();
        initial.validate();
        settings.validate();
        if (initial.allocation_level != policy.initial_level()) {
            throw ValidationError("initial.allocation_level: must equal the policy's initial "
                                  "allocation (" + format_double(policy.initial_level()) +
                                  "), got " + format_double(initial.allocation_level));
        }
    }

    friend bool operator==(const ScenarioSpec&, const ScenarioSpec&) = default;
};

inline bool is_builtin_scenario_id(std::string_view id) { return id == "s1" || id == "s2"; }

// id -> one-line description, in listing order.
inline std::vector<std::pair<std::string, std::string>> builtin_scenario_list() {
    return {
        {"s1", "perfective maintenance only: fixed allocation 1.0, no debt repayment"},
        {"s2", "preventive trigger on productivity decay: table-driven allocation, "
               "12-month reaction delay"},
    };
}

inline ScenarioSpec builtin_scenario(std::string_view id) {
    if (!is_builtin_scenario_id(id)) {
        throw ValidationError("unknown builtin scenario id '" + std::string(id) +
                              "' (known: s1, s2)");
    }
    ScenarioSpec spec;
    spec.name = std::string(id);
    spec.params = ModelParameters{};
    if (id == "s1") {
        spec.policy = AllocationPolicy::fixed(1.0);
    } else {
        spec.policy = AllocationPolicy::table_driven(default_scenario_table(),
                                                     spec.params.smoothing_time);
    }
    spec.initial = StockState{};
    spec.initial.production_library = 10000.0;
    spec.initial.allocation_level = spec.policy.initial_level();
    spec.settings = IntegrationSettings{0.25, spec.params.time_horizon, 1.0};
    return spec;
}

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& obj,
                                std::initializer_list<std::string_view> allowed,
                                const std::string& section) {
    for (const auto& item : obj.items()) {
        bool known = false;
        for (std::string_view k : allowed) {
            if (item.key() == k) {
                known = true;
                break;
            }
        }
        if (!known) {
            throw ValidationError(section.empty() ? "unknown key '" + item.key() + "'"
                                                  : section + "." + item.key() + ": unknown key");
        }
    }
}

inline double require_number(const nlohmann::json& v, const std::string& key) {
    if (!v.is_number()) {
        throw ValidationError(key + ": expected a number, got " + std::string(v.type_name()));
    }
    return v.get<double>();
}

inline std::string require_string(const nlohmann::json& v, const std::string& key) {
    if (!v.is_string()) {
        throw ValidationError(key + ": expected a string, got " + std::string(v.type_name()));
    }
    return v.get<std::string>();
}

inline const nlohmann::json& require_object(const nlohmann::json& v, const std::string& key) {
    if (!v.is_object()) {
        throw ValidationError(key + ": expected an object, got " + std::string(v.type_name()));
    }
    return v;
}

} // namespace detail

// Parses a scenario document: a base builtin scenario ("base", default "s1")
// with optional overrides in sections params / initial / policy / settings.
// Every key is optional; malformed or unknown keys raise ValidationError
// naming the key.
inline ScenarioSpec parse_scenario(const nlohmann::json& doc) {
    using nlohmann::json;
    detail::require_object(doc, "scenario document");
    detail::reject_unknown_keys(doc, {"name", "base", "params", "initial", "policy", "settings"},
                                "");

    std::string base_id = "s1";
    if (doc.contains("base")) {
        base_id = detail::require_string(doc.at("base"), "base");
        if (!is_builtin_scenario_id(base_id)) {
            throw ValidationError("base: unknown scenario id '" + base_id + "' (known: s1, s2)");
        }
    }
    ScenarioSpec spec = builtin_scenario(base_id);

    if (doc.contains("name")) spec.name = detail::require_string(doc.at("name"), "name");

    if (doc.contains("params")) {
        const json& p = detail::require_object(doc.at("params"), "params");
        detail::reject_unknown_keys(
            p,
            {"new_business_demands", "nominal_productivity", "monthly_hours_worked",
             "refactoring_effort_necessary", "refactoring_overhead", "maintenance_team",
             "time_horizon", "smoothing_time", "backlog_drain_time", "debt_drain_time",
             "debt_accrual_basis"},
            "params");
        const auto num = [&](const char* key, double& field) {
            if (p.contains(key)) field = detail::require_number(p.at(key), "params." + std::string(key));
        };
        num("new_business_demands", spec.params.new_business_demands);
        num("nominal_productivity", spec.params.nominal_productivity);
        num("monthly_hours_worked", spec.params.monthly_hours_worked);
        num("refactoring_effort_necessary", spec.params.refactoring_effort_necessary);
        num("refactoring_overhead", spec.params.refactoring_overhead);
        num("maintenance_team", spec.params.maintenance_team);
        num("time_horizon", spec.params.time_horizon);
        num("smoothing_time", spec.params.smoothing_time);
        num("backlog_drain_time", spec.params.backlog_drain_time);
        num("debt_drain_time", spec.params.debt_drain_time);
        if (p.contains("debt_accrual_basis")) {
            const std::string basis =
                detail::require_string(p.at("debt_accrual_basis"), "params.debt_accrual_basis");
            if (basis == "allocated") {
                spec.params.debt_accrual_basis = DebtAccrualBasis::kAllocatedEffort;
            } else if (basis == "expended") {
                spec.params.debt_accrual_basis = DebtAccrualBasis::kExpendedEffort;
            } else {
                throw ValidationError("params.debt_accrual_basis: expected \"allocated\" or "
                                      "\"expended\", got \"" + basis + "\"");
            }
        }
    }

    if (doc.contains("policy")) {
        const json& p = detail::require_object(doc.at("policy"), "policy");
        detail::reject_unknown_keys(p, {"type", "value", "breakpoints", "smoothing_time"},
                                    "policy");
        if (!p.contains("type")) {
            throw ValidationError("policy.type: required when a policy section is present");
        }
        const std::string type = detail::require_string(p.at("type"), "policy.type");
        if (type == "fixed") {
            if (p.contains("breakpoints") || p.contains("smoothing_time")) {
                throw ValidationError("policy: breakpoints/smoothing_time are not keys of a "
                                      "fixed policy");
            }
            double value = 1.0;
            if (p.contains("value")) value = detail::require_number(p.at("value"), "policy.value");
            spec.policy = AllocationPolicy::fixed(value);
        } else if (type == "table") {
            if (p.contains("value")) {
                throw ValidationError("policy.value: not a key of a table policy");
            }
            TableFunction table = default_scenario_table();
            if (p.contains("breakpoints")) {
                const json& bp = p.at("breakpoints");
                if (!bp.is_array()) {
                    throw ValidationError("policy.breakpoints: expected an array of [x, y] pairs");
                }
                std::vector<Breakpoint> points;
                points.reserve(bp.size());
                for (const json& pair : bp) {
                    if (!pair.is_array() || pair.size() != 2) {
                        throw ValidationError(
                            "policy.breakpoints: each entry must be an [x, y] pair");
                    }
                    points.push_back({detail::require_number(pair.at(0), "policy.breakpoints[].x"),
                                      detail::require_number(pair.at(1), "policy.breakpoints[].y")});
                }
                table = TableFunction(std::move(points));
            }
            double smoothing = spec.params.smoothing_time;
            if (p.contains("smoothing_time")) {
                smoothing = detail::require_number(p.at("smoothing_time"), "policy.smoothing_time");
            }
            spec.policy = AllocationPolicy::table_driven(std::move(table), smoothing);
        } else {
            throw ValidationError("policy.type: expected \"fixed\" or \"table\", got \"" + type +
                                  "\"");
        }
    } else if (const TableAllocation* t = spec.policy.as_table();
               t != nullptr && t->smoothing_time != spec.params.smoothing_time) {
        // Base policy inherits an overridden params.smoothing_time.
        spec.policy = AllocationPolicy::table_driven(t->table, spec.params.smoothing_time);
    }

    bool allocation_level_explicit = false;
    if (doc.contains("initial")) {
        const json& ini = detail::require_object(doc.at("initial"), "initial");
        detail::reject_unknown_keys(ini,
                                    {"backlog", "production_library", "technical_debt",
                                     "total_effort", "allocation_level"},
                                    "initial");
        const auto num = [&](const char* key, double& field) {
            if (ini.contains(key)) {
                field = detail::require_number(ini.at(key), "initial." + std::string(key));
            }
        };
        num("backlog", spec.initial.backlog);
        num("production_library", spec.initial.production_library);
        num("technical_debt", spec.initial.technical_debt);
        num("total_effort", spec.initial.total_effort);
        if (ini.contains("allocation_level")) {
            spec.initial.allocation_level =
                detail::require_number(ini.at("allocation_level"), "initial.allocation_level");
            allocation_level_explicit = true;
        }
    }
    if (!allocation_level_explicit) spec.initial.allocation_level = spec.policy.initial_level();

    if (doc.contains("settings")) {
        const json& s = detail::require_object(doc.at("settings"), "settings");
        detail::reject_unknown_keys(s, {"dt", "horizon", "record_every"}, "settings");
        const auto num = [&](const char* key, double& field) {
            if (s.contains(key)) {
                field = detail::require_number(s.at(key), "settings." + std::string(key));
            }
        };
        num("dt", spec.settings.dt);
        num("horizon", spec.settings.horizon);
        num("record_every", spec.settings.record_every);
    }

    spec.validate();
    return spec;
}

inline ScenarioSpec parse_scenario_text(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(std::string("scenario document: ") + e.what());
    }
    return parse_scenario(doc);
}

inline ScenarioSpec load_scenario_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("scenario file not found or unreadable: " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(buf.str());
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError("scenario file " + path.string() + ": " + e.what());
    }
    ScenarioSpec spec = parse_scenario(doc);
    if (!doc.contains("name")) spec.name = path.stem().string();
    return spec;
}

// Fully explicit document; parse_scenario(render_scenario(spec)) == spec.
inline nlohmann::json render_scenario(const ScenarioSpec& spec) {
    nlohmann::json doc;
    doc["name"] = spec.name;
    nlohmann::json& p = doc["params"];
    p["new_business_demands"] = spec.params.new_business_demands;
    p["nominal_productivity"] = spec.params.nominal_productivity;
    p["monthly_hours_worked"] = spec.params.monthly_hours_worked;
    p["refactoring_effort_necessary"] = spec.params.refactoring_effort_necessary;
    p["refactoring_overhead"] = spec.params.refactoring_overhead;
    p["maintenance_team"] = spec.params.maintenance_team;
    p["time_horizon"] = spec.params.time_horizon;
    p["smoothing_time"] = spec.params.smoothing_time;
    p["backlog_drain_time"] = spec.params.backlog_drain_time;
    p["debt_drain_time"] = spec.params.debt_drain_time;
    p["debt_accrual_basis"] =
        spec.params.debt_accrual_basis == DebtAccrualBasis::kAllocatedEffort ? "allocated"
                                                                             : "expended";
    nlohmann::json& ini = doc["initial"];
    ini["backlog"] = spec.initial.backlog;
    ini["production_library"] = spec.initial.production_library;
    ini["technical_debt"] = spec.initial.technical_debt;
    ini["total_effort"] = spec.initial.total_effort;
    ini["allocation_level"] = spec.initial.allocation_level;
    nlohmann::json& pol = doc["policy"];
    if (const FixedAllocation* f = spec.policy.as_fixed()) {
        pol["type"] = "fixed";
        pol["value"] = f->value;
    } else {
        const TableAllocation* t = spec.policy.as_table();
        pol["type"] = "table";
        nlohmann::json bp = nlohmann::json::array();
        for (const Breakpoint& b : t->table.breakpoints()) {
            bp.push_back({b.x, b.y});
        }
        pol["breakpoints"] = std::move(bp);
        pol["smoothing_time"] = t->smoothing_time;
    }
    nlohmann::json& s = doc["settings"];
    s["dt"] = spec.settings.dt;
    s["horizon"] = spec.settings.horizon;
    s["record_every"] = spec.settings.record_every;
    return doc;
}

// Validates and runs one scenario to completion.
inline RunResult run_scenario(const ScenarioSpec& spec) {
    spec.validate();
    const MaintenanceSystem system(spec.params, spec.policy);
    const auto initial = spec.initial.as_array();
    return integrate(system, std::span<const double>(initial), spec.settings);
}

} // namespace tdsim
