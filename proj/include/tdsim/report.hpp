#pragma once

// Run output: CSV time-series emission, end-of-run summary metrics, two-run
// comparison, and parameter sweeps.

#include "tdsim/engine.hpp"
#include "tdsim/errors.hpp"
#include "tdsim/scenario.hpp"

#include <json.hpp>

#include <array>
#include <cstdio>
#include <future>
#include <iomanip>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tdsim {

inline constexpr double kDefaultEquilibriumWindowMonths = 24.0;

// End-of-horizon values plus derived indicators used for policy comparison.
struct SummaryMetrics {
    double horizon_months = 0.0;
    double final_backlog = 0.0;
    double final_production_library = 0.0;
    double final_technical_debt = 0.0;
    double final_total_effort = 0.0;
    double final_allocation = 0.0;
    double final_maintainability = 0.0;
    double final_productivity_ratio = 0.0;
    double min_maintainability = 0.0;
    double min_maintainability_t = 0.0;     // months
    double mean_allocation_tail = 0.0;      // equilibrium estimate over the trailing window
    double tail_window_months = kDefaultEquilibriumWindowMonths;
    double delivered_function_points = 0.0; // production library growth over the run

    friend bool operator==(const SummaryMetrics&, const SummaryMetrics&) = default;
};

inline SummaryMetrics summarize(const RunResult& run,
                                double window_months = kDefaultEquilibriumWindowMonths) {
    const std::vector<double>& t = run.times();
    SummaryMetrics m;
    m.horizon_months = t.back();
    m.final_backlog = run.final_value("backlog_fp");
    m.final_production_library = run.final_value("production_library_fp");
    m.final_technical_debt = run.final_value("technical_debt_mh");
    m.final_total_effort = run.final_value("total_effort_mh");
    m.final_allocation = run.final_value("allocation");
    m.final_maintainability = run.final_value("maintainability");
    m.final_productivity_ratio = run.final_value("productivity_ratio");

    const std::span<const double> maint = run.values("maintainability");
    std::size_t min_idx = 0;
    for (std::size_t i = 1; i < maint.size(); ++i) {
        if (maint[i] < maint[min_idx]) min_idx = i;
    }
    m.min_maintainability = maint[min_idx];
    m.min_maintainability_t = t[min_idx];

    const std::span<const double> alloc = run.values("allocation");
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < alloc.size(); ++i) {
        if (t[i] > m.horizon_months - window_months) {
            sum += alloc[i];
            ++count;
        }
    }
    m.mean_allocation_tail = count > 0 ? sum / static_cast<double>(count) : m.final_allocation;
    m.tail_window_months = window_months;

    const std::span<const double> pl = run.values("production_library_fp");
    m.delivered_function_points = pl.back() - pl.front();
    return m;
}

inline constexpr std::array<std::string_view, 11> kCsvColumns = {
    "backlog_fp",
    "production_library_fp",
    "technical_debt_mh",
    "total_effort_mh",
    "maintainability",
    "productivity_ratio",
    "allocation",
    "new_requirements_rate_fp_mo",
    "perfective_rate_fp_mo",
    "preventive_rate_mh_mo",
    "debt_accrual_rate_mh_mo",
};

// One header row, then one row per recorded time, ascending. Fixed column
// set and order; shortest round-trip decimals, so identical runs produce
// byte-identical files.
inline void write_csv(const RunResult& run, std::ostream& out) {
    std::array<std::span<const double>, kCsvColumns.size()> cols;
    for (std::size_t c = 0; c < kCsvColumns.size(); ++c) cols[c] = run.values(kCsvColumns[c]);

    out << "t_months";
    for (std::string_view name : kCsvColumns) out << ',' << name;
    out << '\n';
    const std::vector<double>& t = run.times();
    for (std::size_t i = 0; i < t.size(); ++i) {
        out << format_double(t[i]);
        for (std::size_t c = 0; c < kCsvColumns.size(); ++c) {
            out << ',' << format_double(cols[c][i]);
        }
        out << '\n';
    }
    if (!out) throw IoError("failed writing CSV time series");
}

// ---------------------------------------------------------------------------
// Two-run comparison

struct ComparisonRow {
    std::string metric;
    double a = 0.0;
    double b = 0.0;
    double difference = 0.0; // b - a
    std::string verdict;     // label of the better run, or "tie"
};

struct ComparisonReport {
    std::string label_a;
    std::string label_b;
    double horizon_months = 0.0;
    std::vector<ComparisonRow> rows;
};

// Compares the four headline metrics. Higher is better for delivered
// function points and productivity ratio; lower is better for backlog and
// technical debt. Requires both runs to share the horizon.
inline ComparisonReport compare(const SummaryMetrics& a, const SummaryMetrics& b,
                                std::string label_a = "A", std::string label_b = "B") {
    if (a.horizon_months != b.horizon_months) {
        throw ValidationError("compare: horizons differ (" + format_double(a.horizon_months) +
                              " vs " + format_double(b.horizon_months) + " months)");
    }
    ComparisonReport report;
    report.label_a = label_a;
    report.label_b = label_b;
    report.horizon_months = a.horizon_months;

    const auto add = [&](std::string metric, double va, double vb, bool higher_is_better) {
        ComparisonRow row;
        row.metric = std::move(metric);
        row.a = va;
        row.b = vb;
        row.difference = vb - va;
        if (va == vb) {
            row.verdict = "tie";
        } else {
            const bool b_better = higher_is_better ? vb > va : vb < va;
            row.verdict = b_better ? label_b : label_a;
        }
        report.rows.push_back(std::move(row));
    };
    add("delivered_fp", a.delivered_function_points, b.delivered_function_points, true);
    add("final_backlog_fp", a.final_backlog, b.final_backlog, false);
    add("final_productivity_ratio", a.final_productivity_ratio, b.final_productivity_ratio, true);
    add("final_technical_debt_mh", a.final_technical_debt, b.final_technical_debt, false);
    return report;
}

namespace detail {

inline std::string format_general(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

} // namespace detail

inline std::string format_comparison(const ComparisonReport& r) {
    const std::array<std::string, 5> header = {"metric", r.label_a, r.label_b, "difference",
                                               "verdict"};
    std::vector<std::array<std::string, 5>> cells;
    cells.reserve(r.rows.size());
    for (const ComparisonRow& row : r.rows) {
        cells.push_back({row.metric, detail::format_general(row.a), detail::format_general(row.b),
                         detail::format_general(row.difference), row.verdict});
    }
    std::array<std::size_t, 5> width{};
    for (std::size_t c = 0; c < 5; ++c) {
        width[c] = header[c].size();
        for (const auto& row : cells) width[c] = std::max(width[c], row[c].size());
    }

    std::ostringstream out;
    out << "comparison: " << r.label_a << " vs " << r.label_b << " (horizon "
        << format_double(r.horizon_months) << " months)\n";
    const auto emit = [&](const std::array<std::string, 5>& row) {
        out << std::left << std::setw(static_cast<int>(width[0])) << row[0];
        for (std::size_t c = 1; c < 5; ++c) {
            out << "  " << std::right << std::setw(static_cast<int>(width[c])) << row[c];
        }
        out << '\n';
    };
    emit(header);
    for (const auto& row : cells) emit(row);
    return out.str();
}

inline nlohmann::json comparison_json(const ComparisonReport& r) {
    nlohmann::json doc;
    doc["scenario_a"] = r.label_a;
    doc["scenario_b"] = r.label_b;
    doc["horizon_months"] = r.horizon_months;
    nlohmann::json rows = nlohmann::json::array();
    for (const ComparisonRow& row : r.rows) {
        rows.push_back({{"metric", row.metric},
                        {"a", row.a},
                        {"b", row.b},
                        {"difference", row.difference},
                        {"verdict", row.verdict}});
    }
    doc["metrics"] = std::move(rows);
    return doc;
}

// ---------------------------------------------------------------------------
// Parameter sweeps

inline std::vector<std::string> sweepable_parameter_paths() {
    return {"params.new_business_demands",
            "params.nominal_productivity",
            "params.monthly_hours_worked",
            "params.refactoring_effort_necessary",
            "params.refactoring_overhead",
            "params.maintenance_team",
            "params.time_horizon",
            "params.smoothing_time",
            "params.backlog_drain_time",
            "params.debt_drain_time",
            "policy.value",
            "policy.smoothing_time"};
}

// Returns a copy of `base` with one numeric field replaced. Setting
// policy.value re-pins the initial allocation level so the scenario stays
// valid; setting params.smoothing_time also re-syncs a table policy's delay,
// since the parameter is the policy's default.
inline ScenarioSpec with_parameter(const ScenarioSpec& base, std::string_view path, double value) {
    ScenarioSpec spec = base;
    const auto set_param = [&](double ModelParameters::* field) { spec.params.*field = value; };

    if (path == "params.new_business_demands") {
        set_param(&ModelParameters::new_business_demands);
    } else if (path == "params.nominal_productivity") {
        set_param(&ModelParameters::nominal_productivity);
    } else if (path == "params.monthly_hours_worked") {
        set_param(&ModelParameters::monthly_hours_worked);
    } else if (path == "params.refactoring_effort_necessary") {
        set_param(&ModelParameters::refactoring_effort_necessary);
    } else if (path == "params.refactoring_overhead") {
        set_param(&ModelParameters::refactoring_overhead);
    } else if (path == "params.maintenance_team") {
        set_param(&ModelParameters::maintenance_team);
    } else if (path == "params.time_horizon") {
        set_param(&ModelParameters::time_horizon);
    } else if (path == "params.smoothing_time") {
        set_param(&ModelParameters::smoothing_time);
        if (const TableAllocation* t = spec.policy.as_table()) {
            spec.policy = AllocationPolicy::table_driven(t->table, value);
        }
    } else if (path == "params.backlog_drain_time") {
        set_param(&ModelParameters::backlog_drain_time);
    } else if (path == "params.debt_drain_time") {
        set_param(&ModelParameters::debt_drain_time);
    } else if (path == "policy.value") {
        if (!spec.policy.is_fixed()) {
            throw UsageError("policy.value: scenario '" + base.name +
                             "' uses a table-driven policy");
        }
        spec.policy = AllocationPolicy::fixed(value);
        spec.initial.allocation_level = value;
    } else if (path == "policy.smoothing_time") {
        const TableAllocation* t = spec.policy.as_table();
        if (t == nullptr) {
            throw UsageError("policy.smoothing_time: scenario '" + base.name +
                             "' uses a fixed policy");
        }
        spec.policy = AllocationPolicy::table_driven(t->table, value);
    } else {
        std::string known;
        for (const std::string& p : sweepable_parameter_paths()) {
            known += known.empty() ? p : ", " + p;
        }
        throw UsageError("unknown sweep parameter path '" + std::string(path) +
                         "' (known: " + known + ")");
    }
    return spec;
}

struct SweepRow {
    double value = 0.0;
    SummaryMetrics summary;
};

struct SweepResult {
    std::string parameter_path;
    std::vector<SweepRow> rows;
};

// One complete run per value, in input order. Specs are validated up front;
// runs execute concurrently and share nothing mutable.
inline SweepResult sweep(const ScenarioSpec& base, std::string_view parameter_path,
                         std::span<const double> values) {
    std::vector<ScenarioSpec> specs;
    specs.reserve(values.size());
    for (double v : values) {
        try {
            ScenarioSpec spec = with_parameter(base, parameter_path, v);
            spec.validate();
            specs.push_back(std::move(spec));
        } catch (const UsageError&) {
            throw;
        } catch (const std::exception& e) {
            throw ValidationError("sweep " + std::string(parameter_path) + " = " +
                                  format_double(v) + ": " + e.what());
        }
    }

    std::vector<std::future<SummaryMetrics>> futures;
    futures.reserve(specs.size());
    for (const ScenarioSpec& spec : specs) {
        futures.push_back(std::async(std::launch::async,
                                     [&spec]() { return summarize(run_scenario(spec)); }));
    }

    SweepResult result;
    result.parameter_path = std::string(parameter_path);
    result.rows.reserve(values.size());
    for (std::size_t i = 0; i < futures.size(); ++i) {
        try {
            result.rows.push_back(SweepRow{values[i], futures[i].get()});
        } catch (const std::exception& e) {
            throw ValidationError("sweep " + std::string(parameter_path) + " = " +
                                  format_double(values[i]) + ": " + e.what());
        }
    }
    return result;
}

inline void write_sweep_csv(const SweepResult& sweep_result, std::ostream& out) {
    out << sweep_result.parameter_path
        << ",final_backlog_fp,final_production_library_fp,final_technical_debt_mh"
           ",final_total_effort_mh,final_allocation,final_maintainability"
           ",final_productivity_ratio,min_maintainability,min_maintainability_t_months"
           ",mean_allocation_tail,delivered_fp\n";
    for (const SweepRow& row : sweep_result.rows) {
        const SummaryMetrics& m = row.summary;
        out << format_double(row.value) << ',' << format_double(m.final_backlog) << ','
            << format_double(m.final_production_library) << ','
            << format_double(m.final_technical_debt) << ',' << format_double(m.final_total_effort)
            << ',' << format_double(m.final_allocation) << ','
            << format_double(m.final_maintainability) << ','
            << format_double(m.final_productivity_ratio) << ','
            << format_double(m.min_maintainability) << ','
            << format_double(m.min_maintainability_t) << ','
            << format_double(m.mean_allocation_tail) << ','
            << format_double(m.delivered_function_points) << '\n';
    }
    if (!out) throw IoError("failed writing sweep CSV");
}

// Human-readable summary block, one "key: value" line per metric.
inline std::string format_summary(const std::string& scenario_name, const SummaryMetrics& m) {
    std::ostringstream out;
    out << "scenario: " << scenario_name << '\n'
        << "horizon_months: " << format_double(m.horizon_months) << '\n'
        << "final_backlog_fp: " << format_double(m.final_backlog) << '\n'
        << "final_production_library_fp: " << format_double(m.final_production_library) << '\n'
        << "final_technical_debt_mh: " << format_double(m.final_technical_debt) << '\n'
        << "final_total_effort_mh: " << format_double(m.final_total_effort) << '\n'
        << "final_allocation: " << format_double(m.final_allocation) << '\n'
        << "final_maintainability: " << format_double(m.final_maintainability) << '\n'
        << "final_productivity_ratio: " << format_double(m.final_productivity_ratio) << '\n'
        << "min_maintainability: " << format_double(m.min_maintainability) << '\n'
        << "min_maintainability_t_months: " << format_double(m.min_maintainability_t) << '\n'
        << "mean_allocation_tail_" << format_double(m.tail_window_months)
        << "mo: " << format_double(m.mean_allocation_tail) << '\n'
        << "delivered_fp: " << format_double(m.delivered_function_points) << '\n';
    return out.str();
}

} // namespace tdsim
