#pragma once

// Command-line entry point: run / compare / sweep / scenarios subcommands.
// Kept in a header so the whole surface is testable in-process; tools/ holds
// the thin main().

#include "tdsim/errors.hpp"
#include "tdsim/report.hpp"
#include "tdsim/scenario.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace tdsim {

namespace detail {

inline double parse_double_token(std::string_view token) {
    while (!token.empty() && token.front() == ' ') token.remove_prefix(1);
    while (!token.empty() && token.back() == ' ') token.remove_suffix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size()) {
        throw UsageError("invalid number '" + std::string(token) + "' in value spec");
    }
    return value;
}

} // namespace detail

// Expands a value spec: either a comma list "v1,v2,..." or an inclusive range
// "start:stop:step" (endpoints included within 1e-9).
inline std::vector<double> parse_value_spec(std::string_view spec) {
    if (spec.empty()) throw UsageError("value spec must not be empty");
    std::vector<double> values;
    if (spec.find(':') != std::string_view::npos) {
        std::vector<std::string_view> parts;
        std::size_t pos = 0;
        while (true) {
            const std::size_t next = spec.find(':', pos);
            parts.push_back(spec.substr(pos, next - pos));
            if (next == std::string_view::npos) break;
            pos = next + 1;
        }
        if (parts.size() != 3) {
            throw UsageError("range spec must be start:stop:step, got '" + std::string(spec) + "'");
        }
        const double start = detail::parse_double_token(parts[0]);
        const double stop = detail::parse_double_token(parts[1]);
        const double step = detail::parse_double_token(parts[2]);
        if (step == 0.0) throw UsageError("range spec step must be nonzero");
        const double count = (stop - start) / step;
        if (count < -1e-9) {
            throw UsageError("range spec never reaches stop: '" + std::string(spec) + "'");
        }
        if (count > 1e6) throw UsageError("range spec expands to more than 1e6 values");
        const auto n = static_cast<std::size_t>(std::floor(count + 1e-9));
        values.reserve(n + 1);
        for (std::size_t k = 0; k <= n; ++k) {
            values.push_back(start + static_cast<double>(k) * step);
        }
    } else {
        std::size_t pos = 0;
        while (true) {
            const std::size_t next = spec.find(',', pos);
            values.push_back(detail::parse_double_token(spec.substr(pos, next - pos)));
            if (next == std::string_view::npos) break;
            pos = next + 1;
        }
    }
    return values;
}

// Builtin id (s1, s2) or path to a scenario file.
inline ScenarioSpec resolve_scenario(const std::string& ref) {
    if (is_builtin_scenario_id(ref)) return builtin_scenario(ref);
    return load_scenario_file(ref);
}

namespace detail {

struct GridOverrides {
    std::optional<double> dt;
    std::optional<double> horizon;
    std::optional<double> record_every;

    void apply(ScenarioSpec& spec) const {
        if (dt) spec.settings.dt = *dt;
        if (horizon) spec.settings.horizon = *horizon;
        if (record_every) spec.settings.record_every = *record_every;
    }
};

// Writes `content` to the path, or to `fallback` when the path is empty.
inline void emit(const std::string& path, std::ostream& fallback,
                 const std::function<void(std::ostream&)>& writer) {
    if (path.empty()) {
        writer(fallback);
        return;
    }
    std::ofstream file(path);
    if (!file) throw IoError("cannot open output file: " + path);
    writer(file);
    file.flush();
    if (!file) throw IoError("failed writing output file: " + path);
}

} // namespace detail

// Returns the process exit status: 0 success, 2 usage error, 3 validation or
// scenario error, 4 I/O error. CSV goes to stdout (or --output), summaries
// and errors to stderr, so pipelines compose.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"system-dynamics simulator for software maintenance "
                 "resource-allocation policies"};
    app.name("tdsim");
    app.require_subcommand(1);

    std::string scenario_ref;
    std::string scenario_ref_b;
    std::string output_path;
    std::string param_path;
    std::string value_spec;
    bool as_json = false;
    double dt = 0.0;
    double horizon = 0.0;
    double record_every = 0.0;

    const auto add_grid_options = [&](CLI::App* cmd) {
        struct Opts {
            CLI::Option* dt;
            CLI::Option* horizon;
            CLI::Option* record_every;
        };
        return Opts{cmd->add_option("--dt", dt, "integration step, months"),
                    cmd->add_option("--horizon", horizon, "run length, months"),
                    cmd->add_option("--record-every", record_every, "recording interval, months")};
    };

    CLI::App* cmd_run = app.add_subcommand("run", "simulate one scenario; CSV time series to "
                                                  "stdout or --output, summary to stderr");
    cmd_run->add_option("scenario", scenario_ref, "builtin id (s1, s2) or scenario file path")
        ->required();
    const auto run_grid = add_grid_options(cmd_run);
    cmd_run->add_option("--output", output_path, "write the CSV here instead of stdout");

    CLI::App* cmd_compare = app.add_subcommand(
        "compare", "run two scenarios with identical overrides and report metric orderings");
    cmd_compare->add_option("scenario_a", scenario_ref, "first scenario ref")->required();
    cmd_compare->add_option("scenario_b", scenario_ref_b, "second scenario ref")->required();
    const auto compare_grid = add_grid_options(cmd_compare);
    cmd_compare->add_option("--output", output_path, "write the report here instead of stdout");
    cmd_compare->add_flag("--json", as_json, "emit the report as JSON instead of aligned text");

    CLI::App* cmd_sweep = app.add_subcommand(
        "sweep", "run one scenario across a list or range of values of one numeric parameter");
    cmd_sweep->add_option("scenario", scenario_ref, "builtin id (s1, s2) or scenario file path")
        ->required();
    cmd_sweep->add_option("--param", param_path, "parameter path, e.g. "
                                                 "params.refactoring_effort_necessary")
        ->required();
    cmd_sweep->add_option("--values", value_spec, "comma list v1,v2,... or range start:stop:step")
        ->required();
    const auto sweep_grid = add_grid_options(cmd_sweep);
    cmd_sweep->add_option("--output", output_path, "write the sweep CSV here instead of stdout");

    CLI::App* cmd_scenarios = app.add_subcommand("scenarios", "list builtin scenarios");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return 2;
    }

    const auto overrides_from = [&](const auto& grid) {
        detail::GridOverrides o;
        if (grid.dt->count() > 0) o.dt = dt;
        if (grid.horizon->count() > 0) o.horizon = horizon;
        if (grid.record_every->count() > 0) o.record_every = record_every;
        return o;
    };

    try {
        if (cmd_run->parsed()) {
            ScenarioSpec spec = resolve_scenario(scenario_ref);
            overrides_from(run_grid).apply(spec);
            spec.validate();
            const RunResult run = run_scenario(spec);
            detail::emit(output_path, out, [&](std::ostream& o) { write_csv(run, o); });
            err << format_summary(spec.name, summarize(run));
        } else if (cmd_compare->parsed()) {
            ScenarioSpec spec_a = resolve_scenario(scenario_ref);
            ScenarioSpec spec_b = resolve_scenario(scenario_ref_b);
            const detail::GridOverrides o = overrides_from(compare_grid);
            o.apply(spec_a);
            o.apply(spec_b);
            spec_a.validate();
            spec_b.validate();
            const SummaryMetrics a = summarize(run_scenario(spec_a));
            const SummaryMetrics b = summarize(run_scenario(spec_b));
            const ComparisonReport report = compare(a, b, spec_a.name, spec_b.name);
            detail::emit(output_path, out, [&](std::ostream& o2) {
                if (as_json) {
                    o2 << comparison_json(report).dump(2) << '\n';
                } else {
                    o2 << format_comparison(report);
                }
            });
        } else if (cmd_sweep->parsed()) {
            ScenarioSpec spec = resolve_scenario(scenario_ref);
            overrides_from(sweep_grid).apply(spec);
            spec.validate();
            const std::vector<double> values = parse_value_spec(value_spec);
            const SweepResult result = sweep(spec, param_path, values);
            detail::emit(output_path, out, [&](std::ostream& o) { write_sweep_csv(result, o); });
        } else if (cmd_scenarios->parsed()) {
            for (const auto& [id, description] : builtin_scenario_list()) {
                out << id << "  " << description << '\n';
            }
        }
        return 0;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return 4;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return 3;
    } catch (const SimulationError& e) {
        err << "error: " << e.what() << '\n';
        return 3;
    }
}

} // namespace tdsim
