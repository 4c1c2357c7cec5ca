#pragma once

// Allocation policies: the fraction of total team effort assigned to
// perfective maintenance each step, either a constant or a reactive rule
// driven by the productivity ratio.

#include "tdsim/engine.hpp"
#include "tdsim/errors.hpp"

#include <utility>
#include <variant>

namespace tdsim {

// Constant perfective-allocation fraction in [0, 1].
struct FixedAllocation {
    double value = 1.0;

    friend bool operator==(const FixedAllocation&, const FixedAllocation&) = default;
};

// Reactive rule: productivity ratio -> target allocation through a table
// function; the run follows the target with a first-order delay of
// smoothing_time months.
struct TableAllocation {
    TableFunction table;
    double smoothing_time = 12.0; // months

    friend bool operator==(const TableAllocation&, const TableAllocation&) = default;
};

// Default reactive rule: full perfective allocation while the productivity
// ratio holds at 1, falling steeply to a 0.2 floor once the ratio drops below
// the 0.95 knee. Breakpoints are configuration and can be overridden per
// scenario.
inline TableFunction default_scenario_table() {
    return TableFunction({{0.0, 0.2}, {0.95, 0.2}, {1.0, 1.0}});
}

class AllocationPolicy {
public:
    static AllocationPolicy fixed(double value) {
        if (!(value >= 0.0 && value <= 1.0)) {
            throw ValidationError("policy.value: must be in [0, 1], got " + format_double(value));
        }
        return AllocationPolicy(FixedAllocation{value});
    }

    static AllocationPolicy table_driven(TableFunction table, double smoothing_time) {
        for (const Breakpoint& p : table.breakpoints()) {
            if (!(p.y >= 0.0 && p.y <= 1.0)) {
                throw ValidationError("policy.breakpoints: allocation values must be in [0, 1], "
                                      "got " + format_double(p.y) + " at x = " + format_double(p.x));
            }
        }
        if (!(smoothing_time > 0.0)) {
            throw ValidationError("policy.smoothing_time: must be strictly positive, got " +
                                  format_double(smoothing_time));
        }
        return AllocationPolicy(TableAllocation{std::move(table), smoothing_time});
    }

    bool is_fixed() const noexcept { return std::holds_alternative<FixedAllocation>(variant_); }

    const FixedAllocation* as_fixed() const noexcept {
        return std::get_if<FixedAllocation>(&variant_);
    }
    const TableAllocation* as_table() const noexcept {
        return std::get_if<TableAllocation>(&variant_);
    }

    // Target allocation for the given productivity ratio.
    double target(double productivity_ratio) const noexcept {
        if (const FixedAllocation* f = as_fixed()) return f->value;
        return (as_table()->table)(productivity_ratio);
    }

    // Allocation level the run starts from: the fixed value, or 1 for
    // reactive policies (full perfective allocation before any decay).
    double initial_level() const noexcept {
        if (const FixedAllocation* f = as_fixed()) return f->value;
        return 1.0;
    }

    friend bool operator==(const AllocationPolicy&, const AllocationPolicy&) = default;

private:
    explicit AllocationPolicy(std::variant<FixedAllocation, TableAllocation> v)
        : variant_(std::move(v)) {}

    std::variant<FixedAllocation, TableAllocation> variant_;
};

} // namespace tdsim
