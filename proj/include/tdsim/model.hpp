#pragma once

// The maintenance model: a constant-size team splits its monthly effort
// between perfective work (delivering backlog into the production library)
// and preventive work (paying down technical-debt principal). Debt erodes
// maintainability exponentially, maintainability scales productivity, and
// the allocation policy closes the loop.

#include "tdsim/engine.hpp"
#include "tdsim/errors.hpp"
#include "tdsim/policy.hpp"

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

namespace tdsim {

// Whether debt accrues on the effort allocated to perfective work, or only on
// the share actually absorbed when the backlog limits delivery. The allocated
// basis gives exactly linear debt growth under a fixed full-perfective
// policy; the expended basis is kept switchable for sensitivity studies.
enum class DebtAccrualBasis {
    kAllocatedEffort,
    kExpendedEffort,
};

struct ModelParameters {
    double new_business_demands = 0.07;        // fraction of the production library, per year
    double nominal_productivity = 4.65;        // function points / person / month
    double monthly_hours_worked = 160.0;       // man-hours / person / month
    double refactoring_effort_necessary = 0.3; // fraction of perfective effort incurring debt
    double refactoring_overhead = 2.0;         // refactoring-vs-development overhead ratio
    double maintenance_team = 14.0;            // persons, constant over the run
    double time_horizon = 132.0;               // months; fixed constant in the decay denominator
    double smoothing_time = 12.0;              // months; default reaction delay for table policies
    double backlog_drain_time = 1.0;           // months; minimum residence of work in the backlog
    double debt_drain_time = 1.0;              // months; minimum residence of debt principal
    DebtAccrualBasis debt_accrual_basis = DebtAccrualBasis::kAllocatedEffort;

    // Total team effort per month, man-hours/month.
    double team_capacity() const noexcept { return maintenance_team * monthly_hours_worked; }

    // Composite decay constant of the maintainability curve, 1/man-hour.
    // Derived diagnostic, not an independent parameter.
    double maintainability_decay_per_man_hour() const noexcept {
        return refactoring_overhead /
               (time_horizon * maintenance_team * monthly_hours_worked *
                refactoring_effort_necessary);
    }

    void validate() const {
        const auto positive = [](double v, const char* key) {
            if (!(v > 0.0) || !std::isfinite(v)) {
                throw ValidationError(std::string("params.") + key +
                                      ": must be strictly positive, got " + format_double(v));
            }
        };
        positive(new_business_demands, "new_business_demands");
        positive(nominal_productivity, "nominal_productivity");
        positive(monthly_hours_worked, "monthly_hours_worked");
        positive(refactoring_effort_necessary, "refactoring_effort_necessary");
        positive(refactoring_overhead, "refactoring_overhead");
        positive(maintenance_team, "maintenance_team");
        positive(time_horizon, "time_horizon");
        positive(smoothing_time, "smoothing_time");
        positive(backlog_drain_time, "backlog_drain_time");
        positive(debt_drain_time, "debt_drain_time");
        if (refactoring_effort_necessary > 1.0) {
            throw ValidationError("params.refactoring_effort_necessary: must be in (0, 1], got " +
                                  format_double(refactoring_effort_necessary));
        }
    }

    friend bool operator==(const ModelParameters&, const ModelParameters&) = default;
};

// The five integrated levels. allocation_level is the smoothed perfective
// allocation; for fixed policies it is constant over the run.
struct StockState {
    double backlog = 0.0;            // function points awaiting perfective work
    double production_library = 0.0; // function points in operation
    double technical_debt = 0.0;     // man-hours of debt principal
    double total_effort = 0.0;       // man-hours spent to date
    double allocation_level = 1.0;   // dimensionless, in [0, 1]

    static constexpr std::size_t kSize = 5;

    std::array<double, kSize> as_array() const noexcept {
        return {backlog, production_library, technical_debt, total_effort, allocation_level};
    }

    static StockState from_span(std::span<const double> v) noexcept {
        return StockState{v[0], v[1], v[2], v[3], v[4]};
    }

    void validate() const {
        const auto non_negative = [](double v, const char* key) {
            if (!(v >= 0.0) || !std::isfinite(v)) {
                throw ValidationError(std::string("initial.") + key +
                                      ": must be non-negative, got " + format_double(v));
            }
        };
        non_negative(backlog, "backlog");
        non_negative(production_library, "production_library");
        non_negative(technical_debt, "technical_debt");
        non_negative(total_effort, "total_effort");
        if (!(allocation_level >= 0.0 && allocation_level <= 1.0)) {
            throw ValidationError("initial.allocation_level: must be in [0, 1], got " +
                                  format_double(allocation_level));
        }
    }

    friend bool operator==(const StockState&, const StockState&) = default;
};

// Algebraic variables computed from the state each step.
struct AuxiliaryValues {
    double maintainability = 1.0;       // dimensionless, in (0, 1]
    double productivity = 0.0;          // function points / person / month
    double productivity_ratio = 1.0;    // actual/nominal; equals maintainability by construction
    double allocation_target = 1.0;     // policy output before smoothing
    double perfective_effort = 0.0;     // man-hours / month
    double preventive_effort = 0.0;     // man-hours / month
    double new_requirements_rate = 0.0; // function points / month
    double perfective_rate = 0.0;       // function points / month
    double preventive_rate = 0.0;       // man-hours / month
    double debt_accrual_rate = 0.0;     // man-hours / month
};

// Net flow of each level, in its stock's unit per month.
struct StockFlows {
    double backlog = 0.0;
    double production_library = 0.0;
    double technical_debt = 0.0;
    double total_effort = 0.0;
    double allocation_level = 0.0;
};

struct FlowEvaluation {
    AuxiliaryValues aux;
    StockFlows flows;
};

// Demand generated by the software in operation: an annual fraction of the
// production library, converted to a monthly rate.
inline double new_requirements_rate(double production_library, const ModelParameters& p) noexcept {
    return production_library * p.new_business_demands / 12.0;
}

// Exponential decay of maintainability in the accumulated debt principal.
// 1 at zero debt, strictly decreasing, always positive.
inline double maintainability(double technical_debt, const ModelParameters& p) noexcept {
    return std::exp(-p.maintainability_decay_per_man_hour() * technical_debt);
}

// Effective per-person productivity, degraded by maintainability.
inline double productivity(double maintainability_value, const ModelParameters& p) noexcept {
    return p.nominal_productivity * maintainability_value;
}

struct EffortSplit {
    double perfective = 0.0; // man-hours / month
    double preventive = 0.0; // man-hours / month
};

// Splits total team capacity by the allocation fraction. The two shares sum
// to team_capacity() exactly.
inline EffortSplit split_effort(double allocation, const ModelParameters& p) noexcept {
    const double capacity = p.team_capacity();
    const double perfective = capacity * allocation;
    return EffortSplit{perfective, capacity - perfective};
}

// Delivery into the production library: effective persons times per-person
// productivity, limited by what the backlog can supply over one drain time.
inline double perfective_rate(double perfective_effort, double productivity_value, double backlog,
                              const ModelParameters& p) noexcept {
    const double capacity_limited = (perfective_effort / p.monthly_hours_worked) * productivity_value;
    return std::min(capacity_limited, backlog / p.backlog_drain_time);
}

// Debt principal repayment: preventive effort at the current maintainability
// efficiency, limited by the remaining principal over one drain time.
inline double preventive_rate(double preventive_effort, double maintainability_value,
                              double technical_debt, const ModelParameters& p) noexcept {
    return std::min(preventive_effort * maintainability_value,
                    technical_debt / p.debt_drain_time);
}

// Debt incurred by perfective work, as a fixed fraction of allocated effort.
inline double debt_accrual_rate(double perfective_effort, const ModelParameters& p) noexcept {
    return p.refactoring_effort_necessary * perfective_effort;
}

// Computes all auxiliaries in dependency order and the net flow of every
// level. Pure; safe to call from any thread.
inline FlowEvaluation evaluate_flows(const StockState& state, const AllocationPolicy& policy,
                                     const ModelParameters& p, double /*t*/) noexcept {
    FlowEvaluation out;
    AuxiliaryValues& aux = out.aux;

    aux.maintainability = maintainability(state.technical_debt, p);
    aux.productivity = productivity(aux.maintainability, p);
    // Productivity = nominal * maintainability, so the actual/nominal ratio
    // collapses to maintainability; assigned directly to keep the identity
    // exact in floating point.
    aux.productivity_ratio = aux.maintainability;
    aux.allocation_target = policy.target(aux.productivity_ratio);

    const EffortSplit split = split_effort(state.allocation_level, p);
    aux.perfective_effort = split.perfective;
    aux.preventive_effort = split.preventive;

    aux.new_requirements_rate = new_requirements_rate(state.production_library, p);
    aux.perfective_rate = perfective_rate(split.perfective, aux.productivity, state.backlog, p);
    aux.preventive_rate =
        preventive_rate(split.preventive, aux.maintainability, state.technical_debt, p);

    if (p.debt_accrual_basis == DebtAccrualBasis::kAllocatedEffort) {
        aux.debt_accrual_rate = debt_accrual_rate(split.perfective, p);
    } else {
        // Effort actually absorbed: the delivered rate converted back through
        // per-person productivity, never more than what was allocated.
        const double expended =
            aux.productivity > 0.0
                ? std::min(split.perfective,
                           aux.perfective_rate * p.monthly_hours_worked / aux.productivity)
                : 0.0;
        aux.debt_accrual_rate = p.refactoring_effort_necessary * expended;
    }

    StockFlows& f = out.flows;
    f.backlog = aux.new_requirements_rate - aux.perfective_rate;
    f.production_library = aux.perfective_rate;
    f.technical_debt = aux.debt_accrual_rate - aux.preventive_rate;
    f.total_effort = p.team_capacity();
    if (const TableAllocation* table = policy.as_table()) {
        f.allocation_level = (aux.allocation_target - state.allocation_level) / table->smoothing_time;
    } else {
        f.allocation_level = 0.0;
    }

    return out;
}

// Engine adapter: presents the model as a FlowSystem over the five levels.
class MaintenanceSystem {
public:
    MaintenanceSystem(ModelParameters params, AllocationPolicy policy)
        : params_(std::move(params)), policy_(std::move(policy)) {}

    std::size_t state_size() const noexcept { return StockState::kSize; }
    std::size_t aux_size() const noexcept { return 10; }

    std::vector<std::string> state_labels() const {
        return {"backlog_fp", "production_library_fp", "technical_debt_mh", "total_effort_mh",
                "allocation"};
    }

    std::vector<std::string> aux_labels() const {
        return {"maintainability",
                "productivity_ratio",
                "new_requirements_rate_fp_mo",
                "perfective_rate_fp_mo",
                "preventive_rate_mh_mo",
                "debt_accrual_rate_mh_mo",
                "productivity_fp_person_mo",
                "allocation_target",
                "perfective_effort_mh_mo",
                "preventive_effort_mh_mo"};
    }

    void eval(double t, std::span<const double> state, std::span<double> flows,
              std::span<double> aux) const {
        const FlowEvaluation e = evaluate_flows(StockState::from_span(state), policy_, params_, t);
        flows[0] = e.flows.backlog;
        flows[1] = e.flows.production_library;
        flows[2] = e.flows.technical_debt;
        flows[3] = e.flows.total_effort;
        flows[4] = e.flows.allocation_level;
        aux[0] = e.aux.maintainability;
        aux[1] = e.aux.productivity_ratio;
        aux[2] = e.aux.new_requirements_rate;
        aux[3] = e.aux.perfective_rate;
        aux[4] = e.aux.preventive_rate;
        aux[5] = e.aux.debt_accrual_rate;
        aux[6] = e.aux.productivity;
        aux[7] = e.aux.allocation_target;
        aux[8] = e.aux.perfective_effort;
        aux[9] = e.aux.preventive_effort;
    }

    const ModelParameters& params() const noexcept { return params_; }
    const AllocationPolicy& policy() const noexcept { return policy_; }

private:
    ModelParameters params_;
    AllocationPolicy policy_;
};

} // namespace tdsim
