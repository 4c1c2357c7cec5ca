#pragma once

// Generic fixed-step system-dynamics primitives: explicit-Euler integration
// over a flat state vector, piecewise-linear table functions, first-order
// exponential smoothing, and time-series recording. Nothing in here knows
// about any particular model.

#include "tdsim/errors.hpp"

#include <charconv>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tdsim {

// Shortest round-trip decimal representation. Used everywhere a double is
// serialized (CSV, summaries) so repeated runs are byte-identical.
inline std::string format_double(double value) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

// One (x, y) node of a piecewise-linear table function.
struct Breakpoint {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Breakpoint&, const Breakpoint&) = default;
};

// Piecewise-linear lookup defined by breakpoints with strictly increasing x.
// Inputs outside the defined range clamp to the endpoint values.
class TableFunction {
public:
    explicit TableFunction(std::vector<Breakpoint> points) : points_(std::move(points)) {
        if (points_.size() < 2) {
            throw ValidationError("table function: needs at least 2 breakpoints, got " +
                                  std::to_string(points_.size()));
        }
        for (std::size_t i = 1; i < points_.size(); ++i) {
            if (!(points_[i - 1].x < points_[i].x)) {
                throw ValidationError("table function: x values must be strictly increasing "
                                      "(breakpoint " + std::to_string(i) + " has x = " +
                                      format_double(points_[i].x) + " after x = " +
                                      format_double(points_[i - 1].x) + ")");
            }
        }
    }

    double operator()(double x) const noexcept {
        if (x <= points_.front().x) return points_.front().y;
        if (x >= points_.back().x) return points_.back().y;
        std::size_t hi = 1;
        while (points_[hi].x < x) ++hi;
        const Breakpoint& b = points_[hi];
        if (x == b.x) return b.y; // breakpoints reproduce exactly
        const Breakpoint& a = points_[hi - 1];
        return a.y + (b.y - a.y) * (x - a.x) / (b.x - a.x);
    }

    std::span<const Breakpoint> breakpoints() const noexcept { return points_; }

    friend bool operator==(const TableFunction&, const TableFunction&) = default;

private:
    std::vector<Breakpoint> points_;
};

// Explicit-Euler update of a first-order exponential smooth: moves `current`
// toward `target` with time constant `tau` over one step `dt`.
// Preconditions: tau > 0, dt > 0.
constexpr double smooth_step(double current, double target, double tau, double dt) noexcept {
    return current + dt * (target - current) / tau;
}

namespace detail {

// Integer multiple within 1e-9 relative; returns the multiple, or 0 when the
// ratio is not a representable positive integer.
inline std::size_t integer_ratio(double whole, double part) {
    const double q = std::round(whole / part);
    if (!(q >= 1.0) || q > 1e15) return 0;
    if (std::abs(q * part - whole) > 1e-9 * std::abs(whole)) return 0;
    return static_cast<std::size_t>(q);
}

} // namespace detail

// Fixed-step integration grid. All times in months.
struct IntegrationSettings {
    double dt = 0.25;
    double horizon = 132.0;
    double record_every = 1.0;

    std::size_t step_count() const { return detail::integer_ratio(horizon, dt); }
    std::size_t record_stride() const { return detail::integer_ratio(record_every, dt); }

    void validate() const {
        if (!(dt > 0.0)) throw ValidationError("settings.dt: must be strictly positive");
        if (!(horizon > 0.0)) throw ValidationError("settings.horizon: must be strictly positive");
        if (!(record_every > 0.0)) {
            throw ValidationError("settings.record_every: must be strictly positive");
        }
        if (horizon / dt > 1e9) {
            throw ValidationError("settings: horizon/dt exceeds 1e9 steps (" +
                                  format_double(horizon) + " / " + format_double(dt) + ")");
        }
        if (step_count() == 0) {
            throw ValidationError("settings.horizon: must be an integer multiple of dt (" +
                                  format_double(horizon) + " / " + format_double(dt) + ")");
        }
        if (record_stride() == 0) {
            throw ValidationError("settings.record_every: must be an integer multiple of dt (" +
                                  format_double(record_every) + " / " + format_double(dt) + ")");
        }
        if (step_count() % record_stride() != 0) {
            throw ValidationError("settings.horizon: must be an integer multiple of record_every (" +
                                  format_double(horizon) + " / " + format_double(record_every) + ")");
        }
    }

    friend bool operator==(const IntegrationSettings&, const IntegrationSettings&) = default;
};

// One recorded variable as (t, value) samples on the recording grid.
struct TimeSeries {
    std::string label;
    std::vector<double> times;
    std::vector<double> values;
};

// Everything recorded during one run: a shared, strictly increasing time axis
// plus one column per state and auxiliary variable.
class RunResult {
public:
    RunResult(std::vector<double> times, std::vector<std::string> labels,
              std::vector<std::vector<double>> columns)
        : times_(std::move(times)), labels_(std::move(labels)), columns_(std::move(columns)) {}

    const std::vector<double>& times() const noexcept { return times_; }
    std::span<const std::string> labels() const noexcept { return labels_; }
    std::size_t sample_count() const noexcept { return times_.size(); }

    bool has(std::string_view label) const noexcept {
        for (const auto& l : labels_) {
            if (l == label) return true;
        }
        return false;
    }

    std::span<const double> values(std::string_view label) const {
        return columns_[index_of(label)];
    }

    double final_value(std::string_view label) const { return values(label).back(); }

    TimeSeries series(std::string_view label) const {
        return TimeSeries{std::string(label), times_, columns_[index_of(label)]};
    }

private:
    std::size_t index_of(std::string_view label) const {
        for (std::size_t i = 0; i < labels_.size(); ++i) {
            if (labels_[i] == label) return i;
        }
        throw ValidationError("run result: no recorded variable named '" + std::string(label) + "'");
    }

    std::vector<double> times_;
    std::vector<std::string> labels_;
    std::vector<std::vector<double>> columns_;
};

// A model the integrator can advance: a flat state vector with labeled
// components plus labeled auxiliary outputs. eval() writes the net flow of
// every state component and the auxiliary values at time t.
template <typename S>
concept FlowSystem = requires(const S& sys, double t, std::span<const double> state,
                              std::span<double> flows, std::span<double> aux) {
    { sys.state_size() } -> std::convertible_to<std::size_t>;
    { sys.aux_size() } -> std::convertible_to<std::size_t>;
    { sys.state_labels() } -> std::convertible_to<std::vector<std::string>>;
    { sys.aux_labels() } -> std::convertible_to<std::vector<std::string>>;
    sys.eval(t, state, flows, aux);
};

// Advances the state by explicit Euler, stock(t+dt) = stock(t) + dt*flow(t),
// recording states and auxiliaries every record_every months including t = 0
// and t = horizon. Errors thrown by eval() are rethrown as SimulationError
// with the time at which they occurred.
template <FlowSystem System>
RunResult integrate(const System& system, std::span<const double> initial,
                    const IntegrationSettings& settings) {
    settings.validate();
    if (initial.size() != system.state_size()) {
        throw ValidationError("integrate: initial state has " + std::to_string(initial.size()) +
                              " components, system expects " +
                              std::to_string(system.state_size()));
    }

    const std::size_t steps = settings.step_count();
    const std::size_t stride = settings.record_stride();
    const std::size_t n_state = system.state_size();
    const std::size_t n_aux = system.aux_size();

    std::vector<std::string> labels = system.state_labels();
    {
        std::vector<std::string> aux_labels = system.aux_labels();
        labels.insert(labels.end(), aux_labels.begin(), aux_labels.end());
    }

    std::vector<double> state(initial.begin(), initial.end());
    std::vector<double> flows(n_state, 0.0);
    std::vector<double> aux(n_aux, 0.0);

    std::vector<double> times;
    times.reserve(steps / stride + 1);
    std::vector<std::vector<double>> columns(n_state + n_aux);
    for (auto& c : columns) c.reserve(steps / stride + 1);

    for (std::size_t k = 0; k <= steps; ++k) {
        const double t = static_cast<double>(k) * settings.dt;
        try {
            system.eval(t, state, std::span<double>(flows), std::span<double>(aux));
        } catch (const std::exception& e) {
            throw SimulationError("flow evaluation failed at t = " + format_double(t) +
                                  " months: " + e.what());
        }
        if (k % stride == 0) {
            times.push_back(t);
            for (std::size_t i = 0; i < n_state; ++i) columns[i].push_back(state[i]);
            for (std::size_t j = 0; j < n_aux; ++j) columns[n_state + j].push_back(aux[j]);
        }
        if (k < steps) {
            for (std::size_t i = 0; i < n_state; ++i) state[i] += settings.dt * flows[i];
        }
    }

    return RunResult(std::move(times), std::move(labels), std::move(columns));
}

} // namespace tdsim
