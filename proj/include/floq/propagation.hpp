#pragma once

// Exact unitary propagation under H(t), propagation under slow effective
// Hamiltonians, and interaction-picture transforms.
//
// Both propagators advance the propagator U (not the state), with a classic
// fixed-step 4th-order scheme subdivided below the recording grid. Unitarity
// is monitored and reported, never re-imposed.

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "floq/floquet_system.hpp"
#include "floq/harmonic.hpp"
#include "floq/matrix.hpp"

namespace floq {

struct TimeGrid {
    double t_start = 0.0;
    double dt = 0.0;
    int n_points = 0;

    static TimeGrid over(double t_start, double t_end, double dt) {
        if (!(dt > 0.0)) throw ValidationError("grid step must be positive");
        if (!(t_end > t_start)) throw ValidationError("grid must have t_end > t_start");
        const int n = static_cast<int>(std::llround((t_end - t_start) / dt)) + 1;
        return TimeGrid{t_start, dt, n};
    }

    double time(int i) const { return t_start + dt * i; }
    double t_end() const { return time(n_points - 1); }

    // Nearest grid index for t; requires t to sit on the grid within slop.
    int index_of(double t) const {
        const int i = static_cast<int>(std::llround((t - t_start) / dt));
        if (i < 0 || i >= n_points || std::abs(time(i) - t) > 1e-9)
            throw ValidationError("time does not lie on the grid");
        return i;
    }

    TimeGrid restricted(double lo, double hi) const {
        const int i0 = index_of(lo);
        const int i1 = index_of(hi);
        if (i1 < i0) throw ValidationError("empty grid restriction");
        return TimeGrid{time(i0), dt, i1 - i0 + 1};
    }
};

struct TimeSeries {
    TimeGrid grid;
    std::vector<Mat> values;
    std::string label;

    const Mat& at_time(double t) const { return values[static_cast<size_t>(grid.index_of(t))]; }

    TimeSeries restricted(double lo, double hi) const {
        TimeSeries out;
        out.grid = grid.restricted(lo, hi);
        out.label = label;
        const int i0 = grid.index_of(lo);
        out.values.assign(values.begin() + i0, values.begin() + i0 + out.grid.n_points);
        return out;
    }
};

namespace detail {

// One classic 4th-order step for dM/dt = f(t, M).
template <typename Rhs>
Mat rk4_step(const Rhs& f, double t, double h, const Mat& m) {
    const Mat k1 = f(t, m);
    const Mat k2 = f(t + 0.5 * h, m + (0.5 * h) * k1);
    const Mat k3 = f(t + 0.5 * h, m + (0.5 * h) * k2);
    const Mat k4 = f(t + h, m + h * k3);
    return m + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Integrates dM/dt = f(t, M) from grid.t_start, recording at every grid
// point, taking `substeps` internal steps per grid interval.
template <typename Rhs, typename Observer>
void rk4_record(const Rhs& f, Mat m, const TimeGrid& grid, int substeps, Observer&& observe) {
    if (substeps < 1) throw ValidationError("substeps must be >= 1");
    observe(0, m);
    const double h = grid.dt / substeps;
    for (int i = 1; i < grid.n_points; ++i) {
        const double base = grid.time(i - 1);
        for (int s = 0; s < substeps; ++s) m = rk4_step(f, base + s * h, h, m);
        observe(i, m);
    }
}

}  // namespace detail

struct ExactPropagation {
    TimeSeries rho;             // rho(t) on the recording grid
    double unitarity_defect = 0.0;  // max over grid of ||U^dag U - I||
};

// Evolves dU/dt = -i H(t) U from U(t_start) = I and returns
// rho(t) = U(t) rho0 U(t)^dag. By default rho0 is the state at t_start; an
// anchor time re-gauges the propagator so the state equals rho0 there instead
// (the part of the grid before the anchor becomes back-propagated history,
// which buffered coarse-graining needs).
inline ExactPropagation propagate_exact(const FloquetSystem& sys, const Mat& rho0,
                                        const TimeGrid& grid, int substeps = 50,
                                        double abort_defect = 1e-6,
                                        double anchor_time = std::nan("")) {
    require_density(rho0);
    if (rho0.dim() != sys.h0.dim()) throw ValidationError("rho0 dimension differs from H0");

    const auto rhs = [&sys](double t, const Mat& u) { return (-kI) * (hamiltonian_at(sys, t) * u); };

    ExactPropagation out;
    out.rho.grid = grid;
    out.rho.label = "exact";

    const Mat id = Mat::identity(rho0.dim());
    std::vector<Mat> props(static_cast<size_t>(grid.n_points));
    detail::rk4_record(rhs, id, grid, substeps, [&](int i, const Mat& u) {
        props[static_cast<size_t>(i)] = u;
        const double defect = max_abs(dagger(u) * u - id);
        out.unitarity_defect = std::max(out.unitarity_defect, defect);
    });
    if (out.unitarity_defect > abort_defect)
        throw NumericError(
            "exact propagation lost unitarity (defect " +
            std::to_string(out.unitarity_defect) +
            "); reduce the step, e.g. raise the oversampling factor");

    if (!std::isnan(anchor_time)) {
        const Mat u_ref_dag = dagger(props[static_cast<size_t>(grid.index_of(anchor_time))]);
        for (auto& u : props) u = u * u_ref_dag;
    }
    out.rho.values.reserve(props.size());
    for (const auto& u : props) out.rho.values.push_back(u * rho0 * dagger(u));
    return out;
}

struct EffectivePropagation {
    TimeSeries rho;  // state under the slow generator
    TimeSeries u;    // U_eff(t) with U_eff(t_ref) = I
};

// Propagates the slow generator heff(t): dU/dt = -i H_eff(t) U. The returned
// propagator is re-gauged so that U_eff(t_ref) = I (t_ref defaults to the
// start of the grid); rho0 is the state at t_ref.
inline EffectivePropagation propagate_effective(const HarmonicOp& heff, const Mat& rho0,
                                                const TimeGrid& grid, int substeps = 10,
                                                double t_ref = std::nan("")) {
    const auto rhs = [&heff](double t, const Mat& u) { return (-kI) * (heff.eval(t) * u); };

    EffectivePropagation out;
    out.u.grid = grid;
    out.u.values.resize(static_cast<size_t>(grid.n_points));
    out.u.label = "u_eff";

    const int dim = rho0.dim();
    detail::rk4_record(rhs, Mat::identity(dim), grid, substeps,
                       [&](int i, const Mat& u) { out.u.values[static_cast<size_t>(i)] = u; });

    if (!std::isnan(t_ref)) {
        const Mat u_ref_dag = dagger(out.u.at_time(t_ref));
        for (auto& u : out.u.values) u = u * u_ref_dag;
    }

    out.rho.grid = grid;
    out.rho.label = "effective";
    out.rho.values.reserve(static_cast<size_t>(grid.n_points));
    for (const auto& u : out.u.values) out.rho.values.push_back(u * rho0 * dagger(u));
    return out;
}

// Pointwise rho~ = U_eff^dag rho U_eff on a common grid.
inline TimeSeries to_interaction_picture(const TimeSeries& series, const TimeSeries& ueff) {
    if (series.grid.n_points != ueff.grid.n_points ||
        std::abs(series.grid.t_start - ueff.grid.t_start) > 1e-9 ||
        std::abs(series.grid.dt - ueff.grid.dt) > 1e-12)
        throw ValidationError("interaction picture needs matching grids");
    TimeSeries out;
    out.grid = series.grid;
    out.label = series.label + "_ip";
    out.values.reserve(series.values.size());
    for (size_t i = 0; i < series.values.size(); ++i) {
        const Mat& u = ueff.values[i];
        out.values.push_back(dagger(u) * series.values[i] * u);
    }
    return out;
}

}  // namespace floq
