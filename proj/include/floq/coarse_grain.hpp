#pragma once

// Time coarse-graining of sampled trajectories by convolution with the
// cardinal-sine kernel f(t) = sin(omega_c t)/(pi t), truncated at +-W, and the
// dressed initial condition for the effective master equation.

#include <cmath>
#include <string>
#include <vector>

#include "floq/harmonic.hpp"
#include "floq/matrix.hpp"
#include "floq/propagation.hpp"

namespace floq {

struct FilterSpec {
    double omega_c = 0.0;    // cutoff, rad/T0
    double half_width = 0.0; // truncation W, T0
    int quad_stride = 1;     // quadrature step as a multiple of the series dt

    // Default truncation: 20 kernel zero-crossings per side.
    static FilterSpec for_cutoff(double omega_c, double half_width = 0.0, int quad_stride = 1) {
        if (!(omega_c > 0.0)) throw ValidationError("filter omega_c must be positive");
        FilterSpec s;
        s.omega_c = omega_c;
        s.half_width = half_width > 0.0 ? half_width : 40.0 * M_PI / omega_c;
        s.quad_stride = quad_stride;
        if (s.half_width < 10.0 * (2.0 * M_PI / omega_c))
            throw ValidationError("filter half width below 10 kernel periods");
        if (s.quad_stride < 1) throw ValidationError("filter quad_stride must be >= 1");
        return s;
    }
};

inline double sinc_kernel(double omega_c, double t) {
    if (std::abs(t) < 1e-300) return omega_c / M_PI;
    return std::sin(omega_c * t) / (M_PI * t);
}

namespace detail {

// Trapezoid weights over the truncated kernel, step q = stride * dt.
struct KernelTaps {
    std::vector<double> w;  // w[k + K] multiplies x[i + k*stride]
    int half_taps = 0;
    int stride = 1;

    static KernelTaps build(const FilterSpec& spec, double dt) {
        KernelTaps taps;
        taps.stride = spec.quad_stride;
        const double q = dt * spec.quad_stride;
        taps.half_taps = static_cast<int>(std::floor(spec.half_width / q + 1e-9));
        if (taps.half_taps < 1) throw ValidationError("filter has no quadrature points");
        taps.w.resize(2 * taps.half_taps + 1);
        for (int k = -taps.half_taps; k <= taps.half_taps; ++k) {
            double w = q * sinc_kernel(spec.omega_c, k * q);
            if (k == -taps.half_taps || k == taps.half_taps) w *= 0.5;
            taps.w[static_cast<size_t>(k + taps.half_taps)] = w;
        }
        return taps;
    }

    double dc_gain() const {
        double g = 0.0;
        for (double x : w) g += x;
        return g;
    }
};

}  // namespace detail

// Entrywise discrete convolution with the truncated sinc. The output is
// restricted to the part of the grid with a full +-W buffer of input.
inline TimeSeries sinc_convolve(const TimeSeries& series, const FilterSpec& spec) {
    const auto taps = detail::KernelTaps::build(spec, series.grid.dt);
    const int reach = taps.half_taps * taps.stride;
    if (series.grid.n_points <= 2 * reach)
        throw InsufficientBufferError(
            "series does not extend a filter half-width beyond the output window");

    TimeSeries out;
    out.grid = TimeGrid{series.grid.time(reach), series.grid.dt,
                        series.grid.n_points - 2 * reach};
    out.label = series.label + "_tcg";
    out.values.reserve(static_cast<size_t>(out.grid.n_points));

    const int dim = series.values.front().dim();
    for (int i = reach; i < series.grid.n_points - reach; ++i) {
        Mat acc(dim);
        for (int k = -taps.half_taps; k <= taps.half_taps; ++k) {
            const double w = taps.w[static_cast<size_t>(k + taps.half_taps)];
            const Mat& x = series.values[static_cast<size_t>(i + k * taps.stride)];
            for (int r = 0; r < dim; ++r)
                for (int c = 0; c < dim; ++c) acc(r, c) += w * x(r, c);
        }
        out.values.push_back(std::move(acc));
    }
    return out;
}

inline double filter_dc_gain(const FilterSpec& spec, double dt) {
    return detail::KernelTaps::build(spec, dt).dc_gain();
}

struct DressedInitialCondition {
    Mat rho;                    // state handed to the master-equation solver
    double projection = 0.0;    // total clipped negative weight
    double raw_trace_dev = 0.0; // |tr - 1| before renormalisation
};

// The filtered series at t0, then a projection back onto the density-matrix
// cone (clip small negative eigenvalues, renormalise the trace). The filtered
// value already carries the kick dressing of the state that the effective
// equation evolves; `conjugate_kick` additionally wraps it in
// e^{+-i K1(t0)}, which is the identity whenever K1(t0) = 0 (every sine-form
// drive at t0 = 0) but misplaces the dressing for sigma_+- type drives, so it
// is off by default.
inline DressedInitialCondition dressed_initial_condition(const TimeSeries& series, double t0,
                                                         const KickExpansion& exp,
                                                         const FilterSpec& spec,
                                                         double abort_projection = 1e-2,
                                                         bool conjugate_kick = false) {
    const auto taps = detail::KernelTaps::build(spec, series.grid.dt);
    const int reach = taps.half_taps * taps.stride;
    const int i0 = series.grid.index_of(t0);
    if (i0 - reach < 0 || i0 + reach >= series.grid.n_points)
        throw InsufficientBufferError("series does not cover +-W around t0");

    const int dim = series.values.front().dim();
    Mat filtered(dim);
    for (int k = -taps.half_taps; k <= taps.half_taps; ++k) {
        const double w = taps.w[static_cast<size_t>(k + taps.half_taps)];
        const Mat& x = series.values[static_cast<size_t>(i0 + k * taps.stride)];
        for (int r = 0; r < dim; ++r)
            for (int c = 0; c < dim; ++c) filtered(r, c) += w * x(r, c);
    }

    Mat dressed = filtered;
    if (conjugate_kick) {
        const Mat u = matrix_exponential(kI * exp.k(1).eval(t0));
        dressed = u * dressed * dagger(u);
    }
    // The real kernel preserves Hermiticity; tidy rounding residue anyway.
    dressed = 0.5 * (dressed + dagger(dressed));

    DressedInitialCondition out;
    out.raw_trace_dev = std::abs(trace(dressed) - cplx{1.0, 0.0});

    const auto es = hermitian_eigensystem(dressed);
    double clipped = 0.0;
    for (double v : es.values)
        if (v < 0.0) clipped += -v;
    out.projection = clipped;
    if (out.projection > abort_projection)
        throw NumericError("dressed initial condition needed a projection of " +
                           std::to_string(out.projection) +
                           "; filter buffering or sampling is inconsistent");

    Mat rho(dim);
    double tr = 0.0;
    for (int i = 0; i < dim; ++i) tr += std::max(es.values[static_cast<size_t>(i)], 0.0);
    if (tr <= 0.0) throw NumericError("dressed initial condition has no positive weight");
    for (int i = 0; i < dim; ++i) {
        const double v = std::max(es.values[static_cast<size_t>(i)], 0.0) / tr;
        for (int r = 0; r < dim; ++r)
            for (int c = 0; c < dim; ++c)
                rho(r, c) += v * es.vectors(r, i) * std::conj(es.vectors(c, i));
    }
    out.rho = rho;
    return out;
}

}  // namespace floq
