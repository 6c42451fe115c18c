#pragma once

// The driven system H(t) = H0 + sum_m (V_m e^{i w_m t} + h.c.), its spectral
// scales, and the validity checks that gate the effective description.
//
// Unit conventions: times in T0, energies in 1/T0, every frequency stored in
// rad/T0. Config values quoted in cycles/T0 are converted at parse time.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "floq/matrix.hpp"

namespace floq {

struct FloquetTerm {
    Mat v;           // drive operator, 1/T0
    double omega;    // angular frequency, rad/T0, > 0
};

struct FloquetSystem {
    Mat h0;
    std::vector<FloquetTerm> terms;  // sorted ascending in omega
    double t0 = 0.0;
};

// Validates invariants and returns the system with terms sorted ascending in
// omega, so that m < n implies w_m < w_n downstream.
inline FloquetSystem make_system(Mat h0, std::vector<FloquetTerm> terms, double t0 = 0.0) {
    if (!all_finite(h0)) throw ValidationError("H0 has non-finite entries");
    require_hermitian(h0, "H0");
    for (size_t m = 0; m < terms.size(); ++m) {
        const auto& term = terms[m];
        if (term.v.dim() != h0.dim())
            throw ValidationError("Floquet term " + std::to_string(m) +
                                  " dimension differs from H0");
        if (!all_finite(term.v))
            throw ValidationError("Floquet term " + std::to_string(m) + " has non-finite entries");
        if (!(term.omega > 0.0))
            throw ValidationError("Floquet term " + std::to_string(m) +
                                  " frequency must be positive");
        if (max_abs(term.v) == 0.0)
            throw ValidationError("Floquet term " + std::to_string(m) + " operator is zero");
    }
    std::stable_sort(terms.begin(), terms.end(),
                     [](const FloquetTerm& a, const FloquetTerm& b) { return a.omega < b.omega; });
    return FloquetSystem{std::move(h0), std::move(terms), t0};
}

// H0 + sum_m (V_m e^{i w_m t} + V_m^dag e^{-i w_m t}); Hermitian by construction.
inline Mat hamiltonian_at(const FloquetSystem& sys, double t) {
    Mat h = sys.h0;
    for (const auto& term : sys.terms) {
        const cplx phase = std::exp(kI * (term.omega * t));
        h += term.v * phase + dagger(term.v) * std::conj(phase);
    }
    return h;
}

struct SpectralScales {
    double Omega = 0.0;      // max of ||H0|| and all ||V_m||, 1/T0
    double omega_min = 0.0;  // smallest drive frequency, rad/T0
    double epsilon = 0.0;    // Omega / omega_min
    double omega_c = 0.0;    // coarse-graining cutoff, rad/T0
    double max_beat = 0.0;   // max |w_m - w_n|, rad/T0

    // 1/w_mn- = (1/w_m - 1/w_n)/2 for a pair of drive frequencies.
    static double pair_scale(double omega_m, double omega_n) {
        const double inv = 0.5 * (1.0 / omega_m - 1.0 / omega_n);
        return 1.0 / inv;
    }
};

inline SpectralScales compute_scales(const FloquetSystem& sys, double omega_c) {
    if (!(omega_c > 0.0)) throw ValidationError("omega_c must be positive");
    SpectralScales s;
    s.omega_c = omega_c;
    s.Omega = spectral_norm(sys.h0);
    for (const auto& term : sys.terms) s.Omega = std::max(s.Omega, spectral_norm(term.v));
    if (!sys.terms.empty()) {
        s.omega_min = sys.terms.front().omega;
        s.max_beat = sys.terms.back().omega - sys.terms.front().omega;
        s.epsilon = s.Omega / s.omega_min;
    }
    return s;
}

enum class FindingLevel { pass, warn, fail };

struct Finding {
    FindingLevel level = FindingLevel::pass;
    std::string code;
    std::string message;
};

struct ValidityReport {
    std::vector<Finding> findings;

    bool ok() const {
        return std::none_of(findings.begin(), findings.end(),
                            [](const Finding& f) { return f.level == FindingLevel::fail; });
    }
    bool clean() const {
        return std::all_of(findings.begin(), findings.end(),
                           [](const Finding& f) { return f.level == FindingLevel::pass; });
    }
};

namespace detail {
inline std::string fmt_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", x);
    return buf;
}
}  // namespace detail

// Checks (a) epsilon below threshold, (b) beats inside the cutoff, (c) cutoff
// below the drive band, (d) H0 transition frequencies inside the cutoff.
// The dissipator Hermiticity probe lives with the master-equation code and is
// merged in by the scenario layer.
inline ValidityReport validate(const FloquetSystem& sys, const SpectralScales& scales,
                               double epsilon_threshold = 0.4) {
    ValidityReport rep;
    auto add = [&rep](FindingLevel level, std::string code, std::string message) {
        rep.findings.push_back({level, std::move(code), std::move(message)});
    };

    if (sys.terms.empty()) {
        add(FindingLevel::pass, "epsilon", "drive-free system");
        return rep;
    }

    if (scales.epsilon <= epsilon_threshold)
        add(FindingLevel::pass, "epsilon",
            "epsilon = " + detail::fmt_double(scales.epsilon) + " <= " +
                detail::fmt_double(epsilon_threshold));
    else
        add(FindingLevel::warn, "epsilon",
            "epsilon = " + detail::fmt_double(scales.epsilon) +
                " exceeds threshold " + detail::fmt_double(epsilon_threshold) +
                "; second-order accuracy is doubtful");

    if (scales.max_beat < scales.omega_c)
        add(FindingLevel::pass, "beat_in_band",
            "max beat " + detail::fmt_double(scales.max_beat) + " < omega_c " +
                detail::fmt_double(scales.omega_c));
    else
        add(FindingLevel::fail, "beat_in_band",
            "beat " + detail::fmt_double(scales.max_beat) +
                " rad/T0 does not pass the low-pass filter (omega_c = " +
                detail::fmt_double(scales.omega_c) + ")");

    if (scales.omega_c < scales.omega_min)
        add(FindingLevel::pass, "cutoff_below_drive",
            "omega_c " + detail::fmt_double(scales.omega_c) + " < omega_min " +
                detail::fmt_double(scales.omega_min));
    else
        add(FindingLevel::fail, "cutoff_below_drive",
            "cutoff does not separate the drive band: omega_c = " +
                detail::fmt_double(scales.omega_c) + " >= omega_min = " +
                detail::fmt_double(scales.omega_min));

    const auto ev = hermitian_eigenvalues(sys.h0);
    const double spread = ev.empty() ? 0.0 : ev.back() - ev.front();
    if (spread < scales.omega_c)
        add(FindingLevel::pass, "h0_in_band",
            "H0 eigenfrequency spread " + detail::fmt_double(spread) + " < omega_c");
    else
        add(FindingLevel::warn, "h0_in_band",
            "H0 eigenfrequency spread " + detail::fmt_double(spread) +
                " is not left invariant by the filter (omega_c = " +
                detail::fmt_double(scales.omega_c) + ")");

    return rep;
}

}  // namespace floq
