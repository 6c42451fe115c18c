#pragma once

// The effective master equation for the coarse-grained state:
//
//   d rho/dt = -i [H_eff(t), rho] + L2_FF[rho] + L2_FSF[rho] (+ L3[rho])
//
// L2_FF couples pairs of Floquet tones whose beat passes the filter and is
// built from the bilinear dissipator D[V,V'][rho] = {{V,V'},rho}/2 - V rho V'
// - V' rho V. L2_FSF adds the slow-fast-slow interplay terms proportional to
// [V_m, H0]. L3 is the extra non-unitary term available for the
// sigma_z / sigma_x drive family.

#include <cmath>
#include <string>
#include <vector>

#include "floq/floquet_system.hpp"
#include "floq/harmonic.hpp"
#include "floq/matrix.hpp"
#include "floq/propagation.hpp"

namespace floq {

struct DissipatorConfig {
    bool include_fsf = true;
    bool include_l3 = false;  // sigma_z / sigma_x drive family only
    bool hermitize = true;
    int heff_order = 2;  // 0..2
};

enum class LindbladKind { phase, emission, absorption };

// Named single-channel Lindbladians used by the examples and tests:
// phase -> sigma_z; emission -> sigma_-/sigma_+; absorption -> sigma_+/sigma_-.
inline Mat named_lindbladian(LindbladKind kind, const Mat& rho) {
    switch (kind) {
        case LindbladKind::phase: {
            const Mat sz = pauli_z();
            return sz * rho * sz - 0.5 * anticommutator(sz * sz, rho);
        }
        case LindbladKind::emission: {
            const Mat sm = sigma_minus(), sp = sigma_plus();
            return sm * rho * sp - 0.5 * anticommutator(sm * sp, rho);
        }
        case LindbladKind::absorption: {
            const Mat sp = sigma_plus(), sm = sigma_minus();
            return sp * rho * sm - 0.5 * anticommutator(sp * sm, rho);
        }
    }
    throw ValidationError("unknown lindbladian kind");
}

// D[V,V'][rho]: bilinear, symmetric in (V, V'), traceless.
inline Mat dissipator_D(const Mat& v, const Mat& vp, const Mat& rho) {
    return 0.5 * anticommutator(anticommutator(v, vp), rho) - v * rho * vp - vp * rho * v;
}

inline Mat hermitian_part(const Mat& m) { return 0.5 * (m + dagger(m)); }

// Pairwise beat dissipator: sum over m < n with |w_n - w_m| below the cutoff
// of 4 sin(dw t)/w_mn- times D[V_m^dag, V_n].
inline Mat l2_ff(const FloquetSystem& sys, const SpectralScales& scales, double t,
                 const Mat& rho, bool hermitize = true) {
    Mat acc(rho.dim());
    const auto& terms = sys.terms;
    for (size_t m = 0; m < terms.size(); ++m)
        for (size_t n = m + 1; n < terms.size(); ++n) {
            const double dw = terms[n].omega - terms[m].omega;
            if (std::abs(dw) >= scales.omega_c) continue;
            // 4 sin(dw t)/w_mn- written as a product; equal frequencies give 0.
            const double coeff = 4.0 * std::sin(dw * t) * 0.5 *
                                 (1.0 / terms[m].omega - 1.0 / terms[n].omega);
            if (coeff == 0.0) continue;
            acc += coeff * dissipator_D(dagger(terms[m].v), terms[n].v, rho);
        }
    return hermitize ? hermitian_part(acc) : acc;
}

// Slow-fast interplay dissipator: i sum over pairs with a passing beat of
// e^{i(w_m - w_n)t} [ D[V_m,[V_n^dag,H0]]/w_n^2 + D[V_n^dag,[V_m,H0]]/w_m^2 ].
inline Mat l2_fsf(const FloquetSystem& sys, const SpectralScales& scales, double t,
                  const Mat& rho, bool hermitize = true) {
    Mat acc(rho.dim());
    const auto& terms = sys.terms;
    for (size_t m = 0; m < terms.size(); ++m)
        for (size_t n = 0; n < terms.size(); ++n) {
            const double dw = terms[m].omega - terms[n].omega;
            if (std::abs(dw) >= scales.omega_c) continue;
            const Mat inner_n = commutator(dagger(terms[n].v), sys.h0);
            const Mat inner_m = commutator(terms[m].v, sys.h0);
            const Mat block =
                (1.0 / (terms[n].omega * terms[n].omega)) *
                    dissipator_D(terms[m].v, inner_n, rho) +
                (1.0 / (terms[m].omega * terms[m].omega)) *
                    dissipator_D(dagger(terms[n].v), inner_m, rho);
            acc += (kI * std::exp(kI * (dw * t))) * block;
        }
    return hermitize ? hermitian_part(acc) : acc;
}

// Structural gate for the extra third-order term: H0 proportional to sigma_z,
// every drive operator proportional to sigma_x with a real amplitude, two tones.
inline bool sigma_xz_structure(const FloquetSystem& sys) {
    if (sys.h0.dim() != 2 || sys.terms.size() != 2) return false;
    const auto h = pauli_components(sys.h0);
    const double hs = std::max(max_abs(sys.h0), 1e-300);
    if (std::abs(h[0]) > 1e-12 * hs || std::abs(h[1]) > 1e-12 * hs ||
        std::abs(h[2]) > 1e-12 * hs)
        return false;
    if (std::abs(h[3].imag()) > 1e-12 * hs) return false;
    for (const auto& term : sys.terms) {
        const auto c = pauli_components(term.v);
        const double vs = std::max(max_abs(term.v), 1e-300);
        if (std::abs(c[0]) > 1e-12 * vs || std::abs(c[2]) > 1e-12 * vs ||
            std::abs(c[3]) > 1e-12 * vs)
            return false;
        if (std::abs(c[1].imag()) > 1e-12 * vs) return false;
    }
    return true;
}

// 16 w0^2 O1 O2 (1/w1^3 - 1/w2^3) sin(dw21 t) (rho - sx rho sx).
inline Mat l3_sigma_xz(const FloquetSystem& sys, const SpectralScales& scales, double t,
                       const Mat& rho) {
    if (!sigma_xz_structure(sys))
        throw ValidationError("l3 term needs H0 ~ sigma_z with sigma_x drives");
    (void)scales;
    const double w0 = pauli_components(sys.h0)[3].real();
    const double o1 = pauli_components(sys.terms[0].v)[1].real();
    const double o2 = pauli_components(sys.terms[1].v)[1].real();
    const double w1 = sys.terms[0].omega, w2 = sys.terms[1].omega;
    const double coeff = 16.0 * w0 * w0 * o1 * o2 *
                         (1.0 / (w1 * w1 * w1) - 1.0 / (w2 * w2 * w2)) *
                         std::sin((w2 - w1) * t);
    const Mat sx = pauli_x();
    return coeff * (rho - sx * rho * sx);
}

// Right-hand side of the effective master equation.
inline Mat me_rhs(const FloquetSystem& sys, const SpectralScales& scales,
                  const KickExpansion& exp, const DissipatorConfig& cfg, double t,
                  const Mat& rho) {
    const Mat heff = exp.heff_truncated(cfg.heff_order).eval(t);
    Mat rhs = (-kI) * commutator(heff, rho);
    rhs += l2_ff(sys, scales, t, rho, cfg.hermitize);
    if (cfg.include_fsf) rhs += l2_fsf(sys, scales, t, rho, cfg.hermitize);
    if (cfg.include_l3) rhs += l3_sigma_xz(sys, scales, t, rho);
    return rhs;
}

struct MeDiagnostics {
    double max_trace_dev = 0.0;
    double max_hermiticity_defect = 0.0;
    double min_eigenvalue = 1.0;
    std::vector<std::pair<double, double>> dips;  // (t, eigenvalue) below -1e-3
};

struct MeIntegration {
    TimeSeries rho;
    MeDiagnostics diag;
};

// Fixed-step 4th-order integration of the effective equation. Trace and
// Hermiticity are monitored; eigenvalues may dip slightly negative (the
// second-order generator is not completely positive) -- dips are recorded and
// only an excursion beyond -abort_dip aborts.
inline MeIntegration integrate_me(const FloquetSystem& sys, const SpectralScales& scales,
                                  const KickExpansion& exp, const DissipatorConfig& cfg,
                                  const Mat& rho_bar0, const TimeGrid& grid_slow,
                                  int substeps = 8, double dip_report = 1e-3,
                                  double abort_dip = 1e-2) {
    require_density(rho_bar0);
    const auto rhs = [&](double t, const Mat& rho) {
        return me_rhs(sys, scales, exp, cfg, t, rho);
    };

    MeIntegration out;
    out.rho.grid = grid_slow;
    out.rho.values.resize(static_cast<size_t>(grid_slow.n_points));
    out.rho.label = "me";

    detail::rk4_record(rhs, rho_bar0, grid_slow, substeps, [&](int i, const Mat& rho) {
        out.rho.values[static_cast<size_t>(i)] = rho;
        out.diag.max_trace_dev =
            std::max(out.diag.max_trace_dev, std::abs(trace(rho) - cplx{1.0, 0.0}));
        out.diag.max_hermiticity_defect =
            std::max(out.diag.max_hermiticity_defect, hermitian_defect(rho));
        const auto ev = hermitian_eigenvalues(rho);
        out.diag.min_eigenvalue = std::min(out.diag.min_eigenvalue, ev.front());
        if (ev.front() < -dip_report)
            out.diag.dips.emplace_back(grid_slow.time(i), ev.front());
        if (ev.front() < -abort_dip)
            throw NumericError("state eigenvalue dipped to " + std::to_string(ev.front()) +
                               " at t = " + std::to_string(grid_slow.time(i)) +
                               "; the effective description is out of its validity range");
    });
    return out;
}

// Hermiticity-preservation probe of the assembled dissipators, merged into
// validation reports by the scenario layer.
inline Finding dissipator_hermiticity_probe(const FloquetSystem& sys,
                                            const SpectralScales& scales) {
    Mat probe(sys.h0.dim());
    for (int i = 0; i < probe.dim(); ++i)
        for (int j = 0; j < probe.dim(); ++j)
            probe(i, j) = cplx{std::cos(1.7 * (i + 1) * (j + 2)), std::sin(0.9 * (i - j))};
    const Mat rho = hermitian_part(probe);

    double worst = 0.0;
    for (double t : {0.0, 1.3, 7.9, 23.0}) {
        const Mat raw = l2_ff(sys, scales, t, rho, /*hermitize=*/false) +
                        l2_fsf(sys, scales, t, rho, /*hermitize=*/false);
        const double scale = std::max(max_abs(raw), 1e-300);
        worst = std::max(worst, hermitian_defect(raw) / scale);
    }
    if (worst > 1e-9)
        return {FindingLevel::warn, "dissipator_hermiticity",
                "raw dissipators are not Hermiticity-preserving for this system "
                "(relative defect " +
                    detail::fmt_double(worst) + "); the Hermitian-part projection is active"};
    return {FindingLevel::pass, "dissipator_hermiticity",
            "dissipators preserve Hermiticity (relative defect " + detail::fmt_double(worst) +
                ")"};
}

}  // namespace floq
