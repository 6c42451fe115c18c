#pragma once

// Inverse design: from target jump operators and rate envelopes, synthesise
// the multichromatic drive
//   H_F(t) = sum_m Omega_m L_m ( e^{i w_m t} + e^{i (w_m + dw_m) t + i phi_m} ) + h.c.
// with well-separated pairs of close frequencies, and predict the realised
// beat-note rates.

#include <cmath>
#include <string>
#include <vector>

#include "floq/floquet_system.hpp"
#include "floq/master_equation.hpp"
#include "floq/matrix.hpp"

namespace floq {

struct JumpTarget {
    Mat jump;         // L_m
    cplx amplitude;   // Omega_m, 1/T0
    double carrier;   // w_m, rad/T0
    double beat;      // dw_m, rad/T0
    double phase;     // phi_m, radians
};

struct DissipationTarget {
    std::vector<JumpTarget> jumps;
    double omega_c = 0.0;  // cutoff the scenario will filter with
};

struct DesignResult {
    FloquetSystem system;
    SpectralScales scales;
    ValidityReport report;
    DissipationTarget target;  // kept for rate extraction
};

// Builds the two-tone-per-jump Floquet system. h0 is the static part the
// caller wants alongside the engineered dissipation (zero by default).
inline DesignResult design(const DissipationTarget& target, Mat h0 = Mat()) {
    if (target.jumps.empty() && h0.dim() == 0)
        throw ValidationError("empty design target needs an explicit H0 dimension");
    const int dim = h0.dim() != 0 ? h0.dim() : target.jumps.front().jump.dim();
    if (h0.dim() == 0) h0 = Mat::zero(dim);

    for (size_t m = 0; m < target.jumps.size(); ++m) {
        const auto& j = target.jumps[m];
        if (!(j.beat > 0.0) || !(j.beat < target.omega_c))
            throw ValidationError("jump " + std::to_string(m) +
                                  ": beat must lie inside (0, omega_c)");
        if (!(j.carrier > target.omega_c))
            throw ValidationError("jump " + std::to_string(m) +
                                  ": carrier must lie above omega_c");
    }
    for (size_t m = 0; m < target.jumps.size(); ++m)
        for (size_t n = m + 1; n < target.jumps.size(); ++n) {
            const double am[2] = {target.jumps[m].carrier,
                                  target.jumps[m].carrier + target.jumps[m].beat};
            const double an[2] = {target.jumps[n].carrier,
                                  target.jumps[n].carrier + target.jumps[n].beat};
            for (double x : am)
                for (double y : an)
                    if (std::abs(x - y) <= target.omega_c)
                        throw PairOverlapError(
                            "frequency pairs of jumps " + std::to_string(m) + " and " +
                            std::to_string(n) + " are separated by less than omega_c");
        }

    std::vector<FloquetTerm> terms;
    for (const auto& j : target.jumps) {
        terms.push_back({j.amplitude * j.jump, j.carrier});
        terms.push_back({(j.amplitude * std::exp(kI * j.phase)) * j.jump, j.carrier + j.beat});
    }

    DesignResult out;
    out.system = make_system(std::move(h0), std::move(terms));
    out.scales = compute_scales(out.system, target.omega_c);
    out.report = validate(out.system, out.scales);
    out.report.findings.push_back(dissipator_hermiticity_probe(out.system, out.scales));
    out.target = target;
    return out;
}

// Closed-form envelope of the engineered rate:
//   gamma_m(t) = -2 |Omega_m|^2 (dw_m / w_m^2) sin(dw_m t + phi_m).
// The prefactor follows the exact pair coefficient of the beat dissipator
// (4 / w_mn- with 1/w_mn- = dw/(2 w_m w_n)), evaluated at w_n -> w_m.
inline double predicted_rate(const DissipationTarget& target, size_t m, double t) {
    const auto& j = target.jumps.at(m);
    const double mag2 = std::norm(j.amplitude);
    return -2.0 * mag2 * j.beat / (j.carrier * j.carrier) * std::sin(j.beat * t + j.phase);
}

// The exact rate the designed pair feeds into the beat dissipator, defined as
// the scalar multiplying (L rho L^dag + L^dag rho L - {{L,L^dag},rho}/2).
inline double realized_rate(const DesignResult& design, size_t m, double t) {
    const auto& j = design.target.jumps.at(m);
    const double wa = j.carrier, wb = j.carrier + j.beat;
    const double inv_pair = 0.5 * (1.0 / wa - 1.0 / wb);
    const double re_product = std::norm(j.amplitude) * std::cos(j.phase);
    return -4.0 * std::sin(j.beat * t) * inv_pair * re_product;
}

}  // namespace floq
