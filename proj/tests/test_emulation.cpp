#include "doctest.h"

#include <cmath>

#include "floq/emulation.hpp"
#include "test_util.hpp"

using namespace floq;
using floqtest::Rng;

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
const double kW1 = std::sqrt(10.0) * kTwoPi;
const double kD21 = 0.025 * kTwoPi;
const double kWc = 2.0 * kTwoPi;

}  // namespace

TEST_CASE("design") {
    // Single sigma_z jump with phi = pi reproduces the opposite-phase
    // two-tone dephasing drive (Omega_2 = -Omega_1).
    DissipationTarget target;
    target.omega_c = kWc;
    target.jumps.push_back({pauli_z(), cplx{7.0, 0.0}, kW1, kD21, M_PI});
    const auto res = design(target, M_PI * pauli_z());

    REQUIRE(res.system.terms.size() == 2);
    CHECK(res.system.terms[0].omega == doctest::Approx(kW1));
    CHECK(res.system.terms[1].omega == doctest::Approx(kW1 + kD21));
    CHECK(floqtest::mat_dist(res.system.terms[0].v, 7.0 * pauli_z()) < 1e-13);
    CHECK(floqtest::mat_dist(res.system.terms[1].v, -7.0 * pauli_z()) < 1e-12);
    CHECK(res.report.ok());

    // Empty target: drive-free system.
    const auto empty = design(DissipationTarget{{}, kWc}, 0.3 * pauli_x());
    CHECK(empty.system.terms.empty());

    // Overlapping carrier pairs are rejected.
    DissipationTarget overlap;
    overlap.omega_c = kWc;
    overlap.jumps.push_back({pauli_z(), cplx{1.0, 0.0}, kW1, kD21, 0.0});
    overlap.jumps.push_back({sigma_plus(), cplx{1.0, 0.0}, kW1 + 0.5 * kWc, kD21, 0.0});
    CHECK_THROWS_AS((void)design(overlap), PairOverlapError);

    // Beat must fit under the cutoff.
    DissipationTarget fat;
    fat.omega_c = kWc;
    fat.jumps.push_back({pauli_z(), cplx{1.0, 0.0}, kW1, 2.0 * kWc, 0.0});
    CHECK_THROWS_AS((void)design(fat), ValidationError);
}

TEST_CASE("predicted and realized rates") {
    DissipationTarget target;
    target.omega_c = kWc;
    target.jumps.push_back({pauli_z(), cplx{0.0, 0.0}, kW1, kD21, 0.4});
    // Zero amplitude: zero rate at all times.
    for (double t : {0.0, 3.0, 17.0}) CHECK(predicted_rate(target, 0, t) == 0.0);

    target.jumps[0].amplitude = cplx{2.0, 0.0};
    // Sine zero of the predicted envelope.
    const double tz = -0.4 / kD21;
    CHECK(std::abs(predicted_rate(target, 0, tz)) < 1e-14);

    // Peak magnitude arithmetic: 2 |Omega|^2 dw / w^2.
    target.jumps[0].phase = 0.0;
    const double tpeak = 0.25 * kTwoPi / kD21;
    const double peak = 2.0 * 4.0 * kD21 / (kW1 * kW1);
    CHECK(std::abs(predicted_rate(target, 0, tpeak)) ==
          doctest::Approx(peak).epsilon(1e-12));

    // Narrow beat: realized and predicted agree to O(dw/w).
    DissipationTarget narrow;
    narrow.omega_c = kWc;
    const double dw = 1e-3 * kW1;
    narrow.jumps.push_back({pauli_z(), cplx{2.0, 0.0}, kW1, dw, 0.0});
    const auto res = design(narrow, M_PI * pauli_z());
    const double tp = 0.25 * kTwoPi / dw;
    const double r = realized_rate(res, 0, tp);
    const double p = predicted_rate(narrow, 0, tp);
    CHECK(std::abs(r - p) / std::abs(r) <= 1e-2);

    // dw -> 0: both vanish.
    DissipationTarget still = narrow;
    still.jumps[0].beat = 1e-300;
    CHECK(std::abs(predicted_rate(still, 0, 1.0)) < 1e-250);

    // phi -> phi + pi flips both signs.
    DissipationTarget flipped = narrow;
    flipped.jumps[0].phase = M_PI;
    const auto resf = design(flipped, M_PI * pauli_z());
    CHECK(realized_rate(resf, 0, tp) == doctest::Approx(-r).epsilon(1e-12));
    CHECK(predicted_rate(flipped, 0, tp) == doctest::Approx(-p).epsilon(1e-12));
}

TEST_CASE("designed system feeds the beat dissipator with the realized rate") {
    Rng rng(601);

    // Two well-separated jumps; each pair must appear in l2_ff as the
    // realized rate times the symmetric jump dissipator, with no cross talk.
    DissipationTarget target;
    target.omega_c = kWc;
    target.jumps.push_back({pauli_z(), cplx{3.0, 0.0}, kW1, kD21, 0.0});
    target.jumps.push_back({sigma_plus(), cplx{2.0, 0.0}, 3.0 * kW1, 2.0 * kD21, M_PI});
    const auto res = design(target, 0.2 * pauli_z());

    for (int rep = 0; rep < 10; ++rep) {
        const double t = rng.uniform(0.0, 200.0);
        const Mat rho = floqtest::random_hermitian(rng);
        Mat expect(2);
        for (size_t m = 0; m < target.jumps.size(); ++m) {
            const Mat& L = target.jumps[m].jump;
            const Mat sym = L * rho * dagger(L) + dagger(L) * rho * L -
                            0.5 * anticommutator(anticommutator(L, dagger(L)), rho);
            expect += realized_rate(res, m, t) * sym;
        }
        const Mat got = l2_ff(res.system, res.scales, t, rho);
        CHECK(floqtest::mat_dist(got, expect) < 1e-12 * std::max(1.0, max_abs(got)));
    }
}
