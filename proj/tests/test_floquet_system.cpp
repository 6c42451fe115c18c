#include "doctest.h"

#include <cmath>

#include "floq/floquet_system.hpp"
#include "test_util.hpp"

using namespace floq;
using floqtest::Rng;

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Two sigma_z tones in opposite phase, strong drive.
FloquetSystem phase_noise_system() {
    const double w1 = std::sqrt(10.0) * kTwoPi;
    const double w2 = w1 + 0.025 * kTwoPi;
    return make_system(M_PI * pauli_z(),
                       {{7.0 * pauli_z(), w1}, {-7.0 * pauli_z(), w2}});
}

// Two sigma_+ tones, sigma_x static part.
FloquetSystem emission_system() {
    const double w1 = std::sqrt(10.0) * kTwoPi;
    const double w2 = w1 + 0.025 * kTwoPi;
    return make_system(0.25 * kTwoPi * pauli_x(),
                       {{2.0 * sigma_plus(), w1}, {2.0 * sigma_plus(), w2}});
}

}  // namespace

TEST_CASE("hamiltonian_at") {
    // No drive: H(t) = H0 at every t.
    const Mat h0 = 1.3 * pauli_z();
    const auto free_sys = make_system(h0, {});
    for (double t : {0.0, 0.37, 12.0})
        CHECK(floqtest::mat_dist(hamiltonian_at(free_sys, t), h0) < 1e-15);

    // Opposite-phase amplitudes cancel at t = 0 and leave H0.
    const auto pn = phase_noise_system();
    CHECK(floqtest::mat_dist(hamiltonian_at(pn, 0.0), M_PI * pauli_z()) < 1e-12);

    // Entrywise complex-exponential oracle on the sigma_+ system:
    // H(t) = w0 sx + sum_m Omega (cos(w t) sx - sin(w t) sy).
    const auto em = emission_system();
    Rng rng(201);
    for (int rep = 0; rep < 20; ++rep) {
        const double t = rng.uniform(0.0, 50.0);
        Mat expect = 0.25 * kTwoPi * pauli_x();
        for (const auto& term : em.terms)
            expect += 2.0 * (std::cos(term.omega * t) * pauli_x() -
                             std::sin(term.omega * t) * pauli_y());
        CHECK(floqtest::mat_dist(hamiltonian_at(em, t), expect) < 1e-12);
    }
}

TEST_CASE("hamiltonian_at properties") {
    Rng rng(202);
    for (int rep = 0; rep < 15; ++rep) {
        std::vector<FloquetTerm> terms;
        const int m = 1 + static_cast<int>(rng.next_u64() % 3);
        for (int k = 0; k < m; ++k)
            terms.push_back({floqtest::random_matrix(rng), rng.uniform(10.0, 40.0)});
        const auto sys = make_system(floqtest::random_hermitian(rng), terms);
        const double t = rng.uniform(-10.0, 10.0);
        const Mat h = hamiltonian_at(sys, t);
        CHECK(hermitian_defect(h) < 1e-12 * std::max(1.0, max_abs(h)));
    }

    // Monochromatic periodicity.
    const double w = 17.0;
    const auto sys = make_system(0.4 * pauli_z(), {{0.9 * sigma_plus(), w}});
    for (int rep = 0; rep < 10; ++rep) {
        const double t = rng.uniform(0.0, 5.0);
        const Mat a = hamiltonian_at(sys, t);
        const Mat b = hamiltonian_at(sys, t + kTwoPi / w);
        CHECK(floqtest::mat_dist(a, b) < 1e-12 * std::max(1.0, max_abs(a)));
    }
}

TEST_CASE("compute_scales") {
    const double wc = 2.0 * kTwoPi;

    const auto pn = phase_noise_system();
    const auto s2 = compute_scales(pn, wc);
    CHECK(s2.epsilon == doctest::Approx(7.0 / (std::sqrt(10.0) * kTwoPi)).epsilon(1e-12));
    CHECK(s2.epsilon == doctest::Approx(0.352).epsilon(2e-3));  // the quoted 0.35
    CHECK(s2.max_beat == doctest::Approx(0.025 * kTwoPi).epsilon(1e-12));

    const auto em = emission_system();
    const auto s3 = compute_scales(em, wc);
    CHECK(s3.Omega == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(s3.epsilon == doctest::Approx(0.10066).epsilon(1e-3));

    const auto single = make_system(pauli_z(), {{pauli_z(), 100.0}});
    const auto s1 = compute_scales(single, 10.0);
    CHECK(s1.Omega == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s1.epsilon == doctest::Approx(0.01).epsilon(1e-12));

    // Invariance under input ordering.
    const auto swapped = make_system(
        M_PI * pauli_z(),
        {{-7.0 * pauli_z(), std::sqrt(10.0) * kTwoPi + 0.025 * kTwoPi},
         {7.0 * pauli_z(), std::sqrt(10.0) * kTwoPi}});
    const auto ss = compute_scales(swapped, wc);
    CHECK(ss.epsilon == doctest::Approx(s2.epsilon).epsilon(1e-14));
    CHECK(ss.omega_min == doctest::Approx(s2.omega_min).epsilon(1e-14));
    CHECK(swapped.terms.front().omega < swapped.terms.back().omega);
}

TEST_CASE("pair scale") {
    const double w1 = 10.0, w2 = 11.0;
    CHECK(SpectralScales::pair_scale(w1, w2) == doctest::Approx(220.0).epsilon(1e-12));
}

TEST_CASE("validate") {
    const double wc = 2.0 * kTwoPi;

    // sigma_x bichromatic drive on a weak sigma_z splitting: everything passes.
    const double w1 = 4.0 * kTwoPi;
    const auto fig1_like =
        make_system(0.1 * kTwoPi * pauli_z(),
                    {{2.0 * pauli_x(), w1}, {2.0 * pauli_x(), w1 + 0.025 * kTwoPi}});
    const auto rep1 = validate(fig1_like, compute_scales(fig1_like, wc));
    CHECK(rep1.clean());

    // Beat larger than the cutoff: hard failure.
    const auto wide = make_system(0.1 * kTwoPi * pauli_z(),
                                  {{2.0 * pauli_x(), w1}, {2.0 * pauli_x(), w1 + 3.0 * wc}});
    const auto rep2 = validate(wide, compute_scales(wide, wc));
    CHECK_FALSE(rep2.ok());

    // Large epsilon is only a warning.
    const auto strong = make_system(0.1 * pauli_z(),
                                    {{9.0 * pauli_x(), 10.0}, {9.0 * pauli_x(), 10.1}});
    const auto rep3 = validate(strong, compute_scales(strong, 1.0));
    CHECK(rep3.ok());
    CHECK_FALSE(rep3.clean());

    CHECK_THROWS_AS((void)make_system(pauli_z(), {{pauli_x(), -3.0}}), ValidationError);
    CHECK_THROWS_AS((void)make_system(pauli_z(), {{Mat::zero(2), 3.0}}), ValidationError);
}
