// Acceptance suite: runs every advertised guarantee at its stated tolerance
// and prints one PASS/FAIL line per criterion. Exit code = number of failed
// criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "floq/emulation.hpp"
#include "floq/scenario.hpp"

using namespace floq;

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

int g_failures = 0;

void line(int criterion, bool pass, const std::string& detail) {
    std::printf("criterion %d: %s  %s\n", criterion, pass ? "PASS" : "FAIL", detail.c_str());
    if (!pass) ++g_failures;
}

struct Rng {
    unsigned long long s;
    explicit Rng(unsigned long long seed) : s(seed) {}
    unsigned long long u64() {
        s ^= s << 13;
        s ^= s >> 7;
        s ^= s << 17;
        return s;
    }
    double uniform(double lo, double hi) {
        return lo + (u64() >> 11) * 0x1.0p-53 * (hi - lo);
    }
};

Mat random_hermitian(Rng& rng) {
    Mat m(2);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            m(i, j) = cplx{rng.uniform(-1, 1), rng.uniform(-1, 1)};
    return 0.5 * (m + dagger(m));
}

double comparison_linf(const ComparisonReport& rep, const std::string& b, int row, int col) {
    for (const auto& c : rep.comparisons)
        if (c.b == b && c.row == row && c.col == col) return c.linf;
    throw ValidationError("comparison not found in report: " + b);
}

double si(double x) {
    const double ax = std::abs(x);
    double v;
    if (ax < 25.0) {
        const int n = 4000;
        const double h = ax / n;
        double acc = 0.0;
        for (int k = 0; k <= n; ++k) {
            const double u = k * h;
            const double f = u < 1e-12 ? 1.0 : std::sin(u) / u;
            acc += ((k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0)) * f;
        }
        v = acc * h / 3.0;
    } else {
        const double x2 = ax * ax;
        v = M_PI / 2.0 - std::cos(ax) * (1.0 - 2.0 / x2 + 24.0 / (x2 * x2)) / ax -
            std::sin(ax) * (1.0 - 6.0 / x2 + 120.0 / (x2 * x2)) / x2;
    }
    return x < 0 ? -v : v;
}

double truncated_sinc_gain(double omega_c, double w, double nu) {
    return (si((omega_c + nu) * w) + si((omega_c - nu) * w)) / M_PI;
}

double tone_gain(const FilterSpec& spec, double nu, double dt) {
    TimeSeries s;
    s.grid = TimeGrid::over(0.0, 45.0, dt);
    for (int i = 0; i < s.grid.n_points; ++i) {
        Mat m(1);
        m(0, 0) = std::cos(nu * s.grid.time(i));
        s.values.push_back(m);
    }
    const auto out = sinc_convolve(s, spec);
    double amp = 0.0;
    for (const auto& m : out.values) amp = std::max(amp, std::abs(m(0, 0)));
    return amp;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), f, a, b, c, d);
    return buf;
}

double series_purity_drift(const TimeSeries& s) {
    double worst = 0.0;
    for (const auto& rho : s.values)
        worst = std::max(worst, std::abs(trace(rho * rho) - cplx{1.0, 0.0}));
    return worst;
}

double endpoint_change(const Scenario& base) {
    Scenario doubled = base;
    doubled.grids.exact_substeps *= 2;
    doubled.grids.me_substeps *= 2;
    const auto a = run_scenario(base);
    const auto b = run_scenario(doubled);
    double worst = 0.0;
    for (const auto& [name, sa] : a.series) {
        const auto& sb = b.series.at(name);
        worst = std::max(worst, max_abs(sa.values.back() - sb.values.back()));
    }
    return worst;
}

}  // namespace

int main() {
    std::printf("acceptance suite\n================\n");

    // --- end-to-end preset runs -------------------------------------------
    const auto t0 = std::chrono::steady_clock::now();
    const auto fig2 = run_scenario(preset("fig2"));
    const double fig2_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const auto fig3 = run_scenario(preset("fig3"));
    const auto fig1 = run_scenario(preset("fig1"));
    const auto supp = run_scenario(preset("supp"));

    // 1. Phase-noise end-to-end.
    {
        const double linf = comparison_linf(fig2.report, "me", 0, 1);
        const bool pass = linf <= 0.02 && fig2_seconds < 30.0;
        line(1, pass,
             fmt("fig2 Linf|Re rho_eg(tcg) - Re rho_eg(me)| = %.5f (tol 0.02), runtime %.1f s "
                 "(target < 30)",
                 linf, fig2_seconds));
    }

    // 2. Emission/absorption end-to-end.
    {
        const double l01 = comparison_linf(fig3.report, "me", 0, 1);
        const double l00 = comparison_linf(fig3.report, "me", 0, 0);
        line(2, l01 <= 0.02 && l00 <= 0.02,
             fmt("fig3 Linf re_eg = %.5f, re_ee = %.5f (tol 0.02 each)", l01, l00));
    }

    // 3. slow-fast dissipator ablation on fig1.
    {
        const double full = comparison_linf(fig1.report, "me", 0, 1);
        const double ablated = comparison_linf(fig1.report, "me_nofsf", 0, 1);
        line(3, full <= 0.03 && full < ablated,
             fmt("fig1 Linf full = %.5f (tol 0.03), without slow-fast term = %.5f (must be "
                 "larger)",
                 full, ablated));
    }

    // 4. third-order term on supp.
    {
        const double second = comparison_linf(supp.report, "me", 0, 0);
        const double third = comparison_linf(supp.report, "me_l3", 0, 0);
        line(4, third < second,
             fmt("supp Linf re_ee: 2nd order = %.5f, with l3 = %.5f (must be smaller)", second,
                 third));
    }

    // 5. structural identities.
    {
        bool pass = true;
        std::string detail;
        Rng rng(42);

        // (a) dK1/dt = H_F, central differences, 1e-6 relative.
        double worst_a = 0.0;
        for (const char* name : {"fig1", "fig2", "fig3", "supp"}) {
            const auto s = preset(name);
            const auto scales = compute_scales(s.system, s.filter.omega_c);
            const auto exp = derive_kick_expansion(s.system, scales, 2);
            const auto hf = floquet_harmonic(s.system);
            for (int rep = 0; rep < 50; ++rep) {
                const double t = rng.uniform(0.0, 40.0);
                const double dt = 1e-6;
                const Mat fd = (exp.k(1).eval(t + dt) - exp.k(1).eval(t - dt)) * (0.5 / dt);
                const Mat ref = hf.eval(t);
                worst_a = std::max(worst_a, max_abs(fd - ref) / std::max(1.0, max_abs(ref)));
            }
        }
        if (worst_a > 1e-6) pass = false;
        detail += fmt("dK1/dt rel %.2g; ", worst_a);

        // (b) phase noise: K_{n>=2} = 0 and the slow-fast dissipator vanishes.
        {
            const auto s = preset("fig2");
            const auto scales = compute_scales(s.system, s.filter.omega_c);
            const auto exp = derive_kick_expansion(s.system, scales, 3);
            const bool kicks_vanish = exp.k(2).empty() && exp.k(3).empty();
            double fsf = 0.0;
            for (int rep = 0; rep < 10; ++rep)
                fsf = std::max(fsf, max_abs(l2_fsf(s.system, scales, rng.uniform(0, 80),
                                                   random_hermitian(rng))));
            if (!kicks_vanish || fsf != 0.0) pass = false;
            detail += std::string("phase-noise K2,K3 ") +
                      (kicks_vanish ? "empty" : "NOT empty") + fmt(", |fsf| %.2g; ", fsf);
        }

        // (c) sigma_x config: H_eff_1 = 0 exactly.
        {
            const auto s = preset("fig1");
            const auto exp =
                derive_kick_expansion(s.system, compute_scales(s.system, s.filter.omega_c), 2);
            if (!exp.h(1).empty()) pass = false;
            detail += std::string("fig1 Heff1 ") + (exp.h(1).empty() ? "empty" : "NOT empty") +
                      "; ";
        }

        // (d) H_eff_2 closed forms, 1e-12.
        {
            double worst = 0.0;
            const auto s1 = preset("fig1");
            const auto e1 =
                derive_kick_expansion(s1.system, compute_scales(s1.system, s1.filter.omega_c), 2);
            const double w0a = 0.1 * kTwoPi, oma = 2.0;
            const double w1a = s1.system.terms[0].omega, w2a = s1.system.terms[1].omega;
            const auto s3 = preset("fig3");
            const auto e3 =
                derive_kick_expansion(s3.system, compute_scales(s3.system, s3.filter.omega_c), 2);
            const double w0b = 0.25 * kTwoPi, omb = 2.0;
            const double w1b = s3.system.terms[0].omega, w2b = s3.system.terms[1].omega;
            for (int rep = 0; rep < 25; ++rep) {
                const double t = rng.uniform(0.0, 80.0);
                const double c1 = -8.0 * w0a * oma * oma *
                                  (1.0 / (w1a * w1a) + 1.0 / (w2a * w2a)) *
                                  std::pow(std::cos(0.5 * (w2a - w1a) * t), 2);
                worst = std::max(worst, max_abs(e1.h(2).eval(t) - c1 * pauli_z()));
                const double cx = -2.0 * w0b * omb * omb *
                                  (1.0 / (w1b * w1b) + 1.0 / (w2b * w2b)) *
                                  std::pow(std::cos(0.5 * (w2b - w1b) * t), 2);
                const double cy = w0b * omb * omb * (1.0 / (w1b * w1b) - 1.0 / (w2b * w2b)) *
                                  std::sin((w2b - w1b) * t);
                worst = std::max(worst,
                                 max_abs(e3.h(2).eval(t) - (cx * pauli_x() + cy * pauli_y())));
            }
            if (worst > 1e-12) pass = false;
            detail += fmt("Heff2 closed forms %.2g; ", worst);
        }

        // (e) K3 closed form on the sigma_z/sigma_x family, 1e-10.
        {
            const auto s = preset("supp");
            const auto exp =
                derive_kick_expansion(s.system, compute_scales(s.system, s.filter.omega_c), 3);
            const double w0 = 0.5 * kTwoPi, om = 1.75;
            const double ws[2] = {s.system.terms[0].omega, s.system.terms[1].omega};
            double worst = 0.0;
            for (int rep = 0; rep < 20; ++rep) {
                const double t = rng.uniform(0.0, 80.0);
                Mat expect(2);
                for (double w : ws)
                    expect += (8.0 * w0 * w0 * om / (w * w * w)) * std::sin(w * t) * pauli_x();
                for (double wm : ws)
                    for (double wn : ws)
                        expect += (-4.0 * w0 * om * om / (wm * wm * (wm + wn))) *
                                  std::sin((wm + wn) * t) * pauli_z();
                worst = std::max(worst, max_abs(exp.k(3).eval(t) - expect));
            }
            if (worst > 1e-10) pass = false;
            detail += fmt("K3 closed form %.2g; ", worst);
        }

        // (f) claimed 4th-order cancellation dE4c = d(E2 o E2) at 1e-10.
        {
            const auto s = preset("fig2");
            const double wc = s.filter.omega_c;
            const auto exp =
                derive_kick_expansion(s.system, compute_scales(s.system, wc), 2);
            double worst = 0.0, worst_quarter = 0.0;
            for (int rep = 0; rep < 100; ++rep) {
                const Mat rho = random_hermitian(rng);
                const double t = rng.uniform(0.0, 80.0);
                const auto e4 = e4c_map(exp.k(1), HarmonicOp::constant(rho), wc);
                const auto e2e2 =
                    e2_map(exp.k(1), e2_map(exp.k(1), HarmonicOp::constant(rho), wc), wc);
                const Mat d4 = ho_derivative(e4).eval(t);
                const Mat d22 = ho_derivative(e2e2).eval(t);
                const double scale = std::max(1.0, max_abs(rho));
                worst = std::max(worst, max_abs(d4 - d22) / scale);
                worst_quarter = std::max(worst_quarter, max_abs(d4 - 0.25 * d22) / scale);
            }
            if (worst > 1e-10) pass = false;
            detail += fmt("dE4c vs dE2E2 residual %.3g (quarter-ratio residual %.2g)", worst,
                          worst_quarter);
        }

        line(5, pass, detail);
    }

    // 6. conservation suite over every integration above.
    {
        double trace_dev = 0.0, herm = 0.0, purity = 0.0, unitarity = 0.0;
        for (const auto* run : {&fig1, &fig2, &fig3, &supp}) {
            for (const auto& [name, diag] : run->report.me_diagnostics) {
                trace_dev = std::max(trace_dev, diag.max_trace_dev);
                herm = std::max(herm, diag.max_hermiticity_defect);
            }
            unitarity = std::max(unitarity, run->report.unitarity_defect);
            purity = std::max(purity, series_purity_drift(run->series.at("exact")));
        }
        const bool pass =
            trace_dev <= 1e-8 && herm <= 1e-10 && purity <= 1e-8 && unitarity <= 1e-8;
        line(6, pass,
             fmt("trace dev %.2g (1e-8), hermiticity %.2g (1e-10), purity drift %.2g (1e-8), "
                 "unitarity %.2g (1e-8)",
                 trace_dev, herm, purity, unitarity));
    }

    // 7. filter suite.
    {
        const double wc = 2.0 * kTwoPi;
        const auto spec = FilterSpec::for_cutoff(wc);
        const double dt = 0.004;
        const double dc = filter_dc_gain(spec, dt);
        const double pass_gain = tone_gain(spec, 0.1 * wc, dt);
        const double stop_gain = tone_gain(spec, 2.0 * wc, dt);
        const double oracle_pass = truncated_sinc_gain(wc, spec.half_width, 0.1 * wc);
        const double oracle_stop = truncated_sinc_gain(wc, spec.half_width, 2.0 * wc);
        const bool pass = std::abs(dc - 1.0) <= 0.01 && std::abs(pass_gain - 1.0) <= 0.02 &&
                          stop_gain <= 0.1 && std::abs(pass_gain - std::abs(oracle_pass)) < 5e-3 &&
                          stop_gain < 10.0 * std::abs(oracle_stop) + 1e-3;
        line(7, pass,
             fmt("dc gain %.4f (1 +- 1%%), gain at 0.1wc %.4f (+-2%%), attenuation at 2wc %.0fx "
                 "(>= 10x)",
                 dc, pass_gain, pass_gain / std::max(stop_gain, 1e-12)));
    }

    // 8. designer consistency.
    {
        DissipationTarget target;
        target.omega_c = 2.0 * kTwoPi;
        const double w = std::sqrt(10.0) * kTwoPi;
        target.jumps.push_back({pauli_z(), cplx{2.0, 0.0}, w, 1e-3 * w, 0.0});
        const auto res = design(target, M_PI * pauli_z());
        const double tpk = 0.25 * kTwoPi / (1e-3 * w);
        const double realized = realized_rate(res, 0, tpk);
        const double predicted = predicted_rate(target, 0, tpk);
        const double rel = std::abs(realized - predicted) / std::abs(realized);

        // fig2-style scenario: phi = pi damps first, phi = 0 turns it into gain.
        DissipationTarget fig2_style;
        fig2_style.omega_c = 2.0 * kTwoPi;
        fig2_style.jumps.push_back({pauli_z(), cplx{7.0, 0.0}, w, 0.025 * kTwoPi, M_PI});
        const auto damped = design(fig2_style, M_PI * pauli_z());
        fig2_style.jumps[0].phase = 0.0;
        const auto gained = design(fig2_style, M_PI * pauli_z());
        const double tq = 0.25 * kTwoPi / (0.025 * kTwoPi);
        const cplx d = l2_ff(damped.system, damped.scales, tq, projector_plus())(0, 1);
        const cplx g = l2_ff(gained.system, gained.scales, tq, projector_plus())(0, 1);
        const bool flip = d.real() < 0.0 && g.real() > 0.0;

        line(8, rel <= 1e-2 && flip,
             fmt("|realized - predicted|/|realized| = %.2g at the beat peak (tol 1e-2); ", rel) +
                 std::string("phase flip damping<->gain ") + (flip ? "yes" : "NO"));
    }

    // 9. step-halving endpoint change <= 1e-8 on every reported series.
    {
        double worst = 0.0;
        for (const char* name : {"fig1", "fig2", "fig3", "supp"})
            worst = std::max(worst, endpoint_change(preset(name)));
        line(9, worst <= 1e-8, fmt("max endpoint change under step halving %.3g (tol 1e-8)", worst));
    }

    std::printf("================\n%d of 9 criteria failed\n", g_failures);
    return g_failures;
}
