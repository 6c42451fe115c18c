#pragma once

// Matrix-valued trigonometric polynomials P(t) = sum_k A_k e^{i nu_k t} and
// the machinery built on them: the ideal low-pass average, antiderivatives,
// the kick-operator / effective-Hamiltonian recursion, and the band-passed
// correction maps used by the higher-order diagnostics.
//
// The recursion works mechanically on the harmonic decomposition:
//   K1       solves  dK1/dt = H_F
//   G1       = i[K1,H0] + (i/2)[K1,H_F]
//   H_eff_1  = avg(G1),   dK2/dt = G1 - H_eff_1
//   G2       = i[K2,H0] + (i/2)[K2,H_F] + (i/2)[K1,H_eff_1] - (1/12)[K1,[K1,H_F]]
//   H_eff_2  = avg(G2),   dK3/dt = G2 - H_eff_2
// where avg keeps only harmonics below the cutoff.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "floq/floquet_system.hpp"
#include "floq/matrix.hpp"

namespace floq {

struct HarmonicTerm {
    double nu;  // signed frequency, rad/T0
    Mat coeff;
};

class HarmonicOp {
  public:
    HarmonicOp() = default;
    explicit HarmonicOp(int dim) : dim_(dim) {}

    static HarmonicOp zero(int dim) { return HarmonicOp(dim); }
    static HarmonicOp constant(const Mat& m) {
        HarmonicOp p(m.dim());
        p.add_term(0.0, m);
        p.prune();
        return p;
    }

    int dim() const { return dim_; }
    bool empty() const { return terms_.empty(); }
    const std::vector<HarmonicTerm>& terms() const { return terms_; }

    // Merges coefficients whose frequencies agree within tol::freq_merge.
    void add_term(double nu, const Mat& coeff) {
        if (dim_ == 0) dim_ = coeff.dim();
        if (coeff.dim() != dim_) throw ValidationError("harmonic coefficient dimension mismatch");
        auto it = std::lower_bound(
            terms_.begin(), terms_.end(), nu - tol::freq_merge,
            [](const HarmonicTerm& t, double v) { return t.nu < v; });
        if (it != terms_.end() && std::abs(it->nu - nu) <= tol::freq_merge) {
            it->coeff += coeff;
            return;
        }
        terms_.insert(it, HarmonicTerm{nu, coeff});
    }

    double max_coeff_norm() const {
        double v = 0.0;
        for (const auto& t : terms_) v = std::max(v, max_abs(t.coeff));
        return v;
    }

    // Drops negligible coefficients (relative threshold over the whole sum).
    void prune(double rel = tol::prune) {
        const double scale = max_coeff_norm();
        std::erase_if(terms_, [&](const HarmonicTerm& t) {
            return max_abs(t.coeff) <= rel * scale || max_abs(t.coeff) == 0.0;
        });
    }

    Mat eval(double t) const {
        Mat m = Mat::zero(dim_ == 0 ? 1 : dim_);
        for (const auto& term : terms_) m += term.coeff * std::exp(kI * (term.nu * t));
        return m;
    }

    // True when P(t) is Hermitian for every t, i.e. A_{-nu} = A_nu^dag.
    bool hermitian_as_function(double rel = 1e-11) const {
        const double scale = std::max(max_coeff_norm(), 1e-300);
        for (const auto& term : terms_) {
            const Mat* partner = find(-term.nu);
            const Mat want = dagger(term.coeff);
            if (partner == nullptr) {
                if (max_abs(want) > rel * scale) return false;
            } else if (max_abs(*partner - want) > rel * scale) {
                return false;
            }
        }
        return true;
    }

    const Mat* find(double nu) const {
        auto it = std::lower_bound(
            terms_.begin(), terms_.end(), nu - tol::freq_merge,
            [](const HarmonicTerm& t, double v) { return t.nu < v; });
        if (it != terms_.end() && std::abs(it->nu - nu) <= tol::freq_merge) return &it->coeff;
        return nullptr;
    }

  private:
    int dim_ = 0;
    std::vector<HarmonicTerm> terms_;
};

inline HarmonicOp ho_add(const HarmonicOp& p, const HarmonicOp& q) {
    HarmonicOp r = p;
    for (const auto& t : q.terms()) r.add_term(t.nu, t.coeff);
    r.prune();
    return r;
}

inline HarmonicOp ho_scale(const HarmonicOp& p, cplx s) {
    HarmonicOp r(p.dim());
    for (const auto& t : p.terms()) r.add_term(t.nu, t.coeff * s);
    r.prune();
    return r;
}

inline HarmonicOp ho_sub(const HarmonicOp& p, const HarmonicOp& q) {
    return ho_add(p, ho_scale(q, cplx{-1.0, 0.0}));
}

// Frequency-convolution product: (PQ)_{nu} = sum_{nu1+nu2=nu} A_{nu1} B_{nu2}.
inline HarmonicOp ho_mul(const HarmonicOp& p, const HarmonicOp& q) {
    if (p.dim() != q.dim() && p.dim() != 0 && q.dim() != 0)
        throw ValidationError("harmonic product dimension mismatch");
    HarmonicOp r(p.dim());
    for (const auto& a : p.terms())
        for (const auto& b : q.terms()) r.add_term(a.nu + b.nu, a.coeff * b.coeff);
    r.prune();
    return r;
}

inline HarmonicOp ho_dagger(const HarmonicOp& p) {
    HarmonicOp r(p.dim());
    for (const auto& t : p.terms()) r.add_term(-t.nu, dagger(t.coeff));
    r.prune();
    return r;
}

inline HarmonicOp ho_commutator(const HarmonicOp& p, const HarmonicOp& q) {
    return ho_sub(ho_mul(p, q), ho_mul(q, p));
}

inline HarmonicOp ho_anticommutator(const HarmonicOp& p, const HarmonicOp& q) {
    return ho_add(ho_mul(p, q), ho_mul(q, p));
}

// Ideal low-pass on the harmonics: keep |nu| < omega_c.
inline HarmonicOp ho_average(const HarmonicOp& p, double omega_c) {
    HarmonicOp r(p.dim());
    for (const auto& t : p.terms())
        if (std::abs(t.nu) < omega_c) r.add_term(t.nu, t.coeff);
    r.prune();
    return r;
}

// Integration constant fixed to zero. A surviving nu = 0 coefficient is a
// secular term; the caller must subtract the average first.
inline HarmonicOp ho_antiderivative(const HarmonicOp& p) {
    HarmonicOp r(p.dim());
    for (const auto& t : p.terms()) {
        if (std::abs(t.nu) <= tol::freq_merge)
            throw SecularTermError("antiderivative of a zero-frequency harmonic");
        r.add_term(t.nu, t.coeff * (cplx{1.0, 0.0} / (kI * t.nu)));
    }
    r.prune();
    return r;
}

inline HarmonicOp ho_derivative(const HarmonicOp& p) {
    HarmonicOp r(p.dim());
    for (const auto& t : p.terms()) r.add_term(t.nu, t.coeff * (kI * t.nu));
    r.prune();
    return r;
}

inline Mat ho_eval(const HarmonicOp& p, double t) { return p.eval(t); }

// H_F(t) as a harmonic operator: V_m at +w_m and V_m^dag at -w_m.
inline HarmonicOp floquet_harmonic(const FloquetSystem& sys) {
    HarmonicOp p(sys.h0.dim());
    for (const auto& term : sys.terms) {
        p.add_term(term.omega, term.v);
        p.add_term(-term.omega, dagger(term.v));
    }
    p.prune();
    return p;
}

// --- Kick expansion ----------------------------------------------------------

struct KickExpansion {
    int order = 1;          // number of kick operators derived (1..3)
    double omega_c = 0.0;   // cutoff used for every average
    std::vector<HarmonicOp> kicks;  // kicks[n-1] = K_n, n = 1..order
    std::vector<HarmonicOp> heff;   // heff[n] = H_eff_n, n = 0..min(order,2)

    const HarmonicOp& k(int n) const { return kicks.at(static_cast<size_t>(n) - 1); }
    const HarmonicOp& h(int n) const { return heff.at(static_cast<size_t>(n)); }

    // Slow generator truncated at `order_max`: sum_{n<=order_max} H_eff_n.
    HarmonicOp heff_truncated(int order_max) const {
        HarmonicOp acc = heff.at(0);
        for (int n = 1; n < static_cast<int>(heff.size()) && n <= order_max; ++n)
            acc = ho_add(acc, heff[static_cast<size_t>(n)]);
        return acc;
    }
};

inline KickExpansion derive_kick_expansion(const FloquetSystem& sys,
                                           const SpectralScales& scales, int order) {
    if (order < 1 || order > 3) throw ValidationError("kick expansion order must be 1..3");
    const double wc = scales.omega_c;
    const cplx half_i = kI * 0.5;

    KickExpansion exp;
    exp.order = order;
    exp.omega_c = wc;

    const HarmonicOp hf = floquet_harmonic(sys);
    const HarmonicOp h0 = HarmonicOp::constant(sys.h0);
    exp.heff.push_back(h0);

    const HarmonicOp k1 = ho_antiderivative(hf);
    exp.kicks.push_back(k1);

    // G1 = i[K1,H0] + (i/2)[K1,H_F]
    const HarmonicOp g1 =
        ho_add(ho_scale(ho_commutator(k1, h0), kI), ho_scale(ho_commutator(k1, hf), half_i));
    const HarmonicOp heff1 = ho_average(g1, wc);
    exp.heff.push_back(heff1);

    if (order >= 2) {
        const HarmonicOp k2 = ho_antiderivative(ho_sub(g1, heff1));
        exp.kicks.push_back(k2);

        // G2 = i[K2,H0] + (i/2)[K2,H_F] + (i/2)[K1,H_eff_1] - (1/12)[K1,[K1,H_F]]
        HarmonicOp g2 = ho_scale(ho_commutator(k2, h0), kI);
        g2 = ho_add(g2, ho_scale(ho_commutator(k2, hf), half_i));
        g2 = ho_add(g2, ho_scale(ho_commutator(k1, heff1), half_i));
        g2 = ho_sub(g2, ho_scale(ho_commutator(k1, ho_commutator(k1, hf)),
                                 cplx{1.0 / 12.0, 0.0}));
        const HarmonicOp heff2 = ho_average(g2, wc);
        exp.heff.push_back(heff2);

        if (order >= 3) exp.kicks.push_back(ho_antiderivative(ho_sub(g2, heff2)));
    }

    for (const auto& k : exp.kicks)
        if (!k.hermitian_as_function())
            throw NumericError("kick operator lost Hermiticity as a function");
    for (const auto& h : exp.heff)
        if (!h.hermitian_as_function())
            throw NumericError("effective Hamiltonian lost Hermiticity as a function");
    return exp;
}

// --- Band-passed correction maps ---------------------------------------------

// avg(P X Q) for a slow X: the filter acts on the fast pair (nu_P + nu_Q);
// the slow harmonics of X ride through unchanged.
inline HarmonicOp sandwich_average(const HarmonicOp& p, const HarmonicOp& x,
                                   const HarmonicOp& q, double omega_c) {
    HarmonicOp r(x.dim() != 0 ? x.dim() : p.dim());
    for (const auto& a : p.terms())
        for (const auto& b : q.terms()) {
            if (std::abs(a.nu + b.nu) >= omega_c) continue;
            for (const auto& mid : x.terms())
                r.add_term(a.nu + b.nu + mid.nu, a.coeff * mid.coeff * b.coeff);
        }
    r.prune();
    return r;
}

// E2[X] = -1/2 {avg(K1^2), X} + avg(K1 X K1)
inline HarmonicOp e2_map(const HarmonicOp& k1, const HarmonicOp& x, double omega_c) {
    const HarmonicOp k1sq = ho_average(ho_mul(k1, k1), omega_c);
    return ho_add(ho_scale(ho_anticommutator(k1sq, x), cplx{-0.5, 0.0}),
                  sandwich_average(k1, x, k1, omega_c));
}

// E3[X] = avg(K1 X K2) + avg(K2 X K1) - 1/2 {avg({K1,K2}), X}
inline HarmonicOp e3_map(const HarmonicOp& k1, const HarmonicOp& k2, const HarmonicOp& x,
                         double omega_c) {
    const HarmonicOp cross = ho_average(ho_anticommutator(k1, k2), omega_c);
    HarmonicOp r = sandwich_average(k1, x, k2, omega_c);
    r = ho_add(r, sandwich_average(k2, x, k1, omega_c));
    r = ho_add(r, ho_scale(ho_anticommutator(cross, x), cplx{-0.5, 0.0}));
    return r;
}

// E4c[X] = 1/24 {avg(K1^4), X} - 1/6 avg(K1^3 X K1) - 1/6 avg(K1 X K1^3)
//          + 1/4 avg(K1^2 X K1^2); valid when the kick family is K1 alone.
inline HarmonicOp e4c_map(const HarmonicOp& k1, const HarmonicOp& x, double omega_c) {
    const HarmonicOp k1sq = ho_mul(k1, k1);
    const HarmonicOp k1cu = ho_mul(k1sq, k1);
    const HarmonicOp quart = ho_average(ho_mul(k1sq, k1sq), omega_c);
    HarmonicOp r = ho_scale(ho_anticommutator(quart, x), cplx{1.0 / 24.0, 0.0});
    r = ho_add(r, ho_scale(sandwich_average(k1cu, x, k1, omega_c), cplx{-1.0 / 6.0, 0.0}));
    r = ho_add(r, ho_scale(sandwich_average(k1, x, k1cu, omega_c), cplx{-1.0 / 6.0, 0.0}));
    r = ho_add(r, ho_scale(sandwich_average(k1sq, x, k1sq, omega_c), cplx{0.25, 0.0}));
    return r;
}

inline Mat correction_map_2(const KickExpansion& exp, double omega_c, double t,
                            const Mat& rho) {
    return e2_map(exp.k(1), HarmonicOp::constant(rho), omega_c).eval(t);
}

inline Mat correction_map_3(const KickExpansion& exp, double omega_c, double t,
                            const Mat& rho) {
    if (exp.order < 2) throw ValidationError("correction_map_3 needs a 2nd-order expansion");
    return e3_map(exp.k(1), exp.k(2), HarmonicOp::constant(rho), omega_c).eval(t);
}

inline Mat correction_map_4_commuting(const KickExpansion& exp, double omega_c, double t,
                                      const Mat& rho) {
    // Only meaningful when the kick family reduces to K1.
    for (int n = 2; n <= exp.order; ++n)
        if (!exp.k(n).empty())
            throw ValidationError("correction_map_4_commuting requires K_n = 0 for n >= 2");
    return e4c_map(exp.k(1), HarmonicOp::constant(rho), omega_c).eval(t);
}

}  // namespace floq
