#pragma once

// Dense complex linear algebra for small operators. Everything is sized for
// few-level systems (the default is 2x2), so the routines favour accuracy and
// simplicity over asymptotic speed.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <string>
#include <utility>
#include <vector>

#include "floq/errors.hpp"

namespace floq {

using cplx = std::complex<double>;

inline constexpr cplx kI{0.0, 1.0};

namespace tol {
// Library-wide defaults; scenario configs may override the ones that matter
// for validation.
inline constexpr double hermitian = 1e-12;    // relative deviation ||A - A^dag||
inline constexpr double trace_one = 1e-9;     // |tr(rho) - 1|
inline constexpr double psd = 1e-9;           // eigenvalue floor for states
inline constexpr double prune = 1e-15;        // relative harmonic pruning
inline constexpr double freq_merge = 1e-12;   // rad/T0, harmonic key merging
}  // namespace tol

class Mat {
  public:
    Mat() = default;
    explicit Mat(int dim) : n_(dim), a_(static_cast<size_t>(dim) * dim) {
        if (dim < 1) throw ValidationError("matrix dimension must be >= 1");
    }

    static Mat zero(int dim) { return Mat(dim); }
    static Mat identity(int dim) {
        Mat m(dim);
        for (int i = 0; i < dim; ++i) m(i, i) = 1.0;
        return m;
    }

    int dim() const { return n_; }
    cplx& operator()(int i, int j) { return a_[static_cast<size_t>(i) * n_ + j]; }
    const cplx& operator()(int i, int j) const { return a_[static_cast<size_t>(i) * n_ + j]; }
    const std::vector<cplx>& data() const { return a_; }
    std::vector<cplx>& data() { return a_; }

    Mat& operator+=(const Mat& o) {
        check_same_dim(o);
        for (size_t k = 0; k < a_.size(); ++k) a_[k] += o.a_[k];
        return *this;
    }
    Mat& operator-=(const Mat& o) {
        check_same_dim(o);
        for (size_t k = 0; k < a_.size(); ++k) a_[k] -= o.a_[k];
        return *this;
    }
    Mat& operator*=(cplx s) {
        for (auto& x : a_) x *= s;
        return *this;
    }

    friend Mat operator+(Mat a, const Mat& b) { return a += b; }
    friend Mat operator-(Mat a, const Mat& b) { return a -= b; }
    friend Mat operator*(Mat a, cplx s) { return a *= s; }
    friend Mat operator*(cplx s, Mat a) { return a *= s; }
    friend Mat operator*(Mat a, double s) { return a *= cplx{s, 0.0}; }
    friend Mat operator*(double s, Mat a) { return a *= cplx{s, 0.0}; }

    friend Mat operator*(const Mat& a, const Mat& b) {
        a.check_same_dim(b);
        const int n = a.n_;
        Mat c(n);
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k) {
                const cplx aik = a(i, k);
                if (aik == cplx{}) continue;
                for (int j = 0; j < n; ++j) c(i, j) += aik * b(k, j);
            }
        return c;
    }

    void check_same_dim(const Mat& o) const {
        if (n_ != o.n_) throw ValidationError("matrix dimension mismatch");
    }

  private:
    int n_ = 0;
    std::vector<cplx> a_;
};

inline Mat dagger(const Mat& m) {
    Mat d(m.dim());
    for (int i = 0; i < m.dim(); ++i)
        for (int j = 0; j < m.dim(); ++j) d(j, i) = std::conj(m(i, j));
    return d;
}

inline cplx trace(const Mat& m) {
    cplx t{};
    for (int i = 0; i < m.dim(); ++i) t += m(i, i);
    return t;
}

inline Mat commutator(const Mat& a, const Mat& b) { return a * b - b * a; }
inline Mat anticommutator(const Mat& a, const Mat& b) { return a * b + b * a; }

// Largest entry magnitude; the workhorse norm for tolerances.
inline double max_abs(const Mat& m) {
    double v = 0.0;
    for (const auto& x : m.data()) v = std::max(v, std::abs(x));
    return v;
}

inline double frobenius_norm(const Mat& m) {
    double s = 0.0;
    for (const auto& x : m.data()) s += std::norm(x);
    return std::sqrt(s);
}

inline bool all_finite(const Mat& m) {
    for (const auto& x : m.data())
        if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) return false;
    return true;
}

inline double hermitian_defect(const Mat& m) { return max_abs(m - dagger(m)); }

inline bool is_hermitian(const Mat& m, double rel = tol::hermitian) {
    const double scale = std::max(max_abs(m), 1e-300);
    return hermitian_defect(m) <= rel * scale;
}

// --- Pauli algebra -----------------------------------------------------------

inline Mat pauli_x() {
    Mat m(2);
    m(0, 1) = 1.0;
    m(1, 0) = 1.0;
    return m;
}
inline Mat pauli_y() {
    Mat m(2);
    m(0, 1) = -kI;
    m(1, 0) = kI;
    return m;
}
inline Mat pauli_z() {
    Mat m(2);
    m(0, 0) = 1.0;
    m(1, 1) = -1.0;
    return m;
}
// Basis convention: index 0 = |e>, index 1 = |g>, so sigma_+ = |e><g|.
inline Mat sigma_plus() {
    Mat m(2);
    m(0, 1) = 1.0;
    return m;
}
inline Mat sigma_minus() {
    Mat m(2);
    m(1, 0) = 1.0;
    return m;
}
inline Mat projector_e() {
    Mat m(2);
    m(0, 0) = 1.0;
    return m;
}
inline Mat projector_g() {
    Mat m(2);
    m(1, 1) = 1.0;
    return m;
}
// |psi+><psi+| with |psi+> = (|e> + |g>)/sqrt(2).
inline Mat projector_plus() {
    Mat m(2);
    m(0, 0) = m(0, 1) = m(1, 0) = m(1, 1) = 0.5;
    return m;
}

inline Mat pauli_assemble(cplx c0, cplx cx, cplx cy, cplx cz) {
    Mat m(2);
    m(0, 0) = c0 + cz;
    m(1, 1) = c0 - cz;
    m(0, 1) = cx - kI * cy;
    m(1, 0) = cx + kI * cy;
    return m;
}

// Inverse of pauli_assemble via trace projections: c_a = tr(sigma_a M)/2.
inline std::array<cplx, 4> pauli_components(const Mat& m) {
    if (m.dim() != 2) throw ValidationError("pauli_components needs a 2x2 matrix");
    return {0.5 * (m(0, 0) + m(1, 1)), 0.5 * (m(0, 1) + m(1, 0)),
            0.5 * kI * (m(0, 1) - m(1, 0)), 0.5 * (m(0, 0) - m(1, 1))};
}

// --- Hermitian eigen decomposition (cyclic Jacobi) ---------------------------

struct EigenSystem {
    std::vector<double> values;  // ascending
    Mat vectors;                 // columns are eigenvectors
};

// Cyclic Jacobi with complex rotations; plenty for the small dimensions used
// here. The input is assumed Hermitian (the strictly lower triangle is taken
// as the conjugate of the upper one).
inline EigenSystem hermitian_eigensystem(const Mat& h) {
    const int n = h.dim();
    Mat a = h;
    // Symmetrise to be safe against tiny Hermiticity defects.
    a = (a + dagger(a)) * 0.5;
    Mat v = Mat::identity(n);

    const double scale = std::max(max_abs(a), 1e-300);
    for (int sweep = 0; sweep < 60; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off = std::max(off, std::abs(a(p, q)));
        if (off <= 1e-15 * scale) break;

        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const cplx apq = a(p, q);
                if (std::abs(apq) <= 1e-18 * scale) continue;
                const double app = a(p, p).real();
                const double aqq = a(q, q).real();
                // Phase that makes the pivot real, then a real Jacobi angle.
                const cplx phase = apq / std::abs(apq);
                const double theta = 0.5 * std::atan2(2.0 * std::abs(apq), app - aqq);
                const double c = std::cos(theta);
                const cplx s = std::sin(theta) * phase;

                for (int k = 0; k < n; ++k) {
                    const cplx akp = a(k, p);
                    const cplx akq = a(k, q);
                    a(k, p) = c * akp + std::conj(s) * akq;
                    a(k, q) = -s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const cplx apk = a(p, k);
                    const cplx aqk = a(q, k);
                    a(p, k) = c * apk + s * aqk;
                    a(q, k) = -std::conj(s) * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    const cplx vkp = v(k, p);
                    const cplx vkq = v(k, q);
                    v(k, p) = c * vkp + std::conj(s) * vkq;
                    v(k, q) = -s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::pair<double, int>> order(n);
    for (int i = 0; i < n; ++i) order[i] = {a(i, i).real(), i};
    std::sort(order.begin(), order.end());

    EigenSystem es;
    es.values.resize(n);
    es.vectors = Mat(n);
    for (int i = 0; i < n; ++i) {
        es.values[i] = order[i].first;
        for (int k = 0; k < n; ++k) es.vectors(k, i) = v(k, order[i].second);
    }
    return es;
}

inline std::vector<double> hermitian_eigenvalues(const Mat& h) {
    return hermitian_eigensystem(h).values;
}

// Largest singular value.
inline double spectral_norm(const Mat& m) {
    const auto ev = hermitian_eigenvalues(dagger(m) * m);
    return std::sqrt(std::max(0.0, ev.back()));
}

// --- Matrix exponential ------------------------------------------------------

namespace detail {

// exp(A) for 2x2 via the Pauli decomposition A = c0 I + r.sigma, using
// (r.sigma)^2 = (r.r) I. Exact for any 2x2 complex matrix.
inline Mat expm_2x2(const Mat& m) {
    const auto c = pauli_components(m);
    const cplx r2 = c[1] * c[1] + c[2] * c[2] + c[3] * c[3];
    const cplx r = std::sqrt(r2);
    cplx ch, shr;  // cosh(r), sinh(r)/r
    if (std::abs(r) < 1e-6) {
        ch = 1.0 + r2 / 2.0 + r2 * r2 / 24.0;
        shr = 1.0 + r2 / 6.0 + r2 * r2 / 120.0;
    } else {
        ch = std::cosh(r);
        shr = std::sinh(r) / r;
    }
    const cplx e0 = std::exp(c[0]);
    return pauli_assemble(e0 * ch, e0 * shr * c[1], e0 * shr * c[2], e0 * shr * c[3]);
}

// Pade(13) scaling and squaring for general dimensions.
inline Mat expm_pade(const Mat& m) {
    static const double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                               1187353796428800.0,  129060195264000.0,   10559470521600.0,
                               670442572800.0,      33522128640.0,       1323241920.0,
                               40840800.0,          960960.0,            16380.0,
                               182.0,               1.0};
    const int n = m.dim();
    double norm1 = 0.0;  // max column sum
    for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += std::abs(m(i, j));
        norm1 = std::max(norm1, s);
    }
    int squarings = 0;
    const double theta13 = 5.371920351148152;
    if (norm1 > theta13) squarings = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
    Mat a = m * (1.0 / std::ldexp(1.0, squarings));

    const Mat a2 = a * a;
    const Mat a4 = a2 * a2;
    const Mat a6 = a2 * a4;
    const Mat id = Mat::identity(n);

    Mat u = a * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 +
                 b[3] * a2 + b[1] * id);
    Mat v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 +
            b[0] * id;

    // Solve (v - u) x = (v + u) by Gaussian elimination with partial pivoting.
    Mat lhs = v - u;
    Mat rhs = v + u;
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(lhs(r, col)) > std::abs(lhs(piv, col))) piv = r;
        if (piv != col)
            for (int j = 0; j < n; ++j) {
                std::swap(lhs(col, j), lhs(piv, j));
                std::swap(rhs(col, j), rhs(piv, j));
            }
        const cplx d = lhs(col, col);
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            const cplx f = lhs(r, col) / d;
            if (f == cplx{}) continue;
            for (int j = 0; j < n; ++j) {
                lhs(r, j) -= f * lhs(col, j);
                rhs(r, j) -= f * rhs(col, j);
            }
        }
        for (int j = 0; j < n; ++j) {
            rhs(col, j) /= d;
            lhs(col, j) /= d;
        }
    }
    Mat x = rhs;
    for (int k = 0; k < squarings; ++k) x = x * x;
    return x;
}

}  // namespace detail

// exp(A). 2x2 goes through the exact Pauli closed form; anti-Hermitian and
// Hermitian inputs of any size go through the eigendecomposition; everything
// else through Pade scaling-and-squaring.
inline Mat matrix_exponential(const Mat& m) {
    if (!all_finite(m)) throw ValidationError("matrix_exponential: non-finite input");
    if (m.dim() == 2) return detail::expm_2x2(m);

    const double scale = std::max(max_abs(m), 1e-300);
    const bool herm = hermitian_defect(m) <= 1e-13 * scale;
    const bool antiherm = max_abs(m + dagger(m)) <= 1e-13 * scale;
    if (herm || antiherm) {
        const Mat h = herm ? m : m * (-kI);  // m = i h with h Hermitian
        const auto es = hermitian_eigensystem(h);
        Mat d(m.dim());
        for (int i = 0; i < m.dim(); ++i)
            d(i, i) = herm ? std::exp(cplx{es.values[i], 0.0}) : std::exp(kI * es.values[i]);
        return es.vectors * d * dagger(es.vectors);
    }
    return detail::expm_pade(m);
}

// --- Density matrix checks ---------------------------------------------------

struct DensityCheck {
    bool ok = false;
    double trace_deviation = 0.0;
    double hermiticity_defect = 0.0;
    double min_eigenvalue = 0.0;
    std::string message;
};

inline DensityCheck check_density(const Mat& rho, double trace_tol = tol::trace_one,
                                  double psd_tol = tol::psd) {
    DensityCheck c;
    c.trace_deviation = std::abs(trace(rho) - cplx{1.0, 0.0});
    c.hermiticity_defect = hermitian_defect(rho);
    const double scale = std::max(max_abs(rho), 1e-300);
    if (c.hermiticity_defect > tol::hermitian * scale) {
        c.message = "state is not Hermitian";
        return c;
    }
    const auto ev = hermitian_eigenvalues(rho);
    c.min_eigenvalue = ev.front();
    if (c.trace_deviation > trace_tol) {
        c.message = "state trace differs from 1";
        return c;
    }
    if (c.min_eigenvalue < -psd_tol) {
        c.message = "state has a negative eigenvalue";
        return c;
    }
    c.ok = true;
    return c;
}

inline void require_density(const Mat& rho) {
    const auto c = check_density(rho);
    if (!c.ok) throw ValidationError("invalid density matrix: " + c.message);
}

inline void require_hermitian(const Mat& m, const std::string& what) {
    if (!is_hermitian(m)) throw ValidationError(what + " is not Hermitian");
}

}  // namespace floq
