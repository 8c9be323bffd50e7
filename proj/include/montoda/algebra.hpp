// Exact-shape complex polynomial and matrix arithmetic.
//
// CPoly   : univariate complex polynomial, coefficients lowest degree first.
// CMatrix : dense square complex matrix with LU determinant and the
//           Faddeev-LeVerrier characteristic polynomial.
// BiPoly  : polynomial in (eta, zeta) stored as one zeta-polynomial per
//           eta-power; recovered from a Lax matrix by sampling zeta at
//           roots of unity and inverting the DFT.

#pragma once

#include <algorithm>
#include <cassert>
#include <functional>
#include <initializer_list>

#include "montoda/common.hpp"

namespace montoda {

// ---------------------------------------------------------------- CPoly ---

class CPoly {
public:
    CPoly() = default;
    CPoly(std::initializer_list<cx> cs) : c_(cs) { trim(); }
    explicit CPoly(std::vector<cx> cs) : c_(std::move(cs)) { trim(); }

    static CPoly zero() { return CPoly{}; }
    static CPoly one() { return CPoly{cx(1.0)}; }
    static CPoly monomial(int k, cx a = cx(1.0)) {
        std::vector<cx> c(static_cast<size_t>(k) + 1, cx(0.0));
        c.back() = a;
        return CPoly(std::move(c));
    }

    // degree of the zero polynomial is the sentinel -1
    int degree() const { return static_cast<int>(c_.size()) - 1; }
    bool is_zero() const { return c_.empty(); }

    cx coeff(int k) const {
        if (k < 0 || k > degree()) return cx(0.0);
        return c_[static_cast<size_t>(k)];
    }
    const std::vector<cx>& coeffs() const { return c_; }

    cx eval(cx x) const {
        cx r(0.0);
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) r = r * x + *it;
        return r;
    }

    CPoly derivative() const {
        if (c_.size() <= 1) return CPoly{};
        std::vector<cx> d(c_.size() - 1);
        for (size_t k = 1; k < c_.size(); ++k) d[k - 1] = c_[k] * cx(static_cast<double>(k));
        return CPoly(std::move(d));
    }

    CPoly operator-() const {
        std::vector<cx> c(c_);
        for (auto& v : c) v = -v;
        return CPoly(std::move(c));
    }

    friend CPoly operator+(const CPoly& a, const CPoly& b) {
        std::vector<cx> c(std::max(a.c_.size(), b.c_.size()), cx(0.0));
        for (size_t k = 0; k < c.size(); ++k) c[k] = a.coeff(static_cast<int>(k)) + b.coeff(static_cast<int>(k));
        return CPoly(std::move(c));
    }
    friend CPoly operator-(const CPoly& a, const CPoly& b) { return a + (-b); }

    friend CPoly operator*(const CPoly& a, const CPoly& b) {
        if (a.is_zero() || b.is_zero()) return CPoly{};
        std::vector<cx> c(a.c_.size() + b.c_.size() - 1, cx(0.0));
        for (size_t i = 0; i < a.c_.size(); ++i)
            for (size_t j = 0; j < b.c_.size(); ++j) c[i + j] += a.c_[i] * b.c_[j];
        return CPoly(std::move(c));
    }
    friend CPoly operator*(cx s, const CPoly& a) {
        std::vector<cx> c(a.c_);
        for (auto& v : c) v *= s;
        return CPoly(std::move(c));
    }
    friend CPoly operator*(const CPoly& a, cx s) { return s * a; }

    // a(b(x))
    CPoly compose(const CPoly& b) const {
        CPoly r;
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) r = r * b + CPoly{*it};
        return r;
    }

    CPoly pow(int k) const {
        CPoly r = CPoly::one();
        for (int i = 0; i < k; ++i) r = r * (*this);
        return r;
    }

    // z^m * conj(p)(1/z): reversed, conjugated coefficients
    CPoly conj_reflect(int m = -1) const {
        if (m < 0) m = degree();
        std::vector<cx> c(static_cast<size_t>(m) + 1, cx(0.0));
        for (int j = 0; j <= m; ++j) c[static_cast<size_t>(j)] = std::conj(coeff(m - j));
        return CPoly(std::move(c));
    }

    double max_abs_coeff() const {
        double m = 0.0;
        for (const auto& v : c_) m = std::max(m, std::abs(v));
        return m;
    }

    void trim(double tol = 0.0) {
        while (!c_.empty() && std::abs(c_.back()) <= tol) c_.pop_back();
    }

private:
    std::vector<cx> c_;
};

inline bool approx_equal(const CPoly& a, const CPoly& b, double tol = 1e-10) {
    double scale = std::max(1.0, std::max(a.max_abs_coeff(), b.max_abs_coeff()));
    int d = std::max(a.degree(), b.degree());
    for (int k = 0; k <= d; ++k)
        if (std::abs(a.coeff(k) - b.coeff(k)) > tol * scale) return false;
    return true;
}

// (-1)^r zeta^{2r} conj(a_r(-1/conj(zeta))) as a polynomial; the reality
// condition of a spectral-curve coefficient is a_r == reality_transform(a_r, r).
// Coefficientwise this reads c_j = (-1)^{r+j} conj(c_{2r-j}).
inline CPoly reality_transform(const CPoly& a, int r) {
    std::vector<cx> c(static_cast<size_t>(2 * r) + 1, cx(0.0));
    for (int j = 0; j <= 2 * r; ++j) {
        double sgn = ((r + j) % 2 == 0) ? 1.0 : -1.0;
        c[static_cast<size_t>(j)] = sgn * std::conj(a.coeff(2 * r - j));
    }
    return CPoly(std::move(c));
}

// -------------------------------------------------------------- roots -----

// Durand-Kerner simultaneous iteration followed by a few Newton polish steps.
// Intended for the small well-separated-root polynomials appearing here
// (degree <= ~14); clustered roots are the caller's degenerate case.
inline std::vector<cx> poly_roots(const CPoly& p, double tol = 1e-14) {
    int d = p.degree();
    if (d < 1) return {};
    cx lead = p.coeff(d);
    std::vector<cx> a(static_cast<size_t>(d) + 1);
    for (int k = 0; k <= d; ++k) a[static_cast<size_t>(k)] = p.coeff(k) / lead;

    auto eval_monic = [&](cx x) {
        cx r(0.0);
        for (int k = d; k >= 0; --k) r = r * x + a[static_cast<size_t>(k)];
        return r;
    };

    double radius = 0.0;
    for (int k = 0; k < d; ++k) radius = std::max(radius, std::abs(a[static_cast<size_t>(k)]));
    radius = 1.0 + radius;

    std::vector<cx> w(static_cast<size_t>(d));
    for (int k = 0; k < d; ++k)
        w[static_cast<size_t>(k)] = radius * std::exp(cx(0.0, 2.0 * pi * k / d + 0.397));

    for (int iter = 0; iter < 600; ++iter) {
        double worst = 0.0;
        for (int i = 0; i < d; ++i) {
            cx denom(1.0);
            for (int j = 0; j < d; ++j)
                if (j != i) denom *= (w[static_cast<size_t>(i)] - w[static_cast<size_t>(j)]);
            cx delta = eval_monic(w[static_cast<size_t>(i)]) / denom;
            w[static_cast<size_t>(i)] -= delta;
            worst = std::max(worst, std::abs(delta));
        }
        if (worst < tol * radius) break;
    }

    CPoly dp = p.derivative();
    for (auto& r : w) {
        for (int it = 0; it < 4; ++it) {
            cx der = dp.eval(r);
            if (std::abs(der) == 0.0) break;
            r -= p.eval(r) / der;
        }
    }
    return w;
}

// ---------------------------------------------------------------- CMatrix -

class CMatrix {
public:
    CMatrix() : n_(0) {}
    explicit CMatrix(int n) : n_(n), a_(static_cast<size_t>(n) * n, cx(0.0)) {}

    static CMatrix identity(int n) {
        CMatrix m(n);
        for (int i = 0; i < n; ++i) m(i, i) = cx(1.0);
        return m;
    }

    int size() const { return n_; }

    cx& operator()(int i, int j) { return a_[static_cast<size_t>(i) * n_ + j]; }
    cx operator()(int i, int j) const { return a_[static_cast<size_t>(i) * n_ + j]; }

    friend CMatrix operator+(const CMatrix& a, const CMatrix& b) {
        assert(a.n_ == b.n_);
        CMatrix r(a.n_);
        for (size_t k = 0; k < a.a_.size(); ++k) r.a_[k] = a.a_[k] + b.a_[k];
        return r;
    }
    friend CMatrix operator-(const CMatrix& a, const CMatrix& b) {
        assert(a.n_ == b.n_);
        CMatrix r(a.n_);
        for (size_t k = 0; k < a.a_.size(); ++k) r.a_[k] = a.a_[k] - b.a_[k];
        return r;
    }
    friend CMatrix operator*(cx s, const CMatrix& a) {
        CMatrix r(a.n_);
        for (size_t k = 0; k < a.a_.size(); ++k) r.a_[k] = s * a.a_[k];
        return r;
    }
    friend CMatrix operator*(const CMatrix& a, const CMatrix& b) {
        if (a.n_ != b.n_) throw error("CMatrix: dimension mismatch in product");
        CMatrix r(a.n_);
        for (int i = 0; i < a.n_; ++i)
            for (int k = 0; k < a.n_; ++k) {
                cx aik = a(i, k);
                if (aik == cx(0.0)) continue;
                for (int j = 0; j < a.n_; ++j) r(i, j) += aik * b(k, j);
            }
        return r;
    }

    CMatrix transpose() const {
        CMatrix r(n_);
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) r(j, i) = (*this)(i, j);
        return r;
    }
    CMatrix dagger() const {
        CMatrix r(n_);
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) r(j, i) = std::conj((*this)(i, j));
        return r;
    }

    cx trace() const {
        cx t(0.0);
        for (int i = 0; i < n_; ++i) t += (*this)(i, i);
        return t;
    }

    double norm_inf() const {
        double m = 0.0;
        for (const auto& v : a_) m = std::max(m, std::abs(v));
        return m;
    }
    double norm_fro() const {
        double s = 0.0;
        for (const auto& v : a_) s += std::norm(v);
        return std::sqrt(s);
    }

private:
    int n_;
    std::vector<cx> a_;
};

inline CMatrix commutator(const CMatrix& a, const CMatrix& b) { return a * b - b * a; }

// In-place LU with partial pivoting; returns det, leaves a usable factorization.
inline cx lu_factor(std::vector<cx>& a, int n, std::vector<int>& piv) {
    piv.resize(static_cast<size_t>(n));
    cx det(1.0);
    for (int k = 0; k < n; ++k) {
        int p = k;
        double best = std::abs(a[static_cast<size_t>(k) * n + k]);
        for (int i = k + 1; i < n; ++i) {
            double v = std::abs(a[static_cast<size_t>(i) * n + k]);
            if (v > best) { best = v; p = i; }
        }
        piv[static_cast<size_t>(k)] = p;
        if (p != k) {
            for (int j = 0; j < n; ++j) std::swap(a[static_cast<size_t>(k) * n + j], a[static_cast<size_t>(p) * n + j]);
            det = -det;
        }
        cx pivval = a[static_cast<size_t>(k) * n + k];
        det *= pivval;
        if (std::abs(pivval) == 0.0) return cx(0.0);
        for (int i = k + 1; i < n; ++i) {
            cx m = a[static_cast<size_t>(i) * n + k] / pivval;
            a[static_cast<size_t>(i) * n + k] = m;
            for (int j = k + 1; j < n; ++j) a[static_cast<size_t>(i) * n + j] -= m * a[static_cast<size_t>(k) * n + j];
        }
    }
    return det;
}

inline cx det(const CMatrix& m) {
    int n = m.size();
    std::vector<cx> a(static_cast<size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a[static_cast<size_t>(i) * n + j] = m(i, j);
    std::vector<int> piv;
    return lu_factor(a, n, piv);
}

// Solve M x = b for dense complex M.
inline std::vector<cx> solve(const CMatrix& m, const std::vector<cx>& b) {
    int n = m.size();
    if (static_cast<int>(b.size()) != n) throw error("solve: dimension mismatch");
    std::vector<cx> a(static_cast<size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a[static_cast<size_t>(i) * n + j] = m(i, j);
    std::vector<int> piv;
    cx d = lu_factor(a, n, piv);
    if (std::abs(d) == 0.0) throw error("solve: singular matrix");
    std::vector<cx> x(b);
    // rows were swapped in full during factorization: permute first, then substitute
    for (int k = 0; k < n; ++k)
        if (piv[static_cast<size_t>(k)] != k) std::swap(x[static_cast<size_t>(k)], x[static_cast<size_t>(piv[static_cast<size_t>(k)])]);
    for (int k = 0; k < n; ++k)
        for (int i = k + 1; i < n; ++i) x[static_cast<size_t>(i)] -= a[static_cast<size_t>(i) * n + k] * x[static_cast<size_t>(k)];
    for (int i = n - 1; i >= 0; --i) {
        for (int j = i + 1; j < n; ++j) x[static_cast<size_t>(i)] -= a[static_cast<size_t>(i) * n + j] * x[static_cast<size_t>(j)];
        x[static_cast<size_t>(i)] /= a[static_cast<size_t>(i) * n + i];
    }
    return x;
}

// Real dense solve, used for lattice reduction and integer-matrix recovery.
inline std::vector<double> solve_real(std::vector<double> a, std::vector<double> b) {
    int n = static_cast<int>(b.size());
    for (int k = 0; k < n; ++k) {
        int p = k;
        for (int i = k + 1; i < n; ++i)
            if (std::abs(a[static_cast<size_t>(i) * n + k]) > std::abs(a[static_cast<size_t>(p) * n + k])) p = i;
        if (p != k) {
            for (int j = 0; j < n; ++j) std::swap(a[static_cast<size_t>(k) * n + j], a[static_cast<size_t>(p) * n + j]);
            std::swap(b[static_cast<size_t>(k)], b[static_cast<size_t>(p)]);
        }
        double pv = a[static_cast<size_t>(k) * n + k];
        if (pv == 0.0) throw error("solve_real: singular matrix");
        for (int i = k + 1; i < n; ++i) {
            double m = a[static_cast<size_t>(i) * n + k] / pv;
            for (int j = k; j < n; ++j) a[static_cast<size_t>(i) * n + j] -= m * a[static_cast<size_t>(k) * n + j];
            b[static_cast<size_t>(i)] -= m * b[static_cast<size_t>(k)];
        }
    }
    std::vector<double> x(static_cast<size_t>(n));
    for (int i = n - 1; i >= 0; --i) {
        double s = b[static_cast<size_t>(i)];
        for (int j = i + 1; j < n; ++j) s -= a[static_cast<size_t>(i) * n + j] * x[static_cast<size_t>(j)];
        x[static_cast<size_t>(i)] = s / a[static_cast<size_t>(i) * n + i];
    }
    return x;
}

// det(eta*1 + M) by Faddeev-LeVerrier (set plus_sign=false for det(eta*1 - M)).
// The +M convention matches the spectral curve det(eta 1_n + A(zeta)).
inline CPoly charpoly(const CMatrix& m, bool plus_sign = true) {
    int n = m.size();
    CMatrix a = plus_sign ? m : (cx(-1.0) * m);
    // Faddeev-LeVerrier for p(x) = det(x 1 - B) with B = -a: iterate on B.
    CMatrix b = cx(-1.0) * a;
    std::vector<cx> c(static_cast<size_t>(n) + 1, cx(0.0));
    c[static_cast<size_t>(n)] = cx(1.0);
    CMatrix mk = CMatrix::identity(n);
    for (int k = 1; k <= n; ++k) {
        mk = b * mk;
        cx ck = -mk.trace() / cx(static_cast<double>(k));
        c[static_cast<size_t>(n - k)] = ck;
        for (int i = 0; i < n; ++i) mk(i, i) += ck;
    }
    return CPoly(std::move(c));
}

inline std::vector<cx> eigenvalues(const CMatrix& m) {
    // roots of det(x 1 - M)
    return poly_roots(charpoly(m, false));
}

// ---------------------------------------------------------------- BiPoly --

class BiPoly {
public:
    BiPoly() = default;
    explicit BiPoly(std::vector<CPoly> eta_coeffs) : c_(std::move(eta_coeffs)) {
        while (!c_.empty() && c_.back().is_zero()) c_.pop_back();
    }

    int eta_degree() const { return static_cast<int>(c_.size()) - 1; }
    const CPoly& eta_coeff(int i) const {
        static const CPoly z{};
        if (i < 0 || i > eta_degree()) return z;
        return c_[static_cast<size_t>(i)];
    }

    cx eval(cx eta, cx zeta) const {
        cx r(0.0);
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) r = r * eta + it->eval(zeta);
        return r;
    }

    // polynomial in eta at fixed zeta
    CPoly eta_poly(cx zeta) const {
        std::vector<cx> v(c_.size());
        for (size_t i = 0; i < c_.size(); ++i) v[i] = c_[i].eval(zeta);
        return CPoly(std::move(v));
    }

    // d/d eta as a BiPoly
    BiPoly eta_derivative() const {
        if (c_.size() <= 1) return BiPoly{};
        std::vector<CPoly> d(c_.size() - 1);
        for (size_t i = 1; i < c_.size(); ++i) d[i - 1] = cx(static_cast<double>(i)) * c_[i];
        return BiPoly(std::move(d));
    }

    double max_abs_coeff() const {
        double m = 0.0;
        for (const auto& p : c_) m = std::max(m, p.max_abs_coeff());
        return m;
    }

private:
    std::vector<CPoly> c_;
};

inline bool approx_equal(const BiPoly& a, const BiPoly& b, double tol = 1e-10) {
    double scale = std::max(1.0, std::max(a.max_abs_coeff(), b.max_abs_coeff()));
    int d = std::max(a.eta_degree(), b.eta_degree());
    for (int i = 0; i <= d; ++i) {
        int dz = std::max(a.eta_coeff(i).degree(), b.eta_coeff(i).degree());
        for (int j = 0; j <= dz; ++j)
            if (std::abs(a.eta_coeff(i).coeff(j) - b.eta_coeff(i).coeff(j)) > tol * scale) return false;
    }
    return true;
}

// Spectral-curve degree pattern: monic of degree n in eta and
// deg_zeta of the eta^{n-r} coefficient <= 2r.
inline bool degree_pattern_ok(const BiPoly& p, int n, double tol = 1e-10) {
    if (p.eta_degree() != n) return false;
    double scale = std::max(1.0, p.max_abs_coeff());
    const CPoly& top = p.eta_coeff(n);
    if (top.degree() != 0 || std::abs(top.coeff(0) - cx(1.0)) > tol * scale) return false;
    for (int r = 0; r <= n; ++r) {
        const CPoly& ar = p.eta_coeff(n - r);
        for (int j = 2 * r + 1; j <= ar.degree(); ++j)
            if (std::abs(ar.coeff(j)) > tol * scale) return false;
    }
    return true;
}

// Recover det(eta 1 + A(zeta)) as a BiPoly by sampling zeta at the
// (2*max_deg+1)-st roots of unity and inverting the DFT. The result is
// checked against fresh samples; failure signals the caller to re-sample.
inline BiPoly bipoly_from_lax(const std::function<CMatrix(cx)>& a_of_zeta, int n, int max_deg = -1) {
    if (max_deg < 0) max_deg = 2 * n;
    int m = 2 * max_deg + 1;

    std::vector<CPoly> samples;
    samples.reserve(static_cast<size_t>(m));
    for (int k = 0; k < m; ++k) {
        cx zk = std::exp(cx(0.0, 2.0 * pi * k / m));
        samples.push_back(charpoly(a_of_zeta(zk), true));
    }

    std::vector<CPoly> coeffs(static_cast<size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) {
        std::vector<cx> cz(static_cast<size_t>(m), cx(0.0));
        for (int j = 0; j < m; ++j) {
            cx acc(0.0);
            for (int k = 0; k < m; ++k) {
                cx w = std::exp(cx(0.0, -2.0 * pi * j * k / m));
                acc += samples[static_cast<size_t>(k)].coeff(i) * w;
            }
            cz[static_cast<size_t>(j)] = acc / cx(static_cast<double>(m));
        }
        CPoly p(std::move(cz));
        p.trim(1e-11 * std::max(1.0, p.max_abs_coeff()));
        coeffs[static_cast<size_t>(i)] = p;
    }
    BiPoly result(std::move(coeffs));

    // verify against fresh sample points; the roundoff floor of the direct
    // characteristic polynomial grows with the matrix magnitude, so condition
    // the comparison on ||A||^n as well as the output coefficients
    double scale = std::max(1.0, result.max_abs_coeff());
    for (const auto& s : samples) scale = std::max(scale, s.max_abs_coeff());
    double entry_scale = 1.0;
    for (int k = 0; k < 3; ++k) entry_scale = std::max(entry_scale, a_of_zeta(std::exp(cx(0.0, 2.1 * k))).norm_inf());
    scale = std::max(scale, std::pow(entry_scale, n));
    for (int k = 0; k < 3; ++k) {
        cx zk = cx(0.7, 0.0) * std::exp(cx(0.0, 2.0 * pi * (k + 0.37) / 3.0));
        CPoly direct = charpoly(a_of_zeta(zk), true);
        CPoly viewed = result.eta_poly(zk);
        for (int i = 0; i <= n; ++i)
            if (std::abs(direct.coeff(i) - viewed.coeff(i)) > 1e-12 * scale)
                throw interpolation_error("bipoly_from_lax: interpolation failed to reproduce samples");
    }
    return result;
}

} // namespace montoda
