// Spectral-curve algebra: reality, the PSU(2) rotation action, the cyclic
// normal form and its quotient to the hyperelliptic Toda curve.
//
// A charge-n cyclic curve is
//
//   eta^n + a_2 eta^{n-2} zeta^2 + ... + a_n zeta^n
//         + beta zeta^{2n} + (-1)^n conj(beta) = 0,   a_i real,
//
// and with x = eta/zeta, nu = beta zeta^n, y = nu - (-1)^n |beta|^2/nu the
// quotient by (eta,zeta) -> (w eta, w zeta) is
//
//   y^2 = (x^n + a_2 x^{n-2} + ... + a_n)^2 - 4 (-1)^n |beta|^2.

#pragma once

#include "montoda/nahm_toda.hpp"

namespace montoda {

// ------------------------------------------------------- MobiusRotation ---

// PSU(2) element acting by zeta -> (conj(p) zeta - conj(q))/(q zeta + p),
// eta -> eta/(q zeta + p)^2, with |p|^2 + |q|^2 = 1.
struct MobiusRotation {
    cx p{1.0, 0.0}, q{0.0, 0.0};

    MobiusRotation() = default;
    MobiusRotation(cx p_, cx q_) : p(p_), q(q_) {
        if (std::abs(std::norm(p) + std::norm(q) - 1.0) > 1e-14)
            throw error("MobiusRotation: |p|^2 + |q|^2 must be 1");
    }

    static MobiusRotation identity() { return MobiusRotation(); }

    // order-n cyclic generator: pbar = w^{1/2}, q = 0
    static MobiusRotation cyclic_generator(int n) {
        return MobiusRotation(std::exp(cx(0.0, -pi / n)), cx(0.0));
    }

    // composition law of the curve action: rotate(rotate(c, g1), g2) equals
    // rotate(c, compose(g2, g1)). Curve substitutions compose contravariantly
    // to point maps, so this is the matrix product M(g1) M(g2).
    friend MobiusRotation compose(const MobiusRotation& g2, const MobiusRotation& g1) {
        return MobiusRotation(g1.p * g2.p - g1.q * std::conj(g2.q), g1.q * std::conj(g2.p) + g1.p * g2.q);
    }

    cx map_zeta(cx zeta) const { return (std::conj(p) * zeta - std::conj(q)) / (q * zeta + p); }
    cx map_eta(cx eta, cx zeta) const {
        cx d = q * zeta + p;
        return eta / (d * d);
    }
};

// -------------------------------------------------------- SpectralCurve ---

struct SpectralCurve {
    int n = 2;
    BiPoly P;                 // monic degree n in eta
    bool cyclic_form = false; // when set, P equals the cyclic normal form of
    std::vector<double> a;    //   these parameters: a[k] = a_{k+2}
    cx beta{0.0, 0.0};

    static SpectralCurve cyclic(int n, std::vector<double> a_params, cx beta) {
        if (static_cast<int>(a_params.size()) != n - 1)
            throw error("SpectralCurve::cyclic: need a_2..a_n (n-1 reals)");
        if (std::abs(beta) == 0.0) throw error("SpectralCurve::cyclic: beta must be nonzero");
        SpectralCurve c;
        c.n = n;
        c.cyclic_form = true;
        c.a = std::move(a_params);
        c.beta = beta;
        std::vector<CPoly> coeffs(static_cast<size_t>(n) + 1);
        coeffs[static_cast<size_t>(n)] = CPoly::one();
        for (int r = 2; r <= n; ++r)
            coeffs[static_cast<size_t>(n - r)] = CPoly::monomial(r, cx(c.a[static_cast<size_t>(r - 2)]));
        double sgn = (n % 2 == 0) ? 1.0 : -1.0;
        coeffs[0] = coeffs[0] + CPoly::monomial(2 * n, beta) + CPoly{sgn * std::conj(beta)};
        c.P = BiPoly(std::move(coeffs));
        return c;
    }

    static SpectralCurve from_bipoly(int n, BiPoly p) {
        SpectralCurve c;
        c.n = n;
        c.P = std::move(p);
        c.detect_cyclic();
        return c;
    }

    // try to read off cyclic-form parameters from P
    bool detect_cyclic(double tol = 1e-10) {
        cyclic_form = false;
        if (!degree_pattern_ok(P, n, tol)) return false;
        double scale = std::max(1.0, P.max_abs_coeff());
        std::vector<double> av(static_cast<size_t>(n - 1), 0.0);
        for (int r = 2; r <= n; ++r) {
            const CPoly& ar = P.eta_coeff(n - r);
            for (int j = 0; j <= ar.degree(); ++j) {
                cx cj = ar.coeff(j);
                bool allowed = (r < n) ? (j == r) : (j == r || j == 0 || j == 2 * n);
                if (!allowed && std::abs(cj) > tol * scale) return false;
            }
            cx main = ar.coeff(r);
            if (std::abs(main.imag()) > tol * scale) return false;
            av[static_cast<size_t>(r - 2)] = main.real();
        }
        const CPoly& an = P.eta_coeff(0);
        cx b = an.coeff(2 * n);
        cx c0 = an.coeff(0);
        double sgn = (n % 2 == 0) ? 1.0 : -1.0;
        if (std::abs(c0 - sgn * std::conj(b)) > tol * scale) return false;
        if (std::abs(b) <= tol * scale) return false;
        const CPoly& a1 = P.eta_coeff(n - 1);
        if (a1.degree() >= 0 && a1.max_abs_coeff() > tol * scale) return false;
        cyclic_form = true;
        a = std::move(av);
        beta = b;
        return true;
    }
};

// builds the curve of a Toda phase point via the Lax matrix
inline SpectralCurve spectral_curve(const NahmTriple& nm) {
    int n = nm.t1.size();
    auto a_of = [&nm](cx z) { return lax(nm, z).first; };
    return SpectralCurve::from_bipoly(n, bipoly_from_lax(a_of, n));
}

// --------------------------------------------------------- reality check --

struct RealityReport {
    bool ok = false;
    double max_violation = 0.0;
};

// coefficient identity a_r(z) = (-1)^r z^{2r} conj(a_r(-1/conj z)), checked
// coefficientwise for every r
inline RealityReport check_reality(const SpectralCurve& c, double tol = 1e-10) {
    RealityReport rep;
    double scale = std::max(1.0, c.P.max_abs_coeff());
    for (int r = 1; r <= c.n; ++r) {
        const CPoly& ar = c.P.eta_coeff(c.n - r);
        CPoly tr = reality_transform(ar, r);
        int d = std::max(ar.degree(), tr.degree());
        for (int j = 0; j <= d; ++j)
            rep.max_violation = std::max(rep.max_violation, std::abs(ar.coeff(j) - tr.coeff(j)));
    }
    rep.ok = rep.max_violation <= tol * scale;
    return rep;
}

// --------------------------------------------------------------- rotate ---

// P~(eta,zeta) = (q zeta + p)^{2n} P(eta/(q zeta+p)^2, (pbar zeta - qbar)/(q zeta+p))
inline SpectralCurve rotate(const SpectralCurve& c, const MobiusRotation& g) {
    int n = c.n;
    CPoly num{-std::conj(g.q), std::conj(g.p)}; // pbar z - qbar
    CPoly den{g.p, g.q};                        // q z + p
    std::vector<CPoly> out(static_cast<size_t>(n) + 1);

    // precompute powers
    std::vector<CPoly> numpow(static_cast<size_t>(2 * n) + 1), denpow(static_cast<size_t>(2 * n) + 1);
    numpow[0] = CPoly::one();
    denpow[0] = CPoly::one();
    for (int k = 1; k <= 2 * n; ++k) {
        numpow[static_cast<size_t>(k)] = numpow[static_cast<size_t>(k - 1)] * num;
        denpow[static_cast<size_t>(k)] = denpow[static_cast<size_t>(k - 1)] * den;
    }

    for (int i = 0; i <= n; ++i) {
        const CPoly& ci = c.P.eta_coeff(i);
        CPoly acc;
        for (int j = 0; j <= ci.degree(); ++j) {
            cx cij = ci.coeff(j);
            if (cij == cx(0.0)) continue;
            int dpow = 2 * n - 2 * i - j;
            if (dpow < 0)
                throw error("rotate: coefficient grid violates the spectral degree pattern");
            acc = acc + cij * (numpow[static_cast<size_t>(j)] * denpow[static_cast<size_t>(dpow)]);
        }
        out[static_cast<size_t>(i)] = acc;
    }
    SpectralCurve r;
    r.n = n;
    r.P = BiPoly(std::move(out));
    r.detect_cyclic();
    return r;
}

// rotation absorbing the phase of beta (makes beta real positive, n=2 q=0 family)
inline MobiusRotation phase_absorbing_rotation(const SpectralCurve& c) {
    if (!c.cyclic_form) throw error("phase_absorbing_rotation: cyclic form required");
    double phase = std::arg(c.beta); // beta -> beta * exp(-2 i n phi) under p = e^{i phi}, rotate by phi = phase/(2n)
    return MobiusRotation(std::exp(cx(0.0, phase / (2.0 * c.n))), cx(0.0));
}

// --------------------------------------------------- HyperellipticCurve ---

struct HyperellipticCurve {
    CPoly f;        // y^2 = f(x), even degree, squarefree
    int genus = 0;  // (deg f)/2 - 1

    // monopole-quotient data (set when built by quotient())
    bool is_monopole = false;
    int n = 0;
    CPoly Q;           // x^n + a_2 x^{n-2} + ... + a_n
    double beta_abs = 0.0;

    // Squarefree guard by root separation. A true double root computed in
    // doubles lands ~sqrt(machine eps) ~ 1e-8 apart, so the usable threshold
    // sits above that.
    static HyperellipticCurve from_f(CPoly f, double degeneracy_tol = 1e-6) {
        HyperellipticCurve h;
        h.f = std::move(f);
        int d = h.f.degree();
        if (d < 4 || d % 2 != 0) throw error("HyperellipticCurve: need even degree >= 4");
        h.genus = d / 2 - 1;
        std::vector<cx> r = poly_roots(h.f);
        double scale = 0.0;
        for (const auto& z : r) scale = std::max(scale, std::abs(z));
        scale = std::max(scale, 1.0);
        for (size_t i = 0; i < r.size(); ++i)
            for (size_t j = i + 1; j < r.size(); ++j)
                if (std::abs(r[i] - r[j]) < degeneracy_tol * scale)
                    throw degenerate_curve_error("HyperellipticCurve: clustered branch points");
        return h;
    }
};

// y^2 = Q(x)^2 - 4 (-1)^n |beta|^2 with Q = x^n + a_2 x^{n-2} + ... + a_n
inline HyperellipticCurve quotient(const SpectralCurve& c, double degeneracy_tol = 1e-10) {
    if (!c.cyclic_form) throw error("quotient: curve is not in cyclic form");
    int n = c.n;
    std::vector<cx> qc(static_cast<size_t>(n) + 1, cx(0.0));
    qc[static_cast<size_t>(n)] = cx(1.0);
    for (int r = 2; r <= n; ++r) qc[static_cast<size_t>(n - r)] = cx(c.a[static_cast<size_t>(r - 2)]);
    CPoly q(std::move(qc));
    double sgn = (n % 2 == 0) ? 1.0 : -1.0;
    CPoly f = q * q - CPoly{cx(4.0 * sgn * std::norm(c.beta))};

    HyperellipticCurve h;
    try {
        h = HyperellipticCurve::from_f(f, degeneracy_tol);
    } catch (const degenerate_curve_error&) {
        throw degenerate_curve_error("quotient: Toda curve is degenerate (discriminant ~ 0)");
    }
    h.is_monopole = true;
    h.n = n;
    h.Q = q;
    h.beta_abs = std::abs(c.beta);
    if (h.genus != n - 1) throw error("quotient: genus ledger violated");
    return h;
}

// ------------------------------------------------------------- projection -

// (x, y) = (eta/zeta, nu - (-1)^n |beta|^2/nu), nu = beta zeta^n.
// Requires P(eta,zeta) ~ 0; zeta near 0 belongs to the infinity_- chart and
// is rejected here.
inline std::pair<cx, cx> project_point(const SpectralCurve& c, cx zeta, cx eta, double on_curve_tol = 1e-10) {
    if (!c.cyclic_form) throw error("project_point: cyclic form required");
    double scale = std::max(1.0, c.P.max_abs_coeff()) * std::max(1.0, std::pow(std::abs(zeta), 2.0 * c.n));
    if (std::abs(c.P.eval(eta, zeta)) > on_curve_tol * scale)
        throw error("project_point: (eta, zeta) does not satisfy the curve");
    if (std::abs(zeta) < 1e-8)
        throw error("project_point: zeta ~ 0 is the infinity_- chart; project there instead");
    cx x = eta / zeta;
    cx nu = c.beta * std::pow(zeta, c.n);
    double sgn = (c.n % 2 == 0) ? 1.0 : -1.0;
    cx y = nu - sgn * std::norm(c.beta) / nu;
    return {x, y};
}

// z -> infinity asymptotic directions of x/zeta: rho_j = beta^{1/n} e^{2 pi i (j+1/2)/n}
inline std::vector<cx> rho_points(int n, cx beta) {
    cx root = std::pow(beta, 1.0 / n); // principal branch; j enumerates the rest
    std::vector<cx> rho(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j) rho[static_cast<size_t>(j)] = root * std::exp(cx(0.0, 2.0 * pi * (j + 0.5) / n));
    return rho;
}

// phase exponent of the differential zeta^r eta^s dzeta / dP_eta under the
// cyclic rotation: (r + s + 2) mod n; invariant iff r + s = n - 2 mod n
inline int pullback_phase(int n, int r, int s) {
    if (s < 0 || s > n - 2 || r < 0) throw error("pullback_phase: need 0 <= s <= n-2, r >= 0");
    return ((r + s + 2) % n + n) % n;
}

// ----------------------------------------------------------- n=2 normal ---

struct N2NormalForm {
    double t = 0.0;     // gamma / |beta|
    double theta = 0.0; // beta = |beta| e^{2 i theta}
    bool reducible = false;
};

inline N2NormalForm n2_normal_form(const SpectralCurve& c, double tol = 1e-12) {
    if (c.n != 2 || !c.cyclic_form) throw error("n2_normal_form: n=2 cyclic curve required");
    if (std::abs(c.beta) == 0.0) throw error("n2_normal_form: |beta| = 0");
    N2NormalForm nf;
    nf.t = c.a[0] / std::abs(c.beta);
    nf.theta = 0.5 * std::arg(c.beta);
    nf.reducible = std::abs(std::abs(nf.t) - 2.0) <= tol;
    return nf;
}

// -------------------------------------------------------------- genus -----

struct GenusLedger {
    int n = 0;
    int g_cover = 0;    // (n-1)^2
    int g_quotient = 0; // n-1
    bool consistent = false;
};

inline GenusLedger genus_ledger(int n) {
    GenusLedger g;
    g.n = n;
    g.g_cover = (n - 1) * (n - 1);
    g.g_quotient = n - 1;
    g.consistent = (g.g_cover == n * (g.g_quotient - 1) + 1);
    return g;
}

} // namespace montoda
