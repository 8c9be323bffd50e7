// Sutcliffe's cyclic ansatz, the affine Toda flow and the Nahm/Lax structure.
//
// The ansatz places e^{(q_i - q_{i+1})/2} on the cyclic superdiagonal of
// T1 + iT2, its negated transpose in T1 - iT2, and T3 = -(i/2) diag(p).
// Nahm's equation dT_i/ds = (1/2) eps_{ijk} [T_j, T_k] is then the
// Hamiltonian flow of
//
//   H = (1/2) sum p_i^2 - sum e^{q_i - q_{i+1}}   (cyclic),
//
// i.e. dq_i = p_i, dp_i = e^{q_i - q_{i+1}} - e^{q_{i-1} - q_i}.
//
// The Lax pair is A(z) = (T1+iT2) - 2i T3 z + (T1-iT2) z^2,
// M(z) = -i T3 + (T1-iT2) z, and (1/2) Tr A(z)^2 = z^2 H for n >= 3;
// for n = 2 the two constant Casimir terms 1 + z^4 of the ansatz appear
// as well (they are the beta-moduli of the spectral curve, not functions
// on phase space).

#pragma once

#include <fstream>
#include <sstream>

#include "montoda/algebra.hpp"

namespace montoda {

struct TodaState {
    int n = 2;
    std::vector<double> q, p;
    double s = 0.0;

    static TodaState zero(int n, double s = 0.0) {
        TodaState st;
        st.n = n;
        st.q.assign(static_cast<size_t>(n), 0.0);
        st.p.assign(static_cast<size_t>(n), 0.0);
        st.s = s;
        return st;
    }

    void center() {
        double mq = 0.0, mp = 0.0;
        for (int i = 0; i < n; ++i) { mq += q[static_cast<size_t>(i)]; mp += p[static_cast<size_t>(i)]; }
        for (int i = 0; i < n; ++i) { q[static_cast<size_t>(i)] -= mq / n; p[static_cast<size_t>(i)] -= mp / n; }
    }
};

struct NahmTriple {
    CMatrix t1, t2, t3;
    double s = 0.0;

    const CMatrix& t(int i) const { return i == 0 ? t1 : (i == 1 ? t2 : t3); }

    double antihermiticity_violation() const {
        double v = 0.0;
        v = std::max(v, (t1 + t1.dagger()).norm_inf());
        v = std::max(v, (t2 + t2.dagger()).norm_inf());
        v = std::max(v, (t3 + t3.dagger()).norm_inf());
        return v;
    }
};

// |q_i - q_j| guard keeping exp() within double range with headroom.
inline constexpr double toda_exponent_guard = 690.0;

inline void check_exponent_guard(const TodaState& st) {
    for (int i = 0; i < st.n; ++i) {
        double d = st.q[static_cast<size_t>(i)] - st.q[static_cast<size_t>((i + 1) % st.n)];
        if (std::abs(d) > toda_exponent_guard)
            throw exponent_overflow_error("toda: |q_i - q_{i+1}| exceeds exponent guard (blow-up proximity)");
    }
}

inline NahmTriple build_nahm(const TodaState& st) {
    int n = st.n;
    if (n < 2) throw error("build_nahm: charge must be >= 2");
    CMatrix l0(n);
    for (int i = 0; i < n; ++i) {
        int j = (i + 1) % n;
        l0(i, j) = std::exp((st.q[static_cast<size_t>(i)] - st.q[static_cast<size_t>(j)]) / 2.0);
    }
    CMatrix l0t = l0.transpose();
    NahmTriple nm;
    nm.s = st.s;
    nm.t1 = cx(0.5) * (l0 - l0t);
    nm.t2 = cx(0.0, -0.5) * (l0 + l0t);
    nm.t3 = CMatrix(n);
    for (int i = 0; i < n; ++i) nm.t3(i, i) = cx(0.0, -0.5) * st.p[static_cast<size_t>(i)];
    return nm;
}

inline double hamiltonian(const TodaState& st) {
    check_exponent_guard(st);
    double h = 0.0;
    for (int i = 0; i < st.n; ++i) h += 0.5 * sqr(st.p[static_cast<size_t>(i)]);
    for (int i = 0; i < st.n; ++i)
        h -= std::exp(st.q[static_cast<size_t>(i)] - st.q[static_cast<size_t>((i + 1) % st.n)]);
    return h;
}

inline void toda_rhs(const TodaState& st, std::vector<double>& dq, std::vector<double>& dp) {
    check_exponent_guard(st);
    int n = st.n;
    dq.resize(static_cast<size_t>(n));
    dp.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) dq[static_cast<size_t>(i)] = st.p[static_cast<size_t>(i)];
    for (int i = 0; i < n; ++i) {
        double fwd = std::exp(st.q[static_cast<size_t>(i)] - st.q[static_cast<size_t>((i + 1) % n)]);
        double bwd = std::exp(st.q[static_cast<size_t>((i - 1 + n) % n)] - st.q[static_cast<size_t>(i)]);
        dp[static_cast<size_t>(i)] = fwd - bwd;
    }
}

inline std::pair<CMatrix, CMatrix> lax(const NahmTriple& nm, cx zeta) {
    CMatrix lplus = nm.t1 + cx(0.0, 1.0) * nm.t2;
    CMatrix lminus = nm.t1 - cx(0.0, 1.0) * nm.t2;
    CMatrix a = lplus - (cx(0.0, 2.0) * zeta) * nm.t3 + (zeta * zeta) * lminus;
    CMatrix m = cx(0.0, -1.0) * nm.t3 + zeta * lminus;
    return {a, m};
}

// ----------------------------------------------------------- integrator ---

// Dormand-Prince 5(4) embedded pair on a flat double vector.
struct Dopri5Step {
    double s0 = 0.0, s1 = 0.0;
    std::vector<double> y0, y1, f0, f1; // endpoint values and derivatives (cubic Hermite dense output)
};

struct OdeResult {
    std::vector<Dopri5Step> steps;
    bool reached_end = false;
    double s_stop = 0.0;
    size_t n_accepted = 0, n_rejected = 0;
};

// rhs(s, y, dy) returns false to signal blow-up proximity (guard tripped).
template <typename Rhs>
OdeResult dopri5(const Rhs& rhs, std::vector<double> y, double s0, double s1, double tol) {
    static const double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static const double a21 = 1.0 / 5;
    static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                        a65 = -5103.0 / 18656;
    static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static const double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                        e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                        e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

    size_t dim = y.size();
    OdeResult out;
    double dir = (s1 >= s0) ? 1.0 : -1.0;
    double s = s0;
    double h = dir * std::min(1e-2, std::abs(s1 - s0));

    std::vector<double> k1(dim), k2(dim), k3(dim), k4(dim), k5(dim), k6(dim), k7(dim), yt(dim), y5(dim);
    if (!rhs(s, y, k1)) { out.s_stop = s; return out; }

    int stall = 0;
    while (dir * (s1 - s) > 0.0) {
        if (dir * (s + h - s1) > 0.0) h = s1 - s;
        bool ok = true;
        for (size_t i = 0; i < dim; ++i) yt[i] = y[i] + h * a21 * k1[i];
        ok = ok && rhs(s + c2 * h, yt, k2);
        if (ok) {
            for (size_t i = 0; i < dim; ++i) yt[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
            ok = rhs(s + c3 * h, yt, k3);
        }
        if (ok) {
            for (size_t i = 0; i < dim; ++i) yt[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
            ok = rhs(s + c4 * h, yt, k4);
        }
        if (ok) {
            for (size_t i = 0; i < dim; ++i)
                yt[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
            ok = rhs(s + c5 * h, yt, k5);
        }
        if (ok) {
            for (size_t i = 0; i < dim; ++i)
                yt[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
            ok = rhs(s + h, yt, k6);
        }
        if (ok) {
            for (size_t i = 0; i < dim; ++i)
                y5[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
            ok = rhs(s + h, y5, k7);
        }
        if (!ok) {
            h *= 0.25;
            if (std::abs(h) < 1e-14 * std::max(1.0, std::abs(s)) || ++stall > 200) {
                out.s_stop = s;
                return out; // blow-up: step collapsed under the guard
            }
            continue;
        }

        double err = 0.0;
        for (size_t i = 0; i < dim; ++i) {
            double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
            double sc = tol * (1.0 + std::abs(y[i]));
            err += sqr(e / sc);
        }
        err = std::sqrt(err / static_cast<double>(dim));

        if (err <= 1.0) {
            Dopri5Step st;
            st.s0 = s; st.s1 = s + h;
            st.y0 = y; st.f0 = k1;
            st.y1 = y5; st.f1 = k7;
            out.steps.push_back(std::move(st));
            s += h;
            y = y5;
            k1 = k7; // FSAL
            ++out.n_accepted;
            stall = 0;
        } else {
            ++out.n_rejected;
        }
        double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
        h *= std::min(5.0, std::max(0.2, fac));
        if (std::abs(h) < 1e-14 * std::max(1.0, std::abs(s))) {
            out.s_stop = s;
            return out;
        }
    }
    out.reached_end = true;
    out.s_stop = s;
    return out;
}

inline std::vector<double> hermite_eval(const Dopri5Step& st, double s) {
    double h = st.s1 - st.s0;
    double t = (s - st.s0) / h;
    double h00 = (1 + 2 * t) * sqr(1 - t), h10 = t * sqr(1 - t), h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
    std::vector<double> y(st.y0.size());
    for (size_t i = 0; i < y.size(); ++i)
        y[i] = h00 * st.y0[i] + h * h10 * st.f0[i] + h01 * st.y1[i] + h * h11 * st.f1[i];
    return y;
}

// ----------------------------------------------------------- trajectory ---

struct Trajectory {
    int n = 0;
    std::vector<TodaState> samples;     // accepted integration knots
    OdeResult ode;
    bool blew_up = false;
    double s_star = 0.0;                // estimated blow-up parameter when blew_up
    double hamiltonian_drift = 0.0;

    const TodaState& start() const { return samples.front(); }
    const TodaState& end() const { return samples.back(); }

    // dense evaluation via cubic Hermite on the accepted steps
    TodaState at(double s) const {
        for (const auto& st : ode.steps) {
            if ((s >= std::min(st.s0, st.s1) - 1e-15) && (s <= std::max(st.s0, st.s1) + 1e-15)) {
                std::vector<double> y = hermite_eval(st, s);
                return unpack(n, y, s);
            }
        }
        throw error("Trajectory::at: parameter outside integrated range");
    }

    static TodaState unpack(int n, const std::vector<double>& y, double s) {
        TodaState st;
        st.n = n;
        st.s = s;
        st.q.assign(y.begin(), y.begin() + n);
        st.p.assign(y.begin() + n, y.begin() + 2 * n);
        return st;
    }
};

inline Trajectory integrate(const TodaState& start, double s_end, double tol) {
    int n = start.n;
    std::vector<double> y(static_cast<size_t>(2 * n));
    for (int i = 0; i < n; ++i) { y[static_cast<size_t>(i)] = start.q[static_cast<size_t>(i)]; y[static_cast<size_t>(n + i)] = start.p[static_cast<size_t>(i)]; }

    auto rhs = [n](double s, const std::vector<double>& yv, std::vector<double>& dy) -> bool {
        (void)s;
        TodaState st = Trajectory::unpack(n, yv, 0.0);
        for (int i = 0; i < n; ++i) {
            double d = st.q[static_cast<size_t>(i)] - st.q[static_cast<size_t>((i + 1) % n)];
            if (std::abs(d) > toda_exponent_guard) return false;
        }
        std::vector<double> dq, dp;
        toda_rhs(st, dq, dp);
        dy.resize(static_cast<size_t>(2 * n));
        for (int i = 0; i < n; ++i) { dy[static_cast<size_t>(i)] = dq[static_cast<size_t>(i)]; dy[static_cast<size_t>(n + i)] = dp[static_cast<size_t>(i)]; }
        return true;
    };

    Trajectory tr;
    tr.n = n;
    tr.ode = dopri5(rhs, y, start.s, s_end, tol);
    tr.samples.push_back(start);
    for (const auto& st : tr.ode.steps) tr.samples.push_back(Trajectory::unpack(n, st.y1, st.s1));
    tr.blew_up = !tr.ode.reached_end;

    if (tr.blew_up) {
        // the step size collapses at the pole, so s_stop sits within roundoff
        // of s*; the leading Toda asymptotics p_max ~ 1/(s* - s) give the
        // remaining offset
        const TodaState& last = tr.samples.back();
        double pmax = 0.0;
        for (double v : last.p) pmax = std::max(pmax, std::abs(v));
        tr.s_star = last.s + ((pmax > 1e-8) ? 1.0 / pmax : 0.0);
        if (tr.s_star <= tr.ode.s_stop) tr.s_star = tr.ode.s_stop + 1e-15;
    }

    double h0 = hamiltonian(tr.samples.front());
    for (const auto& st : tr.samples)
        tr.hamiltonian_drift = std::max(tr.hamiltonian_drift, std::abs(hamiltonian(st) - h0));
    return tr;
}

inline void write_trajectory_csv(const Trajectory& tr, std::ostream& os) {
    os << "s";
    for (int i = 1; i <= tr.n; ++i) os << ",q_" << i;
    for (int i = 1; i <= tr.n; ++i) os << ",p_" << i;
    os << ",H\n";
    char buf[64];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        os << buf;
    };
    for (const auto& st : tr.samples) {
        put(st.s);
        for (double v : st.q) { os << ","; put(v); }
        for (double v : st.p) { os << ","; put(v); }
        os << ",";
        put(hamiltonian(st));
        os << "\n";
    }
}

// Defect of the reflection symmetry T_i(s) = T_i^t(2 - s) over a trajectory
// spanning an interval symmetric about s = 1. True monopole boundary
// solutions satisfy it; arbitrary Toda orbits need not, so this is a
// diagnostic, not a constraint of the integrator.
inline double nahm_symmetry_defect(const Trajectory& tr, int probes = 17) {
    double s0 = tr.start().s, s1 = tr.end().s;
    if (std::abs((s0 + s1) - 2.0) > 1e-9)
        throw error("nahm_symmetry_defect: trajectory must span an interval symmetric about s = 1");
    double defect = 0.0;
    for (int k = 0; k < probes; ++k) {
        double s = s0 + (s1 - s0) * k / (probes - 1.0);
        NahmTriple a = build_nahm(tr.at(s));
        NahmTriple b = build_nahm(tr.at(s0 + s1 - s));
        for (int t = 0; t < 3; ++t)
            defect = std::max(defect, (a.t(t) - b.t(t).transpose()).norm_inf());
    }
    return defect;
}

// ------------------------------------------------------- pole diagnostic --

// Fit T_i(s) ~ R_i / (s - s*) near a blow-up and classify the residues.
//
// Convention: residues of a genuine Nahm pole close under
// [R_i, R_j] = -eps_{ijk} R_k, so J_i := -i R_i is an su(2) representation
// and the reported weights are the eigenvalues of J_3 = -i R_3; an
// irreducible charge-n pole carries {(n-1)/2, (n-3)/2, ..., -(n-1)/2}.
struct PoleReport {
    double s_star = 0.0;
    std::vector<double> weights;       // eigenvalues of -i R_3, descending
    double closure_error = 0.0;        // max_i ||[R_i,R_j] + eps_ijk R_k||_F
    double fit_residual = 0.0;         // relative LSQ misfit of the simple-pole model
    bool simple_pole_like = false;
    bool irreducible = false;
    std::vector<CMatrix> residues;
};

namespace detail {

inline std::vector<double> pole_ladder() { return {1e-2, 3.1622776601683794e-3, 1e-3, 3.1622776601683794e-4, 1e-4}; }

struct ResidueFit {
    std::vector<CMatrix> residues;
    double misfit = 0.0;        // relative LSQ misfit
    double pole_strength = 0.0; // |R| / (|R| + d_max |C|): ~1 for a pole, ~0 for regular data
};

// least squares of (s-s*) T(s) = R + C (s-s*) over the ladder
inline ResidueFit fit_residues(const std::function<NahmTriple(double)>& sample, double s_star, int n) {
    auto ds = pole_ladder();
    size_t m = ds.size();
    // normal equations for [1, d] design, shared across entries
    double s11 = static_cast<double>(m), s1d = 0.0, sdd = 0.0;
    for (double d : ds) { s1d += -d; sdd += d * d; } // s - s* = -d approaching from below
    std::vector<NahmTriple> vals;
    vals.reserve(m);
    for (double d : ds) vals.push_back(sample(s_star - d));

    ResidueFit fit;
    fit.residues.assign(3, CMatrix(n));
    double misfit = 0.0, scale = 0.0, rnorm = 0.0, cnorm = 0.0;
    double det2 = s11 * sdd - s1d * s1d;
    for (int t = 0; t < 3; ++t) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                cx b1(0.0), bd(0.0);
                for (size_t k = 0; k < m; ++k) {
                    double d = ds[k];
                    cx v = (-d) * vals[k].t(t)(i, j);
                    b1 += v;
                    bd += (-d) * v;
                }
                cx r = (sdd * b1 - s1d * bd) / det2;
                cx c = (s11 * bd - s1d * b1) / det2;
                fit.residues[static_cast<size_t>(t)](i, j) = r;
                rnorm += std::norm(r);
                cnorm += std::norm(c);
                for (size_t k = 0; k < m; ++k) {
                    double d = ds[k];
                    cx v = (-d) * vals[k].t(t)(i, j);
                    misfit += std::norm(v - (r + c * (-d)));
                    scale += std::norm(v);
                }
            }
    }
    fit.misfit = std::sqrt(misfit / std::max(scale, 1e-300));
    double denom = std::sqrt(rnorm) + ds.front() * std::sqrt(cnorm);
    fit.pole_strength = (denom == 0.0) ? 1.0 : std::sqrt(rnorm) / denom; // zero data: R = 0 pole
    return fit;
}

} // namespace detail

inline PoleReport pole_diagnostic(const std::function<NahmTriple(double)>& sample, double s_star_hint, int n,
                                  bool refine_s_star = false) {
    PoleReport rep;
    rep.s_star = s_star_hint;
    bool hint_fits = false;
    if (refine_s_star) {
        try {
            hint_fits = detail::fit_residues(sample, s_star_hint, n).misfit < 1e-3;
        } catch (const error&) {
            hint_fits = false;
        }
    }
    if (refine_s_star && !hint_fits) {
        // golden-section on the fit residual around the hint
        double lo = s_star_hint - 5e-3, hi = s_star_hint + 5e-3;
        const double gr = 0.6180339887498949;
        double a = lo, b = hi;
        double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
        auto fr = [&](double ss) {
            try {
                return detail::fit_residues(sample, ss, n).misfit;
            } catch (const error&) {
                return 1e99; // candidate pole beyond the reachable range
            }
        };
        double f1 = fr(x1), f2 = fr(x2);
        for (int it = 0; it < 60; ++it) {
            if (f1 < f2) { b = x2; x2 = x1; f2 = f1; x1 = b - gr * (b - a); f1 = fr(x1); }
            else        { a = x1; x1 = x2; f1 = f2; x2 = a + gr * (b - a); f2 = fr(x2); }
        }
        rep.s_star = 0.5 * (a + b);
    }

    detail::ResidueFit fit = detail::fit_residues(sample, rep.s_star, n);
    rep.residues = fit.residues;
    rep.fit_residual = fit.misfit;
    rep.simple_pole_like = fit.misfit < 1e-3 && fit.pole_strength > 1e-3;
    if (!rep.simple_pole_like) return rep; // do not guess weights from a bad fit

    const auto& res = rep.residues;
    double rscale = std::max({res[0].norm_fro(), res[1].norm_fro(), res[2].norm_fro(), 1e-30});
    double ce = 0.0;
    ce = std::max(ce, (commutator(res[0], res[1]) + res[2]).norm_fro());
    ce = std::max(ce, (commutator(res[1], res[2]) + res[0]).norm_fro());
    ce = std::max(ce, (commutator(res[2], res[0]) + res[1]).norm_fro());
    rep.closure_error = ce / rscale;

    CMatrix j3 = cx(0.0, -1.0) * res[2];
    std::vector<cx> ev = eigenvalues(j3);
    rep.weights.resize(ev.size());
    for (size_t k = 0; k < ev.size(); ++k) rep.weights[k] = ev[k].real();
    std::sort(rep.weights.rbegin(), rep.weights.rend());

    rep.irreducible = true;
    for (int k = 0; k < n; ++k) {
        double expect = (n - 1) / 2.0 - k;
        if (std::abs(rep.weights[static_cast<size_t>(k)] - expect) > 1e-4) rep.irreducible = false;
    }
    return rep;
}

// Diagnose a Toda trajectory flagged as blowing up: re-integrates from the
// last safe knot to each ladder point.
inline PoleReport pole_diagnostic(const Trajectory& tr, double tol = 1e-12) {
    if (!tr.blew_up) throw error("pole_diagnostic: trajectory did not blow up");
    auto sample = [&tr, tol](double s) -> NahmTriple {
        // find latest knot with knot.s <= s (assumes forward integration)
        const TodaState* base = &tr.samples.front();
        for (const auto& st : tr.samples)
            if (st.s <= s) base = &st;
        if (std::abs(base->s - s) < 1e-15) return build_nahm(*base);
        Trajectory seg = integrate(*base, s, tol);
        if (seg.blew_up) throw error("pole_diagnostic: cannot reach ladder point before blow-up");
        return build_nahm(seg.end());
    };
    return pole_diagnostic(sample, tr.s_star, tr.n, /*refine_s_star=*/true);
}

} // namespace montoda
