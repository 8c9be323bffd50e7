#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "montoda/nahm_toda.hpp"

using namespace montoda;

namespace {

std::mt19937& rng() {
    static std::mt19937 gen(0x70dau);
    return gen;
}
double uni(double a = -1.0, double b = 1.0) { return std::uniform_real_distribution<double>(a, b)(rng()); }

TodaState random_state(int n, double amp = 0.8, double s = 0.5) {
    TodaState st = TodaState::zero(n, s);
    for (int i = 0; i < n; ++i) { st.q[static_cast<size_t>(i)] = uni(-amp, amp); st.p[static_cast<size_t>(i)] = uni(-amp, amp); }
    st.center();
    return st;
}

} // namespace

TEST_CASE("build_nahm matches the cyclic ansatz") {
    SECTION("n=2 zero state") {
        NahmTriple nm = build_nahm(TodaState::zero(2));
        CMatrix lplus = nm.t1 + cx(0.0, 1.0) * nm.t2;
        REQUIRE(std::abs(lplus(0, 1) - cx(1.0)) < 1e-15);
        REQUIRE(std::abs(lplus(1, 0) - cx(1.0)) < 1e-15);
        REQUIRE(std::abs(lplus(0, 0)) < 1e-15);
        CMatrix lminus = nm.t1 - cx(0.0, 1.0) * nm.t2;
        REQUIRE((lminus + lplus.transpose()).norm_inf() < 1e-15);
        REQUIRE(nm.t3.norm_inf() < 1e-15);
    }
    SECTION("n=3 exponent arithmetic") {
        TodaState st = TodaState::zero(3);
        st.q = {2.0 * std::log(2.0), 0.0, -2.0 * std::log(2.0)};
        NahmTriple nm = build_nahm(st);
        CMatrix lplus = nm.t1 + cx(0.0, 1.0) * nm.t2;
        REQUIRE(std::abs(lplus(0, 1) - cx(2.0)) < 1e-14); // e^{(q1-q2)/2} = e^{ln 2}
    }
    SECTION("anti-hermiticity for random states") {
        for (int n : {2, 3, 4, 5})
            for (int k = 0; k < 5; ++k)
                REQUIRE(build_nahm(random_state(n)).antihermiticity_violation() < 1e-12);
    }
}

TEST_CASE("hamiltonian values") {
    REQUIRE(hamiltonian(TodaState::zero(2)) == Catch::Approx(-2.0).margin(1e-15));
    REQUIRE(hamiltonian(TodaState::zero(3)) == Catch::Approx(-3.0).margin(1e-15));
    TodaState st = TodaState::zero(2);
    st.p = {1.0, -1.0};
    st.q = {std::log(2.0), -std::log(2.0)};
    REQUIRE(hamiltonian(st) == Catch::Approx(-3.25).margin(1e-14)); // 1 - (4 + 1/4)
}

TEST_CASE("toda_rhs is the Hamiltonian vector field of the affine Toda energy") {
    SECTION("equilibrium") {
        std::vector<double> dq, dp;
        toda_rhs(TodaState::zero(2), dq, dp);
        for (double v : dq) REQUIRE(std::abs(v) < 1e-15);
        for (double v : dp) REQUIRE(std::abs(v) < 1e-15);
    }
    SECTION("n=2 explicit") {
        // dp_1 = e^{q1-q2} - e^{q2-q1} = e^{2a} - e^{-2a}: the Hamiltonian flow
        // of H = p^2/2 - sum e^{q_i - q_{i+1}}, i.e. the flow under which the
        // ansatz matrices satisfy Nahm's equation
        TodaState st = TodaState::zero(2);
        double a = 0.37;
        st.q = {a, -a};
        std::vector<double> dq, dp;
        toda_rhs(st, dq, dp);
        REQUIRE(dp[0] == Catch::Approx(std::exp(2 * a) - std::exp(-2 * a)).margin(1e-14));
    }
    SECTION("finite-difference oracle, n=3") {
        TodaState st = random_state(3);
        std::vector<double> dq, dp;
        toda_rhs(st, dq, dp);
        const double h = 1e-6;
        for (int i = 0; i < 3; ++i) {
            TodaState plus = st, minus = st;
            plus.q[static_cast<size_t>(i)] += h;
            minus.q[static_cast<size_t>(i)] -= h;
            double grad = (hamiltonian(plus) - hamiltonian(minus)) / (2 * h);
            REQUIRE(std::abs(dp[static_cast<size_t>(i)] + grad) < 1e-6); // dp = -dH/dq
            TodaState pp = st, pm = st;
            pp.p[static_cast<size_t>(i)] += h;
            pm.p[static_cast<size_t>(i)] -= h;
            double gradp = (hamiltonian(pp) - hamiltonian(pm)) / (2 * h);
            REQUIRE(std::abs(dq[static_cast<size_t>(i)] - gradp) < 1e-6); // dq = +dH/dp
        }
    }
    SECTION("exponent guard") {
        TodaState st = TodaState::zero(2);
        st.q = {400.0, -400.0};
        std::vector<double> dq, dp;
        REQUIRE_THROWS_AS(toda_rhs(st, dq, dp), exponent_overflow_error);
    }
}

TEST_CASE("lax matrices and the trace identity") {
    SECTION("zero state values") {
        NahmTriple nm = build_nahm(TodaState::zero(2));
        auto [a0, m0] = lax(nm, cx(0.0));
        REQUIRE(std::abs(a0(0, 1) - cx(1.0)) < 1e-15);
        REQUIRE(std::abs(a0(1, 0) - cx(1.0)) < 1e-15);
        auto [a1, m1] = lax(nm, cx(1.0));
        REQUIRE(a1.norm_inf() < 1e-15); // (T1 - iT2) = -(T1 + iT2), T3 = 0
    }
    SECTION("half Tr A^2 = zeta^2 H (plus the constant Casimir pair at n=2)") {
        for (int n : {2, 3, 4, 5}) {
            for (int k = 0; k < 20; ++k) {
                TodaState st = random_state(n);
                NahmTriple nm = build_nahm(st);
                cx z(uni(), uni());
                CMatrix a = lax(nm, z).first;
                cx lhs = 0.5 * (a * a).trace();
                cx rhs = z * z * hamiltonian(st);
                if (n == 2) rhs += 1.0 + z * z * z * z;
                REQUIRE(std::abs(lhs - rhs) < 1e-10 * std::max(1.0, std::abs(lhs)));
            }
        }
    }
}

TEST_CASE("integrate conserves the Hamiltonian and the spectral curve") {
    SECTION("equilibrium stays put") {
        Trajectory tr = integrate(TodaState::zero(2, 0.5), 1.5, 1e-10);
        REQUIRE(tr.ode.reached_end);
        for (double v : tr.end().q) REQUIRE(std::abs(v) < 1e-12);
        for (double v : tr.end().p) REQUIRE(std::abs(v) < 1e-12);
        REQUIRE(tr.hamiltonian_drift < 1e-14);
    }
    SECTION("n=2 random orbit, H drift below 100 tol") {
        TodaState st = random_state(2, 0.7, 0.5);
        Trajectory tr = integrate(st, 1.5, 1e-10);
        REQUIRE(tr.ode.reached_end);
        REQUIRE(tr.hamiltonian_drift < 1e-8);
    }
    SECTION("isospectral flow: spectral coefficients constant") {
        for (int n : {2, 3}) {
            TodaState st = random_state(n, 0.6, 0.3);
            Trajectory tr = integrate(st, 1.7, 1e-10);
            REQUIRE(tr.ode.reached_end);
            auto curve_of = [](const TodaState& s) {
                NahmTriple nm = build_nahm(s);
                return bipoly_from_lax([&](cx z) { return lax(nm, z).first; }, s.n);
            };
            BiPoly p0 = curve_of(tr.start());
            BiPoly p1 = curve_of(tr.end());
            REQUIRE(approx_equal(p0, p1, 1e-8));
        }
    }
    SECTION("centering preserved") {
        TodaState st = random_state(3, 0.8, 0.4);
        Trajectory tr = integrate(st, 1.6, 1e-10);
        double sq = 0, sp = 0;
        for (double v : tr.end().q) sq += v;
        for (double v : tr.end().p) sp += v;
        REQUIRE(std::abs(sq) < 1e-12);
        REQUIRE(std::abs(sp) < 1e-12);
    }
    SECTION("anti-hermiticity preserved along the flow") {
        TodaState st = random_state(3, 0.6, 0.4);
        Trajectory tr = integrate(st, 1.4, 1e-10);
        for (const auto& s : tr.samples)
            REQUIRE(build_nahm(s).antihermiticity_violation() < 1e-10);
    }
}

TEST_CASE("Toda flow equals the Nahm commutator flow") {
    for (int n : {2, 3, 4}) {
        TodaState st = random_state(n, 0.5, 0.4);
        double s_end = st.s + 0.6;

        // matrix-side integration of dT_i/ds = (1/2) eps [T, T]
        NahmTriple start = build_nahm(st);
        int dim = 6 * n * n; // 3 complex matrices
        std::vector<double> y(static_cast<size_t>(dim));
        auto pack = [n](const NahmTriple& nm, std::vector<double>& out) {
            size_t idx = 0;
            for (int t = 0; t < 3; ++t)
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j) {
                        out[idx++] = nm.t(t)(i, j).real();
                        out[idx++] = nm.t(t)(i, j).imag();
                    }
        };
        auto unpack = [n](const std::vector<double>& in) {
            NahmTriple nm;
            nm.t1 = CMatrix(n); nm.t2 = CMatrix(n); nm.t3 = CMatrix(n);
            size_t idx = 0;
            CMatrix* ts[3] = {&nm.t1, &nm.t2, &nm.t3};
            for (int t = 0; t < 3; ++t)
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j) {
                        (*ts[t])(i, j) = cx(in[idx], in[idx + 1]);
                        idx += 2;
                    }
            return nm;
        };
        pack(start, y);
        auto rhs = [&](double, const std::vector<double>& yv, std::vector<double>& dy) {
            NahmTriple nm = unpack(yv);
            NahmTriple d;
            d.t1 = commutator(nm.t2, nm.t3);
            d.t2 = commutator(nm.t3, nm.t1);
            d.t3 = commutator(nm.t1, nm.t2);
            dy.resize(yv.size());
            pack(d, dy);
            return true;
        };
        OdeResult matrix_flow = dopri5(rhs, y, st.s, s_end, 1e-10);
        REQUIRE(matrix_flow.reached_end);
        NahmTriple nahm_end = unpack(matrix_flow.steps.back().y1);

        Trajectory toda = integrate(st, s_end, 1e-10);
        REQUIRE(toda.ode.reached_end);
        NahmTriple toda_end = build_nahm(toda.end());

        double worst = 0.0;
        for (int t = 0; t < 3; ++t) worst = std::max(worst, (nahm_end.t(t) - toda_end.t(t)).norm_inf());
        REQUIRE(worst < 1e-8);
    }
}

TEST_CASE("pole diagnostic on synthetic data") {
    SECTION("n=2 spin-1/2 residues") {
        // R_a = (i/2) sigma_a satisfies [R_i, R_j] = -eps_ijk R_k
        CMatrix r1(2), r2(2), r3(2);
        r1(0, 1) = cx(0.0, 0.5); r1(1, 0) = cx(0.0, 0.5);
        r2(0, 1) = cx(0.5); r2(1, 0) = cx(-0.5);
        r3(0, 0) = cx(0.0, 0.5); r3(1, 1) = cx(0.0, -0.5);
        double s_star = 1.3;
        auto sample = [&](double s) {
            NahmTriple nm;
            cx w = 1.0 / (s - s_star);
            nm.t1 = w * r1; nm.t2 = w * r2; nm.t3 = w * r3;
            nm.s = s;
            return nm;
        };
        PoleReport rep = pole_diagnostic(sample, s_star, 2);
        REQUIRE(rep.simple_pole_like);
        REQUIRE(rep.irreducible);
        REQUIRE(rep.closure_error < 1e-10);
        REQUIRE(std::abs(rep.weights[0] - 0.5) < 1e-8);
        REQUIRE(std::abs(rep.weights[1] + 0.5) < 1e-8);
    }
    SECTION("reducible 1+1 block reported as such") {
        auto sample = [&](double s) {
            NahmTriple nm;
            nm.t1 = CMatrix(2); nm.t2 = CMatrix(2); nm.t3 = CMatrix(2);
            nm.s = s;
            return nm; // R_i = 0: the trivial rep twice, weights {0, 0}
        };
        PoleReport rep = pole_diagnostic(sample, 2.0, 2);
        REQUIRE(rep.simple_pole_like);
        REQUIRE_FALSE(rep.irreducible);
        REQUIRE(std::abs(rep.weights[0]) < 1e-10);
        REQUIRE(std::abs(rep.weights[1]) < 1e-10);
    }
    SECTION("n=3 spin-1 residues") {
        // R_a = i J_a with J3 = diag(1, 0, -1)
        CMatrix j1(3), j2(3), j3(3);
        double r2v = std::sqrt(2.0) / 2.0;
        j1(0, 1) = r2v; j1(1, 0) = r2v; j1(1, 2) = r2v; j1(2, 1) = r2v;
        j2(0, 1) = cx(0.0, -r2v); j2(1, 0) = cx(0.0, r2v);
        j2(1, 2) = cx(0.0, -r2v); j2(2, 1) = cx(0.0, r2v);
        j3(0, 0) = 1.0; j3(2, 2) = -1.0;
        double s_star = 0.9;
        auto sample = [&](double s) {
            NahmTriple nm;
            cx w = cx(0.0, 1.0) / (s - s_star);
            nm.t1 = w * j1; nm.t2 = w * j2; nm.t3 = w * j3;
            nm.s = s;
            return nm;
        };
        PoleReport rep = pole_diagnostic(sample, s_star, 3);
        REQUIRE(rep.simple_pole_like);
        REQUIRE(rep.irreducible);
        REQUIRE(std::abs(rep.weights[0] - 1.0) < 1e-8);
        REQUIRE(std::abs(rep.weights[1]) < 1e-8);
        REQUIRE(std::abs(rep.weights[2] + 1.0) < 1e-8);
    }
    SECTION("non-pole data flagged, no weights guessed") {
        auto sample = [&](double s) { return build_nahm(TodaState::zero(2, s)); };
        PoleReport rep = pole_diagnostic(sample, 2.0, 2);
        REQUIRE_FALSE(rep.simple_pole_like);
    }
}

TEST_CASE("blow-up detection and trajectory diagnostic") {
    // an n=2 orbit with enough energy runs into the Toda blow-up
    TodaState st = TodaState::zero(2, 0.1);
    st.q = {1.2, -1.2};
    st.p = {2.0, -2.0};
    Trajectory tr = integrate(st, 40.0, 1e-11);
    REQUIRE_FALSE(tr.ode.reached_end);
    REQUIRE(tr.blew_up);
    REQUIRE(tr.s_star > tr.ode.s_stop);

    PoleReport rep = pole_diagnostic(tr, 1e-12);
    REQUIRE(rep.simple_pole_like);
    // residues of a genuine charge-2 blow-up carry the spin-1/2 weights
    REQUIRE(std::abs(rep.weights[0] - 0.5) < 1e-3);
    REQUIRE(std::abs(rep.weights[1] + 0.5) < 1e-3);
}

TEST_CASE("trajectory CSV export") {
    TodaState st = TodaState::zero(2, 0.5);
    st.q = {0.2, -0.2};
    st.center();
    Trajectory tr = integrate(st, 0.9, 1e-9);
    std::ostringstream os;
    write_trajectory_csv(tr, os);
    std::string text = os.str();
    REQUIRE(text.substr(0, text.find('\n')) == "s,q_1,q_2,p_1,p_2,H");
    size_t lines = static_cast<size_t>(std::count(text.begin(), text.end(), '\n'));
    REQUIRE(lines == tr.samples.size() + 1);
}

TEST_CASE("reflection-symmetry diagnostic") {
    // arbitrary orbits report a finite defect; intervals not centered on
    // s = 1 are rejected
    TodaState st = TodaState::zero(2, 0.4);
    st.q = {0.3, -0.3};
    st.center();
    Trajectory tr = integrate(st, 1.6, 1e-10);
    double d = nahm_symmetry_defect(tr);
    REQUIRE(std::isfinite(d));
    REQUIRE(d > 0.0); // generic orbits are not reflection symmetric

    Trajectory off = integrate(st, 1.3, 1e-10);
    REQUIRE_THROWS_AS(nahm_symmetry_defect(off), error);
}
