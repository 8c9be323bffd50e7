// mono: batch driver for the cyclic-monopole / affine-Toda laboratory.
//
//   mono simulate --config <file> --out <dir>   Toda flow + invariant report
//   mono curve    --config <file> --out <dir>   spectral curve, reality, quotient
//   mono periods  --config <file> --out <dir>   period matrices of the quotient
//   mono es       --config <file> --out <dir>   Ercolani-Sinha solve + half-period check
//   mono theta    --config <file> --out <dir>   Fay-Accola constancy / H3 scan
//
// Exit codes: 0 success, 1 invariant violation, 2 config error, 3 reality
// violation, 4 reducible/degenerate curve, 5 infeasible ES data, 6 indefinite
// imaginary part.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include <CLI11.hpp>
#include <json.hpp>

#include "montoda/curves.hpp"
#include "montoda/io.hpp"
#include "montoda/riemann.hpp"
#include "montoda/theta.hpp"

using namespace montoda;
namespace fs = std::filesystem;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_invariant = 1;
constexpr int exit_config = 2;
constexpr int exit_reality = 3;
constexpr int exit_degenerate = 4;
constexpr int exit_es_infeasible = 5;
constexpr int exit_indefinite = 6;

struct Options {
    std::string config;
    std::string out;
};

Config load_config(const Options& opt) {
    if (!fs::exists(opt.config)) throw error("config file does not exist: " + opt.config);
    return Config::parse_file(opt.config);
}

void ensure_outdir(const Options& opt) { fs::create_directories(opt.out); }

// curve from [curve] section or an external JSON file ({n, a, beta} cyclic
// schema or {n, coeffs} general BiPoly schema)
SpectralCurve curve_from_config(const Config& cfg) {
    std::string file = cfg.get_string("curve.file");
    if (!file.empty()) {
        if (!fs::exists(file)) throw error("curve.file does not exist: " + file);
        std::ifstream in(file);
        nlohmann::json j;
        in >> j;
        int n = j.at("n").get<int>();
        if (j.contains("coeffs")) {
            std::vector<CPoly> coeffs;
            for (const auto& row : j.at("coeffs")) {
                std::vector<cx> c;
                for (const auto& entry : row)
                    c.emplace_back(entry.at("re").get<double>(), entry.at("im").get<double>());
                coeffs.emplace_back(std::move(c));
            }
            return SpectralCurve::from_bipoly(n, BiPoly(std::move(coeffs)));
        }
        std::vector<double> a = j.at("a").get<std::vector<double>>();
        cx beta(j.at("beta").at("re").get<double>(), j.at("beta").at("im").get<double>());
        return SpectralCurve::cyclic(n, a, beta);
    }
    int n = cfg.require_int("curve.n");
    std::vector<double> a = cfg.get_double_list("curve.a");
    if (static_cast<int>(a.size()) != n - 1) throw error("config: curve.a must list a_2..a_n");
    cx beta(cfg.get_double("curve.beta_re", 1.0), cfg.get_double("curve.beta_im", 0.0));
    return SpectralCurve::cyclic(n, a, beta);
}

std::string curve_json(const SpectralCurve& c) {
    JsonWriter w;
    w.field("n", c.n);
    if (c.cyclic_form) {
        w.field("a", c.a);
        w.field("beta", c.beta);
    }
    std::ostringstream coeffs;
    coeffs << '[';
    for (int i = 0; i <= c.P.eta_degree(); ++i) {
        coeffs << (i ? ",[" : "[");
        const CPoly& p = c.P.eta_coeff(i);
        for (int j = 0; j <= std::max(0, p.degree()); ++j) {
            cx v = p.coeff(j);
            coeffs << (j ? "," : "") << "{\"re\":" << JsonWriter::num(v.real())
                   << ",\"im\":" << JsonWriter::num(v.imag()) << "}";
        }
        coeffs << ']';
    }
    coeffs << ']';
    w.raw_field("coeffs", coeffs.str());
    return w.str();
}

int cmd_simulate(const Options& opt) {
    Config cfg = load_config(opt);
    int n = cfg.require_int("toda.n");
    if (n < 2) throw error("config: toda.n must be >= 2");
    TodaState st = TodaState::zero(n, cfg.get_double("toda.s0", 0.5));
    std::vector<double> q = cfg.get_double_list("toda.q");
    std::vector<double> p = cfg.get_double_list("toda.p");
    if (static_cast<int>(q.size()) != n || static_cast<int>(p.size()) != n)
        throw error("config: toda.q and toda.p must list n values");
    st.q = q;
    st.p = p;
    double s1 = cfg.get_double("toda.s1", 1.5);
    double tol = cfg.get_double("toda.tol", 1e-10);
    if (tol <= 0) throw error("config: toda.tol must be positive");

    Trajectory tr = integrate(st, s1, tol);

    ensure_outdir(opt);
    {
        std::ofstream csv(fs::path(opt.out) / "trajectory.csv");
        write_trajectory_csv(tr, csv);
    }

    // Invariant drifts along the flow, measured relative to the local
    // magnitude scale: near the Nahm pole the exponentials reach exp-scale
    // values whose conserved combinations carry matching roundoff, so raw
    // absolute drift is meaningless there.
    auto potential_scale = [](const TodaState& s) {
        double v = 1.0;
        for (int i = 0; i < s.n; ++i)
            v = std::max(v, std::exp(s.q[static_cast<size_t>(i)] - s.q[static_cast<size_t>((i + 1) % s.n)]));
        for (double pv : s.p) v = std::max(v, pv * pv);
        return v;
    };
    auto curve_of = [](const TodaState& s) {
        NahmTriple nm = build_nahm(s);
        return bipoly_from_lax([&](cx z) { return lax(nm, z).first; }, s.n);
    };
    double h_drift = 0.0, spectral_drift = 0.0, antiherm = 0.0;
    double h0 = hamiltonian(tr.start());
    BiPoly p0 = curve_of(tr.start());
    size_t stride = std::max<size_t>(1, tr.samples.size() / 16);
    for (size_t k = 0; k < tr.samples.size(); ++k) {
        const TodaState& s = tr.samples[k];
        antiherm = std::max(antiherm, build_nahm(s).antihermiticity_violation());
        double cond = potential_scale(s);
        h_drift = std::max(h_drift, std::abs(hamiltonian(s) - h0) / cond);
        if (k % stride == 0 || k + 1 == tr.samples.size()) {
            BiPoly pk = curve_of(s);
            double ccond = std::max(cond, std::max(p0.max_abs_coeff(), pk.max_abs_coeff()));
            for (int i = 0; i <= std::max(p0.eta_degree(), pk.eta_degree()); ++i) {
                int dz = std::max(p0.eta_coeff(i).degree(), pk.eta_coeff(i).degree());
                for (int j = 0; j <= dz; ++j)
                    spectral_drift = std::max(
                        spectral_drift, std::abs(p0.eta_coeff(i).coeff(j) - pk.eta_coeff(i).coeff(j)) / ccond);
            }
        }
    }

    JsonWriter w;
    w.field("n", n);
    w.field("reached_end", tr.ode.reached_end);
    w.field("blew_up", tr.blew_up);
    if (tr.blew_up) w.field("s_star", tr.s_star);
    if (tr.ode.reached_end && std::abs(st.s + s1 - 2.0) < 1e-9)
        w.field("reflection_symmetry_defect", nahm_symmetry_defect(tr));
    w.field("hamiltonian_drift", h_drift);
    w.field("spectral_drift", spectral_drift);
    w.field("antihermiticity_drift", antiherm);
    w.field("steps_accepted", static_cast<long>(tr.ode.n_accepted));
    write_text_file((fs::path(opt.out) / "simulate_report.json").string(), w.str() + "\n");

    bool violated = h_drift > 100.0 * tol || spectral_drift > 1e-8 || antiherm > 1e-10;
    return violated ? exit_invariant : exit_ok;
}

int cmd_curve(const Options& opt) {
    Config cfg = load_config(opt);
    SpectralCurve c = curve_from_config(cfg);

    RealityReport reality = check_reality(c);
    GenusLedger gl = genus_ledger(c.n);

    JsonWriter w;
    w.raw_field("spectral", curve_json(c));
    {
        JsonWriter r;
        r.field("ok", reality.ok);
        r.field("max_violation", reality.max_violation);
        w.raw_field("reality", r.str());
    }
    {
        JsonWriter g;
        g.field("n", gl.n);
        g.field("g_cover", gl.g_cover);
        g.field("g_quotient", gl.g_quotient);
        g.field("consistent", gl.consistent);
        w.raw_field("genus_ledger", g.str());
    }

    if (!reality.ok) {
        ensure_outdir(opt);
        write_text_file((fs::path(opt.out) / "curve.json").string(), w.str() + "\n");
        std::cerr << "mono curve: reality condition violated (max " << reality.max_violation << ")\n";
        return exit_reality;
    }
    if (!c.cyclic_form) throw error("curve is real but not in cyclic form; quotient undefined");

    if (c.n == 2) {
        N2NormalForm nf = n2_normal_form(c);
        JsonWriter nw;
        nw.field("t", nf.t);
        nw.field("theta", nf.theta);
        nw.field("reducible", nf.reducible);
        if (!nf.reducible) {
            // shape of the quotient quartic, t' = 2t/sqrt(t^2-4)
            double tp = 2.0 * nf.t / std::sqrt(nf.t * nf.t - 4.0);
            nw.field("t_prime", tp);
        }
        w.raw_field("n2_normal_form", nw.str());
    }

    HyperellipticCurve h = quotient(c); // throws degenerate_curve_error when reducible
    {
        JsonWriter qw;
        std::vector<cx> fc;
        for (int k = 0; k <= h.f.degree(); ++k) fc.push_back(h.f.coeff(k));
        qw.field("f_coeffs", fc);
        qw.field("genus", h.genus);
        qw.field("beta_abs", h.beta_abs);
        w.raw_field("quotient", qw.str());
    }

    ensure_outdir(opt);
    write_text_file((fs::path(opt.out) / "curve.json").string(), w.str() + "\n");
    return exit_ok;
}

int cmd_periods(const Options& opt) {
    Config cfg = load_config(opt);
    SpectralCurve c = curve_from_config(cfg);
    if (!check_reality(c).ok) return exit_reality;
    double tol = cfg.get_double("periods.tol", 1e-11);
    if (tol <= 0) throw error("config: periods.tol must be positive");

    HyperellipticCurve h = quotient(c);
    CurveEngine eng(h);
    PeriodData pd = periods(eng, tol, /*verify=*/true);

    JsonWriter w;
    w.field("genus", pd.g);
    w.raw_field("A", JsonWriter::matrix(pd.A));
    w.raw_field("B", JsonWriter::matrix(pd.B));
    w.raw_field("tau", JsonWriter::matrix(pd.tau));
    w.raw_field("A_cyclic", JsonWriter::matrix(pd.Ac));
    w.raw_field("B_cyclic", JsonWriter::matrix(pd.Bc));
    w.raw_field("tau_cyclic", JsonWriter::matrix(pd.tau_c));
    w.field("errest", pd.err_estimate);
    ensure_outdir(opt);
    write_text_file((fs::path(opt.out) / "periods.json").string(), w.str() + "\n");
    return exit_ok;
}

int cmd_es(const Options& opt) {
    Config cfg = load_config(opt);
    int n = cfg.require_int("es.n");
    ESData es;
    es.r0 = cfg.require_int("es.r0");
    es.s0 = cfg.require_int("es.s0");
    es.r = cfg.get_int_list("es.r");
    es.s = cfg.get_int_list("es.s");
    if (static_cast<int>(es.r.size()) != n - 2 || static_cast<int>(es.s.size()) != n - 2)
        throw error("config: es.r and es.s must list n-2 integers");
    std::vector<double> a_init = cfg.get_double_list("es.a_init");
    if (static_cast<int>(a_init.size()) != n - 1)
        throw error("config: es.a_init must list the n-1 initial shape parameters");
    double beta_abs = cfg.require_double("es.beta_abs");
    if (beta_abs <= 0) throw error("config: es.beta_abs must be positive");
    double tol = cfg.get_double("es.tol", 1e-9);
    if (tol <= 0) throw error("config: es.tol must be positive");

    ESSolveReport rep = es_solve(n, es, a_init, beta_abs, tol);

    CurveEngine eng(rep.curve);
    PeriodData pd = periods(eng, std::min(1e-11, tol / 100.0));
    ESVectorReport vu = gamma_infinity_periods(eng, pd, Frame::standard);

    JsonWriter w;
    w.field("n", n);
    {
        JsonWriter iw;
        iw.field("r0", es.r0);
        iw.field("s0", es.s0);
        iw.field("r", es.r);
        iw.field("s", es.s);
        w.raw_field("ints", iw.str());
    }
    w.field("a_solved", rep.a);
    w.field("beta_abs", rep.beta_abs);
    {
        JsonWriter cw;
        std::vector<cx> fc;
        for (int k = 0; k <= rep.curve.f.degree(); ++k) fc.push_back(rep.curve.f.coeff(k));
        cw.field("f_coeffs", fc);
        cw.field("genus", rep.curve.genus);
        w.raw_field("curve", cw.str());
    }
    w.field("residual_norm", rep.residual_norm);
    w.field("crosscheck_residual", rep.crosscheck_residual);
    w.field("iterations", rep.iterations);
    w.field("two_u", vu.two_u);
    w.field("half_period_defect", vu.half_period_defect);
    w.field("lattice_k", vu.lattice_k);
    w.field("lattice_l", vu.lattice_l);
    w.field("gamma_residue_defect", vu.residue_defect);
    ensure_outdir(opt);
    write_text_file((fs::path(opt.out) / "es_report.json").string(), w.str() + "\n");
    return exit_ok;
}

int cmd_theta(const Options& opt) {
    Config cfg = load_config(opt);
    std::string mode = cfg.get_string("theta.mode", "both");
    if (mode != "fay" && mode != "scan" && mode != "both")
        throw error("config: theta.mode must be fay, scan or both");
    int grid = cfg.get_int("theta.grid", 400);
    if (grid <= 0) throw error("config: theta.grid must be positive");
    double tol = cfg.get_double("theta.tol", 1e-12);
    unsigned seed = static_cast<unsigned>(cfg.get_int("run.seed", 1));

    // optional explicit tau override (genus 1), else the full curve pipeline
    CMatrix tau_c(1);
    std::vector<cx> u_vec, k_vec;
    bool have_flow = false;
    if (cfg.has("theta.tau_re") || cfg.has("theta.tau_im")) {
        tau_c(0, 0) = cx(cfg.get_double("theta.tau_re", 0.0), cfg.get_double("theta.tau_im", 0.0));
    } else {
        SpectralCurve c = curve_from_config(cfg);
        if (!check_reality(c).ok) return exit_reality;
        HyperellipticCurve h = quotient(c);
        CurveEngine eng(h);
        PeriodData pd = periods(eng, 1e-12);
        tau_c = pd.tau_c;
        ESVectorReport vu = gamma_infinity_periods(eng, pd, Frame::cyclic);
        AbelPoint kc = riemann_constants(eng, pd, Frame::cyclic);
        u_vec = vu.U;
        k_vec = kc.z;
        have_flow = true;
    }
    int g = tau_c.size();
    int n = g + 1;

    JsonWriter w;
    ensure_outdir(opt);

    if (mode == "fay" || mode == "both") {
        // constancy of the factorization ratio over seeded sample points
        CMatrix tau_hat(1);
        tau_hat(0, 0) = 2.0 * tau_c(0, 0);
        if (g != 1) throw error("theta: the Fay-Accola constancy test is implemented for n = 2");
        std::mt19937 gen(seed);
        std::uniform_real_distribution<double> uni(-0.45, 0.45);
        cx c0 = 1.0 / theta(ThetaArg({cx(0.0)}, tau_hat, {0.0}, {0.5}), tol);
        double deviation = 0.0;
        int samples = 0;
        while (samples < 20) {
            std::vector<cx> z{cx(uni(gen) + 0.5, uni(gen))};
            try {
                cx ratio = fay_accola_ratio(z, tau_c, tau_hat, 2, tol);
                deviation = std::max(deviation, std::abs(ratio - c0));
                ++samples;
            } catch (const error&) {
                // z fell on a shifted theta divisor: draw another sample
            }
        }
        JsonWriter fw;
        fw.field("c0", c0);
        fw.field("samples", samples);
        fw.field("max_deviation", deviation);
        w.raw_field("fay_accola", fw.str());
    }

    if (mode == "scan" || mode == "both") {
        if (!have_flow) throw error("theta: the H3 scan needs curve data (no tau override)");
        ScanResult scan = h3_scan(u_vec, k_vec, tau_c, n, grid, tol);
        std::ofstream csv(fs::path(opt.out) / "h3_scan.csv");
        csv << "lambda,product";
        for (int k = 0; k < n; ++k) csv << ",factor_" << k;
        csv << "\n";
        char buf[40];
        auto put = [&](double v) {
            std::snprintf(buf, sizeof buf, "%.17g", v);
            csv << buf;
        };
        for (size_t i = 0; i < scan.lambda.size(); ++i) {
            put(scan.lambda[i]);
            csv << ",";
            put(scan.modulus[i]);
            for (double fv : scan.factors[i]) {
                csv << ",";
                put(fv);
            }
            csv << "\n";
        }
        JsonWriter sw;
        sw.field("grid", grid);
        sw.field("endpoint0", scan.endpoint0);
        sw.field("endpoint2", scan.endpoint2);
        sw.field("zeros", scan.zeros);
        w.raw_field("h3", sw.str());
    }

    write_text_file((fs::path(opt.out) / "theta_report.json").string(), w.str() + "\n");
    return exit_ok;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"cyclic-monopole / affine-Toda laboratory"};
    app.require_subcommand(1);

    Options opt;
    std::string cmd;
    for (const char* name : {"simulate", "curve", "periods", "es", "theta"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", opt.config, "run configuration file")->required();
        sub->add_option("--out", opt.out, "output directory")->required();
        sub->callback([&cmd, name] { cmd = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : exit_config;
    }

    try {
        if (cmd == "simulate") return cmd_simulate(opt);
        if (cmd == "curve") return cmd_curve(opt);
        if (cmd == "periods") return cmd_periods(opt);
        if (cmd == "es") return cmd_es(opt);
        if (cmd == "theta") return cmd_theta(opt);
        return exit_config;
    } catch (const degenerate_curve_error& e) {
        std::cerr << "mono " << cmd << ": " << e.what() << "\n";
        return exit_degenerate;
    } catch (const convergence_error& e) {
        std::cerr << "mono " << cmd << ": " << e.what() << "\n";
        return exit_es_infeasible;
    } catch (const error& e) {
        std::string what = e.what();
        std::cerr << "mono " << cmd << ": " << what << "\n";
        if (what.find("not positive definite") != std::string::npos) return exit_indefinite;
        return exit_config;
    } catch (const std::exception& e) {
        std::cerr << "mono " << cmd << ": " << e.what() << "\n";
        return exit_config;
    }
}
