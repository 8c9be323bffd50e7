// Riemann theta functions with rational characteristics at small genus.
//
// Convention:
//   theta[a;b](z; tau) = sum_{m in Z^g} exp( i pi (m+a)^T tau (m+a)
//                                           + 2 pi i (m+a)^T (z+b) ).
//
// The lattice sum is truncated to the ellipsoid || L^T (m + a + c) || <= R,
// T = Im tau = L L^T (Cholesky), c = T^{-1} Im(z+b), with R chosen from the
// Gaussian tail bound. Terms are accumulated in a fixed enumeration order,
// so evaluations are deterministic.

#pragma once

#include "montoda/algebra.hpp"

namespace montoda {

struct ThetaArg {
    std::vector<cx> z;
    CMatrix tau;                 // g x g, symmetric, Im positive definite
    std::vector<double> char_a;  // top characteristic row (tau coefficient)
    std::vector<double> char_b;  // bottom characteristic row

    ThetaArg() = default;
    ThetaArg(std::vector<cx> z_, CMatrix tau_) : z(std::move(z_)), tau(std::move(tau_)) {
        char_a.assign(z.size(), 0.0);
        char_b.assign(z.size(), 0.0);
    }
    ThetaArg(std::vector<cx> z_, CMatrix tau_, std::vector<double> a_, std::vector<double> b_)
        : z(std::move(z_)), tau(std::move(tau_)), char_a(std::move(a_)), char_b(std::move(b_)) {}
};

namespace theta_detail {

// Cholesky of the imaginary part; throws when Im tau is not positive definite.
inline std::vector<double> im_cholesky(const CMatrix& tau, int g) {
    std::vector<double> l(static_cast<size_t>(g) * g, 0.0);
    for (int i = 0; i < g; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = tau(i, j).imag();
            for (int k = 0; k < j; ++k) s -= l[static_cast<size_t>(i) * g + k] * l[static_cast<size_t>(j) * g + k];
            if (i == j) {
                if (s <= 0.0) throw error("theta: Im tau is not positive definite");
                l[static_cast<size_t>(i) * g + i] = std::sqrt(s);
            } else {
                l[static_cast<size_t>(i) * g + j] = s / l[static_cast<size_t>(j) * g + j];
            }
        }
    }
    return l;
}

inline void validate(const ThetaArg& arg) {
    int g = static_cast<int>(arg.z.size());
    if (arg.tau.size() != g || static_cast<int>(arg.char_a.size()) != g || static_cast<int>(arg.char_b.size()) != g)
        throw error("theta: inconsistent dimensions");
    double scale = std::max(1.0, arg.tau.norm_inf());
    for (int i = 0; i < g; ++i)
        for (int j = i + 1; j < g; ++j)
            if (std::abs(arg.tau(i, j) - arg.tau(j, i)) > 1e-8 * scale)
                throw error("theta: tau is not symmetric");
}

} // namespace theta_detail

// Direct evaluation. Characteristics are reduced mod 1 internally; the
// exponential witness factor keeps raw and reduced values identical.
inline cx theta(const ThetaArg& arg, double tol = 1e-12) {
    theta_detail::validate(arg);
    int g = static_cast<int>(arg.z.size());

    // reduce characteristics mod 1 (a shift is free, b shift costs a factor)
    std::vector<double> a(arg.char_a), b(arg.char_b);
    double bshift_phase = 0.0;
    for (int i = 0; i < g; ++i) {
        a[static_cast<size_t>(i)] -= std::floor(a[static_cast<size_t>(i)]);
        double q = std::floor(b[static_cast<size_t>(i)]);
        b[static_cast<size_t>(i)] -= q;
        bshift_phase += a[static_cast<size_t>(i)] * q;
    }
    cx witness = std::exp(cx(0.0, 2.0 * pi * bshift_phase));

    std::vector<double> l = theta_detail::im_cholesky(arg.tau, g);

    // center c = T^{-1} Im(z + b): forward/back substitution with L L^T
    std::vector<double> yv(static_cast<size_t>(g));
    for (int i = 0; i < g; ++i) yv[static_cast<size_t>(i)] = (arg.z[static_cast<size_t>(i)] + b[static_cast<size_t>(i)]).imag();
    std::vector<double> tmp(static_cast<size_t>(g)), center(static_cast<size_t>(g));
    for (int i = 0; i < g; ++i) {
        double s = yv[static_cast<size_t>(i)];
        for (int k = 0; k < i; ++k) s -= l[static_cast<size_t>(i) * g + k] * tmp[static_cast<size_t>(k)];
        tmp[static_cast<size_t>(i)] = s / l[static_cast<size_t>(i) * g + i];
    }
    for (int i = g - 1; i >= 0; --i) {
        double s = tmp[static_cast<size_t>(i)];
        for (int k = i + 1; k < g; ++k) s -= l[static_cast<size_t>(k) * g + i] * center[static_cast<size_t>(k)];
        center[static_cast<size_t>(i)] = s / l[static_cast<size_t>(i) * g + i];
    }

    double radius = std::sqrt(std::max(1.0, std::log(1.0 / std::max(tol, 1e-300)) / pi)) + 2.5;
    const double radius_cap = 60.0;
    if (radius > radius_cap) throw error("theta: requested tolerance needs truncation radius beyond the cap");

    // enumerate m with || L^T (m + a + c) || <= R, coordinate g-1 outermost
    // (L^T row i depends on m_i..m_{g-1})
    cx sum(0.0);
    std::vector<double> v(static_cast<size_t>(g));   // m + a + center, filled from the back
    std::vector<double> partial(static_cast<size_t>(g) + 1, 0.0); // accumulated squared norm
    std::vector<long> m(static_cast<size_t>(g));
    size_t terms = 0;

    // iterative nested enumeration
    std::function<void(int)> recurse = [&](int i) {
        if (i < 0) {
            // assemble the term
            std::vector<double> va(static_cast<size_t>(g));
            for (int k = 0; k < g; ++k) va[static_cast<size_t>(k)] = static_cast<double>(m[static_cast<size_t>(k)]) + a[static_cast<size_t>(k)];
            cx expo(0.0);
            for (int r = 0; r < g; ++r) {
                expo += cx(0.0, pi) * va[static_cast<size_t>(r)] * arg.tau(r, r) * va[static_cast<size_t>(r)];
                for (int s = r + 1; s < g; ++s)
                    expo += cx(0.0, 2.0 * pi) * va[static_cast<size_t>(r)] * arg.tau(r, s) * va[static_cast<size_t>(s)];
                expo += cx(0.0, 2.0 * pi) * va[static_cast<size_t>(r)] * (arg.z[static_cast<size_t>(r)] + b[static_cast<size_t>(r)]);
            }
            sum += std::exp(expo);
            if (++terms > 20000000) throw error("theta: truncation ellipsoid too large (ill-conditioned Im tau)");
            return;
        }
        // bound for coordinate i: (L^T v)_i = sum_{k >= i} L_{k,i} v_k = L_{i,i} v_i + known
        double known = 0.0;
        for (int k = i + 1; k < g; ++k)
            known += l[static_cast<size_t>(k) * g + i] * v[static_cast<size_t>(k)];
        double room2 = radius * radius - partial[static_cast<size_t>(i + 1)];
        if (room2 < 0.0) return;
        double room = std::sqrt(room2);
        double lii = l[static_cast<size_t>(i) * g + i];
        double shift = a[static_cast<size_t>(i)] + center[static_cast<size_t>(i)];
        double lo = (-room - known) / lii - shift;
        double hi = (room - known) / lii - shift;
        long mlo = static_cast<long>(std::ceil(lo - 1e-12));
        long mhi = static_cast<long>(std::floor(hi + 1e-12));
        for (long mi = mlo; mi <= mhi; ++mi) {
            m[static_cast<size_t>(i)] = mi;
            v[static_cast<size_t>(i)] = static_cast<double>(mi) + shift;
            double row = lii * v[static_cast<size_t>(i)] + known;
            partial[static_cast<size_t>(i)] = partial[static_cast<size_t>(i + 1)] + row * row;
            if (partial[static_cast<size_t>(i)] <= radius * radius) recurse(i - 1);
        }
    };
    recurse(g - 1);
    return witness * sum;
}

// ------------------------------------------------- lattice-reduced form ---

struct ReducedTheta {
    cx value;                  // theta at the reduced argument
    double reduced_modulus;    // |theta[a;b](z)| e^{-pi y^T T^{-1} y}, lattice invariant
    std::vector<long> shift_k, shift_l;
};

// Evaluate via w = z + tau a + b reduced into the fundamental cell; the
// invariant modulus is what scans and divisor tests should compare.
inline ReducedTheta theta_reduced(const ThetaArg& arg, double tol = 1e-12) {
    theta_detail::validate(arg);
    int g = static_cast<int>(arg.z.size());

    // w = z + tau a + b
    std::vector<cx> w(arg.z);
    for (int i = 0; i < g; ++i) {
        for (int j = 0; j < g; ++j) w[static_cast<size_t>(i)] += arg.tau(i, j) * arg.char_a[static_cast<size_t>(j)];
        w[static_cast<size_t>(i)] += arg.char_b[static_cast<size_t>(i)];
    }

    // reduce w by the lattice Z^g + tau Z^g
    std::vector<double> l = theta_detail::im_cholesky(arg.tau, g);
    std::vector<double> yv(static_cast<size_t>(g));
    for (int i = 0; i < g; ++i) yv[static_cast<size_t>(i)] = w[static_cast<size_t>(i)].imag();
    // solve T lv = y
    std::vector<double> tmp(static_cast<size_t>(g)), lv(static_cast<size_t>(g));
    for (int i = 0; i < g; ++i) {
        double s = yv[static_cast<size_t>(i)];
        for (int k = 0; k < i; ++k) s -= l[static_cast<size_t>(i) * g + k] * tmp[static_cast<size_t>(k)];
        tmp[static_cast<size_t>(i)] = s / l[static_cast<size_t>(i) * g + i];
    }
    for (int i = g - 1; i >= 0; --i) {
        double s = tmp[static_cast<size_t>(i)];
        for (int k = i + 1; k < g; ++k) s -= l[static_cast<size_t>(k) * g + i] * lv[static_cast<size_t>(k)];
        lv[static_cast<size_t>(i)] = s / l[static_cast<size_t>(i) * g + i];
    }
    ReducedTheta out;
    out.shift_l.resize(static_cast<size_t>(g));
    out.shift_k.resize(static_cast<size_t>(g));
    std::vector<cx> w0(w);
    for (int i = 0; i < g; ++i) {
        long li = std::lround(lv[static_cast<size_t>(i)]);
        out.shift_l[static_cast<size_t>(i)] = li;
        for (int j = 0; j < g; ++j) w0[static_cast<size_t>(j)] -= arg.tau(j, i) * static_cast<double>(li);
    }
    for (int i = 0; i < g; ++i) {
        long ki = std::lround(w0[static_cast<size_t>(i)].real());
        out.shift_k[static_cast<size_t>(i)] = ki;
        w0[static_cast<size_t>(i)] -= static_cast<double>(ki);
    }

    out.value = theta(ThetaArg(w0, arg.tau), tol);

    // invariant modulus at the reduced point
    std::vector<double> y0(static_cast<size_t>(g));
    for (int i = 0; i < g; ++i) y0[static_cast<size_t>(i)] = w0[static_cast<size_t>(i)].imag();
    // y0^T T^{-1} y0 via Cholesky
    for (int i = 0; i < g; ++i) {
        double s = y0[static_cast<size_t>(i)];
        for (int k = 0; k < i; ++k) s -= l[static_cast<size_t>(i) * g + k] * tmp[static_cast<size_t>(k)];
        tmp[static_cast<size_t>(i)] = s / l[static_cast<size_t>(i) * g + i];
    }
    double quad = 0.0;
    for (int i = 0; i < g; ++i) quad += tmp[static_cast<size_t>(i)] * tmp[static_cast<size_t>(i)];
    out.reduced_modulus = std::abs(out.value) * std::exp(-pi * quad);
    return out;
}

// ------------------------------------------------------------ Fay-Accola --

// pi^* z = (n z_0, z_1..z_{g-1} repeated n times)
inline std::vector<cx> cyclic_lift(const std::vector<cx>& z, int n) {
    int g = static_cast<int>(z.size());
    std::vector<cx> zh;
    zh.reserve(static_cast<size_t>(1 + n * (g - 1)));
    zh.push_back(cx(static_cast<double>(n)) * z[0]);
    for (int rep = 0; rep < n; ++rep)
        for (int j = 1; j < g; ++j) zh.push_back(z[static_cast<size_t>(j)]);
    return zh;
}

// theta[e-hat](pi^* z; tau-hat) / prod_k theta[0; k/n,0..0](z; tau),
// e-hat = [0...0; (n-1)/2, 0...0]. Constant in z over genuine cyclic covers.
inline cx fay_accola_ratio(const std::vector<cx>& z, const CMatrix& tau, const CMatrix& tau_hat, int n,
                           double tol = 1e-12) {
    int g = static_cast<int>(z.size());
    int gh = tau_hat.size();

    std::vector<cx> zh = cyclic_lift(z, n);
    if (static_cast<int>(zh.size()) != gh) throw error("fay_accola_ratio: tau_hat size does not match the lift");

    std::vector<double> ea(static_cast<size_t>(gh), 0.0), eb(static_cast<size_t>(gh), 0.0);
    eb[0] = (n - 1) / 2.0;
    cx num = theta(ThetaArg(zh, tau_hat, ea, eb), tol);

    cx den(1.0);
    for (int k = 0; k < n; ++k) {
        std::vector<double> ca(static_cast<size_t>(g), 0.0), cb(static_cast<size_t>(g), 0.0);
        cb[0] = static_cast<double>(k) / n;
        cx fac = theta(ThetaArg(z, tau, ca, cb), tol);
        if (std::abs(fac) < 1e-13) throw error("fay_accola_ratio: z lies on a shifted theta divisor (move z)");
        den *= fac;
    }
    return num / den;
}

// ----------------------------------------------------------------- scan ---

struct ScanResult {
    std::vector<double> lambda;
    std::vector<double> modulus;               // product of reduced factor moduli
    std::vector<std::vector<double>> factors;  // per-factor reduced moduli
    std::vector<double> zeros;                 // refined zero locations
    double endpoint0 = 0.0, endpoint2 = 0.0;
};

// |prod_k theta[0; k/n,0..0](lambda U - K; tau)| along lambda in [0,2],
// in the lattice-invariant normalization.
inline ScanResult h3_scan(const std::vector<cx>& u_vec, const std::vector<cx>& k_base, const CMatrix& tau, int n,
                          int grid, double tol = 1e-12) {
    if (grid < 1) throw error("h3_scan: grid must be positive");
    int g = tau.size();
    if (static_cast<int>(u_vec.size()) != g || static_cast<int>(k_base.size()) != g)
        throw error("h3_scan: dimension mismatch");

    auto product_at = [&](double lam, std::vector<double>* per_factor) -> double {
        std::vector<cx> z(static_cast<size_t>(g));
        for (int i = 0; i < g; ++i) z[static_cast<size_t>(i)] = lam * u_vec[static_cast<size_t>(i)] - k_base[static_cast<size_t>(i)];
        double prod = 1.0;
        for (int k = 0; k < n; ++k) {
            std::vector<double> ca(static_cast<size_t>(g), 0.0), cb(static_cast<size_t>(g), 0.0);
            cb[0] = static_cast<double>(k) / n;
            double m = theta_reduced(ThetaArg(z, tau, ca, cb), tol).reduced_modulus;
            if (per_factor) per_factor->push_back(m);
            prod *= m;
        }
        return prod;
    };

    ScanResult res;
    res.lambda.reserve(static_cast<size_t>(grid) + 1);
    for (int i = 0; i <= grid; ++i) {
        double lam = 2.0 * i / grid;
        std::vector<double> pf;
        double v = product_at(lam, &pf);
        res.lambda.push_back(lam);
        res.modulus.push_back(v);
        res.factors.push_back(std::move(pf));
    }
    res.endpoint0 = res.modulus.front();
    res.endpoint2 = res.modulus.back();

    // interior zero candidates: local minima below threshold, golden-section refined
    const double zero_thresh = 1e-6;
    const double gr = 0.6180339887498949;
    for (size_t i = 1; i + 1 < res.modulus.size(); ++i) {
        if (res.modulus[i] <= res.modulus[i - 1] && res.modulus[i] <= res.modulus[i + 1] &&
            res.modulus[i] < zero_thresh) {
            double a = res.lambda[i - 1], b = res.lambda[i + 1];
            double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
            double f1 = product_at(x1, nullptr), f2 = product_at(x2, nullptr);
            for (int it = 0; it < 50; ++it) {
                if (f1 < f2) { b = x2; x2 = x1; f2 = f1; x1 = b - gr * (b - a); f1 = product_at(x1, nullptr); }
                else        { a = x1; x1 = x2; f1 = f2; x2 = a + gr * (b - a); f2 = product_at(x2, nullptr); }
            }
            res.zeros.push_back(0.5 * (a + b));
        }
    }
    return res;
}

} // namespace montoda
