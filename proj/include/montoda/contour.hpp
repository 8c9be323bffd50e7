// Contour machinery for hyperelliptic integrals on y^2 = f(x).
//
// Two integration routes are provided and cross-checked against each other:
//
//  * collapsed branch-to-branch segment integrals with the cos substitution
//    x = c + h cos(theta), which removes the inverse-square-root endpoint
//    singularities exactly (periods of cycles built from cuts and gaps);
//
//  * explicit closed tube contours around prescribed branch points with
//    stepwise square-root sheet tracking (independent verification and
//    custom cycles).
//
// The square root is continued along paths by nearest-value matching with
// a step bound of a quarter of the distance to the nearest branch point.

#pragma once

#include "montoda/algebra.hpp"

namespace montoda {

// 32-point Gauss-Legendre nodes/weights on [-1, 1] (symmetric halves).
namespace gl32 {
inline constexpr double x[16] = {
    0.0483076656877383162348126, 0.1444719615827964934851864, 0.2392873622521370745446032,
    0.3318686022821276497799168, 0.4213512761306353453641194, 0.5068999089322293900237475,
    0.5877157572407623290407455, 0.6630442669302152009751152, 0.7321821187402896803874267,
    0.7944837959679424069630973, 0.8493676137325699701336930, 0.8963211557660521239653072,
    0.9349060759377396891709191, 0.9647622555875064307738119, 0.9856115115452683354001750,
    0.9972638618494815635449811};
inline constexpr double w[16] = {
    0.0965400885147278005667648, 0.0956387200792748594190820, 0.0938443990808045656391802,
    0.0911738786957638847128686, 0.0876520930044038111427715, 0.0833119242269467552221991,
    0.0781938957870703064717409, 0.0723457941088485062253994, 0.0658222227763618468376501,
    0.0586840934785355471452836, 0.0509980592623761761961632, 0.0428358980222266806568786,
    0.0342738629130214331026877, 0.0253920653092620594557526, 0.0162743947309056706051706,
    0.0070186100094700966004071};
} // namespace gl32

namespace contour {

inline double dist_to_nearest(const std::vector<cx>& pts, cx x) {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& e : pts) d = std::min(d, std::abs(x - e));
    return d;
}

// continue y = sqrt(f) from (x_from, y_from) to x_to along a straight segment
inline cx continue_sqrt(const CPoly& f, const std::vector<cx>& branch, cx x_from, cx y_from, cx x_to) {
    cx x = x_from, y = y_from;
    int guard = 0;
    while (true) {
        cx rem = x_to - x;
        double rlen = std::abs(rem);
        if (rlen == 0.0) return y;
        double step = 0.25 * dist_to_nearest(branch, x);
        if (step <= 1e-300) throw error("continue_sqrt: path touches a branch point");
        cx xn = (rlen <= step) ? x_to : x + rem * (step / rlen);
        cx w = std::sqrt(f.eval(xn));
        y = (std::abs(w - y) <= std::abs(-w - y)) ? w : -w;
        x = xn;
        if (x == x_to) return y;
        if (++guard > 200000) throw error("continue_sqrt: too many continuation steps");
    }
}

inline cx continue_sqrt_path(const CPoly& f, const std::vector<cx>& branch, const std::vector<cx>& pts, cx y0) {
    cx y = y0;
    for (size_t k = 0; k + 1 < pts.size(); ++k) y = continue_sqrt(f, branch, pts[k], y, pts[k + 1]);
    return y;
}

// ------------------------------------------------------------ seg route ---

struct IntegralResult {
    std::vector<cx> values; // one per numerator
    double err = 0.0;
};

// 2 * int_{e_a}^{e_b} N(x) dx / y for each numerator N, with the branch of y
// anchored at the segment midpoint (indices ia, ib of the endpoints within
// the branch list). Cos substitution x = c + h cos(theta) turns the
// integrand into -h N(x) / w(theta), w = y / sin(theta). Since
// (x - e_a)(x - e_b) = -h^2 sin^2(theta) exactly, w is evaluated from the
// factored form w^2 = -h^2 lead prod_{j != ia, ib} (x - e_j), which stays
// fully accurate at the endpoints where f itself cancels.
inline IntegralResult branch_segment_integral(const CPoly& f, const std::vector<cx>& branch, int ia, int ib,
                                              cx y_mid, const std::vector<CPoly>& nums, double tol) {
    cx e_a = branch[static_cast<size_t>(ia)], e_b = branch[static_cast<size_t>(ib)];
    cx c = 0.5 * (e_a + e_b), h = 0.5 * (e_a - e_b);
    cx lead = f.coeff(f.degree());
    size_t nn = nums.size();

    auto w_squared = [&](cx x) {
        cx prod = lead;
        for (size_t j = 0; j < branch.size(); ++j) {
            if (static_cast<int>(j) == ia || static_cast<int>(j) == ib) continue;
            prod *= (x - branch[j]);
        }
        return -h * h * prod;
    };

    auto sweep = [&](int panels) -> std::vector<cx> {
        int total = panels * 32;
        std::vector<double> theta(static_cast<size_t>(total));
        std::vector<double> weight(static_cast<size_t>(total));
        for (int p = 0; p < panels; ++p) {
            double t0 = pi * p / panels, t1 = pi * (p + 1) / panels;
            double mid = 0.5 * (t0 + t1), half = 0.5 * (t1 - t0);
            for (int j = 0; j < 16; ++j) {
                theta[static_cast<size_t>(p * 32 + j)] = mid - half * gl32::x[15 - j];
                weight[static_cast<size_t>(p * 32 + j)] = half * gl32::w[15 - j];
                theta[static_cast<size_t>(p * 32 + 16 + j)] = mid + half * gl32::x[j];
                weight[static_cast<size_t>(p * 32 + 16 + j)] = half * gl32::w[j];
            }
        }
        std::vector<cx> xs(static_cast<size_t>(total));
        for (int k = 0; k < total; ++k) xs[static_cast<size_t>(k)] = c + h * std::cos(theta[static_cast<size_t>(k)]);

        // anchor w at the node nearest the midpoint, where y is well
        // conditioned, then sign-continue the smooth nonvanishing w outward
        int imid = 0;
        double best = std::numeric_limits<double>::infinity();
        for (int k = 0; k < total; ++k) {
            double d = std::abs(theta[static_cast<size_t>(k)] - 0.5 * pi);
            if (d < best) { best = d; imid = k; }
        }
        std::vector<cx> ws(static_cast<size_t>(total));
        cx y_at_mid_node = continue_sqrt(f, branch, c, y_mid, xs[static_cast<size_t>(imid)]);
        cx w_ref = y_at_mid_node / std::sin(theta[static_cast<size_t>(imid)]);
        cx w0 = std::sqrt(w_squared(xs[static_cast<size_t>(imid)]));
        ws[static_cast<size_t>(imid)] = (std::abs(w0 - w_ref) <= std::abs(-w0 - w_ref)) ? w0 : -w0;
        for (int k = imid + 1; k < total; ++k) {
            cx w = std::sqrt(w_squared(xs[static_cast<size_t>(k)]));
            ws[static_cast<size_t>(k)] = (std::abs(w - ws[static_cast<size_t>(k - 1)]) <= std::abs(-w - ws[static_cast<size_t>(k - 1)])) ? w : -w;
        }
        for (int k = imid - 1; k >= 0; --k) {
            cx w = std::sqrt(w_squared(xs[static_cast<size_t>(k)]));
            ws[static_cast<size_t>(k)] = (std::abs(w - ws[static_cast<size_t>(k + 1)]) <= std::abs(-w - ws[static_cast<size_t>(k + 1)])) ? w : -w;
        }

        std::vector<cx> acc(nn, cx(0.0));
        for (int k = 0; k < total; ++k) {
            cx base = -h * weight[static_cast<size_t>(k)] / ws[static_cast<size_t>(k)];
            for (size_t q = 0; q < nn; ++q) acc[q] += base * nums[q].eval(xs[static_cast<size_t>(k)]);
        }
        for (auto& v : acc) v *= 2.0;
        return acc;
    };

    std::vector<cx> prev = sweep(4);
    for (int panels = 8; panels <= 1024; panels *= 2) {
        std::vector<cx> cur = sweep(panels);
        double diff = 0.0, scale = 1.0;
        for (size_t q = 0; q < nn; ++q) {
            diff = std::max(diff, std::abs(cur[q] - prev[q]));
            scale = std::max(scale, std::abs(cur[q]));
        }
        if (diff <= tol * scale || panels == 1024) {
            IntegralResult r;
            r.values = std::move(cur);
            r.err = diff;
            return r;
        }
        prev = std::move(cur);
    }
    throw convergence_error("branch_segment_integral: quadrature failed to converge");
}

// ------------------------------------------------------------ tube route --

struct PathPiece {
    bool is_arc = false;
    cx a, b;           // segment endpoints
    cx center;         // arc data
    double radius = 0.0, ang0 = 0.0, ang1 = 0.0;

    static PathPiece seg(cx a, cx b) {
        PathPiece p;
        p.a = a;
        p.b = b;
        return p;
    }
    static PathPiece arc(cx c, double r, double a0, double a1) {
        PathPiece p;
        p.is_arc = true;
        p.center = c;
        p.radius = r;
        p.ang0 = a0;
        p.ang1 = a1;
        p.a = c + r * std::exp(cx(0.0, a0));
        p.b = c + r * std::exp(cx(0.0, a1));
        return p;
    }
    cx at(double t) const {
        if (!is_arc) return a + t * (b - a);
        return center + radius * std::exp(cx(0.0, ang0 + t * (ang1 - ang0)));
    }
    cx deriv(double t) const {
        if (!is_arc) return b - a;
        return radius * (ang1 - ang0) * cx(0.0, 1.0) * std::exp(cx(0.0, ang0 + t * (ang1 - ang0)));
    }
    PathPiece reversed() const {
        if (!is_arc) return seg(b, a);
        return arc(center, radius, ang1, ang0);
    }
};

// closed stadium-like tube (counterclockwise-ish; normalize with winding_number)
// around the polyline through pts
inline std::vector<PathPiece> tube_contour(const std::vector<cx>& pts, double radius) {
    if (pts.size() < 2) throw error("tube_contour: need at least two points");
    std::vector<PathPiece> left, right;
    size_t m = pts.size();
    for (size_t k = 0; k + 1 < m; ++k) {
        cx d = pts[k + 1] - pts[k];
        cx n = cx(0.0, 1.0) * d / std::abs(d); // left normal
        left.push_back(PathPiece::seg(pts[k] + radius * n, pts[k + 1] + radius * n));
        right.push_back(PathPiece::seg(pts[k + 1] - radius * n, pts[k] - radius * n));
        if (k + 2 < m) {
            // join arcs around the interior vertex
            cx d2 = pts[k + 2] - pts[k + 1];
            cx n2 = cx(0.0, 1.0) * d2 / std::abs(d2);
            double a0 = std::arg(n), a1 = std::arg(n2);
            left.push_back(PathPiece::arc(pts[k + 1], radius, a0, a1));
            right.push_back(PathPiece::arc(pts[k + 1], radius, a1 - pi, a0 - pi));
        }
    }
    std::vector<PathPiece> out;
    cx dlast = pts[m - 1] - pts[m - 2];
    cx nlast = cx(0.0, 1.0) * dlast / std::abs(dlast);
    cx dfirst = pts[1] - pts[0];
    cx nfirst = cx(0.0, 1.0) * dfirst / std::abs(dfirst);
    for (auto& p : left) out.push_back(p);
    out.push_back(PathPiece::arc(pts[m - 1], radius, std::arg(nlast), std::arg(nlast) - pi));
    for (auto it = right.rbegin(); it != right.rend(); ++it) out.push_back(*it);
    out.push_back(PathPiece::arc(pts[0], radius, std::arg(-nfirst), std::arg(-nfirst) - pi));
    return out;
}

inline std::vector<PathPiece> reversed(const std::vector<PathPiece>& pieces) {
    std::vector<PathPiece> out;
    for (auto it = pieces.rbegin(); it != pieces.rend(); ++it) out.push_back(it->reversed());
    return out;
}

// winding number of a closed piece chain around a point (no sheet data needed)
inline double winding_number(const std::vector<PathPiece>& pieces, cx c) {
    cx acc(0.0);
    for (const auto& p : pieces) {
        for (int panel = 0; panel < 8; ++panel) {
            double t0 = panel / 8.0, t1 = (panel + 1) / 8.0;
            double mid = 0.5 * (t0 + t1), half = 0.5 * (t1 - t0);
            for (int j = 0; j < 16; ++j) {
                double tm = mid - half * gl32::x[j], tp = mid + half * gl32::x[j];
                acc += half * gl32::w[j] * (p.deriv(tm) / (p.at(tm) - c) + p.deriv(tp) / (p.at(tp) - c));
            }
        }
    }
    return (acc / cx(0.0, 2.0 * pi)).real();
}

// integral of N(x) dx / y along the closed piece chain; the y branch starts
// from (anchor_x, anchor_y) continued to the chain start. Checks that the
// contour closes on the curve. Optionally emits (x, y) samples for the
// combinatorial intersection oracle.
inline IntegralResult contour_integral(const CPoly& f, const std::vector<cx>& branch,
                                       const std::vector<PathPiece>& pieces, const std::vector<CPoly>& nums,
                                       cx anchor_x, cx anchor_y, double tol,
                                       std::vector<std::pair<cx, cx>>* samples_out = nullptr) {
    size_t nn = nums.size();
    cx y_start = continue_sqrt(f, branch, anchor_x, anchor_y, pieces.front().at(0.0));

    auto sweep = [&](int panels_per_piece, std::vector<std::pair<cx, cx>>* samples) -> std::vector<cx> {
        std::vector<cx> acc(nn, cx(0.0));
        cx y = y_start;
        cx xprev = pieces.front().at(0.0);
        for (const auto& p : pieces) {
            for (int panel = 0; panel < panels_per_piece; ++panel) {
                double t0 = panel / static_cast<double>(panels_per_piece);
                double t1 = (panel + 1) / static_cast<double>(panels_per_piece);
                double mid = 0.5 * (t0 + t1), half = 0.5 * (t1 - t0);
                for (int j = 15; j >= 0; --j) { // ascending t within the panel halves
                    double t = mid - half * gl32::x[j];
                    cx x = p.at(t);
                    y = continue_sqrt(f, branch, xprev, y, x);
                    xprev = x;
                    cx base = half * gl32::w[j] * p.deriv(t) / y;
                    for (size_t q = 0; q < nn; ++q) acc[q] += base * nums[q].eval(x);
                    if (samples) samples->push_back({x, y});
                }
                for (int j = 0; j < 16; ++j) {
                    double t = mid + half * gl32::x[j];
                    cx x = p.at(t);
                    y = continue_sqrt(f, branch, xprev, y, x);
                    xprev = x;
                    cx base = half * gl32::w[j] * p.deriv(t) / y;
                    for (size_t q = 0; q < nn; ++q) acc[q] += base * nums[q].eval(x);
                    if (samples) samples->push_back({x, y});
                }
            }
            y = continue_sqrt(f, branch, xprev, y, p.at(1.0));
            xprev = p.at(1.0);
        }
        // closure check
        cx y_back = continue_sqrt(f, branch, xprev, y, pieces.front().at(0.0));
        if (std::abs(y_back - y_start) > 1e-6 * std::max(1.0, std::abs(y_start)))
            throw error("contour_integral: contour does not close on the curve (odd monodromy)");
        return acc;
    };

    std::vector<cx> prev = sweep(2, nullptr);
    for (int panels = 4; panels <= 256; panels *= 2) {
        std::vector<cx> cur = sweep(panels, nullptr);
        double diff = 0.0, scale = 1.0;
        for (size_t q = 0; q < nn; ++q) {
            diff = std::max(diff, std::abs(cur[q] - prev[q]));
            scale = std::max(scale, std::abs(cur[q]));
        }
        if (diff <= tol * scale || panels == 256) {
            if (samples_out) sweep(panels, samples_out);
            IntegralResult r;
            r.values = std::move(cur);
            r.err = diff;
            return r;
        }
        prev = std::move(cur);
    }
    throw convergence_error("contour_integral: quadrature failed to converge");
}

// ---------------------------------------------------------- infinity ray --

// int from infinity to x0 along the ray through x0 of N(x) dx / y, entering
// on the branch that continues (x0, y0) outward. Regular at infinity when
// deg N <= deg(f)/2 - 2.
inline IntegralResult infinity_tail_integral(const CPoly& f, const std::vector<cx>& branch, cx x0, cx y0,
                                             const std::vector<CPoly>& nums, double tol) {
    size_t nn = nums.size();
    int m = f.degree() / 2;
    for (const auto& nq : nums)
        if (nq.degree() > m - 2) throw error("infinity_tail_integral: differential not regular at infinity");

    auto sweep = [&](int panels) -> std::vector<cx> {
        std::vector<cx> acc(nn, cx(0.0));
        cx y = y0;
        cx xprev = x0;
        // t from 1 down to 0, x = x0 / t marching outward
        for (int panel = 0; panel < panels; ++panel) {
            double t1 = 1.0 - panel / static_cast<double>(panels);
            double t0 = 1.0 - (panel + 1) / static_cast<double>(panels);
            double mid = 0.5 * (t0 + t1), half = 0.5 * (t1 - t0);
            for (int j = 0; j < 32; ++j) {
                double t = (j < 16) ? (mid + half * gl32::x[15 - j]) : (mid - half * gl32::x[j - 16]);
                double w = (j < 16) ? (half * gl32::w[15 - j]) : (half * gl32::w[j - 16]);
                cx x = x0 / t;
                y = continue_sqrt(f, branch, xprev, y, x);
                xprev = x;
                cx dxdt = -x0 / (t * t); // x(t) = x0/t, t: 0 (infinity) -> 1 (x0)
                cx base = w * dxdt / y;
                for (size_t q = 0; q < nn; ++q) acc[q] += base * nums[q].eval(x);
            }
        }
        return acc;
    };

    std::vector<cx> prev = sweep(8);
    for (int panels = 16; panels <= 512; panels *= 2) {
        std::vector<cx> cur = sweep(panels);
        double diff = 0.0, scale = 1.0;
        for (size_t q = 0; q < nn; ++q) {
            diff = std::max(diff, std::abs(cur[q] - prev[q]));
            scale = std::max(scale, std::abs(cur[q]));
        }
        if (diff <= tol * scale || panels == 512) {
            IntegralResult r;
            r.values = std::move(cur);
            r.err = diff;
            return r;
        }
        prev = std::move(cur);
    }
    throw convergence_error("infinity_tail_integral: quadrature failed to converge");
}

} // namespace contour
} // namespace montoda
