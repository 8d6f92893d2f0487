#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fedprice {

struct solver_error : std::runtime_error {
    solver_error(const std::string& what, std::vector<double> iterate, double residual)
        : std::runtime_error(what), best_iterate(std::move(iterate)), best_residual(residual) {}
    std::vector<double> best_iterate;
    double best_residual = 0.0;
};

// Bisection in log space for f with a sign change on [lo, hi], 0 < lo < hi.
// Intended for monotone f over wide brackets; returns the root to ~1 ulp.
template <class F>
double bisect_log(F&& f, double lo, double hi, int max_iter = 400) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0) == (fhi > 0))
        throw solver_error("bisect_log: no sign change on bracket", {lo, hi},
                           std::min(std::abs(flo), std::abs(fhi)));
    double llo = std::log(lo), lhi = std::log(hi);
    for (int i = 0; i < max_iter; ++i) {
        const double lm = 0.5 * (llo + lhi);
        const double m = std::exp(lm);
        if (m <= lo || m >= hi) break;  // interval exhausted in double precision
        const double fm = f(m);
        if (fm == 0.0) return m;
        if ((fm > 0) == (flo > 0)) {
            llo = lm;
            lo = m;
            flo = fm;
        } else {
            lhi = lm;
            hi = m;
        }
    }
    return std::sqrt(lo * hi);
}

// Safeguarded secant/bisection refinement of a bracketed sign change [a, b].
template <class F>
double refine_bracket(F&& f, double a, double b, int max_iter = 200) {
    double fa = f(a), fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    for (int i = 0; i < max_iter; ++i) {
        double m = (std::abs(fb - fa) > 0)
                       ? b - fb * (b - a) / (fb - fa)  // secant
                       : 0.5 * (a + b);
        const double mid = 0.5 * (a + b);
        if (!(m > a && m < b)) m = mid;
        // alternate toward bisection when secant stalls
        if (i % 2 == 1) m = mid;
        const double fm = f(m);
        if (fm == 0.0) return m;
        if ((fm > 0) == (fa > 0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
            fb = fm;
        }
        if (b - a <= 4.0 * std::max(std::abs(a), 1e-300) * 2.220446049250313e-16) break;
    }
    return 0.5 * (a + b);
}

// All roots of f on [lo, hi] found by geometric scan; each entry carries the
// crossing direction (upward = f goes negative -> nonnegative).
struct ScanRoot {
    double x;
    bool upward;
};

template <class F>
std::vector<ScanRoot> scan_roots(F&& f, double lo, double hi, int points = 1201) {
    std::vector<ScanRoot> out;
    const double lr = std::log(hi / lo);
    double xprev = lo;
    double fprev = f(lo);
    for (int k = 1; k < points; ++k) {
        const double x = lo * std::exp(lr * k / (points - 1));
        const double fx = f(x);
        if (fprev == 0.0) {
            out.push_back({xprev, fx > 0});
        } else if ((fprev < 0 && fx >= 0) || (fprev > 0 && fx <= 0)) {
            out.push_back({refine_bracket(f, xprev, x), fprev < 0});
        }
        xprev = x;
        fprev = fx;
    }
    return out;
}

// Golden-section minimisation in log space on [lo, hi] (unimodal assumed).
template <class F>
double golden_min_log(F&& f, double lo, double hi, int max_iter = 200) {
    const double phi = 0.6180339887498949;
    double a = std::log(lo), b = std::log(hi);
    double c = b - phi * (b - a);
    double d = a + phi * (b - a);
    double fc = f(std::exp(c)), fd = f(std::exp(d));
    for (int i = 0; i < max_iter && (b - a) > 1e-14; ++i) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(std::exp(c));
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(std::exp(d));
        }
    }
    return std::exp(0.5 * (a + b));
}

// Damped 2-D Newton with forward-difference Jacobian for positive unknowns.
// f maps (x0, x1) -> (r0, r1); returns true when ||r||_inf <= tol.
inline bool newton2(const std::function<void(const double*, double*)>& f, double x[2],
                    double tol = 1e-12, int max_iter = 400) {
    auto norm = [](const double r[2]) { return std::max(std::abs(r[0]), std::abs(r[1])); };
    double r[2];
    f(x, r);
    for (int it = 0; it < max_iter; ++it) {
        const double nr = norm(r);
        if (nr <= tol) return true;
        double J[2][2];
        for (int j = 0; j < 2; ++j) {
            const double h = x[j] * 1e-7;
            double xp[2] = {x[0], x[1]};
            xp[j] += h;
            double rp[2];
            f(xp, rp);
            J[0][j] = (rp[0] - r[0]) / h;
            J[1][j] = (rp[1] - r[1]) / h;
        }
        const double det = J[0][0] * J[1][1] - J[0][1] * J[1][0];
        if (det == 0.0 || !std::isfinite(det)) return false;
        const double s0 = (-r[0] * J[1][1] + r[1] * J[0][1]) / det;
        const double s1 = (-J[0][0] * r[1] + J[1][0] * r[0]) / det;
        double lam = 1.0;
        bool stepped = false;
        for (int ls = 0; ls < 60; ++ls) {
            double xn[2] = {x[0] + lam * s0, x[1] + lam * s1};
            if (xn[0] > 0 && xn[1] > 0) {
                double rn[2];
                f(xn, rn);
                if (norm(rn) < nr) {
                    x[0] = xn[0];
                    x[1] = xn[1];
                    r[0] = rn[0];
                    r[1] = rn[1];
                    stepped = true;
                    break;
                }
            }
            lam *= 0.5;
        }
        if (!stepped) return norm(r) <= tol;
    }
    f(x, r);
    return norm(r) <= tol;
}

}  // namespace fedprice
