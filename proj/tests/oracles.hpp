#pragma once

/// Independent reference computations used only by the tests. Nothing here calls the
/// library's quadrature or inversion code.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "iplab/domain_grid.hpp"

namespace oracle {

/// Radial profile from the fixed-point form
///     u(r) = u0 + sign (3 lambda)^(1/3) int_0^r (int_0^t u^3)^(1/3) dt,
/// sign = +1 for the growing family, -1 for the decaying one. The iteration starts from u = u0
/// and stops once successive iterates differ by less than `stop` in the sup norm.
struct PicardResult {
    std::vector<double> r;
    std::vector<double> u;
    int iterations = 0;
    bool converged = false;
};

namespace detail {

/// On the graded mesh r = R x^3 both integrands become polynomial-like in x, so the cumulative
/// trapezoid rule is second order despite the cube root at r = 0.
inline PicardResult picard_on(double R, double lambda, double u0, double sign, int n, double stop, int max_iter) {
    PicardResult res;
    res.r.resize(n + 1);
    std::vector<double> jac(n + 1);
    const double dx = 1.0 / n;
    for (int i = 0; i <= n; ++i) {
        double x = i * dx;
        res.r[i] = R * x * x * x;
        jac[i] = 3.0 * R * x * x;
    }
    std::vector<double> u(n + 1, u0), next(n + 1), inner(n + 1);
    const double c = std::cbrt(3.0 * lambda);
    for (int it = 1; it <= max_iter; ++it) {
        inner[0] = 0.0;
        for (int i = 1; i <= n; ++i) {
            double a = u[i - 1] * u[i - 1] * u[i - 1] * jac[i - 1], b = u[i] * u[i] * u[i] * jac[i];
            inner[i] = inner[i - 1] + 0.5 * dx * (a + b);
        }
        next[0] = u0;
        double outer = 0.0, diff = 0.0;
        for (int i = 1; i <= n; ++i) {
            double a = std::cbrt(std::max(inner[i - 1], 0.0)) * jac[i - 1];
            double b = std::cbrt(std::max(inner[i], 0.0)) * jac[i];
            outer += 0.5 * dx * (a + b);
            next[i] = u0 + sign * c * outer;
            diff = std::max(diff, std::abs(next[i] - u[i]));
        }
        u.swap(next);
        res.iterations = it;
        if (!std::isfinite(diff)) throw std::runtime_error("picard iteration diverged");
        if (diff < stop) {
            res.converged = true;
            break;
        }
    }
    res.u = std::move(u);
    return res;
}

}  // namespace detail

/// Richardson combination of the discrete fixed points on n and 2n cells (fourth order in 1/n),
/// reported on the coarse mesh.
inline PicardResult picard_radial(double R, double lambda, double u0, bool growing, int n = 4000,
                                  double stop = 1e-12, int max_iter = 10000) {
    const double sign = growing ? 1.0 : -1.0;
    PicardResult coarse = detail::picard_on(R, lambda, u0, sign, n, stop, max_iter);
    PicardResult fine = detail::picard_on(R, lambda, u0, sign, 2 * n, stop, max_iter);
    for (int i = 0; i <= n; ++i) coarse.u[i] = (4.0 * fine.u[2 * i] - coarse.u[i]) / 3.0;
    coarse.converged = coarse.converged && fine.converged;
    coarse.iterations = std::max(coarse.iterations, fine.iterations);
    return coarse;
}

/// Lattice points of the closure counted by brute force, and those satisfying the interior rule
/// (strictly inside with every one of the 3^n - 1 neighbours in the closure).
struct MaskCount {
    int closure = 0;
    int interior = 0;
};

inline MaskCount brute_force_mask(const iplab::Domain& d, double h, double tol = 1e-12) {
    std::vector<double> lo(d.dim), hi(d.dim);
    for (int i = 0; i < d.dim; ++i) {
        lo[i] = d.kind == iplab::DomainKind::ball ? d.center[i] - d.radius : d.lo[i];
        hi[i] = d.kind == iplab::DomainKind::ball ? d.center[i] + d.radius : d.hi[i];
    }
    std::vector<int> count(d.dim);
    long total = 1;
    for (int i = 0; i < d.dim; ++i) {
        count[i] = static_cast<int>(std::floor((hi[i] - lo[i]) / h + 1e-9)) + 1;
        total *= count[i];
    }
    auto point = [&](std::span<const int> m, std::vector<double>& x) {
        for (int i = 0; i < d.dim; ++i) x[i] = lo[i] + m[i] * h;
    };
    MaskCount out;
    std::vector<int> m(d.dim), nb(d.dim);
    std::vector<double> x(d.dim);
    long neighbours = 1;
    for (int i = 0; i < d.dim; ++i) neighbours *= 3;
    for (long flat = 0; flat < total; ++flat) {
        long rest = flat;
        for (int i = 0; i < d.dim; ++i) {
            m[i] = static_cast<int>(rest % count[i]);
            rest /= count[i];
        }
        point(m, x);
        double sd = d.signed_distance(x);
        if (sd < -tol) continue;
        ++out.closure;
        if (sd <= tol) continue;
        bool all = true;
        for (long s = 0; s < neighbours && all; ++s) {
            long q = s;
            for (int i = 0; i < d.dim; ++i) {
                nb[i] = m[i] + static_cast<int>(q % 3) - 1;
                q /= 3;
            }
            point(nb, x);
            all = d.signed_distance(x) >= -tol;
        }
        if (all) ++out.interior;
    }
    return out;
}

}  // namespace oracle
