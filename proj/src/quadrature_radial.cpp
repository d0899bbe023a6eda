#include "iplab/quadrature_radial.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include "iplab/domain_grid.hpp"
#include "iplab/errors.hpp"

namespace iplab {

namespace {

struct SimpsonState {
    const std::function<double(double)>* f;
    long evaluations = 0;
    double error = 0.0;

    double eval(double x) {
        ++evaluations;
        double v = (*f)(x);
        if (!std::isfinite(v)) throw NumericalError("quadrature: non-finite integrand value at " + format_double(x));
        return v;
    }

    double recurse(double a, double b, double fa, double fm, double fb, double whole, double tol, int depth) {
        double m = 0.5 * (a + b);
        double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
        double flm = eval(lm), frm = eval(rm);
        double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        double diff = left + right - whole;
        if (std::abs(diff) <= 15.0 * tol || b - a <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(m)) {
            error += std::abs(diff) / 15.0;
            return left + right + diff / 15.0;
        }
        if (depth <= 0) throw NumericalError("quadrature: recursion budget exhausted before tolerance was met");
        return recurse(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
               recurse(m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
    }
};

// 5-point Gauss-Legendre on a short interval; used only to build the interpolation tables.
double gauss5(const auto& f, double a, double b) {
    static constexpr double x[5] = {0.0, 0.5384693101056831, -0.5384693101056831, 0.9061798459386640,
                                    -0.9061798459386640};
    static constexpr double w[5] = {0.5688888888888889, 0.4786286704993665, 0.4786286704993665,
                                    0.2369268850561891, 0.2369268850561891};
    double c = 0.5 * (a + b), r = 0.5 * (b - a), s = 0.0;
    for (int i = 0; i < 5; ++i) s += w[i] * f(c + r * x[i]);
    return s * r;
}

// Integrands after the endpoint substitutions 1 - s = w^4 and s - 1 = w^4; both are analytic in w.
double decay_integrand(double w) {
    double s = 1.0 - w * w * w * w;
    return 4.0 * w * w / std::pow((1.0 + s) * (1.0 + s * s), 0.25);
}

double growth_integrand(double w) {
    double s = 1.0 + w * w * w * w;
    return 4.0 * w * w / std::pow((1.0 + s) * (1.0 + s * s), 0.25);
}

// Integrand in xi = log s for the part of the growth integral beyond s = 2.
double growth_log_integrand(double xi) { return 1.0 / std::pow(-std::expm1(-4.0 * xi), 0.25); }

double hermite(double t, double h, double y0, double y1, double d0, double d1) {
    double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * h * d0 + (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * h * d1;
}

// v(y) with F(1 - v^4) = y^3, tabulated on a uniform grid in y = z^(1/3) where v is analytic.
struct CubeRootTable {
    double ymax = 0.0;
    double step = 0.0;
    std::vector<double> v, dv;

    double operator()(double y) const {
        y = std::clamp(y, 0.0, ymax);
        std::size_t i = std::min(static_cast<std::size_t>(y / step), v.size() - 2);
        return hermite(y / step - i, step, v[i], v[i + 1], dv[i], dv[i + 1]);
    }
};

// Builds v(y) for an integrand of the form 4 w^2 P(w)^(-1/4) with P(0) = 4.
CubeRootTable build_cube_root_table(double (*integrand)(double), double total, int intervals) {
    CubeRootTable t;
    t.ymax = std::cbrt(total);
    t.step = t.ymax / intervals;
    t.v.resize(intervals + 1);
    t.dv.resize(intervals + 1);
    const double slope0 = 1.0 / std::cbrt(4.0 / 3.0 * std::pow(4.0, -0.25));
    t.v[0] = 0.0;
    t.dv[0] = slope0;
    double prev_v = 0.0, prev_z = 0.0;
    for (int i = 1; i <= intervals; ++i) {
        double y = i * t.step, z = y * y * y;
        double v = prev_v + t.dv[i - 1] * t.step;
        for (int it = 0; it < 50; ++it) {
            double g = prev_z + gauss5(integrand, prev_v, v) - z;
            double dv = g / integrand(v);
            v -= dv;
            if (std::abs(dv) < 1e-17) break;
        }
        t.v[i] = v;
        t.dv[i] = 3.0 * y * y / integrand(v);
        prev_z = z;
        prev_v = v;
    }
    return t;
}

struct DecayTable {
    CubeRootTable table;
    DecayTable() { table = build_cube_root_table(decay_integrand, decay_integral_at_zero(), 4096); }
};

// Growth inverse P(z) with G(P(z); 1) = z: cube-root table up to z = A, then log P on a uniform z grid.
struct GrowthTable {
    CubeRootTable head;
    double split = 0.0;
    double zstep = 1.0 / 2048.0;
    double zmax = 64.0;
    std::vector<double> xi, dxi;

    static double rate(double x) { return std::pow(-std::expm1(-4.0 * x), 0.25); }

    GrowthTable() {
        split = growth_split_constant();
        head = build_cube_root_table(growth_integrand, split, 4096);
        int n = static_cast<int>((zmax - split) / zstep) + 2;
        xi.resize(n);
        dxi.resize(n);
        double x = std::log(2.0);
        for (int i = 0; i < n; ++i) {
            xi[i] = x;
            dxi[i] = rate(x);
            double k1 = rate(x), k2 = rate(x + 0.5 * zstep * k1), k3 = rate(x + 0.5 * zstep * k2),
                   k4 = rate(x + zstep * k3);
            x += zstep / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
        }
    }

    double operator()(double z) const {
        if (z <= split) {
            double w = head(std::cbrt(z));
            return 1.0 + w * w * w * w;
        }
        double s = (z - split) / zstep;
        std::size_t i = static_cast<std::size_t>(s);
        if (i + 1 >= xi.size()) return std::exp(xi.back() + (z - split - (xi.size() - 1) * zstep) * dxi.back());
        return std::exp(hermite(s - i, zstep, xi[i], xi[i + 1], dxi[i], dxi[i + 1]));
    }
};

const DecayTable& decay_table() {
    static const DecayTable t;
    return t;
}

const GrowthTable& growth_table() {
    static const GrowthTable t;
    return t;
}

double quarter_root(double x) { return std::sqrt(std::sqrt(x)); }

void require(bool ok, const std::string& what) {
    if (!ok) throw ParameterError(what);
}

}  // namespace

QuadratureResult adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                                  int max_depth) {
    SimpsonState st{&f};
    double fa = st.eval(a), fb = st.eval(b), fm = st.eval(0.5 * (a + b));
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    QuadratureResult r;
    r.value = st.recurse(a, b, fa, fm, fb, whole, tol, max_depth);
    r.error_estimate = st.error;
    r.evaluations = st.evaluations;
    return r;
}

double decay_integral_at_zero() { return std::numbers::pi * std::numbers::sqrt2 / 4.0; }

double decay_integral(double q, double tol) {
    require(q >= 0.0 && q <= 1.0, "decay integral: argument must lie in [0, 1]");
    double v = quarter_root(1.0 - q);
    if (v == 0.0) return 0.0;
    return adaptive_simpson(decay_integrand, 0.0, v, tol).value;
}

double growth_split_constant() {
    static const double a = adaptive_simpson(growth_integrand, 0.0, 1.0, 1e-15).value;
    return a;
}

double growth_sigma() { return 2.0 / quarter_root(15.0); }

double growth_integral(double u, double delta, double tol) {
    require(delta > 0.0, "growth integral: delta must be positive");
    require(u >= delta, "growth integral: u must be at least delta");
    double v = u / delta;
    if (v <= 2.0) return adaptive_simpson(growth_integrand, 0.0, quarter_root(v - 1.0), tol).value;
    return growth_split_constant() + adaptive_simpson(growth_log_integrand, std::log(2.0), std::log(v), tol).value;
}

double decay_integral_inverse(double z, double tol) {
    const double f0 = decay_integral_at_zero();
    require(z >= 0.0 && z <= f0 * (1.0 + 1e-12), "decay inverse: argument must lie in [0, F(0)]");
    double lo = 0.0, hi = 1.0;  // F(lo) >= z >= F(hi)
    while (hi - lo > tol) {
        double mid = 0.5 * (lo + hi);
        (decay_integral(mid) >= z ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double growth_integral_inverse(double z, double delta, double tol) {
    require(delta > 0.0 && z >= 0.0, "growth inverse: need delta > 0 and z >= 0");
    double lo = delta, hi = 2.0 * delta;
    while (growth_integral(hi, delta) < z) {
        lo = hi;
        hi *= 2.0;
        if (!std::isfinite(hi)) throw NumericalError("growth inverse: bracket overflow");
    }
    while (hi - lo > tol * hi) {
        double mid = 0.5 * (lo + hi);
        (growth_integral(mid, delta) < z ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double ball_eigenvalue(double R) {
    require(R > 0.0 && std::isfinite(R), "ball eigenvalue: radius must be positive");
    double f = decay_integral_at_zero() / R;
    return f * f * f * f;
}

double RadialProfile::value(double r) const {
    r = std::clamp(r, 0.0, radius);
    double z = quarter_root(lambda) * r;
    if (kind == ProfileKind::decaying) {
        double v = decay_table().table(std::cbrt(z));
        return center * (1.0 - v * v * v * v);
    }
    return center * growth_table()(z);
}

double RadialProfile::value_by_bisection(double r) const {
    r = std::clamp(r, 0.0, radius);
    double z = quarter_root(lambda) * r;
    if (kind == ProfileKind::decaying) return center * decay_integral_inverse(std::min(z, decay_integral_at_zero()));
    return growth_integral_inverse(z, center);
}

double RadialProfile::slope_at_value(double u) const {
    double m4 = center * center * center * center, u4 = u * u * u * u;
    if (kind == ProfileKind::decaying) return -quarter_root(lambda) * quarter_root(std::max(m4 - u4, 0.0));
    return quarter_root(lambda) * quarter_root(std::max(u4 - m4, 0.0));
}

double RadialProfile::slope(double r) const { return slope_at_value(value(r)); }

double RadialProfile::curvature_at_value(double u) const {
    double m4 = center * center * center * center, u4 = u * u * u * u;
    double gap = kind == ProfileKind::decaying ? m4 - u4 : u4 - m4;
    double c = std::sqrt(lambda) * u * u * u / std::sqrt(gap);
    return kind == ProfileKind::decaying ? -c : c;
}

double RadialProfile::curvature(double r) const { return curvature_at_value(value(r)); }

void RadialProfile::write_csv(std::ostream& os, int samples) const {
    os << "r,u,du_dr\n";
    for (int i = 0; i <= samples; ++i) {
        double r = radius * i / samples;
        double u = value(r);
        os << format_double(r) << ',' << format_double(u) << ',' << format_double(slope_at_value(u)) << '\n';
    }
}

RadialProfile decaying_profile(double R, double lambda, double value, Pin pin) {
    require(R > 0.0 && std::isfinite(R), "decaying profile: radius must be positive");
    require(lambda > 0.0 && std::isfinite(lambda), "decaying profile: lambda must be positive");
    require(value > 0.0 && std::isfinite(value), "decaying profile: pinned value must be positive");
    const double lb = ball_eigenvalue(R);
    RadialProfile p;
    p.kind = ProfileKind::decaying;
    p.lambda = lambda;
    p.radius = R;
    double z = quarter_root(lambda) * R;
    if (pin == Pin::center) {
        require(lambda <= lb * (1.0 + 1e-12), "decaying profile: lambda exceeds the ball eigenvalue");
        p.center = value;
        p.edge = lambda >= lb ? 0.0 : value * decay_integral_inverse(std::min(z, decay_integral_at_zero()));
    } else {
        require(lambda < lb, "decaying profile: a positive edge value needs lambda below the ball eigenvalue");
        double q = decay_integral_inverse(z);
        require(q > 0.0, "decaying profile: lambda too close to the ball eigenvalue");
        p.edge = value;
        p.center = value / q;
    }
    return p;
}

RadialProfile eigen_profile(double R, double m) { return decaying_profile(R, ball_eigenvalue(R), m, Pin::center); }

RadialProfile growing_profile(double R, double lambda, double delta) {
    require(R > 0.0 && std::isfinite(R), "growing profile: radius must be positive");
    require(lambda > 0.0 && std::isfinite(lambda), "growing profile: lambda must be positive");
    require(delta > 0.0 && std::isfinite(delta), "growing profile: delta must be positive");
    RadialProfile p;
    p.kind = ProfileKind::growing;
    p.lambda = lambda;
    p.radius = R;
    p.center = delta;
    p.edge = growth_integral_inverse(quarter_root(lambda) * R, delta);
    return p;
}

double dm_dlambda(double R, double lambda, double delta) {
    double m = decaying_profile(R, lambda, delta, Pin::edge).center;
    double q = delta / m;
    return R * m * m / (4.0 * delta * std::pow(lambda, 0.75)) * quarter_root(1.0 - q * q * q * q);
}

double decaying_center_lower_bound(double R, double lambda, double delta) {
    double lb = ball_eigenvalue(R);
    require(lambda > 0.0 && lambda < lb, "center lower bound: need 0 < lambda < lambda_B");
    return delta * std::cbrt(lambda / (lb - lambda));
}

GrowthBounds growth_bounds(double lambda, double delta, double R) {
    GrowthBounds b;
    b.value = growing_profile(R, lambda, delta).edge;
    const double a = growth_split_constant(), sigma = growth_sigma();
    const double base = std::exp(-a);  // same constant for both sides
    const double z = quarter_root(lambda) * R;
    b.lower = 2.0 * delta * std::pow(base, 1.0 / sigma) * std::exp(z / sigma);
    b.upper = 2.0 * base * delta * std::exp(z);
    b.applicable = b.value >= 2.0 * delta;
    if (!b.applicable) throw ParameterError("growth bounds: need u(R) >= 2 delta (radius too small)");
    b.strict = b.lower < b.value && b.value < b.upper;
    return b;
}

}  // namespace iplab
