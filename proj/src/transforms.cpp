#include "iplab/transforms.hpp"

#include <cmath>
#include <limits>

#include "iplab/errors.hpp"

namespace iplab {

namespace {

enum class Form { pi, gamma };

struct Stencil {
    int center;
    int plus[3], minus[3];
    int pp[3][3], pm[3][3];  // offsets (+s e_i + s e_j) and (+s e_i - s e_j), i < j
    int mm[3][3], mp[3][3];
};

bool gather(const CylinderGrid& g, int node, int s, Stencil& st) {
    st.center = node;
    int off[3] = {0, 0, 0};
    auto at = [&]() { return g.neighbor(node, {off, static_cast<std::size_t>(g.dim)}); };
    for (int i = 0; i < g.dim; ++i) {
        off[i] = s;
        if ((st.plus[i] = at()) < 0) return false;
        off[i] = -s;
        if ((st.minus[i] = at()) < 0) return false;
        off[i] = 0;
        for (int j = i + 1; j < g.dim; ++j) {
            const int si[4] = {s, s, -s, -s}, sj[4] = {s, -s, -s, s};
            int* dst[4] = {&st.pp[i][j], &st.pm[i][j], &st.mm[i][j], &st.mp[i][j]};
            for (int q = 0; q < 4; ++q) {
                off[i] = si[q];
                off[j] = sj[q];
                if ((*dst[q] = at()) < 0) return false;
            }
            off[i] = off[j] = 0;
        }
    }
    return true;
}

// Returns the residual and a magnitude used for the rounding floor.
std::pair<double, double> evaluate(const GridField& u, const Stencil& st, int level, int s, Form form,
                                   double sigma) {
    const auto& g = *u.grid;
    const double d = s * g.h, dt = s * g.level_dt();
    auto v = [&](int n) { return u.at(n, level); };
    double c = v(st.center);
    double grad[3], hess[3][3];
    for (int i = 0; i < g.dim; ++i) {
        grad[i] = (v(st.plus[i]) - v(st.minus[i])) / (2.0 * d);
        hess[i][i] = (v(st.plus[i]) - 2.0 * c + v(st.minus[i])) / (d * d);
        for (int j = i + 1; j < g.dim; ++j)
            hess[i][j] = hess[j][i] =
                (v(st.pp[i][j]) - v(st.pm[i][j]) - v(st.mp[i][j]) + v(st.mm[i][j])) / (4.0 * d * d);
    }
    double lap = 0.0, weight = 0.0, g2 = 0.0;
    for (int i = 0; i < g.dim; ++i) {
        g2 += grad[i] * grad[i];
        for (int j = 0; j < g.dim; ++j) {
            lap += grad[i] * grad[j] * hess[i][j];
            weight += std::abs(grad[i] * grad[j]);
        }
    }
    double ut = (u.at(st.center, level + s) - u.at(st.center, level - s)) / (2.0 * dt);
    const double eps = std::numeric_limits<double>::epsilon();
    double scale = std::abs(c) * (4.0 * weight / (d * d));
    double r;
    if (form == Form::pi) {
        r = lap - 3.0 * c * c * ut;
        scale += 3.0 * c * c * std::abs(c) / dt;
    } else {
        r = lap + sigma * g2 * g2 - 3.0 * ut;
        scale += 3.0 * std::abs(c) / dt + sigma * g2 * g2;
    }
    return {r, 64.0 * eps * scale};
}

ResidualReport residual(const GridField& u, Form form, double sigma) {
    const auto& g = *u.grid;
    ResidualReport rep;
    rep.values.assign(u.values.size(), std::numeric_limits<double>::quiet_NaN());
    rep.h = g.h;
    rep.dt = g.level_dt();
    double trunc = 0.0, floor = 0.0;
    bool any_doubled = false;
    Stencil s1, s2;
    for (int n : g.interior) {
        gather(g, n, 1, s1);
        bool has2 = gather(g, n, 2, s2);
        for (int k = 1; k + 1 < g.levels; ++k) {
            auto [r1, f1] = evaluate(u, s1, k, 1, form, sigma);
            rep.values[static_cast<std::size_t>(k) * g.node_count() + n] = r1;
            floor = std::max(floor, f1);
            if (std::abs(r1) > rep.max_abs || rep.worst_node < 0) {
                rep.max_abs = std::abs(r1);
                rep.worst_node = n;
                rep.worst_level = k;
            }
            if (has2 && k >= 2 && k + 2 < g.levels) {
                auto [r2, f2] = evaluate(u, s2, k, 2, form, sigma);
                trunc = std::max(trunc, std::abs(r2 - r1) / 3.0);
                floor = std::max(floor, f2);
                any_doubled = true;
            }
        }
    }
    rep.band = (any_doubled ? 10.0 * trunc : rep.max_abs) + floor;
    return rep;
}

}  // namespace

ResidualReport residual_pi(const GridField& phi) { return residual(phi, Form::pi, 1.0); }

ResidualReport residual_gamma(const GridField& eta, double sigma) { return residual(eta, Form::gamma, sigma); }

GridField to_log(const GridField& phi) {
    GridField out(phi.grid);
    for (std::size_t i = 0; i < phi.values.size(); ++i) {
        if (!(phi.values[i] > 0.0)) throw DataError("log transform: field has a non-positive entry");
        out.values[i] = std::log(phi.values[i]);
    }
    return out;
}

GridField from_log(const GridField& eta) {
    GridField out(eta.grid);
    for (std::size_t i = 0; i < eta.values.size(); ++i) out.values[i] = std::exp(eta.values[i]);
    return out;
}

GridField sample_field(std::shared_ptr<const CylinderGrid> grid,
                       const std::function<double(std::span<const double>, double)>& fn) {
    GridField out(grid);
    for (int k = 0; k < grid->levels; ++k)
        for (int n = 0; n < grid->node_count(); ++n) out.at(n, k) = fn(grid->x(n), grid->time(k));
    return out;
}

const char* to_string(SolutionClass c) {
    switch (c) {
        case SolutionClass::exact: return "exact";
        case SolutionClass::sub: return "sub";
        case SolutionClass::super: return "super";
    }
    return "?";
}

double SeparableSolution::value(std::span<const double> x, double t) const {
    double r2 = 0.0;
    for (std::size_t i = 0; i < center.size(); ++i) r2 += (x[i] - center[i]) * (x[i] - center[i]);
    return profile.value(std::sqrt(r2)) * std::exp(k * t);
}

double SeparableSolution::residual(std::span<const double> x, double t) const {
    double r2 = 0.0;
    for (std::size_t i = 0; i < center.size(); ++i) r2 += (x[i] - center[i]) * (x[i] - center[i]);
    double u = profile.value(std::sqrt(r2));
    return -u * u * u * std::exp(3.0 * k * t) * (profile.signed_lambda() + 3.0 * k);
}

SeparableSolution make_separable(const RadialProfile& profile, std::vector<double> center, double k) {
    if (!std::isfinite(k)) throw ParameterError("separable solution: rate must be finite");
    SeparableSolution s{profile, std::move(center), k, SolutionClass::exact};
    double gap = profile.signed_lambda() + 3.0 * k;
    double scale = std::max(std::abs(profile.lambda), std::abs(3.0 * k));
    if (std::abs(gap) <= 1e-12 * scale)
        s.classification = SolutionClass::exact;
    else
        s.classification = gap > 0.0 ? SolutionClass::super : SolutionClass::sub;
    return s;
}

double separable_residual_identity(double u, double g, double g_prime, double lambda_s) {
    return -g * g * u * u * u * (lambda_s * g + 3.0 * g_prime);
}

std::pair<bool, bool> log_inequality_check(double c) {
    if (!(std::abs(c) <= 1.0 / 3.0)) throw ParameterError("log inequality: |c| must not exceed 1/3");
    double c2 = c * c, c3 = c2 * c;
    // remainders after the quadratic Taylor polynomial; series near zero avoids cancellation
    double log_rem, exp_rem;
    if (std::abs(c) < 1e-3) {
        log_rem = c3 / 3.0 - c2 * c2 / 4.0 + c3 * c2 / 5.0 - c3 * c3 / 6.0;
        exp_rem = c3 / 6.0 + c2 * c2 / 24.0 + c3 * c2 / 120.0 + c3 * c3 / 720.0;
    } else {
        log_rem = std::log1p(c) - (c - 0.5 * c2);
        exp_rem = std::expm1(c) - (c + 0.5 * c2);
    }
    bool log_ok = c >= 0.0 ? (0.0 <= log_rem && log_rem <= c3) : (c3 <= log_rem && log_rem <= 0.0);
    bool exp_ok = c >= 0.0 ? (0.0 <= exp_rem && exp_rem <= c3) : (c3 <= exp_rem && exp_rem <= 0.0);
    return {log_ok, exp_ok};
}

}  // namespace iplab
