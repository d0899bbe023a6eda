#include "iplab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include "iplab/errors.hpp"
#include "iplab/parallel.hpp"
#include "iplab/quadrature_radial.hpp"
#include "iplab/transforms.hpp"

namespace iplab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

struct Bounds {
    double inf = kInf;
    double sup = -kInf;
};

Bounds boundary_bounds(const GridField& f) {
    Bounds b;
    for (const auto& e : f.grid->parabolic_boundary()) {
        double v = f.at(e.node, e.level);
        b.inf = std::min(b.inf, v);
        b.sup = std::max(b.sup, v);
    }
    return b;
}

template <class Fn>
void for_interior(const CylinderGrid& g, Fn&& fn) {
    for (int k = 1; k < g.levels; ++k)
        for (int n : g.interior) fn(n, k);
}

int nearest_level(const CylinderGrid& g, double t) {
    int k = static_cast<int>(std::lround(t / g.level_dt()));
    return std::clamp(k, 0, g.levels - 1);
}

}  // namespace

// ---------------------------------------------------------------------------------------------
// Reports

void PropertyReport::record(double margin) {
    worst_violation = instances_run == 0 ? margin : std::max(worst_violation, margin);
    ++instances_run;
}

void PropertyReport::finish() {
    if (instances_run == 0) {
        vacuous = true;
        worst_violation = 0.0;
    }
    pass = worst_violation <= tolerance;
}

nlohmann::json PropertyReport::to_json() const {
    return {{"schema", "iplab.property_report/1"},
            {"property_id", property_id},
            {"instances_run", instances_run},
            {"instances_skipped", instances_skipped},
            {"worst_violation", worst_violation},
            {"tolerance", tolerance},
            {"pass", pass},
            {"vacuous", vacuous},
            {"artifacts", artifacts},
            {"details", details}};
}

void write_summary_csv(std::ostream& os, const std::vector<PropertyReport>& reports) {
    os << "property_id,instances_run,instances_skipped,worst_violation,tolerance,pass,vacuous\n";
    for (const auto& r : reports)
        os << r.property_id << ',' << r.instances_run << ',' << r.instances_skipped << ','
           << format_double(r.worst_violation) << ',' << format_double(r.tolerance) << ',' << (r.pass ? 1 : 0) << ','
           << (r.vacuous ? 1 : 0) << '\n';
}

double rounding_band(const GridField& field) {
    double big = 0.0;
    for (double v : field.values) big = std::max(big, std::abs(v));
    return 64.0 * std::numeric_limits<double>::epsilon() * big;
}

GridField sample_barrier(const Barrier& b, std::shared_ptr<const CylinderGrid> grid) {
    return sample_field(std::move(grid), [&](std::span<const double> x, double t) { return b.value(x, t); });
}

// ---------------------------------------------------------------------------------------------
// Generators

namespace {

struct Gaussian {
    std::vector<double> c;
    double amp = 0.0;
    double width = 0.0;
    double at(std::span<const double> x) const {
        double r2 = 0.0;
        for (std::size_t i = 0; i < c.size(); ++i) r2 += (x[i] - c[i]) * (x[i] - c[i]);
        return amp * std::exp(-r2 / (width * width));
    }
};

std::vector<Gaussian> random_bumps(const Domain& d, SeededGenerator& rng, double amp_max) {
    std::vector<double> lo = d.lo, hi = d.hi;
    if (d.kind == DomainKind::ball) {
        lo.assign(d.dim, 0.0);
        hi.assign(d.dim, 0.0);
        for (int i = 0; i < d.dim; ++i) {
            lo[i] = d.center[i] - d.radius;
            hi[i] = d.center[i] + d.radius;
        }
    }
    int count = 1 + rng.below(3);
    std::vector<Gaussian> out(count);
    for (auto& g : out) {
        g.c.resize(d.dim);
        for (int i = 0; i < d.dim; ++i) g.c[i] = rng.uniform(lo[i], hi[i]);
        g.amp = rng.uniform(0.0, amp_max);
        g.width = rng.uniform(0.1, 0.4) * d.diameter();
    }
    return out;
}

double sum_bumps(const std::vector<Gaussian>& bumps, std::span<const double> x) {
    double s = 0.0;
    for (const auto& g : bumps) s += g.at(x);
    return s;
}

}  // namespace

BoundaryData random_positive_data(const Domain& domain, std::uint64_t seed) {
    SeededGenerator rng(seed);
    double c0 = rng.uniform(0.5, 1.5);
    auto bumps = random_bumps(domain, rng, 1.0);
    double b = rng.uniform(0.0, 0.5), w = rng.uniform(0.5, 4.0);
    BoundaryData data;
    data.name = "random-positive-" + std::to_string(seed);
    data.initial = [c0, bumps](std::span<const double> x) { return c0 + sum_bumps(bumps, x); };
    auto f = data.initial;
    data.lateral = [f, b, w](std::span<const double> x, double t) { return f(x) * (1.0 + b * std::sin(w * t)); };
    return data;
}

std::pair<BoundaryData, BoundaryData> random_ordered_data(const Domain& domain, std::uint64_t seed) {
    BoundaryData lower = random_positive_data(domain, seed);
    SeededGenerator rng(seed ^ 0x9e3779b97f4a7c15ULL);
    auto extra = random_bumps(domain, rng, 0.5);
    double lift = rng.uniform(0.0, 0.2), b = rng.uniform(0.0, 0.5), w = rng.uniform(0.5, 4.0);
    BoundaryData upper;
    upper.name = "random-ordered-upper-" + std::to_string(seed);
    auto f1 = lower.initial;
    auto g1 = lower.lateral;
    upper.initial = [f1, extra, lift](std::span<const double> x) { return f1(x) + lift + sum_bumps(extra, x); };
    upper.lateral = [g1, extra, lift, b, w](std::span<const double> x, double t) {
        return g1(x, t) + (lift + sum_bumps(extra, x)) * (1.0 + b * std::sin(w * t));
    };
    return {std::move(lower), std::move(upper)};
}

// ---------------------------------------------------------------------------------------------
// Maximum principle, comparison, minimum propagation

PropertyReport check_weak_max_principle(const std::vector<const GridField*>& fields, double tolerance) {
    PropertyReport rep;
    rep.property_id = "weak_max_principle";
    rep.tolerance = tolerance;
    auto& inst = rep.details["instances"] = nlohmann::json::array();
    for (const GridField* f : fields) {
        Bounds b = boundary_bounds(*f);
        double upper = -kInf, lower = -kInf;
        for_interior(*f->grid, [&](int n, int k) {
            double v = f->at(n, k);
            upper = std::max(upper, v - b.sup);
            lower = std::max(lower, b.inf - v);
        });
        if (!std::isfinite(upper)) {
            ++rep.instances_skipped;
            continue;
        }
        rep.record(std::max(upper, lower));
        inst.push_back({{"boundary_inf", b.inf}, {"boundary_sup", b.sup}, {"upper_margin", upper},
                        {"lower_margin", lower}});
    }
    rep.finish();
    return rep;
}

PropertyReport check_comparison(const std::vector<std::pair<const GridField*, const GridField*>>& pairs,
                                double tolerance, bool ratio_mode) {
    PropertyReport rep;
    rep.property_id = ratio_mode ? "comparison_ratio" : "comparison";
    rep.tolerance = tolerance;
    auto& inst = rep.details["instances"] = nlohmann::json::array();
    for (const auto& [u, v] : pairs) {
        const CylinderGrid& g = *u->grid;
        const auto entries = g.parabolic_boundary();
        if (ratio_mode) {
            auto ratio = [&](int n, int k) {
                double d = v->at(n, k);
                return d > 0.0 ? u->at(n, k) / d : -kInf;
            };
            double boundary = -kInf, inside = -kInf;
            for (const auto& e : entries) boundary = std::max(boundary, ratio(e.node, e.level));
            for_interior(g, [&](int n, int k) { inside = std::max(inside, ratio(n, k)); });
            rep.record(inside - boundary);
            inst.push_back({{"boundary_ratio_sup", boundary}, {"interior_ratio_sup", inside}});
            continue;
        }
        double pre = -kInf;
        for (const auto& e : entries) pre = std::max(pre, u->at(e.node, e.level) - v->at(e.node, e.level));
        if (pre > tolerance) {
            ++rep.instances_skipped;
            inst.push_back({{"skipped", true}, {"boundary_margin", pre}});
            continue;
        }
        double margin = -kInf;
        for (std::size_t i = 0; i < u->values.size(); ++i) margin = std::max(margin, u->values[i] - v->values[i]);
        rep.record(margin);
        inst.push_back({{"boundary_margin", pre}, {"margin", margin}});
    }
    rep.finish();
    return rep;
}

PropertyReport check_min_propagation(const GridField& field, double tolerance) {
    PropertyReport rep;
    rep.property_id = "min_propagation";
    rep.tolerance = tolerance;
    const CylinderGrid& g = *field.grid;
    const double m = boundary_bounds(field).inf;
    int node = -1, level = -1;
    for (int k = g.levels - 1; k >= 1 && node < 0; --k)
        for (int n : g.interior)
            if (field.at(n, k) <= m + tolerance) {
                node = n;
                level = k;
                break;
            }
    rep.details["boundary_inf"] = m;
    if (node < 0) {
        rep.finish();
        return rep;
    }
    double margin = -kInf;
    for (int k = 0; k <= level; ++k)
        for (int n = 0; n < g.node_count(); ++n) margin = std::max(margin, field.at(n, k) - m);
    rep.record(margin);
    rep.details["anchor_node"] = node;
    rep.details["anchor_level"] = level;
    rep.finish();
    return rep;
}

MinmInstrument minm_instrument(const GridField& field, int node, int level, const MinmBump& bump, double m) {
    const CylinderGrid& g = *field.grid;
    MinmInstrument out;
    out.bottom_level = nearest_level(g, bump.s - bump.eps);
    out.fits = true;
    const double tol = 1e-12 * std::max(1.0, std::abs(m));
    for (int k = out.bottom_level; k <= level && out.fits; ++k)
        for (int n = 0; n < g.node_count(); ++n) {
            double r = distance(g.x(n), bump.center);
            bool bottom = k == out.bottom_level && r < bump.rho;
            bool side = r >= bump.rho;
            if ((bottom || side) && m + bump.value(g.x(n), g.time(k)) > field.at(n, k) + tol) {
                out.fits = false;
                break;
            }
        }
    out.anchor_excess = m + bump.value(g.x(node), g.time(level)) - field.at(node, level);
    return out;
}

PropertyReport check_minm_bump(const MinmBump& bump, int count, std::uint64_t seed) {
    PropertyReport rep;
    rep.property_id = "minm_bump_residual";
    rep.tolerance = 0.0;
    SeededGenerator rng(seed);
    double worst_face = 0.0;
    for (int i = 0; i < count; ++i) {
        double r = bump.rho * rng.uniform(), t = rng.uniform(bump.s - bump.eps, bump.s + bump.eps / 3.0);
        double res = bump.residual(r, t), bound = bump.residual_lower_bound(r);
        // rounding allowance relative to the size of the terms
        double scale = std::max({1.0, std::abs(res), std::abs(bound)});
        rep.record(bound - res - 1e-12 * scale);
        worst_face = std::max(worst_face, std::abs(bump.value_at_radius(bump.rho, t)));
    }
    rep.details = {{"lateral_face_max", worst_face}, {"bump", bump.to_json()}};
    if (worst_face != 0.0) rep.record(worst_face);
    rep.finish();
    return rep;
}

// ---------------------------------------------------------------------------------------------
// Decay

DecaySeries decay_series(const GridField& phi) {
    DecaySeries s;
    for (int k = 0; k < phi.levels(); ++k) {
        auto lv = phi.level(k);
        s.t.push_back(phi.grid->time(k));
        s.sup.push_back(*std::max_element(lv.begin(), lv.end()));
    }
    return s;
}

double fit_decay_slope(const DecaySeries& series, int& points) {
    const std::size_t n = series.t.size(), first = n / 2;
    points = static_cast<int>(n - first);
    double st = 0, sy = 0, stt = 0, sty = 0;
    for (std::size_t i = first; i < n; ++i) {
        double t = series.t[i], y = std::log(series.sup[i]);
        st += t;
        sy += y;
        stt += t * t;
        sty += t * y;
    }
    double den = points * stt - st * st;
    return den > 0.0 ? (points * sty - st * sy) / den : 0.0;
}

PropertyReport check_decay_rate(const GridField& phi, double lambda, bool eigen_data, double fraction) {
    PropertyReport rep;
    rep.property_id = eigen_data ? "decay_rate_eigen" : "decay_rate_generic";
    rep.tolerance = fraction;
    DecaySeries s = decay_series(phi);
    int points = 0;
    double slope = fit_decay_slope(s, points);
    double increase = 0.0;
    for (std::size_t i = 1; i < s.sup.size(); ++i)
        increase = std::max(increase, (s.sup[i] - s.sup[i - 1]) / s.sup[i - 1]);
    const double expected = -lambda / 3.0;
    rep.details = {{"fitted_slope", slope},   {"expected_slope", expected}, {"fit_points", points},
                   {"max_relative_increase", increase}};
    if (points < 20) {
        rep.details["inconclusive"] = true;
        rep.finish();
        return rep;
    }
    double ratio = slope / expected;
    double margin = eigen_data ? std::abs(ratio - 1.0) : 1.0 - ratio;
    // any increase of sup phi beyond rounding is a failure regardless of the fit
    if (increase > 1e-12) margin = std::max(margin, fraction + increase);
    rep.record(margin);
    rep.finish();
    return rep;
}

PropertyReport check_staircase(const GridField& phi, const Staircase& st, double tolerance) {
    PropertyReport rep;
    rep.property_id = "staircase_bound";
    rep.tolerance = tolerance;
    const CylinderGrid& g = *phi.grid;
    auto& inst = rep.details["slabs"] = nlohmann::json::array();
    auto first_level = [&](double t) {
        for (int k = 0; k < g.levels; ++k)
            if (g.time(k) >= t - 1e-12) return k;
        return -1;
    };
    int k1 = first_level(st.times.front());
    if (k1 >= 0) {
        double pre = -kInf;
        for (int n = 0; n < g.node_count(); ++n) pre = std::max(pre, phi.at(n, k1) - st.psi_at(g.x(n)));
        rep.details["initial_margin"] = pre;
        if (pre > tolerance) {
            // the staircase does not start above the field; nothing can be concluded
            rep.details["precondition_failed"] = true;
            ++rep.instances_skipped;
            rep.finish();
            return rep;
        }
    }
    for (int k = 1; k < st.slabs(); ++k) {
        int lv = first_level(st.times[k]);
        if (lv < 0) {
            // a slab beyond the stored levels is a failure, not a silent pass
            rep.details["uncovered_from_k"] = k;
            rep.record(kInf);
            break;
        }
        double scale = std::ldexp(1.0, -k), margin = -kInf;
        for (int n = 0; n < g.node_count(); ++n) margin = std::max(margin, phi.at(n, lv) - st.psi_at(g.x(n)) * scale);
        rep.record(margin);
        inst.push_back({{"k", k}, {"time", g.time(lv)}, {"margin", margin}});
    }
    rep.finish();
    return rep;
}

double staircase_lambda(const GridField& phi, int level, const Domain& ball, double epsilon) {
    const CylinderGrid& g = *phi.grid;
    auto above = [&](double lambda) {
        RadialProfile psi = decaying_profile(ball.radius, lambda, epsilon, Pin::edge);
        for (int n = 0; n < g.node_count(); ++n)
            if (psi.value(distance(g.x(n), ball.center)) < phi.at(n, level)) return false;
        return true;
    };
    double hi = ball_eigenvalue(ball.radius) * (1.0 - 1e-9), lo = 0.0;
    if (!above(hi)) throw ParameterError("staircase: no profile with this boundary value lies above the field");
    for (int i = 0; i < 60; ++i) {
        double mid = 0.5 * (lo + hi);
        (mid > 0.0 && above(mid) ? hi : lo) = mid;
    }
    return hi;
}

// ---------------------------------------------------------------------------------------------
// Perron sandwich

PropertyReport check_sandwich(const BarrierContext& ctx, const GridField& solution,
                              const std::vector<double>& epsilons, double band, int level_stride, int jobs) {
    PropertyReport rep;
    rep.property_id = "perron_sandwich";
    rep.tolerance = 0.0;
    const CylinderGrid& g = *ctx.grid;
    auto anchors = anchor_net(g, level_stride);
    auto& inst = rep.details["epsilons"] = nlohmann::json::array();
    double previous_gap = kInf, gap_increase = 0.0;
    for (double eps : epsilons) {
        auto subs = build_family(ctx, anchors, eps, BarrierKind::sub, jobs);
        auto sups = build_family(ctx, anchors, eps, BarrierKind::super, jobs);
        GridField lower = perron_family_sup(subs, ctx.grid, jobs);
        GridField upper = perron_family_inf(sups, ctx.grid, jobs);
        double margin = -kInf;
        for_interior(g, [&](int n, int k) {
            double v = solution.at(n, k);
            margin = std::max({margin, lower.at(n, k) - v, v - upper.at(n, k)});
        });
        double gap = 0.0, domination = -kInf;
        for (std::size_t i = 0; i < ctx.entries.size(); ++i) {
            const auto& e = ctx.entries[i];
            double h = ctx.entry_value[i], lo = lower.at(e.node, e.level), hi = upper.at(e.node, e.level);
            gap = std::max({gap, h - lo, hi - h});
            domination = std::max({domination, lo - h, h - hi});
        }
        double allowance = band + 2.0 * eps;
        rep.record(margin - allowance);
        if (gap > previous_gap) gap_increase = std::max(gap_increase, gap - previous_gap);
        previous_gap = gap;
        inst.push_back({{"epsilon", eps},
                        {"family_size", subs.size()},
                        {"sandwich_margin", margin},
                        {"allowance", allowance},
                        {"boundary_gap", gap},
                        {"boundary_domination_margin", domination}});
    }
    rep.details["gap_increase"] = gap_increase;
    if (gap_increase > 0.0) rep.record(gap_increase);
    rep.finish();
    return rep;
}

// ---------------------------------------------------------------------------------------------
// Bump improvement

std::optional<JetViolation> find_super_violation(const std::function<double(std::span<const double>, double)>& fn,
                                                 const CylinderGrid& grid, double threshold) {
    std::optional<JetViolation> best;
    const double hx = grid.h, ht = grid.level_dt();
    const double reach = 2.0 * hx * std::sqrt(static_cast<double>(grid.dim)) + 1e-12;
    for (int k = 2; k + 2 < grid.levels; ++k)
        for (int n : grid.interior) {
            if (grid.domain.signed_distance(grid.x(n)) <= reach) continue;
            JetFit jet = fit_jet(fn, grid.x(n), grid.time(k), hx, ht);
            if (jet.quantity > threshold && (!best || jet.quantity > best->jet.quantity))
                best = JetViolation{n, k, std::move(jet)};
        }
    return best;
}

PropertyReport check_bump_improvement(std::shared_ptr<const CylinderGrid> grid,
                                      const std::function<double(std::span<const double>, double)>& w,
                                      const Exist13Bump& bump, double r, int anchor_node, int anchor_level) {
    PropertyReport rep;
    rep.property_id = "bump_improvement";
    rep.tolerance = 0.0;
    const CylinderGrid& g = *grid;
    auto inside = [&](std::span<const double> x, double t, double radius) {
        return distance(x, bump.z) < radius && std::abs(t - bump.theta) < radius;
    };
    auto improved = [&](std::span<const double> x, double t) {
        double base = w(x, t);
        return inside(x, t, r) ? std::max(base, bump.value(x, t)) : base;
    };
    GridField before = sample_field(grid, w);
    GridField after = sample_field(grid, improved);

    double gain = after.at(anchor_node, anchor_level) - before.at(anchor_node, anchor_level);
    long outside_mismatch = 0, annulus_lifted = 0;
    for (int k = 0; k < g.levels; ++k)
        for (int n = 0; n < g.node_count(); ++n) {
            double t = g.time(k);
            bool changed = after.at(n, k) != before.at(n, k);
            if (!inside(g.x(n), t, r) && changed) ++outside_mismatch;
            if (inside(g.x(n), t, r) && !inside(g.x(n), t, 0.5 * r) && changed) ++annulus_lifted;
        }

    // seam {w = psi} at t = theta: |x - z| = sqrt(delta / nu) along each axis, both signs
    const std::size_t n = bump.z.size();
    const double seam = std::sqrt(bump.delta / bump.nu), hx = 1e-3 * std::max(seam, 1e-12);
    double min_quantity = kInf;
    int seams = 0;
    for (std::size_t d = 0; d < n; ++d)
        for (double sgn : {-1.0, 1.0}) {
            std::vector<double> x = bump.z;
            x[d] += sgn * seam;
            JetFit jet = fit_jet(improved, x, bump.theta, hx, hx * hx);
            min_quantity = std::min(min_quantity, jet.quantity);
            ++seams;
        }

    // strictness: a zero gain is a failure, so it maps to a positive violation
    double violation = gain > 0.0 ? -gain : 1.0;
    violation = std::max(violation, static_cast<double>(outside_mismatch + annulus_lifted));
    if (seams > 0) violation = std::max(violation, -min_quantity);
    rep.record(violation);
    rep.details = {{"anchor_gain", gain},
                   {"expected_gain", bump.delta},
                   {"outside_mismatches", outside_mismatch},
                   {"annulus_lifted_nodes", annulus_lifted},
                   {"seam_points", seams},
                   {"seam_min_quantity", min_quantity},
                   {"r", r},
                   {"bump", bump.to_json()}};
    rep.finish();
    return rep;
}

// ---------------------------------------------------------------------------------------------
// Large-ball surrogate

PropertyReport check_large_ball_surrogate(const std::vector<double>& radii, const SpaceFn& f, double nu, double mu,
                                          double cells_per_radius, double T, int levels, const SolverConfig& config,
                                          std::vector<SurrogateCase>* cases) {
    PropertyReport rep;
    rep.property_id = "large_ball_surrogate";
    rep.tolerance = 0.0;
    auto& inst = rep.details["radii"] = nlohmann::json::array();
    double previous_tol = kInf, tol_increase = 0.0;
    for (double R : radii) {
        Domain ball = Domain::ball(std::vector<double>(2, 0.0), R);
        auto grid = std::make_shared<const CylinderGrid>(build_grid(ball, R / cells_per_radius, T, levels));
        BoundaryData data;
        data.name = "surrogate";
        data.initial = f;
        data.lateral = [f](std::span<const double> x, double) { return f(x); };
        SolveResult res = solve(grid, data, config);
        const GridField& phi = res.field;

        SurrogateCase c;
        c.R = R;
        c.interior_min = kInf;
        c.interior_max = -kInf;
        for (int k = 0; k < grid->levels; ++k)
            for (int n = 0; n < grid->node_count(); ++n) {
                if (distance(grid->x(n), ball.center) > 0.5 * R) continue;
                c.interior_min = std::min(c.interior_min, phi.at(n, k));
                c.interior_max = std::max(c.interior_max, phi.at(n, k));
            }
        double M = *std::max_element(phi.values.begin(), phi.values.end());
        double Q = std::max(M + 1.0, 3.0 * mu) / mu;
        // barrier estimate on the half-radius ball
        const double rho = 0.5 * R;
        double lam_up = std::pow(growth_integral(Q, 1.0) / rho, 4.0);
        double lam_dn = ball_eigenvalue(rho);
        c.tol = std::max(mu * std::expm1(lam_up * T / 3.0), -nu * std::expm1(-lam_dn * T / 3.0));

        // the barriers of the full ball: Gamma_lambda above, Theta_R below
        double lam_R = std::pow(growth_integral(Q, 1.0) / R, 4.0);
        RadialProfile up = growing_profile(R, lam_R, mu);
        RadialProfile dn = eigen_profile(R, nu);
        double lam_B = ball_eigenvalue(R);
        c.upper_barrier_gap = kInf;
        c.lower_barrier_gap = kInf;
        for (int k = 0; k < grid->levels; ++k)
            for (int n = 0; n < grid->node_count(); ++n) {
                double r = std::min(distance(grid->x(n), ball.center), R), t = grid->time(k);
                c.upper_barrier_gap = std::min(c.upper_barrier_gap, up.value(r) * std::exp(lam_R * t / 3.0) - phi.at(n, k));
                c.lower_barrier_gap = std::min(c.lower_barrier_gap, phi.at(n, k) - dn.value(r) * std::exp(-lam_B * t / 3.0));
            }
        double margin = std::max({nu - c.tol - c.interior_min, c.interior_max - mu - c.tol, -c.upper_barrier_gap,
                                  -c.lower_barrier_gap});
        rep.record(margin);
        if (c.tol >= previous_tol) tol_increase = std::max(tol_increase, c.tol - previous_tol + 1e-300);
        previous_tol = c.tol;
        inst.push_back({{"R", R},
                        {"tol", c.tol},
                        {"interior_min", c.interior_min},
                        {"interior_max", c.interior_max},
                        {"upper_barrier_gap", c.upper_barrier_gap},
                        {"lower_barrier_gap", c.lower_barrier_gap},
                        {"steps", res.steps}});
        if (cases) cases->push_back(c);
    }
    rep.details["tol_increase"] = tol_increase;
    if (tol_increase > 0.0) rep.record(tol_increase);
    rep.finish();
    return rep;
}

}  // namespace iplab

namespace iplab {

std::vector<PropertyReport> audit_barriers(const BarrierContext& ctx, const std::vector<Barrier>& family,
                                           int region_samples, std::uint64_t seed) {
    PropertyReport dom, pin, seam, sign;
    dom.property_id = "barrier_domination";
    pin.property_id = "barrier_pin";
    seam.property_id = "barrier_seams";
    sign.property_id = "barrier_residual_sign";
    dom.tolerance = 0.0;
    pin.tolerance = 1e-9;
    seam.tolerance = 1e-9;
    sign.tolerance = 0.0;
    const CylinderGrid& g = *ctx.grid;
    long constants = 0, sign_points = 0;
    for (std::size_t i = 0; i < family.size(); ++i) {
        const Barrier& b = family[i];
        const double side = b.kind == BarrierKind::sub ? 1.0 : -1.0;
        // P_T side: exact on plateau/constant pieces, rounding allowance on the bump
        double exact = -kInf, smooth = -kInf;
        for (std::size_t e = 0; e < ctx.entries.size(); ++e) {
            auto x = g.x(ctx.entries[e].node);
            double t = g.time(ctx.entries[e].level);
            double margin = side * (b.value(x, t) - ctx.entry_value[e]);
            if (b.constant || b.piece(x, t) == BarrierPiece::plateau)
                exact = std::max(exact, margin);
            else
                smooth = std::max(smooth, margin - 1e-12 * std::max(1.0, std::abs(ctx.entry_value[e])));
        }
        dom.record(std::max(exact, smooth));

        double expected = b.constant ? b.data_value : b.data_value - side * 2.0 * b.epsilon;
        pin.record(std::abs(b.value(b.anchor, b.anchor_time) - expected));
        if (b.constant) {
            ++constants;
            continue;
        }

        double jump = 0.0;
        for (const auto& sp : seam_points(b, 16, seed + i)) {
            // relative to the value: super barriers grow like exp(rate t / 3)
            double va = b.piece_value(sp.a, sp.x, sp.t), vb = b.piece_value(sp.b, sp.x, sp.t);
            jump = std::max(jump, std::abs(va - vb) / std::max({1.0, std::abs(va), std::abs(vb)}));
        }
        seam.record(jump);

        std::vector<BarrierPiece> pieces;
        if (b.family == BarrierFamily::gamma_sub_cone || b.family == BarrierFamily::gamma_sup_cusp)
            pieces = {BarrierPiece::plateau, BarrierPiece::upper, BarrierPiece::lower};
        else
            pieces = {BarrierPiece::plateau, BarrierPiece::radial};
        const int per_piece = std::max(1, region_samples / static_cast<int>(pieces.size()));
        // residuals are normalised by the largest rate in the barrier
        const double scale = std::max({1.0, std::abs(b.rate), std::abs(b.k), std::pow(b.c, 4.0), b.profile.lambda});
        double worst = -kInf;
        for (BarrierPiece p : pieces)
            for (const auto& [x, t] : region_points(b, p, per_piece, seed + 7919 * i + static_cast<int>(p))) {
                double r = b.residual_gamma(x, t) / scale;
                // pieces whose residual vanishes identically (lower cone, alpha radial) carry rounding
                worst = std::max(worst, -side * r - 1e-12);
                ++sign_points;
            }
        if (std::isfinite(worst)) sign.record(worst);
    }
    for (auto* r : {&dom, &pin, &seam, &sign}) {
        r->details["family_size"] = family.size();
        r->details["constant_barriers"] = constants;
        r->finish();
    }
    sign.details["sampled_points"] = sign_points;
    return {dom, pin, seam, sign};
}

double radial_ode_residual(const RadialProfile& profile, double lo, double hi, int samples) {
    const double R = profile.radius, s = 1e-3 * R, m = profile.center;
    const double sgn = profile.kind == ProfileKind::decaying ? 1.0 : -1.0;
    double worst = 0.0;
    for (int i = 0; i <= samples; ++i) {
        double r = R * (lo + (hi - lo) * i / samples);
        double u2m = profile.value(r - 2 * s), u1m = profile.value(r - s), u0 = profile.value(r);
        double u1p = profile.value(r + s), u2p = profile.value(r + 2 * s);
        double d1 = (u2m - 8.0 * u1m + 8.0 * u1p - u2p) / (12.0 * s);
        double d2 = (-u2m + 16.0 * u1m - 30.0 * u0 + 16.0 * u1p - u2p) / (12.0 * s * s);
        double res = d1 * d1 * d2 + sgn * profile.lambda * u0 * u0 * u0;
        worst = std::max(worst, std::abs(res) / (profile.lambda * m * m * m));
    }
    return worst;
}

PropertyReport check_log_inequalities(int count, std::uint64_t seed) {
    PropertyReport rep;
    rep.property_id = "log_inequalities";
    rep.tolerance = 0.0;
    SeededGenerator rng(seed);
    long failures = 0;
    for (int i = 0; i < count; ++i) {
        double c = rng.uniform(-1.0 / 3.0, 1.0 / 3.0);
        auto [log_ok, exp_ok] = log_inequality_check(c);
        long bad = (log_ok ? 0 : 1) + (exp_ok ? 0 : 1);
        failures += bad;
        rep.record(static_cast<double>(bad));
    }
    rep.details["failures"] = failures;
    rep.finish();
    return rep;
}

}  // namespace iplab
