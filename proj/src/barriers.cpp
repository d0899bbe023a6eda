#include "iplab/barriers.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "iplab/errors.hpp"
#include "iplab/parallel.hpp"

namespace iplab {

namespace {

constexpr int kMaxHalvings = 80;

double distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

double quarter_root(double x) { return std::sqrt(std::sqrt(x)); }

// Platform-independent uniform draws from the standard engine.
struct Sampler {
    std::mt19937_64 engine;
    explicit Sampler(std::uint64_t seed) : engine(seed) {}
    double uniform() { return static_cast<double>(engine() >> 11) * 0x1.0p-53; }
    double open(double lo, double hi) { return lo + (hi - lo) * (0.001 + 0.998 * uniform()); }
    std::vector<double> direction(int n) {
        std::vector<double> d(n);
        double norm = 0.0;
        do {
            norm = 0.0;
            for (auto& v : d) {
                double u1 = std::max(uniform(), 1e-300), u2 = uniform();
                v = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
                norm += v * v;
            }
        } while (norm < 1e-20);
        norm = std::sqrt(norm);
        for (auto& v : d) v /= norm;
        return d;
    }
};

std::vector<double> along(std::span<const double> y, const std::vector<double>& dir, double r) {
    std::vector<double> x(y.begin(), y.end());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += r * dir[i];
    return x;
}

void require_epsilon(const BarrierContext& ctx, double eps, BarrierKind kind) {
    if (!(eps > 0.0)) throw ParameterError("barrier: epsilon must be positive");
    if (kind == BarrierKind::sub && !(ctx.m - 2.0 * eps > 0.0))
        throw ParameterError("barrier: need m - 2 epsilon > 0 (m = " + format_double(ctx.m) + ")");
}

Barrier start(const BarrierContext& ctx, BarrierFamily family, BarrierKind kind, int node, int level, double eps) {
    require_epsilon(ctx, eps, kind);
    Barrier b;
    b.family = family;
    b.kind = kind;
    auto x = ctx.grid->x(node);
    b.anchor.assign(x.begin(), x.end());
    b.anchor_time = ctx.grid->time(level);
    b.epsilon = eps;
    b.data_value = ctx.h(node, level);
    b.base = kind == BarrierKind::sub ? ctx.m - 2.0 * eps : ctx.M + 2.0 * eps;
    return b;
}

// The constant convention at anchors where the data touches its bound.
bool make_constant(Barrier& b, const BarrierContext& ctx) {
    bool touch = b.kind == BarrierKind::sub ? b.data_value <= ctx.m : b.data_value >= ctx.M;
    if (!touch) return false;
    b.constant = true;
    b.base = b.kind == BarrierKind::sub ? ctx.m : ctx.M;
    return true;
}

// Largest admissible ball radius around an interior anchor: the ball must avoid the boundary
// and every lateral node.
double interior_room(const BarrierContext& ctx, std::span<const double> y) {
    double room = ctx.grid->domain.signed_distance(y);
    for (int n : ctx.grid->lateral) room = std::min(room, distance(ctx.grid->x(n), y));
    return room;
}

// Pin the radial profile on B_delta so that its center equals `center` and its edge `edge`.
RadialProfile pinned_profile(BarrierKind kind, double delta, double center, double edge, double& lambda) {
    if (kind == BarrierKind::sub) {
        lambda = std::pow(decay_integral(edge / center) / delta, 4.0);
        return decaying_profile(delta, lambda, center, Pin::center);
    }
    lambda = std::pow(growth_integral(edge / center, 1.0) / delta, 4.0);
    return growing_profile(delta, lambda, center);
}

void set_interior_ball(Barrier& b, const BarrierContext& ctx) {
    double room = interior_room(ctx, b.anchor);
    if (!(room > 0.0)) throw ParameterError("barrier: anchor is not an interior point");
    double delta = std::min(ctx.delta0, 0.999 * room);
    int i = 0;
    for (; i < kMaxHalvings && ctx.oscillation(b.anchor, delta, 0.0, 0.0, b.data_value) > b.epsilon; ++i) delta *= 0.5;
    if (i == kMaxHalvings) throw DataError("barrier: no radius meets the oscillation bound");
    b.delta = delta;
}

void set_boundary_ball(Barrier& b, const BarrierContext& ctx) {
    double delta = ctx.delta0, tau = ctx.tau0;
    int i = 0;
    for (; i < kMaxHalvings && ctx.oscillation(b.anchor, delta, 0.0, tau, b.data_value) > b.epsilon; ++i) {
        delta *= 0.5;
        tau *= 0.5;
    }
    if (i == kMaxHalvings) throw DataError("barrier: no neighbourhood meets the oscillation bound");
    b.delta = delta;
    b.tau = tau;
}

double pin_value(const Barrier& b) {
    return b.kind == BarrierKind::sub ? b.data_value - 2.0 * b.epsilon : b.data_value + 2.0 * b.epsilon;
}

Barrier radial_barrier(const BarrierContext& ctx, int node, double eps, BarrierFamily family, BarrierKind kind) {
    const bool interior = family == BarrierFamily::alpha_sub || family == BarrierFamily::alpha_sup;
    const auto role = ctx.grid->roles.at(node);
    if (interior && role != NodeRole::interior) throw ParameterError("barrier: alpha families need an interior node");
    if (!interior && role != NodeRole::lateral) throw ParameterError("barrier: beta families need a boundary node");
    Barrier b = start(ctx, family, kind, node, 0, eps);
    if (make_constant(b, ctx)) return b;
    if (interior)
        set_interior_ball(b, ctx);
    else
        set_boundary_ball(b, ctx);
    double lambda = 0.0;
    b.profile = pinned_profile(kind, b.delta, pin_value(b), b.base, lambda);
    b.rate = lambda;
    if (!interior) {
        // the profile must drop (grow) past the plateau by t = tau
        double need = kind == BarrierKind::sub ? std::log(pin_value(b) / b.base) : std::log(b.base / pin_value(b));
        b.rate = std::max(lambda, 3.0 * need / b.tau);
    }
    return b;
}

}  // namespace

const char* to_string(BarrierFamily f) {
    switch (f) {
        case BarrierFamily::alpha_sub: return "alpha_sub";
        case BarrierFamily::beta_sub: return "beta_sub";
        case BarrierFamily::gamma_sub_cone: return "gamma_sub_cone";
        case BarrierFamily::alpha_sup: return "alpha_sup";
        case BarrierFamily::beta_sup: return "beta_sup";
        case BarrierFamily::gamma_sup_cusp: return "gamma_sup_cusp";
        case BarrierFamily::staircase_sup: return "staircase_sup";
        case BarrierFamily::minm_bump: return "minm_bump";
        case BarrierFamily::exist13_bump: return "exist13_bump";
        case BarrierFamily::asym01_barrier: return "asym01_barrier";
    }
    return "?";
}

const char* to_string(BarrierKind k) { return k == BarrierKind::sub ? "sub" : "super"; }

const char* to_string(BarrierPiece p) {
    switch (p) {
        case BarrierPiece::plateau: return "plateau";
        case BarrierPiece::radial: return "radial";
        case BarrierPiece::upper: return "upper";
        case BarrierPiece::lower: return "lower";
    }
    return "?";
}

BarrierFamily barrier_family_from_string(const std::string& s) {
    for (int i = 0; i <= static_cast<int>(BarrierFamily::asym01_barrier); ++i) {
        auto f = static_cast<BarrierFamily>(i);
        if (s == to_string(f)) return f;
    }
    throw ParameterError("unknown barrier family '" + s + "'");
}

// ---------------------------------------------------------------------------------------------
// BarrierContext

BarrierContext BarrierContext::make(std::shared_ptr<const CylinderGrid> grid, BoundaryData data, double delta0,
                                    double tau0) {
    BarrierContext ctx;
    ctx.grid = grid;
    ctx.data = std::move(data);
    ctx.entries = grid->parabolic_boundary();
    ctx.entry_index.assign(static_cast<std::size_t>(grid->levels) * grid->node_count(), -1);
    ctx.m = std::numeric_limits<double>::infinity();
    ctx.M = -ctx.m;
    for (std::size_t i = 0; i < ctx.entries.size(); ++i) {
        const auto& e = ctx.entries[i];
        double v = boundary_value(*grid, ctx.data, e);
        ctx.entry_value.push_back(v);
        ctx.entry_index[static_cast<std::size_t>(e.level) * grid->node_count() + e.node] = static_cast<int>(i);
        ctx.m = std::min(ctx.m, v);
        ctx.M = std::max(ctx.M, v);
    }
    ctx.delta0 = delta0 > 0.0 ? delta0 : 0.25 * grid->domain.diameter();
    ctx.tau0 = tau0 > 0.0 ? tau0 : 0.25 * grid->T;
    return ctx;
}

bool BarrierContext::on_boundary(int node, int level) const {
    return entry_index[static_cast<std::size_t>(level) * grid->node_count() + node] >= 0;
}

double BarrierContext::h(int node, int level) const {
    int i = entry_index.at(static_cast<std::size_t>(level) * grid->node_count() + node);
    if (i < 0) throw ParameterError("barrier: anchor is not on the parabolic boundary");
    return entry_value[i];
}

double BarrierContext::oscillation(std::span<const double> y, double radius, double t_lo, double t_hi,
                                   double h0) const {
    const double slack = 1e-12 * std::max(1.0, grid->T);
    double osc = 0.0;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        double t = grid->time(entries[i].level);
        if (t < t_lo - slack || t > t_hi + slack) continue;
        if (distance(grid->x(entries[i].node), y) > radius) continue;
        osc = std::max(osc, std::abs(entry_value[i] - h0));
    }
    return osc;
}

// ---------------------------------------------------------------------------------------------
// Barrier

namespace {

bool is_radial(BarrierFamily f) {
    return f == BarrierFamily::alpha_sub || f == BarrierFamily::beta_sub || f == BarrierFamily::alpha_sup ||
           f == BarrierFamily::beta_sup;
}

double time_factor(const Barrier& b, double t) {
    return std::exp((b.kind == BarrierKind::sub ? -b.rate : b.rate) * t / 3.0);
}

// Exponent of the cone (sub) or cusp (super) bump on the upper or lower piece, extended.
double bump(const Barrier& b, BarrierPiece p, double r, double t) {
    double span = p == BarrierPiece::upper ? b.anchor_time + b.tau - t : t - b.anchor_time + b.tau;
    if (b.family == BarrierFamily::gamma_sub_cone) return b.k * span - b.c * r;
    return b.c * std::pow(r, b.nu) - b.k * span;
}

}  // namespace

BarrierPiece Barrier::piece(std::span<const double> x, double t) const {
    if (constant) return BarrierPiece::plateau;
    double r = distance(x, anchor);
    if (is_radial(family)) return r < delta ? BarrierPiece::radial : BarrierPiece::plateau;
    double s = anchor_time;
    if (t < s - tau || t > s + tau) return BarrierPiece::plateau;
    BarrierPiece p = t >= s ? BarrierPiece::upper : BarrierPiece::lower;
    double e = bump(*this, p, r, t);
    bool inside = family == BarrierFamily::gamma_sub_cone ? e > 0.0 : e < 0.0;
    return inside ? p : BarrierPiece::plateau;
}

double Barrier::piece_value(BarrierPiece p, std::span<const double> x, double t) const {
    if (constant) return base;
    double r = distance(x, anchor);
    if (is_radial(family)) {
        double tf = time_factor(*this, t);
        return p == BarrierPiece::radial ? profile.value(r) * tf : base * tf;
    }
    if (p == BarrierPiece::plateau) return base;
    return base * std::exp(bump(*this, p, r, t));
}

double Barrier::value(std::span<const double> x, double t) const { return piece_value(piece(x, t), x, t); }

double Barrier::residual_gamma(std::span<const double> x, double t) const {
    if (constant) return 0.0;
    BarrierPiece p = piece(x, t);
    const double sign = kind == BarrierKind::sub ? -1.0 : 1.0;  // eta_t = sign * rate / 3 on radial families
    if (is_radial(family)) {
        // Gamma(eta) = Pi(phi) / phi^3; on the profile Delta_inf psi = -lambda_s psi^3
        double lap = p == BarrierPiece::radial ? -profile.signed_lambda() : 0.0;
        return lap - sign * rate;
    }
    if (p == BarrierPiece::plateau) return 0.0;
    double eta_t = (p == BarrierPiece::upper ? -1.0 : 1.0) * k;
    if (family == BarrierFamily::gamma_sub_cone) {
        double c2 = c * c;
        return c2 * c2 - 3.0 * eta_t;  // eta_r = -c, eta_rr = 0
    }
    eta_t = -eta_t;  // the cusp bump enters with the opposite sign
    double r = distance(x, anchor);
    double er = c * nu * std::pow(r, nu - 1.0);
    double err = c * nu * (nu - 1.0) * std::pow(r, nu - 2.0);
    return er * er * err + er * er * er * er - 3.0 * eta_t;
}

double Barrier::residual_pi(std::span<const double> x, double t) const {
    double v = value(x, t);
    return v * v * v * residual_gamma(x, t);
}

nlohmann::json Barrier::to_json() const {
    nlohmann::json j;
    j["family"] = to_string(family);
    j["kind"] = to_string(kind);
    j["anchor"] = anchor;
    j["anchor_time"] = anchor_time;
    j["epsilon"] = epsilon;
    j["data_value"] = data_value;
    j["constant"] = constant;
    j["base"] = base;
    if (constant) return j;
    nlohmann::json d;
    d["delta"] = delta;
    if (is_radial(family)) {
        d["lambda"] = profile.lambda;
        d["rate"] = rate;
        d["profile_center"] = profile.center;
        d["profile_edge"] = profile.edge;
        if (family == BarrierFamily::beta_sub || family == BarrierFamily::beta_sup) d["tau"] = tau;
    } else {
        d["tau"] = tau;
        d["k"] = k;
        d["c"] = c;
        if (family == BarrierFamily::gamma_sup_cusp) {
            d["nu"] = nu;
            d["Gamma"] = log_ratio;
        }
    }
    j["derived"] = d;
    return j;
}

Barrier make_alpha_sub(const BarrierContext& ctx, int node, double epsilon) {
    return radial_barrier(ctx, node, epsilon, BarrierFamily::alpha_sub, BarrierKind::sub);
}

Barrier make_beta_sub(const BarrierContext& ctx, int node, double epsilon) {
    return radial_barrier(ctx, node, epsilon, BarrierFamily::beta_sub, BarrierKind::sub);
}

Barrier make_alpha_sup(const BarrierContext& ctx, int node, double epsilon) {
    return radial_barrier(ctx, node, epsilon, BarrierFamily::alpha_sup, BarrierKind::super);
}

Barrier make_beta_sup(const BarrierContext& ctx, int node, double epsilon) {
    return radial_barrier(ctx, node, epsilon, BarrierFamily::beta_sup, BarrierKind::super);
}

Barrier make_gamma_sub_cone(const BarrierContext& ctx, int node, int level, double epsilon) {
    if (level < 1) throw ParameterError("cone barrier: anchor must lie on the lateral boundary at s > 0");
    Barrier b = start(ctx, BarrierFamily::gamma_sub_cone, BarrierKind::sub, node, level, epsilon);
    if (make_constant(b, ctx)) return b;
    const double s = b.anchor_time, L = std::log(pin_value(b) / b.base);
    double tau = ctx.tau0;
    for (int i = 0;; ++i, tau *= 0.5) {
        if (i == kMaxHalvings) throw DataError("cone barrier: no neighbourhood meets the oscillation bound");
        b.tau = tau;
        b.k = L / tau;
        b.c = quarter_root(3.0 * b.k);
        b.delta = b.k * tau / b.c;
        if (b.delta <= ctx.delta0 && ctx.oscillation(b.anchor, b.delta, s - tau, s + tau, b.data_value) <= epsilon)
            break;
    }
    return b;
}

Barrier make_gamma_sup_cusp(const BarrierContext& ctx, int node, int level, double epsilon) {
    if (level < 1) throw ParameterError("cusp barrier: anchor must lie on the lateral boundary at s > 0");
    Barrier b = start(ctx, BarrierFamily::gamma_sup_cusp, BarrierKind::super, node, level, epsilon);
    if (make_constant(b, ctx)) return b;
    const double s = b.anchor_time, L = std::log(b.base / pin_value(b));
    b.log_ratio = std::log((ctx.M + 2.0 * epsilon) / (ctx.m + 2.0 * epsilon));
    b.nu = 1.0 / (1.0 + 2.0 * b.log_ratio);
    double tau = ctx.tau0;
    for (int i = 0;; ++i, tau *= 0.5) {
        if (i == kMaxHalvings) throw DataError("cusp barrier: no neighbourhood meets the oscillation bound");
        b.tau = tau;
        b.k = L / tau;
        b.delta = std::min(ctx.delta0, b.nu * quarter_root(b.k * b.k * tau * tau * tau * b.log_ratio / 3.0));
        b.c = b.k * tau / std::pow(b.delta, b.nu);
        if (ctx.oscillation(b.anchor, b.delta, s - tau, s + tau, b.data_value) <= epsilon) break;
    }
    return b;
}

Barrier make_barrier(const BarrierContext& ctx, int node, int level, double epsilon, BarrierKind kind) {
    const bool sub = kind == BarrierKind::sub;
    if (level > 0) return sub ? make_gamma_sub_cone(ctx, node, level, epsilon) : make_gamma_sup_cusp(ctx, node, level, epsilon);
    if (ctx.grid->roles.at(node) == NodeRole::interior)
        return sub ? make_alpha_sub(ctx, node, epsilon) : make_alpha_sup(ctx, node, epsilon);
    return sub ? make_beta_sub(ctx, node, epsilon) : make_beta_sup(ctx, node, epsilon);
}

std::vector<SeamPoint> seam_points(const Barrier& b, int count, std::uint64_t seed) {
    std::vector<SeamPoint> out;
    if (b.constant) return out;
    Sampler rng(seed);
    const int n = static_cast<int>(b.anchor.size());
    const double s = b.anchor_time;
    for (int i = 0; i < count; ++i) {
        auto dir = rng.direction(n);
        SeamPoint p;
        if (is_radial(b.family)) {
            p.t = rng.uniform() * std::max(2.0 * b.tau, 1.0);
            p.x = along(b.anchor, dir, b.delta);
            p.a = BarrierPiece::radial;
            p.b = BarrierPiece::plateau;
        } else {
            int type = i % 3;
            double r = 0.0;
            auto radius_for = [&](double span) {
                double q = b.k * span / b.c;
                return b.family == BarrierFamily::gamma_sub_cone ? q : std::pow(q, 1.0 / b.nu);
            };
            if (type == 0) {
                p.t = rng.open(s, s + b.tau);
                r = radius_for(s + b.tau - p.t);
                p.a = BarrierPiece::upper;
                p.b = BarrierPiece::plateau;
            } else if (type == 1) {
                p.t = rng.open(s - b.tau, s);
                r = radius_for(p.t - s + b.tau);
                p.a = BarrierPiece::lower;
                p.b = BarrierPiece::plateau;
            } else {
                p.t = s;
                r = rng.open(0.0, b.delta);
                p.a = BarrierPiece::upper;
                p.b = BarrierPiece::lower;
            }
            p.x = along(b.anchor, dir, r);
        }
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<std::pair<std::vector<double>, double>> region_points(const Barrier& b, BarrierPiece piece, int count,
                                                                  std::uint64_t seed) {
    std::vector<std::pair<std::vector<double>, double>> out;
    if (b.constant) return out;
    Sampler rng(seed);
    const int n = static_cast<int>(b.anchor.size());
    const double s = b.anchor_time;
    auto draw = [&]() -> std::pair<std::vector<double>, double> {
        auto dir = rng.direction(n);
        double t = 0.0, r = 0.0;
        if (is_radial(b.family)) {
            t = rng.open(0.0, std::max(2.0 * b.tau, 1.0));
            r = piece == BarrierPiece::radial ? rng.open(0.0, b.delta) : b.delta * rng.open(1.0, 3.0);
        } else {
            bool upper = piece == BarrierPiece::upper;
            t = upper ? rng.open(s, s + b.tau) : rng.open(s - b.tau, s);
            double span = upper ? s + b.tau - t : t - s + b.tau;
            double q = b.k * span / b.c;
            double rmax = b.family == BarrierFamily::gamma_sub_cone ? q : std::pow(q, 1.0 / b.nu);
            r = rng.open(0.0, rmax);
        }
        return {along(b.anchor, dir, r), t};
    };
    for (int i = 0; i < count; ++i) {
        auto pt = draw();
        // prefer points of the open cylinder; the formulas hold regardless
        for (int tries = 0; tries < 50; ++tries) {
            // (the plateau piece has no region restriction beyond the radius)
            if (b.piece(pt.first, pt.second) == piece) break;
            pt = draw();
        }
        out.push_back(std::move(pt));
    }
    return out;
}

JetFit fit_jet(const std::function<double(std::span<const double>, double)>& fn, std::span<const double> x,
               double t, double hx, double ht) {
    const int n = static_cast<int>(x.size());
    const int unknowns = 2 + n + n * (n + 1) / 2;
    int points = 5;
    for (int i = 0; i < n; ++i) points *= 5;
    Eigen::MatrixXd A(points, unknowns);
    Eigen::VectorXd rhs(points);
    std::vector<int> off(n + 1, -2);
    std::vector<double> xs(n);
    for (int row = 0; row < points; ++row) {
        int idx = row;
        for (int d = 0; d <= n; ++d) {
            off[d] = idx % 5 - 2;
            idx /= 5;
        }
        double dt = off[n] * ht;
        for (int d = 0; d < n; ++d) xs[d] = x[d] + off[d] * hx;
        int col = 0;
        A(row, col++) = 1.0;
        A(row, col++) = dt;
        for (int d = 0; d < n; ++d) A(row, col++) = off[d] * hx;
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j)
                A(row, col++) = (i == j ? 0.5 : 1.0) * (off[i] * hx) * (off[j] * hx);
        rhs(row) = fn(xs, t + dt);
    }
    Eigen::VectorXd sol = A.colPivHouseholderQr().solve(rhs);
    JetFit jet;
    jet.u = fn(x, t);
    jet.a = sol(1);
    jet.p.resize(n);
    jet.X.assign(static_cast<std::size_t>(n) * n, 0.0);
    for (int d = 0; d < n; ++d) jet.p[d] = sol(2 + d);
    int col = 2 + n;
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) jet.X[i * n + j] = jet.X[j * n + i] = sol(col++);
    double xpp = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) xpp += jet.X[i * n + j] * jet.p[i] * jet.p[j];
    jet.quantity = xpp - 3.0 * jet.a * jet.u * jet.u;
    return jet;
}

// ---------------------------------------------------------------------------------------------
// Staircase

double Staircase::g(int k, double t) const {
    const double Tk = times.at(k - 1), Tn = times.at(k);
    double E = std::exp(lambda_bar * (Tn - Tk) / 3.0);
    return 0.5 * (1.0 + std::expm1(lambda_bar * (Tn - t) / 3.0) / (E - 1.0));
}

double Staircase::g_prime(int k, double t) const {
    const double Tk = times.at(k - 1), Tn = times.at(k);
    double E = std::exp(lambda_bar * (Tn - Tk) / 3.0);
    return -0.5 * (lambda_bar / 3.0) * std::exp(lambda_bar * (Tn - t) / 3.0) / (E - 1.0);
}

double Staircase::psi_at(std::span<const double> x) const { return psi.value(distance(x, center)); }

double Staircase::value(int k, std::span<const double> x, double t) const {
    return psi_at(x) * g(k, t) / std::ldexp(1.0, k - 1);
}

double Staircase::residual_pi(int k, std::span<const double> x, double t) const {
    double p = psi_at(x), G = g(k, t) / std::ldexp(1.0, k - 1), Gp = g_prime(k, t) / std::ldexp(1.0, k - 1);
    return -p * p * p * G * G * (lambda_bar * G + 3.0 * Gp);
}

double Staircase::residual_closed_form(int k, std::span<const double> x, double t) const {
    double p = psi_at(x), gk = g(k, t);
    double E = std::exp(lambda_bar * (times.at(k) - times.at(k - 1)) / 3.0);
    return -(lambda_bar * p * p * p * gk * gk / std::ldexp(1.0, 3 * (k - 1) + 1)) * ((E - 2.0) / (E - 1.0));
}

nlohmann::json Staircase::to_json() const {
    return {{"family", "staircase_sup"},   {"kind", "super"},
            {"center", center},            {"epsilon", epsilon},
            {"lambda_bar", lambda_bar},    {"psi_center", psi.center},
            {"psi_radius", psi.radius},    {"times", times}};
}

Staircase make_staircase_sup(const Domain& ball, const std::function<double(double)>& lateral_sup, double epsilon,
                             double lambda_bar, int slabs) {
    if (ball.kind != DomainKind::ball) throw ParameterError("staircase: the profile needs a ball domain");
    if (!(epsilon > 0.0) || slabs < 1) throw ParameterError("staircase: need epsilon > 0 and at least one slab");
    Staircase st;
    st.center = ball.center;
    st.epsilon = epsilon;
    st.lambda_bar = lambda_bar;
    st.psi = decaying_profile(ball.radius, lambda_bar, epsilon, Pin::edge);
    // first time after which sup g stays below `level` (sup g is non-increasing)
    auto settle = [&](double level, double from) {
        double hi = std::max(from, 1.0);
        while (lateral_sup(hi) > level) {
            hi *= 2.0;
            if (hi > 1e6) throw ParameterError("staircase: lateral data does not decay");
        }
        double lo = from;
        if (lateral_sup(lo) <= level) return lo;
        for (int i = 0; i < 200 && hi - lo > 1e-12 * hi; ++i) {
            double mid = 0.5 * (lo + hi);
            (lateral_sup(mid) <= level ? hi : lo) = mid;
        }
        return hi;
    };
    st.times.push_back(settle(epsilon / 2.0, 0.0));
    const double doubling = 3.0 * std::numbers::ln2 / lambda_bar;
    for (int k = 1; k <= slabs; ++k) {
        double Tk = st.times.back();
        double next = std::max({Tk + 1.0, Tk + doubling, settle(epsilon / std::ldexp(1.0, k + 1), Tk)});
        st.times.push_back(next);
    }
    return st;
}

// ---------------------------------------------------------------------------------------------
// Auxiliary bumps

double MinmBump::value_at_radius(double r, double t) const {
    if (r >= rho) return 0.0;
    double w = rho * rho - r * r;
    return K * w * w * time_factor(t);
}

double MinmBump::value(std::span<const double> x, double t) const { return value_at_radius(distance(x, center), t); }

double MinmBump::residual(double r, double t) const {
    double w = rho * rho - r * r, h = time_factor(t);
    double K3 = K * K * K;
    return 3.0 * K * w * w / (2.0 * eps) + 64.0 * K3 * r * r * w * w * (3.0 * r * r - rho * rho) * h * h * h +
           sigma * 256.0 * K3 * K * r * r * r * r * w * w * w * w * h * h * h * h;
}

double MinmBump::residual_lower_bound(double r) const {
    double w = rho * rho - r * r, r4 = rho * rho * rho * rho;
    return K * w * w * (3.0 / (2.0 * eps) - 64.0 * K * K * r4 * (1.0 + 4.0 * std::abs(sigma) * r4));
}

nlohmann::json MinmBump::to_json() const {
    return {{"family", "minm_bump"}, {"kind", "sub"}, {"center", center}, {"s", s},         {"eps", eps},
            {"rho", rho},            {"sigma", sigma}, {"delta", delta},  {"K", K}};
}

MinmBump make_minm_bump(std::vector<double> center, double s, double eps, double rho, double sigma, double delta) {
    if (!(eps > 0.0) || !(rho > 0.0)) throw ParameterError("minm bump: need eps > 0 and rho > 0");
    double r4 = rho * rho * rho * rho;
    double K = std::min({std::sqrt(3.0 / (128.0 * eps * r4 * (1.0 + 4.0 * std::abs(sigma) * r4))), delta / r4, 1.0});
    if (!(K > 0.0) || !std::isfinite(K)) throw ParameterError("minm bump: the amplitude cap is not positive");
    return MinmBump{std::move(center), s, eps, rho, sigma, delta, K};
}

double Asym01Barrier::value(double r) const {
    r = std::clamp(r, 0.0, R);
    return delta + K * (std::pow(R, 4.0 / 3.0) - std::pow(R - r, 4.0 / 3.0));
}

double Asym01Barrier::value_at(std::span<const double> x) const { return value(distance(x, z)); }

double Asym01Barrier::infinity_laplacian(double r) const {
    double d1 = 4.0 / 3.0 * K * std::cbrt(R - r);
    double d2 = -4.0 / 9.0 * K / std::pow(R - r, 2.0 / 3.0);
    return d1 * d1 * d2;
}

nlohmann::json Asym01Barrier::to_json() const {
    return {{"family", "asym01_barrier"}, {"z", z},           {"R", R},         {"L", L},
            {"lambda", lambda},           {"delta", delta},   {"K", K},         {"sigma", sigma}};
}

Asym01Barrier make_asym01_barrier(const Domain& domain, std::vector<double> z, double L, double lambda, double delta) {
    if (!(L > 0.0) || !(lambda > 0.0) || delta < 0.0) throw ParameterError("boundary barrier: need L, lambda > 0");
    double R = 0.0;
    if (domain.kind == DomainKind::ball) {
        R = distance(z, domain.center) + domain.radius;
    } else {
        for (int mask = 0; mask < (1 << domain.dim); ++mask) {
            std::vector<double> corner(domain.dim);
            for (int i = 0; i < domain.dim; ++i) corner[i] = (mask >> i & 1) ? domain.hi[i] : domain.lo[i];
            R = std::max(R, distance(corner, z));
        }
    }
    Asym01Barrier b;
    b.z = std::move(z);
    b.R = R;
    b.L = L;
    b.lambda = lambda;
    b.delta = delta;
    b.K = L * std::max(std::pow(R, -4.0 / 3.0), std::cbrt(lambda * Asym01Barrier::sigma));
    return b;
}

double asym01_constant(double R0, double R1, double lambda) {
    return 4.0 * std::cbrt(R1) / 3.0 * std::max(std::pow(R0, -4.0 / 3.0), std::cbrt(lambda * Asym01Barrier::sigma));
}

double Exist13Bump::value(std::span<const double> x, double t) const {
    const std::size_t n = z.size();
    double lin = 0.0, quad = 0.0, r2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double di = x[i] - z[i];
        lin += p[i] * di;
        r2 += di * di;
        for (std::size_t j = 0; j < n; ++j) quad += X[i * n + j] * di * (x[j] - z[j]);
    }
    return k + a * (t - theta) + lin + 0.5 * quad + delta - nu * (r2 + std::abs(t - theta));
}

double Exist13Bump::residual_pi(std::span<const double> x, double t) const {
    const std::size_t n = z.size();
    std::vector<double> q(n);
    for (std::size_t i = 0; i < n; ++i) {
        q[i] = p[i] - 2.0 * nu * (x[i] - z[i]);
        for (std::size_t j = 0; j < n; ++j) q[i] += X[i * n + j] * (x[j] - z[j]);
    }
    double lap = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) lap += (X[i * n + j] - (i == j ? 2.0 * nu : 0.0)) * q[i] * q[j];
    double ut = t > theta ? a - nu : a + nu;
    double u = value(x, t);
    return lap - 3.0 * u * u * ut;
}

nlohmann::json Exist13Bump::to_json() const {
    return {{"family", "exist13_bump"}, {"kind", "sub"}, {"z", z},     {"theta", theta}, {"a", a},   {"p", p},
            {"X", X},                   {"k", k},        {"delta", delta}, {"nu", nu},   {"mu", mu}, {"rho", rho}};
}

double exist13_delta(double delta0, double r, double nu) { return std::min(delta0, r * r * nu / 32.0); }

Exist13Bump make_exist13_bump(std::vector<double> z, double theta, double a, std::vector<double> p,
                              std::vector<double> X, double k, double delta, double nu) {
    const std::size_t n = z.size();
    if (p.size() != n || X.size() != n * n) throw ParameterError("improvement bump: jet dimensions do not match");
    if (!(nu > 0.0) || delta < 0.0) throw ParameterError("improvement bump: need nu > 0 and delta >= 0");
    Exist13Bump b{std::move(z), theta, a, std::move(p), std::move(X), k, delta, nu};
    double xpp = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) xpp += b.X[i * n + j] * b.p[i] * b.p[j];
    b.mu = xpp - 3.0 * a * k * k;
    if (!(b.mu > 0.0)) throw ParameterError("improvement bump: the jet is not a strict violation (mu <= 0)");
    // shrink rho until the residual is positive on a sample lattice of D_{rho,rho}
    constexpr int per_axis = 7;
    std::vector<double> x(n);
    std::vector<int> idx(n + 1);
    int total = 1;
    for (std::size_t i = 0; i <= n; ++i) total *= per_axis;
    double rho = 1.0;
    for (int halving = 0; halving < 60; ++halving, rho *= 0.5) {
        bool ok = true;
        for (int s = 0; s < total && ok; ++s) {
            int rem = s;
            for (std::size_t d = 0; d <= n; ++d) {
                idx[d] = rem % per_axis;
                rem /= per_axis;
            }
            double r2 = 0.0;
            for (std::size_t d = 0; d < n; ++d) {
                x[d] = b.z[d] + rho * (2.0 * idx[d] / (per_axis - 1) - 1.0);
                r2 += (x[d] - b.z[d]) * (x[d] - b.z[d]);
            }
            if (r2 > rho * rho) continue;
            double t = theta + 0.5 * rho * (2.0 * idx[n] / (per_axis - 1) - 1.0);
            ok = b.residual_pi(x, t) > 0.0;
        }
        if (ok) {
            b.rho = rho;
            return b;
        }
    }
    throw NumericalError("improvement bump: no cylinder with a positive residual was found");
}

// ---------------------------------------------------------------------------------------------
// Envelopes

namespace {

GridField envelope(const GridField& field, std::vector<int> radii, bool upper) {
    if (radii.empty()) throw ParameterError("envelope: radius sequence is empty");
    std::sort(radii.begin(), radii.end(), std::greater<>());
    if (radii.back() < 1) throw ParameterError("envelope: radii must be at least one cell");
    const auto& g = *field.grid;
    const int n = g.dim, nodes = g.node_count(), L = g.levels;
    const int rb = radii.back(), ra = radii.size() > 1 ? radii[radii.size() - 2] : rb;
    const double sign = upper ? 1.0 : -1.0;

    // signed values: the lower envelope is the upper envelope of the negated field
    GridField cur(field.grid);
    for (std::size_t i = 0; i < cur.values.size(); ++i) cur.values[i] = sign * field.values[i];

    auto punctured_sup = [&](const GridField& f, int node, int level, int r) {
        double best = -std::numeric_limits<double>::infinity();
        std::vector<int> base(n), off(n), multi(n);
        g.multi_index(node, base);
        int count = 1;
        for (int d = 0; d < n; ++d) count *= 2 * r + 1;
        for (int dl = -r; dl <= r; ++dl) {
            int lv = level + dl;
            if (lv < 0 || lv >= L) continue;
            for (int s = 0; s < count; ++s) {
                int rem = s;
                bool self = dl == 0;
                for (int d = 0; d < n; ++d) {
                    off[d] = rem % (2 * r + 1) - r;
                    rem /= 2 * r + 1;
                    multi[d] = base[d] + off[d];
                    self = self && off[d] == 0;
                }
                if (self) continue;
                int m = g.node_at(multi);
                if (m >= 0) best = std::max(best, f.at(m, lv));
            }
        }
        return best;
    };

    for (int iter = 0; iter < 1000; ++iter) {
        GridField next = cur;
        bool changed = false;
        for (int lv = 0; lv < L; ++lv) {
            for (int node = 0; node < nodes; ++node) {
                double sb = punctured_sup(cur, node, lv, rb);
                if (!std::isfinite(sb)) continue;
                double lim = sb;
                if (ra != rb) {
                    double sa = punctured_sup(cur, node, lv, ra);
                    lim = sb - (sa - sb) * rb / static_cast<double>(ra - rb);
                }
                double v = cur.at(node, lv);
                if (lim > v + 1e-12 * std::max(1.0, std::abs(v))) {
                    next.at(node, lv) = lim;
                    changed = true;
                }
            }
        }
        cur = std::move(next);
        if (!changed) break;
    }
    for (auto& v : cur.values) v *= sign;
    return cur;
}

}  // namespace

GridField usc_envelope(const GridField& field, const std::vector<int>& radius_sequence) {
    return envelope(field, radius_sequence, true);
}

GridField lsc_envelope(const GridField& field, const std::vector<int>& radius_sequence) {
    return envelope(field, radius_sequence, false);
}

// ---------------------------------------------------------------------------------------------
// Perron families

std::vector<std::pair<int, int>> anchor_net(const CylinderGrid& grid, int level_stride) {
    if (level_stride < 1) throw ParameterError("anchor net: level stride must be positive");
    std::vector<std::pair<int, int>> anchors;
    for (int n = 0; n < grid.node_count(); ++n) anchors.emplace_back(n, 0);
    for (int k = level_stride; k < grid.levels; k += level_stride)
        for (int n : grid.lateral) anchors.emplace_back(n, k);
    return anchors;
}

std::vector<Barrier> build_family(const BarrierContext& ctx, const std::vector<std::pair<int, int>>& anchors,
                                  double epsilon, BarrierKind kind, int jobs) {
    std::vector<Barrier> family(anchors.size());
    parallel_for(anchors.size(), jobs, [&](std::size_t i) {
        family[i] = make_barrier(ctx, anchors[i].first, anchors[i].second, epsilon, kind);
    });
    return family;
}

namespace {

GridField family_extreme(const std::vector<Barrier>& family, std::shared_ptr<const CylinderGrid> grid, int jobs,
                         bool sup) {
    if (family.empty()) throw ParameterError("Perron family: the family is empty");
    const double init = sup ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
    GridField out(grid, init);
    const auto& g = *grid;
    parallel_for(static_cast<std::size_t>(g.levels), jobs, [&](std::size_t level) {
        const int k = static_cast<int>(level);
        const double t = g.time(k);
        auto row = out.level(k);
        for (const auto& b : family)
            for (int n = 0; n < g.node_count(); ++n) {
                double v = b.value(g.x(n), t);
                row[n] = sup ? std::max(row[n], v) : std::min(row[n], v);
            }
    });
    return out;
}

}  // namespace

GridField perron_family_sup(const std::vector<Barrier>& family, std::shared_ptr<const CylinderGrid> grid, int jobs) {
    return family_extreme(family, std::move(grid), jobs, true);
}

GridField perron_family_inf(const std::vector<Barrier>& family, std::shared_ptr<const CylinderGrid> grid, int jobs) {
    return family_extreme(family, std::move(grid), jobs, false);
}

nlohmann::json barrier_catalog(const std::vector<Barrier>& family) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& b : family) arr.push_back(b.to_json());
    return {{"schema", "iplab.barrier_catalog/1"}, {"barriers", arr}};
}

}  // namespace iplab
