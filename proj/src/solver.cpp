#include "iplab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "iplab/errors.hpp"

namespace iplab {

namespace {

std::vector<double> direction_set(int dim, int count) {
    std::vector<double> d;
    if (dim == 1) return {1.0, -1.0};
    if (count == 0) {
        int total = 1;
        for (int i = 0; i < dim; ++i) total *= 3;
        for (int s = 0; s < total; ++s) {
            int r = s;
            double v[3], n2 = 0.0;
            for (int i = 0; i < dim; ++i) {
                v[i] = r % 3 - 1;
                r /= 3;
                n2 += v[i] * v[i];
            }
            if (n2 == 0.0) continue;
            for (int i = 0; i < dim; ++i) d.push_back(v[i] / std::sqrt(n2));
        }
        return d;
    }
    if (count < 4 || count % 2) throw ConfigurationError("stencil: direction count must be even and at least 4");
    if (dim == 2) {
        for (int j = 0; j < count; ++j) {
            double a = 2.0 * std::numbers::pi * j / count;
            d.push_back(std::cos(a));
            d.push_back(std::sin(a));
        }
        return d;
    }
    // spread half the points over the sphere and add their antipodes
    const int half = count / 2;
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int j = 0; j < half; ++j) {
        double z = 1.0 - (j + 0.5) / half;
        double r = std::sqrt(1.0 - z * z), a = golden * j;
        d.insert(d.end(), {r * std::cos(a), r * std::sin(a), z});
    }
    for (int j = 0; j < half; ++j) d.insert(d.end(), {-d[3 * j], -d[3 * j + 1], -d[3 * j + 2]});
    return d;
}

// Multilinear interpolation weights of the point p; false when a corner with positive weight is missing.
bool interpolation(const CylinderGrid& g, const double* p, int* nodes, double* weights) {
    int base[3];
    double frac[3];
    for (int i = 0; i < g.dim; ++i) {
        double u = (p[i] - g.origin[i]) / g.h;
        double b = std::floor(u + 1e-12);
        frac[i] = u - b;
        if (frac[i] < 1e-12) frac[i] = 0.0;
        base[i] = static_cast<int>(b);
    }
    const int corners = 1 << g.dim;
    for (int c = 0; c < corners; ++c) {
        int m[3];
        double w = 1.0;
        for (int i = 0; i < g.dim; ++i) {
            bool up = (c >> i) & 1;
            m[i] = base[i] + (up ? 1 : 0);
            w *= up ? frac[i] : 1.0 - frac[i];
        }
        weights[c] = w;
        nodes[c] = -1;
        if (w == 0.0) continue;
        nodes[c] = g.node_at({m, static_cast<std::size_t>(g.dim)});
        if (nodes[c] < 0) return false;
    }
    return true;
}

struct Samples {
    // sample_j = a[j] + w[j] * c
    std::vector<double> a, w;
    double lo, hi;  // range of the neighbour values that enter with positive weight
};

void gather(const StencilTable& t, int idx, std::span<const double> values, Samples& s) {
    const int K = t.directions, C = t.corners;
    s.a.resize(K);
    s.w.resize(K);
    const int row = t.slot[idx];
    const double* weights;
    const double* center;
    if (row < 0) {
        const int* l2n = t.lattice_to_node.data() + t.lattice_base[idx];
        const int* off = t.template_offset.data();
        weights = t.template_weight.data();
        center = t.template_center.data();
        for (int j = 0; j < K; ++j) {
            double acc = 0.0;
            for (int c = 0; c < C; ++c) acc += weights[j * C + c] * values[l2n[off[j * C + c]]];
            s.a[j] = acc;
        }
    } else {
        const int* nodes = &t.corner_node[static_cast<std::size_t>(row) * K * C];
        weights = &t.corner_weight[static_cast<std::size_t>(row) * K * C];
        center = &t.center_weight[static_cast<std::size_t>(row) * K];
        for (int j = 0; j < K; ++j) {
            double acc = 0.0;
            for (int c = 0; c < C; ++c) acc += weights[j * C + c] * values[nodes[j * C + c]];
            s.a[j] = acc;
        }
    }
    // a_j / (1 - w_j) is an average of neighbour values; their range brackets the implicit update
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (int j = 0; j < K; ++j) {
        s.w[j] = center[j];
        if (center[j] >= 1.0) continue;
        double avg = s.a[j] / (1.0 - center[j]);
        lo = std::min(lo, avg);
        hi = std::max(hi, avg);
    }
    s.lo = lo;
    s.hi = hi;
}

struct Extremes {
    double max, min, wmax, wmin;
};

Extremes extremes(const Samples& s, double c) {
    Extremes e{-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(), 0.0, 0.0};
    for (std::size_t j = 0; j < s.a.size(); ++j) {
        double v = s.a[j] + s.w[j] * c;
        if (v > e.max) e.max = v, e.wmax = s.w[j];
        if (v < e.min) e.min = v, e.wmin = s.w[j];
    }
    return e;
}

struct Rate {
    double value;  // time derivative of the solver variable
    double dc;     // derivative with respect to the node's own value
};

// phi_t = Delta_inf phi / (3 phi^2) with Delta_inf phi ~ (S+^3 - S-^3) / (3 rho).
Rate phi_rate(const Samples& s, double c, double rho) {
    Extremes e = extremes(s, c);
    double sp = (e.max - c) / rho, sm = (c - e.min) / rho;
    double d = (sp * sp * sp - sm * sm * sm) / (3.0 * rho);
    double dd = (sp * sp * (e.wmax - 1.0) - sm * sm * (1.0 - e.wmin)) / (rho * rho);
    return {d / (3.0 * c * c), dd / (3.0 * c * c) - 2.0 * d / (3.0 * c * c * c)};
}

// eta_t = (Delta_inf eta + |D eta|^4) / 3, evaluated as e^{-3 eta} Delta_inf e^{eta} on the same stencil.
Rate eta_rate(const Samples& s, double c, double rho) {
    Extremes e = extremes(s, c);
    double ep = std::exp(e.max - c), em = std::exp(e.min - c);
    double a = ep - 1.0, b = 1.0 - em;
    double r4 = rho * rho * rho * rho;
    double gamma = (a * a * a - b * b * b) / (3.0 * r4);
    double dgamma = (a * a * ep * (e.wmax - 1.0) - b * b * em * (1.0 - e.wmin)) / r4;
    return {gamma / 3.0, dgamma / 3.0};
}

Rate node_rate(Variable v, const Samples& s, double c, double rho) {
    return v == Variable::phi ? phi_rate(s, c, rho) : eta_rate(s, c, rho);
}

// Bound on |d rate / d c| used for the explicit step: the node-weight terms are dropped,
// which only enlarges the bound.
double stiffness(Variable v, const Samples& s, double c, double rho) {
    Extremes e = extremes(s, c);
    if (v == Variable::phi) {
        double sp = (e.max - c) / rho, sm = (c - e.min) / rho;
        double d = (sp * sp * sp - sm * sm * sm) / (3.0 * rho);
        return (sp * sp + sm * sm) / (3.0 * rho * rho * c * c) + 2.0 * std::abs(d) / (3.0 * c * c * std::abs(c));
    }
    double a = std::expm1(e.max - c), b = -std::expm1(e.min - c);
    return (a * a * (1.0 + a) + b * b * (1.0 - b)) / (3.0 * rho * rho * rho * rho);
}

// Squared phi-slopes, for the accuracy step of the local implicit update.
double slope_sq(Variable v, const Samples& s, double c, double rho, double& phi_c) {
    Extremes e = extremes(s, c);
    if (v == Variable::phi) {
        phi_c = c;
        double sp = (e.max - c) / rho, sm = (c - e.min) / rho;
        return sp * sp + sm * sm;
    }
    phi_c = std::exp(c);
    double sp = phi_c * std::expm1(e.max - c) / rho, sm = -phi_c * std::expm1(e.min - c) / rho;
    return sp * sp + sm * sm;
}

// Root of G(c) = c - c_old - dt * rate(c) with G increasing; brackets from the discrete maximum principle.
double implicit_node(Variable v, const Samples& s, double c_old, double rho, double dt) {
    double lo = std::min(c_old, s.lo), hi = std::max(c_old, s.hi);
    if (hi - lo <= 1e-15 * std::max(1.0, std::abs(hi))) return c_old;
    // phi mode solves the polynomial form 3c^2 (c - c_old) = dt Delta_inf, which has the same sign
    // as G for c > 0 and is far better conditioned for Newton when c is small
    auto G = [&](double c, double& dG) {
        if (v == Variable::phi) {
            Extremes e = extremes(s, c);
            double sp = (e.max - c) / rho, sm = (c - e.min) / rho;
            double d = (sp * sp * sp - sm * sm * sm) / (3.0 * rho);
            double dd = (sp * sp * (e.wmax - 1.0) - sm * sm * (1.0 - e.wmin)) / (rho * rho);
            dG = 6.0 * c * (c - c_old) + 3.0 * c * c - dt * dd;
            return 3.0 * c * c * (c - c_old) - dt * d;
        }
        Rate r = node_rate(v, s, c, rho);
        dG = 1.0 - dt * r.dc;
        return c - c_old - dt * r.value;
    };
    if (v == Variable::phi) {
        lo = std::max(lo, 0.0);
        if (lo == 0.0) {
            lo = c_old > 0.0 ? c_old : hi;
            double dG;
            while (G(lo, dG) > 0.0) {
                lo *= 0.5;
                if (lo < 1e-300) throw NumericalError("local implicit update: no positive root");
            }
        }
    }
    // Newton steps safeguarded by the bracket, bisection when a step leaves it
    // (the rate has kinks where the extremal sample switches)
    double c = std::clamp(c_old, lo, hi), dG;
    const double tol = 1e-13 * std::max({std::abs(lo), std::abs(hi), 1e-300});
    for (int it = 0; it < 200; ++it) {
        double g = G(c, dG);
        if (g == 0.0) return c;
        (g < 0.0 ? lo : hi) = c;
        double step = g / dG;
        if (std::abs(step) <= tol) return std::clamp(c - step, lo, hi);
        double next = c - step;
        if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
        if (hi - lo <= tol) return next;
        c = next;
    }
    return c;
}

// Centred evaluation used only by the negative control.
struct CenteredNeighbors {
    std::vector<int> idx;  // per interior node: 3^n entries in offset order
    int count = 0;
};

CenteredNeighbors centered_neighbors(const CylinderGrid& g) {
    CenteredNeighbors cn;
    cn.count = 1;
    for (int i = 0; i < g.dim; ++i) cn.count *= 3;
    int off[3];
    for (int n : g.interior)
        for (int s = 0; s < cn.count; ++s) {
            int r = s;
            for (int i = 0; i < g.dim; ++i) {
                off[i] = r % 3 - 1;
                r /= 3;
            }
            cn.idx.push_back(g.neighbor(n, {off, static_cast<std::size_t>(g.dim)}));
        }
    return cn;
}

double centered_rate(Variable v, const CylinderGrid& g, const CenteredNeighbors& cn, int idx,
                     std::span<const double> values) {
    const int* nb = &cn.idx[static_cast<std::size_t>(idx) * cn.count];
    auto at = [&](int a, int b, int c) {  // offsets in {-1,0,1}
        int o[3] = {a, b, c}, s = 0, mul = 1;
        for (int i = 0; i < g.dim; ++i) {
            s += (o[i] + 1) * mul;
            mul *= 3;
        }
        return values[nb[s]];
    };
    double grad[3], hess[3][3];
    double c = at(0, 0, 0);
    for (int i = 0; i < g.dim; ++i) {
        int p[3] = {0, 0, 0}, m[3] = {0, 0, 0};
        p[i] = 1;
        m[i] = -1;
        double up = at(p[0], p[1], p[2]), dn = at(m[0], m[1], m[2]);
        grad[i] = (up - dn) / (2.0 * g.h);
        hess[i][i] = (up - 2.0 * c + dn) / (g.h * g.h);
        for (int j = i + 1; j < g.dim; ++j) {
            int a[3] = {0, 0, 0};
            auto corner = [&](int si, int sj) {
                a[0] = a[1] = a[2] = 0;
                a[i] = si;
                a[j] = sj;
                return at(a[0], a[1], a[2]);
            };
            hess[i][j] = hess[j][i] =
                (corner(1, 1) - corner(1, -1) - corner(-1, 1) + corner(-1, -1)) / (4.0 * g.h * g.h);
        }
    }
    double lap = 0.0, g2 = 0.0;
    for (int i = 0; i < g.dim; ++i) {
        g2 += grad[i] * grad[i];
        for (int j = 0; j < g.dim; ++j) lap += grad[i] * grad[j] * hess[i][j];
    }
    if (v == Variable::phi) return lap / (3.0 * c * c);
    return (lap + g2 * g2) / 3.0;
}

double to_variable(Variable v, double phi) {
    if (v == Variable::phi) return phi;
    if (!(phi > 0.0)) throw DataError("log variable needs positive data; use the phi variable for vanishing data");
    return std::log(phi);
}

}  // namespace

StencilTable build_stencil(const CylinderGrid& g, const StencilConfig& config) {
    if (!(config.radius_cells >= 1.0)) throw ConfigurationError("stencil: radius_cells must be at least 1");
    if (config.radius_sqrt_scale < 0.0) throw ConfigurationError("stencil: radius_sqrt_scale must be non-negative");
    StencilTable t;
    std::vector<double> dirs = direction_set(g.dim, config.directions);
    t.directions = static_cast<int>(dirs.size()) / g.dim;
    t.corners = 1 << g.dim;
    t.radius = std::max(config.radius_cells * g.h, config.radius_sqrt_scale * std::sqrt(g.h));
    const int K = t.directions, C = t.corners;
    const std::size_t ni = g.interior.size();
    t.node_radius.resize(ni);
    t.slot.assign(ni, -1);
    t.lattice_to_node = g.lattice_to_node;
    t.lattice_base.resize(ni);

    // lattice template of the full-radius stencil, relative to a node
    std::vector<int> stride(g.dim), tmpl_multi(static_cast<std::size_t>(K) * C * g.dim);
    for (int i = 0, s = 1; i < g.dim; ++i) {
        stride[i] = s;
        s *= g.extent[i];
    }
    t.template_offset.assign(static_cast<std::size_t>(K) * C, 0);
    t.template_weight.assign(static_cast<std::size_t>(K) * C, 0.0);
    t.template_center.assign(K, 0.0);
    for (int j = 0; j < K; ++j) {
        int base[3];
        double frac[3];
        for (int i = 0; i < g.dim; ++i) {
            double u = t.radius * dirs[j * g.dim + i] / g.h;
            double b = std::floor(u + 1e-12);
            frac[i] = u - b < 1e-12 ? 0.0 : u - b;
            base[i] = static_cast<int>(b);
        }
        for (int c = 0; c < C; ++c) {
            double w = 1.0;
            int off = 0;
            bool self = true;
            for (int i = 0; i < g.dim; ++i) {
                bool up = (c >> i) & 1;
                int m = base[i] + (up ? 1 : 0);
                tmpl_multi[(static_cast<std::size_t>(j) * C + c) * g.dim + i] = m;
                w *= up ? frac[i] : 1.0 - frac[i];
                off += m * stride[i];
                self = self && m == 0;
            }
            // zero-weight and self corners read the node itself with weight 0, so every offset is valid
            t.template_offset[j * C + c] = (self || w == 0.0) ? 0 : off;
            if (self)
                t.template_center[j] += w;
            else
                t.template_weight[j * C + c] = w;
        }
    }

    std::vector<double> candidates;
    for (int j = 0; j < 32; ++j) {
        double r = t.radius * (1.0 - j / 32.0);
        if (r <= g.h) break;
        candidates.push_back(r);
    }
    candidates.push_back(g.h);

    std::vector<int> nodes(C);
    std::vector<double> weights(C);
    double p[3];
    int multi[3], probe[3];
    for (std::size_t idx = 0; idx < ni; ++idx) {
        const int node = g.interior[idx];
        t.lattice_base[idx] = g.lattice_index[node];
        g.multi_index(node, {multi, static_cast<std::size_t>(g.dim)});
        bool full = true;
        for (int q = 0; q < K * C && full; ++q) {
            if (t.template_weight[q] == 0.0) continue;
            for (int i = 0; i < g.dim; ++i) probe[i] = multi[i] + tmpl_multi[static_cast<std::size_t>(q) * g.dim + i];
            full = g.node_at({probe, static_cast<std::size_t>(g.dim)}) >= 0;
        }
        if (full) {
            t.node_radius[idx] = t.radius;
            continue;
        }
        auto x = g.x(node);
        bool placed = false;
        for (double r : candidates) {
            bool ok = true;
            for (int j = 0; j < K && ok; ++j) {
                for (int i = 0; i < g.dim; ++i) p[i] = x[i] + r * dirs[j * g.dim + i];
                ok = interpolation(g, p, nodes.data(), weights.data());
            }
            if (!ok) continue;
            const int row = static_cast<int>(t.center_weight.size()) / K;
            t.slot[idx] = row;
            t.node_radius[idx] = r;
            t.corner_node.resize(t.corner_node.size() + static_cast<std::size_t>(K) * C, node);
            t.corner_weight.resize(t.corner_weight.size() + static_cast<std::size_t>(K) * C, 0.0);
            t.center_weight.resize(t.center_weight.size() + K, 0.0);
            for (int j = 0; j < K; ++j) {
                for (int i = 0; i < g.dim; ++i) p[i] = x[i] + r * dirs[j * g.dim + i];
                interpolation(g, p, nodes.data(), weights.data());
                for (int c = 0; c < C; ++c) {
                    std::size_t at = (static_cast<std::size_t>(row) * K + j) * C + c;
                    if (nodes[c] == node)
                        t.center_weight[static_cast<std::size_t>(row) * K + j] += weights[c];
                    else if (nodes[c] >= 0) {
                        t.corner_node[at] = nodes[c];
                        t.corner_weight[at] = weights[c];
                    }
                }
            }
            placed = true;
            break;
        }
        if (!placed) throw ConfigurationError("stencil: interior node without a complete neighbourhood");
    }

    if (config.boundary_fit) {
        double b[3], q[3];
        for (int node : g.lateral) {
            auto y = g.x(node);
            const double d = g.domain.signed_distance(y);
            if (!(d > 1e-9 * g.h)) continue;
            g.domain.project_to_boundary(y, {b, static_cast<std::size_t>(g.dim)});
            // the far end of the segment must interpolate from interior nodes alone
            for (int k = 1; k <= 8; ++k) {
                const double L = d + 0.5 * k * g.h;
                for (int i = 0; i < g.dim; ++i) q[i] = b[i] + L * (y[i] - b[i]) / d;
                if (!interpolation(g, q, nodes.data(), weights.data())) continue;
                bool inner = true;
                for (int c = 0; c < C; ++c) inner = inner && (nodes[c] < 0 || g.roles[nodes[c]] == NodeRole::interior);
                if (!inner) continue;
                t.ghost_node.push_back(node);
                t.ghost_point.insert(t.ghost_point.end(), b, b + g.dim);
                t.ghost_data_weight.push_back(1.0 - d / L);
                for (int c = 0; c < C; ++c) {
                    t.ghost_corner.push_back(nodes[c] < 0 ? node : nodes[c]);
                    t.ghost_weight.push_back(nodes[c] < 0 ? 0.0 : weights[c] * d / L);
                }
                break;
            }
        }
    }
    return t;
}

namespace {

// Overwrites the working values of ghost lateral nodes from the current interior values.
void apply_ghosts(const CylinderGrid& g, const StencilTable& t, const BoundaryData& data, Variable v, double time,
                  std::vector<double>& values) {
    const int C = t.corners;
    for (std::size_t r = 0; r < t.ghost_node.size(); ++r) {
        std::span<const double> b(&t.ghost_point[r * g.dim], static_cast<std::size_t>(g.dim));
        double acc = t.ghost_data_weight[r] * to_variable(v, data.lateral(b, time));
        for (int c = 0; c < C; ++c) acc += t.ghost_weight[r * C + c] * values[t.ghost_corner[r * C + c]];
        values[t.ghost_node[r]] = acc;
    }
}

}  // namespace

double stable_step(const CylinderGrid& g, const StencilTable& t, std::span<const double> values,
                   const SolverConfig& config) {
    double cap = std::min(config.dt_max, g.T / std::max(1, config.min_levels));
    double best = std::numeric_limits<double>::infinity();
    Samples s;
    for (std::size_t idx = 0; idx < g.interior.size(); ++idx) {
        int node = g.interior[idx];
        gather(t, static_cast<int>(idx), values, s);
        double k = stiffness(config.variable, s, values[node], t.node_radius[idx]);
        if (k > 0.0) best = std::min(best, 1.0 / k);
    }
    return std::min(cap, config.cfl * best);
}

namespace {

// phi_max rather than the local value: the implicit solve absorbs the stiffness of small phi,
// what is limited here is how far the solution moves within one step
double accuracy_from(const CylinderGrid& g, const SolverConfig& config, double phi_max, double worst) {
    double cap = std::min(config.dt_max, g.T / std::max(1, config.min_levels));
    if (worst <= 0.0) return cap;
    return std::min(cap, config.cfl * 3.0 * phi_max * phi_max / worst);
}

double accuracy_step(const CylinderGrid& g, const StencilTable& t, std::span<const double> values,
                     const SolverConfig& config) {
    double phi_max = 0.0, worst = 0.0;
    Samples s;
    for (std::size_t idx = 0; idx < g.interior.size(); ++idx) {
        int node = g.interior[idx];
        gather(t, static_cast<int>(idx), values, s);
        double phi_c, r = t.node_radius[idx];
        double q = slope_sq(config.variable, s, values[node], r, phi_c);
        phi_max = std::max(phi_max, phi_c);
        worst = std::max(worst, q / (r * r));
    }
    return accuracy_from(g, config, phi_max, worst);
}

struct Member {
    const BoundaryData* data;
    std::vector<double> cur, next;
    GridField field;
    // accuracy step measured on the samples of the previous update (local implicit only)
    double next_accuracy_dt = 0.0;
};

}  // namespace

std::vector<SolveResult> solve_ensemble(std::shared_ptr<const CylinderGrid> grid,
                                        const std::vector<BoundaryData>& data, const SolverConfig& config) {
    const auto& g = *grid;
    if (!(config.cfl > 0.0)) throw ConfigurationError("solver: cfl must be positive");
    if (config.min_levels < 1) throw ConfigurationError("solver: min_levels must be at least 1");
    if (data.empty()) return {};
    for (const auto& d : data) validate_boundary_data(g, d, config.variable == Variable::eta);

    const bool centered = config.scheme == Scheme::centered;
    if (centered && config.update != TimeUpdate::explicit_euler)
        throw ConfigurationError("solver: the centred scheme is explicit only");
    StencilTable table;
    CenteredNeighbors cn;
    if (centered)
        cn = centered_neighbors(g);
    else
        table = build_stencil(g, config.stencil);

    std::vector<Member> members;
    for (const auto& d : data) {
        Member m{&d, {}, {}, initial_field(grid, d)};
        m.cur.resize(g.node_count());
        for (int n = 0; n < g.node_count(); ++n) m.cur[n] = to_variable(config.variable, m.field.at(n, 0));
        if (!centered) apply_ghosts(g, table, d, config.variable, 0.0, m.cur);
        m.next = m.cur;
        members.push_back(std::move(m));
    }

    std::vector<double> dt_history;
    long steps = 0;
    double t = 0.0;
    Samples s;
    for (int level = 1; level < g.levels; ++level) {
        const double target = g.time(level);
        while (target - t > 1e-13 * g.T) {
            double dt;
            if (config.fixed_dt > 0.0) {
                dt = config.fixed_dt;
            } else {
                dt = std::numeric_limits<double>::infinity();
                for (const auto& m : members) {
                    double d;
                    if (centered)
                        d = std::min(config.dt_max, g.T / std::max(1, config.min_levels));
                    else if (config.update == TimeUpdate::explicit_euler)
                        d = stable_step(g, table, m.cur, config);
                    else
                        d = m.next_accuracy_dt > 0.0 ? m.next_accuracy_dt : accuracy_step(g, table, m.cur, config);
                    dt = std::min(dt, d);
                }
            }
            if (!(dt > 0.0) || !std::isfinite(dt)) throw NumericalError("solver: step size collapsed");
            double remaining = target - t;
            double pieces = std::ceil(remaining / dt - 1e-9);
            dt = remaining / std::max(1.0, pieces);
            if (++steps > config.max_steps) throw NumericalError("solver: step budget exhausted");

            const bool implicit = !centered && config.update == TimeUpdate::local_implicit;
            for (auto& m : members) {
                double phi_max = 0.0, worst = 0.0;
                for (std::size_t idx = 0; idx < g.interior.size(); ++idx) {
                    int node = g.interior[idx];
                    double c = m.cur[node], nv;
                    if (centered) {
                        nv = c + dt * centered_rate(config.variable, g, cn, static_cast<int>(idx), m.cur);
                    } else {
                        gather(table, static_cast<int>(idx), m.cur, s);
                        double rho = table.node_radius[idx];
                        if (config.update == TimeUpdate::explicit_euler)
                            nv = c + dt * node_rate(config.variable, s, c, rho).value;
                        else {
                            double phi_c, q = slope_sq(config.variable, s, c, rho, phi_c);
                            phi_max = std::max(phi_max, phi_c);
                            worst = std::max(worst, q / (rho * rho));
                            nv = implicit_node(config.variable, s, c, rho, dt);
                        }
                    }
                    if (config.variable == Variable::phi && !(nv >= config.positivity_floor) && !centered)
                        throw NumericalError("solver: positivity floor breached in phi mode; use the eta variable "
                                             "or the local implicit update");
                    if (!std::isfinite(nv)) throw NumericalError("solver: non-finite value");
                    m.next[node] = nv;
                }
                const double tn = (target - (t + dt) <= 1e-13 * g.T) ? target : t + dt;
                for (int node : g.lateral)
                    m.next[node] = to_variable(config.variable, m.data->lateral_at(g.domain, g.x(node), tn));
                if (!centered) apply_ghosts(g, table, *m.data, config.variable, tn, m.next);
                std::swap(m.cur, m.next);
                if (implicit) m.next_accuracy_dt = accuracy_from(g, config, phi_max, worst);
            }
            t += dt;
            if (target - t <= 1e-13 * g.T) t = target;
            dt_history.push_back(dt);
        }
        for (auto& m : members)
            for (int n : g.interior)
                m.field.at(n, level) = config.variable == Variable::phi ? m.cur[n] : std::exp(m.cur[n]);
    }

    std::vector<SolveResult> out;
    for (auto& m : members) {
        SolveResult r;
        r.field = std::move(m.field);
        r.dt_history = dt_history;
        r.steps = steps;
        r.residual = residual_pi(r.field);
        out.push_back(std::move(r));
    }
    return out;
}

SolveResult solve(std::shared_ptr<const CylinderGrid> grid, const BoundaryData& data, const SolverConfig& config) {
    return std::move(solve_ensemble(std::move(grid), {data}, config).front());
}

const char* to_string(Variable v) { return v == Variable::phi ? "phi" : "eta"; }
const char* to_string(TimeUpdate u) { return u == TimeUpdate::explicit_euler ? "explicit" : "local_implicit"; }
const char* to_string(Scheme s) { return s == Scheme::monotone ? "monotone" : "centered"; }

}  // namespace iplab
