#include "iplab/domain_grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <set>

#include "iplab/errors.hpp"

namespace iplab {

Domain Domain::interval(double a, double b) { return box({a}, {b}); }

Domain Domain::box(std::vector<double> lo, std::vector<double> hi) {
    if (lo.empty() || lo.size() != hi.size())
        throw ConfigurationError("box: lower and upper corners must have the same positive dimension");
    for (std::size_t i = 0; i < lo.size(); ++i)
        if (!(hi[i] > lo[i])) throw ConfigurationError("box: upper corner must exceed lower corner on every axis");
    Domain d;
    d.kind = DomainKind::box;
    d.dim = static_cast<int>(lo.size());
    d.lo = std::move(lo);
    d.hi = std::move(hi);
    return d;
}

Domain Domain::ball(std::vector<double> center, double radius) {
    if (center.empty()) throw ConfigurationError("ball: center must have positive dimension");
    if (!(radius > 0.0) || !std::isfinite(radius)) throw ConfigurationError("ball: radius must be positive");
    Domain d;
    d.kind = DomainKind::ball;
    d.dim = static_cast<int>(center.size());
    d.center = std::move(center);
    d.radius = radius;
    return d;
}

double Domain::signed_distance(std::span<const double> x) const {
    if (kind == DomainKind::ball) {
        double r2 = 0.0;
        for (int i = 0; i < dim; ++i) r2 += (x[i] - center[i]) * (x[i] - center[i]);
        return radius - std::sqrt(r2);
    }
    double inside = std::numeric_limits<double>::infinity();
    double out2 = 0.0;
    for (int i = 0; i < dim; ++i) {
        inside = std::min({inside, x[i] - lo[i], hi[i] - x[i]});
        double e = std::max({lo[i] - x[i], 0.0, x[i] - hi[i]});
        out2 += e * e;
    }
    return out2 > 0.0 ? -std::sqrt(out2) : inside;
}

void Domain::project_to_boundary(std::span<const double> x, std::span<double> out) const {
    if (kind == DomainKind::ball) {
        double r2 = 0.0;
        for (int i = 0; i < dim; ++i) r2 += (x[i] - center[i]) * (x[i] - center[i]);
        double r = std::sqrt(r2);
        for (int i = 0; i < dim; ++i) {
            double dir = r > 0.0 ? (x[i] - center[i]) / r : (i == 0 ? 1.0 : 0.0);
            out[i] = center[i] + radius * dir;
        }
        return;
    }
    for (int i = 0; i < dim; ++i) out[i] = std::clamp(x[i], lo[i], hi[i]);
    if (signed_distance(out) <= 0.0) return;
    // inside: move to the nearest face
    int axis = 0;
    bool upper = false;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < dim; ++i) {
        if (out[i] - lo[i] < best) best = out[i] - lo[i], axis = i, upper = false;
        if (hi[i] - out[i] < best) best = hi[i] - out[i], axis = i, upper = true;
    }
    out[axis] = upper ? hi[axis] : lo[axis];
}

double Domain::diameter() const {
    if (kind == DomainKind::ball) return 2.0 * radius;
    double d = 0.0;
    for (int i = 0; i < dim; ++i) d = std::max(d, hi[i] - lo[i]);
    return d;
}

nlohmann::json Domain::to_json() const {
    nlohmann::json j;
    if (kind == DomainKind::ball) {
        j["kind"] = "ball";
        j["center"] = center;
        j["radius"] = radius;
    } else {
        j["kind"] = dim == 1 ? "interval" : "box";
        j["lo"] = lo;
        j["hi"] = hi;
    }
    return j;
}

Domain Domain::from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
        throw ConfigurationError("domain: missing string field 'kind'");
    auto numbers = [&](const char* key) {
        if (!j.contains(key) || !j[key].is_array())
            throw ConfigurationError(std::string("domain: field '") + key + "' must be an array of numbers");
        std::vector<double> v;
        for (const auto& e : j[key]) {
            if (!e.is_number()) throw ConfigurationError(std::string("domain: field '") + key + "' must hold numbers");
            v.push_back(e.get<double>());
        }
        return v;
    };
    std::string kind = j["kind"].get<std::string>();
    if (kind == "interval") {
        auto lo = numbers("lo"), hi = numbers("hi");
        if (lo.size() != 1 || hi.size() != 1) throw ConfigurationError("domain: interval needs one-element 'lo' and 'hi'");
        return interval(lo[0], hi[0]);
    }
    if (kind == "box") return box(numbers("lo"), numbers("hi"));
    if (kind == "ball") {
        if (!j.contains("radius") || !j["radius"].is_number())
            throw ConfigurationError("domain: field 'radius' must be a number");
        return ball(numbers("center"), j["radius"].get<double>());
    }
    throw ConfigurationError("domain: unknown kind '" + kind + "' (expected interval, box or ball)");
}

int CylinderGrid::node_at(std::span<const int> multi) const {
    long flat = 0;
    for (int i = 0; i < dim; ++i) {
        if (multi[i] < 0 || multi[i] >= extent[i]) return -1;
        flat = flat * extent[i] + multi[i];
    }
    return lattice_to_node[flat];
}

void CylinderGrid::multi_index(int node, std::span<int> out) const {
    long flat = lattice_index[node];
    for (int i = dim - 1; i >= 0; --i) {
        out[i] = static_cast<int>(flat % extent[i]);
        flat /= extent[i];
    }
}

int CylinderGrid::neighbor(int node, std::span<const int> offset) const {
    int m[8];
    multi_index(node, {m, static_cast<std::size_t>(dim)});
    for (int i = 0; i < dim; ++i) m[i] += offset[i];
    return node_at({m, static_cast<std::size_t>(dim)});
}

std::vector<BoundaryEntry> CylinderGrid::parabolic_boundary() const {
    std::vector<BoundaryEntry> out;
    out.reserve(node_count() + lateral.size() * (levels - 1));
    for (int n = 0; n < node_count(); ++n) out.push_back({n, 0, true});
    for (int k = 1; k < levels; ++k)
        for (int n : lateral) out.push_back({n, k, false});
    return out;
}

nlohmann::json CylinderGrid::to_json() const {
    nlohmann::json j;
    j["domain"] = domain.to_json();
    j["h"] = h;
    j["T"] = T;
    j["levels"] = levels;
    j["interior_nodes"] = interior.size();
    j["lateral_nodes"] = lateral.size();
    j["parabolic_boundary_entries"] = node_count() + lateral.size() * (levels - 1);
    auto& nodes = j["nodes"] = nlohmann::json::array();
    for (int n = 0; n < node_count(); ++n) {
        auto p = x(n);
        nodes.push_back({{"x", std::vector<double>(p.begin(), p.end())},
                         {"role", roles[n] == NodeRole::interior ? "interior" : "lateral"}});
    }
    return j;
}

CylinderGrid build_grid(const Domain& domain, double h, double T, int levels, const GridOptions& options) {
    if (!(h > 0.0) || !std::isfinite(h)) throw ConfigurationError("grid: spacing h must be positive");
    if (!(T > 0.0) || !std::isfinite(T)) throw ConfigurationError("grid: final time T must be positive");
    if (levels < 2) throw ConfigurationError("grid: at least two time levels are required");
    if (domain.dim < 1 || domain.dim > 3) throw ConfigurationError("grid: dimension must be 1, 2 or 3");

    CylinderGrid g;
    g.domain = domain;
    g.dim = domain.dim;
    g.h = h;
    g.T = T;
    g.levels = levels;
    g.origin.resize(g.dim);
    g.extent.resize(g.dim);
    const double tol = options.tolerance * std::max(1.0, domain.diameter());
    for (int i = 0; i < g.dim; ++i) {
        if (domain.kind == DomainKind::ball) {
            long k = static_cast<long>(std::floor(domain.radius / h + 1e-9));
            g.origin[i] = domain.center[i] - k * h;
            g.extent[i] = static_cast<int>(2 * k + 1);
        } else {
            g.origin[i] = domain.lo[i];
            g.extent[i] = static_cast<int>(std::floor((domain.hi[i] - domain.lo[i]) / h + 1e-9)) + 1;
        }
    }
    long total = 1;
    for (int e : g.extent) {
        total *= e;
        if (total > 50'000'000L) throw ConfigurationError("grid: lattice too large");
    }

    g.lattice_to_node.assign(total, -1);
    std::vector<double> p(g.dim);
    std::vector<int> m(g.dim);
    for (long flat = 0; flat < total; ++flat) {
        long r = flat;
        for (int i = g.dim - 1; i >= 0; --i) {
            m[i] = static_cast<int>(r % g.extent[i]);
            r /= g.extent[i];
        }
        for (int i = 0; i < g.dim; ++i) p[i] = g.origin[i] + m[i] * h;
        if (domain.signed_distance(p) >= -tol) {
            g.lattice_to_node[flat] = static_cast<int>(g.lattice_index.size());
            g.lattice_index.push_back(flat);
            g.coords.insert(g.coords.end(), p.begin(), p.end());
        }
    }

    const int n = static_cast<int>(g.lattice_index.size());
    g.roles.assign(n, NodeRole::lateral);
    int stencil = 1;
    for (int i = 0; i < g.dim; ++i) stencil *= 3;
    std::vector<int> off(g.dim);
    for (int node = 0; node < n; ++node) {
        if (domain.signed_distance(g.x(node)) <= tol) continue;
        bool all = true;
        for (int s = 0; s < stencil && all; ++s) {
            int r = s;
            for (int i = 0; i < g.dim; ++i) {
                off[i] = r % 3 - 1;
                r /= 3;
            }
            if (g.neighbor(node, off) < 0) all = false;
        }
        if (all) g.roles[node] = NodeRole::interior;
    }
    for (int node = 0; node < n; ++node)
        (g.roles[node] == NodeRole::interior ? g.interior : g.lateral).push_back(node);

    for (int axis = 0; axis < g.dim; ++axis) {
        std::set<int> distinct;
        for (int node : g.interior) {
            g.multi_index(node, m);
            distinct.insert(m[axis]);
        }
        if (static_cast<int>(distinct.size()) < options.min_interior_per_axis)
            throw ConfigurationError("grid: degenerate grid with " + std::to_string(distinct.size()) +
                                     " interior nodes along axis " + std::to_string(axis) + " (need at least " +
                                     std::to_string(options.min_interior_per_axis) + ")");
    }
    return g;
}

GridField::GridField(std::shared_ptr<const CylinderGrid> g, double fill) : grid(std::move(g)) {
    values.assign(static_cast<std::size_t>(grid->node_count()) * grid->levels, fill);
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void GridField::write_csv(std::ostream& os) const {
    const auto& g = *grid;
    os << "level,t,node";
    for (int i = 0; i < g.dim; ++i) os << ",x" << i;
    os << ",role,value\n";
    for (int k = 0; k < g.levels; ++k)
        for (int n = 0; n < g.node_count(); ++n) {
            os << k << ',' << format_double(g.time(k)) << ',' << n;
            for (double c : g.x(n)) os << ',' << format_double(c);
            os << ',' << (g.roles[n] == NodeRole::interior ? "interior" : "lateral") << ','
               << format_double(at(n, k)) << '\n';
        }
}

double BoundaryData::lateral_at(const Domain& domain, std::span<const double> x, double t) const {
    if (!project_lateral) return lateral(x, t);
    double buf[8];
    std::span<double> p(buf, x.size());
    domain.project_to_boundary(x, p);
    return lateral(p, t);
}

double boundary_value(const CylinderGrid& grid, const BoundaryData& data, const BoundaryEntry& e) {
    if (e.initial) return data.initial(grid.x(e.node));
    return data.lateral_at(grid.domain, grid.x(e.node), grid.time(e.level));
}

DataBounds data_bounds(const CylinderGrid& grid, const BoundaryData& data) {
    DataBounds b{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (const auto& e : grid.parabolic_boundary()) {
        double v = boundary_value(grid, data, e);
        b.inf = std::min(b.inf, v);
        b.sup = std::max(b.sup, v);
    }
    return b;
}

void validate_boundary_data(const CylinderGrid& grid, const BoundaryData& data, bool require_positive, double tol) {
    if (!data.initial || !data.lateral) throw DataError("boundary data '" + data.name + "' is incomplete");
    for (const auto& e : grid.parabolic_boundary()) {
        double v = boundary_value(grid, data, e);
        if (!std::isfinite(v)) throw DataError("boundary data '" + data.name + "' is not finite");
        if (require_positive && !(v > 0.0))
            throw DataError("boundary data '" + data.name + "' is not positive on the parabolic boundary");
    }
    if (data.allow_corner_jump) return;
    for (int n : grid.lateral) {
        double f = data.initial(grid.x(n));
        double g = data.lateral_at(grid.domain, grid.x(n), 0.0);
        if (std::abs(f - g) > tol * std::max(1.0, std::abs(f)))
            throw DataError("boundary data '" + data.name + "': initial and lateral values disagree at a corner node (" +
                            format_double(f) + " vs " + format_double(g) + ")");
    }
}

GridField initial_field(std::shared_ptr<const CylinderGrid> grid, const BoundaryData& data) {
    GridField field(grid);
    const auto& g = *grid;
    for (int n = 0; n < g.node_count(); ++n) {
        double f = data.initial(g.x(n));
        for (int k = 0; k < g.levels; ++k) field.at(n, k) = f;
    }
    for (int k = 1; k < g.levels; ++k)
        for (int n : g.lateral) field.at(n, k) = data.lateral_at(g.domain, g.x(n), g.time(k));
    return field;
}

}  // namespace iplab
