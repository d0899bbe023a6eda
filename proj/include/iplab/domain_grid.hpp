#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace iplab {

enum class DomainKind { box, ball };

/// Bounded spatial domain: an axis-aligned box (an interval when dim == 1) or a ball.
struct Domain {
    DomainKind kind = DomainKind::box;
    int dim = 1;
    std::vector<double> lo, hi;
    std::vector<double> center;
    double radius = 0.0;

    static Domain interval(double a, double b);
    static Domain box(std::vector<double> lo, std::vector<double> hi);
    static Domain ball(std::vector<double> center, double radius);

    /// Positive inside, zero on the boundary, negative outside.
    double signed_distance(std::span<const double> x) const;
    void project_to_boundary(std::span<const double> x, std::span<double> out) const;
    /// Largest extent of the domain along any axis.
    double diameter() const;

    nlohmann::json to_json() const;
    static Domain from_json(const nlohmann::json& j);
};

enum class NodeRole : unsigned char { interior, lateral };

/// One entry of the discrete parabolic boundary: every node at level 0, plus
/// lateral nodes at later levels. Corner nodes appear once, as initial.
struct BoundaryEntry {
    int node;
    int level;
    bool initial;
};

/// Lattice of nodes covering the closed domain, times levels t_k = k*T/levels, k < levels.
/// The slab t = T is never stored.
struct CylinderGrid {
    Domain domain;
    int dim = 1;
    double h = 0.0;
    double T = 0.0;
    int levels = 0;

    std::vector<double> origin;
    std::vector<int> extent;
    std::vector<int> lattice_to_node;  // -1 where the lattice point lies outside the closure
    std::vector<double> coords;        // dim entries per node
    std::vector<int> lattice_index;    // flat lattice index per node
    std::vector<NodeRole> roles;
    std::vector<int> interior;
    std::vector<int> lateral;

    int node_count() const { return static_cast<int>(roles.size()); }
    std::span<const double> x(int node) const {
        return {coords.data() + static_cast<std::size_t>(node) * dim, static_cast<std::size_t>(dim)};
    }
    double level_dt() const { return T / levels; }
    double time(int level) const { return level * level_dt(); }

    /// Node at the lattice point offset from `node`, or -1.
    int neighbor(int node, std::span<const int> offset) const;
    /// Node at a lattice multi-index, or -1 (also for indices off the lattice).
    int node_at(std::span<const int> multi) const;
    void multi_index(int node, std::span<int> out) const;

    std::vector<BoundaryEntry> parabolic_boundary() const;
    nlohmann::json to_json() const;
};

struct GridOptions {
    int min_interior_per_axis = 3;
    double tolerance = 1e-12;
};

/// Interior nodes lie strictly inside the domain and have all 3^n - 1 lattice
/// neighbours inside the closure; every other lattice point of the closure is lateral.
CylinderGrid build_grid(const Domain& domain, double h, double T, int levels,
                        const GridOptions& options = {});

/// Node-by-level values on a grid; values[level * nodes + node].
struct GridField {
    std::shared_ptr<const CylinderGrid> grid;
    std::vector<double> values;

    GridField() = default;
    explicit GridField(std::shared_ptr<const CylinderGrid> g, double fill = 0.0);

    int nodes() const { return grid->node_count(); }
    int levels() const { return grid->levels; }
    double& at(int node, int level) { return values[static_cast<std::size_t>(level) * nodes() + node]; }
    double at(int node, int level) const {
        return values[static_cast<std::size_t>(level) * nodes() + node];
    }
    std::span<double> level(int k) {
        return {values.data() + static_cast<std::size_t>(k) * nodes(), static_cast<std::size_t>(nodes())};
    }
    std::span<const double> level(int k) const {
        return {values.data() + static_cast<std::size_t>(k) * nodes(), static_cast<std::size_t>(nodes())};
    }

    /// One row per node and level; floats with 17 significant digits.
    void write_csv(std::ostream& os) const;
};

using SpaceFn = std::function<double(std::span<const double>)>;
using SpaceTimeFn = std::function<double(std::span<const double>, double)>;

/// Initial data f on the closed domain and lateral data g on the lateral boundary.
struct BoundaryData {
    std::string name;
    SpaceFn initial;
    SpaceTimeFn lateral;
    /// Evaluate g at the nearest point of the boundary instead of at the lateral node itself.
    bool project_lateral = false;
    /// Permit f != g at corners (t = 0 on the boundary), as for data that vanishes laterally.
    bool allow_corner_jump = false;

    double lateral_at(const Domain& domain, std::span<const double> x, double t) const;
};

/// Value of the data at a parabolic boundary entry (f for initial entries, g otherwise).
double boundary_value(const CylinderGrid& grid, const BoundaryData& data, const BoundaryEntry& e);

struct DataBounds {
    double inf = 0.0;
    double sup = 0.0;
};

DataBounds data_bounds(const CylinderGrid& grid, const BoundaryData& data);

/// Throws DataError when the data is non-positive on the parabolic boundary
/// (unless allowed) or when f and g disagree at a corner beyond `tol`.
void validate_boundary_data(const CylinderGrid& grid, const BoundaryData& data, bool require_positive,
                            double tol = 1e-9);

/// Field carrying the data on the parabolic boundary and f at interior nodes of every level.
GridField initial_field(std::shared_ptr<const CylinderGrid> grid, const BoundaryData& data);

/// Print with 17 significant digits, the precision used in every exported artifact.
std::string format_double(double v);

}  // namespace iplab
