#pragma once

#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "iplab/domain_grid.hpp"
#include "iplab/transforms.hpp"

namespace iplab {

/// Unknown advanced in time: phi itself, or eta = log phi.
enum class Variable { phi, eta };

/// explicit_euler needs the monotonicity step bound; local_implicit solves a scalar equation
/// for each node's new value against the previous neighbour values, which is monotone for any step.
enum class TimeUpdate { explicit_euler, local_implicit };

/// monotone: the cubic min/max stencil; centered: plain centred differences (a negative control
/// that has no comparison principle).
enum class Scheme { monotone, centered };

struct StencilConfig {
    /// Sampling radius in units of h (at least 1).
    double radius_cells = 1.0;
    /// When positive the radius becomes max(radius_cells h, radius_sqrt_scale sqrt(h)),
    /// so that it shrinks more slowly than h under refinement.
    double radius_sqrt_scale = 0.0;
    /// 0 selects the 3^n - 1 axis and diagonal directions; otherwise the number of
    /// equally spread directions (2-D and 3-D only).
    int directions = 0;
    /// When set, the solver's working values at lateral nodes are ghost values: the data at the
    /// nearest boundary point, linearly continued along the inward normal to an interpolated
    /// interior value. Stored lateral values remain the data at the node.
    bool boundary_fit = false;
};

struct SolverConfig {
    Variable variable = Variable::eta;
    TimeUpdate update = TimeUpdate::explicit_euler;
    Scheme scheme = Scheme::monotone;
    StencilConfig stencil;
    double cfl = 0.9;
    /// Lower bound on phi in phi mode; a step that would go below it is an error.
    double positivity_floor = 1e-8;
    /// The time step never exceeds T / min_levels.
    int min_levels = 1;
    double dt_max = std::numeric_limits<double>::infinity();
    /// When positive, every step uses this size (no stability bound is applied).
    double fixed_dt = 0.0;
    long max_steps = 200'000'000;
};

struct SolveResult {
    GridField field;  // phi at every stored level
    std::vector<double> dt_history;
    long steps = 0;
    ResidualReport residual;
};

/// Sampling geometry of the monotone stencil: for every interior node, the positions
/// x + rho_x d_j read through multilinear interpolation of node values.
/// Nodes with the full radius share one lattice template; nodes next to the boundary,
/// whose radius shrinks, keep their own corner lists.
struct StencilTable {
    int corners = 0;     // 2^n entries per sample
    int directions = 0;  // samples per node
    double radius = 0.0;
    std::vector<double> node_radius;  // per interior node

    std::vector<int> lattice_to_node;    // copy of the grid's lattice map
    std::vector<int> lattice_base;       // per interior node: its flat lattice index
    std::vector<int> template_offset;    // [direction][corner] flat lattice offsets
    std::vector<double> template_weight; // the node's own corner carries weight 0 here
    std::vector<double> template_center; // [direction]: weight on the node itself

    std::vector<int> slot;              // per interior node: -1 for the template, else a row below
    std::vector<int> corner_node;       // [slot][direction][corner]; the node itself is excluded
    std::vector<double> corner_weight;
    std::vector<double> center_weight;  // [slot][direction]

    // ghost rows of the boundary fit, one per lateral node that lies strictly inside the domain
    std::vector<int> ghost_node;
    std::vector<double> ghost_point;         // dim entries per row: the nearest boundary point
    std::vector<double> ghost_data_weight;   // weight on the boundary datum
    std::vector<int> ghost_corner;           // [row][corner], interior nodes only
    std::vector<double> ghost_weight;
};

StencilTable build_stencil(const CylinderGrid& grid, const StencilConfig& config);

/// Largest step allowed by the monotonicity bound at the given level values
/// (in the solver variable), capped by T / min_levels and dt_max.
double stable_step(const CylinderGrid& grid, const StencilTable& table, std::span<const double> values,
                   const SolverConfig& config);

SolveResult solve(std::shared_ptr<const CylinderGrid> grid, const BoundaryData& data, const SolverConfig& config);

/// Advances several data sets with one shared step sequence, so that discrete comparison
/// between members holds level by level.
std::vector<SolveResult> solve_ensemble(std::shared_ptr<const CylinderGrid> grid,
                                        const std::vector<BoundaryData>& data, const SolverConfig& config);

const char* to_string(Variable v);
const char* to_string(TimeUpdate u);
const char* to_string(Scheme s);

}  // namespace iplab
