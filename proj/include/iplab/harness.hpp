#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "iplab/barriers.hpp"
#include "iplab/domain_grid.hpp"
#include "iplab/solver.hpp"
#include "json.hpp"

namespace iplab {

/// Outcome of one property over all of its instances. The margin is signed: positive
/// values are violations. pass <=> worst_violation <= tolerance.
struct PropertyReport {
    std::string property_id;
    long instances_run = 0;
    long instances_skipped = 0;
    double worst_violation = 0.0;
    double tolerance = 0.0;
    bool pass = true;
    /// No instance met the precondition; the property holds trivially.
    bool vacuous = false;
    std::vector<std::string> artifacts;
    nlohmann::json details = nlohmann::json::object();

    void record(double margin);
    /// Sets pass from the margin and tolerance.
    void finish();
    nlohmann::json to_json() const;
};

void write_summary_csv(std::ostream& os, const std::vector<PropertyReport>& reports);

/// Rounding allowance for values of a field: 64 ulp of its largest magnitude.
double rounding_band(const GridField& field);

/// Values of a barrier at every node and level.
GridField sample_barrier(const Barrier& b, std::shared_ptr<const CylinderGrid> grid);

// ---------------------------------------------------------------------------------------------
// Seeded generators

/// mt19937_64 with a fixed 53-bit conversion, so draws are identical on every platform
/// (the standard distributions are implementation-defined).
struct SeededGenerator {
    std::mt19937_64 engine;
    explicit SeededGenerator(std::uint64_t seed) : engine(seed) {}
    double uniform() { return static_cast<double>(engine() >> 11) * 0x1.0p-53; }  // [0, 1)
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    int below(int n) { return static_cast<int>(uniform() * n); }
};

/// Constant plus up to three Gaussian bumps for f, and g = f (1 + b sin(w t)) on the lateral boundary,
/// so that the data is positive and continuous at the corners.
BoundaryData random_positive_data(const Domain& domain, std::uint64_t seed);
/// (lower, upper) with f1 <= f2 and g1 <= g2 everywhere.
std::pair<BoundaryData, BoundaryData> random_ordered_data(const Domain& domain, std::uint64_t seed);

// ---------------------------------------------------------------------------------------------
// Property checks

/// Interior values of every field stay within [inf h, sup h] over its own parabolic boundary entries.
PropertyReport check_weak_max_principle(const std::vector<const GridField*>& fields, double tolerance);

/// u <= v at every node of Omega_T for pairs ordered on the parabolic boundary; pairs violating the
/// order on P_T are skipped. Ratio mode compares sup u/v over Omega_T with sup over P_T (entries with
/// v = 0 are ignored).
PropertyReport check_comparison(const std::vector<std::pair<const GridField*, const GridField*>>& pairs,
                                double tolerance, bool ratio_mode = false);

/// Locates an interior node whose value is within `tolerance` of inf over P_T (latest time first) and
/// checks that the value stays at that minimum at every earlier level. Vacuous without such a node.
PropertyReport check_min_propagation(const GridField& field, double tolerance);

/// Evidence from the strong-minimum bump: whether m + psi fits below the field on the parabolic
/// boundary of the bump cylinder, and by how much it exceeds the field at the anchor.
struct MinmInstrument {
    bool fits = false;
    double anchor_excess = 0.0;
    int bottom_level = 0;
};

MinmInstrument minm_instrument(const GridField& field, int node, int level, const MinmBump& bump, double m);

/// The bump's exact residual stays above its closed-form lower bound at `count` seeded points of the
/// cylinder, and the bump is exactly zero on the lateral face |x - y| = rho.
PropertyReport check_minm_bump(const MinmBump& bump, int count, std::uint64_t seed);

struct DecaySeries {
    std::vector<double> t;
    std::vector<double> sup;
};

DecaySeries decay_series(const GridField& phi);
/// Least-squares slope of log sup over the final half of the levels.
double fit_decay_slope(const DecaySeries& series, int& points);

/// Fitted slope of log sup phi against -lambda/3: two-sided within `fraction` for eigen data,
/// one-sided otherwise; sup phi must not increase. Vacuous with fewer than 20 fit points.
PropertyReport check_decay_rate(const GridField& phi, double lambda, bool eigen_data, double fraction = 0.1);

/// phi at the first stored level t >= T_(k+1) stays below psi / 2^k, for k = 1..slabs - 1. A slab time
/// beyond the grid counts as an infinite violation; phi above psi at T_1 skips the instance.
PropertyReport check_staircase(const GridField& phi, const Staircase& st, double tolerance);

/// Smallest lambda_bar (by bisection) whose profile with boundary value epsilon lies above phi at `level`.
double staircase_lambda(const GridField& phi, int level, const Domain& ball, double epsilon);

/// Perron families from the anchor net at each epsilon (stride 1 anchors every P_T entry, which the
/// gap needs: lateral entries between anchor levels are otherwise covered by no barrier): family sup <= solution <= family inf within
/// band + 2 epsilon, and the P_T gap max(h - sup, inf - h) decreases along the epsilon list.
PropertyReport check_sandwich(const BarrierContext& ctx, const GridField& solution,
                              const std::vector<double>& epsilons, double band, int level_stride = 1,
                              int jobs = 1);

/// Largest <X p, p> - 3 a u^2 over interior nodes from jets fitted with the grid spacing (nodes whose
/// fitting lattice could leave the domain are skipped); nullopt when no value exceeds the threshold
/// (the field behaves as a super-solution).
struct JetViolation {
    int node = -1;
    int level = -1;
    JetFit jet;
};

std::optional<JetViolation> find_super_violation(const std::function<double(std::span<const double>, double)>& fn,
                                                 const CylinderGrid& grid, double threshold);

/// max(w, psi) on D_{r,r}(z, theta) and w elsewhere: strictly above w at the anchor node, identical
/// outside D_{r,r} node for node, equal to w on D_{r,r} minus D_{r/2,r/2}, and the jet test of the
/// sub-solution inequality passes on the seam {w = psi}.
PropertyReport check_bump_improvement(std::shared_ptr<const CylinderGrid> grid,
                                      const std::function<double(std::span<const double>, double)>& w,
                                      const Exist13Bump& bump, double r, int anchor_node, int anchor_level);

struct SurrogateCase {
    double R = 0.0;
    double tol = 0.0;
    double interior_min = 0.0;
    double interior_max = 0.0;
    double upper_barrier_gap = 0.0;  // min over nodes of Gamma_lambda - phi
    double lower_barrier_gap = 0.0;  // min over nodes of phi - Theta_R
};

/// Balls of radius R centred at the origin with data f (and g = f laterally). tol_R is the barrier
/// estimate on the half-radius ball, max(mu (e^{lambda T/3} - 1), nu (1 - e^{-lambda_B T/3})).
PropertyReport check_large_ball_surrogate(const std::vector<double>& radii, const SpaceFn& f, double nu, double mu,
                                          double cells_per_radius, double T, int levels, const SolverConfig& config,
                                          std::vector<SurrogateCase>* cases = nullptr);

/// Four reports over a barrier family: barrier_domination (sub <= h, super >= h at every P_T entry; exact
/// where the barrier is on its plateau or constant), barrier_pin (h -+ 2 eps at the anchor, or h itself for
/// constant barriers, to 1e-9), barrier_seams (jump between adjacent pieces <= 1e-9) and
/// barrier_residual_sign (closed-form Gamma residual >= 0 / <= 0 at sampled region points, after
/// normalising by the largest rate of the barrier and allowing 1e-12 of rounding).
std::vector<PropertyReport> audit_barriers(const BarrierContext& ctx, const std::vector<Barrier>& family,
                                           int region_samples, std::uint64_t seed);

/// max |(u')^2 u'' -+ lambda u^3| / (lambda m^3) over [lo R, hi R], with derivatives of the evaluated
/// profile taken by five-point differences.
double radial_ode_residual(const RadialProfile& profile, double lo = 0.05, double hi = 0.95, int samples = 200);

/// Both two-sided log/exp inequalities at `count` seeded points of [-1/3, 1/3].
PropertyReport check_log_inequalities(int count, std::uint64_t seed);

}  // namespace iplab
