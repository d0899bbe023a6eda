#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "iplab/domain_grid.hpp"
#include "iplab/quadrature_radial.hpp"
#include "json.hpp"

namespace iplab {

enum class BarrierFamily {
    alpha_sub,
    beta_sub,
    gamma_sub_cone,
    alpha_sup,
    beta_sup,
    gamma_sup_cusp,
    staircase_sup,
    minm_bump,
    exist13_bump,
    asym01_barrier
};

enum class BarrierKind { sub, super };

/// Smooth piece of a barrier. `radial` is the profile piece of the alpha/beta families;
/// the cone and cusp families use `upper` (t >= s) and `lower` (t <= s).
enum class BarrierPiece { plateau, radial, upper, lower };

const char* to_string(BarrierFamily f);
const char* to_string(BarrierKind k);
const char* to_string(BarrierPiece p);
BarrierFamily barrier_family_from_string(const std::string& s);

/// Boundary data h on the discrete parabolic boundary of a grid, with the bounds
/// m = inf h and M = sup h that every barrier is glued to.
struct BarrierContext {
    std::shared_ptr<const CylinderGrid> grid;
    BoundaryData data;
    double m = 0.0;
    double M = 0.0;
    /// Starting radius / half-height for the continuity modulus back-off.
    double delta0 = 0.0;
    double tau0 = 0.0;

    std::vector<BoundaryEntry> entries;
    std::vector<double> entry_value;
    std::vector<int> entry_index;  // level * nodes + node -> entry, or -1

    /// delta0 and tau0 default to a quarter of the domain diameter and of T.
    static BarrierContext make(std::shared_ptr<const CylinderGrid> grid, BoundaryData data, double delta0 = 0.0,
                               double tau0 = 0.0);

    /// h at a parabolic boundary entry; throws ParameterError for other node/level pairs.
    double h(int node, int level) const;
    bool on_boundary(int node, int level) const;

    /// Largest sampled |h - h0| over entries with |x - y| <= radius and t in [t_lo, t_hi].
    double oscillation(std::span<const double> y, double radius, double t_lo, double t_hi, double h0) const;
};

/// One member of the sub- or super-solution families, pinned at a boundary anchor.
/// A barrier is either constant or a radial/cone/cusp bump glued to a plateau.
struct Barrier {
    BarrierFamily family = BarrierFamily::alpha_sub;
    BarrierKind kind = BarrierKind::sub;
    std::vector<double> anchor;
    double anchor_time = 0.0;
    double epsilon = 0.0;
    double data_value = 0.0;  // h at the anchor
    bool constant = false;

    double base = 0.0;  // m - 2 eps (sub) or M + 2 eps (super); the value itself when constant
    // alpha/beta families: profile(|x - y|) exp(-+ rate t / 3) inside B_delta(y), base exp(-+ rate t / 3) outside
    RadialProfile profile;
    double rate = 0.0;
    // cone/cusp families (and the radius of the alpha/beta ball)
    double delta = 0.0;
    double tau = 0.0;
    double k = 0.0;
    double c = 0.0;
    double nu = 1.0;
    double log_ratio = 0.0;  // Gamma = log((M + 2 eps)/(m + 2 eps)) of the cusp family

    double value(std::span<const double> x, double t) const;
    BarrierPiece piece(std::span<const double> x, double t) const;
    /// Formula of a given piece, extended off its region (used to measure seam jumps).
    double piece_value(BarrierPiece p, std::span<const double> x, double t) const;
    /// Closed-form Delta_inf eta + |D eta|^4 - 3 eta_t of eta = log(value) on the piece
    /// containing (x, t); the Pi residual is value^3 times this.
    double residual_gamma(std::span<const double> x, double t) const;
    double residual_pi(std::span<const double> x, double t) const;

    nlohmann::json to_json() const;
};

Barrier make_alpha_sub(const BarrierContext& ctx, int node, double epsilon);
Barrier make_beta_sub(const BarrierContext& ctx, int node, double epsilon);
Barrier make_gamma_sub_cone(const BarrierContext& ctx, int node, int level, double epsilon);
Barrier make_alpha_sup(const BarrierContext& ctx, int node, double epsilon);
Barrier make_beta_sup(const BarrierContext& ctx, int node, double epsilon);
Barrier make_gamma_sup_cusp(const BarrierContext& ctx, int node, int level, double epsilon);

/// Picks alpha (interior node at level 0), beta (lateral node at level 0) or gamma (later level).
Barrier make_barrier(const BarrierContext& ctx, int node, int level, double epsilon, BarrierKind kind);

struct SeamPoint {
    std::vector<double> x;
    double t = 0.0;
    BarrierPiece a = BarrierPiece::plateau;
    BarrierPiece b = BarrierPiece::plateau;
};

/// Random points on the seams between pieces; empty for constant barriers.
std::vector<SeamPoint> seam_points(const Barrier& b, int count, std::uint64_t seed);
/// Random points strictly inside a piece (inside the cylinder when rejection sampling allows).
std::vector<std::pair<std::vector<double>, double>> region_points(const Barrier& b, BarrierPiece p, int count,
                                                                  std::uint64_t seed);

/// Semi-jet estimate at (x, t): least-squares fit of u + a (t - t0) + <p, x - x0> + <X (x - x0), x - x0>/2
/// on the 5^(n+1) lattice of spacing (hx, ht) around the point.
struct JetFit {
    double u = 0.0;
    double a = 0.0;
    std::vector<double> p;
    std::vector<double> X;  // n x n, row-major
    /// <X p, p> - 3 a u^2: must be >= 0 at a sub-solution, <= 0 at a super-solution.
    double quantity = 0.0;
};

JetFit fit_jet(const std::function<double(std::span<const double>, double)>& fn, std::span<const double> x,
               double t, double hx, double ht);

/// Slab super-solutions psi(x) g_k(t) / 2^(k-1) on [T_k, T_(k+1)] for data whose lateral part decays.
struct Staircase {
    RadialProfile psi;  // decaying profile with boundary value epsilon
    std::vector<double> center;
    double epsilon = 0.0;
    double lambda_bar = 0.0;
    std::vector<double> times;  // T_1 < T_2 < ... < T_(K+1)

    int slabs() const { return static_cast<int>(times.size()) - 1; }
    /// g_k on slab k (1-based).
    double g(int k, double t) const;
    double g_prime(int k, double t) const;
    double psi_at(std::span<const double> x) const;
    double value(int k, std::span<const double> x, double t) const;
    /// Direct Pi residual of slab k from Delta_inf psi = -lambda_bar psi^3.
    double residual_pi(int k, std::span<const double> x, double t) const;
    /// The closed form -(lambda_bar psi^3 g_k^2 / 2^(3(k-1)+1)) (E - 2)/(E - 1), E = exp(lambda_bar dT_k / 3).
    double residual_closed_form(int k, std::span<const double> x, double t) const;

    nlohmann::json to_json() const;
};

/// Times follow the slab rule: T_(k+1) >= 1 + T_k, exp(lambda_bar (T_(k+1) - T_k)/3) >= 2 and
/// sup g(., t) <= epsilon / 2^(k+1) for t >= T_(k+1). `lateral_sup` must be non-increasing and tend to 0.
Staircase make_staircase_sup(const Domain& ball, const std::function<double(double)>& lateral_sup, double epsilon,
                             double lambda_bar, int slabs);

/// Test function K (rho^2 - |x - y|^2)^2 h(t) on B_rho(y) x [s - eps, s + eps/3]; zero outside the ball.
struct MinmBump {
    std::vector<double> center;
    double s = 0.0;
    double eps = 0.0;
    double rho = 0.0;
    double sigma = 0.0;
    double delta = 0.0;
    double K = 0.0;

    double time_factor(double t) const { return 1.0 - (t - s + eps) / (2.0 * eps); }
    double value(std::span<const double> x, double t) const;
    double value_at_radius(double r, double t) const;
    /// Delta_inf psi + sigma |D psi|^4 - 3 psi_t, exact.
    double residual(double r, double t) const;
    /// K (rho^2 - r^2)^2 (3/(2 eps) - 64 K^2 rho^4 (1 + 4 |sigma| rho^4)).
    double residual_lower_bound(double r) const;

    nlohmann::json to_json() const;
};

MinmBump make_minm_bump(std::vector<double> center, double s, double eps, double rho, double sigma, double delta);

/// u_z(r) = delta + K (R^(4/3) - (R - r)^(4/3)) with K = L max(R^(-4/3), (lambda sigma)^(1/3)), sigma = 3^4/4^3.
struct Asym01Barrier {
    std::vector<double> z;
    double R = 0.0;
    double L = 0.0;
    double lambda = 0.0;
    double delta = 0.0;
    double K = 0.0;

    static constexpr double sigma = 81.0 / 64.0;

    double value(double r) const;
    double value_at(std::span<const double> x) const;
    /// (u')^2 u'' = -K^3 / sigma, constant in r.
    double infinity_laplacian(double r) const;

    nlohmann::json to_json() const;
};

/// R is the largest distance from z to the domain.
Asym01Barrier make_asym01_barrier(const Domain& domain, std::vector<double> z, double L, double lambda, double delta);
/// (4 R1^(1/3) / 3) max(R0^(-4/3), (lambda sigma)^(1/3)) for 0 < R0 <= R_z <= R1.
double asym01_constant(double R0, double R1, double lambda);

/// psi(x, t) = k + a (t - theta) + <p, x - z> + <X (x - z), x - z>/2 + delta - nu (|x - z|^2 + |t - theta|).
struct Exist13Bump {
    std::vector<double> z;
    double theta = 0.0;
    double a = 0.0;
    std::vector<double> p;
    std::vector<double> X;
    double k = 0.0;
    double delta = 0.0;
    double nu = 0.0;
    double mu = 0.0;         // <X p, p> - 3 a k^2
    double rho = 0.0;        // the residual stays positive on D_{rho, rho}(z, theta)

    double value(std::span<const double> x, double t) const;
    /// Pi residual; on t = theta the larger one-sided time derivative is used.
    double residual_pi(std::span<const double> x, double t) const;

    nlohmann::json to_json() const;
};

/// Throws ParameterError unless mu > 0. rho is found by halving from 1 until the residual is
/// positive on a sample lattice of D_{rho, rho}.
Exist13Bump make_exist13_bump(std::vector<double> z, double theta, double a, std::vector<double> p,
                              std::vector<double> X, double k, double delta, double nu);
/// delta = min(delta0, r^2 nu / 32): the choice that keeps max(w, psi) = w outside D_{r/2, r/2}.
double exist13_delta(double delta0, double r, double nu);

/// Discrete semicontinuous envelopes. A node is lifted (lowered) to the value obtained by extrapolating
/// the punctured neighbourhood sup (inf) over the two smallest radii of the sequence to radius zero;
/// the operator is iterated to a fixed point, which makes it idempotent.
GridField usc_envelope(const GridField& field, const std::vector<int>& radius_sequence = {2, 1});
GridField lsc_envelope(const GridField& field, const std::vector<int>& radius_sequence = {2, 1});

/// Every node at level 0 and the lateral nodes at every `level_stride`-th later level.
std::vector<std::pair<int, int>> anchor_net(const CylinderGrid& grid, int level_stride = 4);

std::vector<Barrier> build_family(const BarrierContext& ctx, const std::vector<std::pair<int, int>>& anchors,
                                  double epsilon, BarrierKind kind, int jobs = 1);

/// Pointwise sup (inf) of the family over every node and level; throws ParameterError for an empty family.
GridField perron_family_sup(const std::vector<Barrier>& family, std::shared_ptr<const CylinderGrid> grid,
                            int jobs = 1);
GridField perron_family_inf(const std::vector<Barrier>& family, std::shared_ptr<const CylinderGrid> grid,
                            int jobs = 1);

nlohmann::json barrier_catalog(const std::vector<Barrier>& family);

}  // namespace iplab
