#pragma once

#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "iplab/domain_grid.hpp"
#include "iplab/quadrature_radial.hpp"

namespace iplab {

/// Pointwise residual of a sampled field at interior nodes and levels 1..levels-2,
/// with a band that bounds the discretisation error of the residual evaluation itself.
struct ResidualReport {
    std::vector<double> values;  // node-by-level layout of GridField; NaN where not evaluated
    double max_abs = 0.0;
    double band = 0.0;  // 10x the step-doubling truncation estimate, plus a rounding floor
    int worst_node = -1;
    int worst_level = -1;
    double h = 0.0;
    double dt = 0.0;

    double at(int nodes, int node, int level) const {
        return values[static_cast<std::size_t>(level) * nodes + node];
    }
};

/// Delta_inf phi - 3 phi^2 phi_t with centred differences.
ResidualReport residual_pi(const GridField& phi);
/// Delta_inf eta + sigma |D eta|^4 - 3 eta_t with centred differences.
ResidualReport residual_gamma(const GridField& eta, double sigma = 1.0);

/// eta = log phi; throws DataError when phi has a non-positive entry.
GridField to_log(const GridField& phi);
GridField from_log(const GridField& eta);

GridField sample_field(std::shared_ptr<const CylinderGrid> grid,
                       const std::function<double(std::span<const double>, double)>& fn);

enum class SolutionClass { exact, sub, super };

const char* to_string(SolutionClass c);

/// phi(x, t) = u(|x - c|) e^{k t} built on a radial profile centred at `center`.
struct SeparableSolution {
    RadialProfile profile;
    std::vector<double> center;
    double k = 0.0;
    SolutionClass classification = SolutionClass::exact;

    double value(std::span<const double> x, double t) const;
    /// Closed-form Pi residual: -u^3 e^{3kt} (lambda_s + 3k).
    double residual(std::span<const double> x, double t) const;
};

/// Exact when 3k = -lambda_s; 3k > -lambda_s gives a super-solution, 3k < -lambda_s a sub-solution.
SeparableSolution make_separable(const RadialProfile& profile, std::vector<double> center, double k);

/// Pi(u g) = -g^2 u^3 (lambda_s g + 3 g') for a spatial solution u with Delta_inf u + lambda_s u^3 = 0.
double separable_residual_identity(double u, double g, double g_prime, double lambda_s);

/// For |c| <= 1/3: first entry checks c^3 >= log(1+c) - (c - c^2/2) >= 0 (mirrored for c < 0),
/// second entry the same pattern for e^c - (1 + c + c^2/2).
std::pair<bool, bool> log_inequality_check(double c);

}  // namespace iplab
