#pragma once

#include <functional>
#include <iosfwd>

namespace iplab {

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    long evaluations = 0;
};

/// Adaptive Simpson on [a, b]; throws NumericalError when a non-finite value appears
/// or the depth budget runs out before the tolerance is met.
QuadratureResult adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                                  int max_depth = 60);

constexpr double kQuadratureTol = 1e-10;
constexpr double kInversionTol = 1e-12;

/// F(q) = integral over [q, 1] of (1 - s^4)^(-1/4) ds, for q in [0, 1].
/// F(0) = pi*sqrt(2)/4; F is strictly decreasing with F(1) = 0.
double decay_integral(double q, double tol = kQuadratureTol);

/// G(u; delta) = integral over [delta, u] of (s^4 - delta^4)^(-1/4) ds, for u >= delta > 0.
double growth_integral(double u, double delta, double tol = kQuadratureTol);

/// Inverse of F on [0, F(0)] by bisection.
double decay_integral_inverse(double z, double tol = kInversionTol);
/// Inverse of G(.; delta) by bisection over a bracket grown geometrically.
double growth_integral_inverse(double z, double delta, double tol = kInversionTol);

/// Principal eigenvalue (F(0)/R)^4 of the ball of radius R.
double ball_eigenvalue(double R);

/// Value of F(0) = pi*sqrt(2)/4.
double decay_integral_at_zero();

enum class ProfileKind { decaying, growing };

/// Radial solution on [0, R] of (u')^2 u'' + lambda u^3 = 0 (decaying, u' <= 0)
/// or (u')^2 u'' - lambda u^3 = 0 (growing, u' >= 0), with u(0) = center and u(R) = edge.
struct RadialProfile {
    ProfileKind kind = ProfileKind::decaying;
    double lambda = 0.0;
    double radius = 0.0;
    double center = 0.0;
    double edge = 0.0;

    /// Fast evaluation through precomputed universal profiles.
    double value(double r) const;
    /// Reference evaluation by direct quadrature and bisection.
    double value_by_bisection(double r) const;
    /// u' from the first integral: -lambda^(1/4) (center^4 - u^4)^(1/4), resp. lambda^(1/4) (u^4 - center^4)^(1/4).
    double slope(double r) const;
    double slope_at_value(double u) const;
    /// u'' obtained by differentiating the slope formula.
    double curvature(double r) const;
    double curvature_at_value(double u) const;
    /// Signed spatial eigenvalue: Delta_inf u + lambda_s u^3 = 0, lambda_s = +lambda or -lambda.
    double signed_lambda() const { return kind == ProfileKind::decaying ? lambda : -lambda; }

    void write_csv(std::ostream& os, int samples) const;
};

enum class Pin { center, edge };

/// Decaying profile on [0, R]: with Pin::center the value u(0) is fixed (lambda <= lambda_B(R));
/// with Pin::edge the value u(R) > 0 is fixed (lambda < lambda_B(R)).
RadialProfile decaying_profile(double R, double lambda, double value, Pin pin);
/// Principal eigenfunction of the ball of radius R with u(0) = m.
RadialProfile eigen_profile(double R, double m);
/// Growing profile on [0, R] with u(0) = delta.
RadialProfile growing_profile(double R, double lambda, double delta);

/// dm/dlambda for the decaying family with fixed edge value delta.
double dm_dlambda(double R, double lambda, double delta);

/// Lower bound delta*(lambda/(lambda_B - lambda))^(1/3) on the center value of the decaying profile.
double decaying_center_lower_bound(double R, double lambda, double delta);

/// Ratio 2/15^(1/4) between the two logarithmic growth estimates.
double growth_sigma();
/// Integral over [1, 2] of (s^4 - 1)^(-1/4) ds.
double growth_split_constant();

struct GrowthBounds {
    double lower = 0.0;
    double value = 0.0;
    double upper = 0.0;
    bool applicable = false;  // u(R) >= 2 delta, the range where the estimates are derived
    bool strict = false;
};

/// Two-sided exponential estimate of the growing profile value u(R); throws ParameterError
/// when u(R) < 2 delta.
GrowthBounds growth_bounds(double lambda, double delta, double R);

}  // namespace iplab
