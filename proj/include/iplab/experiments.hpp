#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "iplab/catalog.hpp"
#include "iplab/domain_grid.hpp"
#include "iplab/harness.hpp"
#include "iplab/solver.hpp"
#include "json.hpp"

namespace iplab {

const std::vector<std::string>& experiment_names();

nlohmann::json solver_config_to_json(const SolverConfig& c);
SolverConfig solver_config_from_json(const nlohmann::json& j, const std::string& pointer = "/solver");

/// Cylinder Omega x [0, T) with spacing h and `levels` stored time levels.
struct GridSpec {
    Domain domain = Domain::ball({0.0, 0.0}, 1.0);
    double h = 0.1;
    double T = 0.5;
    int levels = 10;
    int min_interior_per_axis = 3;

    std::shared_ptr<const CylinderGrid> build() const;
};

/// One run: which experiment, on which grid and data, with which solver and parameters.
/// `params` holds the experiment parameters with every default filled in.
struct ExperimentConfig {
    std::string experiment;
    std::uint64_t seed = 1;
    std::string output = "out";
    GridSpec grid;
    DataSpec data;
    SolverConfig solver;
    nlohmann::json params = nlohmann::json::object();

    nlohmann::json to_json() const;
    /// Validates everything (unknown fields included); throws ConfigurationError with a JSON pointer.
    static ExperimentConfig from_json(const nlohmann::json& j);
};

struct Artifact {
    std::string path;  // relative to the output directory
    std::string bytes;
};

struct ExperimentResult {
    std::vector<PropertyReport> reports;
    std::vector<Artifact> artifacts;

    /// Every non-vacuous report passes.
    bool all_pass() const;
    /// Appends the report and its reports/<id>.json artifact; ids are made unique.
    void add(PropertyReport report);
    void add(std::vector<PropertyReport> reports);
    void add_artifact(std::string path, std::string bytes);
};

/// Runs an experiment entirely in memory; nothing is written.
ExperimentResult run_experiment(const ExperimentConfig& config, int jobs = 1);

/// A report that passes exactly when `inner` fails: the harness's own sensitivity check.
PropertyReport negative_control(const PropertyReport& inner, const std::string& id);

// ---------------------------------------------------------------------------------------------
// Suites shared by the full-suite experiment and the acceptance run

/// `count` seeded random positive data solves; the second report corrupts one interior value per field.
std::vector<PropertyReport> suite_max_principle(const GridSpec& grid, int count, std::uint64_t seed,
                                                const SolverConfig& solver, int jobs);

/// Ordered random data solved as an ensemble, and (sub, super) barrier pairs built on `data`.
std::vector<PropertyReport> suite_comparison(const GridSpec& grid, const DataSpec& data, int solver_pairs,
                                             int barrier_pairs, double epsilon_fraction, std::uint64_t seed,
                                             const SolverConfig& solver, int jobs);

/// Audit of every sub and super family built on `data` at each epsilon fraction of M - m.
std::vector<PropertyReport> suite_barriers(const GridSpec& grid, const DataSpec& data,
                                           const std::vector<double>& epsilon_fractions, int region_samples,
                                           std::uint64_t seed, int jobs);

/// Constant data keeps its minimum; a synthetic field with a late interior minimum fails; the bump
/// instrument certifies that field; the bump satisfies its residual bound.
std::vector<PropertyReport> suite_min_propagation(int samples, std::uint64_t seed, const SolverConfig& solver);

/// f = (1 - r^2/R^2)(1 + x_0/(2R)) on the ball, g = 0: not an eigenfunction, not radial.
BoundaryData generic_zero_lateral_data(const Domain& ball);

/// Eigen data (two-sided) and generic data with zero lateral values (one-sided) on the ball.
std::vector<PropertyReport> suite_decay(const GridSpec& grid, const SolverConfig& solver, int jobs);

/// Decaying lateral data (the decaying-lateral catalog entry on a ball) against the staircase super-solution.
std::vector<PropertyReport> suite_staircase(const GridSpec& grid, const DataSpec& data, const SolverConfig& solver,
                                            double epsilon, int slabs, std::vector<Artifact>* artifacts = nullptr);

/// A seeded quadratic jet with mu = 2 improved by the bump, plus the vacuous super-solution case.
std::vector<PropertyReport> suite_bump_improvement(std::uint64_t seed);

/// Eigenvalue closed form and scaling, ODE residual of the profiles, fast inversion vs bisection.
std::vector<PropertyReport> suite_radial(double radius, std::vector<Artifact>* artifacts = nullptr);

/// lower < u(R) < upper at every radius.
PropertyReport growth_sandwich(double lambda, double delta, const std::vector<double>& radii,
                               std::vector<Artifact>* artifacts = nullptr);

}  // namespace iplab
