#include "iplab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include "iplab/barriers.hpp"
#include "iplab/errors.hpp"
#include "iplab/json_fields.hpp"
#include "iplab/parallel.hpp"
#include "iplab/quadrature_radial.hpp"
#include "iplab/transforms.hpp"

namespace iplab {

namespace {

using nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();

double distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

std::string csv_of(const GridField& f) {
    std::ostringstream os;
    f.write_csv(os);
    return os.str();
}

double value_band(const std::vector<const GridField*>& fields) {
    double band = 0.0;
    for (const auto* f : fields) band = std::max(band, rounding_band(*f));
    return band + 1e-12;
}

/// Folds `r` into `into` (worst violations, counts); details are collected under `part`.
void merge(PropertyReport& into, const PropertyReport& r, const json& part) {
    if (r.instances_run > 0) {
        into.worst_violation = into.instances_run == 0 ? r.worst_violation : std::max(into.worst_violation, r.worst_violation);
        into.instances_run += r.instances_run;
    }
    into.instances_skipped += r.instances_skipped;
    json d = part;
    d["worst_violation"] = r.worst_violation;
    d["instances_run"] = r.instances_run;
    into.details["parts"].push_back(d);
}

SolverConfig phi_solver() {
    SolverConfig c;
    c.variable = Variable::phi;
    c.update = TimeUpdate::local_implicit;
    c.stencil.directions = 32;
    c.stencil.radius_sqrt_scale = 0.5;
    c.stencil.boundary_fit = true;
    return c;
}

const Domain& require_ball(const Domain& d, const char* what) {
    if (d.kind != DomainKind::ball) throw ConfigurationError(std::string("config /grid/domain: ") + what + " needs a ball domain");
    return d;
}

}  // namespace

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names = {"decay",           "sandwich",      "comparison",
                                                   "radial-oracle",   "growth-bounds", "surrogate-unbounded",
                                                   "full-suite"};
    return names;
}

// ---------------------------------------------------------------------------------------------
// Configuration

json solver_config_to_json(const SolverConfig& c) {
    return {{"variable", to_string(c.variable)},
            {"update", to_string(c.update)},
            {"scheme", to_string(c.scheme)},
            {"radius_cells", c.stencil.radius_cells},
            {"radius_sqrt_scale", c.stencil.radius_sqrt_scale},
            {"directions", c.stencil.directions},
            {"boundary_fit", c.stencil.boundary_fit},
            {"cfl", c.cfl},
            {"positivity_floor", c.positivity_floor},
            {"min_levels", c.min_levels}};
}

SolverConfig solver_config_from_json(const json& j, const std::string& pointer) {
    JsonFields f(j, pointer);
    SolverConfig c;
    std::string var = f.text("variable", "eta");
    if (var == "eta") c.variable = Variable::eta;
    else if (var == "phi") c.variable = Variable::phi;
    else throw ConfigurationError("config " + f.pointer("variable") + ": expected 'eta' or 'phi'");
    std::string upd = f.text("update", c.variable == Variable::phi ? "local_implicit" : "explicit");
    if (upd == "explicit" || upd == "explicit_euler") c.update = TimeUpdate::explicit_euler;
    else if (upd == "local_implicit") c.update = TimeUpdate::local_implicit;
    else throw ConfigurationError("config " + f.pointer("update") + ": expected 'explicit' or 'local_implicit'");
    std::string sch = f.text("scheme", "monotone");
    if (sch == "monotone") c.scheme = Scheme::monotone;
    else if (sch == "centered") c.scheme = Scheme::centered;
    else throw ConfigurationError("config " + f.pointer("scheme") + ": expected 'monotone' or 'centered'");
    c.stencil.radius_cells = f.number("radius_cells", 1.0);
    if (c.stencil.radius_cells < 1.0) throw ConfigurationError("config " + f.pointer("radius_cells") + ": must be >= 1");
    c.stencil.radius_sqrt_scale = f.number("radius_sqrt_scale", 0.0);
    if (c.stencil.radius_sqrt_scale < 0.0)
        throw ConfigurationError("config " + f.pointer("radius_sqrt_scale") + ": must be >= 0");
    c.stencil.directions = static_cast<int>(f.integer("directions", 0));
    if (c.stencil.directions < 0) throw ConfigurationError("config " + f.pointer("directions") + ": must be >= 0");
    c.stencil.boundary_fit = f.flag("boundary_fit", false);
    c.cfl = f.number("cfl", 0.9);
    if (!(c.cfl > 0.0)) throw ConfigurationError("config " + f.pointer("cfl") + ": must be > 0");
    c.positivity_floor = f.number("positivity_floor", c.positivity_floor);
    c.min_levels = static_cast<int>(f.integer("min_levels", 1));
    if (c.min_levels < 1) throw ConfigurationError("config " + f.pointer("min_levels") + ": must be >= 1");
    f.finish();
    return c;
}

std::shared_ptr<const CylinderGrid> GridSpec::build() const {
    GridOptions opt;
    opt.min_interior_per_axis = min_interior_per_axis;
    return std::make_shared<const CylinderGrid>(build_grid(domain, h, T, levels, opt));
}

namespace {

json experiment_params(const std::string& name, const json& j) {
    JsonFields f(j, "/params");
    json p = json::object();
    auto positive_list = [&](const char* key, std::vector<double> def) {
        auto v = f.numbers(key, def);
        if (v.empty()) throw ConfigurationError("config " + f.pointer(key) + ": must not be empty");
        for (double x : v)
            if (!(x > 0.0)) throw ConfigurationError("config " + f.pointer(key) + ": entries must be > 0");
        return v;
    };
    auto count = [&](const char* key, long def, long lo) {
        long v = f.integer(key, def);
        if (v < lo) throw ConfigurationError("config " + f.pointer(key) + ": must be >= " + std::to_string(lo));
        return v;
    };
    auto positive = [&](const char* key, double def) {
        double v = f.number(key, def);
        if (!(v > 0.0)) throw ConfigurationError("config " + f.pointer(key) + ": must be > 0");
        return v;
    };
    if (name == "decay") {
        p["lambda"] = f.has("lambda") ? json(positive("lambda", 1.0)) : json(nullptr);
        f.member("lambda");
        p["fraction"] = positive("fraction", 0.1);
        p["staircase"] = f.flag("staircase", false);
        p["staircase_epsilon"] = positive("staircase_epsilon", 0.25);
        p["staircase_slabs"] = count("staircase_slabs", 5, 2);
    } else if (name == "sandwich") {
        p["epsilon_fractions"] = positive_list("epsilon_fractions", {0.1, 0.03, 0.01});
        p["level_stride"] = count("level_stride", 1, 1);
    } else if (name == "comparison") {
        p["solver_pairs"] = count("solver_pairs", 10, 0);
        p["barrier_pairs"] = count("barrier_pairs", 20, 0);
        p["epsilon_fraction"] = positive("epsilon_fraction", 0.1);
    } else if (name == "radial-oracle") {
        p["radius"] = positive("radius", 1.0);
    } else if (name == "growth-bounds") {
        p["lambda"] = positive("lambda", 1.0);
        p["delta"] = positive("delta", 1.0);
        p["radii"] = positive_list("radii", {5.0, 10.0, 20.0});
    } else if (name == "surrogate-unbounded") {
        p["radii"] = positive_list("radii", {2.0, 4.0, 8.0});
        p["cells_per_radius"] = positive("cells_per_radius", 16.0);
        double amp = f.number("amplitude", 1.0);
        if (amp < 0.0) throw ConfigurationError("config " + f.pointer("amplitude") + ": must be >= 0");
        p["amplitude"] = amp;
        p["width"] = positive("width", 0.5);
    } else if (name == "full-suite") {
        p["random_solves"] = count("random_solves", 30, 1);
        p["solver_pairs"] = count("solver_pairs", 10, 1);
        p["barrier_pairs"] = count("barrier_pairs", 20, 1);
        p["region_samples"] = count("region_samples", 20, 1);
        p["staircase"] = f.flag("staircase", true);
    }
    f.finish();
    return p;
}

}  // namespace

json ExperimentConfig::to_json() const {
    return {{"schema", "iplab.experiment/1"},
            {"experiment", experiment},
            {"seed", seed},
            {"output", output},
            {"grid",
             {{"domain", grid.domain.to_json()},
              {"h", grid.h},
              {"T", grid.T},
              {"levels", grid.levels},
              {"min_interior_per_axis", grid.min_interior_per_axis}}},
            {"data", data.to_json()},
            {"solver", solver_config_to_json(solver)},
            {"params", params}};
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
    JsonFields top(j, "");
    ExperimentConfig c;
    std::string schema = top.text("schema", "iplab.experiment/1");
    if (schema != "iplab.experiment/1")
        throw ConfigurationError("config /schema: unsupported schema '" + schema + "' (expected iplab.experiment/1)");
    c.experiment = top.text("experiment");
    const auto& names = experiment_names();
    if (std::find(names.begin(), names.end(), c.experiment) == names.end())
        throw ConfigurationError("config /experiment: unknown experiment '" + c.experiment + "'");
    c.seed = top.unsigned_integer("seed", 1);
    c.output = top.text("output", "out");

    {
        JsonFields g(top.member("grid"), "/grid");
        const json& dom = g.member("domain");
        if (!dom.empty()) {
            try {
                c.grid.domain = Domain::from_json(dom);
            } catch (const ConfigurationError& e) {
                throw ConfigurationError(std::string("config /grid/domain: ") + e.what());
            }
        }
        c.grid.h = g.number("h", c.grid.h);
        c.grid.T = g.number("T", c.grid.T);
        c.grid.levels = static_cast<int>(g.integer("levels", c.grid.levels));
        c.grid.min_interior_per_axis = static_cast<int>(g.integer("min_interior_per_axis", 3));
        if (!(c.grid.h > 0.0)) throw ConfigurationError("config /grid/h: must be > 0");
        if (!(c.grid.T > 0.0)) throw ConfigurationError("config /grid/T: must be > 0");
        if (c.grid.levels < 2) throw ConfigurationError("config /grid/levels: must be >= 2");
        g.finish();
    }
    c.data = DataSpec::from_json(top.member("data"), "/data");
    const CatalogEntry& entry = catalog_entry(c.data.entry);
    if (entry.needs_ball && c.grid.domain.kind != DomainKind::ball)
        throw ConfigurationError("config /data/entry: '" + c.data.entry + "' needs a ball domain");
    json solver = top.member("solver");
    if (solver.empty() && !entry.positive) solver = {{"variable", "phi"}};
    c.solver = solver_config_from_json(solver, "/solver");
    if (!entry.positive && c.solver.variable == Variable::eta)
        throw ConfigurationError("config /solver/variable: '" + c.data.entry +
                                 "' vanishes on the lateral boundary; the log variable needs positive data");
    c.params = experiment_params(c.experiment, top.member("params"));
    top.finish();

    // geometry errors surface here, before anything runs
    if (c.experiment != "radial-oracle" && c.experiment != "growth-bounds" && c.experiment != "full-suite" &&
        c.experiment != "surrogate-unbounded")
        c.grid.build();
    if (c.experiment == "decay" && c.params["lambda"].is_null()) require_ball(c.grid.domain, "decay without 'lambda'");
    if (c.experiment == "decay" && c.params["staircase"].get<bool>()) {
        require_ball(c.grid.domain, "the staircase");
        if (c.data.entry != "decaying-lateral")
            throw ConfigurationError("config /data/entry: the staircase needs 'decaying-lateral' data");
    }
    return c;
}

// ---------------------------------------------------------------------------------------------
// Results

bool ExperimentResult::all_pass() const {
    return std::all_of(reports.begin(), reports.end(), [](const PropertyReport& r) { return r.vacuous || r.pass; });
}

void ExperimentResult::add(PropertyReport report) {
    std::string id = report.property_id;
    for (int i = 2; std::any_of(reports.begin(), reports.end(), [&](const auto& r) { return r.property_id == id; }); ++i)
        id = report.property_id + "_" + std::to_string(i);
    report.property_id = id;
    std::string path = "reports/" + id + ".json";
    report.artifacts.push_back(path);
    add_artifact(path, report.to_json().dump(2) + "\n");
    reports.push_back(std::move(report));
}

void ExperimentResult::add(std::vector<PropertyReport> rs) {
    for (auto& r : rs) add(std::move(r));
}

void ExperimentResult::add_artifact(std::string path, std::string bytes) {
    artifacts.push_back({std::move(path), std::move(bytes)});
}

PropertyReport negative_control(const PropertyReport& inner, const std::string& id) {
    PropertyReport rep;
    rep.property_id = id;
    rep.tolerance = 0.0;
    // passes when the inner check reports a violation above its tolerance
    rep.record(inner.vacuous ? 1.0 : inner.tolerance - inner.worst_violation);
    rep.details = {{"inner", inner.to_json()}};
    rep.finish();
    return rep;
}

// ---------------------------------------------------------------------------------------------
// Suites

std::vector<PropertyReport> suite_max_principle(const GridSpec& spec, int count, std::uint64_t seed,
                                                const SolverConfig& solver, int jobs) {
    auto grid = spec.build();
    std::vector<GridField> fields(count);
    parallel_for(count, jobs, [&](std::size_t i) {
        fields[i] = solve(grid, random_positive_data(spec.domain, seed + i), solver).field;
    });
    std::vector<const GridField*> ptrs;
    for (const auto& f : fields) ptrs.push_back(&f);
    PropertyReport main = check_weak_max_principle(ptrs, value_band(ptrs));
    main.details["seed"] = seed;

    // corrupt one interior value above the boundary sup in every field
    std::vector<GridField> bad = fields;
    SeededGenerator rng(seed + 0x51ed);
    for (auto& f : bad) {
        double sup = -kInf;
        for (const auto& e : grid->parabolic_boundary()) sup = std::max(sup, f.at(e.node, e.level));
        int n = grid->interior[rng.below(static_cast<int>(grid->interior.size()))];
        int k = 1 + rng.below(grid->levels - 1);
        f.at(n, k) = sup + 0.1 * (1.0 + std::abs(sup));
    }
    std::vector<const GridField*> bad_ptrs;
    for (const auto& f : bad) bad_ptrs.push_back(&f);
    PropertyReport inner = check_weak_max_principle(bad_ptrs, value_band(bad_ptrs));
    return {main, negative_control(inner, "weak_max_principle_negative_control")};
}

std::vector<PropertyReport> suite_comparison(const GridSpec& spec, const DataSpec& data, int solver_pairs,
                                             int barrier_pairs, double epsilon_fraction, std::uint64_t seed,
                                             const SolverConfig& solver, int jobs) {
    auto grid = spec.build();
    std::vector<std::vector<SolveResult>> solved(solver_pairs);
    parallel_for(solver_pairs, jobs, [&](std::size_t i) {
        auto [lo, up] = random_ordered_data(spec.domain, seed + 1000 + i);
        solved[i] = solve_ensemble(grid, {lo, up}, solver);
    });
    std::vector<std::pair<const GridField*, const GridField*>> pairs;
    std::vector<const GridField*> all;
    for (const auto& s : solved) {
        pairs.push_back({&s[0].field, &s[1].field});
        all.push_back(&s[0].field);
        all.push_back(&s[1].field);
    }
    PropertyReport solver_rep = check_comparison(pairs, value_band(all));
    solver_rep.property_id = "comparison_solver_pairs";

    auto ctx = BarrierContext::make(grid, make_data(data, spec.domain));
    double span = ctx.M > ctx.m ? ctx.M - ctx.m : std::max(1.0, std::abs(ctx.M));
    double eps = epsilon_fraction * span;
    auto anchors = anchor_net(*grid, 1);
    SeededGenerator rng(seed + 0xc0de);
    std::vector<std::pair<std::size_t, std::size_t>> picks(barrier_pairs);
    for (auto& p : picks) p = {rng.below(static_cast<int>(anchors.size())), rng.below(static_cast<int>(anchors.size()))};
    std::vector<GridField> subs(barrier_pairs), sups(barrier_pairs);
    parallel_for(barrier_pairs, jobs, [&](std::size_t i) {
        auto [a, b] = picks[i];
        subs[i] = sample_barrier(make_barrier(ctx, anchors[a].first, anchors[a].second, eps, BarrierKind::sub), grid);
        sups[i] = sample_barrier(make_barrier(ctx, anchors[b].first, anchors[b].second, eps, BarrierKind::super), grid);
    });
    std::vector<std::pair<const GridField*, const GridField*>> bpairs;
    // a violation needs sup < sub, so the lower members bound every compared magnitude (the super
    // barriers themselves grow exponentially in t and would swamp the band)
    std::vector<const GridField*> lower;
    for (int i = 0; i < barrier_pairs; ++i) {
        bpairs.push_back({&subs[i], &sups[i]});
        lower.push_back(&subs[i]);
    }
    PropertyReport barrier_rep = check_comparison(bpairs, value_band(lower));
    barrier_rep.property_id = "comparison_barrier_pairs";
    barrier_rep.details["epsilon"] = eps;
    return {solver_rep, barrier_rep};
}

std::vector<PropertyReport> suite_barriers(const GridSpec& spec, const DataSpec& data,
                                           const std::vector<double>& epsilon_fractions, int region_samples,
                                           std::uint64_t seed, int jobs) {
    auto grid = spec.build();
    auto ctx = BarrierContext::make(grid, make_data(data, spec.domain));
    double span = ctx.M > ctx.m ? ctx.M - ctx.m : std::max(1.0, std::abs(ctx.M));
    auto anchors = anchor_net(*grid, 1);
    std::vector<PropertyReport> out(4);
    const char* ids[] = {"barrier_domination", "barrier_pin", "barrier_seams", "barrier_residual_sign"};
    for (int i = 0; i < 4; ++i) {
        out[i].property_id = ids[i];
        out[i].details["parts"] = json::array();
    }
    for (double frac : epsilon_fractions)
        for (auto kind : {BarrierKind::sub, BarrierKind::super}) {
            auto family = build_family(ctx, anchors, frac * span, kind, jobs);
            auto reps = audit_barriers(ctx, family, region_samples, seed);
            for (int i = 0; i < 4; ++i) {
                out[i].tolerance = reps[i].tolerance;
                merge(out[i], reps[i], {{"epsilon", frac * span}, {"kind", to_string(kind)}, {"family_size", family.size()}});
            }
        }
    for (auto& r : out) r.finish();
    return out;
}

std::vector<PropertyReport> suite_min_propagation(int samples, std::uint64_t seed, const SolverConfig& solver) {
    GridSpec spec;
    spec.T = 1.0;
    auto grid = spec.build();
    std::vector<PropertyReport> out;

    BoundaryData constant;
    constant.name = "constant";
    constant.initial = [](std::span<const double>) { return 1.5; };
    constant.lateral = [](std::span<const double>, double) { return 1.5; };
    GridField cfield = solve(grid, constant, solver).field;
    PropertyReport c = check_min_propagation(cfield, rounding_band(cfield) + 1e-12);
    c.property_id = "min_propagation_constant";
    out.push_back(c);

    // a field that reaches its boundary minimum in the interior at t = s but lies above it earlier
    const double m = 1.0, delta = 0.5, rho = 0.5;
    const int s_level = 6;
    const double s = grid->time(s_level);
    std::vector<double> center(2, 0.0);
    auto bump = [&](std::span<const double> x) {
        double q = std::max(0.0, 1.0 - std::pow(distance(x, center) / rho, 2));
        return q * q;
    };
    GridField synthetic = sample_field(grid, [&](std::span<const double> x, double t) {
        return m + delta * bump(x) * std::clamp((s - t) / (0.5 * s), 0.0, 1.0);
    });
    PropertyReport inner = check_min_propagation(synthetic, rounding_band(synthetic) + 1e-12);
    out.push_back(negative_control(inner, "min_propagation_negative_control"));

    // the strict sub-solution bump fits below the synthetic field on its parabolic boundary yet
    // rises above it at the anchor: the field cannot be a super-solution there
    MinmBump b = make_minm_bump(center, s, 0.5 * s, rho, 1.0, delta);
    int anchor = -1;
    for (int n : grid->interior)
        if (distance(grid->x(n), center) < 1e-12) anchor = n;
    PropertyReport inst;
    inst.property_id = "minm_instrument";
    inst.tolerance = 0.0;
    if (anchor >= 0) {
        MinmInstrument mi = minm_instrument(synthetic, anchor, s_level, b, m);
        inst.record(mi.fits && mi.anchor_excess > 0.0 ? -mi.anchor_excess : 1.0);
        inst.details = {{"fits", mi.fits}, {"anchor_excess", mi.anchor_excess}, {"bottom_level", mi.bottom_level}};
    }
    inst.finish();
    out.push_back(inst);
    out.push_back(check_minm_bump(b, samples, seed));
    return out;
}

BoundaryData generic_zero_lateral_data(const Domain& ball) {
    BoundaryData generic;
    generic.name = "generic-zero-lateral";
    std::vector<double> c = ball.center;
    double R = ball.radius;
    generic.initial = [c, R](std::span<const double> x) {
        double r = std::min(distance(x, c), R) / R;
        return (1.0 - r * r) * (1.0 + 0.5 * (x[0] - c[0]) / R);
    };
    generic.lateral = [](std::span<const double>, double) { return 0.0; };
    generic.allow_corner_jump = true;
    return generic;
}

std::vector<PropertyReport> suite_decay(const GridSpec& spec, const SolverConfig& solver, int jobs) {
    const Domain& ball = require_ball(spec.domain, "the decay suite");
    auto grid = spec.build();
    const double lambda = ball_eigenvalue(ball.radius);
    DataSpec eigen{"eigen-profile", {{"center_value", 1.0}}};
    std::vector<BoundaryData> data = {make_data(eigen, spec.domain), generic_zero_lateral_data(ball)};
    std::vector<GridField> fields(2);
    parallel_for(2, jobs, [&](std::size_t i) { fields[i] = solve(grid, data[i], solver).field; });
    return {check_decay_rate(fields[0], lambda, true), check_decay_rate(fields[1], lambda, false)};
}

std::vector<PropertyReport> suite_staircase(const GridSpec& spec, const DataSpec& data, const SolverConfig& solver,
                                            double epsilon, int slabs, std::vector<Artifact>* artifacts) {
    const Domain& ball = require_ball(spec.domain, "the staircase");
    if (data.entry != "decaying-lateral")
        throw ConfigurationError("config /data/entry: the staircase needs 'decaying-lateral' data");
    auto grid = spec.build();
    const double rate = data.params.value("rate", 1.0), g0 = data.params.value("g0", 1.0);
    auto lateral_sup = [rate, g0](double t) { return g0 * std::exp(-rate * t); };
    GridField phi = solve(grid, make_data(data, spec.domain), solver).field;

    PropertyReport rep;
    const double lambda_B = ball_eigenvalue(ball.radius);
    double T1 = make_staircase_sup(ball, lateral_sup, epsilon, 0.5 * lambda_B, 1).times.front();
    int level1 = -1;
    for (int k = 0; k < grid->levels && level1 < 0; ++k)
        if (grid->time(k) >= T1 - 1e-12) level1 = k;
    try {
        if (level1 < 0) throw ParameterError("staircase: T_1 lies beyond the stored levels");
        double lambda_bar = staircase_lambda(phi, level1, ball, epsilon);
        Staircase st = make_staircase_sup(ball, lateral_sup, epsilon, lambda_bar, slabs);
        rep = check_staircase(phi, st, rounding_band(phi) + 1e-12);
        rep.details["staircase"] = st.to_json();
    } catch (const ParameterError& e) {
        rep.property_id = "staircase_bound";
        rep.record(kInf);
        rep.details["error"] = e.what();
        rep.finish();
    }
    if (artifacts) {
        std::ostringstream os;
        os << "t,sup_phi,log_sup_phi\n";
        DecaySeries s = decay_series(phi);
        for (std::size_t i = 0; i < s.t.size(); ++i)
            os << format_double(s.t[i]) << ',' << format_double(s.sup[i]) << ',' << format_double(std::log(s.sup[i])) << '\n';
        artifacts->push_back({"fields/staircase_series.csv", os.str()});
    }
    return {rep};
}

std::vector<PropertyReport> suite_bump_improvement(std::uint64_t seed) {
    std::vector<PropertyReport> out;
    SeededGenerator rng(seed + 0xb0b);
    {
        GridSpec spec{Domain::box({-1.0, -1.0}, {1.0, 1.0}), 0.05, 1.0, 20, 3};
        auto grid = spec.build();
        // anchor: a node near the centre at a middle level
        std::vector<int> target = {20 + rng.below(7) - 3, 20 + rng.below(7) - 3};
        int anchor = grid->node_at(target);
        int level = 8 + rng.below(5);
        auto zx = grid->x(anchor);
        std::vector<double> z(zx.begin(), zx.end());
        double theta = grid->time(level);
        double angle = 2.0 * std::numbers::pi * rng.uniform();
        std::vector<double> p = {std::cos(angle), std::sin(angle)}, X = {2.0, 0.0, 0.0, 2.0};
        const double a = 0.0, k = 1.0, nu = 0.2;
        // w is the quadratic with exactly this jet, so mu = <X p, p> - 3 a k^2 = 2
        auto w = [=](std::span<const double> x, double t) {
            double lin = 0.0, quad = 0.0;
            for (int i = 0; i < 2; ++i) {
                lin += p[i] * (x[i] - z[i]);
                quad += (x[i] - z[i]) * (x[i] - z[i]);
            }
            return k + a * (t - theta) + lin + quad;
        };
        Exist13Bump probe = make_exist13_bump(z, theta, a, p, X, k, 0.01, nu);
        double r = std::min(probe.rho, 0.25);
        Exist13Bump bump = make_exist13_bump(z, theta, a, p, X, k, exist13_delta(0.1, r, nu), nu);
        r = std::min(r, bump.rho);
        PropertyReport rep = check_bump_improvement(grid, w, bump, r, anchor, level);
        rep.details["mu"] = bump.mu;
        out.push_back(rep);
    }
    {
        // a strict super-solution: the stationary first eigenfunction (Delta_inf u = -lambda u^3 < 0)
        GridSpec spec;
        auto grid = spec.build();
        RadialProfile u = eigen_profile(1.0, 1.0);
        auto fn = [u](std::span<const double> x, double) { return u.value(std::min(std::hypot(x[0], x[1]), 1.0)); };
        auto found = find_super_violation(fn, *grid, 1e-8);
        PropertyReport rep;
        rep.property_id = "bump_improvement_super_solution";
        if (found) {
            auto x = grid->x(found->node);
            auto& j = found->jet;
            std::vector<double> z(x.begin(), x.end());
            Exist13Bump bump = make_exist13_bump(z, grid->time(found->level), j.a, j.p, j.X, j.u, 0.01, 0.1);
            rep = check_bump_improvement(grid, fn, bump, std::min(bump.rho, 0.1), found->node, found->level);
            rep.property_id = "bump_improvement_super_solution";
        } else {
            rep.details["admissible_jets"] = 0;
            rep.finish();
        }
        out.push_back(rep);
    }
    return out;
}

std::vector<PropertyReport> suite_radial(double radius, std::vector<Artifact>* artifacts) {
    std::vector<PropertyReport> out;
    {
        PropertyReport r;
        r.property_id = "eigenvalue_closed_form";
        r.tolerance = 1e-8;
        const double exact = std::pow(std::numbers::pi, 4) / 64.0;
        r.record(std::abs(ball_eigenvalue(1.0) - exact) / exact);
        r.details = {{"lambda_B_1", ball_eigenvalue(1.0)}, {"closed_form", exact}};
        r.finish();
        out.push_back(r);
    }
    {
        PropertyReport r;
        r.property_id = "eigenvalue_scaling";
        r.tolerance = 1e-10;
        const double ref = ball_eigenvalue(1.0);
        for (double R : {0.5, 1.0, 2.0, 4.0}) r.record(std::abs(ball_eigenvalue(R) * std::pow(R, 4) - ref) / ref);
        r.finish();
        out.push_back(r);
    }
    const double lb = ball_eigenvalue(radius);
    std::vector<std::pair<std::string, RadialProfile>> profiles = {
        {"eigen", eigen_profile(radius, 1.0)},
        {"decaying", decaying_profile(radius, 0.5 * lb, 0.5, Pin::edge)},
        {"growing", growing_profile(radius, 1.0, 1.0)}};
    PropertyReport ode, inv;
    ode.property_id = "radial_ode_residual";
    ode.tolerance = 1e-6;
    inv.property_id = "radial_inversion";
    inv.tolerance = 1e-8;
    for (const auto& [name, p] : profiles) {
        double res = radial_ode_residual(p);
        ode.record(res);
        ode.details[name] = res;
        double worst = 0.0;
        for (int i = 0; i <= 50; ++i) {
            double r = radius * i / 50.0;
            worst = std::max(worst, std::abs(p.value(r) - p.value_by_bisection(r)));
        }
        inv.record(worst);
        inv.details[name] = worst;
        if (artifacts) {
            std::ostringstream os;
            p.write_csv(os, 200);
            artifacts->push_back({"fields/profile_" + name + ".csv", os.str()});
        }
    }
    ode.finish();
    inv.finish();
    out.push_back(ode);
    out.push_back(inv);
    return out;
}

PropertyReport growth_sandwich(double lambda, double delta, const std::vector<double>& radii,
                               std::vector<Artifact>* artifacts) {
    PropertyReport rep;
    rep.property_id = "growth_sandwich";
    // strict inequalities: a zero margin must fail
    rep.tolerance = -std::numeric_limits<double>::denorm_min();
    std::ostringstream os;
    os << "R,lower,value,upper\n";
    for (double R : radii) {
        GrowthBounds b = growth_bounds(lambda, delta, R);
        rep.record(std::max(b.lower - b.value, b.value - b.upper) / b.value);
        os << format_double(R) << ',' << format_double(b.lower) << ',' << format_double(b.value) << ','
           << format_double(b.upper) << '\n';
    }
    rep.details = {{"lambda", lambda}, {"delta", delta}, {"radii", radii}};
    rep.finish();
    if (artifacts) artifacts->push_back({"fields/growth_bounds.csv", os.str()});
    return rep;
}

// ---------------------------------------------------------------------------------------------
// Experiments

namespace {

void run_decay(const ExperimentConfig& c, ExperimentResult& out) {
    auto grid = c.grid.build();
    GridField phi = solve(grid, make_data(c.data, c.grid.domain), c.solver).field;
    double lambda = c.params["lambda"].is_null() ? ball_eigenvalue(c.grid.domain.radius) : c.params["lambda"].get<double>();
    out.add(check_decay_rate(phi, lambda, c.data.entry == "eigen-profile", c.params["fraction"].get<double>()));
    std::ostringstream os;
    os << "t,sup_phi,log_sup_phi\n";
    DecaySeries s = decay_series(phi);
    for (std::size_t i = 0; i < s.t.size(); ++i)
        os << format_double(s.t[i]) << ',' << format_double(s.sup[i]) << ',' << format_double(std::log(s.sup[i])) << '\n';
    out.add_artifact("fields/decay_series.csv", os.str());
    out.add_artifact("fields/phi.csv", csv_of(phi));
    if (c.params["staircase"].get<bool>())
        out.add(suite_staircase(c.grid, c.data, c.solver, c.params["staircase_epsilon"].get<double>(),
                                c.params["staircase_slabs"].get<int>(), &out.artifacts));
}

void run_sandwich(const ExperimentConfig& c, ExperimentResult& out, int jobs) {
    auto grid = c.grid.build();
    BoundaryData data = make_data(c.data, c.grid.domain);
    GridField phi = solve(grid, data, c.solver).field;
    auto ctx = BarrierContext::make(grid, data);
    double span = ctx.M > ctx.m ? ctx.M - ctx.m : std::max(1.0, std::abs(ctx.M));
    std::vector<double> eps;
    for (double f : c.params["epsilon_fractions"].get<std::vector<double>>()) eps.push_back(f * span);
    int stride = c.params["level_stride"].get<int>();
    out.add(check_sandwich(ctx, phi, eps, rounding_band(phi) + 1e-12, stride, jobs));
    out.add_artifact("fields/solution.csv", csv_of(phi));
    auto family = build_family(ctx, anchor_net(*grid, stride), eps.back(), BarrierKind::sub, jobs);
    out.add_artifact("fields/barrier_catalog.json", barrier_catalog(family).dump(2) + "\n");
}

void run_surrogate(const ExperimentConfig& c, ExperimentResult& out) {
    const double amp = c.params["amplitude"].get<double>(), w = c.params["width"].get<double>();
    SpaceFn f = [amp, w](std::span<const double> x) {
        double q = std::max(0.0, 1.0 - (x[0] * x[0] + x[1] * x[1]) / (w * w));
        return 1.0 + amp * q * q;
    };
    std::vector<SurrogateCase> cases;
    out.add(check_large_ball_surrogate(c.params["radii"].get<std::vector<double>>(), f, 1.0, 1.0 + amp,
                                       c.params["cells_per_radius"].get<double>(), c.grid.T, c.grid.levels, c.solver,
                                       &cases));
    std::ostringstream os;
    os << "R,tol,interior_min,interior_max,upper_barrier_gap,lower_barrier_gap\n";
    for (const auto& s : cases)
        os << format_double(s.R) << ',' << format_double(s.tol) << ',' << format_double(s.interior_min) << ','
           << format_double(s.interior_max) << ',' << format_double(s.upper_barrier_gap) << ','
           << format_double(s.lower_barrier_gap) << '\n';
    out.add_artifact("fields/surrogate.csv", os.str());
}

void run_full_suite(const ExperimentConfig& c, ExperimentResult& out, int jobs) {
    const auto& p = c.params;
    const std::uint64_t seed = c.seed;
    GridSpec small;  // unit disc, h = 0.1, T = 0.5, 10 levels
    SolverConfig fast;
    DataSpec bump{"gaussian-bump", {{"base", 1.0}, {"amplitude", 1.0}, {"width", 0.3}, {"center", nullptr}}};

    out.add(suite_radial(1.0, &out.artifacts));
    out.add(growth_sandwich(1.0, 1.0, {5.0, 10.0, 20.0}, &out.artifacts));
    out.add(suite_max_principle(small, p["random_solves"].get<int>(), seed, fast, jobs));
    out.add(suite_comparison(small, bump, p["solver_pairs"].get<int>(), p["barrier_pairs"].get<int>(), 0.1, seed, fast,
                             jobs));
    out.add(suite_barriers(small, bump, {0.1, 0.01}, p["region_samples"].get<int>(), seed, jobs));
    out.add(suite_min_propagation(1000, seed, fast));

    // the rate is asymptotic: generic data still carries faster modes well past t = 0.25
    GridSpec decay_grid{Domain::ball({0.0, 0.0}, 1.0), 0.025, 0.5, 40, 3};
    out.add(suite_decay(decay_grid, phi_solver(), jobs));
    if (p["staircase"].get<bool>()) {
        // five slabs reach T_5 ~ 23 for this data
        GridSpec long_grid{Domain::ball({0.0, 0.0}, 1.0), 0.1, 24.0, 480, 3};
        DataSpec lateral{"decaying-lateral", {{"rate", 1.0}, {"g0", 1.0}, {"amplitude", 1.0}}};
        out.add(suite_staircase(long_grid, lateral, fast, 0.25, 5, &out.artifacts));
    }

    {
        auto grid = small.build();
        BoundaryData data = make_data(bump, small.domain);
        GridField phi = solve(grid, data, fast).field;
        auto ctx = BarrierContext::make(grid, data);
        double span = ctx.M - ctx.m;
        out.add(check_sandwich(ctx, phi, {0.1 * span, 0.03 * span, 0.01 * span}, rounding_band(phi) + 1e-12, 1, jobs));
        out.add_artifact("fields/sandwich_solution.csv", csv_of(phi));
    }
    out.add(suite_bump_improvement(seed));
    {
        ExperimentConfig sc = c;
        sc.params = {{"radii", {2.0, 4.0, 8.0}}, {"cells_per_radius", 8.0}, {"amplitude", 1.0}, {"width", 0.5}};
        sc.grid.T = 0.5;
        sc.grid.levels = 5;
        sc.solver = fast;
        run_surrogate(sc, out);
    }
    out.add(check_log_inequalities(1000, seed));
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& c, int jobs) {
    ExperimentResult out;
    const std::string& e = c.experiment;
    if (e == "decay") {
        run_decay(c, out);
    } else if (e == "sandwich") {
        run_sandwich(c, out, jobs);
    } else if (e == "comparison") {
        out.add(suite_comparison(c.grid, c.data, c.params["solver_pairs"].get<int>(), c.params["barrier_pairs"].get<int>(),
                                 c.params["epsilon_fraction"].get<double>(), c.seed, c.solver, jobs));
    } else if (e == "radial-oracle") {
        out.add(suite_radial(c.params["radius"].get<double>(), &out.artifacts));
    } else if (e == "growth-bounds") {
        out.add(growth_sandwich(c.params["lambda"].get<double>(), c.params["delta"].get<double>(),
                                c.params["radii"].get<std::vector<double>>(), &out.artifacts));
    } else if (e == "surrogate-unbounded") {
        run_surrogate(c, out);
    } else if (e == "full-suite") {
        run_full_suite(c, out, jobs);
    }
    std::ostringstream summary;
    write_summary_csv(summary, out.reports);
    out.add_artifact("summary.csv", summary.str());
    std::sort(out.artifacts.begin(), out.artifacts.end(), [](const Artifact& a, const Artifact& b) { return a.path < b.path; });
    return out;
}

}  // namespace iplab
