#include "iplab/catalog.hpp"

#include <cmath>
#include <sstream>

#include "iplab/errors.hpp"
#include "iplab/json_fields.hpp"
#include "iplab/quadrature_radial.hpp"

namespace iplab {

namespace {

using nlohmann::json;

std::vector<double> domain_center(const Domain& d) {
    if (d.kind == DomainKind::ball) return d.center;
    std::vector<double> c(d.dim);
    for (int i = 0; i < d.dim; ++i) c[i] = 0.5 * (d.lo[i] + d.hi[i]);
    return c;
}

double distance(std::span<const double> a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

const Domain& require_ball(const Domain& d, const std::string& entry) {
    if (d.kind != DomainKind::ball) throw ConfigurationError("config /data/entry: '" + entry + "' needs a ball domain");
    return d;
}

}  // namespace

const std::vector<CatalogEntry>& data_catalog() {
    static const std::vector<CatalogEntry> entries = {
        {"constant", "f = g = value", {{"value", "the constant (> 0)", 1.0}}, true, false},
        {"linear",
         "f = g = offset + <gradient, x>; gradient is padded with zeros to the dimension",
         {{"offset", "value at the origin", 1.0}, {"gradient", "array of slopes", json::array({0.5})}},
         true,
         false},
        {"gaussian-bump",
         "f = base + amplitude exp(-|x - center|^2 / width^2), g = f on the lateral boundary (constant in time)",
         {{"base", "value far from the bump (> 0)", 1.0},
          {"amplitude", "bump height (>= 0)", 1.0},
          {"width", "bump width (> 0)", 0.3},
          {"center", "bump center; null for the domain center", nullptr}},
         true,
         false},
        {"eigen-profile",
         "f = first ball eigenfunction with f(center) = center_value, g = 0; the solution is f(x) exp(-lambda_B t / 3)",
         {{"center_value", "value at the ball center (> 0)", 1.0}},
         false,
         true},
        {"growing-profile-trace",
         "f = psi, g = psi exp(lambda t / 3) for the growing profile psi with psi(center) = delta: the trace of "
         "an exact solution",
         {{"lambda", "profile eigenvalue (> 0)", 1.0}, {"delta", "value at the ball center (> 0)", 1.0}},
         true,
         true},
        {"decaying-lateral",
         "f = g0 (1 + amplitude (1 - |x - c|^2 / rho^2)_+^2) with rho = 0.35 diameter, g = g0 exp(-rate t); "
         "sup over the boundary of g(., t) is g0 exp(-rate t)",
         {{"rate", "lateral decay rate (> 0)", 1.0},
          {"g0", "lateral value at t = 0 (> 0)", 1.0},
          {"amplitude", "interior bump height (>= 0)", 1.0}},
         true,
         false},
    };
    return entries;
}

const CatalogEntry& catalog_entry(const std::string& name) {
    for (const auto& e : data_catalog())
        if (e.name == name) return e;
    throw ConfigurationError("config /data/entry: unknown catalog entry '" + name + "'");
}

std::string catalog_listing() {
    std::ostringstream os;
    for (const auto& e : data_catalog()) {
        os << e.name << (e.needs_ball ? "  [ball domains]" : "") << "\n    " << e.summary << "\n";
        for (const auto& p : e.parameters)
            os << "    " << p.name << " = " << p.default_value.dump() << "  -- " << p.doc << "\n";
    }
    return os.str();
}

DataSpec DataSpec::from_json(const nlohmann::json& j, const std::string& pointer) {
    JsonFields top(j, pointer);
    DataSpec spec;
    spec.entry = top.text("entry", "constant");
    const CatalogEntry& entry = catalog_entry(spec.entry);
    JsonFields params(top.member("params"), pointer + "/params");
    top.finish();
    spec.params = json::object();
    auto positive = [&](const std::string& key, double v, bool strict) {
        if (strict ? !(v > 0.0) : !(v >= 0.0))
            throw ConfigurationError("config " + params.pointer(key) + (strict ? ": must be > 0" : ": must be >= 0"));
        return v;
    };
    for (const auto& p : entry.parameters) {
        if (p.name == "gradient") {
            spec.params[p.name] = params.numbers(p.name, p.default_value.get<std::vector<double>>());
        } else if (p.name == "center") {
            spec.params[p.name] = params.has("center") ? json(params.numbers("center", {})) : json(nullptr);
            params.member("center");
        } else {
            double v = params.number(p.name, p.default_value.get<double>());
            bool strict = p.name != "amplitude" && p.name != "offset";
            if (p.name != "offset") positive(p.name, v, strict);
            spec.params[p.name] = v;
        }
    }
    params.finish();
    return spec;
}

BoundaryData make_data(const DataSpec& spec, const Domain& domain) {
    const CatalogEntry& entry = catalog_entry(spec.entry);
    const json& p = spec.params;
    BoundaryData data;
    data.name = spec.entry;
    auto num = [&](const char* key) {
        if (p.contains(key) && p[key].is_number()) return p[key].get<double>();
        for (const auto& q : entry.parameters)
            if (q.name == key) return q.default_value.get<double>();
        throw ConfigurationError(std::string("config /data/params/") + key + ": missing");
    };
    const int dim = domain.dim;

    if (spec.entry == "constant") {
        double c = num("value");
        data.initial = [c](std::span<const double>) { return c; };
        data.lateral = [c](std::span<const double>, double) { return c; };
    } else if (spec.entry == "linear") {
        double a = num("offset");
        std::vector<double> g = p.contains("gradient") ? p["gradient"].get<std::vector<double>>() : std::vector<double>{0.5};
        if (static_cast<int>(g.size()) > dim)
            throw ConfigurationError("config /data/params/gradient: more entries than the dimension");
        g.resize(dim, 0.0);
        data.initial = [a, g](std::span<const double> x) {
            double v = a;
            for (std::size_t i = 0; i < g.size(); ++i) v += g[i] * x[i];
            return v;
        };
        auto f = data.initial;
        data.lateral = [f](std::span<const double> x, double) { return f(x); };
    } else if (spec.entry == "gaussian-bump") {
        double base = num("base"), amp = num("amplitude"), w = num("width");
        std::vector<double> c = p.contains("center") && p["center"].is_array() ? p["center"].get<std::vector<double>>()
                                                                               : domain_center(domain);
        if (static_cast<int>(c.size()) != dim)
            throw ConfigurationError("config /data/params/center: dimension does not match the domain");
        data.initial = [base, amp, w, c](std::span<const double> x) {
            double r = distance(x, c);
            return base + amp * std::exp(-r * r / (w * w));
        };
        auto f = data.initial;
        data.lateral = [f](std::span<const double> x, double) { return f(x); };
    } else if (spec.entry == "eigen-profile") {
        const Domain& ball = require_ball(domain, spec.entry);
        RadialProfile u = eigen_profile(ball.radius, num("center_value"));
        std::vector<double> c = ball.center;
        double R = ball.radius;
        data.initial = [u, c, R](std::span<const double> x) { return u.value(std::min(distance(x, c), R)); };
        data.lateral = [](std::span<const double>, double) { return 0.0; };
        data.allow_corner_jump = true;
    } else if (spec.entry == "growing-profile-trace") {
        const Domain& ball = require_ball(domain, spec.entry);
        double lambda = num("lambda");
        RadialProfile psi = growing_profile(ball.radius, lambda, num("delta"));
        std::vector<double> c = ball.center;
        double R = ball.radius;
        data.initial = [psi, c, R](std::span<const double> x) { return psi.value(std::min(distance(x, c), R)); };
        data.lateral = [psi, c, R, lambda](std::span<const double> x, double t) {
            return psi.value(std::min(distance(x, c), R)) * std::exp(lambda * t / 3.0);
        };
    } else if (spec.entry == "decaying-lateral") {
        double rate = num("rate"), g0 = num("g0"), amp = num("amplitude");
        std::vector<double> c = domain_center(domain);
        double rho = 0.35 * domain.diameter();
        data.initial = [g0, amp, c, rho](std::span<const double> x) {
            double q = std::max(0.0, 1.0 - std::pow(distance(x, c) / rho, 2));
            return g0 * (1.0 + amp * q * q);
        };
        data.lateral = [g0, rate](std::span<const double>, double t) { return g0 * std::exp(-rate * t); };
    }
    return data;
}

}  // namespace iplab
