#pragma once

#include <string>
#include <vector>

#include "iplab/domain_grid.hpp"
#include "json.hpp"

namespace iplab {

struct CatalogParameter {
    std::string name;
    std::string doc;
    nlohmann::json default_value;
};

/// Built-in boundary data generator.
struct CatalogEntry {
    std::string name;
    std::string summary;
    std::vector<CatalogParameter> parameters;
    /// false when the data vanishes somewhere on P_T (the solver must then run on phi).
    bool positive = true;
    bool needs_ball = false;
};

const std::vector<CatalogEntry>& data_catalog();
const CatalogEntry& catalog_entry(const std::string& name);

/// Human-readable listing with parameter docs and defaults.
std::string catalog_listing();

/// A catalog entry with every parameter filled in (defaults included).
struct DataSpec {
    std::string entry = "constant";
    nlohmann::json params = nlohmann::json::object();

    nlohmann::json to_json() const { return {{"entry", entry}, {"params", params}}; }
    /// Throws ConfigurationError naming the offending JSON pointer.
    static DataSpec from_json(const nlohmann::json& j, const std::string& pointer = "/data");
};

/// Instantiates the data on a domain; throws ConfigurationError for a ball-only entry on another domain.
BoundaryData make_data(const DataSpec& spec, const Domain& domain);

}  // namespace iplab
