#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

namespace iplab {

/// Typed access to the members of one JSON object with defaults. Every error names the JSON
/// pointer of the offending member; finish() rejects members that were never read.
class JsonFields {
public:
    JsonFields(const nlohmann::json& object, std::string pointer);

    bool has(const std::string& key) const;
    double number(const std::string& key, double fallback);
    double number(const std::string& key);
    long integer(const std::string& key, long fallback);
    std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback);
    bool flag(const std::string& key, bool fallback);
    std::string text(const std::string& key, const std::string& fallback);
    std::string text(const std::string& key);
    std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback);
    /// The member itself (an empty object when absent).
    const nlohmann::json& member(const std::string& key);
    std::string pointer(const std::string& key) const { return pointer_ + "/" + key; }

    void finish() const;

private:
    const nlohmann::json& object_;
    std::string pointer_;
    std::set<std::string> used_;
};

}  // namespace iplab
