#include "iplab/json_fields.hpp"

#include <cmath>

#include "iplab/errors.hpp"

namespace iplab {

namespace {

const nlohmann::json& empty_object() {
    static const nlohmann::json e = nlohmann::json::object();
    return e;
}

}  // namespace

JsonFields::JsonFields(const nlohmann::json& object, std::string pointer)
    : object_(object.is_null() ? empty_object() : object), pointer_(std::move(pointer)) {
    if (!object_.is_object())
        throw ConfigurationError("config " + (pointer_.empty() ? std::string("/") : pointer_) +
                                 ": expected an object");
}

bool JsonFields::has(const std::string& key) const { return object_.contains(key) && !object_[key].is_null(); }

double JsonFields::number(const std::string& key, double fallback) {
    used_.insert(key);
    if (!has(key)) return fallback;
    const auto& v = object_[key];
    if (!v.is_number() || !std::isfinite(v.get<double>()))
        throw ConfigurationError("config " + pointer(key) + ": expected a finite number");
    return v.get<double>();
}

double JsonFields::number(const std::string& key) {
    if (!has(key)) throw ConfigurationError("config " + pointer(key) + ": required number is missing");
    return number(key, 0.0);
}

long JsonFields::integer(const std::string& key, long fallback) {
    used_.insert(key);
    if (!has(key)) return fallback;
    const auto& v = object_[key];
    if (!v.is_number_integer()) throw ConfigurationError("config " + pointer(key) + ": expected an integer");
    return v.get<long>();
}

std::uint64_t JsonFields::unsigned_integer(const std::string& key, std::uint64_t fallback) {
    used_.insert(key);
    if (!has(key)) return fallback;
    const auto& v = object_[key];
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
        throw ConfigurationError("config " + pointer(key) + ": expected a non-negative integer");
    return v.get<std::uint64_t>();
}

bool JsonFields::flag(const std::string& key, bool fallback) {
    used_.insert(key);
    if (!has(key)) return fallback;
    if (!object_[key].is_boolean()) throw ConfigurationError("config " + pointer(key) + ": expected true or false");
    return object_[key].get<bool>();
}

std::string JsonFields::text(const std::string& key, const std::string& fallback) {
    used_.insert(key);
    if (!has(key)) return fallback;
    if (!object_[key].is_string()) throw ConfigurationError("config " + pointer(key) + ": expected a string");
    return object_[key].get<std::string>();
}

std::string JsonFields::text(const std::string& key) {
    if (!has(key)) throw ConfigurationError("config " + pointer(key) + ": required string is missing");
    return text(key, "");
}

std::vector<double> JsonFields::numbers(const std::string& key, const std::vector<double>& fallback) {
    used_.insert(key);
    if (!has(key)) return fallback;
    const auto& v = object_[key];
    if (!v.is_array()) throw ConfigurationError("config " + pointer(key) + ": expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number() || !std::isfinite(v[i].get<double>()))
            throw ConfigurationError("config " + pointer(key) + "/" + std::to_string(i) + ": expected a finite number");
        out.push_back(v[i].get<double>());
    }
    return out;
}

const nlohmann::json& JsonFields::member(const std::string& key) {
    used_.insert(key);
    return has(key) ? object_[key] : empty_object();
}

void JsonFields::finish() const {
    for (const auto& [key, value] : object_.items())
        if (!used_.count(key)) throw ConfigurationError("config " + pointer(key) + ": unknown field");
}

}  // namespace iplab
