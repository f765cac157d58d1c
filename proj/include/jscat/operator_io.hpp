#pragma once

// Operator specification files { "support": N0, "a": [[n, v], ...], "b": [[n, v], ...] }
// and seeded random compact perturbations.

#include <cstdint>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "jscat/error.hpp"
#include "jscat/lattice.hpp"

namespace jscat {

namespace detail {

inline std::map<int, double> read_entries(const nlohmann::json& j, const char* key) {
    std::map<int, double> out;
    if (!j.contains(key)) return out;
    const auto& list = j.at(key);
    if (!list.is_array()) throw ConfigError(std::string("operator field '") + key + "' must be an array of [n, value] pairs");
    for (const auto& entry : list) {
        if (!entry.is_array() || entry.size() != 2 || !entry[0].is_number_integer() || !entry[1].is_number())
            throw ConfigError(std::string("operator field '") + key + "' must hold [integer, number] pairs");
        const int n = entry[0].get<int>();
        if (out.count(n)) throw ConfigError(std::string("duplicate ") + key + "(" + std::to_string(n) + ")");
        out[n] = entry[1].get<double>();
    }
    return out;
}

} // namespace detail

inline JacobiOperator operator_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("operator spec must be a JSON object");
    if (!j.contains("support") || !j.at("support").is_number_integer())
        throw ConfigError("operator spec needs an integer 'support'");
    return JacobiOperator(j.at("support").get<int>(), detail::read_entries(j, "a"), detail::read_entries(j, "b"));
}

inline nlohmann::json operator_to_json(const JacobiOperator& op) {
    nlohmann::json j;
    j["support"] = op.support_radius();
    j["a"] = nlohmann::json::array();
    j["b"] = nlohmann::json::array();
    for (const auto& [n, v] : op.a_perturbation()) j["a"].push_back({n, v});
    for (const auto& [n, v] : op.b_perturbation()) j["b"].push_back({n, v});
    return j;
}

inline nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("malformed JSON in '" + path + "': " + e.what());
    }
}

inline JacobiOperator load_operator(const std::string& path) { return operator_from_json(read_json_file(path)); }

/// a(n) = 1/2 + u, b(n) = v with u, v uniform in [-amplitude, amplitude] for |n| <= support.
/// Deterministic for a given seed (mt19937_64, values drawn in site order).
inline JacobiOperator random_compact_operator(std::uint64_t seed, int support, double amplitude) {
    if (support < 0) throw ConfigError("support radius must be nonnegative");
    if (!(amplitude >= 0.0) || amplitude >= 0.5) throw ConfigError("amplitude must lie in [0, 1/2)");
    std::mt19937_64 rng(seed);
    // Uniform draws from the raw 53-bit stream rather than std::uniform_real_distribution,
    // whose algorithm is implementation-defined.
    auto uniform = [&] {
        const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        return amplitude * (2.0 * unit - 1.0);
    };
    std::map<int, double> a, b;
    for (int n = -support; n <= support; ++n) {
        a[n] = 0.5 + uniform();
        b[n] = uniform();
    }
    return JacobiOperator(support, a, b);
}

} // namespace jscat
