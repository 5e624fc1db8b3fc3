#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

#include <json.hpp>

#include "cogmpr/errors.hpp"
#include "cogmpr/experiment.hpp"
#include "cogmpr/phy.hpp"
#include "cogmpr/presets.hpp"

namespace cogmpr {

namespace detail {

inline const nlohmann::json& require_field(const nlohmann::json& j, const char* key,
                                           const std::string& ctx) {
    if (!j.is_object())
        throw ParseError(ctx + ": expected an object");
    const auto it = j.find(key);
    if (it == j.end())
        throw ParseError(ctx + ": missing field '" + key + "'");
    return *it;
}

inline double number_field(const nlohmann::json& j, const char* key, const std::string& ctx) {
    const auto& v = require_field(j, key, ctx);
    if (!v.is_number())
        throw ParseError(ctx + "." + key + ": expected a number");
    return v.get<double>();
}

inline std::string string_field(const nlohmann::json& j, const char* key, const std::string& ctx) {
    const auto& v = require_field(j, key, ctx);
    if (!v.is_string())
        throw ParseError(ctx + "." + key + ": expected a string");
    return v.get<std::string>();
}

inline std::uint64_t uint_field(const nlohmann::json& j, const char* key, const std::string& ctx) {
    const auto& v = require_field(j, key, ctx);
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0))
        throw ParseError(ctx + "." + key + ": expected a non-negative integer");
    return v.get<std::uint64_t>();
}

/// {"P": {...}, "S": {...}} with receiver keys inside; unknown node names
/// are rejected by the name parsers.
inline LinkTable<double> link_table_from_json(const nlohmann::json& j, const std::string& ctx) {
    if (!j.is_object())
        throw ParseError(ctx + ": expected an object keyed by transmitter");
    for (const auto& [key, value] : j.items()) {
        (void)value;
        parse_tx(key);
    }
    LinkTable<double> t;
    for (Tx tx : {Tx::primary, Tx::secondary}) {
        const std::string row_ctx = ctx + "." + std::string(tx_name(tx));
        const auto& row = require_field(j, tx_name(tx).data(), ctx);
        if (!row.is_object())
            throw ParseError(row_ctx + ": expected an object keyed by receiver");
        for (const auto& [key, value] : row.items()) {
            (void)value;
            parse_rx(key);
        }
        for (Rx rx : {Rx::primary_dest, Rx::secondary_dest})
            t(tx, rx) = number_field(row, rx_name(rx).data(), row_ctx);
    }
    return t;
}

/// {"DP": x, "DS": y}
inline std::array<double, 2> rx_pair_from_json(const nlohmann::json& j, const std::string& ctx) {
    if (!j.is_object())
        throw ParseError(ctx + ": expected an object keyed by receiver");
    for (const auto& [key, value] : j.items()) {
        (void)value;
        parse_rx(key);
    }
    return {number_field(j, "DP", ctx), number_field(j, "DS", ctx)};
}

} // namespace detail

/// Parses a JSON file; syntax errors carry path, line and column.
inline nlohmann::json load_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ParseError(path + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " +
                         e.what());
    }
}

/// Channel description. Either geometry (pathloss_exponent, tx_power,
/// distance) or a direct gain table, plus fading_mean, noise and
/// sinr_threshold.
inline PhyScenario scenario_from_json(const nlohmann::json& j, const std::string& ctx = "scenario") {
    using detail::link_table_from_json;
    using detail::number_field;
    using detail::require_field;
    using detail::rx_pair_from_json;

    const LinkTable<double> fading =
        link_table_from_json(require_field(j, "fading_mean", ctx), ctx + ".fading_mean");
    const auto noise = rx_pair_from_json(require_field(j, "noise", ctx), ctx + ".noise");
    const auto thresholds =
        rx_pair_from_json(require_field(j, "sinr_threshold", ctx), ctx + ".sinr_threshold");

    if (j.contains("gain")) {
        if (j.contains("distance") || j.contains("tx_power") || j.contains("pathloss_exponent"))
            throw ParseError(ctx + ": give either 'gain' or the geometry fields, not both");
        return PhyScenario::from_gains(link_table_from_json(j["gain"], ctx + ".gain"), fading,
                                       noise, thresholds);
    }
    PhyScenario::Geometry geo;
    geo.pathloss_exponent = number_field(j, "pathloss_exponent", ctx);
    const auto& power = require_field(j, "tx_power", ctx);
    geo.tx_power = {number_field(power, "P", ctx + ".tx_power"),
                    number_field(power, "S", ctx + ".tx_power")};
    geo.distance = link_table_from_json(require_field(j, "distance", ctx), ctx + ".distance");
    return PhyScenario::from_geometry(geo, fading, noise, thresholds);
}

inline PhyScenario load_scenario(const std::string& path) {
    return scenario_from_json(load_json(path), path);
}

/// {"p11": .., "p112": .., "p22": .., "p212": ..}
inline LinkSuccessProfile profile_from_json(const nlohmann::json& j, const std::string& ctx) {
    LinkSuccessProfile p;
    p.primary_solo = detail::number_field(j, "p11", ctx);
    p.primary_joint = detail::number_field(j, "p112", ctx);
    p.secondary_solo = detail::number_field(j, "p22", ctx);
    p.secondary_joint = detail::number_field(j, "p212", ctx);
    p.validate();
    return p;
}

/// Experiment description; `base_dir` anchors relative scenario paths.
/// profile: preset name | inline probabilities | {"scenario": path}.
inline ExperimentSpec spec_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
    using detail::number_field;
    using detail::require_field;
    using detail::string_field;
    using detail::uint_field;

    ExperimentSpec spec;
    const auto& prof = require_field(j, "profile", "spec");
    if (prof.is_string()) {
        spec.profile = preset_profile(prof.get<std::string>());
    } else if (prof.is_object() && prof.contains("scenario")) {
        std::filesystem::path p = string_field(prof, "scenario", "spec.profile");
        if (p.is_relative()) p = base_dir / p;
        spec.profile = derive_link_profile(load_scenario(p.string()));
    } else {
        spec.profile = profile_from_json(prof, "spec.profile");
    }

    const auto& sw = require_field(j, "sweep", "spec");
    spec.sweep.var = parse_sweep_var(string_field(sw, "var", "spec.sweep"));
    spec.sweep.start = number_field(sw, "start", "spec.sweep");
    spec.sweep.stop = number_field(sw, "stop", "spec.sweep");
    spec.sweep.step = number_field(sw, "step", "spec.sweep");

    if (j.contains("lambda")) spec.arrival_rate = number_field(j, "lambda", "spec");
    if (j.contains("q")) spec.access_prob = number_field(j, "q", "spec");
    if (j.contains("M")) {
        const double m = number_field(j, "M", "spec");
        if (std::abs(m - std::round(m)) > 1e-9)
            throw ParseError("spec.M: expected an integer");
        spec.congestion_limit = static_cast<int>(std::llround(m));
    }

    if (j.contains("sim")) {
        const auto& sj = j["sim"];
        if (!sj.is_object()) throw ParseError("spec.sim: expected an object");
        SimSettings sim;
        if (sj.contains("slots")) sim.slots = uint_field(sj, "slots", "spec.sim");
        if (sj.contains("warmup")) sim.warmup = uint_field(sj, "warmup", "spec.sim");
        if (sj.contains("replications"))
            sim.replications = static_cast<std::uint32_t>(uint_field(sj, "replications", "spec.sim"));
        if (sj.contains("seed")) sim.seed = uint_field(sj, "seed", "spec.sim");
        spec.sim = sim;
    }
    if (j.contains("out")) {
        std::filesystem::path p = string_field(j, "out", "spec");
        if (p.is_relative()) p = base_dir / p;
        spec.out_path = p.string();
    }
    spec.validate();
    return spec;
}

inline ExperimentSpec load_spec(const std::string& path) {
    const auto dir = std::filesystem::path(path).parent_path();
    return spec_from_json(load_json(path), dir.empty() ? std::filesystem::path(".") : dir);
}

} // namespace cogmpr
