#pragma once

#include <array>
#include <string>
#include <string_view>

#include "cogmpr/errors.hpp"
#include "cogmpr/phy.hpp"

namespace cogmpr {

/// Named link profiles covering the four corners of the design space:
/// strong/weak links crossed with strong/weak multipacket reception.
struct Preset {
    std::string_view name;
    LinkSuccessProfile profile;
    std::string_view note;
};

inline constexpr std::array<Preset, 4> kPresets{{
    {"fig3", {0.8, 0.6, 0.9, 0.7}, "strong links, mild interference"},
    {"fig4", {0.5, 0.3, 0.6, 0.35}, "weak links, mild interference"},
    {"fig5", {0.8, 0.3, 0.9, 0.4}, "strong links, harsh interference"},
    {"fig6", {0.5, 0.15, 0.6, 0.2}, "weak links, harsh interference"},
}};

inline const Preset* find_preset(std::string_view name) {
    for (const auto& p : kPresets)
        if (p.name == name) return &p;
    return nullptr;
}

inline LinkSuccessProfile preset_profile(std::string_view name) {
    if (const Preset* p = find_preset(name)) return p->profile;
    std::string known;
    for (const auto& p : kPresets) {
        if (!known.empty()) known += ", ";
        known += p.name;
    }
    throw ParameterError("unknown preset '" + std::string(name) + "' (known: " + known + ")");
}

} // namespace cogmpr
