#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>

#include "cogmpr/errors.hpp"
#include "cogmpr/rng.hpp"

namespace cogmpr {

/// Transmitters of the two-pair network.
enum class Tx { primary = 0, secondary = 1 };

/// Receivers (one destination per transmitter).
enum class Rx { primary_dest = 0, secondary_dest = 1 };

inline std::string_view tx_name(Tx t) {
    return t == Tx::primary ? "P" : "S";
}

inline std::string_view rx_name(Rx r) {
    return r == Rx::primary_dest ? "DP" : "DS";
}

inline Tx parse_tx(std::string_view name) {
    if (name == "P") return Tx::primary;
    if (name == "S") return Tx::secondary;
    throw ParameterError("unknown transmitter '" + std::string(name) + "' (expected P or S)");
}

inline Rx parse_rx(std::string_view name) {
    if (name == "DP") return Rx::primary_dest;
    if (name == "DS") return Rx::secondary_dest;
    throw ParameterError("unknown receiver '" + std::string(name) + "' (expected DP or DS)");
}

/// Value per transmitter-receiver link.
template <typename T>
struct LinkTable {
    std::array<T, 4> values{};

    static constexpr std::size_t index(Tx t, Rx r) {
        return static_cast<std::size_t>(t) * 2 + static_cast<std::size_t>(r);
    }

    T& operator()(Tx t, Rx r) { return values[index(t, r)]; }
    const T& operator()(Tx t, Rx r) const { return values[index(t, r)]; }
};

/// Set of transmitters active in a slot.
struct TxSet {
    bool primary = false;
    bool secondary = false;

    constexpr bool contains(Tx t) const {
        return t == Tx::primary ? primary : secondary;
    }

    static constexpr TxSet solo(Tx t) {
        return t == Tx::primary ? TxSet{true, false} : TxSet{false, true};
    }

    static constexpr TxSet both() { return {true, true}; }
};

/// g(i,j) for a link: transmit power scaled by power-law path loss.
inline double received_power_factor(double tx_power, double distance, double pathloss_exponent) {
    return tx_power * std::pow(distance, -pathloss_exponent);
}

/// Channel description under Rayleigh fading. The instantaneous power
/// received at j from i is A(i,j) * g(i,j), with A(i,j) exponential of mean
/// fading_mean(i,j) and g(i,j) either computed from geometry or given
/// directly. Reception succeeds when the SINR at j clears sinr_threshold(j).
class PhyScenario {
public:
    struct Geometry {
        double pathloss_exponent = 4.0;
        std::array<double, 2> tx_power{1.0, 1.0}; // indexed by Tx
        LinkTable<double> distance;
    };

    static PhyScenario from_geometry(const Geometry& geo,
                                     const LinkTable<double>& fading_mean,
                                     const std::array<double, 2>& noise,
                                     const std::array<double, 2>& sinr_threshold) {
        if (!(geo.pathloss_exponent > 2))
            throw ParameterError("pathloss_exponent must be > 2, got " + std::to_string(geo.pathloss_exponent));
        for (Tx t : {Tx::primary, Tx::secondary}) {
            if (!(geo.tx_power[static_cast<std::size_t>(t)] > 0))
                throw ParameterError("tx_power(" + std::string(tx_name(t)) + ") must be > 0");
            for (Rx r : {Rx::primary_dest, Rx::secondary_dest})
                if (!(geo.distance(t, r) > 0))
                    throw ParameterError("distance(" + std::string(tx_name(t)) + "," +
                                         std::string(rx_name(r)) + ") must be > 0");
        }
        LinkTable<double> gain;
        for (Tx t : {Tx::primary, Tx::secondary})
            for (Rx r : {Rx::primary_dest, Rx::secondary_dest})
                gain(t, r) = received_power_factor(geo.tx_power[static_cast<std::size_t>(t)],
                                                   geo.distance(t, r), geo.pathloss_exponent);
        return from_gains(gain, fading_mean, noise, sinr_threshold);
    }

    static PhyScenario from_gains(const LinkTable<double>& gain,
                                  const LinkTable<double>& fading_mean,
                                  const std::array<double, 2>& noise,
                                  const std::array<double, 2>& sinr_threshold) {
        PhyScenario sc;
        sc.gain_ = gain;
        sc.fading_mean_ = fading_mean;
        sc.noise_ = noise;
        sc.sinr_threshold_ = sinr_threshold;
        for (Tx t : {Tx::primary, Tx::secondary})
            for (Rx r : {Rx::primary_dest, Rx::secondary_dest}) {
                std::string link = std::string(tx_name(t)) + "," + std::string(rx_name(r));
                if (!(sc.gain_(t, r) > 0))
                    throw ParameterError("gain(" + link + ") must be > 0");
                if (!(sc.fading_mean_(t, r) > 0))
                    throw ParameterError("fading_mean(" + link + ") must be > 0");
            }
        for (Rx r : {Rx::primary_dest, Rx::secondary_dest}) {
            if (!(sc.noise(r) >= 0))
                throw ParameterError("noise(" + std::string(rx_name(r)) + ") must be >= 0");
            if (!(sc.sinr_threshold(r) > 0))
                throw ParameterError("sinr_threshold(" + std::string(rx_name(r)) + ") must be > 0");
        }
        return sc;
    }

    double gain(Tx t, Rx r) const { return gain_(t, r); }
    double fading_mean(Tx t, Rx r) const { return fading_mean_(t, r); }
    double noise(Rx r) const { return noise_[static_cast<std::size_t>(r)]; }
    double sinr_threshold(Rx r) const { return sinr_threshold_[static_cast<std::size_t>(r)]; }

private:
    PhyScenario() = default;

    LinkTable<double> gain_;
    LinkTable<double> fading_mean_;
    std::array<double, 2> noise_{};
    std::array<double, 2> sinr_threshold_{};
};

/// Probability that receiver `rx` decodes transmitter `tx` while the set
/// `active` is on air. Exponential fading makes this closed form: a noise
/// factor exp(-gamma * eta / (v g)) times one attenuation factor
/// 1 / (1 + gamma * v_k g_k / (v g)) per interferer k.
inline double success_probability(const PhyScenario& sc, Tx tx, TxSet active, Rx rx) {
    if (!active.contains(tx))
        throw ParameterError("success_probability: transmitter " + std::string(tx_name(tx)) +
                             " is not in the active set");
    const double vg = sc.fading_mean(tx, rx) * sc.gain(tx, rx);
    const double gamma = sc.sinr_threshold(rx);
    double p = std::exp(-gamma * sc.noise(rx) / vg);
    for (Tx k : {Tx::primary, Tx::secondary}) {
        if (k == tx || !active.contains(k)) continue;
        const double vg_k = sc.fading_mean(k, rx) * sc.gain(k, rx);
        p /= 1.0 + gamma * vg_k / vg;
    }
    return p;
}

/// The four link success probabilities the protocol layer consumes.
struct LinkSuccessProfile {
    double primary_solo = 0.0;    ///< primary to its destination, transmitting alone
    double primary_joint = 0.0;   ///< primary to its destination, both on air
    double secondary_solo = 0.0;  ///< secondary to its destination, alone
    double secondary_joint = 0.0; ///< secondary to its destination, both on air

    void validate() const {
        auto in_unit = [](double p, const char* name) {
            if (!(p >= 0.0 && p <= 1.0))
                throw ParameterError(std::string(name) + " must be in [0, 1], got " + std::to_string(p));
        };
        in_unit(primary_solo, "primary_solo");
        in_unit(primary_joint, "primary_joint");
        in_unit(secondary_solo, "secondary_solo");
        in_unit(secondary_joint, "secondary_joint");
        if (primary_joint > primary_solo)
            throw ParameterError("primary_joint exceeds primary_solo; interference cannot help");
        if (secondary_joint > secondary_solo)
            throw ParameterError("secondary_joint exceeds secondary_solo; interference cannot help");
    }
};

/// Evaluate the four protocol-facing probabilities of a scenario.
inline LinkSuccessProfile derive_link_profile(const PhyScenario& sc) {
    LinkSuccessProfile p;
    p.primary_solo = success_probability(sc, Tx::primary, TxSet::solo(Tx::primary), Rx::primary_dest);
    p.primary_joint = success_probability(sc, Tx::primary, TxSet::both(), Rx::primary_dest);
    p.secondary_solo = success_probability(sc, Tx::secondary, TxSet::solo(Tx::secondary), Rx::secondary_dest);
    p.secondary_joint = success_probability(sc, Tx::secondary, TxSet::both(), Rx::secondary_dest);
    return p;
}

struct McEstimate {
    double probability = 0.0;
    double std_error = 0.0;
    std::uint64_t samples = 0;
};

/// Monte Carlo check of success_probability. Fading draws are taken in a
/// fixed transmitter order (primary first), so results depend only on the
/// seed. The standard error is the usual binomial one.
inline McEstimate mc_success_estimate(const PhyScenario& sc, Tx tx, TxSet active, Rx rx,
                                      std::uint64_t samples, std::uint64_t seed) {
    if (!active.contains(tx))
        throw ParameterError("mc_success_estimate: transmitter " + std::string(tx_name(tx)) +
                             " is not in the active set");
    if (samples == 0)
        throw ParameterError("mc_success_estimate: samples must be > 0");
    Sampler rng(seed);
    const double gamma = sc.sinr_threshold(rx);
    const double eta = sc.noise(rx);
    std::uint64_t hits = 0;
    for (std::uint64_t n = 0; n < samples; ++n) {
        double signal = 0.0;
        double interference = 0.0;
        for (Tx k : {Tx::primary, Tx::secondary}) {
            if (!active.contains(k)) continue;
            const double power = rng.exponential(sc.fading_mean(k, rx)) * sc.gain(k, rx);
            if (k == tx)
                signal = power;
            else
                interference += power;
        }
        if (signal >= gamma * (eta + interference)) ++hits;
    }
    McEstimate est;
    est.samples = samples;
    est.probability = static_cast<double>(hits) / static_cast<double>(samples);
    est.std_error = std::sqrt(est.probability * (1.0 - est.probability) / static_cast<double>(samples));
    return est;
}

} // namespace cogmpr
