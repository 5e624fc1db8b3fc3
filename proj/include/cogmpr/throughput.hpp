#pragma once

#include <optional>

#include "cogmpr/queue_chain.hpp"

namespace cogmpr {

/// Throughputs in packets per slot. Analytical values exist only for stable
/// parameters; unstable reports keep the optionals empty and leave the
/// saturated regime to the simulator.
struct ThroughputReport {
    ProtocolParams params;
    ServiceRates rates;
    bool stable = false;
    std::optional<double> t_primary;   ///< equals the arrival rate when stable
    std::optional<double> t_secondary;
    std::optional<double> t_aggregate; ///< t_primary + t_secondary
    std::optional<double> idle_term;   ///< empty-queue share of t_secondary
    std::optional<double> band_term;   ///< contended-band share of t_secondary
};

/// Long-run secondary throughput: the secondary delivers through empty slots
/// at its solo rate and through contended-band slots at rate q times its
/// joint rate.
inline double secondary_throughput(const ProtocolParams& params, const ServiceRates& rates,
                                   const LinkSuccessProfile& profile) {
    profile.validate();
    const QueueDistribution dist = stationary_distribution(params, rates);
    return dist.p_empty * profile.secondary_solo +
           dist.p_band * params.access_prob * profile.secondary_joint;
}

/// Full report; never throws on unstable input, it reports stable=false.
inline ThroughputReport aggregate_throughput(const ProtocolParams& params, const ServiceRates& rates,
                                             const LinkSuccessProfile& profile) {
    profile.validate();
    ThroughputReport rep;
    rep.params = params;
    rep.rates = rates;
    rep.stable = is_stable(params, rates);
    if (!rep.stable) return rep;
    const QueueDistribution dist = stationary_distribution(params, rates);
    rep.idle_term = dist.p_empty * profile.secondary_solo;
    rep.band_term = dist.p_band * params.access_prob * profile.secondary_joint;
    rep.t_secondary = *rep.idle_term + *rep.band_term;
    rep.t_primary = params.arrival_rate;
    rep.t_aggregate = *rep.t_primary + *rep.t_secondary;
    return rep;
}

} // namespace cogmpr
