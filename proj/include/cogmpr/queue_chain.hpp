#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "cogmpr/errors.hpp"
#include "cogmpr/phy.hpp"

namespace cogmpr {

/// Knobs of the congestion-aware access scheme.
struct ProtocolParams {
    double arrival_rate = 0.0; ///< packet arrival probability per slot, in [0, 1)
    double access_prob = 0.0;  ///< secondary access probability while 1 <= Q <= M
    int congestion_limit = 1;  ///< M; the secondary stays silent while Q > M

    void validate() const {
        if (!(arrival_rate >= 0.0 && arrival_rate < 1.0))
            throw ParameterError("arrival_rate must be in [0, 1), got " + std::to_string(arrival_rate));
        if (!(access_prob >= 0.0 && access_prob <= 1.0))
            throw ParameterError("access_prob must be in [0, 1], got " + std::to_string(access_prob));
        if (congestion_limit < 1)
            throw ParameterError("congestion_limit must be >= 1, got " + std::to_string(congestion_limit));
    }
};

/// Primary service probabilities in the two queue regimes.
struct ServiceRates {
    double mu_contended = 0.0; ///< while 1 <= Q <= M, secondary possibly on air
    double mu_exclusive = 0.0; ///< while Q > M, secondary silent

    void validate() const {
        if (!(mu_contended > 0.0 && mu_contended <= 1.0))
            throw ParameterError("mu_contended must be in (0, 1], got " + std::to_string(mu_contended));
        if (!(mu_exclusive > 0.0 && mu_exclusive <= 1.0))
            throw ParameterError("mu_exclusive must be in (0, 1], got " + std::to_string(mu_exclusive));
        if (mu_contended > mu_exclusive)
            throw ParameterError("mu_contended must not exceed mu_exclusive");
    }
};

/// Service rates induced by a link profile and the secondary's access
/// probability: with the queue in the contended band the primary faces
/// interference with probability q.
inline ServiceRates service_rates(const LinkSuccessProfile& profile, double access_prob) {
    profile.validate();
    if (!(access_prob >= 0.0 && access_prob <= 1.0))
        throw ParameterError("access_prob must be in [0, 1], got " + std::to_string(access_prob));
    if (profile.primary_solo == 0.0)
        throw DegenerateModelError("primary_solo is 0: the primary queue can never drain");
    ServiceRates r;
    // written as solo minus the access-weighted penalty so the result can
    // never round above primary_solo and is exact when the penalty is zero
    r.mu_contended =
        profile.primary_solo - access_prob * (profile.primary_solo - profile.primary_joint);
    r.mu_exclusive = profile.primary_solo;
    if (r.mu_contended == 0.0)
        throw DegenerateModelError("mu_contended is 0: the queue cannot drain below the congestion limit");
    return r;
}

/// The queue is stable iff the arrival rate is strictly below the service
/// rate of the silent-secondary regime.
inline bool is_stable(const ProtocolParams& params, const ServiceRates& rates) {
    params.validate();
    rates.validate();
    return params.arrival_rate < rates.mu_exclusive;
}

namespace detail {

/// Closed forms are avoided within this distance of their removable
/// singularity; the summation path serves those points.
inline constexpr double kClosedFormWindow = 1e-6;

/// Geometric ratio of successive band states: a = lam(1-mu1)/((1-lam)mu1).
inline double band_ratio(double arrival_rate, double mu_contended) {
    return arrival_rate * (1.0 - mu_contended) / ((1.0 - arrival_rate) * mu_contended);
}

/// Geometric ratio of successive tail states: b = lam(1-mu2)/((1-lam)mu2).
inline double tail_ratio(double arrival_rate, double mu_exclusive) {
    return arrival_rate * (1.0 - mu_exclusive) / ((1.0 - arrival_rate) * mu_exclusive);
}

/// x^m for x >= 0 without pow's libm spread; exact 0 for x = 0.
inline double pow_nonneg(double x, int m) {
    if (x == 0.0) return m == 0 ? 1.0 : 0.0;
    return std::exp(static_cast<double>(m) * std::log(x));
}

inline void require_stable(const ProtocolParams& params, const ServiceRates& rates) {
    if (!is_stable(params, rates))
        throw StabilityError("unstable: arrival_rate " + std::to_string(params.arrival_rate) +
                             " >= mu_exclusive " + std::to_string(rates.mu_exclusive));
}

} // namespace detail

/// Stationary law of the queue-length chain. The band holds states 1..M
/// explicitly; above M the law is geometric with ratio tail_ratio, starting
/// at tail_first = Pr(Q = M+1).
struct QueueDistribution {
    ProtocolParams params;
    ServiceRates rates;
    double p_empty = 0.0;
    std::vector<double> band; ///< Pr(Q = i) for i = 1..M
    double tail_first = 0.0;
    double tail_ratio = 0.0;
    double p_band = 0.0;  ///< Pr(1 <= Q <= M)
    double p_above = 0.0; ///< Pr(Q > M)

    double occupancy(int queue_size) const {
        if (queue_size < 0)
            throw ParameterError("occupancy: queue size must be >= 0");
        if (queue_size == 0) return p_empty;
        const int m = static_cast<int>(band.size());
        if (queue_size <= m) return band[static_cast<std::size_t>(queue_size) - 1];
        return tail_first * detail::pow_nonneg(tail_ratio, queue_size - m - 1);
    }
};

/// Solves the chain by the detailed-balance recursion plus the exact
/// geometric-tail sum. This path has no removable singularities and is the
/// authoritative one; the closed forms below cross-check it.
inline QueueDistribution stationary_distribution(const ProtocolParams& params, const ServiceRates& rates) {
    detail::require_stable(params, rates);
    const double lam = params.arrival_rate;
    const double mu1 = rates.mu_contended;
    const double mu2 = rates.mu_exclusive;
    const int m = params.congestion_limit;

    const double a = detail::band_ratio(lam, mu1);
    const double b = detail::tail_ratio(lam, mu2);

    // weights relative to pi(0); w[i-1] = Pr(Q=i)/Pr(Q=0)
    std::vector<double> w(static_cast<std::size_t>(m));
    double wi = lam / ((1.0 - lam) * mu1);
    double band_weight = 0.0;
    for (int i = 0; i < m; ++i) {
        w[static_cast<std::size_t>(i)] = wi;
        band_weight += wi;
        wi *= a;
    }
    // crossing the band boundary: up lam(1-mu1) against down (1-lam)mu2
    const double cross = lam * (1.0 - mu1) / ((1.0 - lam) * mu2);
    const double tail_first_weight = w.back() * cross;
    const double tail_weight = tail_first_weight / (1.0 - b);
    const double norm = 1.0 + band_weight + tail_weight;
    if (!std::isfinite(norm))
        throw NumericalError("stationary_distribution: normalization overflowed");

    QueueDistribution d;
    d.params = params;
    d.rates = rates;
    d.p_empty = 1.0 / norm;
    d.band.resize(static_cast<std::size_t>(m));
    double p_band = 0.0;
    for (int i = 0; i < m; ++i) {
        d.band[static_cast<std::size_t>(i)] = w[static_cast<std::size_t>(i)] * d.p_empty;
        p_band += d.band[static_cast<std::size_t>(i)];
    }
    d.p_band = p_band;
    d.tail_first = tail_first_weight * d.p_empty;
    d.tail_ratio = b;
    d.p_above = tail_weight * d.p_empty;
    return d;
}

/// Pr(Q = 0) by the closed form
///   (mu1-lam)(mu2-lam) / (mu1 mu2 - lam mu1 - lam a^M (mu2-mu1)),
/// which is 0/0 at a = 1; near that point the summation path answers instead.
inline double prob_empty(const ProtocolParams& params, const ServiceRates& rates) {
    detail::require_stable(params, rates);
    const double lam = params.arrival_rate;
    const double mu1 = rates.mu_contended;
    const double mu2 = rates.mu_exclusive;
    const double a = detail::band_ratio(lam, mu1);
    if (std::abs(a - 1.0) <= detail::kClosedFormWindow)
        return stationary_distribution(params, rates).p_empty;
    const double a_m = detail::pow_nonneg(a, params.congestion_limit);
    return (mu1 - lam) * (mu2 - lam) / (mu1 * mu2 - lam * mu1 - lam * a_m * (mu2 - mu1));
}

/// Pr(1 <= Q <= M), closed form sharing prob_empty's denominator. The factor
/// 1 - a^M is taken through expm1 to keep digits when a is near (but outside
/// the window around) 1.
inline double prob_band(const ProtocolParams& params, const ServiceRates& rates) {
    detail::require_stable(params, rates);
    const double lam = params.arrival_rate;
    const double mu1 = rates.mu_contended;
    const double mu2 = rates.mu_exclusive;
    const double a = detail::band_ratio(lam, mu1);
    if (std::abs(a - 1.0) <= detail::kClosedFormWindow)
        return stationary_distribution(params, rates).p_band;
    const int m = params.congestion_limit;
    const double a_m = detail::pow_nonneg(a, m);
    const double one_minus_a_m =
        a == 0.0 ? 1.0 : -std::expm1(static_cast<double>(m) * std::log(a));
    return lam * one_minus_a_m * (mu2 - lam) /
           (mu1 * mu2 - lam * mu1 - lam * a_m * (mu2 - mu1));
}

/// Truncation level for the numerical oracle: deep enough that the discarded
/// geometric mass is below 1e-13 even before weighting by Pr(Q = M).
inline int default_truncation(const ProtocolParams& params, const ServiceRates& rates) {
    detail::require_stable(params, rates);
    const double b = detail::tail_ratio(params.arrival_rate, rates.mu_exclusive);
    int extra = 50;
    if (b > 0.0) {
        const double k = std::ceil(std::log(1e-14 * (1.0 - b)) / std::log(b));
        if (k > static_cast<double>(extra)) extra = static_cast<int>(k);
    }
    return params.congestion_limit + extra;
}

/// Dense one-step matrix of the chain truncated at state N (the top state
/// keeps its self-loop mass in place of the removed up-transition).
inline std::vector<std::vector<double>> transition_matrix(const ProtocolParams& params,
                                                          const ServiceRates& rates,
                                                          int truncation) {
    params.validate();
    rates.validate();
    if (truncation <= params.congestion_limit)
        throw ParameterError("truncation must exceed congestion_limit");
    const double lam = params.arrival_rate;
    const double mu1 = rates.mu_contended;
    const double mu2 = rates.mu_exclusive;
    const int m = params.congestion_limit;
    const int n = truncation;

    std::vector<std::vector<double>> p(static_cast<std::size_t>(n) + 1,
                                       std::vector<double>(static_cast<std::size_t>(n) + 1, 0.0));
    p[0][1] = lam;
    p[0][0] = 1.0 - lam;
    for (int i = 1; i <= n; ++i) {
        const double mu = i <= m ? mu1 : mu2;
        const double up = lam * (1.0 - mu);
        const double down = (1.0 - lam) * mu;
        auto& row = p[static_cast<std::size_t>(i)];
        row[static_cast<std::size_t>(i) - 1] = down;
        if (i < n) row[static_cast<std::size_t>(i) + 1] = up;
        row[static_cast<std::size_t>(i)] = 1.0 - down - (i < n ? up : 0.0);
    }
    return p;
}

/// Stationary vector of an (n+1)-state chain by GTH state reduction. The
/// algorithm never subtracts, so small tail masses keep full relative
/// accuracy. A global-balance residual check on the input matrix guards the
/// result.
inline std::vector<double> solve_truncated_chain(const ProtocolParams& params,
                                                 const ServiceRates& rates,
                                                 int truncation) {
    const auto original = transition_matrix(params, rates, truncation);
    auto p = original;
    const std::size_t n = p.size();

    for (std::size_t k = n - 1; k >= 1; --k) {
        double out = 0.0;
        for (std::size_t j = 0; j < k; ++j) out += p[k][j];
        for (std::size_t i = 0; i < k; ++i) p[i][k] /= out;
        for (std::size_t i = 0; i < k; ++i) {
            if (p[i][k] == 0.0) continue;
            for (std::size_t j = 0; j < k; ++j) p[i][j] += p[i][k] * p[k][j];
        }
    }

    std::vector<double> pi(n, 0.0);
    pi[0] = 1.0;
    double total = 1.0;
    for (std::size_t k = 1; k < n; ++k) {
        double mass = 0.0;
        for (std::size_t i = 0; i < k; ++i) mass += pi[i] * p[i][k];
        pi[k] = mass;
        total += mass;
    }
    for (auto& x : pi) x /= total;

    double residual = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        double flow = -pi[j];
        for (std::size_t i = 0; i < n; ++i) flow += pi[i] * original[i][j];
        residual = std::max(residual, std::abs(flow));
    }
    if (residual > 1e-12)
        throw NumericalError("solve_truncated_chain: balance residual " + std::to_string(residual));
    return pi;
}

/// Independent numerical solution of the chain, packaged like the analytical
/// one. Everything here goes through the explicit matrix; no closed form is
/// reused, which is what makes it an oracle.
inline QueueDistribution truncated_solve_oracle(const ProtocolParams& params,
                                                const ServiceRates& rates,
                                                int truncation) {
    detail::require_stable(params, rates);
    if (truncation <= params.congestion_limit)
        throw ParameterError("truncation must exceed congestion_limit");
    const auto pi = solve_truncated_chain(params, rates, truncation);
    const int m = params.congestion_limit;

    QueueDistribution d;
    d.params = params;
    d.rates = rates;
    d.p_empty = pi[0];
    d.band.assign(pi.begin() + 1, pi.begin() + 1 + m);
    double p_band = 0.0;
    for (double x : d.band) p_band += x;
    d.p_band = p_band;
    double p_above = 0.0;
    for (std::size_t i = static_cast<std::size_t>(m) + 1; i < pi.size(); ++i) p_above += pi[i];
    d.p_above = p_above;
    d.tail_first = pi[static_cast<std::size_t>(m) + 1];
    d.tail_ratio = detail::tail_ratio(params.arrival_rate, rates.mu_exclusive);
    return d;
}

} // namespace cogmpr
