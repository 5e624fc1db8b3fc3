#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "cogmpr/errors.hpp"
#include "cogmpr/phy.hpp"
#include "cogmpr/queue_chain.hpp"
#include "cogmpr/rng.hpp"

namespace cogmpr {

struct SimConfig {
    ProtocolParams params;
    LinkSuccessProfile profile;
    std::uint64_t slots = 1'000'000;
    std::optional<std::uint64_t> warmup; ///< unset: max(1e4, 100*M), capped to slots/10
    std::uint64_t seed = 1;
    std::uint32_t replications = 1;
    std::optional<std::string> trace_path; ///< per-slot event log; single runs only

    std::uint64_t resolved_warmup() const {
        if (warmup) return *warmup;
        std::uint64_t def = std::max<std::uint64_t>(
            10'000, 100 * static_cast<std::uint64_t>(params.congestion_limit));
        if (def >= slots) def = slots / 10;
        return def;
    }

    void validate() const {
        params.validate();
        profile.validate();
        if (slots < 1) throw ParameterError("slots must be >= 1");
        if (warmup && *warmup >= slots)
            throw ParameterError("warmup must be < slots, got " + std::to_string(*warmup));
        if (replications < 1) throw ParameterError("replications must be >= 1");
    }
};

inline constexpr int kBatchesPerReplication = 20;

/// Event counts over one batch of post-warmup slots.
struct BatchCounts {
    std::uint64_t slots = 0;
    std::uint64_t empty = 0;
    std::uint64_t band = 0;
    std::uint64_t primary_ok = 0;
    std::uint64_t secondary_ok = 0;
};

/// Raw outcome of one trajectory. All counters cover post-warmup slots only.
struct ReplicationResult {
    std::uint64_t stream_seed = 0;
    std::uint64_t counted_slots = 0;
    std::uint64_t count_empty = 0;
    std::uint64_t count_band = 0;
    std::uint64_t count_above = 0;
    std::uint64_t arrivals = 0;
    std::uint64_t departures = 0;
    std::uint64_t secondary_successes = 0;
    std::uint64_t queue_at_warmup = 0;
    std::uint64_t final_queue = 0;
    std::vector<BatchCounts> batches;

    double frac_empty() const { return ratio(count_empty); }
    double frac_band() const { return ratio(count_band); }
    /// Defined as the complement so the three fractions sum to exactly 1.
    double frac_above() const { return 1.0 - frac_empty() - frac_band(); }
    double t_primary() const { return ratio(departures); }
    double t_secondary() const { return ratio(secondary_successes); }
    double t_aggregate() const { return t_primary() + t_secondary(); }

private:
    double ratio(std::uint64_t count) const {
        return static_cast<double>(count) / static_cast<double>(counted_slots);
    }
};

/// Mean of a statistic over replications. The half-width is the 95% Student-t
/// interval over replication means (absent for a single replication); the
/// standard error pools the per-batch means of all replications, which gives
/// it far more degrees of freedom than the replication count alone.
struct StatSummary {
    std::vector<double> per_replication;
    double mean = 0.0;
    std::optional<double> ci_half;
    std::optional<double> std_error;
};

struct SimStats {
    std::vector<ReplicationResult> replications;
    StatSummary frac_empty;
    StatSummary frac_band;
    StatSummary frac_above;
    StatSummary t_primary;
    StatSummary t_secondary;
    StatSummary t_aggregate;
    double mean_final_queue = 0.0;
};

namespace detail {

/// Two-sided 97.5% Student-t quantile; exact table through 30 degrees of
/// freedom, coarse steps beyond.
inline double student_t_975(std::size_t df) {
    static constexpr double table[30] = {
        12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228,
        2.201,  2.179, 2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086,
        2.080,  2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042};
    if (df == 0) return std::numeric_limits<double>::quiet_NaN();
    if (df <= 30) return table[df - 1];
    if (df <= 40) return 2.021;
    if (df <= 60) return 2.000;
    if (df <= 120) return 1.980;
    return 1.960;
}

inline ReplicationResult run_single(const SimConfig& cfg, std::uint64_t seed, std::ostream* trace) {
    Sampler rng(seed);
    const double lam = cfg.params.arrival_rate;
    const double q = cfg.params.access_prob;
    const std::uint64_t m = static_cast<std::uint64_t>(cfg.params.congestion_limit);
    const LinkSuccessProfile& pr = cfg.profile;
    const std::uint64_t warmup = cfg.resolved_warmup();
    const std::uint64_t counted = cfg.slots - warmup;

    ReplicationResult r;
    r.stream_seed = seed;
    r.counted_slots = counted;
    const std::uint64_t nb =
        std::min<std::uint64_t>(kBatchesPerReplication, counted);
    r.batches.assign(nb, BatchCounts{});
    std::uint64_t batch = 0;
    std::uint64_t batch_end = counted / nb;

    std::uint64_t queue = 0;
    for (std::uint64_t slot = 0; slot < cfg.slots; ++slot) {
        if (slot == warmup) r.queue_at_warmup = queue;
        const std::uint64_t start_queue = queue;

        // draw order is part of the reproducibility contract:
        // secondary access, primary success, secondary success, arrival
        const bool primary_tx = start_queue >= 1;
        bool secondary_tx = false;
        if (start_queue == 0)
            secondary_tx = true;
        else if (start_queue <= m)
            secondary_tx = rng.bernoulli(q);

        bool primary_ok = false;
        if (primary_tx)
            primary_ok = rng.bernoulli(secondary_tx ? pr.primary_joint : pr.primary_solo);
        bool secondary_ok = false;
        if (secondary_tx)
            secondary_ok = rng.bernoulli(primary_tx ? pr.secondary_joint : pr.secondary_solo);

        if (primary_ok) --queue;
        const bool arrival = rng.bernoulli(lam); // eligible for service next slot
        if (arrival) ++queue;

        if (slot >= warmup) {
            const std::uint64_t tc = slot - warmup;
            if (tc == batch_end) {
                ++batch;
                batch_end = (batch + 1) * counted / nb;
            }
            BatchCounts& bc = r.batches[batch];
            ++bc.slots;
            if (start_queue == 0) {
                ++r.count_empty;
                ++bc.empty;
            } else if (start_queue <= m) {
                ++r.count_band;
                ++bc.band;
            } else {
                ++r.count_above;
            }
            if (primary_ok) {
                ++r.departures;
                ++bc.primary_ok;
            }
            if (secondary_ok) {
                ++r.secondary_successes;
                ++bc.secondary_ok;
            }
            if (arrival) ++r.arrivals;
        }

        if (trace)
            *trace << slot << ' ' << start_queue << ' ' << primary_tx << ' ' << secondary_tx
                   << ' ' << primary_ok << ' ' << secondary_ok << ' ' << arrival << '\n';
    }
    r.final_queue = queue;
    return r;
}

template <typename PerRep, typename PerBatch>
StatSummary summarize(const std::vector<ReplicationResult>& reps, PerRep per_rep, PerBatch per_batch) {
    StatSummary s;
    s.per_replication.reserve(reps.size());
    double sum = 0.0;
    for (const auto& r : reps) {
        const double v = per_rep(r);
        s.per_replication.push_back(v);
        sum += v;
    }
    const std::size_t n = reps.size();
    s.mean = sum / static_cast<double>(n);

    if (n >= 2) {
        double ss = 0.0;
        for (double v : s.per_replication) ss += (v - s.mean) * (v - s.mean);
        const double sd = std::sqrt(ss / static_cast<double>(n - 1));
        s.ci_half = student_t_975(n - 1) * sd / std::sqrt(static_cast<double>(n));
    }

    std::vector<double> bm;
    for (const auto& r : reps)
        for (const auto& b : r.batches)
            if (b.slots > 0) bm.push_back(per_batch(b));
    if (bm.size() >= 2) {
        double bmean = 0.0;
        for (double v : bm) bmean += v;
        bmean /= static_cast<double>(bm.size());
        double ss = 0.0;
        for (double v : bm) ss += (v - bmean) * (v - bmean);
        const double sd = std::sqrt(ss / static_cast<double>(bm.size() - 1));
        s.std_error = sd / std::sqrt(static_cast<double>(bm.size()));
    }
    return s;
}

inline SimStats aggregate(std::vector<ReplicationResult> reps) {
    SimStats s;
    s.replications = std::move(reps);
    const auto& rs = s.replications;
    auto slots_of = [](const BatchCounts& b) { return static_cast<double>(b.slots); };

    s.frac_empty = summarize(rs, [](const ReplicationResult& r) { return r.frac_empty(); },
                             [&](const BatchCounts& b) { return static_cast<double>(b.empty) / slots_of(b); });
    s.frac_band = summarize(rs, [](const ReplicationResult& r) { return r.frac_band(); },
                            [&](const BatchCounts& b) { return static_cast<double>(b.band) / slots_of(b); });
    s.frac_above = summarize(rs, [](const ReplicationResult& r) { return r.frac_above(); },
                             [&](const BatchCounts& b) {
                                 return 1.0 - static_cast<double>(b.empty + b.band) / slots_of(b);
                             });
    s.t_primary = summarize(rs, [](const ReplicationResult& r) { return r.t_primary(); },
                            [&](const BatchCounts& b) { return static_cast<double>(b.primary_ok) / slots_of(b); });
    s.t_secondary = summarize(rs, [](const ReplicationResult& r) { return r.t_secondary(); },
                              [&](const BatchCounts& b) { return static_cast<double>(b.secondary_ok) / slots_of(b); });
    s.t_aggregate = summarize(rs, [](const ReplicationResult& r) { return r.t_aggregate(); },
                              [&](const BatchCounts& b) {
                                  return static_cast<double>(b.primary_ok + b.secondary_ok) / slots_of(b);
                              });
    double fq = 0.0;
    for (const auto& r : rs) fq += static_cast<double>(r.final_queue);
    s.mean_final_queue = fq / static_cast<double>(rs.size());
    return s;
}

} // namespace detail

/// One trajectory driven directly by config.seed. Honors trace_path.
inline SimStats run(const SimConfig& cfg) {
    cfg.validate();
    std::ofstream trace_file;
    std::ostream* trace = nullptr;
    if (cfg.trace_path) {
        trace_file.open(*cfg.trace_path, std::ios::binary | std::ios::trunc);
        if (!trace_file) throw IoError("cannot open trace file " + *cfg.trace_path);
        trace_file << "# slot queue primary_tx secondary_tx primary_ok secondary_ok arrival\n";
        trace = &trace_file;
    }
    std::vector<ReplicationResult> reps;
    reps.push_back(detail::run_single(cfg, cfg.seed, trace));
    if (trace) {
        trace_file.flush();
        if (!trace_file) throw IoError("failed writing trace file " + *cfg.trace_path);
    }
    return detail::aggregate(std::move(reps));
}

/// config.replications independent trajectories on seeds stream_seed(seed, k).
/// Trajectories may run on several threads; results are assembled in
/// replication order, so output is independent of scheduling.
inline SimStats replicate(const SimConfig& cfg) {
    cfg.validate();
    if (cfg.trace_path)
        throw ParameterError("trace_path requires run(); replicated traces would interleave");
    const std::uint32_t n = cfg.replications;
    std::vector<ReplicationResult> reps(n);

    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const unsigned workers = std::min<unsigned>(hw, n);
    if (workers <= 1) {
        for (std::uint32_t k = 0; k < n; ++k)
            reps[k] = detail::run_single(cfg, stream_seed(cfg.seed, k), nullptr);
    } else {
        std::atomic<std::uint32_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::uint32_t k = next.fetch_add(1); k < n; k = next.fetch_add(1))
                    reps[k] = detail::run_single(cfg, stream_seed(cfg.seed, k), nullptr);
            });
        for (auto& t : pool) t.join();
    }
    return detail::aggregate(std::move(reps));
}

} // namespace cogmpr
