#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cogmpr/presets.hpp"
#include "cogmpr/simulator.hpp"
#include "cogmpr/throughput.hpp"

using namespace cogmpr;
using Catch::Matchers::WithinAbs;

namespace {

const LinkSuccessProfile kStrong = preset_profile("fig3");

SimConfig reference_config() {
    SimConfig cfg;
    cfg.params = {0.3, 0.9, 2};
    cfg.profile = kStrong;
    cfg.slots = 200'000;
    cfg.warmup = 10'000;
    cfg.seed = 1;
    return cfg;
}

bool same_stats(const SimStats& x, const SimStats& y) {
    if (x.replications.size() != y.replications.size()) return false;
    for (std::size_t i = 0; i < x.replications.size(); ++i) {
        const auto& a = x.replications[i];
        const auto& b = y.replications[i];
        if (a.stream_seed != b.stream_seed || a.counted_slots != b.counted_slots ||
            a.count_empty != b.count_empty || a.count_band != b.count_band ||
            a.count_above != b.count_above || a.arrivals != b.arrivals ||
            a.departures != b.departures || a.secondary_successes != b.secondary_successes ||
            a.queue_at_warmup != b.queue_at_warmup || a.final_queue != b.final_queue)
            return false;
    }
    return x.t_secondary.mean == y.t_secondary.mean && x.frac_empty.mean == y.frac_empty.mean &&
           x.t_aggregate.mean == y.t_aggregate.mean &&
           x.t_secondary.ci_half == y.t_secondary.ci_half &&
           x.t_secondary.std_error == y.t_secondary.std_error;
}

struct TraceLine {
    std::uint64_t slot, queue;
    int p_tx, s_tx, p_ok, s_ok, arrival;
};

std::vector<TraceLine> read_trace(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::vector<TraceLine> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        TraceLine t{};
        std::istringstream ls(line);
        ls >> t.slot >> t.queue >> t.p_tx >> t.s_tx >> t.p_ok >> t.s_ok >> t.arrival;
        REQUIRE(ls);
        lines.push_back(t);
    }
    return lines;
}

} // namespace

TEST_CASE("config validation", "[config]") {
    SimConfig cfg = reference_config();
    cfg.warmup = cfg.slots;
    CHECK_THROWS_AS(cfg.validate(), ParameterError);
    cfg = reference_config();
    cfg.replications = 0;
    CHECK_THROWS_AS(cfg.validate(), ParameterError);
    cfg = reference_config();
    cfg.slots = 0;
    CHECK_THROWS_AS(cfg.validate(), ParameterError);
}

TEST_CASE("warmup defaults scale with the congestion limit and cap at a tenth", "[config]") {
    SimConfig cfg = reference_config();
    cfg.warmup.reset();
    CHECK(cfg.resolved_warmup() == 10'000);
    cfg.params.congestion_limit = 500;
    CHECK(cfg.resolved_warmup() == 50'000);
    cfg.params.congestion_limit = 2;
    cfg.slots = 5'000;
    CHECK(cfg.resolved_warmup() == 500);
}

TEST_CASE("identical seeds reproduce every counter", "[determinism]") {
    const SimConfig cfg = reference_config();
    CHECK(same_stats(run(cfg), run(cfg)));

    SimConfig rep = cfg;
    rep.replications = 4;
    CHECK(same_stats(replicate(rep), replicate(rep)));
}

TEST_CASE("replication streams differ but derive from the base seed", "[determinism]") {
    SimConfig cfg = reference_config();
    cfg.replications = 3;
    const auto stats = replicate(cfg);
    REQUIRE(stats.replications.size() == 3);
    CHECK(stats.replications[0].stream_seed == stream_seed(1, 0));
    CHECK(stats.replications[1].stream_seed == stream_seed(1, 1));
    CHECK(stats.replications[2].stream_seed == stream_seed(1, 2));
    CHECK(stats.replications[0].secondary_successes != stats.replications[1].secondary_successes);
}

TEST_CASE("post-warmup packet conservation is exact", "[conservation]") {
    SimConfig cfg = reference_config();
    cfg.replications = 5;
    const auto stats = replicate(cfg);
    for (const auto& r : stats.replications)
        CHECK(r.arrivals + r.queue_at_warmup == r.departures + r.final_queue);

    cfg = reference_config();
    cfg.warmup = 0;
    const auto single = run(cfg);
    const auto& r = single.replications.front();
    CHECK(r.queue_at_warmup == 0);
    CHECK(r.arrivals + r.queue_at_warmup == r.departures + r.final_queue);
}

TEST_CASE("occupancy fractions partition every counted slot", "[stats]") {
    SimConfig cfg = reference_config();
    cfg.replications = 3;
    const auto stats = replicate(cfg);
    for (const auto& r : stats.replications) {
        CHECK(r.count_empty + r.count_band + r.count_above == r.counted_slots);
        CHECK(r.frac_empty() + r.frac_band() + r.frac_above() == 1.0);
        std::uint64_t batch_slots = 0;
        for (const auto& b : r.batches) batch_slots += b.slots;
        CHECK(batch_slots == r.counted_slots);
    }
    CHECK_THAT(stats.frac_empty.mean + stats.frac_band.mean + stats.frac_above.mean,
               WithinAbs(1.0, 1e-15));
}

TEST_CASE("an idle primary leaves the whole channel to the secondary", "[stats]") {
    SimConfig cfg = reference_config();
    cfg.params.arrival_rate = 0.0;
    const auto stats = run(cfg);
    const auto& r = stats.replications.front();
    CHECK(r.frac_empty() == 1.0);
    CHECK(r.departures == 0);
    const double p = kStrong.secondary_solo;
    const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(r.counted_slots));
    CHECK(std::abs(stats.t_secondary.mean - p) <= 4.0 * se);
}

TEST_CASE("estimates straddle the closed-form values", "[stats]") {
    SimConfig cfg = reference_config();
    cfg.slots = 1'000'000;
    cfg.replications = 5;
    const auto stats = replicate(cfg);

    const auto rates = service_rates(kStrong, cfg.params.access_prob);
    const auto dist = stationary_distribution(cfg.params, rates);
    const auto rep = aggregate_throughput(cfg.params, rates, kStrong);

    auto close = [](const StatSummary& s, double target) {
        REQUIRE(s.std_error.has_value());
        INFO("mean " << s.mean << " target " << target << " se " << *s.std_error);
        CHECK(std::abs(s.mean - target) <= 4.0 * *s.std_error);
    };
    close(stats.frac_empty, dist.p_empty);
    close(stats.frac_band, dist.p_band);
    close(stats.frac_above, dist.p_above);
    close(stats.t_primary, cfg.params.arrival_rate);
    close(stats.t_secondary, *rep.t_secondary);
    close(stats.t_aggregate, *rep.t_aggregate);
}

TEST_CASE("confidence intervals cover the truth most of the time", "[stats][slow]") {
    const auto rates = service_rates(kStrong, 0.9);
    const double target = secondary_throughput({0.3, 0.9, 2}, rates, kStrong);
    int covered = 0;
    for (std::uint64_t exp = 0; exp < 10; ++exp) {
        SimConfig cfg = reference_config();
        cfg.slots = 50'000;
        cfg.warmup = 5'000;
        cfg.replications = 10;
        cfg.seed = 101 + exp;
        const auto stats = replicate(cfg);
        REQUIRE(stats.t_secondary.ci_half.has_value());
        if (std::abs(stats.t_secondary.mean - target) <= *stats.t_secondary.ci_half) ++covered;
    }
    CHECK(covered >= 8);
}

TEST_CASE("single replications carry no interval", "[stats]") {
    const auto stats = run(reference_config());
    CHECK_FALSE(stats.t_secondary.ci_half.has_value());
    CHECK_FALSE(stats.frac_empty.ci_half.has_value());
    CHECK(stats.t_secondary.std_error.has_value()); // batch means still provide one
    CHECK(stats.t_secondary.per_replication.size() == 1);
}

TEST_CASE("saturated queues grow linearly", "[unstable]") {
    SimConfig cfg = reference_config();
    cfg.params.arrival_rate = 0.9; // drain tops out at 0.8
    cfg.slots = 100'000;
    cfg.warmup = 0;
    const auto stats = run(cfg);
    const auto& r = stats.replications.front();
    CHECK(static_cast<double>(r.final_queue) >= 0.5 * (0.9 - 0.8) * static_cast<double>(cfg.slots));
    CHECK(r.frac_above() > 0.95);
}

TEST_CASE("the trace records the protocol faithfully", "[trace]") {
    const std::string path = "sim_trace_test.txt";
    SimConfig cfg = reference_config();
    cfg.slots = 20'000;
    cfg.warmup = 0;
    cfg.trace_path = path;
    const auto stats = run(cfg);
    const auto lines = read_trace(path);
    REQUIRE(lines.size() == cfg.slots);

    const std::uint64_t m = static_cast<std::uint64_t>(cfg.params.congestion_limit);
    std::uint64_t queue = 0;
    bool secondary_above_limit = false;
    for (const auto& t : lines) {
        CHECK(t.queue == queue);
        if (t.queue == 0) {
            CHECK(t.p_tx == 0);
            CHECK(t.s_tx == 1);
        }
        if (t.queue >= 1) CHECK(t.p_tx == 1);
        if (t.queue > m && t.s_tx) secondary_above_limit = true;
        if (!t.p_tx) CHECK(t.p_ok == 0);
        if (!t.s_tx) CHECK(t.s_ok == 0);
        queue = queue - t.p_ok + t.arrival;
    }
    CHECK_FALSE(secondary_above_limit);
    CHECK(queue == stats.replications.front().final_queue);
    std::remove(path.c_str());
}

TEST_CASE("replicated runs refuse a trace path", "[trace]") {
    SimConfig cfg = reference_config();
    cfg.replications = 2;
    cfg.trace_path = "nope.txt";
    CHECK_THROWS_AS(replicate(cfg), ParameterError);
}

TEST_CASE("throughput estimates stay inside the unit interval", "[stats]") {
    for (double lam : {0.0, 0.3, 0.9}) {
        SimConfig cfg = reference_config();
        cfg.params.arrival_rate = lam;
        cfg.slots = 30'000;
        const auto stats = run(cfg);
        const auto& r = stats.replications.front();
        INFO("lam=" << lam);
        for (double v : {r.t_primary(), r.t_secondary(), stats.t_primary.mean,
                         stats.t_secondary.mean}) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
}
