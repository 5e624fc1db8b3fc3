// Command-line front end: single-point analysis, simulation, sweeps,
// analytics-vs-simulation comparison, and link-profile derivation from a
// channel scenario file.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cogmpr/cogmpr.hpp"

namespace {

using cogmpr::detail::format_sig10;

struct ModelOpts {
    std::string preset;
    std::string profile_csv;
    double lambda = 0.3;
    double q = 0.9;
    int m = 2;
};

struct SimOpts {
    std::uint64_t slots = 1'000'000;
    std::uint64_t warmup = 0;
    bool warmup_set = false;
    std::uint32_t reps = 1;
    std::uint64_t seed = 1;
};

void add_profile_flags(CLI::App* cmd, ModelOpts& o) {
    cmd->add_option("--preset", o.preset, "named link profile (fig3, fig4, fig5, fig6)");
    cmd->add_option("--profile", o.profile_csv, "explicit link profile p11,p112,p22,p212");
}

void add_point_flags(CLI::App* cmd, ModelOpts& o) {
    cmd->add_option("--lambda", o.lambda, "primary arrival rate per slot")->capture_default_str();
    cmd->add_option("--q", o.q, "secondary access probability in the band")->capture_default_str();
    cmd->add_option("--M", o.m, "congestion limit")->capture_default_str();
}

CLI::Option* add_sim_flags(CLI::App* cmd, SimOpts& o, std::uint32_t default_reps) {
    o.reps = default_reps;
    cmd->add_option("--slots", o.slots, "slots per replication")->capture_default_str();
    CLI::Option* w = cmd->add_option("--warmup", o.warmup, "warmup slots (default max(1e4, 100*M))");
    cmd->add_option("--reps", o.reps, "number of replications")->capture_default_str();
    cmd->add_option("--seed", o.seed, "base RNG seed")->capture_default_str();
    return w;
}

cogmpr::LinkSuccessProfile parse_profile_csv(const std::string& text) {
    std::vector<double> vals;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = text.find(',', pos);
        const std::string field = text.substr(pos, comma - pos);
        char* end = nullptr;
        const double v = std::strtod(field.c_str(), &end);
        if (end == field.c_str() || *end != '\0')
            throw cogmpr::ParameterError("--profile: expected a number, got '" + field + "'");
        vals.push_back(v);
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (vals.size() != 4)
        throw cogmpr::ParameterError("--profile expects four values p11,p112,p22,p212");
    cogmpr::LinkSuccessProfile p{vals[0], vals[1], vals[2], vals[3]};
    p.validate();
    return p;
}

cogmpr::LinkSuccessProfile resolve_profile(const ModelOpts& o) {
    if (!o.preset.empty() && !o.profile_csv.empty())
        throw cogmpr::ParameterError("give either --preset or --profile, not both");
    if (!o.preset.empty()) return cogmpr::preset_profile(o.preset);
    if (!o.profile_csv.empty()) return parse_profile_csv(o.profile_csv);
    throw cogmpr::ParameterError("a link profile is required: --preset or --profile");
}

cogmpr::SweepRange parse_sweep_flag(const std::string& text) {
    std::vector<std::string> parts;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t colon = text.find(':', pos);
        parts.push_back(text.substr(pos, colon - pos));
        if (colon == std::string::npos) break;
        pos = colon + 1;
    }
    if (parts.size() != 4)
        throw cogmpr::ParameterError("--sweep expects var:start:stop:step");
    auto num = [](const std::string& s, const char* what) {
        char* end = nullptr;
        const double v = std::strtod(s.c_str(), &end);
        if (end == s.c_str() || *end != '\0')
            throw cogmpr::ParameterError(std::string("--sweep ") + what + ": expected a number, got '" + s + "'");
        return v;
    };
    cogmpr::SweepRange r;
    r.var = cogmpr::parse_sweep_var(parts[0]);
    r.start = num(parts[1], "start");
    r.stop = num(parts[2], "stop");
    r.step = num(parts[3], "step");
    return r;
}

void print_summary(const char* name, const cogmpr::StatSummary& s) {
    std::cout << name << " = " << format_sig10(s.mean);
    if (s.ci_half) std::cout << " +- " << format_sig10(*s.ci_half);
    if (s.std_error) std::cout << " (se " << format_sig10(*s.std_error) << ")";
    std::cout << '\n';
}

int cmd_analyze(const ModelOpts& mo) {
    const auto profile = resolve_profile(mo);
    const cogmpr::ProtocolParams params{mo.lambda, mo.q, mo.m};
    const auto rates = cogmpr::service_rates(profile, params.access_prob);
    std::cout << "lambda = " << format_sig10(params.arrival_rate) << '\n'
              << "q = " << format_sig10(params.access_prob) << '\n'
              << "M = " << params.congestion_limit << '\n'
              << "mu1 = " << format_sig10(rates.mu_contended) << '\n'
              << "mu2 = " << format_sig10(rates.mu_exclusive) << '\n';
    if (!cogmpr::is_stable(params, rates))
        throw cogmpr::StabilityError("unstable point: lambda " + std::to_string(params.arrival_rate) +
                                     " >= mu2 " + std::to_string(rates.mu_exclusive) +
                                     "; analytical throughput undefined (use simulate)");
    const auto dist = cogmpr::stationary_distribution(params, rates);
    const auto rep = cogmpr::aggregate_throughput(params, rates, profile);
    std::cout << "stable = true\n"
              << "pi0 = " << format_sig10(dist.p_empty) << '\n'
              << "prob_band = " << format_sig10(dist.p_band) << '\n'
              << "prob_above = " << format_sig10(dist.p_above) << '\n'
              << "Ts = " << format_sig10(*rep.t_secondary) << '\n'
              << "Taggr = " << format_sig10(*rep.t_aggregate) << '\n'
              << "idle_term = " << format_sig10(*rep.idle_term) << '\n'
              << "band_term = " << format_sig10(*rep.band_term) << '\n';
    return 0;
}

int cmd_simulate(const ModelOpts& mo, const SimOpts& so, const std::string& trace) {
    cogmpr::SimConfig cfg;
    cfg.profile = resolve_profile(mo);
    cfg.params = {mo.lambda, mo.q, mo.m};
    cfg.slots = so.slots;
    if (so.warmup_set) cfg.warmup = so.warmup;
    cfg.replications = so.reps;
    cfg.seed = so.seed;
    if (!trace.empty()) cfg.trace_path = trace;

    const auto stats = so.reps == 1 ? cogmpr::run(cfg) : cogmpr::replicate(cfg);
    const auto& first = stats.replications.front();
    std::cout << "replications = " << stats.replications.size() << '\n'
              << "slots = " << cfg.slots << '\n'
              << "warmup = " << cfg.resolved_warmup() << '\n'
              << "counted_slots = " << first.counted_slots << '\n';
    print_summary("frac_empty", stats.frac_empty);
    print_summary("frac_band", stats.frac_band);
    print_summary("frac_above", stats.frac_above);
    print_summary("t_primary", stats.t_primary);
    print_summary("t_secondary", stats.t_secondary);
    print_summary("t_aggregate", stats.t_aggregate);
    std::cout << "mean_final_queue = " << format_sig10(stats.mean_final_queue) << '\n';
    for (const auto& r : stats.replications)
        std::cout << "rep seed=" << r.stream_seed << " t_secondary=" << format_sig10(r.t_secondary())
                  << " t_aggregate=" << format_sig10(r.t_aggregate())
                  << " final_queue=" << r.final_queue << '\n';
    return 0;
}

cogmpr::ExperimentSpec build_spec(const ModelOpts& mo, const std::string& sweep_flag,
                                  bool with_sim, const SimOpts& so, const std::string& out) {
    cogmpr::ExperimentSpec spec;
    spec.profile = resolve_profile(mo);
    spec.sweep = parse_sweep_flag(sweep_flag);
    spec.arrival_rate = mo.lambda;
    spec.access_prob = mo.q;
    spec.congestion_limit = mo.m;
    if (with_sim) {
        cogmpr::SimSettings sim;
        sim.slots = so.slots;
        if (so.warmup_set) sim.warmup = so.warmup;
        sim.replications = so.reps;
        sim.seed = so.seed;
        spec.sim = sim;
    }
    if (!out.empty()) spec.out_path = out;
    spec.validate();
    return spec;
}

int cmd_sweep(const cogmpr::ExperimentSpec& spec) {
    const auto rows = cogmpr::run_sweep(spec);
    if (spec.out_path)
        std::cout << "wrote " << rows.size() << " rows to " << *spec.out_path << '\n';
    else
        std::cout << cogmpr::to_csv(rows);
    return 0;
}

int cmd_compare(const cogmpr::ExperimentSpec& spec) {
    const auto report = cogmpr::compare(spec);
    std::cout << "swept_var = " << cogmpr::sweep_var_name(report.var) << '\n';
    for (const auto& point : report.points) {
        if (!point.stable) {
            std::cout << "value " << format_sig10(point.value) << ": unstable, not judged\n";
            continue;
        }
        for (const auto& c : point.checks)
            std::cout << "value " << format_sig10(point.value) << ": " << c.name
                      << " analytic=" << format_sig10(c.analytic)
                      << " simulated=" << format_sig10(c.simulated)
                      << " se=" << format_sig10(c.std_error) << ' '
                      << (c.pass ? "pass" : "FAIL") << '\n';
    }
    std::cout << "checked " << report.stable_points << " stable points, " << report.failed_checks
              << " failed checks\n";
    return report.pass ? 0 : 3;
}

int cmd_phy(const std::string& scenario_path, std::uint64_t mc_samples, std::uint64_t seed) {
    const auto sc = cogmpr::load_scenario(scenario_path);
    const auto profile = cogmpr::derive_link_profile(sc);
    std::cout << "p11 = " << format_sig10(profile.primary_solo) << '\n'
              << "p112 = " << format_sig10(profile.primary_joint) << '\n'
              << "p22 = " << format_sig10(profile.secondary_solo) << '\n'
              << "p212 = " << format_sig10(profile.secondary_joint) << '\n';
    if (mc_samples > 0) {
        using cogmpr::Rx;
        using cogmpr::Tx;
        using cogmpr::TxSet;
        const struct {
            const char* name;
            Tx tx;
            TxSet set;
            Rx rx;
        } links[] = {
            {"p11", Tx::primary, TxSet::solo(Tx::primary), Rx::primary_dest},
            {"p112", Tx::primary, TxSet::both(), Rx::primary_dest},
            {"p22", Tx::secondary, TxSet::solo(Tx::secondary), Rx::secondary_dest},
            {"p212", Tx::secondary, TxSet::both(), Rx::secondary_dest},
        };
        std::uint64_t idx = 0;
        for (const auto& l : links) {
            const auto est = cogmpr::mc_success_estimate(sc, l.tx, l.set, l.rx, mc_samples,
                                                         cogmpr::stream_seed(seed, idx++));
            std::cout << l.name << "_mc = " << format_sig10(est.probability) << " (se "
                      << format_sig10(est.std_error) << ", n " << est.samples << ")\n";
        }
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"cognitive access throughput toolkit"};
    app.require_subcommand(1);

    ModelOpts an_model;
    auto* analyze = app.add_subcommand("analyze", "closed-form analysis of one parameter point");
    add_profile_flags(analyze, an_model);
    add_point_flags(analyze, an_model);

    ModelOpts sim_model;
    SimOpts sim_opts;
    std::string sim_trace;
    auto* simulate = app.add_subcommand("simulate", "slot-level simulation of one parameter point");
    add_profile_flags(simulate, sim_model);
    add_point_flags(simulate, sim_model);
    CLI::Option* sim_warmup = add_sim_flags(simulate, sim_opts, 1);
    simulate->add_option("--trace", sim_trace, "write a per-slot event trace (single replication)");

    ModelOpts sweep_model;
    SimOpts sweep_sim;
    std::string sweep_flag, sweep_out, sweep_spec_path;
    bool sweep_with_sim = false;
    auto* sweep = app.add_subcommand("sweep", "sweep one variable, emit CSV");
    add_profile_flags(sweep, sweep_model);
    add_point_flags(sweep, sweep_model);
    sweep->add_option("--sweep", sweep_flag, "swept variable and grid, var:start:stop:step");
    sweep->add_option("--spec", sweep_spec_path, "JSON experiment spec (replaces the flags above)");
    sweep->add_flag("--sim", sweep_with_sim, "add simulated columns");
    CLI::Option* sweep_warmup = add_sim_flags(sweep, sweep_sim, 5);
    sweep->add_option("--out", sweep_out, "CSV output path (stdout when omitted)");

    ModelOpts cmp_model;
    SimOpts cmp_sim;
    std::string cmp_flag, cmp_spec_path;
    auto* cmp = app.add_subcommand("compare", "validate analytics against simulation over a sweep");
    add_profile_flags(cmp, cmp_model);
    add_point_flags(cmp, cmp_model);
    cmp->add_option("--sweep", cmp_flag, "swept variable and grid, var:start:stop:step");
    cmp->add_option("--spec", cmp_spec_path, "JSON experiment spec (replaces the flags above)");
    CLI::Option* cmp_warmup = add_sim_flags(cmp, cmp_sim, 5);

    std::string phy_path;
    std::uint64_t phy_mc = 0, phy_seed = 1;
    auto* phy = app.add_subcommand("phy", "derive the link profile from a channel scenario file");
    phy->add_option("scenario", phy_path, "scenario JSON path")->required();
    phy->add_option("--mc", phy_mc, "also estimate each probability from this many fading samples");
    phy->add_option("--seed", phy_seed, "RNG seed for --mc")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (analyze->parsed()) return cmd_analyze(an_model);
        if (simulate->parsed()) {
            sim_opts.warmup_set = sim_warmup->count() > 0;
            return cmd_simulate(sim_model, sim_opts, sim_trace);
        }
        if (sweep->parsed()) {
            sweep_sim.warmup_set = sweep_warmup->count() > 0;
            cogmpr::ExperimentSpec spec;
            if (!sweep_spec_path.empty()) {
                spec = cogmpr::load_spec(sweep_spec_path);
                if (!sweep_out.empty()) spec.out_path = sweep_out;
            } else {
                if (sweep_flag.empty())
                    throw cogmpr::ParameterError("sweep requires --sweep var:start:stop:step or --spec");
                spec = build_spec(sweep_model, sweep_flag, sweep_with_sim, sweep_sim, sweep_out);
            }
            return cmd_sweep(spec);
        }
        if (cmp->parsed()) {
            cmp_sim.warmup_set = cmp_warmup->count() > 0;
            cogmpr::ExperimentSpec spec;
            if (!cmp_spec_path.empty()) {
                spec = cogmpr::load_spec(cmp_spec_path);
                if (!spec.sim) throw cogmpr::ParameterError("compare spec needs a sim section");
            } else {
                if (cmp_flag.empty())
                    throw cogmpr::ParameterError("compare requires --sweep var:start:stop:step or --spec");
                spec = build_spec(cmp_model, cmp_flag, true, cmp_sim, "");
            }
            return cmd_compare(spec);
        }
        if (phy->parsed()) return cmd_phy(phy_path, phy_mc, phy_seed);
    } catch (const cogmpr::IoError& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return 2;
    } catch (const cogmpr::StabilityError& e) {
        std::cerr << "stability error: " << e.what() << '\n';
        return 1;
    } catch (const cogmpr::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
