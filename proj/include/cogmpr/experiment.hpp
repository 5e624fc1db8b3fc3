#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "cogmpr/errors.hpp"
#include "cogmpr/simulator.hpp"
#include "cogmpr/throughput.hpp"

namespace cogmpr {

enum class SweepVar { access_prob, arrival_rate, congestion_limit };

inline std::string_view sweep_var_name(SweepVar v) {
    switch (v) {
    case SweepVar::access_prob: return "q";
    case SweepVar::arrival_rate: return "lambda";
    default: return "M";
    }
}

inline SweepVar parse_sweep_var(std::string_view name) {
    if (name == "q") return SweepVar::access_prob;
    if (name == "lambda") return SweepVar::arrival_rate;
    if (name == "M") return SweepVar::congestion_limit;
    throw ParameterError("unknown sweep variable '" + std::string(name) + "' (expected q, lambda or M)");
}

/// Inclusive grid start, start+step, ... up to stop.
struct SweepRange {
    SweepVar var = SweepVar::access_prob;
    double start = 0.0;
    double stop = 0.0;
    double step = 0.1;

    void validate() const {
        if (!(step > 0.0)) throw ParameterError("sweep step must be > 0");
        if (!(stop >= start)) throw ParameterError("sweep stop must be >= start");
        if (var == SweepVar::congestion_limit) {
            for (double v : values())
                if (std::abs(v - std::round(v)) > 1e-9)
                    throw ParameterError("M sweep values must be integers, got " + std::to_string(v));
        }
    }

    std::vector<double> values() const {
        if (!(step > 0.0)) throw ParameterError("sweep step must be > 0");
        std::vector<double> vs;
        // values from start by index, not by accumulation; tiny slack keeps
        // the endpoint inclusive under rounding
        for (std::size_t i = 0;; ++i) {
            const double v = start + static_cast<double>(i) * step;
            if (v > stop + step * 1e-9) break;
            vs.push_back(v);
        }
        return vs;
    }
};

struct SimSettings {
    std::uint64_t slots = 1'000'000;
    std::optional<std::uint64_t> warmup;
    std::uint32_t replications = 5;
    std::uint64_t seed = 1;
};

/// A sweep description: the link profile, which knob moves, and the values
/// the fixed knobs keep.
struct ExperimentSpec {
    LinkSuccessProfile profile;
    SweepRange sweep;
    double arrival_rate = 0.3;
    double access_prob = 0.9;
    int congestion_limit = 2;
    std::optional<SimSettings> sim;
    std::optional<std::string> out_path;

    ProtocolParams params_at(double swept_value) const {
        ProtocolParams p{arrival_rate, access_prob, congestion_limit};
        switch (sweep.var) {
        case SweepVar::access_prob: p.access_prob = swept_value; break;
        case SweepVar::arrival_rate: p.arrival_rate = swept_value; break;
        case SweepVar::congestion_limit:
            p.congestion_limit = static_cast<int>(std::llround(swept_value));
            break;
        }
        return p;
    }

    void validate() const {
        profile.validate();
        sweep.validate();
        for (double v : sweep.values()) params_at(v).validate();
        if (sim) {
            if (sim->slots < 1) throw ParameterError("sim.slots must be >= 1");
            if (sim->warmup && *sim->warmup >= sim->slots)
                throw ParameterError("sim.warmup must be < sim.slots");
            if (sim->replications < 1) throw ParameterError("sim.replications must be >= 1");
        }
    }
};

/// One CSV record. Analytical columns are set only for stable points;
/// simulated columns only when the spec asked for simulation. Field names
/// mirror the CSV schema.
struct SweepRow {
    SweepVar var = SweepVar::access_prob;
    double value = 0.0;
    double mu1 = 0.0;
    double mu2 = 0.0;
    bool stable = false;
    std::optional<double> pi0;
    std::optional<double> prob_band;
    std::optional<double> ts;
    std::optional<double> taggr;
    std::optional<double> ts_sim;
    std::optional<double> ts_ci;
    std::optional<double> taggr_sim;
    std::optional<double> taggr_ci;
};

inline constexpr std::string_view kCsvHeader =
    "swept_var,value,mu1,mu2,stable,pi0,prob_band,Ts,Taggr,Ts_sim,Ts_ci,Taggr_sim,Taggr_ci";

namespace detail {

inline std::string format_sig10(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

inline std::string format_opt(const std::optional<double>& x) {
    return x ? format_sig10(*x) : std::string();
}

inline double parse_double_field(const std::string& field, std::size_t line, const char* column) {
    const char* begin = field.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0' || !std::isfinite(v))
        throw ParseError("line " + std::to_string(line) + ": column " + column +
                         ": expected a number, got '" + field + "'");
    return v;
}

inline std::optional<double> parse_opt_field(const std::string& field, std::size_t line, const char* column) {
    if (field.empty()) return std::nullopt;
    return parse_double_field(field, line, column);
}

struct PointResult {
    SweepRow row;
    std::optional<SimStats> stats;
};

/// Shared per-point evaluation for run_sweep and compare. Simulation seeds
/// derive from the sweep seed by point index, so a sweep is reproducible as
/// a whole without coupling the points' streams.
inline PointResult evaluate_point(const ExperimentSpec& spec, double value, std::size_t index) {
    PointResult out;
    SweepRow& row = out.row;
    row.var = spec.sweep.var;
    row.value = value;

    const ProtocolParams params = spec.params_at(value);
    const ServiceRates rates = service_rates(spec.profile, params.access_prob);
    row.mu1 = rates.mu_contended;
    row.mu2 = rates.mu_exclusive;
    row.stable = is_stable(params, rates);

    if (row.stable) {
        const ThroughputReport rep = aggregate_throughput(params, rates, spec.profile);
        const QueueDistribution dist = stationary_distribution(params, rates);
        row.pi0 = dist.p_empty;
        row.prob_band = dist.p_band;
        row.ts = rep.t_secondary;
        row.taggr = rep.t_aggregate;
    }
    if (spec.sim) {
        SimConfig cfg;
        cfg.params = params;
        cfg.profile = spec.profile;
        cfg.slots = spec.sim->slots;
        cfg.warmup = spec.sim->warmup;
        cfg.replications = spec.sim->replications;
        cfg.seed = stream_seed(spec.sim->seed, index);
        SimStats stats = replicate(cfg);
        row.ts_sim = stats.t_secondary.mean;
        row.ts_ci = stats.t_secondary.ci_half;
        row.taggr_sim = stats.t_aggregate.mean;
        row.taggr_ci = stats.t_aggregate.ci_half;
        out.stats = std::move(stats);
    }
    return out;
}

} // namespace detail

inline std::string to_csv(const std::vector<SweepRow>& rows) {
    std::string out{kCsvHeader};
    out += '\n';
    for (const auto& r : rows) {
        out += sweep_var_name(r.var);
        out += ',';
        out += detail::format_sig10(r.value);
        out += ',';
        out += detail::format_sig10(r.mu1);
        out += ',';
        out += detail::format_sig10(r.mu2);
        out += ',';
        out += r.stable ? "true" : "false";
        for (const auto* f : {&r.pi0, &r.prob_band, &r.ts, &r.taggr, &r.ts_sim, &r.ts_ci,
                              &r.taggr_sim, &r.taggr_ci}) {
            out += ',';
            out += detail::format_opt(*f);
        }
        out += '\n';
    }
    return out;
}

inline std::vector<SweepRow> parse_csv(const std::string& text) {
    std::vector<SweepRow> rows;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (lineno == 1) {
            if (line != kCsvHeader)
                throw ParseError("line 1: unexpected header '" + line + "'");
            continue;
        }
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t pos = 0;
        while (true) {
            const std::size_t comma = line.find(',', pos);
            fields.push_back(line.substr(pos, comma - pos));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (fields.size() != 13)
            throw ParseError("line " + std::to_string(lineno) + ": expected 13 columns, got " +
                             std::to_string(fields.size()));
        SweepRow r;
        try {
            r.var = parse_sweep_var(fields[0]);
        } catch (const ParameterError& e) {
            throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
        }
        r.value = detail::parse_double_field(fields[1], lineno, "value");
        r.mu1 = detail::parse_double_field(fields[2], lineno, "mu1");
        r.mu2 = detail::parse_double_field(fields[3], lineno, "mu2");
        if (fields[4] == "true")
            r.stable = true;
        else if (fields[4] == "false")
            r.stable = false;
        else
            throw ParseError("line " + std::to_string(lineno) + ": column stable: expected true or false, got '" +
                             fields[4] + "'");
        r.pi0 = detail::parse_opt_field(fields[5], lineno, "pi0");
        r.prob_band = detail::parse_opt_field(fields[6], lineno, "prob_band");
        r.ts = detail::parse_opt_field(fields[7], lineno, "Ts");
        r.taggr = detail::parse_opt_field(fields[8], lineno, "Taggr");
        r.ts_sim = detail::parse_opt_field(fields[9], lineno, "Ts_sim");
        r.ts_ci = detail::parse_opt_field(fields[10], lineno, "Ts_ci");
        r.taggr_sim = detail::parse_opt_field(fields[11], lineno, "Taggr_sim");
        r.taggr_ci = detail::parse_opt_field(fields[12], lineno, "Taggr_ci");
        rows.push_back(std::move(r));
    }
    if (lineno == 0) throw ParseError("empty CSV input");
    return rows;
}

/// Writes via a temp file in the same directory, then renames, so readers
/// never observe a partial file.
inline void write_csv(const std::vector<SweepRow>& rows, const std::string& path) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp + " for writing");
        out << to_csv(rows);
        out.flush();
        if (!out) throw IoError("failed writing " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename " + tmp + " to " + path + ": " + ec.message());
}

inline std::vector<SweepRow> read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_csv(buf.str());
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

/// Evaluates every sweep point; analytical columns where stable, simulated
/// columns when requested, CSV to spec.out_path when set.
inline std::vector<SweepRow> run_sweep(const ExperimentSpec& spec) {
    spec.validate();
    const auto values = spec.sweep.values();
    std::vector<SweepRow> rows;
    rows.reserve(values.size());
    for (std::size_t i = 0; i < values.size(); ++i)
        rows.push_back(detail::evaluate_point(spec, values[i], i).row);
    if (spec.out_path) write_csv(rows, *spec.out_path);
    return rows;
}

/// One analytic-vs-simulated check: pass iff the analytical value sits
/// within 4 standard errors of the simulated mean.
struct StatCheck {
    const char* name = "";
    double analytic = 0.0;
    double simulated = 0.0;
    double std_error = 0.0;
    bool pass = false;
};

struct ComparePoint {
    double value = 0.0;
    bool stable = false;
    std::vector<StatCheck> checks; ///< empty for unstable points
};

struct CompareReport {
    SweepVar var = SweepVar::access_prob;
    std::vector<ComparePoint> points;
    std::size_t stable_points = 0;
    std::size_t failed_checks = 0;
    bool pass = true;
};

/// Validation harness over a sweep: runs analytics and simulation side by
/// side; only stable points are judged.
inline CompareReport compare(const ExperimentSpec& spec) {
    spec.validate();
    if (!spec.sim) throw ParameterError("compare requires simulation settings");
    CompareReport report;
    report.var = spec.sweep.var;
    const auto values = spec.sweep.values();
    for (std::size_t i = 0; i < values.size(); ++i) {
        const auto pr = detail::evaluate_point(spec, values[i], i);
        ComparePoint point;
        point.value = values[i];
        point.stable = pr.row.stable;
        if (pr.row.stable) {
            ++report.stable_points;
            const SimStats& st = *pr.stats;
            auto add = [&](const char* name, double analytic, const StatSummary& s) {
                StatCheck c;
                c.name = name;
                c.analytic = analytic;
                c.simulated = s.mean;
                c.std_error = s.std_error.value_or(0.0);
                c.pass = std::abs(analytic - s.mean) <= 4.0 * c.std_error;
                if (!c.pass) {
                    ++report.failed_checks;
                    report.pass = false;
                }
                point.checks.push_back(c);
            };
            add("Ts", *pr.row.ts, st.t_secondary);
            add("Taggr", *pr.row.taggr, st.t_aggregate);
            add("pi0", *pr.row.pi0, st.frac_empty);
            add("prob_band", *pr.row.prob_band, st.frac_band);
        }
        report.points.push_back(std::move(point));
    }
    return report;
}

} // namespace cogmpr
