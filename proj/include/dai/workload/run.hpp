#pragma once

// Synthetic edit/query workloads over the four analysis configurations.

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "dai/demand/engine.hpp"
#include "dai/oracle/batch.hpp"
#include "dai/workload/generator.hpp"

namespace dai {

enum class Config { Batch, Incremental, DemandDriven, IncrementalDemandDriven };

inline const char* to_string(Config c) {
    switch (c) {
    case Config::Batch: return "batch";
    case Config::Incremental: return "incremental";
    case Config::DemandDriven: return "demand_driven";
    case Config::IncrementalDemandDriven: return "incremental_demand_driven";
    }
    return "?";
}

inline constexpr Config kAllConfigs[] = {Config::Batch, Config::Incremental, Config::DemandDriven,
                                         Config::IncrementalDemandDriven};

struct WorkloadSpec {
    std::uint64_t seed = 0;
    std::size_t edit_count = 1000;
    std::size_t queries_per_edit = 5;
    GenParams gen;
    Convergence convergence = Convergence::Equal;
};

struct WorkloadStep {
    ProgramEdit edit;
    std::vector<Loc> queries;
};

// Edits and query locations, generated by simulating the edits from an
// empty `main`. Identical for every configuration.
inline std::vector<WorkloadStep> gen_stream(const WorkloadSpec& spec, Cfg* final_cfg = nullptr) {
    Rng rng(spec.seed);
    StmtGen g(spec.gen);
    Cfg cfg = parse_program("fn main() {}").main();
    std::vector<WorkloadStep> out;
    out.reserve(spec.edit_count);
    for (std::size_t i = 0; i < spec.edit_count; ++i) {
        WorkloadStep st{gen_edit(rng, cfg, g), {}};
        cfg = apply_edit(cfg, st.edit).cfg;
        const auto& locs = cfg.locs();
        for (std::size_t q = 0; q < spec.queries_per_edit; ++q)
            st.queries.push_back(locs[std::uniform_int_distribution<std::size_t>(0, locs.size() - 1)(rng)]);
        out.push_back(std::move(st));
    }
    if (final_cfg) *final_cfg = cfg;
    return out;
}

struct LatencyRecord {
    std::size_t trial = 0;
    std::uint64_t seed = 0;
    Config config = Config::Batch;
    std::size_t edit_index = 0;
    std::string op; // edit | analyze | query
    std::int64_t latency_ns = 0;
    std::size_t program_locs = 0;
    std::uint64_t transfer_evals = 0;
    std::uint64_t join_evals = 0;
    std::uint64_t widen_evals = 0;
    std::uint64_t memo_hits = 0;
    std::uint64_t cells_dirtied = 0;
};

struct RunResult {
    Config config = Config::Batch;
    std::vector<LatencyRecord> records;
    // canonical serialization of every query answer, in stream order
    std::vector<std::string> answers;
    // per-edit (exhaustive) or per-query (demand) latency samples
    std::vector<std::int64_t> samples;
    Metrics totals;
};

namespace run_detail {

using Clock = std::chrono::steady_clock;

inline std::int64_t since(Clock::time_point t0) {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - t0).count();
}

} // namespace run_detail

template <AbstractDomain D>
RunResult run_config(const WorkloadSpec& spec, Config config, const std::vector<WorkloadStep>& stream,
                     std::size_t trial = 0, const D& dom = D{}) {
    using namespace run_detail;
    RunResult r;
    r.config = config;
    Cfg cfg = parse_program("fn main() {}").main();
    EngineOptions opt{spec.convergence, true, false};
    std::unique_ptr<Engine<D>> eng;
    if (config != Config::Batch) eng = std::make_unique<Engine<D>>(cfg, dom, opt);
    Metrics acc; // counters of engines already discarded, and of batch runs

    auto snapshot = [&](std::size_t i, const char* op, std::int64_t ns) {
        Metrics m = acc;
        if (eng) m += eng->metrics();
        LatencyRecord rec{trial, spec.seed, config, i, op, ns, eng ? eng->cfg().num_locs() : cfg.num_locs(),
                          m.transfer_evals, m.join_evals, m.widen_evals, m.memo_hits, m.cells_dirtied};
        r.records.push_back(rec);
    };

    for (std::size_t i = 0; i < stream.size(); ++i) {
        const WorkloadStep& st = stream[i];
        if (config == Config::Batch) {
            auto t0 = Clock::now();
            cfg = apply_edit(cfg, st.edit).cfg;
            std::int64_t edit_ns = since(t0);
            snapshot(i, "edit", edit_ns);
            t0 = Clock::now();
            BatchResult<D> br = batch_analyze(cfg, dom, spec.convergence);
            std::int64_t an_ns = since(t0);
            acc.transfer_evals += br.stats.transfer_evals;
            acc.join_evals += br.stats.join_evals;
            acc.widen_evals += br.stats.widen_evals;
            snapshot(i, "analyze", an_ns);
            r.samples.push_back(edit_ns + an_ns);
            for (Loc q : st.queries) {
                t0 = Clock::now();
                r.answers.push_back(dom.to_string(br.invariants.at(q)));
                snapshot(i, "query", since(t0));
            }
            continue;
        }

        auto t0 = Clock::now();
        if (config == Config::DemandDriven) {
            Cfg next = apply_edit(eng->cfg(), st.edit).cfg;
            acc += eng->metrics();
            eng = std::make_unique<Engine<D>>(std::move(next), dom, opt);
        } else {
            eng->apply_program_edit(st.edit);
        }
        std::int64_t edit_ns = since(t0);
        snapshot(i, "edit", edit_ns);

        if (config == Config::Incremental) {
            t0 = Clock::now();
            for (Loc l : eng->cfg().locs()) eng->query_loc(l);
            std::int64_t an_ns = since(t0);
            snapshot(i, "analyze", an_ns);
            r.samples.push_back(edit_ns + an_ns);
        }
        bool first = true;
        for (Loc q : st.queries) {
            t0 = Clock::now();
            auto v = eng->query_loc(q);
            std::int64_t q_ns = since(t0);
            r.answers.push_back(dom.to_string(v));
            snapshot(i, "query", q_ns);
            if (config != Config::Incremental) {
                r.samples.push_back(q_ns + (first ? edit_ns : 0));
                first = false;
            }
        }
    }
    r.totals = acc;
    if (eng) r.totals += eng->metrics();
    return r;
}

inline void write_csv(std::ostream& os, const std::vector<LatencyRecord>& recs, bool header = true) {
    if (header)
        os << "trial,seed,config,edit_index,op,latency_ns,program_locs,transfer_evals,join_evals,widen_evals,"
              "memo_hits,cells_dirtied\n";
    for (const auto& r : recs)
        os << r.trial << ',' << r.seed << ',' << to_string(r.config) << ',' << r.edit_index << ',' << r.op << ','
           << r.latency_ns << ',' << r.program_locs << ',' << r.transfer_evals << ',' << r.join_evals << ','
           << r.widen_evals << ',' << r.memo_hits << ',' << r.cells_dirtied << '\n';
}

struct Summary {
    std::string name;
    std::size_t n = 0;
    double mean = 0;
    std::int64_t p50 = 0, p90 = 0, p95 = 0, p99 = 0;
};

// Nearest-rank percentile of an ascending sample.
inline std::int64_t percentile(const std::vector<std::int64_t>& sorted, double p) {
    if (sorted.empty()) throw ContractViolation("percentile of an empty sample");
    auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(sorted.size())));
    rank = std::clamp<std::size_t>(rank, 1, sorted.size());
    return sorted[rank - 1];
}

inline Summary summarize(std::string name, std::vector<std::int64_t> samples) {
    if (samples.empty()) throw ContractViolation("summary of an empty sample");
    std::sort(samples.begin(), samples.end());
    Summary s;
    s.name = std::move(name);
    s.n = samples.size();
    long double sum = 0;
    for (auto v : samples) sum += v;
    s.mean = static_cast<double>(sum / samples.size());
    s.p50 = percentile(samples, 50);
    s.p90 = percentile(samples, 90);
    s.p95 = percentile(samples, 95);
    s.p99 = percentile(samples, 99);
    return s;
}

inline void write_summary_csv(std::ostream& os, const std::vector<Summary>& rows) {
    os << "config,samples,mean_ns,p50_ns,p90_ns,p95_ns,p99_ns\n";
    for (const auto& s : rows)
        os << s.name << ',' << s.n << ',' << static_cast<std::int64_t>(s.mean) << ',' << s.p50 << ',' << s.p90 << ','
           << s.p95 << ',' << s.p99 << '\n';
}

inline std::string render_summary(const std::vector<Summary>& rows) {
    auto ms = [](double ns) {
        std::ostringstream o;
        o << std::fixed << std::setprecision(3) << ns / 1e6;
        return o.str();
    };
    std::ostringstream os;
    os << std::left << std::setw(28) << "config" << std::right << std::setw(9) << "samples" << std::setw(12)
       << "mean ms" << std::setw(12) << "p50 ms" << std::setw(12) << "p90 ms" << std::setw(12) << "p95 ms"
       << std::setw(12) << "p99 ms" << '\n';
    for (const auto& s : rows)
        os << std::left << std::setw(28) << s.name << std::right << std::setw(9) << s.n << std::setw(12) << ms(s.mean)
           << std::setw(12) << ms(static_cast<double>(s.p50)) << std::setw(12) << ms(static_cast<double>(s.p90))
           << std::setw(12) << ms(static_cast<double>(s.p95)) << std::setw(12) << ms(static_cast<double>(s.p99))
           << '\n';
    return os.str();
}

} // namespace dai
