// Command-line driver: batch analysis, script REPL, benchmarks, self-checks.

#include <CLI11.hpp>

#include <filesystem>
#include <future>
#include <iostream>
#include <thread>

#include "dai/domain/constant.hpp"
#include "dai/domain/interval.hpp"
#include "dai/domain/sign.hpp"
#include "dai/oracle/inline.hpp"
#include "dai/session/script.hpp"
#include "dai/workload/run.hpp"

namespace fs = std::filesystem;
using namespace dai;

namespace {

struct Options {
    std::string domain = "interval";
    std::string mode = "eq";
    int ctx = 0;
    std::string file;
    std::string loc;
    std::string proc = "main";
    std::string script;
    std::string out = "bench_out";
    bool debug = false;
    std::uint64_t seed = 1;
    std::size_t edits = 1000;
    std::size_t trials = 3;
    std::size_t queries = 5;
    std::size_t steps = 200;
    std::size_t jobs = 0;
};

Convergence convergence(const Options& o) { return o.mode == "leq" ? Convergence::Leq : Convergence::Equal; }

template <class F>
int with_domain(const std::string& id, F&& f) {
    if (id == "sign") return f(SignDomain{});
    if (id == "const") return f(ConstDomain{});
    return f(IntervalDomain{});
}

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ValidationError("cannot read " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

Loc pick_loc(const std::string& w, const Cfg& cfg) {
    if (w == "exit") return cfg.exit();
    if (w == "entry") return cfg.entry();
    auto r = parse_command("query main " + w);
    return resolve(std::get<QueryCmd>(*r).at, cfg);
}

template <AbstractDomain D>
int analyze(const Options& o, const D& dom) {
    Program p = parse_program(slurp(o.file));
    Cfg cfg = inline_calls(p, o.proc);
    BatchResult<D> r = batch_analyze(cfg, dom, convergence(o));
    const Cfg& orig = p.proc(o.proc).cfg;
    auto show = [&](Loc l) { return dom.to_string(project_inlined(r.invariants.at(l))); };
    if (!o.loc.empty()) {
        std::cout << show(pick_loc(o.loc, orig)) << '\n';
        return 0;
    }
    for (Loc l : orig.locs()) std::cout << to_string(l) << ' ' << show(l) << '\n';
    return 0;
}

template <AbstractDomain D>
int repl(const Options& o, const D& dom) {
    Program p = parse_program(slurp(o.file));
    EngineOptions eo{convergence(o), true, o.debug};
    Session<D> s(std::move(p), o.ctx, dom, eo);
    int status = 0;
    std::string text;
    for (int line = 1; std::getline(std::cin, text); ++line) {
        try {
            std::string r = s.run_line(text, line);
            if (!r.empty()) std::cout << r << '\n';
        } catch (const ParseError& e) {
            std::cout << "error: " << e.what() << '\n';
            status = 1;
        } catch (const ValidationError& e) {
            std::cout << "error: line " << line << ": " << e.what() << '\n';
            status = 1;
        }
        std::cout.flush();
    }
    return status;
}

template <AbstractDomain D>
int bench(const Options& o, const D& dom) {
    fs::create_directories(o.out);
    std::size_t jobs = o.jobs ? o.jobs : std::max(1u, std::thread::hardware_concurrency());
    struct Trial {
        WorkloadSpec spec;
        std::vector<RunResult> runs;
    };
    std::vector<Trial> trials(o.trials);
    auto run_trial = [&](std::size_t t) {
        WorkloadSpec spec;
        spec.seed = o.seed + t;
        spec.edit_count = o.edits;
        spec.queries_per_edit = o.queries;
        spec.convergence = convergence(o);
        auto stream = gen_stream(spec);
        trials[t].spec = spec;
        for (Config c : kAllConfigs) trials[t].runs.push_back(run_config(spec, c, stream, t, dom));
    };
    // trials are independent; each owns its engines
    for (std::size_t start = 0; start < o.trials; start += jobs) {
        std::vector<std::future<void>> fut;
        for (std::size_t t = start; t < std::min(o.trials, start + jobs); ++t)
            fut.push_back(std::async(jobs > 1 ? std::launch::async : std::launch::deferred, run_trial, t));
        for (auto& f : fut) f.get();
    }

    int status = 0;
    std::vector<Summary> rows;
    for (std::size_t ci = 0; ci < std::size(kAllConfigs); ++ci) {
        Config c = kAllConfigs[ci];
        std::ofstream csv(fs::path(o.out) / (std::string(to_string(c)) + ".csv"), std::ios::binary);
        std::ofstream ans(fs::path(o.out) / (std::string(to_string(c)) + "_answers.csv"), std::ios::binary);
        ans << "trial,seed,query_index,answer\n";
        std::vector<std::int64_t> samples;
        for (std::size_t t = 0; t < trials.size(); ++t) {
            const RunResult& r = trials[t].runs[ci];
            write_csv(csv, r.records, t == 0);
            for (std::size_t i = 0; i < r.answers.size(); ++i)
                ans << t << ',' << trials[t].spec.seed << ',' << i << ",\"" << r.answers[i] << "\"\n";
            samples.insert(samples.end(), r.samples.begin(), r.samples.end());
            if (r.answers != trials[t].runs[0].answers) {
                std::cerr << "answers of " << to_string(c) << " differ from batch in trial " << t << '\n';
                status = 2;
            }
        }
        rows.push_back(summarize(to_string(c), samples));
    }
    std::ofstream sum(fs::path(o.out) / "summary.csv", std::ios::binary);
    write_summary_csv(sum, rows);
    std::cout << render_summary(rows);
    for (std::size_t t = 0; t < trials.size(); ++t) {
        std::cout << "trial " << t << " seed " << trials[t].spec.seed << " transfer_evals:";
        for (const auto& r : trials[t].runs) std::cout << ' ' << to_string(r.config) << '=' << r.totals.transfer_evals;
        std::cout << '\n';
    }
    if (rows[3].p95 > 0)
        std::cout << "batch/incremental_demand_driven p95 ratio: "
                  << static_cast<double>(rows[0].p95) / static_cast<double>(rows[3].p95) << '\n';
    return status;
}

template <AbstractDomain D>
void compare_with_batch(DaigForest<D>& f, const D& dom, Convergence conv) {
    Cfg inl = inline_calls(f.program(), "main");
    BatchResult<D> b = batch_analyze(inl, dom, conv);
    for (Loc l : f.program().main().locs()) {
        std::string want = dom.to_string(project_inlined(b.invariants.at(l)));
        std::string got = dom.to_string(f.query("main", {}, l));
        if (want != got)
            throw InvariantViolation("main " + to_string(l) + ": demanded " + got + " but batch gives " + want);
    }
}

template <AbstractDomain D>
int check(const Options& o, const D& dom) {
    Program p = parse_program(slurp(o.file));
    std::cout << "parsed " << p.procs.size() << " procedure(s)\n";
    for (const auto& [name, pr] : p.procs) {
        Engine<D> e(pr.cfg, dom, {convergence(o), true, true});
        auto errs = e.check_all();
        if (!errs.empty()) throw InvariantViolation(name + ": " + errs.front());
        std::cout << name << ": " << pr.cfg.num_locs() << " locations, " << e.daig().cells().size()
                  << " cells, initial graph well-formed and consistent\n";
    }
    EngineOptions eo{convergence(o), true, true};
    Session<D> s(p, o.ctx, dom, eo);
    std::size_t n = 0;
    if (!o.script.empty()) {
        std::istringstream is(slurp(o.script));
        std::string text;
        for (int line = 1; std::getline(is, text); ++line)
            if (parse_command(text, line)) {
                s.run_line(text, line);
                ++n;
            }
    } else {
        Rng rng(o.seed);
        StmtGen g;
        for (std::size_t i = 0; i < o.steps; ++i, ++n) {
            const Cfg& cfg = s.forest().program().main();
            if (gen_detail::coin(rng, 0.3)) {
                s.forest().edit("main", gen_edit(rng, cfg, g));
            } else {
                const auto& locs = cfg.locs();
                s.forest().query("main", {}, locs[std::uniform_int_distribution<std::size_t>(0, locs.size() - 1)(rng)]);
            }
        }
    }
    auto errs = s.forest().check_all();
    if (!errs.empty()) throw InvariantViolation(errs.front());
    compare_with_batch(s.forest(), dom, convergence(o));
    std::cout << "session of " << n << " step(s): all checks passed\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Demanded abstract interpretation: batch analysis, incremental sessions, benchmarks"};
    app.require_subcommand(1);
    Options o;
    auto common = [&](CLI::App* c) {
        c->add_option("--domain", o.domain, "abstract domain")->check(CLI::IsMember({"sign", "const", "interval"}));
        c->add_option("--mode", o.mode, "loop convergence test")->check(CLI::IsMember({"eq", "leq"}));
    };
    auto* an = app.add_subcommand("analyze", "batch-analyze a program and print invariants");
    an->add_option("file", o.file)->required()->check(CLI::ExistingFile);
    an->add_option("--loc", o.loc, "location id, 'entry' or 'exit' (default: all)");
    an->add_option("--proc", o.proc, "procedure");
    common(an);

    auto* rp = app.add_subcommand("repl", "run session-script commands from stdin");
    rp->add_option("file", o.file)->required()->check(CLI::ExistingFile);
    rp->add_option("--ctx", o.ctx, "call-string length")->check(CLI::Range(0, 2));
    rp->add_flag("--debug", o.debug, "run all checkers after every operation");
    common(rp);

    auto* bn = app.add_subcommand("bench", "run the four configurations on random edit streams");
    bn->add_option("--edits", o.edits)->check(CLI::PositiveNumber);
    bn->add_option("--trials", o.trials)->check(CLI::PositiveNumber);
    bn->add_option("--queries", o.queries, "queries per edit")->check(CLI::PositiveNumber);
    bn->add_option("--seed", o.seed);
    bn->add_option("--out", o.out, "output directory");
    bn->add_option("--jobs", o.jobs, "parallel trials (default: hardware threads)");
    common(bn);

    auto* ck = app.add_subcommand("check", "validate a program and a checked session over it");
    ck->add_option("file", o.file)->required()->check(CLI::ExistingFile);
    ck->add_option("--script", o.script, "session script to replay")->check(CLI::ExistingFile);
    ck->add_option("--steps", o.steps, "random steps when no script is given");
    ck->add_option("--seed", o.seed);
    ck->add_option("--ctx", o.ctx, "call-string length")->check(CLI::Range(0, 2));
    common(ck);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        return with_domain(o.domain, [&](const auto& dom) {
            if (an->parsed()) return analyze(o, dom);
            if (rp->parsed()) return repl(o, dom);
            if (bn->parsed()) return bench(o, dom);
            return check(o, dom);
        });
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return 1;
    } catch (const ValidationError& e) {
        std::cerr << "invalid: " << e.what() << '\n';
        return 1;
    } catch (const InvariantViolation& e) {
        std::cerr << "invariant violation: " << e.what() << '\n';
        return 2;
    } catch (const ContractViolation& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 2;
    }
}
