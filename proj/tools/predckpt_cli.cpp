// predckpt: analyze, simulate and sweep checkpointing strategies that use
// fault predictions; export and import event traces.

#include "predckpt/harness.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace predckpt;

namespace
{

/// Flags shared by every subcommand; durations stay strings until resolved.
struct CommonArgs
{
    std::uint64_t n = 65536;
    std::string mtbf_ind = "125y";
    std::string c = "10mn";
    std::string d = "1mn";
    std::string r_rec = "10mn";
    std::string migration;
    double recall = 0.85;
    double precision = 0.82;
    std::string window = "0";
    std::string window_law = "uniform";
    double alpha = kDefaultAlpha;
    std::string dist = "exp";
    std::string false_law = "same";
    std::string fault_process = "platform";
    std::string false_process = "platform";
    std::string processor_age = "0";
    std::string overlap = "drop";
    bool table_protocol = false;
    std::string base_work;
    std::string total_work;
};

struct RunArgs
{
    std::vector<std::string> strategies{"Young", "ExactPrediction", "Instant", "NoCkptI",
                                        "WithCkptI"};
    std::string q = "1";
    bool capped = false;
    int reps = 100;
    bool fast = false;
    std::uint64_t seed = 1;
    bool best_period = false;
    int grid_points = 25;
    std::string out;
    std::string log;
};

void add_common(CLI::App* app, CommonArgs& a)
{
    app->add_option("--n", a.n, "Number of processors")->capture_default_str();
    app->add_option("--mtbf-ind", a.mtbf_ind, "Individual processor MTBF")->capture_default_str();
    app->add_option("--c", a.c, "Checkpoint duration C")->capture_default_str();
    app->add_option("--d", a.d, "Downtime D")->capture_default_str();
    app->add_option("--r-rec", a.r_rec, "Recovery duration R")->capture_default_str();
    app->add_option("--m", a.migration, "Migration duration M (analyze only)");
    app->add_option("--recall", a.recall, "Predictor recall r")->capture_default_str();
    app->add_option("--precision", a.precision, "Predictor precision p")->capture_default_str();
    app->add_option("--window", a.window, "Prediction window I")->capture_default_str();
    app->add_option("--window-law", a.window_law,
                    "Fault position in the window: uniform, start, custom:<mean offset>")
        ->capture_default_str();
    app->add_option("--alpha", a.alpha, "Validity cap factor")->capture_default_str();
    app->add_option("--dist", a.dist, "Fault law: exp, weibull:<k>, uniform")
        ->capture_default_str();
    app->add_option("--false-law", a.false_law, "False prediction law: same, uniform")
        ->capture_default_str();
    app->add_option("--fault-process", a.fault_process, "platform or per-processor")
        ->capture_default_str();
    app->add_option("--false-process", a.false_process,
                    "Process of false predictions: platform or per-processor")
        ->capture_default_str();
    app->add_option("--processor-age", a.processor_age,
                    "Processor running time before the job (per-processor faults)")
        ->capture_default_str();
    app->add_option("--overlap", a.overlap, "Trusted prediction during a window: drop, restart")
        ->capture_default_str();
    app->add_flag("--table-protocol", a.table_protocol,
                  "Per-processor faults, processors aged 250 days, 10,000 years of sequential work");
    auto* bw = app->add_option("--base-work", a.base_work, "Job work on N processors");
    app->add_option("--total-work", a.total_work, "Sequential job work, divided by N")
        ->excludes(bw);
}

void add_run(CLI::App* app, RunArgs& a, bool with_log)
{
    app->add_option("--strategies", a.strategies, "Strategies to simulate (Young always runs)")
        ->delimiter(',')
        ->capture_default_str();
    app->add_option("--q", a.q, "Trust mode: opt, 0, 1")->capture_default_str();
    app->add_flag("--capped", a.capped, "Use the capped periods instead of the uncapped ones");
    app->add_option("--reps", a.reps, "Replicates per strategy")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app->add_flag("--fast", a.fast, "20 replicates");
    app->add_option("--seed", a.seed, "Base seed")->capture_default_str();
    app->add_flag("--best-period", a.best_period, "Add the brute-force BestPeriod rows");
    app->add_option("--grid-points", a.grid_points, "BestPeriod grid size")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app->add_option("--out", a.out, "CSV output path, '-' for stdout");
    if (with_log)
        app->add_option("--log", a.log, "Event log of replicate 0 of every strategy");
}

WindowLaw parse_window_law(const std::string& text)
{
    if (text == "uniform")
        return WindowLaw::uniform();
    if (text == "start")
        return WindowLaw::at_start();
    if (text.rfind("custom:", 0) == 0)
        return WindowLaw::custom(parse_duration(text.substr(7)));
    throw std::invalid_argument("unknown window law '" + text + "'");
}

Scenario resolve(const CommonArgs& a)
{
    Scenario s;
    std::optional<Seconds> m;
    if (!a.migration.empty())
        m = parse_duration(a.migration);
    s.platform = PlatformParams::make(a.n, parse_duration(a.mtbf_ind), parse_duration(a.c),
                                      parse_duration(a.d), parse_duration(a.r_rec), m);
    s.predictor = PredictorParams::make(a.recall, a.precision, parse_duration(a.window), 1.0,
                                        parse_window_law(a.window_law));
    s.law = a.dist;
    (void)FailureLaw::parse(s.law, 1.0);
    s.false_shape = parse_false_shape(a.false_law);
    s.process = parse_fault_process(a.fault_process);
    s.false_process = parse_fault_process(a.false_process);
    s.processor_age = parse_duration(a.processor_age);
    s.overlap = parse_overlap_policy(a.overlap);
    if (a.table_protocol)
    {
        s.process = FaultProcess::PerProcessor;
        s.processor_age = kTableProcessorAge;
        s.total_work = kTableTotalWork;
    }
    if (!a.total_work.empty())
        s.total_work = parse_duration(a.total_work);
    if (!a.base_work.empty())
        s.base_work = parse_duration(a.base_work);
    return s;
}

SimulateOptions resolve(const RunArgs& a)
{
    SimulateOptions o;
    o.strategies.clear();
    for (const std::string& name : a.strategies)
        o.strategies.push_back(parse_strategy(name));
    o.trust = parse_trust_mode(a.q);
    o.capped = a.capped;
    o.n_reps = a.reps;
    if (a.fast)
    {
        o.n_reps = 20;
        std::cerr << "warning: --fast uses 20 replicates; standard errors are about 2.2x larger "
                     "than with 100\n";
    }
    o.seed = a.seed;
    o.best_period = a.best_period;
    o.grid_points = a.grid_points;
    return o;
}

/// Relative paths land in PREDCKPT_OUTPUT_DIR when it is set.
std::string output_path(const std::string& path)
{
    const char* dir = std::getenv("PREDCKPT_OUTPUT_DIR");
    if (!dir || path == "-" || std::filesystem::path(path).is_absolute())
        return path;
    std::filesystem::create_directories(dir);
    return (std::filesystem::path(dir) / path).string();
}

void emit_csv(const std::string& out, const std::vector<ResultRow>& rows, std::uint64_t seed)
{
    if (out.empty())
        return;
    if (out == "-")
    {
        write_csv(std::cout, rows, seed);
        return;
    }
    const std::string path = output_path(out);
    std::ofstream f(path);
    if (!f)
        throw std::runtime_error("cannot open " + path);
    write_csv(f, rows, seed);
    std::cerr << "wrote " << rows.size() << " rows to " << path << '\n';
}

std::string period_text(const ExtendedDuration& d)
{
    if (d.is_infinite())
        return "inf (no checkpoint)";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.1f mn", d.seconds() / kMinute);
    return buf;
}

void print_plans(const Scenario& s, bool capped, double alpha)
{
    std::printf("%s periods:\n", capped ? "capped" : "uncapped");
    std::printf("  %-16s %2s %20s %10s %10s\n", "strategy", "q*", "T_R*", "T_P*", "waste");
    for (const ResultRow& r : analyze_scenario(s, WasteOptions{alpha, capped}))
    {
        char tp[32] = "-";
        if (r.t_p_s)
            std::snprintf(tp, sizeof tp, "%.1f s", *r.t_p_s);
        std::printf("  %-16s %2d %20s %10s %10.5f\n", r.strategy.c_str(), r.q,
                    period_text(r.t_r_s).c_str(), tp, r.waste_analytic);
    }
}

int cmd_analyze(const CommonArgs& ca, const std::string& out)
{
    const Scenario s = resolve(ca);
    const Seconds mu = platform_mtbf(s.platform);
    std::printf("platform: N=%llu mu=%.1f mn C=%.0f s D=%.0f s R=%.0f s\n",
                static_cast<unsigned long long>(s.platform.n_procs), mu / kMinute,
                s.platform.ckpt, s.platform.downtime, s.platform.recovery);
    std::printf("predictor: r=%g p=%g I=%g s (%s)\n", s.predictor.recall, s.predictor.precision,
                s.predictor.window, s.predictor.window_law.name().c_str());
    print_plans(s, true, ca.alpha);
    print_plans(s, false, ca.alpha);

    const Seconds window = s.predictor.window;
    if (window > 0.0 && s.predictor.recall > 0.0)
    {
        const bool nockpt = dominance_nockpt(s.predictor, s.platform.ckpt);
        std::printf("dominance: %s (I = %g s, uniform-placement threshold %.0f s)\n",
                    nockpt ? "NoCkptI-favorable" : "WithCkptI-favorable", window,
                    uniform_dominance_threshold(s.predictor.precision, s.platform.ckpt));
    }
    else
        std::printf("dominance: n/a (needs I > 0 and r > 0)\n");

    if (!out.empty())
    {
        std::vector<ResultRow> rows = analyze_scenario(s, WasteOptions{ca.alpha, true});
        const std::vector<ResultRow> unc = analyze_scenario(s, WasteOptions{ca.alpha, false});
        rows.insert(rows.end(), unc.begin(), unc.end());
        emit_csv(out, rows, 0);
    }
    return 0;
}

void write_logs(const Scenario& s, const SimulateOptions& o, const std::string& path)
{
    std::ofstream f(output_path(path));
    if (!f)
        throw std::runtime_error("cannot open " + path);
    const JobSpec job = JobSpec::make(s.job_base_work());
    std::vector<Strategy> kinds{Strategy::Young};
    for (Strategy k : o.strategies)
        if (k != Strategy::Young && k != Strategy::Migration &&
            !(k == Strategy::WithCkptI && s.predictor.window < s.platform.ckpt))
            kinds.push_back(k);
    for (Strategy k : kinds)
    {
        const OptimizedPlan plan = plan_for(k, s, o.trust, WasteOptions{o.alpha, o.capped});
        StrategySpec spec = StrategySpec::from_plan(plan);
        spec.overlap = s.overlap;
        f << "## " << to_string(k) << '\n';
        const EventLog log = [&](Seconds t, std::string_view ev, const std::string& detail) {
            f << std::fixed << t << ' ' << ev << (detail.empty() ? "" : " ") << detail << '\n';
        };
        run(job, spec, s.platform, trace_config_for(k, s.trace_config()),
            replicate_seed(o.seed, 0), log);
    }
}

int cmd_simulate(const CommonArgs& ca, const RunArgs& ra)
{
    const Scenario s = resolve(ca);
    SimulateOptions o = resolve(ra);
    o.alpha = ca.alpha;
    const std::vector<ResultRow> rows = simulate_scenario(s, o);
    print_rows(std::cout, rows);
    emit_csv(ra.out, rows, o.seed);
    if (!ra.log.empty())
        write_logs(s, o, ra.log);
    return 0;
}

double parse_axis_value(SweepAxis axis, const std::string& text)
{
    if (axis == SweepAxis::Window)
        return parse_duration(text);
    if (axis == SweepAxis::NProcs && text.rfind("2^", 0) == 0)
        return std::ldexp(1.0, std::stoi(text.substr(2)));
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size())
        throw std::invalid_argument("bad sweep value '" + text + "'");
    return v;
}

int cmd_sweep(const CommonArgs& ca, const RunArgs& ra, const std::string& axis_name,
              const std::vector<std::string>& values)
{
    const Scenario s = resolve(ca);
    SimulateOptions o = resolve(ra);
    o.alpha = ca.alpha;
    const SweepAxis axis = parse_sweep_axis(axis_name);
    std::vector<double> xs;
    for (const std::string& v : values)
        xs.push_back(parse_axis_value(axis, v));
    const std::vector<ResultRow> rows = sweep(s, axis, xs, o);
    print_rows(std::cout, rows);
    emit_csv(ra.out, rows, o.seed);
    return 0;
}

int cmd_trace_export(const CommonArgs& ca, std::uint64_t seed, const std::string& horizon,
                     const std::string& out)
{
    const Scenario s = resolve(ca);
    const Seconds h = horizon.empty() ? 1.5 * s.job_base_work() : parse_duration(horizon);
    const EventTrace trace = generate_trace(s.trace_config(), seed, h);
    if (out.empty() || out == "-")
        write_trace(std::cout, trace);
    else
    {
        const std::string path = output_path(out);
        std::ofstream f(path);
        if (!f)
            throw std::runtime_error("cannot open " + path);
        write_trace(f, trace);
        std::cerr << "wrote " << trace.events.size() << " events to " << path << '\n';
    }
    return 0;
}

int cmd_trace_import(const std::string& in, const std::string& strategy_name,
                     const CommonArgs& ca, std::uint64_t seed)
{
    std::ifstream f(in);
    if (!f)
        throw std::runtime_error("cannot open " + in);
    const EventTrace trace = read_trace(f);
    std::uint64_t unpredicted = 0, true_preds = 0, false_preds = 0;
    for (const TraceEvent& e : trace.events)
        switch (e.kind)
        {
        case EventKind::UnpredictedFault: ++unpredicted; break;
        case EventKind::TruePrediction: ++true_preds; break;
        case EventKind::FalsePrediction: ++false_preds; break;
        }
    const double h = trace.horizon;
    auto mean = [h](std::uint64_t n) { return n ? h / static_cast<double>(n) : INFINITY; };
    std::printf("trace: seed=%llu horizon=%.0f s events=%zu\n",
                static_cast<unsigned long long>(trace.seed), h, trace.events.size());
    std::printf("  unpredicted faults %llu (mean gap %.1f s)\n",
                static_cast<unsigned long long>(unpredicted), mean(unpredicted));
    std::printf("  true predictions   %llu\n", static_cast<unsigned long long>(true_preds));
    std::printf("  false predictions  %llu\n", static_cast<unsigned long long>(false_preds));
    std::printf("  prediction mean gap %.1f s, event mean gap %.1f s\n",
                mean(true_preds + false_preds), mean(trace.events.size()));
    if (strategy_name.empty())
        return 0;

    // Replay: the platform comes from the flags, the predictor from the trace.
    Scenario s = resolve(ca);
    s.predictor = trace.config.predictor;
    const Strategy k = parse_strategy(strategy_name);
    const OptimizedPlan plan = plan_for(k, s, TrustMode::One, WasteOptions{ca.alpha, false});
    StrategySpec spec = StrategySpec::from_plan(plan);
    spec.overlap = s.overlap;
    const SimOutcome o = run_fixed(JobSpec::make(s.job_base_work()), spec, s.platform, trace,
                                   seed);
    std::printf("replay %s: makespan %.1f s, waste %.5f, faults %llu, rollbacks %llu\n",
                strategy_name.c_str(), o.makespan, o.waste_fraction,
                static_cast<unsigned long long>(o.counters.faults),
                static_cast<unsigned long long>(o.counters.rollbacks));
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Checkpointing with fault prediction: models, simulation and sweeps"};
    app.require_subcommand(1);
    app.set_config("--config", "", "INI file; [analyze], [simulate], [sweep] sections");
    app.config_formatter(std::make_shared<CLI::ConfigINI>());
    // Lets --config also follow the subcommand name.
    app.fallthrough();

    CommonArgs an_args;
    std::string an_out;
    auto* analyze = app.add_subcommand("analyze", "Optimal periods and wastes of every strategy");
    add_common(analyze, an_args);
    analyze->add_option("--out", an_out, "CSV output path, '-' for stdout");

    CommonArgs sim_args;
    RunArgs sim_run;
    auto* simulate = app.add_subcommand("simulate", "Simulate strategies and report gains");
    add_common(simulate, sim_args);
    add_run(simulate, sim_run, true);

    CommonArgs sw_args;
    RunArgs sw_run;
    std::string axis;
    std::vector<std::string> values;
    auto* sweep_cmd = app.add_subcommand("sweep", "Simulate along one varying axis");
    add_common(sweep_cmd, sw_args);
    add_run(sweep_cmd, sw_run, false);
    sweep_cmd->add_option("--axis", axis, "n, recall, precision or window")->required();
    sweep_cmd->add_option("--values", values, "Axis values, comma separated (n accepts 2^k)")
        ->delimiter(',')
        ->required();

    CommonArgs tr_args;
    std::uint64_t tr_seed = 1;
    std::string tr_horizon, tr_out, tr_in, tr_strategy;
    auto* trace_cmd = app.add_subcommand("trace", "Export or import event traces");
    trace_cmd->require_subcommand(1);
    auto* exp = trace_cmd->add_subcommand("export", "Generate a trace and write it");
    add_common(exp, tr_args);
    exp->add_option("--seed", tr_seed, "Trace seed")->capture_default_str();
    exp->add_option("--horizon", tr_horizon, "Trace length (default 1.5 x base work)");
    exp->add_option("--out", tr_out, "Output path, '-' for stdout");
    auto* imp = trace_cmd->add_subcommand("import", "Read a trace, summarize it, optionally replay");
    add_common(imp, tr_args);
    imp->add_option("--in", tr_in, "Trace file")->required()->check(CLI::ExistingFile);
    imp->add_option("--strategy", tr_strategy, "Replay this strategy on the trace");
    imp->add_option("--seed", tr_seed, "Seed of the trust draws")->capture_default_str();

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        // --help and --version exit 0; usage errors share the exit code of
        // invalid values.
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    CLI::App* active = nullptr;
    for (CLI::App* sub : {analyze, simulate, sweep_cmd, exp, imp})
        if (sub->parsed())
            active = sub;
    try
    {
        if (active == analyze)
            return cmd_analyze(an_args, an_out);
        if (active == simulate)
            return cmd_simulate(sim_args, sim_run);
        if (active == sweep_cmd)
            return cmd_sweep(sw_args, sw_run, axis, values);
        if (active == exp)
            return cmd_trace_export(tr_args, tr_seed, tr_horizon, tr_out);
        if (active == imp)
            return cmd_trace_import(tr_in, tr_strategy, tr_args, tr_seed);
    }
    catch (const NonTerminationError& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    catch (const std::exception& e)
    {
        std::cerr << "error: " << e.what() << "\n\n";
        if (active)
            std::cerr << active->help();
        return 2;
    }
    return 0;
}
