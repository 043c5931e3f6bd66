#include "predckpt/harness.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace predckpt
{

namespace
{

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string lower(std::string_view text)
{
    std::string s(text);
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

} // namespace

Seconds Scenario::job_base_work() const
{
    if (base_work)
        return *base_work;
    return total_work / static_cast<double>(platform.n_procs);
}

TraceConfig Scenario::trace_config() const
{
    TraceConfig cfg;
    cfg.fault_law = FailureLaw::parse(law, platform_mtbf(platform));
    cfg.false_shape = false_shape;
    cfg.predictor = predictor;
    cfg.lead = platform.ckpt;
    cfg.process = process;
    cfg.n_procs = platform.n_procs;
    cfg.processor_age = processor_age;
    cfg.false_process = false_process;
    return cfg;
}

PlatformParams default_platform(std::uint64_t n_procs)
{
    return PlatformParams::make(n_procs, years(125), minutes(10), minutes(1), minutes(10));
}

Scenario table_scenario(std::uint64_t n_procs, double recall, double precision, Seconds window,
                        const std::string& law)
{
    Scenario s;
    s.platform = default_platform(n_procs);
    s.predictor = PredictorParams::make(recall, precision, window);
    s.law = law;
    s.process = FaultProcess::PerProcessor;
    s.processor_age = kTableProcessorAge;
    s.total_work = kTableTotalWork;
    return s;
}

std::string to_string(TrustMode m)
{
    switch (m)
    {
    case TrustMode::Optimal: return "opt";
    case TrustMode::Zero: return "0";
    case TrustMode::One: return "1";
    }
    return "?";
}

TrustMode parse_trust_mode(std::string_view text)
{
    const std::string s = lower(text);
    if (s == "opt" || s == "optimal" || s == "auto")
        return TrustMode::Optimal;
    if (s == "0")
        return TrustMode::Zero;
    if (s == "1")
        return TrustMode::One;
    throw std::invalid_argument("unknown q mode '" + std::string(text) + "' (opt, 0, 1)");
}

OptimizedPlan plan_for(Strategy strategy, const Scenario& scenario, TrustMode trust,
                       WasteOptions options)
{
    const PlatformParams& pf = scenario.platform;
    const PredictorParams& pred = scenario.predictor;
    OptimizedPlan plan;
    switch (trust)
    {
    case TrustMode::Zero:
        plan = optimize_branch(strategy, pf, pred, 0, options);
        break;
    case TrustMode::One:
        plan = optimize_branch(strategy, pf, pred, strategy == Strategy::Young ? 0 : 1, options);
        break;
    case TrustMode::Optimal: {
        const OptimizedPlan a = optimize_branch(strategy, pf, pred, 0, options);
        if (strategy == Strategy::Young)
            return a;
        const OptimizedPlan b = optimize_branch(strategy, pf, pred, 1, options);
        // Ties go to q = 0.
        plan = b.waste_raw < a.waste_raw - 1e-12 * std::abs(a.waste_raw) ? b : a;
        break;
    }
    }
    // The simulated policy needs T_P even when the plan never trusts.
    if (strategy == Strategy::WithCkptI && !plan.t_p_star)
        plan.t_p_star = opt_period_tp(pred, pf.ckpt);
    return plan;
}

double analytic_waste(Strategy strategy, const Scenario& scenario, int q,
                      const ExtendedDuration& t_r, std::optional<Seconds> t_p,
                      WasteOptions options)
{
    WasteQuery query;
    query.platform = scenario.platform;
    query.predictor = scenario.predictor;
    query.period_tr = t_r;
    query.period_tp = t_p;
    query.options = options;
    try
    {
        return waste_of(strategy, query, static_cast<double>(q));
    }
    catch (const DomainError&)
    {
        return kNaN;
    }
}

namespace
{

ResultRow base_row(const std::string& name, const Scenario& scenario, int q, bool capped,
                   ExtendedDuration t_r, std::optional<Seconds> t_p)
{
    ResultRow row;
    row.strategy = name;
    row.n_procs = scenario.platform.n_procs;
    row.mu_s = platform_mtbf(scenario.platform);
    row.recall = scenario.predictor.recall;
    row.precision = scenario.predictor.precision;
    row.window_s = scenario.predictor.window;
    row.q = q;
    row.capped = capped;
    row.t_r_s = t_r;
    row.t_p_s = t_p;
    return row;
}

std::string coordinates(const Scenario& s, const std::string& strategy)
{
    std::ostringstream os;
    os << strategy << " at N=" << s.platform.n_procs << " r=" << s.predictor.recall
       << " p=" << s.predictor.precision << " I=" << s.predictor.window << "s law=" << s.law;
    return os.str();
}

bool simulable(Strategy s, const Scenario& scenario)
{
    if (s == Strategy::Migration)
        return false;
    if (s == Strategy::WithCkptI && scenario.predictor.window < scenario.platform.ckpt)
        return false;
    return true;
}

} // namespace

std::vector<ResultRow> simulate_scenario(const Scenario& scenario, const SimulateOptions& opts)
{
    if (opts.n_reps < 1)
        throw std::invalid_argument("n_reps must be at least 1");
    std::vector<Strategy> strategies{Strategy::Young};
    for (Strategy s : opts.strategies)
        if (s != Strategy::Young && simulable(s, scenario) &&
            std::find(strategies.begin(), strategies.end(), s) == strategies.end())
            strategies.push_back(s);

    const WasteOptions wopts{opts.alpha, opts.capped};
    const JobSpec job = JobSpec::make(scenario.job_base_work());
    const TraceConfig base_cfg = scenario.trace_config();
    const Seconds mu = platform_mtbf(scenario.platform);

    std::vector<ResultRow> rows;
    std::vector<ResultRow> best_rows;
    for (Strategy s : strategies)
    {
        const OptimizedPlan plan = plan_for(s, scenario, opts.trust, wopts);
        StrategySpec spec = StrategySpec::from_plan(plan);
        spec.overlap = scenario.overlap;
        const TraceConfig cfg = trace_config_for(s, base_cfg);

        ResultRow row = base_row(to_string(s), scenario, plan.q_star, opts.capped,
                                 plan.t_r_star, plan.t_p_star);
        row.waste_analytic = analytic_waste(s, scenario, plan.q_star, plan.t_r_star,
                                            plan.t_p_star, wopts);
        try
        {
            const ReplicateSummary sum =
                run_replicates(job, spec, scenario.platform, cfg, opts.n_reps, opts.seed);
            row.waste_sim_mean = sum.waste_mean;
            row.waste_sim_se = sum.waste_se;
            row.makespan_mean_s = sum.makespan_mean;
            row.makespan_se_s = sum.makespan_se;
            row.n_reps = opts.n_reps;
            row.seed = opts.seed;
            rows.push_back(row);

            if (!opts.best_period)
                continue;
            const double rq = std::min(0.99, scenario.predictor.recall * plan.q_star);
            const Seconds centre = plan.t_r_star.is_finite()
                                       ? plan.t_r_star.seconds()
                                       : std::sqrt(2.0 * mu * scenario.platform.ckpt / (1.0 - rq));
            const Seconds lo = std::max(scenario.platform.ckpt, centre / 4.0);
            const std::vector<Seconds> grid = period_grid(lo, 4.0 * centre, opts.grid_points);
            const int reps = opts.best_period_reps > 0 ? opts.best_period_reps : opts.n_reps;
            const BestPeriod best =
                best_period_search(job, spec, scenario.platform, cfg, grid, reps, opts.seed);
            const PeriodPoint& pt = best.curve[best.best_index];
            ResultRow b = base_row("BestPeriod-" + to_string(s), scenario, plan.q_star,
                                   opts.capped, ExtendedDuration::finite(best.period),
                                   plan.t_p_star);
            b.waste_analytic = analytic_waste(s, scenario, plan.q_star, b.t_r_s, plan.t_p_star,
                                              WasteOptions{opts.alpha, false});
            b.waste_sim_mean = pt.waste_mean;
            b.waste_sim_se = pt.waste_se;
            b.makespan_mean_s = pt.makespan_mean;
            b.makespan_se_s = pt.makespan_se;
            b.n_reps = reps;
            b.seed = opts.seed;
            best_rows.push_back(b);
        }
        catch (const NonTerminationError& e)
        {
            throw NonTerminationError(std::string(e.what()) + " (" +
                                      coordinates(scenario, to_string(s)) + ")");
        }
    }
    rows.insert(rows.end(), best_rows.begin(), best_rows.end());

    const double young = *rows.front().makespan_mean_s;
    for (ResultRow& row : rows)
        row.gain_vs_young_pct = 100.0 * (1.0 - *row.makespan_mean_s / young);
    return rows;
}

std::vector<ResultRow> analyze_scenario(const Scenario& scenario, WasteOptions options)
{
    std::vector<ResultRow> rows;
    std::vector<Strategy> all{Strategy::Young, Strategy::ExactPrediction, Strategy::Instant,
                              Strategy::NoCkptI, Strategy::WithCkptI};
    if (scenario.platform.migration)
        all.insert(all.begin() + 2, Strategy::Migration);
    for (Strategy s : all)
    {
        if (s == Strategy::WithCkptI && scenario.predictor.window < scenario.platform.ckpt)
            continue;
        const OptimizedPlan plan = plan_for(s, scenario, TrustMode::Optimal, options);
        ResultRow row = base_row(to_string(s), scenario, plan.q_star, options.capped,
                                 plan.t_r_star, plan.t_p_star);
        row.waste_analytic = plan.waste_raw;
        rows.push_back(row);
    }
    return rows;
}

std::string to_string(SweepAxis a)
{
    switch (a)
    {
    case SweepAxis::NProcs: return "n";
    case SweepAxis::Recall: return "recall";
    case SweepAxis::Precision: return "precision";
    case SweepAxis::Window: return "window";
    }
    return "?";
}

SweepAxis parse_sweep_axis(std::string_view text)
{
    const std::string s = lower(text);
    if (s == "n" || s == "nprocs" || s == "n_procs")
        return SweepAxis::NProcs;
    if (s == "r" || s == "recall")
        return SweepAxis::Recall;
    if (s == "p" || s == "precision")
        return SweepAxis::Precision;
    if (s == "i" || s == "window")
        return SweepAxis::Window;
    throw std::invalid_argument("unknown sweep axis '" + std::string(text) +
                                "' (n, recall, precision, window)");
}

Scenario with_axis(const Scenario& base, SweepAxis axis, double value)
{
    Scenario s = base;
    PredictorParams& pr = s.predictor;
    switch (axis)
    {
    case SweepAxis::NProcs: {
        if (!(value >= 1.0) || value != std::floor(value))
            throw std::invalid_argument("processor count must be a positive integer");
        const PlatformParams& p = base.platform;
        s.platform = PlatformParams::make(static_cast<std::uint64_t>(value), p.mtbf_ind, p.ckpt,
                                          p.downtime, p.recovery, p.migration);
        break;
    }
    case SweepAxis::Recall:
        pr = PredictorParams::make(value, pr.precision, pr.window, pr.trust, pr.window_law);
        break;
    case SweepAxis::Precision:
        pr = PredictorParams::make(pr.recall, value, pr.window, pr.trust, pr.window_law);
        break;
    case SweepAxis::Window:
        pr = PredictorParams::make(pr.recall, pr.precision, value, pr.trust, pr.window_law);
        break;
    }
    return s;
}

std::vector<ResultRow> sweep(const Scenario& base, SweepAxis axis,
                             const std::vector<double>& values, const SimulateOptions& opts)
{
    if (values.empty())
        throw std::invalid_argument("sweep needs at least one value");
    std::vector<ResultRow> rows;
    for (double v : values)
    {
        const std::vector<ResultRow> part = simulate_scenario(with_axis(base, axis, v), opts);
        rows.insert(rows.end(), part.begin(), part.end());
    }
    return rows;
}

const std::vector<std::string>& csv_columns()
{
    static const std::vector<std::string> cols{
        "strategy",        "n_procs",       "mu_s",          "recall",
        "precision",       "window_s",      "q",             "capped",
        "t_r_s",           "t_p_s",         "waste_analytic", "waste_sim_mean",
        "waste_sim_se",    "makespan_mean_s", "makespan_se_s", "gain_vs_young_pct",
        "n_reps",          "seed"};
    return cols;
}

namespace
{

std::string fmt(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

double parse_double(const std::string& field)
{
    char* end = nullptr;
    const double v = std::strtod(field.c_str(), &end);
    if (field.empty() || *end != '\0')
        throw std::invalid_argument("bad number '" + field + "' in CSV");
    return v;
}

std::optional<double> parse_optional(const std::string& field)
{
    if (field.empty())
        return std::nullopt;
    return parse_double(field);
}

std::uint64_t parse_uint(const std::string& field)
{
    char* end = nullptr;
    const unsigned long long v = std::strtoull(field.c_str(), &end, 10);
    if (field.empty() || *end != '\0')
        throw std::invalid_argument("bad integer '" + field + "' in CSV");
    return v;
}

std::vector<std::string> split(const std::string& line)
{
    std::vector<std::string> out;
    std::string cur;
    for (char c : line)
    {
        if (c == ',')
        {
            out.push_back(cur);
            cur.clear();
        }
        else if (c != '\r')
            cur += c;
    }
    out.push_back(cur);
    return out;
}

} // namespace

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows, std::uint64_t seed)
{
    out << "# predckpt-csv v1 tool=" << kToolVersion << " seed=" << seed << '\n';
    const auto& cols = csv_columns();
    for (std::size_t i = 0; i < cols.size(); ++i)
        out << (i ? "," : "") << cols[i];
    out << '\n';
    for (const ResultRow& r : rows)
    {
        out << r.strategy << ',' << r.n_procs << ',' << fmt(r.mu_s) << ',' << fmt(r.recall) << ','
            << fmt(r.precision) << ',' << fmt(r.window_s) << ',' << r.q << ','
            << (r.capped ? 1 : 0) << ','
            << (r.t_r_s.is_infinite() ? std::string("inf") : fmt(r.t_r_s.seconds())) << ','
            << fmt(r.t_p_s) << ',' << fmt(r.waste_analytic) << ',' << fmt(r.waste_sim_mean)
            << ',' << fmt(r.waste_sim_se) << ',' << fmt(r.makespan_mean_s) << ','
            << fmt(r.makespan_se_s) << ',' << fmt(r.gain_vs_young_pct) << ',' << r.n_reps << ','
            << r.seed << '\n';
    }
}

std::vector<ResultRow> read_csv(std::istream& in)
{
    std::vector<ResultRow> rows;
    std::string line;
    bool header = false;
    while (std::getline(in, line))
    {
        if (line.empty() || line[0] == '#')
            continue;
        const std::vector<std::string> f = split(line);
        if (!header)
        {
            if (f != csv_columns())
                throw std::invalid_argument("unexpected CSV header: " + line);
            header = true;
            continue;
        }
        if (f.size() != csv_columns().size())
            throw std::invalid_argument("wrong field count in CSV line: " + line);
        ResultRow r;
        r.strategy = f[0];
        r.n_procs = parse_uint(f[1]);
        r.mu_s = parse_double(f[2]);
        r.recall = parse_double(f[3]);
        r.precision = parse_double(f[4]);
        r.window_s = parse_double(f[5]);
        r.q = static_cast<int>(parse_uint(f[6]));
        r.capped = parse_uint(f[7]) != 0;
        r.t_r_s = f[8] == "inf" ? ExtendedDuration::infinite()
                                : ExtendedDuration::finite(parse_double(f[8]));
        r.t_p_s = parse_optional(f[9]);
        r.waste_analytic = parse_double(f[10]);
        r.waste_sim_mean = parse_optional(f[11]);
        r.waste_sim_se = parse_optional(f[12]);
        r.makespan_mean_s = parse_optional(f[13]);
        r.makespan_se_s = parse_optional(f[14]);
        r.gain_vs_young_pct = parse_optional(f[15]);
        r.n_reps = static_cast<int>(parse_uint(f[16]));
        r.seed = parse_uint(f[17]);
        rows.push_back(r);
    }
    if (!header)
        throw std::invalid_argument("CSV has no header line");
    return rows;
}

void print_rows(std::ostream& out, const std::vector<ResultRow>& rows)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-26s %8s %6s %6s %7s %2s %12s %10s %9s %9s %9s %8s\n",
                  "strategy", "N", "r", "p", "I", "q", "T_R", "T_P", "model", "sim", "sim_se",
                  "gain%");
    out << buf;
    for (const ResultRow& r : rows)
    {
        const std::string tr = r.t_r_s.is_infinite() ? "inf" : format_duration(r.t_r_s.seconds());
        const std::string tp = r.t_p_s ? format_duration(*r.t_p_s) : "-";
        char se[32] = "-";
        if (r.waste_sim_se)
            std::snprintf(se, sizeof se, "%.2e", *r.waste_sim_se);
        char gain[32] = "-";
        if (r.gain_vs_young_pct)
            std::snprintf(gain, sizeof gain, "%.1f", *r.gain_vs_young_pct);
        std::snprintf(buf, sizeof buf,
                      "%-26s %8llu %6.3g %6.3g %7.4g %2d %12s %10s %9.4f %9.4f %9s %8s\n",
                      r.strategy.c_str(), static_cast<unsigned long long>(r.n_procs), r.recall,
                      r.precision, r.window_s, r.q, tr.c_str(), tp.c_str(), r.waste_analytic,
                      r.waste_sim_mean ? *r.waste_sim_mean : kNaN, se, gain);
        out << buf;
    }
}

} // namespace predckpt
