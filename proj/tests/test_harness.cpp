#include "predckpt/harness.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

using namespace predckpt;

namespace
{

Scenario small_scenario(double r = 0.85, double p = 0.82, Seconds window = 0.0)
{
    Scenario s;
    s.platform = default_platform(65536);
    s.predictor = PredictorParams::make(r, p, window);
    s.base_work = minutes(20000);
    return s;
}

SimulateOptions quick(int reps = 4)
{
    SimulateOptions o;
    o.n_reps = reps;
    o.seed = 3;
    return o;
}

const ResultRow& row_named(const std::vector<ResultRow>& rows, const std::string& name)
{
    for (const ResultRow& r : rows)
        if (r.strategy == name)
            return r;
    throw std::runtime_error("no row " + name);
}

} // namespace

TEST_SUITE("harness-cli")
{
    TEST_CASE("default platform and table scenario")
    {
        const PlatformParams pf = default_platform(65536);
        CHECK(pf.mtbf_ind == years(125));
        CHECK(pf.ckpt == minutes(10));
        CHECK(pf.recovery == minutes(10));
        CHECK(pf.downtime == minutes(1));
        const Scenario t = table_scenario(524288, 0.4, 0.7, minutes(50), "weibull:0.7");
        CHECK(t.process == FaultProcess::PerProcessor);
        CHECK(t.processor_age == kTableProcessorAge);
        CHECK(t.job_base_work() == doctest::Approx(kTableTotalWork / 524288.0).epsilon(1e-15));
        const TraceConfig cfg = t.trace_config();
        CHECK(cfg.lead == minutes(10));
        CHECK(cfg.n_procs == 524288);
        CHECK(cfg.fault_law.mean == doctest::Approx(platform_mtbf(t.platform)).epsilon(1e-15));
    }

    TEST_CASE("explicit base work overrides the total work")
    {
        Scenario s = small_scenario();
        CHECK(s.job_base_work() == minutes(20000));
        s.base_work.reset();
        s.total_work = 65536.0 * 100.0;
        CHECK(s.job_base_work() == doctest::Approx(100.0).epsilon(1e-15));
    }

    TEST_CASE("parsers")
    {
        CHECK(parse_trust_mode("opt") == TrustMode::Optimal);
        CHECK(parse_trust_mode("0") == TrustMode::Zero);
        CHECK(parse_trust_mode("1") == TrustMode::One);
        CHECK_THROWS_AS(parse_trust_mode("2"), std::invalid_argument);
        for (SweepAxis a : {SweepAxis::NProcs, SweepAxis::Recall, SweepAxis::Precision, SweepAxis::Window})
            CHECK(parse_sweep_axis(to_string(a)) == a);
        CHECK_THROWS_AS(parse_sweep_axis("alpha"), std::invalid_argument);
    }

    TEST_CASE("with_axis replaces one coordinate")
    {
        const Scenario base = small_scenario(0.85, 0.82, minutes(5));
        const Scenario n = with_axis(base, SweepAxis::NProcs, 1024);
        CHECK(n.platform.n_procs == 1024);
        CHECK(n.predictor.recall == 0.85);
        CHECK(with_axis(base, SweepAxis::Recall, 0.3).predictor.recall == 0.3);
        CHECK(with_axis(base, SweepAxis::Precision, 0.4).predictor.precision == 0.4);
        CHECK(with_axis(base, SweepAxis::Window, 600.0).predictor.window == 600.0);
        CHECK(with_axis(base, SweepAxis::Window, 600.0).platform.n_procs == 65536);
    }

    TEST_CASE("analytic waste is the waste model at the plan")
    {
        const Scenario s = small_scenario(0.7, 0.4, minutes(50));
        for (bool capped : {false, true})
        {
            const WasteOptions wo{kDefaultAlpha, capped};
            for (Strategy k : {Strategy::Young, Strategy::ExactPrediction, Strategy::Instant, Strategy::NoCkptI,
                               Strategy::WithCkptI})
            {
                const OptimizedPlan plan = plan_for(k, s, TrustMode::One, wo);
                WasteQuery q;
                q.platform = s.platform;
                q.predictor = s.predictor;
                q.period_tr = plan.t_r_star;
                q.period_tp = plan.t_p_star;
                q.options = wo;
                const double direct = waste_of(k, q, plan.q_star);
                CHECK(analytic_waste(k, s, plan.q_star, plan.t_r_star, plan.t_p_star, wo) ==
                      doctest::Approx(direct).epsilon(1e-12));
            }
        }
    }

    TEST_CASE("analytic waste outside the model domain is NaN")
    {
        const Scenario s = small_scenario();
        CHECK(std::isnan(analytic_waste(Strategy::Young, s, 0, ExtendedDuration::finite(60.0), std::nullopt,
                                        {kDefaultAlpha, true})));
    }

    TEST_CASE("trust modes")
    {
        const Scenario s = small_scenario(0.85, 0.82, minutes(5));
        const WasteOptions wo{kDefaultAlpha, true};
        CHECK(plan_for(Strategy::Instant, s, TrustMode::Zero, wo).q_star == 0);
        CHECK(plan_for(Strategy::Instant, s, TrustMode::One, wo).q_star == 1);
        CHECK(plan_for(Strategy::Young, s, TrustMode::One, wo).q_star == 0);
        const OptimizedPlan opt = plan_for(Strategy::Instant, s, TrustMode::Optimal, wo);
        const OptimizedPlan zero = plan_for(Strategy::Instant, s, TrustMode::Zero, wo);
        const OptimizedPlan one = plan_for(Strategy::Instant, s, TrustMode::One, wo);
        CHECK(opt.waste_raw == std::min(zero.waste_raw, one.waste_raw));
        // WithCkptI always carries a proactive period, even untrusted.
        const Scenario w = small_scenario(0.85, 0.82, minutes(50));
        CHECK(plan_for(Strategy::WithCkptI, w, TrustMode::Zero, wo).t_p_star.has_value());
    }

    TEST_CASE("no recall: every strategy plans like Young")
    {
        const Scenario s = small_scenario(0.0, 0.5, minutes(5));
        const std::vector<ResultRow> rows = analyze_scenario(s, {kDefaultAlpha, true});
        const ResultRow& y = row_named(rows, "Young");
        for (const ResultRow& r : rows)
        {
            CHECK(r.waste_analytic == doctest::Approx(y.waste_analytic).epsilon(1e-12));
            CHECK(r.t_r_s.seconds() == doctest::Approx(y.t_r_s.seconds()).epsilon(1e-12));
        }
    }

    TEST_CASE("Young analytic waste grows with the platform size")
    {
        Scenario s = small_scenario(0.0, 0.5);
        double prev = 0.0;
        for (double n : {1024.0, 4096.0, 16384.0, 65536.0, 262144.0, 1048576.0})
        {
            const Scenario at = with_axis(s, SweepAxis::NProcs, n);
            const double w = row_named(analyze_scenario(at, {kDefaultAlpha, true}), "Young").waste_analytic;
            CHECK(w > prev);
            prev = w;
        }
    }

    TEST_CASE("simulation rows: Young first, zero self gain")
    {
        SimulateOptions o = quick();
        o.strategies = {Strategy::Instant, Strategy::ExactPrediction};
        const std::vector<ResultRow> rows = simulate_scenario(small_scenario(), o);
        REQUIRE(rows.size() == 3);
        CHECK(rows[0].strategy == "Young");
        CHECK(*rows[0].gain_vs_young_pct == 0.0);
        const double ym = *rows[0].makespan_mean_s;
        for (const ResultRow& r : rows)
        {
            REQUIRE(r.makespan_mean_s.has_value());
            CHECK(*r.gain_vs_young_pct == doctest::Approx(100.0 * (1.0 - *r.makespan_mean_s / ym)).epsilon(1e-12));
            CHECK(r.n_reps == 4);
            CHECK(r.seed == 3);
        }
    }

    TEST_CASE("WithCkptI is skipped when the window is shorter than a checkpoint")
    {
        SimulateOptions o = quick(2);
        o.strategies = {Strategy::WithCkptI, Strategy::NoCkptI};
        const std::vector<ResultRow> rows = simulate_scenario(small_scenario(0.85, 0.82, minutes(5)), o);
        for (const ResultRow& r : rows)
            CHECK(r.strategy != "WithCkptI");
        CHECK(rows.size() == 2);
    }

    TEST_CASE("simulation is reproducible for a seed")
    {
        const Scenario s = small_scenario(0.7, 0.4, minutes(50));
        CHECK(simulate_scenario(s, quick()) == simulate_scenario(s, quick()));
    }

    TEST_CASE("a fault-free replicate wastes C / T_R")
    {
        Scenario s = small_scenario(0.0, 0.5);
        s.platform = PlatformParams::make(1, years(1e6), minutes(10), minutes(1), minutes(10));
        s.base_work = minutes(3000);
        SimulateOptions o = quick(1);
        o.strategies = {Strategy::Young};
        const ResultRow r = simulate_scenario(s, o).front();
        const Seconds tr = r.t_r_s.seconds();
        const double periods = s.base_work.value() / (tr - minutes(10));
        // Whole periods only when the work divides evenly; otherwise the last
        // one is shorter but still checkpointed.
        const double expected = 1.0 - s.base_work.value() / (s.base_work.value() + std::ceil(periods) * minutes(10));
        CHECK(*r.waste_sim_mean == doctest::Approx(expected).epsilon(1e-12));
    }

    TEST_CASE("best period rows")
    {
        SimulateOptions o = quick(2);
        o.strategies = {Strategy::Instant};
        o.best_period = true;
        o.grid_points = 5;  // the middle point is the planned period
        const std::vector<ResultRow> rows = simulate_scenario(small_scenario(), o);
        CHECK(rows.size() == 4);
        const ResultRow& b = row_named(rows, "BestPeriod-Instant");
        REQUIRE(b.waste_sim_mean.has_value());
        CHECK(*b.waste_sim_mean <= *row_named(rows, "Instant").waste_sim_mean + 1e-9);
        CHECK(row_named(rows, "BestPeriod-Young").t_r_s.is_finite());
    }

    TEST_CASE("a one-point sweep is a single simulation")
    {
        const Scenario s = small_scenario(0.85, 0.82, minutes(5));
        SimulateOptions o = quick(2);
        o.strategies = {Strategy::Instant};
        CHECK(sweep(s, SweepAxis::Recall, {0.85}, o) == simulate_scenario(s, o));
        const std::vector<ResultRow> two = sweep(s, SweepAxis::Recall, {0.5, 0.9}, o);
        REQUIRE(two.size() == 4);
        CHECK(two[0].recall == 0.5);
        CHECK(two[3].recall == 0.9);
    }

    TEST_CASE("CSV round trip is exact")
    {
        SimulateOptions o = quick(2);
        std::vector<ResultRow> rows = simulate_scenario(small_scenario(0.7, 0.4, minutes(50)), o);
        // Analytic-only rows leave the simulation columns empty; an infinite
        // period is written as inf.
        std::vector<ResultRow> analytic = analyze_scenario(small_scenario(1.0, 0.9), {kDefaultAlpha, false});
        rows.insert(rows.end(), analytic.begin(), analytic.end());
        bool has_inf = false;
        for (const ResultRow& r : rows)
            has_inf = has_inf || r.t_r_s.is_infinite();
        CHECK(has_inf);

        std::ostringstream out;
        write_csv(out, rows, 3);
        const std::string text = out.str();
        CHECK(text.rfind("# predckpt-csv v1 tool=1.0.0 seed=3\n", 0) == 0);
        std::istringstream in(text);
        CHECK(read_csv(in) == rows);
    }

    TEST_CASE("CSV reader rejects foreign input")
    {
        std::istringstream no_header("strategy,n_procs\nYoung,1\n");
        CHECK_THROWS(read_csv(no_header));
        std::istringstream wrong_columns("# predckpt-csv v1 tool=1.0.0 seed=1\nfoo,bar\n");
        CHECK_THROWS(read_csv(wrong_columns));
        std::ostringstream out;
        write_csv(out, analyze_scenario(small_scenario(), {}), 1);
        std::string text = out.str();
        text += "Young,1\n";
        std::istringstream short_line(text);
        CHECK_THROWS(read_csv(short_line));
    }

    TEST_CASE("terminal table lists every row")
    {
        std::ostringstream out;
        const std::vector<ResultRow> rows = analyze_scenario(small_scenario(0.7, 0.4, minutes(50)), {});
        print_rows(out, rows);
        for (const ResultRow& r : rows)
            CHECK(out.str().find(r.strategy) != std::string::npos);
    }
}
