#include "predckpt/trace_gen.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

using namespace predckpt;

namespace
{

TraceConfig config_for(const std::string& law, Seconds mu, double r, double p, Seconds window)
{
    TraceConfig c;
    c.fault_law = FailureLaw::parse(law, mu);
    c.predictor = PredictorParams::make(r, p, window);
    c.lead = 600.0;
    return c;
}

bool same_events(const EventTrace& a, const EventTrace& b)
{
    if (a.events.size() != b.events.size())
        return false;
    for (std::size_t i = 0; i < a.events.size(); ++i)
    {
        const TraceEvent& x = a.events[i];
        const TraceEvent& y = b.events[i];
        if (x.time != y.time || x.kind != y.kind || x.index != y.index ||
            (x.carries_fault() && x.fault_time != y.fault_time) ||
            (x.is_prediction() && x.window_start != y.window_start))
            return false;
    }
    return true;
}

} // namespace

TEST_SUITE("trace-gen")
{
    TEST_CASE("Lanczos gamma")
    {
        CHECK(lanczos_gamma(3.0) == doctest::Approx(2.0).epsilon(1e-12));
        // Quoted as 1.2654; the exact value is 1.26582.
        CHECK(lanczos_gamma(1.0 + 1.0 / 0.7) == doctest::Approx(1.2654).epsilon(5e-4));
        for (double x = 0.1; x < 20.0; x += 0.37)
            CHECK(lanczos_gamma(x) == doctest::Approx(std::tgamma(x)).epsilon(1e-10));
    }

    TEST_CASE("Weibull scale keeps the requested mean")
    {
        CHECK(FailureLaw::weibull(0.5, 1000.0).weibull_scale() == doctest::Approx(500.0).epsilon(1e-12));
        CHECK(FailureLaw::weibull(0.7, 1000.0).weibull_scale() ==
              doctest::Approx(1000.0 / std::tgamma(1.0 + 1.0 / 0.7)).epsilon(1e-10));
        CHECK(FailureLaw::weibull(1.0, 1000.0).weibull_scale() == doctest::Approx(1000.0).epsilon(1e-12));
    }

    TEST_CASE("failure law parsing")
    {
        CHECK(FailureLaw::parse("exp", 5.0).kind == FailureLaw::Kind::Exponential);
        CHECK(FailureLaw::parse("Weibull:0.7", 5.0).shape == 0.7);
        CHECK(FailureLaw::parse("uniform", 5.0).kind == FailureLaw::Kind::UniformRenewal);
        CHECK(FailureLaw::parse("weibull:0.5", 5.0).name() == "weibull:0.5");
        CHECK_THROWS_AS(FailureLaw::parse("weibull:", 5.0), std::invalid_argument);
        CHECK_THROWS_AS(FailureLaw::parse("weibull:0.7x", 5.0), std::invalid_argument);
        CHECK_THROWS_AS(FailureLaw::parse("gamma", 5.0), std::invalid_argument);
        CHECK_THROWS_AS(FailureLaw::parse("exp", 0.0), std::invalid_argument);
        CHECK_THROWS_AS(FailureLaw::parse("weibull:-1", 1.0), std::invalid_argument);
    }

    TEST_CASE("sample means match the requested mean")
    {
        for (const char* law : {"exp", "weibull:0.7", "weibull:0.5", "uniform"})
        {
            CAPTURE(law);
            Rng rng(101);
            const FailureLaw f = FailureLaw::parse(law, 1000.0);
            double sum = 0.0;
            const int n = 1000000;
            for (int i = 0; i < n; ++i)
            {
                const Seconds x = sample_interarrival(f, rng);
                REQUIRE(x >= 0.0);
                sum += x;
            }
            CHECK(sum / n == doctest::Approx(1000.0).epsilon(0.01));
        }
    }

    TEST_CASE("uniform renewal stays within twice the mean")
    {
        Rng rng(3);
        const FailureLaw f = FailureLaw::uniform(10.0);
        for (int i = 0; i < 10000; ++i)
        {
            const Seconds x = sample_interarrival(f, rng);
            CHECK(x >= 0.0);
            CHECK(x <= 20.0);
        }
    }

    TEST_CASE("fault tagging follows the recall")
    {
        const FailureLaw f = FailureLaw::exponential(1.0);
        Rng a(1), b(2), c(3);
        for (const FaultSample& s : gen_fault_trace(f, 1000.0, 0.0, a))
            CHECK_FALSE(s.predicted);
        for (const FaultSample& s : gen_fault_trace(f, 1000.0, 1.0, b))
            CHECK(s.predicted);
        const auto faults = gen_fault_trace(f, 1e5, 0.7, c);
        CHECK(faults.size() > 90000);
        const auto predicted = std::count_if(faults.begin(), faults.end(),
                                             [](const FaultSample& s) { return s.predicted; });
        CHECK(static_cast<double>(predicted) / faults.size() == doctest::Approx(0.7).epsilon(0.01 / 0.7));
        CHECK(std::is_sorted(faults.begin(), faults.end(),
                             [](const FaultSample& x, const FaultSample& y) { return x.time < y.time; }));
        CHECK(faults.back().time <= 1e5);
    }

    TEST_CASE("false predictions")
    {
        CHECK(false_prediction_mean(minutes(125), 0.7, 0.4).seconds() / kMinute ==
              doctest::Approx(119.0476).epsilon(1e-6));
        CHECK(false_prediction_mean(100.0, 0.0, 0.4).is_infinite());
        CHECK(false_prediction_mean(100.0, 0.7, 1.0).is_infinite());

        Rng rng(5);
        const FailureLaw f = FailureLaw::exponential(100.0);
        CHECK(gen_false_prediction_trace(f, FalsePredictionShape::SameAsFaults, 100.0, 0.7, 1.0, 1e6, rng).empty());
        CHECK(gen_false_prediction_trace(f, FalsePredictionShape::SameAsFaults, 100.0, 0.0, 0.5, 1e6, rng).empty());
        for (FalsePredictionShape shape : {FalsePredictionShape::SameAsFaults, FalsePredictionShape::Uniform})
        {
            const auto dates = gen_false_prediction_trace(f, shape, 100.0, 0.7, 0.4, 1e7, rng);
            const double mean = 0.4 * 100.0 / (0.7 * 0.6);
            CHECK(1e7 / static_cast<double>(dates.size()) == doctest::Approx(mean).epsilon(0.02));
        }
        CHECK(parse_false_shape(to_string(FalsePredictionShape::Uniform)) == FalsePredictionShape::Uniform);
        CHECK(parse_false_shape("same") == FalsePredictionShape::SameAsFaults);
    }

    TEST_CASE("exact-date traces put the window on the fault")
    {
        const EventTrace t = generate_trace(config_for("exp", 1000.0, 0.8, 0.5, 0.0), 9, 1e6);
        int seen = 0;
        for (const TraceEvent& e : t.events)
            if (e.kind == EventKind::TruePrediction)
            {
                CHECK(e.window_start == e.fault_time);
                CHECK(e.time == e.window_start - 600.0);
                ++seen;
            }
        CHECK(seen > 100);
    }

    TEST_CASE("window placement and trace invariants")
    {
        const Seconds window = 3000.0;
        const EventTrace t = generate_trace(config_for("weibull:0.7", 5000.0, 0.85, 0.82, window), 21, 1e9);
        double offset_sum = 0.0;
        std::size_t n_true = 0;
        for (std::size_t i = 0; i < t.events.size(); ++i)
        {
            const TraceEvent& e = t.events[i];
            if (i > 0)
                REQUIRE(event_before(t.events[i - 1], e));
            if (e.kind == EventKind::TruePrediction)
            {
                REQUIRE(e.window_start <= e.fault_time);
                REQUIRE(e.fault_time <= e.window_start + window);
                offset_sum += e.fault_time - e.window_start;
                ++n_true;
            }
            if (e.is_prediction())
                REQUIRE(e.time == e.window_start - 600.0);
            else
                REQUIRE(e.time == e.fault_time);
        }
        REQUIRE(n_true > 100000);
        CHECK(offset_sum / n_true == doctest::Approx(window / 2.0).epsilon(0.01));
    }

    TEST_CASE("window laws")
    {
        Rng rng(8);
        const PredictorParams start = PredictorParams::make(0.5, 0.5, 100.0, 1.0, WindowLaw::at_start());
        CHECK(sample_window_offset(start, rng) == 0.0);
        const PredictorParams custom = PredictorParams::make(0.5, 0.5, 100.0, 1.0, WindowLaw::custom(20.0));
        double sum = 0.0;
        const int n = 200000;
        for (int i = 0; i < n; ++i)
        {
            const Seconds o = sample_window_offset(custom, rng);
            REQUIRE(o >= 0.0);
            REQUIRE(o <= 100.0);
            sum += o;
        }
        CHECK(sum / n == doctest::Approx(20.0).epsilon(0.01));
    }

    TEST_CASE("merge with no false predictions and perfect recall")
    {
        Rng rng(4), off(5);
        const TraceConfig cfg = config_for("exp", 100.0, 1.0, 1.0, 50.0);
        const auto faults = gen_fault_trace(cfg.fault_law, 1e5, 1.0, rng);
        const EventTrace t = merge_traces(faults, {}, cfg, off);
        CHECK(t.events.size() == faults.size());
        for (const TraceEvent& e : t.events)
            CHECK(e.kind == EventKind::TruePrediction);
    }

    TEST_CASE("ties break by kind then generation index")
    {
        TraceEvent a{10.0, EventKind::UnpredictedFault, 10.0, 0.0, 5};
        TraceEvent b{10.0, EventKind::TruePrediction, 20.0, 15.0, 0};
        TraceEvent c{10.0, EventKind::FalsePrediction, 0.0, 15.0, 0};
        TraceEvent d{10.0, EventKind::FalsePrediction, 0.0, 15.0, 1};
        CHECK(event_before(a, b));
        CHECK(event_before(b, c));
        CHECK(event_before(c, d));
        CHECK_FALSE(event_before(d, c));
        CHECK_FALSE(event_before(a, a));
    }

    TEST_CASE("identical seeds give bit-identical traces")
    {
        const TraceConfig cfg = config_for("weibull:0.5", 1000.0, 0.7, 0.4, 300.0);
        CHECK(same_events(generate_trace(cfg, 77, 1e6), generate_trace(cfg, 77, 1e6)));
        CHECK_FALSE(same_events(generate_trace(cfg, 77, 1e6), generate_trace(cfg, 78, 1e6)));
    }

    TEST_CASE("extending a stream equals generating the longer horizon at once")
    {
        for (FaultProcess proc : {FaultProcess::PlatformRenewal, FaultProcess::PerProcessor})
        {
            CAPTURE(to_string(proc));
            TraceConfig cfg = config_for("weibull:0.7", 1000.0, 0.7, 0.4, 300.0);
            cfg.process = proc;
            cfg.n_procs = 1000;
            cfg.processor_age = days(10);
            TraceStream s(cfg, 31, 5e3);
            for (Seconds h : {1e4, 3.3e4, 1e5, 4e5})
                s.extend_to(h);
            const EventTrace once = generate_trace(cfg, 31, 4e5);
            const EventTrace& grown = s.trace();
            // Events past complete_until() may still differ in order only
            // with later generations; compare the final prefix.
            std::size_t k = 0;
            while (k < once.events.size() && once.events[k].time < once.complete_until())
                ++k;
            EventTrace a = once, b = grown;
            a.events.resize(k);
            b.events.resize(std::min(k, b.events.size()));
            CHECK(same_events(a, b));
            CHECK(grown.events.size() == once.events.size());
        }
    }

    TEST_CASE("superposed per-processor faults")
    {
        // Exponential processors superpose into a Poisson process of rate n / mean.
        {
            SuperposedRenewal s(FailureLaw::exponential(1e6), 1000, Rng(3));
            Seconds last = 0.0, t = 0.0;
            const int n = 200000;
            for (int i = 0; i < n; ++i)
            {
                t = s.next();
                REQUIRE(t >= last);
                last = t;
            }
            CHECK(t / n == doctest::Approx(1000.0).epsilon(0.01));
        }
        // Weibull 0.7: fresh processors fail much faster than the long-run rate,
        // aged ones approach it.
        auto mean_gap = [](Seconds age, int n) {
            SuperposedRenewal s(FailureLaw::weibull(0.7, 1e6), 1000, Rng(4), age);
            Seconds t = 0.0;
            for (int i = 0; i < n; ++i)
                t = s.next();
            return t / n;
        };
        const double fresh = mean_gap(0.0, 200);
        const double aged = mean_gap(1e8, 20000);
        CHECK(fresh < 0.5 * 1000.0);
        CHECK(aged == doctest::Approx(1000.0).epsilon(0.05));
    }

    TEST_CASE("fault process names")
    {
        CHECK(parse_fault_process("platform") == FaultProcess::PlatformRenewal);
        CHECK(parse_fault_process("per-processor") == FaultProcess::PerProcessor);
        CHECK(parse_fault_process("processor") == FaultProcess::PerProcessor);
        CHECK_THROWS_AS(parse_fault_process("cluster"), std::invalid_argument);
    }

    TEST_CASE("trace text format round-trips")
    {
        TraceConfig cfg = config_for("weibull:0.7", 2000.0, 0.7, 0.4, 3000.0);
        cfg.predictor = PredictorParams::make(0.7, 0.4, 3000.0, 1.0, WindowLaw::custom(500.0));
        cfg.false_shape = FalsePredictionShape::Uniform;
        cfg.process = FaultProcess::PerProcessor;
        cfg.n_procs = 64;
        cfg.processor_age = days(3);
        const EventTrace t = generate_trace(cfg, 1234, 1e6);
        std::stringstream ss;
        write_trace(ss, t);
        const EventTrace back = read_trace(ss);
        CHECK(back.seed == t.seed);
        CHECK(back.horizon == t.horizon);
        CHECK(back.config.lead == t.config.lead);
        CHECK(back.config.fault_law.name() == t.config.fault_law.name());
        CHECK(back.config.fault_law.mean == t.config.fault_law.mean);
        CHECK(back.config.false_shape == t.config.false_shape);
        CHECK(back.config.process == t.config.process);
        CHECK(back.config.n_procs == t.config.n_procs);
        CHECK(back.config.processor_age == t.config.processor_age);
        CHECK(back.config.predictor.recall == t.config.predictor.recall);
        CHECK(back.config.predictor.precision == t.config.predictor.precision);
        CHECK(back.config.predictor.window == t.config.predictor.window);
        CHECK(back.config.predictor.window_law.kind == WindowLaw::Kind::Custom);
        CHECK(back.config.predictor.fault_offset_mean() == 500.0);
        CHECK(same_events(back, t));
    }

    TEST_CASE("malformed trace input is rejected")
    {
        std::stringstream empty("1.0 true 2.0\n");
        CHECK_THROWS(read_trace(empty));
        std::stringstream bad("# predckpt-trace v1\n1.0 sideways\n");
        CHECK_THROWS(read_trace(bad));
    }
}
