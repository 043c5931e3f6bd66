#include "predckpt/platform.hpp"
#include "predckpt/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <stdexcept>

using namespace predckpt;

TEST_SUITE("platform")
{
    TEST_CASE("duration parsing accepts every unit suffix")
    {
        CHECK(parse_duration("600") == 600.0);
        CHECK(parse_duration("600s") == 600.0);
        CHECK(parse_duration("10mn") == 600.0);
        CHECK(parse_duration("2h") == 7200.0);
        CHECK(parse_duration("1.5d") == 129600.0);
        CHECK(parse_duration("125y") == 125.0 * 365.0 * 86400.0);
        CHECK(parse_duration(" 3mn ") == 180.0);
        CHECK_THROWS_AS(parse_duration(""), std::invalid_argument);
        CHECK_THROWS_AS(parse_duration("10parsecs"), std::invalid_argument);
        CHECK_THROWS_AS(parse_duration("ten"), std::invalid_argument);
        CHECK_THROWS_AS(parse_duration("1.2.3s"), std::invalid_argument);
    }

    TEST_CASE("format_duration picks the largest unit")
    {
        CHECK(format_duration(30.0) == "30s");
        CHECK(format_duration(600.0) == "10mn");
        CHECK(format_duration(7200.0) == "2h");
        CHECK(format_duration(years(125)) == "125y");
    }

    TEST_CASE("extended durations")
    {
        const ExtendedDuration inf = ExtendedDuration::infinite();
        CHECK(inf.is_infinite());
        CHECK(inf.rate() == 0.0);
        CHECK_THROWS_AS((void)inf.seconds(), std::logic_error);
        CHECK(ExtendedDuration::from_rate(0.0).is_infinite());
        CHECK(ExtendedDuration::from_rate(0.5).seconds() == 2.0);
        CHECK(ExtendedDuration::finite(4.0).rate() == 0.25);
        CHECK_THROWS_AS(ExtendedDuration::finite(-1.0), std::invalid_argument);
        CHECK_THROWS_AS(ExtendedDuration::finite(INFINITY), std::invalid_argument);
    }

    TEST_CASE("platform MTBF is the individual MTBF over N")
    {
        const auto p14 = PlatformParams::make(16384, years(125), minutes(10), minutes(1), minutes(10));
        // 125 y / 2^14 is about 4,010 mn, quoted as 4,000 mn.
        CHECK(platform_mtbf(p14) / kMinute == doctest::Approx(4010.1).epsilon(1e-4));
        const auto p19 = PlatformParams::make(524288, years(125), minutes(10), minutes(1), minutes(10));
        CHECK(platform_mtbf(p19) / kMinute == doctest::Approx(125.3).epsilon(1e-3));
        const auto p1 = PlatformParams::make(1, years(125), minutes(10), minutes(1), minutes(10));
        CHECK(platform_mtbf(p1) == years(125));
    }

    TEST_CASE("platform construction rejects invalid parameters")
    {
        CHECK_THROWS_AS(PlatformParams::make(0, years(1), 60, 60, 60), std::invalid_argument);
        CHECK_THROWS_AS(PlatformParams::make(1, years(1), 0, 60, 60), std::invalid_argument);
        CHECK_THROWS_AS(PlatformParams::make(1, years(1), 60, -1, 60), std::invalid_argument);
        CHECK_THROWS_AS(PlatformParams::make(1, years(1), 60, 60, 60, 0.0), std::invalid_argument);
        // C larger than the platform MTBF leaves no admissible period.
        CHECK_THROWS_AS(PlatformParams::make(1000, 1000.0 * 50.0, 60, 60, 60), std::invalid_argument);
        CHECK_NOTHROW(PlatformParams::make(1000, 1000.0 * 60.0, 60, 60, 60));
    }

    TEST_CASE("predictor construction and expected fault offset")
    {
        CHECK_THROWS_AS(PredictorParams::make(-0.1, 0.5), std::invalid_argument);
        CHECK_THROWS_AS(PredictorParams::make(1.1, 0.5), std::invalid_argument);
        CHECK_THROWS_AS(PredictorParams::make(0.5, 0.0), std::invalid_argument);
        CHECK_THROWS_AS(PredictorParams::make(0.5, 0.5, -1.0), std::invalid_argument);
        CHECK_THROWS_AS(PredictorParams::make(0.5, 0.5, 10.0, 1.5), std::invalid_argument);
        CHECK_THROWS_AS(PredictorParams::make(0.5, 0.5, 10.0, 1.0, WindowLaw::custom(11.0)),
                        std::invalid_argument);

        CHECK(PredictorParams::make(0.8, 0.8, 300.0).fault_offset_mean() == 150.0);
        CHECK(PredictorParams::make(0.8, 0.8, 300.0, 1.0, WindowLaw::at_start()).fault_offset_mean() == 0.0);
        CHECK(PredictorParams::make(0.8, 0.8, 300.0, 1.0, WindowLaw::custom(40.0)).fault_offset_mean() == 40.0);
        CHECK(PredictorParams::make(0.8, 0.8, 0.0).fault_offset_mean() == 0.0);
    }

    TEST_CASE("rate algebra on a reference predictor")
    {
        const RateSet rs = derive_rates(minutes(125), PredictorParams::make(0.7, 0.4));
        CHECK(rs.mu_np.seconds() / kMinute == doctest::Approx(416.6667).epsilon(1e-6));
        CHECK(rs.mu_p.seconds() / kMinute == doctest::Approx(71.42857).epsilon(1e-6));
        CHECK(rs.mu_e.seconds() / kMinute == doctest::Approx(60.97561).epsilon(1e-6));
    }

    TEST_CASE("rate algebra at the recall extremes")
    {
        const RateSet perfect = derive_rates(minutes(1000), PredictorParams::make(1.0, 1.0));
        CHECK(perfect.mu_np.is_infinite());
        CHECK(perfect.mu_p.seconds() == minutes(1000));
        CHECK(perfect.mu_e.seconds() == doctest::Approx(minutes(1000)).epsilon(1e-15));

        const RateSet none = derive_rates(minutes(1000), PredictorParams::make(0.0, 0.5));
        CHECK(none.mu_p.is_infinite());
        CHECK(none.mu_np.seconds() == minutes(1000));
        CHECK(none.mu_e.seconds() == doctest::Approx(minutes(1000)).epsilon(1e-15));
    }

    TEST_CASE("rate identities hold over random predictors")
    {
        Rng rng(7);
        for (int i = 0; i < 1000; ++i)
        {
            const double mu = 100.0 + 1e6 * rng.uniform();
            const double r = rng.uniform();
            const double p = 0.01 + 0.99 * rng.uniform();
            const RateSet rs = derive_rates(mu, PredictorParams::make(r, p));
            const double inv_e = rs.mu_p.rate() + rs.mu_np.rate();
            CHECK(rs.mu_e.rate() == doctest::Approx(inv_e).epsilon(1e-12));
            // True plus false prediction rates add up to the prediction rate.
            const double rates = r / mu * (1.0 + (1.0 - p) / p);
            CHECK(rs.mu_p.rate() == doctest::Approx(rates).epsilon(1e-12));
        }
    }

    TEST_CASE("multi-event probability")
    {
        CHECK(multi_event_prob(0.0, 1.0) == 0.0);
        CHECK(multi_event_prob(1.0, 1.0) == doctest::Approx(1.0 - 2.0 * std::exp(-1.0)).epsilon(1e-14));
        CHECK(multi_event_prob(27.0, 100.0) == doctest::Approx(0.0305).epsilon(0.0005 / 0.0305));
        double prev = 0.0;
        for (double b = 0.01; b < 50.0; b *= 1.3)
        {
            const double pi = multi_event_prob(b, 1.0);
            CHECK(pi > prev);
            prev = pi;
        }
        CHECK(multi_event_prob(1e3, 1.0) == doctest::Approx(1.0));
    }

    TEST_CASE("scaling a platform scales every duration")
    {
        const auto p = PlatformParams::make(64, years(125), minutes(10), minutes(1), minutes(10), minutes(5));
        const auto q = p.scaled(2.0);
        CHECK(q.n_procs == 64);
        CHECK(q.mtbf_ind == 2.0 * p.mtbf_ind);
        CHECK(q.ckpt == 2.0 * p.ckpt);
        CHECK(q.downtime == 2.0 * p.downtime);
        CHECK(q.recovery == 2.0 * p.recovery);
        CHECK(*q.migration == 2.0 * *p.migration);
    }
}
