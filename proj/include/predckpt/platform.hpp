#pragma once

#include "predckpt/units.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace predckpt
{

/// Physical platform and checkpoint cost model. Construct through make(),
/// which enforces positivity and C <= platform MTBF.
struct PlatformParams
{
    std::uint64_t n_procs = 1;
    Seconds mtbf_ind = 0.0;  // individual processor MTBF
    Seconds ckpt = 0.0;      // C
    Seconds downtime = 0.0;  // D
    Seconds recovery = 0.0;  // R
    std::optional<Seconds> migration;  // M, only used by the migration model

    static PlatformParams make(std::uint64_t n_procs, Seconds mtbf_ind, Seconds ckpt,
                               Seconds downtime, Seconds recovery,
                               std::optional<Seconds> migration = std::nullopt);

    /// Throws std::invalid_argument describing the first violated invariant.
    void validate() const;

    /// Copy with every duration multiplied by `factor`.
    PlatformParams scaled(double factor) const;
};

/// Platform MTBF, mtbf_ind / N.
Seconds platform_mtbf(const PlatformParams& platform);

/// Where a predicted fault falls inside its window [t0, t0 + I].
struct WindowLaw
{
    enum class Kind
    {
        UniformInWindow,
        AtWindowStart,
        Custom,
    };

    Kind kind = Kind::UniformInWindow;
    Seconds custom_mean_offset = 0.0;  // only for Custom

    static WindowLaw uniform() { return {Kind::UniformInWindow, 0.0}; }
    static WindowLaw at_start() { return {Kind::AtWindowStart, 0.0}; }
    static WindowLaw custom(Seconds mean_offset) { return {Kind::Custom, mean_offset}; }

    std::string name() const;
};

struct PredictorParams
{
    double recall = 0.0;     // r
    double precision = 1.0;  // p
    Seconds window = 0.0;    // I
    double trust = 1.0;      // q
    WindowLaw window_law = WindowLaw::uniform();

    static PredictorParams make(double recall, double precision, Seconds window = 0.0,
                                double trust = 1.0, WindowLaw law = WindowLaw::uniform());

    static PredictorParams none() { return make(0.0, 1.0); }

    void validate() const;

    /// E_I^f: expected offset of a true fault from the window start.
    Seconds fault_offset_mean() const;

    PredictorParams with_trust(double q) const;
    PredictorParams with_window(Seconds window) const;
};

/// Mean times between the three event families derived from mu, r and p.
struct RateSet
{
    Seconds mu = 0.0;        // all faults
    ExtendedDuration mu_p;   // predictions, true and false
    ExtendedDuration mu_np;  // unpredicted faults
    ExtendedDuration mu_e;   // every event
};

/// mu_NP = mu/(1-r), mu_P = p*mu/r, 1/mu_e = 1/mu_P + 1/mu_NP.
RateSet derive_rates(Seconds mu, const PredictorParams& pred);

/// Probability of two or more Poisson events in `period` when events arrive
/// with mean inter-arrival `mean`: 1 - (1 + beta) e^-beta with beta = period/mean.
double multi_event_prob(Seconds period, Seconds mean);

} // namespace predckpt
