#pragma once

#include "predckpt/platform.hpp"
#include "predckpt/sim_engine.hpp"
#include "predckpt/strategies.hpp"
#include "predckpt/trace_gen.hpp"
#include "predckpt/waste_model.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace predckpt
{

inline constexpr const char* kToolVersion = "1.0.0";

/// Sequential work of the reference job; the job is perfectly parallel, so
/// its base work on N processors is this divided by N.
inline constexpr Seconds kTableTotalWork = 10000.0 * kYear;
/// Running time of the processors before the job starts, for per-processor
/// fault traces. Fitted on the absolute Young execution times of the
/// execution-time tables (see README).
inline constexpr Seconds kTableProcessorAge = 250.0 * kDay;

/// Everything a simulation needs besides the strategy.
struct Scenario
{
    PlatformParams platform;
    PredictorParams predictor;
    std::string law = "exp";  // FailureLaw::parse() syntax; mean = platform MTBF
    FalsePredictionShape false_shape = FalsePredictionShape::SameAsFaults;
    FaultProcess process = FaultProcess::PlatformRenewal;
    FaultProcess false_process = FaultProcess::PlatformRenewal;
    Seconds processor_age = 0.0;
    OverlapPolicy overlap = OverlapPolicy::Drop;
    std::optional<Seconds> base_work;   // at this N; overrides total_work
    Seconds total_work = kTableTotalWork;

    Seconds job_base_work() const;
    TraceConfig trace_config() const;
};

/// Default platform: mu_ind = 125 y, C = R = 10 mn, D = 1 mn.
PlatformParams default_platform(std::uint64_t n_procs);

/// Scenario used to reproduce the execution-time tables: per-processor fault
/// traces of processors aged kTableProcessorAge, job of kTableTotalWork / N.
Scenario table_scenario(std::uint64_t n_procs, double recall, double precision, Seconds window,
                        const std::string& law);

/// Trust choice for simulated strategies.
enum class TrustMode
{
    Optimal,  // the optimizer's q*
    Zero,
    One,      // always take predictions into account
};

std::string to_string(TrustMode m);
TrustMode parse_trust_mode(std::string_view text);

struct SimulateOptions
{
    std::vector<Strategy> strategies{Strategy::Young, Strategy::ExactPrediction,
                                     Strategy::Instant, Strategy::NoCkptI, Strategy::WithCkptI};
    TrustMode trust = TrustMode::One;
    bool capped = false;
    double alpha = kDefaultAlpha;
    int n_reps = 100;
    std::uint64_t seed = 1;
    bool best_period = false;
    int grid_points = 25;
    int best_period_reps = 0;  // 0: same as n_reps
};

/// One output line: plan coordinates, analytic and simulated results.
struct ResultRow
{
    std::string strategy;  // "Young", ..., or "BestPeriod-<name>"
    std::uint64_t n_procs = 0;
    double mu_s = 0.0;
    double recall = 0.0;
    double precision = 0.0;
    double window_s = 0.0;
    int q = 0;
    bool capped = false;
    ExtendedDuration t_r_s = ExtendedDuration::infinite();
    std::optional<double> t_p_s;
    double waste_analytic = 0.0;
    std::optional<double> waste_sim_mean;
    std::optional<double> waste_sim_se;
    std::optional<double> makespan_mean_s;
    std::optional<double> makespan_se_s;
    std::optional<double> gain_vs_young_pct;
    int n_reps = 0;
    std::uint64_t seed = 0;

    bool operator==(const ResultRow&) const = default;
};

/// Plan of one strategy under the options' trust mode and capping.
OptimizedPlan plan_for(Strategy strategy, const Scenario& scenario, TrustMode trust,
                       WasteOptions options);

/// Model waste of `strategy` at the given periods, uncapped or capped.
double analytic_waste(Strategy strategy, const Scenario& scenario, int q,
                      const ExtendedDuration& t_r, std::optional<Seconds> t_p,
                      WasteOptions options);

/// Simulates every requested strategy (Young always included, as the gain
/// reference) on common random numbers, plus BestPeriod rows when asked.
std::vector<ResultRow> simulate_scenario(const Scenario& scenario, const SimulateOptions& opts);

/// Analytic-only rows (optimal plan per strategy, no simulation columns).
std::vector<ResultRow> analyze_scenario(const Scenario& scenario, WasteOptions options);

enum class SweepAxis
{
    NProcs,
    Recall,
    Precision,
    Window,
};

std::string to_string(SweepAxis a);
SweepAxis parse_sweep_axis(std::string_view text);

/// Scenario with one coordinate replaced.
Scenario with_axis(const Scenario& base, SweepAxis axis, double value);

/// simulate_scenario() at every value of the axis, rows concatenated.
std::vector<ResultRow> sweep(const Scenario& base, SweepAxis axis,
                             const std::vector<double>& values, const SimulateOptions& opts);

/// Column order of the CSV output.
const std::vector<std::string>& csv_columns();

/// Header comment `# predckpt-csv v1 tool=<version> seed=<seed>`, the column
/// line, then one line per row. Doubles use 17 significant digits.
void write_csv(std::ostream& out, const std::vector<ResultRow>& rows, std::uint64_t seed);
std::vector<ResultRow> read_csv(std::istream& in);

/// Fixed-width summary table for terminals.
void print_rows(std::ostream& out, const std::vector<ResultRow>& rows);

} // namespace predckpt
