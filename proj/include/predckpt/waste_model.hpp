#pragma once

#include "predckpt/platform.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace predckpt
{

enum class Strategy
{
    Young,
    ExactPrediction,
    Migration,
    Instant,
    NoCkptI,
    WithCkptI,
};

std::string to_string(Strategy s);
/// Case-insensitive; throws std::invalid_argument on an unknown name.
Strategy parse_strategy(std::string_view name);

/// True for the three strategies that act on a prediction window.
constexpr bool uses_window(Strategy s)
{
    return s == Strategy::Instant || s == Strategy::NoCkptI || s == Strategy::WithCkptI;
}

/// A period that violates the validity cap (capped mode) or C <= T.
class DomainError : public std::domain_error
{
public:
    using std::domain_error::domain_error;
};

inline constexpr double kDefaultAlpha = 0.27;

struct WasteOptions
{
    double alpha = kDefaultAlpha;
    bool capped = true;
};

struct WasteQuery
{
    PlatformParams platform;
    PredictorParams predictor;
    ExtendedDuration period_tr = ExtendedDuration::infinite();
    std::optional<Seconds> period_tp;
    WasteOptions options;

    static WasteQuery make(const PlatformParams& platform, const PredictorParams& predictor,
                           Seconds period_tr, std::optional<Seconds> period_tp = std::nullopt,
                           WasteOptions options = {});
};

/// C/T + (T/2 + D + R)/mu. The predictor in the query is ignored.
double waste_young(const WasteQuery& query);

/// Exact-date predictions with trust probability q.
double waste_exact_date(const WasteQuery& query, double q);

/// Exact-date predictions answered by a migration of duration M instead of a
/// checkpoint. Throws std::invalid_argument when the platform carries no M.
double waste_migration(const WasteQuery& query, double q);

/// Mean time spent in proactive mode per prediction, q((1-p)I + p E_I^f),
/// using the predictor's own trust probability.
Seconds i_prime(const PredictorParams& pred);

/// Window strategy with proactive checkpoints of period T_P inside the window.
double waste_withckpt(const WasteQuery& query, double q);

/// Window strategy that treats the window start as an exact date.
double waste_instant(const WasteQuery& query, double q);

/// Window strategy that computes through the window without checkpointing.
double waste_nockpt(const WasteQuery& query, double q);

/// Dispatches to the waste function of `strategy`.
double waste_of(Strategy strategy, const WasteQuery& query, double q);

struct OptimizedPlan
{
    Strategy strategy = Strategy::Young;
    int q_star = 0;
    /// Infinite for the checkpoint-free plan (r = 1, q = 1, uncapped).
    ExtendedDuration t_r_star = ExtendedDuration::infinite();
    std::optional<Seconds> t_p_star;
    double waste_star = 0.0;  // clamped to [0, 1]
    double waste_raw = 0.0;   // unclamped model value
    /// False when the validity cap falls below C; the plan then uses T_R = C.
    bool feasible = true;

    bool checkpoint_free() const { return t_r_star.is_infinite(); }
};

/// Optimal regular period of one trust branch (q in {0,1}) of `strategy`.
/// Capped: q=0 uses min(alpha mu, max(sqrt(2 mu C), C)); q=1 uses alpha mu_e
/// (minus I for window strategies) in place of alpha mu and sqrt(2 mu C/(1-r)).
/// Uncapped: the unconstrained extremum, infinite when 1 - r q = 0.
OptimizedPlan optimize_branch(Strategy strategy, const PlatformParams& platform,
                              const PredictorParams& pred, int q, WasteOptions options = {});

/// Best of the two trust branches for exact-date predictions.
OptimizedPlan opt_period_exact(const PlatformParams& platform, const PredictorParams& pred,
                               WasteOptions options = {});

/// Unconstrained proactive period sqrt(K C), K = ((1-p)I + p E_I^f)/p.
Seconds tp_extremum(const PredictorParams& pred, Seconds ckpt);

/// Proactive period dividing I into an integer number of pieces, chosen
/// among the two divisors around tp_extremum(). Requires C <= I.
Seconds opt_period_tp(const PredictorParams& pred, Seconds ckpt);

/// True when computing through the window beats checkpointing inside it,
/// i.e. 2 sqrt(K C) >= E_I^f. Requires I > 0.
bool dominance_nockpt(const PredictorParams& pred, Seconds ckpt);

/// Largest window for which dominance_nockpt() holds under uniform fault
/// placement: 16 (1 - p/2) C / p.
Seconds uniform_dominance_threshold(double precision, Seconds ckpt);

/// Every applicable strategy at its best trust branch, sorted by waste.
/// WithCkptI is omitted when I < C or when dominance_nockpt() holds;
/// Migration only appears when the platform carries M.
std::vector<OptimizedPlan> optimize_all(const PlatformParams& platform,
                                        const PredictorParams& pred, WasteOptions options = {});

} // namespace predckpt
