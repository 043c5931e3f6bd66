#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace predckpt
{

// All durations are seconds stored as double.
using Seconds = double;

inline constexpr Seconds kMinute = 60.0;
inline constexpr Seconds kHour = 3600.0;
inline constexpr Seconds kDay = 86400.0;
// 365-day year, no leap handling.
inline constexpr Seconds kYear = 365.0 * kDay;

constexpr Seconds minutes(double v) { return v * kMinute; }
constexpr Seconds hours(double v) { return v * kHour; }
constexpr Seconds days(double v) { return v * kDay; }
constexpr Seconds years(double v) { return v * kYear; }

/// Parses "600", "600s", "10mn", "2h", "1.5d", "125y". A bare number is seconds.
/// Throws std::invalid_argument on malformed input or an unknown suffix.
Seconds parse_duration(std::string_view text);

/// Renders a duration with the largest unit that keeps the value >= 1.
std::string format_duration(Seconds s);

/// A duration that may be infinite, e.g. the mean time between predictions
/// of a predictor with zero recall. Infinity is a state, not a magic number.
class ExtendedDuration
{
public:
    static ExtendedDuration finite(Seconds s);
    static ExtendedDuration infinite() { return ExtendedDuration{}; }

    bool is_infinite() const noexcept { return !value_.has_value(); }
    bool is_finite() const noexcept { return value_.has_value(); }

    /// Throws std::logic_error when infinite.
    Seconds seconds() const;

    /// 1/duration, zero for an infinite duration.
    double rate() const noexcept { return value_ ? 1.0 / *value_ : 0.0; }

    static ExtendedDuration from_rate(double rate);

    friend bool operator==(const ExtendedDuration&, const ExtendedDuration&) = default;

private:
    ExtendedDuration() = default;
    explicit ExtendedDuration(Seconds s) : value_(s) {}

    std::optional<Seconds> value_;
};

} // namespace predckpt
