#include "predckpt/units.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace predckpt
{

Seconds parse_duration(std::string_view text)
{
    while (!text.empty() && text.front() == ' ')
        text.remove_prefix(1);
    while (!text.empty() && text.back() == ' ')
        text.remove_suffix(1);
    if (text.empty())
        throw std::invalid_argument("empty duration");

    std::size_t split = text.size();
    while (split > 0 && std::isalpha(static_cast<unsigned char>(text[split - 1])))
        --split;
    const std::string number(text.substr(0, split));
    const std::string_view unit = text.substr(split);

    double value = 0.0;
    std::size_t consumed = 0;
    try
    {
        value = std::stod(number, &consumed);
    }
    catch (const std::exception&)
    {
        throw std::invalid_argument("malformed duration '" + std::string(text) + "'");
    }
    if (consumed != number.size() || !std::isfinite(value))
        throw std::invalid_argument("malformed duration '" + std::string(text) + "'");

    if (unit.empty() || unit == "s")
        return value;
    if (unit == "mn" || unit == "min" || unit == "m")
        return minutes(value);
    if (unit == "h")
        return hours(value);
    if (unit == "d")
        return days(value);
    if (unit == "y")
        return years(value);
    throw std::invalid_argument("unknown duration unit '" + std::string(unit) + "'");
}

std::string format_duration(Seconds s)
{
    char buf[64];
    const double a = std::fabs(s);
    if (a >= kYear)
        std::snprintf(buf, sizeof buf, "%.4gy", s / kYear);
    else if (a >= kDay)
        std::snprintf(buf, sizeof buf, "%.4gd", s / kDay);
    else if (a >= kHour)
        std::snprintf(buf, sizeof buf, "%.4gh", s / kHour);
    else if (a >= kMinute)
        std::snprintf(buf, sizeof buf, "%.4gmn", s / kMinute);
    else
        std::snprintf(buf, sizeof buf, "%.4gs", s);
    return buf;
}

ExtendedDuration ExtendedDuration::finite(Seconds s)
{
    if (!std::isfinite(s) || s < 0.0)
        throw std::invalid_argument("finite duration must be a non-negative real");
    return ExtendedDuration{s};
}

Seconds ExtendedDuration::seconds() const
{
    if (!value_)
        throw std::logic_error("infinite duration has no finite value");
    return *value_;
}

ExtendedDuration ExtendedDuration::from_rate(double rate)
{
    if (rate < 0.0 || !std::isfinite(rate))
        throw std::invalid_argument("rate must be finite and non-negative");
    if (rate == 0.0)
        return infinite();
    return finite(1.0 / rate);
}

} // namespace predckpt
