#include "predckpt/trace_gen.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace predckpt
{

namespace
{

constexpr std::uint64_t kFaultStream = 1;
constexpr std::uint64_t kFalseStream = 2;
constexpr std::uint64_t kOffsetStream = 3;

std::string fmt17(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string lower(std::string_view s)
{
    std::string out(s);
    for (auto& ch : out)
        ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return out;
}

} // namespace

FailureLaw FailureLaw::exponential(Seconds mean)
{
    if (!(mean > 0.0))
        throw std::invalid_argument("failure law mean must be positive");
    return {Kind::Exponential, 1.0, mean};
}

FailureLaw FailureLaw::weibull(double shape, Seconds mean)
{
    if (!(shape > 0.0))
        throw std::invalid_argument("Weibull shape must be positive");
    if (!(mean > 0.0))
        throw std::invalid_argument("failure law mean must be positive");
    return {Kind::Weibull, shape, mean};
}

FailureLaw FailureLaw::uniform(Seconds mean)
{
    if (!(mean > 0.0))
        throw std::invalid_argument("failure law mean must be positive");
    return {Kind::UniformRenewal, 1.0, mean};
}

FailureLaw FailureLaw::parse(std::string_view text, Seconds mean)
{
    const std::string t = lower(text);
    if (t == "exp" || t == "exponential")
        return exponential(mean);
    if (t == "uniform")
        return uniform(mean);
    const std::string prefix = "weibull:";
    if (t.rfind(prefix, 0) == 0)
    {
        std::size_t used = 0;
        double k = 0.0;
        try
        {
            k = std::stod(t.substr(prefix.size()), &used);
        }
        catch (const std::exception&)
        {
            used = 0;
        }
        if (used == 0 || used != t.size() - prefix.size())
            throw std::invalid_argument("malformed Weibull law '" + std::string(text) + "'");
        return weibull(k, mean);
    }
    throw std::invalid_argument("unknown failure law '" + std::string(text) +
                                "' (expected exp, weibull:<k> or uniform)");
}

FailureLaw FailureLaw::with_mean(Seconds m) const
{
    FailureLaw law = *this;
    if (!(m > 0.0))
        throw std::invalid_argument("failure law mean must be positive");
    law.mean = m;
    return law;
}

Seconds FailureLaw::weibull_scale() const
{
    return mean / lanczos_gamma(1.0 + 1.0 / shape);
}

std::string FailureLaw::name() const
{
    switch (kind)
    {
    case Kind::Exponential:
        return "exp";
    case Kind::Weibull: {
        char buf[32];
        std::snprintf(buf, sizeof buf, "weibull:%g", shape);
        return buf;
    }
    case Kind::UniformRenewal:
        return "uniform";
    }
    return "?";
}

double lanczos_gamma(double x)
{
    static constexpr double g = 7.0;
    static constexpr std::array<double, 9> coef = {
        0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
        771.32342877765313,      -176.61502916214059,   12.507343278686905,
        -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};
    constexpr double pi = 3.14159265358979323846;

    if (x < 0.5)
        return pi / (std::sin(pi * x) * lanczos_gamma(1.0 - x));
    x -= 1.0;
    double a = coef[0];
    const double t = x + g + 0.5;
    for (std::size_t i = 1; i < coef.size(); ++i)
        a += coef[i] / (x + static_cast<double>(i));
    return std::sqrt(2.0 * pi) * std::pow(t, x + 0.5) * std::exp(-t) * a;
}

Seconds sample_interarrival(const FailureLaw& law, Rng& rng)
{
    switch (law.kind)
    {
    case FailureLaw::Kind::Exponential:
        return -law.mean * std::log(rng.uniform_open0());
    case FailureLaw::Kind::Weibull:
        return law.weibull_scale() * std::pow(-std::log(rng.uniform_open0()), 1.0 / law.shape);
    case FailureLaw::Kind::UniformRenewal:
        return 2.0 * law.mean * rng.uniform();
    }
    throw std::logic_error("unhandled failure law");
}

SuperposedRenewal::SuperposedRenewal(FailureLaw law_ind, std::uint64_t n, Rng rng, Seconds age)
    : law_(law_ind), rng_(rng), survivors_(n),
      step_(16.0 * law_ind.mean / static_cast<double>(n)), age_(age)
{
    if (n < 1)
        throw std::invalid_argument("superposed renewal needs at least one process");
    if (!(age >= 0.0))
        throw std::invalid_argument("processor age must be non-negative");
}

double SuperposedRenewal::cum_hazard(Seconds t) const
{
    switch (law_.kind)
    {
    case FailureLaw::Kind::Exponential:
        return t / law_.mean;
    case FailureLaw::Kind::Weibull:
        return std::pow(t / law_.weibull_scale(), law_.shape);
    case FailureLaw::Kind::UniformRenewal:
        if (t >= 2.0 * law_.mean)
            return std::numeric_limits<double>::infinity();
        return -std::log1p(-t / (2.0 * law_.mean));
    }
    return 0.0;
}

Seconds SuperposedRenewal::inv_cum_hazard(double h) const
{
    switch (law_.kind)
    {
    case FailureLaw::Kind::Exponential:
        return h * law_.mean;
    case FailureLaw::Kind::Weibull:
        return law_.weibull_scale() * std::pow(h, 1.0 / law_.shape);
    case FailureLaw::Kind::UniformRenewal:
        return -2.0 * law_.mean * std::expm1(-h);
    }
    return 0.0;
}

void SuperposedRenewal::advance()
{
    const Seconds a = resolved_;
    const Seconds b = a + step_;
    resolved_ = b;
    if (survivors_ == 0)
        return;
    const double ha = cum_hazard(a);
    const double dh = cum_hazard(b) - ha;
    // Probability that a process alive at a fails in (a, b].
    const double q = std::isinf(dh) ? 1.0 : -std::expm1(-dh);
    if (q <= 0.0)
        return;

    // Binomial(survivors, q) by geometric skips over the survivors.
    std::uint64_t failed = 0;
    if (q >= 1.0)
        failed = survivors_;
    else
    {
        const double log_keep = std::log1p(-q);
        double pos = 0.0;
        for (;;)
        {
            pos += std::floor(std::log(rng_.uniform_open0()) / log_keep) + 1.0;
            if (pos > static_cast<double>(survivors_))
                break;
            ++failed;
        }
    }
    for (std::uint64_t i = 0; i < failed; ++i)
    {
        // First failure date conditioned on (a, b], by inverting the hazard.
        const double u = rng_.uniform();
        const double h = ha - std::log1p(-u * q);
        const Seconds t = std::clamp(inv_cum_hazard(h), std::nextafter(a, b), b);
        heap_.push_back(t);
        std::push_heap(heap_.begin(), heap_.end(), std::greater<>());
    }
    survivors_ -= failed;
}

Seconds SuperposedRenewal::next()
{
    for (;;)
    {
        while (heap_.empty() || (survivors_ > 0 && heap_.front() > resolved_))
            advance();
        std::pop_heap(heap_.begin(), heap_.end(), std::greater<>());
        const Seconds t = heap_.back();
        // The failed process renews.
        heap_.back() = t + sample_interarrival(law_, rng_);
        std::push_heap(heap_.begin(), heap_.end(), std::greater<>());
        if (t > age_)
            return t - age_;
    }
}

std::string to_string(FaultProcess f)
{
    return f == FaultProcess::PlatformRenewal ? "platform" : "per-processor";
}

FaultProcess parse_fault_process(std::string_view text)
{
    const std::string t = lower(text);
    if (t == "platform")
        return FaultProcess::PlatformRenewal;
    if (t == "per-processor" || t == "processor")
        return FaultProcess::PerProcessor;
    throw std::invalid_argument("fault process must be 'platform' or 'per-processor'");
}

std::vector<FaultSample> gen_fault_trace(const FailureLaw& law, Seconds horizon, double recall,
                                         Rng& rng)
{
    if (!(horizon > 0.0))
        throw std::invalid_argument("trace horizon must be positive");
    std::vector<FaultSample> out;
    Seconds t = 0.0;
    for (;;)
    {
        t += sample_interarrival(law, rng);
        const bool predicted = rng.bernoulli(recall);
        if (t > horizon)
            break;
        out.push_back({t, predicted});
    }
    return out;
}

std::string to_string(FalsePredictionShape s)
{
    return s == FalsePredictionShape::SameAsFaults ? "same" : "uniform";
}

FalsePredictionShape parse_false_shape(std::string_view text)
{
    const std::string t = lower(text);
    if (t == "same")
        return FalsePredictionShape::SameAsFaults;
    if (t == "uniform")
        return FalsePredictionShape::Uniform;
    throw std::invalid_argument("false-prediction shape must be 'same' or 'uniform'");
}

ExtendedDuration false_prediction_mean(Seconds mu, double recall, double precision)
{
    if (recall <= 0.0 || precision >= 1.0)
        return ExtendedDuration::infinite();
    return ExtendedDuration::finite(precision * mu / (recall * (1.0 - precision)));
}

namespace
{

FailureLaw false_law(const FailureLaw& fault_law, FalsePredictionShape shape, Seconds mean)
{
    if (shape == FalsePredictionShape::Uniform)
        return FailureLaw::uniform(mean);
    return fault_law.with_mean(mean);
}

} // namespace

std::vector<Seconds> gen_false_prediction_trace(const FailureLaw& fault_law,
                                                FalsePredictionShape shape, Seconds mu,
                                                double recall, double precision,
                                                Seconds horizon, Rng& rng)
{
    std::vector<Seconds> out;
    const ExtendedDuration mean = false_prediction_mean(mu, recall, precision);
    if (mean.is_infinite())
        return out;
    const FailureLaw law = false_law(fault_law, shape, mean.seconds());
    for (Seconds t = sample_interarrival(law, rng); t <= horizon;
         t += sample_interarrival(law, rng))
        out.push_back(t);
    return out;
}

std::string to_string(EventKind k)
{
    switch (k)
    {
    case EventKind::UnpredictedFault:
        return "unpredicted";
    case EventKind::TruePrediction:
        return "true";
    case EventKind::FalsePrediction:
        return "false";
    }
    return "?";
}

bool event_before(const TraceEvent& a, const TraceEvent& b)
{
    if (a.time != b.time)
        return a.time < b.time;
    if (a.kind != b.kind)
        return static_cast<int>(a.kind) < static_cast<int>(b.kind);
    return a.index < b.index;
}

Seconds sample_window_offset(const PredictorParams& pred, Rng& rng)
{
    const double u = rng.uniform();
    const Seconds window = pred.window;
    switch (pred.window_law.kind)
    {
    case WindowLaw::Kind::UniformInWindow:
        return u * window;
    case WindowLaw::Kind::AtWindowStart:
        return 0.0;
    case WindowLaw::Kind::Custom: {
        // I u^a has mean I/(a+1).
        const Seconds mean = pred.window_law.custom_mean_offset;
        if (mean <= 0.0)
            return 0.0;
        if (mean >= window)
            return window;
        return window * std::pow(u, window / mean - 1.0);
    }
    }
    return 0.0;
}

namespace
{

TraceEvent fault_event(const TraceConfig& config, Seconds t, bool predicted, std::uint64_t index,
                       Rng& offset_rng)
{
    TraceEvent ev;
    ev.fault_time = t;
    ev.index = index;
    if (!predicted)
    {
        ev.kind = EventKind::UnpredictedFault;
        ev.time = t;
        ev.window_start = t;
        return ev;
    }
    ev.kind = EventKind::TruePrediction;
    const Seconds offset = std::min(sample_window_offset(config.predictor, offset_rng), t);
    ev.window_start = t - offset;
    ev.time = ev.window_start - config.lead;
    return ev;
}

TraceEvent false_event(const TraceConfig& config, Seconds t, std::uint64_t index)
{
    TraceEvent ev;
    ev.kind = EventKind::FalsePrediction;
    ev.window_start = t;
    ev.fault_time = t;
    ev.time = t - config.lead;
    ev.index = index;
    return ev;
}

} // namespace

EventTrace merge_traces(const std::vector<FaultSample>& faults,
                        const std::vector<Seconds>& false_preds, const TraceConfig& config,
                        Rng& offset_rng)
{
    EventTrace trace;
    trace.config = config;
    trace.events.reserve(faults.size() + false_preds.size());
    std::uint64_t index = 0;
    for (const FaultSample& f : faults)
    {
        trace.events.push_back(fault_event(config, f.time, f.predicted, index++, offset_rng));
        trace.horizon = std::max(trace.horizon, f.time);
    }
    index = 0;
    for (Seconds t : false_preds)
    {
        trace.events.push_back(false_event(config, t, index++));
        trace.horizon = std::max(trace.horizon, t);
    }
    std::sort(trace.events.begin(), trace.events.end(), event_before);
    return trace;
}

TraceStream::TraceStream(TraceConfig config, std::uint64_t seed, Seconds initial_horizon)
    : fault_rng_(Rng(seed).split(kFaultStream)), offset_rng_(Rng(seed).split(kOffsetStream))
{
    config.predictor.validate();
    trace_.config = config;
    trace_.seed = seed;
    const ExtendedDuration false_mean = false_prediction_mean(
        config.fault_law.mean, config.predictor.recall, config.predictor.precision);
    if (config.process == FaultProcess::PerProcessor)
        superposed_faults_.emplace(config.fault_law.with_mean(config.fault_law.mean *
                                                              static_cast<double>(config.n_procs)),
                                   config.n_procs, fault_rng_.split(0), config.processor_age);
    if (false_mean.is_finite())
    {
        const FailureLaw law =
            false_law(config.fault_law, config.false_shape, false_mean.seconds());
        if (config.false_process == FaultProcess::PerProcessor &&
            config.false_shape == FalsePredictionShape::SameAsFaults)
            superposed_false_.emplace(law.with_mean(law.mean * static_cast<double>(config.n_procs)),
                                      config.n_procs, Rng(seed).split(kFalseStream),
                                      config.processor_age);
        else
            false_preds_.emplace(law, Rng(seed).split(kFalseStream));
    }
    extend_to(initial_horizon);
}

void TraceStream::extend_to(Seconds horizon)
{
    if (!(horizon > 0.0))
        throw std::invalid_argument("trace horizon must be positive");
    if (started_ && horizon <= trace_.horizon)
        return;
    const Seconds old_cutoff = started_ ? trace_.complete_until() : 0.0;
    const std::size_t old_size = trace_.events.size();
    const TraceConfig& config = trace_.config;
    started_ = true;

    for (;;)
    {
        if (!pending_fault_)
        {
            // Same draw order as gen_fault_trace().
            fault_clock_ = next_fault_date();
            const bool predicted = fault_rng_.bernoulli(config.predictor.recall);
            pending_fault_ = FaultSample{fault_clock_, predicted};
        }
        if (pending_fault_->time > horizon)
            break;
        trace_.events.push_back(fault_event(config, pending_fault_->time,
                                            pending_fault_->predicted, fault_count_++,
                                            offset_rng_));
        pending_fault_.reset();
    }
    while (false_preds_ || superposed_false_)
    {
        if (!pending_false_)
            pending_false_ = next_false_date();
        if (*pending_false_ > horizon)
            break;
        trace_.events.push_back(false_event(config, *pending_false_, false_count_++));
        pending_false_.reset();
    }
    trace_.horizon = horizon;

    // Events announced before the old cutoff are already in final order.
    auto first = std::partition_point(
        trace_.events.begin(), trace_.events.begin() + static_cast<std::ptrdiff_t>(old_size),
        [&](const TraceEvent& e) { return e.time < old_cutoff; });
    std::sort(first, trace_.events.end(), event_before);
}

Seconds TraceStream::next_fault_date()
{
    if (superposed_faults_)
        return superposed_faults_->next();
    return fault_clock_ + sample_interarrival(trace_.config.fault_law, fault_rng_);
}

Seconds TraceStream::next_false_date()
{
    return superposed_false_ ? superposed_false_->next() : false_preds_->next();
}

EventTrace generate_trace(const TraceConfig& config, std::uint64_t seed, Seconds horizon)
{
    TraceStream stream(config, seed, horizon);
    return stream.trace();
}

void write_trace(std::ostream& out, const EventTrace& trace)
{
    const TraceConfig& c = trace.config;
    out << "# predckpt-trace v1\n";
    out << "# seed " << trace.seed << "\n";
    out << "# horizon_s " << fmt17(trace.horizon) << "\n";
    out << "# lead_s " << fmt17(c.lead) << "\n";
    out << "# fault_law " << c.fault_law.name() << " " << fmt17(c.fault_law.mean) << "\n";
    out << "# false_shape " << to_string(c.false_shape) << "\n";
    out << "# fault_process " << to_string(c.process) << " " << c.n_procs << " "
        << fmt17(c.processor_age) << " " << to_string(c.false_process) << "\n";
    out << "# recall " << fmt17(c.predictor.recall) << "\n";
    out << "# precision " << fmt17(c.predictor.precision) << "\n";
    out << "# window_s " << fmt17(c.predictor.window) << "\n";
    out << "# window_law " << c.predictor.window_law.name() << " "
        << fmt17(c.predictor.window_law.custom_mean_offset) << "\n";
    for (const TraceEvent& e : trace.events)
    {
        out << fmt17(e.time) << ' ' << to_string(e.kind);
        if (e.kind == EventKind::TruePrediction)
            out << ' ' << fmt17(e.fault_time);
        out << '\n';
    }
}

EventTrace read_trace(std::istream& in)
{
    EventTrace trace;
    TraceConfig& c = trace.config;
    std::string line;
    std::uint64_t fault_index = 0;
    std::uint64_t false_index = 0;
    std::string law_name = "exp";
    double law_mean = 1.0;
    bool saw_magic = false;
    int line_no = 0;

    const auto fail = [&](const std::string& what) {
        throw std::runtime_error("trace line " + std::to_string(line_no) + ": " + what);
    };

    while (std::getline(in, line))
    {
        ++line_no;
        if (line.empty())
            continue;
        std::istringstream ls(line);
        if (line[0] == '#')
        {
            std::string hash, key;
            ls >> hash >> key;
            if (key == "predckpt-trace")
            {
                std::string version;
                ls >> version;
                if (version != "v1")
                    fail("unsupported trace version '" + version + "'");
                saw_magic = true;
            }
            else if (key == "seed")
                ls >> trace.seed;
            else if (key == "horizon_s")
                ls >> trace.horizon;
            else if (key == "lead_s")
                ls >> c.lead;
            else if (key == "fault_law")
                ls >> law_name >> law_mean;
            else if (key == "false_shape")
            {
                std::string s;
                ls >> s;
                c.false_shape = parse_false_shape(s);
            }
            else if (key == "fault_process")
            {
                std::string s, f;
                ls >> s >> c.n_procs >> c.processor_age >> f;
                c.process = parse_fault_process(s);
                c.false_process = parse_fault_process(f);
            }
            else if (key == "recall")
                ls >> c.predictor.recall;
            else if (key == "precision")
                ls >> c.predictor.precision;
            else if (key == "window_s")
                ls >> c.predictor.window;
            else if (key == "window_law")
            {
                std::string name;
                double mean = 0.0;
                ls >> name >> mean;
                if (name == "uniform")
                    c.predictor.window_law = WindowLaw::uniform();
                else if (name == "start")
                    c.predictor.window_law = WindowLaw::at_start();
                else if (name == "custom")
                    c.predictor.window_law = WindowLaw::custom(mean);
                else
                    fail("unknown window law '" + name + "'");
            }
            continue;
        }
        if (!saw_magic)
            fail("missing '# predckpt-trace v1' header");

        TraceEvent e;
        std::string kind;
        if (!(ls >> e.time >> kind))
            fail("expected '<time_s> <kind>'");
        if (kind == "unpredicted")
        {
            e.kind = EventKind::UnpredictedFault;
            e.fault_time = e.time;
            e.window_start = e.time;
            e.index = fault_index++;
        }
        else if (kind == "true")
        {
            e.kind = EventKind::TruePrediction;
            if (!(ls >> e.fault_time))
                fail("true prediction without fault time");
            e.window_start = e.time + c.lead;
            e.index = fault_index++;
        }
        else if (kind == "false")
        {
            e.kind = EventKind::FalsePrediction;
            e.window_start = e.time + c.lead;
            e.fault_time = e.window_start;
            e.index = false_index++;
        }
        else
            fail("unknown event kind '" + kind + "'");
        trace.events.push_back(e);
    }
    if (!saw_magic)
        throw std::runtime_error("not a predckpt trace (missing header)");
    c.fault_law = FailureLaw::parse(law_name, law_mean);
    // Fault indices follow fault dates; restore them so event_before() ties
    // break the same way as at generation time.
    std::vector<TraceEvent*> faults;
    for (auto& e : trace.events)
        if (e.carries_fault())
            faults.push_back(&e);
    std::stable_sort(faults.begin(), faults.end(), [](const TraceEvent* a, const TraceEvent* b) {
        return a->fault_time < b->fault_time;
    });
    for (std::size_t i = 0; i < faults.size(); ++i)
        faults[i]->index = i;
    return trace;
}

} // namespace predckpt
