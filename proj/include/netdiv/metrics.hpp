/**
 * @file metrics.hpp
 * @brief Security metrics over (ensemble-mean) traces and parameter curves.
 *
 *   TTS  first t with cc(t) > tau
 *   ASD  TTS under a strategy minus TTS under monoculture
 *   AWD  max_t cc(t)
 *   AEC  extra exploit budget needed to push AWD above tau
 *   VT   largest quality Q whose AWD stays within tau
 *   AOC  mean replaced-program fraction over t = 1..T
 */
#pragma once

#include "netdiv/engine.hpp"

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace netdiv {

/// std::nullopt stands for "not achieved" throughout.
inline std::optional<int> tts(const MeanTrace& trace, double tau) {
    for (const auto& r : trace) {
        if (r.cc > tau) return r.t;
    }
    return std::nullopt;
}

struct Slowdown {
    int steps = 0;
    bool censored = false;
};

/// Censored when the strategy never breaks the goal: reported as T - TTS_1.
inline std::optional<Slowdown> asd(const MeanTrace& trace, const MeanTrace& baseline, double tau,
                                   int horizon) {
    const auto base = tts(baseline, tau);
    if (!base) return std::nullopt;
    const auto own = tts(trace, tau);
    if (!own) return Slowdown{horizon - *base, true};
    return Slowdown{*own - *base, false};
}

inline double awd(const MeanTrace& trace) {
    double worst = 0.0;
    for (const auto& r : trace) worst = std::max(worst, r.cc);
    return worst;
}

inline double aoc(const MeanTrace& trace, int horizon) {
    if (horizon <= 0) return 0.0;
    double sum = 0.0;
    for (const auto& r : trace) {
        if (r.t >= 1 && r.t <= horizon) sum += r.oc;
    }
    return sum / horizon;
}

/// (grid value, AWD) pairs in ascending grid order.
using AwdCurve = std::vector<std::pair<double, double>>;

/// First grid point whose AWD exceeds tau.
inline std::optional<double> first_breach(const AwdCurve& curve, double tau) {
    if (curve.empty()) throw std::invalid_argument("first_breach: empty grid");
    for (auto [value, worst] : curve) {
        if (worst > tau) return value;
    }
    return std::nullopt;
}

/// True when AWD never drops by more than `slack` along the grid.
inline bool non_decreasing(const AwdCurve& curve, double slack = 0.0) {
    for (std::size_t i = 1; i < curve.size(); ++i) {
        if (curve[i].second + slack < curve[i - 1].second) return false;
    }
    return true;
}

struct ExtraCost {
    int exploits = 0;
    double fraction = 0.0;  // of the full catalog hbar*X*Q
};

/**
 * AI*(strategy) - AI*(monoculture) over a shared budget grid. Not achieved when
 * either curve never breaches tau.
 */
inline std::optional<ExtraCost> aec(const AwdCurve& strategy, const AwdCurve& baseline, double tau,
                                    double full_catalog) {
    const auto own = first_breach(strategy, tau);
    const auto base = first_breach(baseline, tau);
    if (!own || !base) return std::nullopt;
    ExtraCost out;
    out.exploits = static_cast<int>(std::lround(*own - *base));
    out.fraction = full_catalog > 0 ? out.exploits / full_catalog : 0.0;
    return out;
}

/// Largest grid Q with AWD(Q) <= tau, or 0.
inline double vt(const AwdCurve& by_quality, double tau) {
    if (by_quality.empty()) throw std::invalid_argument("vt: empty grid");
    double best = 0.0;
    for (auto [q, worst] : by_quality) {
        if (worst <= tau) best = std::max(best, q);
    }
    return best;
}

struct CostPoint {
    double aoc = 0.0;
    double awd = 0.0;
};

struct CostRange {
    double min = 0.0;
    double max = 0.0;
};

/// AOC range over the family members that keep AWD within tau.
inline std::optional<CostRange> aoc_extrema(const std::vector<CostPoint>& family, double tau) {
    std::optional<CostRange> out;
    for (const auto& p : family) {
        if (p.awd > tau) continue;
        if (!out)
            out = CostRange{p.aoc, p.aoc};
        else {
            out->min = std::min(out->min, p.aoc);
            out->max = std::max(out->max, p.aoc);
        }
    }
    return out;
}

struct MetricsReport {
    std::optional<int> tts;
    std::optional<Slowdown> asd;
    double awd = 0.0;
    double aoc = 0.0;
};

inline MetricsReport summarize(const MeanTrace& trace, const MeanTrace* baseline, double tau,
                               int horizon) {
    MetricsReport r;
    r.tts = tts(trace, tau);
    if (baseline) r.asd = asd(trace, *baseline, tau, horizon);
    r.awd = awd(trace);
    r.aoc = aoc(trace, horizon);
    return r;
}

}  // namespace netdiv
