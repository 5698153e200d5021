#pragma once

// Presets for the six evaluation figures. Each preset is one or more sweeps
// whose rows are concatenated; multi-sweep presets (figure 4) relabel curves.
//
// Full scale: N = 4096, K = 500, G = 20 taps (10 + 11), 20 trials.
// Desk scale: N = 64, K = 64, G = 8 taps (4 + 5), 100 trials.

#include "rss/harness.hpp"
#include "rss/report.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace rss {

struct FigurePlan
{
    int figure = 0;
    std::string title;
    std::vector<SweepSpec> sweeps;
};

inline constexpr std::size_t desk_scale_factor = 64; // full-scale N / desk-scale N

/// Shrinks a scenario to desk scale. N-axis values shrink by the same factor.
inline void apply_desk_scale(SweepSpec& spec)
{
    auto& b = spec.base;
    b.ofdm.K = 64;
    b.ofdm.G = 8;
    b.ofdm.Lg = 8;
    b.taps.taps_sr = 4;
    b.taps.taps_rd = 5;
    b.N = 64;
    b.trials = 100;
    if (spec.axis == SweepAxis::Elements)
        for (auto& v : spec.values) v = std::max(1.0, std::round(v / static_cast<double>(desk_scale_factor)));
}

inline AlgorithmSpec greedy_from(InitKind init, const std::string& label)
{
    AlgorithmSpec a;
    a.id = AlgorithmId::Greedy;
    a.label = label;
    a.greedy.init = init;
    return a;
}

inline AlgorithmSpec roster_entry(AlgorithmId id, const std::string& label = "")
{
    AlgorithmSpec a;
    a.id = id;
    a.label = label;
    return a;
}

inline std::vector<AlgorithmSpec> comparison_roster()
{
    return {greedy_from(InitKind::Stm, "stm-ic"), greedy_from(InitKind::Scpgm, "scpgm-ic"), roster_entry(AlgorithmId::Algo2),
            roster_entry(AlgorithmId::OscpsSurrogate)};
}

inline ScenarioConfig figure_base(std::size_t L)
{
    ScenarioConfig b;
    b.ofdm.sigma2 = dbm_per_hz_to_w_per_hz(-165.14);
    b.codebook = PhaseCodebook::uniform(L);
    b.snr_db = 30.0;
    b.algorithms = comparison_roster();
    return b;
}

inline FigurePlan figure_plan(int figure, bool desk_scale = false)
{
    FigurePlan plan;
    plan.figure = figure;
    const std::vector<double> snr = {0.0, 10.0, 20.0, 30.0};
    const std::vector<LinkCondition> both = {LinkCondition::Los, LinkCondition::Nlos};
    auto sweep = [&](SweepAxis axis, std::vector<double> values, ScenarioConfig base, std::vector<LinkCondition> cond) {
        SweepSpec s;
        s.axis = axis;
        s.values = std::move(values);
        s.base = std::move(base);
        s.conditions = std::move(cond);
        return s;
    };

    switch (figure)
    {
    case 1:
    case 2:
    {
        const std::size_t L = figure == 1 ? 2 : 4;
        plan.title = "Achievable rate vs SNR (L=" + std::to_string(L) + ")";
        plan.sweeps.push_back(sweep(SweepAxis::SnrDb, snr, figure_base(L), both));
        break;
    }
    case 3:
    {
        plan.title = "Achievable rate vs SNR (L=8, LoS)";
        auto base = figure_base(8);
        base.algorithms = {greedy_from(InitKind::Stm, "stm-ic"), greedy_from(InitKind::Scpgm, "scpgm-ic"),
                           roster_entry(AlgorithmId::Algo2), roster_entry(AlgorithmId::StmContinuous),
                           roster_entry(AlgorithmId::ScpgmContinuous)};
        plan.sweeps.push_back(sweep(SweepAxis::SnrDb, snr, base, {LinkCondition::Los}));
        break;
    }
    case 4:
    {
        plan.title = "Achievable rate vs SNR (quantization levels)";
        for (std::size_t L : {2u, 4u, 8u})
        {
            auto base = figure_base(L);
            base.algorithms = {roster_entry(AlgorithmId::Algo2, "algo2-L" + std::to_string(L))};
            // The continuous surrogate does not depend on L; draw it once.
            if (L == 2) base.algorithms.push_back(roster_entry(AlgorithmId::OscpsSurrogate));
            plan.sweeps.push_back(sweep(SweepAxis::SnrDb, snr, base, both));
        }
        break;
    }
    case 5:
    {
        plan.title = "Achievable rate vs d_sr (L=2, SNR=30 dB, d_sr + d_rd = 115 m)";
        auto s = sweep(SweepAxis::DistanceSr, {15.0, 32.0, 49.0, 66.0, 83.0, 100.0}, figure_base(2), both);
        s.d_total = 115.0;
        plan.sweeps.push_back(std::move(s));
        break;
    }
    case 6:
    {
        plan.title = "Achievable rate vs N (L=2, SNR=30 dB)";
        plan.sweeps.push_back(sweep(SweepAxis::Elements, {256.0, 1024.0, 4096.0}, figure_base(2), both));
        break;
    }
    default: throw std::invalid_argument("figure must be 1..6, got " + std::to_string(figure));
    }
    if (desk_scale)
        for (auto& s : plan.sweeps) apply_desk_scale(s);
    return plan;
}

inline std::vector<ResultRow> run_figure(const FigurePlan& plan, const RunOptions& opts = {})
{
    std::vector<ResultRow> rows;
    for (const auto& s : plan.sweeps)
    {
        auto part = run_experiment(s, opts);
        rows.insert(rows.end(), part.begin(), part.end());
    }
    return rows;
}

} // namespace rss
