#pragma once

// Scenario-driven experiment runner. Each (axis value, r-d condition, trial)
// samples a channel, estimates it from pilots, runs the roster on the
// estimate and scores every configuration with the rate on the estimate.
//
// Random draws depend on (seed, trial) only, never on the axis value, so
// all points of a sweep share channel and noise realizations.

#include "rss/channel.hpp"
#include "rss/estimation.hpp"
#include "rss/model.hpp"
#include "rss/ofdm.hpp"
#include "rss/optim.hpp"
#include "rss/scenario_io.hpp"

#include <atomic>
#include <chrono>
#include <deque>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace rss {

struct ResultRow
{
    std::string axis;
    double value = 0.0;
    std::string algorithm;
    std::string condition;
    double rate_bps = 0.0;
    double stderr_bps = 0.0;
    std::size_t trials = 0;
    double seconds_per_trial = 0.0;
    std::optional<double> d_rd; // distance sweeps only

    bool operator==(const ResultRow&) const = default;
};

struct RunOptions
{
    std::size_t workers = 0;    // 0: RSS_WORKERS or hardware concurrency
    bool record_timing = false; // off keeps outputs a pure function of the scenario
    std::function<void(std::size_t done, std::size_t total)> progress;
};

inline std::string value_text(double v)
{
    std::ostringstream s;
    s << v;
    return s.str();
}

inline std::size_t default_workers()
{
    if (const char* env = std::getenv("RSS_WORKERS"))
    {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<std::size_t>(v);
    }
    const auto hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

/// Checks value ordering and axis-specific ranges; throws std::invalid_argument.
inline void validate_sweep(const SweepSpec& spec)
{
    if (spec.values.empty()) throw std::invalid_argument("sweep: values must be nonempty");
    for (std::size_t i = 1; i < spec.values.size(); ++i)
        if (!(spec.values[i] > spec.values[i - 1])) throw std::invalid_argument("sweep: values must be strictly increasing");
    for (double v : spec.values)
    {
        switch (spec.axis)
        {
        case SweepAxis::DistanceSr:
            if (!(v > 0.0 && v < spec.d_total)) throw std::invalid_argument("sweep: d_sr must lie strictly inside (0, d_total)");
            break;
        case SweepAxis::Elements:
        case SweepAxis::Levels:
            if (v < 1.0 || v != std::floor(v)) throw std::invalid_argument("sweep: N and L values must be positive integers");
            break;
        case SweepAxis::SnrDb: break;
        }
    }
}

/// Scenario at one sweep point. Transmit power comes from the SNR evaluated at
/// the base geometry, so on the distance axis P stays fixed while the RSS moves.
inline ScenarioConfig point_config(const SweepSpec& spec, double value, LinkCondition condition)
{
    ScenarioConfig cfg = spec.base;
    cfg.geometry.los_rd = condition == LinkCondition::Los;
    double snr_db = spec.base.snr_db;
    switch (spec.axis)
    {
    case SweepAxis::SnrDb: snr_db = value; break;
    case SweepAxis::DistanceSr:
        cfg.geometry.d_sr = value;
        cfg.geometry.d_rd = spec.d_total - value;
        break;
    case SweepAxis::Elements: cfg.N = static_cast<std::size_t>(value); break;
    case SweepAxis::Levels: cfg.codebook = PhaseCodebook::uniform(static_cast<std::size_t>(value)); break;
    }
    cfg.ofdm.P = snr_to_power(db_to_linear(snr_db), spec.base.geometry, cfg.ofdm);
    return validate_scenario(cfg);
}

inline std::vector<LinkCondition> sweep_conditions(const SweepSpec& spec)
{
    if (!spec.conditions.empty()) return spec.conditions;
    return {spec.base.geometry.los_rd ? LinkCondition::Los : LinkCondition::Nlos};
}

/// Seed of the random-init greedy replica for one trial.
inline std::uint64_t replica_seed(std::uint64_t seed, std::size_t trial)
{
    return splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(trial) + 0xA5A5ull));
}

struct TrialOutcome
{
    std::vector<double> rates;   // per roster entry
    std::vector<double> seconds; // per roster entry, zero unless timed
};

/// Channel estimate for one trial of a point config.
inline ChannelEstimate estimate_trial_channel(const ScenarioConfig& cfg, std::size_t trial, const DftMatrix& F)
{
    const auto ch = sample_cascaded_channel(cfg, trial);
    const auto plan = make_pilot_plan(cfg.N, cfg.pilot_kind, cfg.ofdm);
    Rng noise = make_rng(cfg.seed, trial, Stream::PilotNoise);
    const auto Z = simulate_pilot_rx(ch.V, plan, cfg.ofdm, noise, &F);
    return lse_estimate(Z, plan, F, cfg.ofdm.B * cfg.ofdm.sigma2 / static_cast<double>(cfg.ofdm.K));
}

inline TrialOutcome run_trial(const ScenarioConfig& cfg, std::size_t trial, bool timing)
{
    using clock = std::chrono::steady_clock;
    const DftMatrix F = dft_matrix(cfg.ofdm.K, cfg.ofdm.G);
    const auto est = estimate_trial_channel(cfg, trial, F);
    const auto& Vh = est.Vhat;

    // Greedy runs keyed by (start, alpha, max_iters) are shared between roster entries.
    struct Memo
    {
        RssConfiguration start;
        double alpha;
        std::size_t max_iters;
        GreedyResult result;
        double seconds;
    };
    std::deque<Memo> memo; // stable references across push_back
    std::optional<RateEvaluator> base_ev;

    auto greedy_run = [&](GreedyOptions o) -> const Memo& {
        // Random starts are offset per trial; distinct replica seeds stay distinct.
        if (o.init == InitKind::Random) o.random_seed += replica_seed(cfg.seed, trial);
        const auto t0 = clock::now();
        auto start = initial_configuration(Vh, cfg.codebook, o);
        for (const auto& m : memo)
            if (m.start == start && m.alpha == o.alpha && m.max_iters == o.max_iters) return m;
        if (!base_ev) base_ev.emplace(Vh, RssConfiguration::all_level(cfg.codebook, cfg.N), cfg.ofdm, F);
        RateEvaluator ev = *base_ev;
        ev.reset(start);
        auto res = greedy_optimize(ev, cfg.codebook, o);
        const double secs = std::chrono::duration<double>(clock::now() - t0).count();
        memo.push_back({std::move(start), o.alpha, o.max_iters, std::move(res), secs});
        return memo.back();
    };

    TrialOutcome out;
    out.rates.resize(cfg.algorithms.size());
    out.seconds.resize(cfg.algorithms.size());
    for (std::size_t i = 0; i < cfg.algorithms.size(); ++i)
    {
        const auto& a = cfg.algorithms[i];
        try
        {
            const auto t0 = clock::now();
            double secs = -1.0;
            RssConfiguration config;
            switch (a.id)
            {
            case AlgorithmId::Greedy:
            {
                const auto& m = greedy_run(a.greedy);
                config = m.result.config;
                secs = m.seconds;
                break;
            }
            case AlgorithmId::Algo2:
            {
                const auto replicas = a.replicas.empty() ? default_replicas() : a.replicas;
                double best = 0.0;
                secs = 0.0;
                for (std::size_t r = 0; r < replicas.size(); ++r)
                {
                    const auto& m = greedy_run(replicas[r]);
                    secs += m.seconds;
                    if (r == 0 || m.result.rate > best)
                    {
                        best = m.result.rate;
                        config = m.result.config;
                    }
                }
                break;
            }
            case AlgorithmId::Stm: config = stm_configure(Vh, cfg.codebook); break;
            case AlgorithmId::Scpgm: config = scpgm_configure(Vh, cfg.codebook); break;
            case AlgorithmId::StmContinuous: config = stm_configure(Vh); break;
            case AlgorithmId::ScpgmContinuous: config = scpgm_configure(Vh); break;
            case AlgorithmId::OscpsSurrogate: config = oscps_configure(Vh, cfg.ofdm).config; break;
            case AlgorithmId::Random:
            {
                Rng rng = make_rng(cfg.seed, trial, Stream::RandomInit, 1);
                config = random_configure(cfg.codebook, cfg.N, rng);
                break;
            }
            case AlgorithmId::Exhaustive: config = exhaustive_oracle(Vh, cfg.codebook, cfg.ofdm).config; break;
            }
            out.rates[i] = achievable_rate(Vh, config, cfg.ofdm);
            if (timing) out.seconds[i] = secs >= 0.0 ? secs : std::chrono::duration<double>(clock::now() - t0).count();
        }
        catch (const std::exception& e)
        {
            throw std::runtime_error("trial " + std::to_string(trial) + ", algorithm " + algorithm_label(a) + ": " + e.what());
        }
    }
    return out;
}

/// Runs the sweep. Rows come out value-major, then condition, then roster order.
inline std::vector<ResultRow> run_experiment(const SweepSpec& spec, const RunOptions& opts = {})
{
    validate_sweep(spec);
    const auto conditions = sweep_conditions(spec);
    const std::size_t trials = spec.base.trials;

    struct Point
    {
        double value;
        LinkCondition condition;
        ScenarioConfig cfg;
    };
    std::vector<Point> points;
    for (double v : spec.values)
        for (auto c : conditions)
        {
            try
            {
                points.push_back({v, c, point_config(spec, v, c)});
            }
            catch (const std::exception& e)
            {
                throw std::invalid_argument(std::string(axis_name(spec.axis)) + "=" + value_text(v) + ": " + e.what());
            }
        }

    const std::size_t total = points.size() * trials;
    std::vector<TrialOutcome> outcomes(total);
    std::vector<std::exception_ptr> errors(total);
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> done{0};
    std::mutex progress_mutex;

    auto worker = [&] {
        for (std::size_t job = next++; job < total; job = next++)
        {
            const auto& p = points[job / trials];
            const std::size_t trial = job % trials;
            try
            {
                outcomes[job] = run_trial(p.cfg, trial, opts.record_timing);
            }
            catch (const std::exception& e)
            {
                errors[job] = std::make_exception_ptr(std::runtime_error(
                    std::string(axis_name(spec.axis)) + "=" + value_text(p.value) + " (" + condition_name(p.condition) + "), " + e.what()));
            }
            const auto d = ++done;
            if (opts.progress)
            {
                std::lock_guard lock(progress_mutex);
                opts.progress(d, total);
            }
        }
    };

    const std::size_t nworkers = std::max<std::size_t>(1, std::min(opts.workers ? opts.workers : default_workers(), total));
    if (nworkers == 1)
        worker();
    else
    {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < nworkers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    std::vector<ResultRow> rows;
    for (std::size_t pi = 0; pi < points.size(); ++pi)
    {
        const auto& p = points[pi];
        for (std::size_t a = 0; a < p.cfg.algorithms.size(); ++a)
        {
            double sum = 0.0, secs = 0.0;
            for (std::size_t t = 0; t < trials; ++t)
            {
                sum += outcomes[pi * trials + t].rates[a];
                secs += outcomes[pi * trials + t].seconds[a];
            }
            const double mean = sum / static_cast<double>(trials);
            double ss = 0.0;
            for (std::size_t t = 0; t < trials; ++t)
            {
                const double d = outcomes[pi * trials + t].rates[a] - mean;
                ss += d * d;
            }
            ResultRow row;
            row.axis = axis_name(spec.axis);
            row.value = p.value;
            row.algorithm = algorithm_label(p.cfg.algorithms[a]);
            row.condition = condition_name(p.condition);
            row.rate_bps = mean;
            row.stderr_bps = trials > 1 ? std::sqrt(ss / static_cast<double>(trials - 1)) / std::sqrt(static_cast<double>(trials)) : 0.0;
            row.trials = trials;
            row.seconds_per_trial = secs / static_cast<double>(trials);
            if (spec.axis == SweepAxis::DistanceSr) row.d_rd = p.cfg.geometry.d_rd;
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

} // namespace rss
