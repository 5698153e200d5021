#pragma once

// RSS configuration algorithms.
//
//  - greedy_optimize: batch coordinate search over codebook levels. Every
//    iteration scores all N (L-1) single-element changes against the
//    committed configuration, keeps the elements whose best change beats
//    the committed rate, sorts them by that rate and commits the changes
//    of the first ceil(alpha W) of them at once.
//  - parallel_optimize: greedy replicas from different starting points;
//    the best final rate wins.
//  - STM / SCPGM: tap-alignment baselines, continuous or quantized.
//  - oscps_configure: continuous-phase reference obtained by cyclic
//    coordinate ascent on the rate (golden-section line search).
//  - exhaustive_oracle: brute force over all L^N configurations.

#include "rss/model.hpp"
#include "rss/ofdm.hpp"
#include "rss/random.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <future>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rss {

/// Relative margin a candidate must clear to count as an improvement. Keeps
/// rounding noise in the incremental rate from producing flip/unflip cycles.
inline constexpr double improvement_margin = 1e-12;

inline bool improves(double candidate, double reference)
{
    return candidate > reference + improvement_margin * std::abs(reference);
}

// --- quantization -----------------------------------------------------------

/// Maps every angle to the nearest codebook level (wrap-around distance, ties to the lower level).
inline RssConfiguration quantize_config(const RssConfiguration& cont, const PhaseCodebook& codebook)
{
    std::vector<std::size_t> levels(cont.size());
    for (std::size_t n = 0; n < cont.size(); ++n) levels[n] = codebook.nearest(cont.angle(n));
    return RssConfiguration::quantized(codebook, std::move(levels));
}

// --- tap-alignment baselines ------------------------------------------------

namespace detail {

inline void require_nonzero(const Eigen::MatrixXcd& Vhat, const char* who)
{
    if (Vhat.size() == 0 || Vhat.cwiseAbs2().maxCoeff() == 0.0)
        throw std::invalid_argument(std::string(who) + ": channel estimate is all zero");
}

} // namespace detail

/// Phases -arg(Vhat[n,g]) that co-phase every element's tap g.
inline std::vector<double> tap_alignment(const Eigen::MatrixXcd& Vhat, std::size_t g)
{
    std::vector<double> a(static_cast<std::size_t>(Vhat.rows()));
    for (Eigen::Index n = 0; n < Vhat.rows(); ++n) a[static_cast<std::size_t>(n)] = wrap_phase(-std::arg(Vhat(n, static_cast<Eigen::Index>(g))));
    return a;
}

/// Aligned amplitude of tap g: sum_n |Vhat[n,g]|.
inline double aligned_tap_amplitude(const Eigen::MatrixXcd& Vhat, std::size_t g)
{
    return Vhat.col(static_cast<Eigen::Index>(g)).cwiseAbs().sum();
}

/// Total channel power gain sum_g |sum_n Vhat[n,g] w_n|^2.
inline double channel_power_gain(const Eigen::MatrixXcd& Vhat, const Eigen::VectorXcd& w)
{
    return (Vhat.transpose() * w).squaredNorm();
}

struct TapChoice
{
    std::size_t tap = 0;
    double score = 0.0;
};

inline TapChoice stm_select_tap(const Eigen::MatrixXcd& Vhat)
{
    detail::require_nonzero(Vhat, "stm_configure");
    TapChoice best{0, -1.0};
    for (std::size_t g = 0; g < static_cast<std::size_t>(Vhat.cols()); ++g)
    {
        const double amp = aligned_tap_amplitude(Vhat, g);
        if (amp > best.score) best = {g, amp};
    }
    return best;
}

inline TapChoice scpgm_select_tap(const Eigen::MatrixXcd& Vhat)
{
    detail::require_nonzero(Vhat, "scpgm_configure");
    TapChoice best{0, -1.0};
    for (std::size_t g = 0; g < static_cast<std::size_t>(Vhat.cols()); ++g)
    {
        const auto w = RssConfiguration::continuous(tap_alignment(Vhat, g)).coefficients();
        const double gain = channel_power_gain(Vhat, w);
        if (gain > best.score) best = {g, gain};
    }
    return best;
}

/// Strongest-tap maximization. Continuous unless a codebook is given.
inline RssConfiguration stm_configure(const Eigen::MatrixXcd& Vhat, const std::optional<PhaseCodebook>& codebook = std::nullopt)
{
    auto cont = RssConfiguration::continuous(tap_alignment(Vhat, stm_select_tap(Vhat).tap));
    return codebook ? quantize_config(cont, *codebook) : cont;
}

/// Tap alignment scored by total channel power gain over all taps.
inline RssConfiguration scpgm_configure(const Eigen::MatrixXcd& Vhat, const std::optional<PhaseCodebook>& codebook = std::nullopt)
{
    auto cont = RssConfiguration::continuous(tap_alignment(Vhat, scpgm_select_tap(Vhat).tap));
    return codebook ? quantize_config(cont, *codebook) : cont;
}

inline RssConfiguration random_configure(const PhaseCodebook& codebook, std::size_t N, Rng& rng)
{
    std::uniform_int_distribution<std::size_t> pick(0, codebook.size() - 1);
    std::vector<std::size_t> levels(N);
    for (auto& l : levels) l = pick(rng);
    return RssConfiguration::quantized(codebook, std::move(levels));
}

// --- greedy -----------------------------------------------------------------

struct IterationRecord
{
    std::size_t iteration = 0;
    double committed_rate = 0.0; // rate after this iteration's commit
    double best_rate = 0.0;      // best-so-far after this iteration
    std::size_t improving = 0;   // W_i
    std::size_t committed = 0;   // flips actually applied
    bool single_fallback = false;
};

enum class Termination { EmptyImprovementSet, MaxIters };

struct OptimizationTrace
{
    std::vector<IterationRecord> iterations;
    Termination terminated_by = Termination::EmptyImprovementSet;
};

struct GreedyResult
{
    RssConfiguration config;
    double rate = 0.0;
    double initial_rate = 0.0;
    OptimizationTrace trace;
};

/// Starting configuration for one greedy replica.
inline RssConfiguration initial_configuration(const Eigen::MatrixXcd& Vhat, const PhaseCodebook& codebook,
                                              const GreedyOptions& opts)
{
    const auto N = static_cast<std::size_t>(Vhat.rows());
    switch (opts.init)
    {
    case InitKind::AllZero: return RssConfiguration::all_level(codebook, N, 0);
    case InitKind::Stm: return stm_configure(Vhat, codebook);
    case InitKind::Scpgm: return scpgm_configure(Vhat, codebook);
    case InitKind::Random:
    default:
    {
        Rng rng = make_rng(opts.random_seed, 0, Stream::RandomInit);
        return random_configure(codebook, N, rng);
    }
    }
}

/// Runs the batch greedy search from the evaluator's committed configuration.
/// The evaluator is left at the final committed configuration.
///
/// A batch that would not raise the committed rate is replaced by its single
/// best change, so the committed rate is strictly increasing and the search
/// ends at a configuration no single change can improve.
inline GreedyResult greedy_optimize(RateEvaluator& ev, const PhaseCodebook& codebook, const GreedyOptions& opts)
{
    if (!(opts.alpha > 0.0 && opts.alpha <= 1.0)) throw std::invalid_argument("greedy_optimize: alpha must lie in (0, 1]");
    if (!ev.configuration().is_quantized() || !(ev.configuration().codebook() == codebook))
        throw std::invalid_argument("greedy_optimize: evaluator must hold a quantized configuration over this codebook");

    struct Candidate
    {
        double rate;
        std::size_t element;
        std::size_t level;
    };

    GreedyResult res;
    res.initial_rate = ev.current_rate();
    res.config = ev.configuration();
    res.rate = ev.current_rate();
    res.trace.terminated_by = Termination::MaxIters;

    const std::size_t N = ev.elements();
    const std::size_t L = codebook.size();
    std::vector<Candidate> cands;
    cands.reserve(N);
    std::vector<Flip> flips;

    for (std::size_t it = 1; it <= opts.max_iters; ++it)
    {
        const double r0 = ev.current_rate();
        cands.clear();
        for (std::size_t r = 0; r < N; ++r)
        {
            const std::size_t cur = ev.configuration().level(r);
            double best = -std::numeric_limits<double>::infinity();
            std::size_t best_l = cur;
            for (std::size_t l = 0; l < L; ++l)
            {
                if (l == cur) continue;
                const double rate = ev.rate_with_flip(r, l);
                if (rate > best)
                {
                    best = rate;
                    best_l = l;
                }
            }
            if (best_l != cur && improves(best, r0)) cands.push_back({best, r, best_l});
        }

        IterationRecord rec;
        rec.iteration = it;
        rec.improving = cands.size();
        if (cands.empty())
        {
            rec.committed_rate = r0;
            rec.best_rate = res.rate;
            res.trace.iterations.push_back(rec);
            res.trace.terminated_by = Termination::EmptyImprovementSet;
            break;
        }

        std::stable_sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) { return a.rate > b.rate; });
        auto take = static_cast<std::size_t>(std::ceil(opts.alpha * static_cast<double>(cands.size()) - 1e-12));
        take = std::clamp<std::size_t>(take, 1, cands.size());

        flips.clear();
        for (std::size_t i = 0; i < take; ++i) flips.push_back({cands[i].element, cands[i].level});
        if (take > 1 && !improves(ev.rate_with_flips(flips), r0))
        {
            flips.resize(1);
            rec.single_fallback = true;
        }
        ev.commit_flips(flips);

        if (ev.current_rate() > res.rate)
        {
            res.rate = ev.current_rate();
            res.config = ev.configuration();
        }
        rec.committed = flips.size();
        rec.committed_rate = ev.current_rate();
        rec.best_rate = res.rate;
        res.trace.iterations.push_back(rec);
    }
    return res;
}

inline GreedyResult greedy_optimize(const Eigen::MatrixXcd& Vhat, const PhaseCodebook& codebook,
                                    const GreedyOptions& opts, const OfdmParams& ofdm)
{
    RateEvaluator ev(Vhat, initial_configuration(Vhat, codebook, opts), ofdm);
    return greedy_optimize(ev, codebook, opts);
}

/// Default replica roster: random, STM and SCPGM initializations.
inline std::vector<GreedyOptions> default_replicas(std::uint64_t random_seed = 0)
{
    GreedyOptions r;
    r.init = InitKind::Random;
    r.random_seed = random_seed;
    GreedyOptions s;
    s.init = InitKind::Stm;
    GreedyOptions c;
    c.init = InitKind::Scpgm;
    return {r, s, c};
}

struct ParallelResult
{
    RssConfiguration config;
    double rate = 0.0;
    std::size_t best_replica = 0;
    std::vector<GreedyResult> replicas;
};

/// Greedy replicas run independently, each on its own evaluator; the highest
/// final rate wins, earlier replicas win ties.
inline ParallelResult parallel_optimize(const Eigen::MatrixXcd& Vhat, const PhaseCodebook& codebook,
                                        const std::vector<GreedyOptions>& replicas, const OfdmParams& ofdm,
                                        bool concurrent = true)
{
    if (replicas.empty()) throw std::invalid_argument("parallel_optimize: replica roster is empty");

    // One projection C = F Vhat^T, copied into each replica's evaluator.
    const RateEvaluator base(Vhat, RssConfiguration::all_level(codebook, static_cast<std::size_t>(Vhat.rows())), ofdm);
    std::vector<RssConfiguration> starts;
    for (const auto& o : replicas) starts.push_back(initial_configuration(Vhat, codebook, o));

    // Replicas with the same start and options produce the same run; only the first executes.
    std::vector<std::size_t> source(replicas.size());
    for (std::size_t i = 0; i < replicas.size(); ++i)
    {
        source[i] = i;
        for (std::size_t j = 0; j < i; ++j)
            if (source[j] == j && starts[j] == starts[i] && replicas[j].alpha == replicas[i].alpha &&
                replicas[j].max_iters == replicas[i].max_iters)
            {
                source[i] = j;
                break;
            }
    }

    auto run = [&](std::size_t i) {
        RateEvaluator ev = base;
        ev.reset(starts[i]);
        return greedy_optimize(ev, codebook, replicas[i]);
    };

    ParallelResult out;
    out.replicas.resize(replicas.size());
    if (concurrent && replicas.size() > 1)
    {
        std::vector<std::pair<std::size_t, std::future<GreedyResult>>> jobs;
        for (std::size_t i = 0; i < replicas.size(); ++i)
            if (source[i] == i) jobs.emplace_back(i, std::async(std::launch::async, run, i));
        for (auto& [i, j] : jobs) out.replicas[i] = j.get();
    }
    else
    {
        for (std::size_t i = 0; i < replicas.size(); ++i)
            if (source[i] == i) out.replicas[i] = run(i);
    }
    for (std::size_t i = 0; i < replicas.size(); ++i)
        if (source[i] != i) out.replicas[i] = out.replicas[source[i]];

    for (std::size_t i = 0; i < out.replicas.size(); ++i)
        if (i == 0 || out.replicas[i].rate > out.rate)
        {
            out.rate = out.replicas[i].rate;
            out.best_replica = i;
        }
    out.config = out.replicas[out.best_replica].config;
    return out;
}

// --- continuous reference -----------------------------------------------------

struct OscpsOptions
{
    double angle_tolerance = 1e-6; // golden-section bracket width [rad]
    double relative_tolerance = 1e-9;
    std::size_t max_passes = 50;
};

struct OscpsResult
{
    RssConfiguration config;
    double rate = 0.0;
    double initial_rate = 0.0;
    std::size_t passes = 0;
};

/// Continuous-phase reference: start from the better of continuous STM and
/// SCPGM, then maximize the rate one element at a time with a golden-section
/// search over that element's angle, cycling until a full pass gains less
/// than `relative_tolerance`.
inline OscpsResult oscps_configure(const Eigen::MatrixXcd& Vhat, const OfdmParams& ofdm, const OscpsOptions& opts = {})
{
    const auto stm = stm_configure(Vhat);
    const auto scpgm = scpgm_configure(Vhat);
    RateEvaluator ev(Vhat, stm, ofdm);
    const double stm_rate = ev.current_rate();
    const double scpgm_rate = achievable_rate(Vhat, scpgm, ofdm);
    if (scpgm_rate > stm_rate) ev.reset(scpgm);

    OscpsResult out;
    out.initial_rate = ev.current_rate();

    const auto K = static_cast<Eigen::Index>(ev.subcarriers());
    const double scale = ofdm.snr_scale();
    Eigen::ArrayXd base(K), cross_re(K), cross_im(K), gain(K);
    constexpr double inv_phi = 0.6180339887498949; // 1/golden ratio

    for (std::size_t pass = 1; pass <= opts.max_passes; ++pass)
    {
        const double start = ev.current_rate();
        for (std::size_t n = 0; n < ev.elements(); ++n)
        {
            // |a_k + c_k e^{jt}|^2 = |a_k|^2 + |c_k|^2 + 2 Re(conj(a_k) c_k e^{jt}), a_k = s_k minus element n
            const auto c = ev.projection().col(static_cast<Eigen::Index>(n)).array();
            const Eigen::ArrayXcd a = ev.cfr().array() - c * ev.configuration().coefficient(n);
            base = scale * (a.abs2() + c.abs2());
            const Eigen::ArrayXcd cross = 2.0 * scale * a.conjugate() * c;
            cross_re = cross.real();
            cross_im = cross.imag();
            auto objective = [&](double t) {
                gain = (base + cross_re * std::cos(t) - cross_im * std::sin(t)).max(0.0);
                return sum_log1p(gain);
            };

            const double t0 = ev.configuration().angle(n);
            double lo = t0 - std::numbers::pi;
            double hi = t0 + std::numbers::pi;
            double x1 = hi - inv_phi * (hi - lo);
            double x2 = lo + inv_phi * (hi - lo);
            double f1 = objective(x1);
            double f2 = objective(x2);
            while (hi - lo > opts.angle_tolerance)
            {
                if (f1 < f2)
                {
                    lo = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = lo + inv_phi * (hi - lo);
                    f2 = objective(x2);
                }
                else
                {
                    hi = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = hi - inv_phi * (hi - lo);
                    f1 = objective(x1);
                }
            }
            const double t = 0.5 * (lo + hi);
            if (improves(ev.rate_with_coefficient(n, std::polar(1.0, t)), ev.current_rate())) ev.commit_angle(n, t);
        }
        out.passes = pass;
        if (ev.current_rate() - start < opts.relative_tolerance * start) break;
    }
    ev.resync();
    out.config = ev.configuration();
    out.rate = ev.current_rate();
    return out;
}

// --- exhaustive oracle --------------------------------------------------------

struct ExhaustiveResult
{
    RssConfiguration config;
    double rate = 0.0;
};

inline constexpr std::size_t exhaustive_limit = std::size_t{1} << 20;

/// Enumerates all L^N configurations in lexicographic order (element 0 most
/// significant) and keeps the first maximizer.
inline ExhaustiveResult exhaustive_oracle(const Eigen::MatrixXcd& Vhat, const PhaseCodebook& codebook, const OfdmParams& ofdm)
{
    const auto N = static_cast<std::size_t>(Vhat.rows());
    const std::size_t L = codebook.size();
    std::size_t total = 1;
    for (std::size_t n = 0; n < N; ++n)
    {
        if (total > exhaustive_limit / L) throw std::invalid_argument("exhaustive_oracle: L^N exceeds 2^20 configurations");
        total *= L;
    }

    const DftMatrix F = dft_matrix(ofdm.K, static_cast<std::size_t>(Vhat.cols()));
    const Eigen::MatrixXcd C = F.F * Vhat.transpose();
    std::vector<std::complex<double>> level_coef(L);
    for (std::size_t l = 0; l < L; ++l) level_coef[l] = std::polar(1.0, codebook.phase(l));

    std::vector<std::size_t> digits(N, 0);
    Eigen::VectorXcd s = C * Eigen::VectorXcd::Constant(static_cast<Eigen::Index>(N), level_coef[0]);

    ExhaustiveResult best;
    best.rate = -1.0;
    std::vector<std::size_t> best_digits = digits;
    for (std::size_t count = 0; count < total; ++count)
    {
        if (count % 4096 == 0) // bound drift of the incremental update
        {
            Eigen::VectorXcd w(static_cast<Eigen::Index>(N));
            for (std::size_t n = 0; n < N; ++n) w[static_cast<Eigen::Index>(n)] = level_coef[digits[n]];
            s = C * w;
        }
        const double rate = rate_from_cfr(s, ofdm);
        if (rate > best.rate)
        {
            best.rate = rate;
            best_digits = digits;
        }
        // odometer increment, last element fastest
        for (std::size_t pos = N; pos-- > 0;)
        {
            const std::size_t old = digits[pos];
            digits[pos] = (old + 1) % L;
            s += C.col(static_cast<Eigen::Index>(pos)) * (level_coef[digits[pos]] - level_coef[old]);
            if (digits[pos] != 0) break;
        }
    }
    best.config = RssConfiguration::quantized(codebook, best_digits);
    best.rate = achievable_rate(Vhat, best.config, ofdm);
    return best;
}

} // namespace rss
