#pragma once

// Fast oracle and invariant checks shared by `rss_sim selftest` and the
// acceptance runner. Each returns one pass/fail verdict with a short detail.

#include "rss/channel.hpp"
#include "rss/estimation.hpp"
#include "rss/model.hpp"
#include "rss/ofdm.hpp"
#include "rss/optim.hpp"
#include "rss/random.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

namespace rss::checks {

struct CheckResult
{
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

inline std::string sci(double v)
{
    std::ostringstream s;
    s.precision(3);
    s << std::scientific << v;
    return s.str();
}

inline Eigen::MatrixXcd random_channel(std::size_t N, std::size_t G, Rng& rng)
{
    Eigen::MatrixXcd V(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(G));
    for (Eigen::Index n = 0; n < V.rows(); ++n)
        for (Eigen::Index g = 0; g < V.cols(); ++g) V(n, g) = complex_normal(rng, 1.0);
    return V;
}

/// OFDM parameters whose per-subcarrier gain P/(K B sigma2) equals `snr_scale`.
inline OfdmParams test_ofdm(std::size_t K, std::size_t G, double snr_scale)
{
    OfdmParams o;
    o.K = K;
    o.G = G;
    o.Lg = G;
    o.B = 10e6;
    o.sigma2 = dbm_per_hz_to_w_per_hz(-165.14);
    o.P = snr_scale * static_cast<double>(K) * o.B * o.sigma2;
    return o;
}

template <typename F>
CheckResult timed(const std::string& name, double limit_s, F&& body)
{
    const auto t0 = std::chrono::steady_clock::now();
    CheckResult r{name, false, "", 0.0};
    try
    {
        r.passed = body(r.detail);
    }
    catch (const std::exception& e)
    {
        r.passed = false;
        r.detail = std::string("exception: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (limit_s > 0.0 && r.seconds >= limit_s)
    {
        r.passed = false;
        r.detail += " (runtime " + std::to_string(r.seconds) + " s over " + std::to_string(limit_s) + " s)";
    }
    return r;
}

/// Noise-free pilots recover V through the left-inverse chain.
inline CheckResult estimator_identity()
{
    return timed("zero-noise estimator identity", 1.0, [](std::string& detail) {
        const std::size_t K = 64, G = 8, N = 16;
        OfdmParams o = test_ofdm(K, G, 1.0);
        o.sigma2 = 0.0;
        o.P = 1.0;
        Rng rng = make_rng(7, 0, Stream::Channel);
        const auto V = random_channel(N, G, rng);
        const auto F = dft_matrix(K, G);
        double worst = 0.0;
        for (auto kind : {PilotKind::Dft, PilotKind::Hadamard})
        {
            const auto plan = make_pilot_plan(N, kind, o);
            Rng noise = make_rng(7, 0, Stream::PilotNoise);
            const auto Z = simulate_pilot_rx(V, plan, o, noise, &F);
            const auto est = lse_estimate(Z, plan, F);
            worst = std::max(worst, (est.Vhat - V).norm() / V.norm());
        }
        detail = "max relative Frobenius error " + sci(worst) + " (limit 1e-9)";
        return worst <= 1e-9;
    });
}

/// Incremental rate queries and commits against full recomputation.
inline CheckResult evaluator_consistency()
{
    return timed("incremental evaluator consistency", 5.0, [](std::string& detail) {
        const std::size_t K = 64, G = 8, N = 32, L = 4;
        const auto o = test_ofdm(K, G, 0.5);
        const auto cb = PhaseCodebook::uniform(L);
        Rng rng = make_rng(11, 0, Stream::Channel);
        const auto V = random_channel(N, G, rng);
        Rng pick = make_rng(11, 0, Stream::RandomInit);
        RateEvaluator ev(V, random_configure(cb, N, pick), o);
        std::uniform_int_distribution<std::size_t> elem(0, N - 1), lvl(0, L - 1), coin(0, 1);
        double worst = 0.0;
        for (int step = 0; step < 1000; ++step)
        {
            const std::size_t r = elem(pick), l = lvl(pick);
            auto alt = ev.configuration();
            alt.set_level(r, l);
            const double full = achievable_rate(V, alt, o);
            worst = std::max(worst, std::abs(ev.rate_with_flip(r, l) - full) / full);
            if (coin(pick))
            {
                const Flip f{r, l};
                ev.commit_flips(std::span<const Flip>(&f, 1));
                const double committed = achievable_rate(V, ev.configuration(), o);
                worst = std::max(worst, std::abs(ev.current_rate() - committed) / committed);
                const Eigen::VectorXcd s = cascaded_cfr(V, ev.configuration(), K);
                worst = std::max(worst, (ev.cfr() - s).norm() / s.norm());
            }
        }
        detail = "max relative deviation " + sci(worst) + " over 1000 steps (limit 1e-8)";
        return worst <= 1e-8;
    });
}

struct DominanceStats
{
    bool ok = true;
    double mean_ratio = 0.0;
    std::size_t natural_terminations = 0;
    std::string failure;
};

/// Exhaustive >= replica-of-greedy >= initial rates, and 1-flip local optimality.
inline DominanceStats dominance_stats(std::size_t instances = 100)
{
    const std::size_t K = 16, G = 2, N = 6, L = 2;
    const auto o = test_ofdm(K, G, 0.3);
    const auto cb = PhaseCodebook::uniform(L);
    DominanceStats st;
    double ratio_sum = 0.0;
    auto fail = [&](std::size_t i, const std::string& what) {
        if (st.ok) st.failure = "instance " + std::to_string(i) + ": " + what;
        st.ok = false;
    };
    for (std::size_t i = 0; i < instances; ++i)
    {
        Rng rng = make_rng(2024, i, Stream::Channel);
        const auto V = random_channel(N, G, rng);
        const auto ex = exhaustive_oracle(V, cb, o);
        const auto par = parallel_optimize(V, cb, default_replicas(splitmix64(i)), o, false);
        const double r_ex = achievable_rate(V, ex.config, o);
        const double r_par = achievable_rate(V, par.config, o);
        ratio_sum += r_par / r_ex;
        // Both sides are the same closed-form rate; allow only rounding-level slack.
        if (r_par > r_ex * (1.0 + 1e-12)) fail(i, "algo2 rate above exhaustive optimum");
        for (const auto& rep : par.replicas)
        {
            const double r_rep = achievable_rate(V, rep.config, o);
            if (r_par < r_rep * (1.0 - 1e-12)) fail(i, "algo2 rate below a replica");
            if (r_rep < rep.initial_rate * (1.0 - 1e-12)) fail(i, "replica ended below its initialization");
            if (r_par < rep.initial_rate * (1.0 - 1e-12)) fail(i, "algo2 rate below an initialization");
            if (rep.trace.terminated_by != Termination::EmptyImprovementSet) continue;
            ++st.natural_terminations;
            for (std::size_t n = 0; n < N; ++n)
                for (std::size_t l = 0; l < L; ++l)
                {
                    if (l == rep.config.level(n)) continue;
                    auto alt = rep.config;
                    alt.set_level(n, l);
                    if (achievable_rate(V, alt, o) > r_rep * (1.0 + 1e-10)) fail(i, "greedy output not 1-flip locally optimal");
                }
        }
    }
    st.mean_ratio = ratio_sum / static_cast<double>(instances);
    return st;
}

inline CheckResult oracle_dominance()
{
    return timed("oracle dominance and local optimality", 120.0, [](std::string& detail) {
        const auto st = dominance_stats(100);
        std::ostringstream d;
        d.precision(6);
        d << "mean algo2/exhaustive ratio " << st.mean_ratio << " over 100 instances, " << st.natural_terminations
          << " natural terminations checked";
        if (!st.ok) d << "; " << st.failure;
        detail = d.str();
        return st.ok;
    });
}

/// Composite single-tap amplitude after quantizing STM is within cos(pi/L).
inline CheckResult quantization_bound()
{
    return timed("quantization bound", 0.0, [](std::string& detail) {
        std::size_t violations = 0;
        double worst_margin = 1e300;
        for (std::size_t L : {2u, 4u, 8u})
        {
            const auto cb = PhaseCodebook::uniform(L);
            for (std::size_t i = 0; i < 100; ++i)
            {
                Rng rng = make_rng(99, i, Stream::Channel, L);
                const auto V = random_channel(32, 1, rng);
                const double cont = std::abs((V.transpose() * stm_configure(V).coefficients())(0));
                const double quant = std::abs((V.transpose() * stm_configure(V, cb).coefficients())(0));
                const double bound = std::cos(std::numbers::pi / static_cast<double>(L)) * cont;
                worst_margin = std::min(worst_margin, (quant - bound) / cont);
                if (!(quant >= bound)) ++violations;
            }
        }
        detail = std::to_string(violations) + " violations in 300 instances, smallest relative margin " + sci(worst_margin);
        return violations == 0;
    });
}

/// F^H F = K I, Omega Omega^H = N I, and the fast pilot transforms agree with the dense matrices.
inline CheckResult parseval_orthogonality()
{
    return timed("Parseval and pilot orthogonality", 0.0, [](std::string& detail) {
        double worst = 0.0;
        for (auto [K, G] : {std::pair<std::size_t, std::size_t>{64, 8}, {500, 20}, {16, 2}})
        {
            const auto F = dft_matrix(K, G);
            const Eigen::MatrixXcd gram = F.F.adjoint() * F.F;
            const auto I = Eigen::MatrixXcd::Identity(static_cast<Eigen::Index>(G), static_cast<Eigen::Index>(G));
            worst = std::max(worst, (gram / static_cast<double>(K) - I).cwiseAbs().maxCoeff());
            Rng rng = make_rng(5, K, Stream::Channel);
            const auto v = random_channel(G, 1, rng);
            worst = std::max(worst, std::abs((F.F * v).squaredNorm() / (static_cast<double>(K) * v.squaredNorm()) - 1.0));
        }
        for (std::size_t N : {16u, 64u, 256u})
            for (auto kind : {PilotKind::Dft, PilotKind::Hadamard})
            {
                const auto W = pilot_matrix(N, kind);
                const Eigen::MatrixXcd gram = W * W.adjoint() / static_cast<double>(N);
                const auto I = Eigen::MatrixXcd::Identity(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
                worst = std::max(worst, (gram - I).cwiseAbs().maxCoeff());
                PilotPlan plan;
                plan.kind = kind;
                plan.N = N;
                Rng rng = make_rng(6, N, Stream::Channel);
                const Eigen::MatrixXcd A = random_channel(N, 3, rng).transpose();
                const Eigen::MatrixXcd fast = plan.apply(A);
                worst = std::max(worst, (fast - A * W).cwiseAbs().maxCoeff() / A.cwiseAbs().maxCoeff() / static_cast<double>(N));
                worst = std::max(worst, (plan.apply_inverse(fast) - A).cwiseAbs().maxCoeff() / A.cwiseAbs().maxCoeff());
                worst = std::max(worst, std::abs(fast.squaredNorm() / (static_cast<double>(N) * A.squaredNorm()) - 1.0));
            }
        detail = "max deviation " + sci(worst) + " (limit 1e-9)";
        return worst <= 1e-9;
    });
}

inline std::vector<CheckResult> run_fast_checks()
{
    return {estimator_identity(), evaluator_consistency(), oracle_dominance(), quantization_bound(), parseval_orthogonality()};
}

} // namespace rss::checks
