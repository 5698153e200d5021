#pragma once

// Domain types shared by every module: OFDM link parameters, the phase
// codebook, link geometry, the scenario description and the SNR/power
// normalization.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rss {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

/// dBm/Hz -> W/Hz.
inline double dbm_per_hz_to_w_per_hz(double dbm_hz) { return std::pow(10.0, (dbm_hz - 30.0) / 10.0); }

/// Wraps an angle into [0, 2*pi).
inline double wrap_phase(double angle)
{
    double a = std::fmod(angle, two_pi);
    if (a < 0.0) a += two_pi;
    if (a >= two_pi) a -= two_pi;
    return a;
}

/// Absolute angular distance on the circle, in [0, pi].
inline double circular_distance(double a, double b)
{
    const double d = wrap_phase(a - b);
    return d > std::numbers::pi ? two_pi - d : d;
}

struct OfdmParams
{
    std::size_t K = 500;     // subcarriers
    double B = 10e6;         // bandwidth [Hz]
    std::size_t G = 20;      // channel taps
    std::size_t Lg = 20;     // guard interval [samples]
    double P = 1.0;          // transmit power [W]
    double sigma2 = 0.0;     // noise PSD [W/Hz]

    /// P / (K B sigma2), the per-subcarrier gain applied to |f_k^H V^T w|^2.
    double snr_scale() const { return P / (static_cast<double>(K) * B * sigma2); }
    /// B / (K + G - 1), bandwidth after guard-interval loss per subcarrier.
    double rate_prefactor() const { return B / static_cast<double>(K + G - 1); }
};

/// The L phase levels every reflecting element can take.
class PhaseCodebook
{
public:
    PhaseCodebook() : phases_{0.0} {}

    explicit PhaseCodebook(std::vector<double> phases) : phases_(std::move(phases))
    {
        if (phases_.empty()) throw std::invalid_argument("phase codebook: needs at least one level");
        for (std::size_t l = 0; l < phases_.size(); ++l)
        {
            if (!(phases_[l] >= 0.0 && phases_[l] < two_pi))
                throw std::invalid_argument("phase codebook: level " + std::to_string(l) + " outside [0, 2pi)");
            if (l > 0 && !(phases_[l] > phases_[l - 1]))
                throw std::invalid_argument("phase codebook: levels must be strictly increasing");
        }
    }

    /// {2 pi l / L : l = 0..L-1}
    static PhaseCodebook uniform(std::size_t levels)
    {
        if (levels == 0) throw std::invalid_argument("phase codebook: L must be >= 1");
        std::vector<double> p(levels);
        for (std::size_t l = 0; l < levels; ++l) p[l] = two_pi * static_cast<double>(l) / static_cast<double>(levels);
        return PhaseCodebook(std::move(p));
    }

    std::size_t size() const { return phases_.size(); }
    double phase(std::size_t level) const { return phases_.at(level); }
    const std::vector<double>& phases() const { return phases_; }

    /// Level with minimal wrap-around distance to `angle`; ties go to the lower level.
    std::size_t nearest(double angle) const
    {
        std::size_t best = 0;
        double best_d = circular_distance(angle, phases_[0]);
        for (std::size_t l = 1; l < phases_.size(); ++l)
        {
            const double d = circular_distance(angle, phases_[l]);
            if (d < best_d)
            {
                best_d = d;
                best = l;
            }
        }
        return best;
    }

    bool operator==(const PhaseCodebook&) const = default;

private:
    std::vector<double> phases_;
};

inline PhaseCodebook default_codebook(std::size_t levels) { return PhaseCodebook::uniform(levels); }

struct LinkGeometry
{
    double d_sr = 100.0;
    double d_rd = 15.0;
    double beta_sr = 2.0;
    double beta_rd = 2.75;
    bool los_sr = true;
    bool los_rd = true;
    double kappa_los_db = 10.0;
    double kappa_nlos_db = -10.0;

    double kappa_sr() const { return db_to_linear(los_sr ? kappa_los_db : kappa_nlos_db); }
    double kappa_rd() const { return db_to_linear(los_rd ? kappa_los_db : kappa_nlos_db); }
};

enum class PilotKind { Dft, Hadamard };
enum class CascadeMode { Convolved, Direct };

/// Tap split and delay profile of the two hops. Unset decays default to taps/4.
struct TapLayout
{
    std::size_t taps_sr = 10;
    std::size_t taps_rd = 11;
    std::optional<double> pdp_decay_sr;
    std::optional<double> pdp_decay_rd;

    double decay_sr() const { return pdp_decay_sr.value_or(static_cast<double>(taps_sr) / 4.0); }
    double decay_rd() const { return pdp_decay_rd.value_or(static_cast<double>(taps_rd) / 4.0); }
};

enum class InitKind { Random, Stm, Scpgm, AllZero };

struct GreedyOptions
{
    double alpha = 1.0;
    std::size_t max_iters = 200;
    InitKind init = InitKind::Random;
    std::uint64_t random_seed = 0; // only read for InitKind::Random
};

enum class AlgorithmId { Greedy, Algo2, Stm, Scpgm, StmContinuous, ScpgmContinuous, OscpsSurrogate, Random, Exhaustive };

/// One roster entry. `label` names the curve in outputs; empty means derived.
struct AlgorithmSpec
{
    AlgorithmId id = AlgorithmId::Algo2;
    std::string label;
    GreedyOptions greedy;                // Greedy
    std::vector<GreedyOptions> replicas; // Algo2; empty means Random/STM/SCPGM
};

struct ScenarioConfig
{
    OfdmParams ofdm;
    LinkGeometry geometry;
    std::size_t N = 4096;
    PhaseCodebook codebook = PhaseCodebook::uniform(2);
    PilotKind pilot_kind = PilotKind::Dft;
    CascadeMode cascade_mode = CascadeMode::Convolved;
    TapLayout taps;
    std::size_t trials = 20;
    std::uint64_t seed = 1;
    double snr_db = 30.0;
    std::vector<AlgorithmSpec> algorithms;
};

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

/// Returns `cfg` unchanged if every invariant holds; otherwise throws
/// std::invalid_argument naming the first failing one.
inline const ScenarioConfig& validate_scenario(const ScenarioConfig& cfg)
{
    auto fail = [](const std::string& what) { throw std::invalid_argument("invalid scenario: " + what); };
    const auto& o = cfg.ofdm;
    if (o.G < 1) fail("G >= 1 required");
    if (o.K < o.G) fail("K >= G required (K=" + std::to_string(o.K) + ", G=" + std::to_string(o.G) + ")");
    if (o.Lg < o.G)
        fail("guard interval Lg=" + std::to_string(o.Lg) + " shorter than channel G=" + std::to_string(o.G));
    if (!(o.B > 0.0)) fail("B > 0 required");
    if (!(o.P > 0.0)) fail("P > 0 required");
    if (!(o.sigma2 > 0.0)) fail("sigma2 > 0 required");

    const auto& g = cfg.geometry;
    if (!(g.d_sr > 0.0) || !(g.d_rd > 0.0)) fail("link distances must be positive");
    if (!(g.beta_sr >= 0.0) || !(g.beta_rd >= 0.0)) fail("path-loss exponents must be >= 0");

    if (cfg.N < 1) fail("N >= 1 required");
    if (cfg.trials < 1) fail("trials >= 1 required");
    if (cfg.pilot_kind == PilotKind::Hadamard && !is_power_of_two(cfg.N))
        fail("Hadamard pilots need N a power of two (N=" + std::to_string(cfg.N) + ")");

    if (cfg.cascade_mode == CascadeMode::Convolved && cfg.taps.taps_sr + cfg.taps.taps_rd - 1 != o.G)
        fail("tap split " + std::to_string(cfg.taps.taps_sr) + "+" + std::to_string(cfg.taps.taps_rd) +
             "-1 does not equal G=" + std::to_string(o.G));
    if (cfg.taps.taps_sr < 1 || cfg.taps.taps_rd < 1) fail("tap counts must be >= 1");
    if (!(cfg.taps.decay_sr() > 0.0) || !(cfg.taps.decay_rd() > 0.0)) fail("pdp decay must be positive");

    for (const auto& a : cfg.algorithms)
    {
        auto check = [&](const GreedyOptions& go) {
            if (!(go.alpha > 0.0 && go.alpha <= 1.0)) fail("greedy alpha must lie in (0, 1]");
            if (go.max_iters < 1) fail("greedy max_iters >= 1 required");
        };
        check(a.greedy);
        for (const auto& r : a.replicas) check(r);
    }
    return cfg;
}

/// Combined path-loss gain d_sr^-beta_sr * d_rd^-beta_rd.
inline double cascade_path_gain(const LinkGeometry& g)
{
    return std::pow(g.d_sr, -g.beta_sr) * std::pow(g.d_rd, -g.beta_rd);
}

/// Transmit power giving the requested (linear) SNR = P d_sr^-b_sr d_rd^-b_rd / (K B sigma2).
inline double snr_to_power(double snr, const LinkGeometry& geometry, const OfdmParams& ofdm)
{
    if (!(snr > 0.0)) throw std::invalid_argument("snr_to_power: snr must be positive");
    return snr * static_cast<double>(ofdm.K) * ofdm.B * ofdm.sigma2 * std::pow(geometry.d_sr, geometry.beta_sr) *
           std::pow(geometry.d_rd, geometry.beta_rd);
}

inline double power_to_snr(double power, const LinkGeometry& geometry, const OfdmParams& ofdm)
{
    return power * cascade_path_gain(geometry) / (static_cast<double>(ofdm.K) * ofdm.B * ofdm.sigma2);
}

} // namespace rss
