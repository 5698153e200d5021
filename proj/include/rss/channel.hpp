#pragma once

// Ground-truth cascaded channel synthesis: Rician tap profiles per hop,
// per-element convolution of the two hops and path-loss scaling.

#include "rss/model.hpp"
#include "rss/random.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <stdexcept>
#include <string>

namespace rss {

struct TapProfile
{
    Eigen::VectorXcd taps;
    double kfactor = 0.0; // linear
    double pdp_decay = 1.0;
};

/// Path-loss gain d^-beta.
inline double path_loss(double d, double beta)
{
    if (!(d > 0.0)) throw std::invalid_argument("path_loss: distance must be positive");
    return std::pow(d, -beta);
}

/// Rician tap-delay profile with unit total mean power. Tap 0 carries the
/// specular part sqrt(k/(k+1)) e^{j phi}; diffuse power 1/(k+1) follows an
/// exponential delay profile exp(-g/decay). kfactor = +inf gives a pure LoS impulse.
inline TapProfile sample_tap_profile(std::size_t taps, double kfactor, double pdp_decay, Rng& rng)
{
    if (taps < 1) throw std::invalid_argument("sample_tap_profile: needs at least one tap");
    if (!(pdp_decay > 0.0)) throw std::invalid_argument("sample_tap_profile: pdp decay must be positive");
    if (!(kfactor >= 0.0)) throw std::invalid_argument("sample_tap_profile: K-factor must be >= 0");

    TapProfile tp;
    tp.kfactor = kfactor;
    tp.pdp_decay = pdp_decay;
    tp.taps = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(taps));

    const bool pure_los = std::isinf(kfactor);
    const double los_amp = pure_los ? 1.0 : std::sqrt(kfactor / (kfactor + 1.0));
    const double diffuse_power = pure_los ? 0.0 : 1.0 / (kfactor + 1.0);

    double norm = 0.0;
    for (std::size_t g = 0; g < taps; ++g) norm += std::exp(-static_cast<double>(g) / pdp_decay);

    // Draw order is part of the reproducibility contract: LoS phase first, then taps in delay order.
    const double phi = uniform_phase(rng);
    for (std::size_t g = 0; g < taps; ++g)
    {
        const double pg = diffuse_power * std::exp(-static_cast<double>(g) / pdp_decay) / norm;
        tp.taps[static_cast<Eigen::Index>(g)] = pg > 0.0 ? complex_normal(rng, pg) : std::complex<double>{};
    }
    tp.taps[0] += std::polar(los_amp, phi);
    return tp;
}

/// Linear convolution of two tap vectors.
inline Eigen::VectorXcd convolve(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b)
{
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(a.size() + b.size() - 1);
    for (Eigen::Index i = 0; i < a.size(); ++i)
        for (Eigen::Index j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
}

struct ChannelRealization
{
    Eigen::MatrixXcd V; // N x G
    LinkGeometry geometry;
    std::uint64_t seed = 0;
    std::size_t trial = 0;
    // Unscaled per-element hop responses (Convolved mode only; rows = elements).
    Eigen::MatrixXcd hop_sr;
    Eigen::MatrixXcd hop_rd;

    std::size_t elements() const { return static_cast<std::size_t>(V.rows()); }
    std::size_t taps() const { return static_cast<std::size_t>(V.cols()); }
};

/// Draws V for (cfg.seed, trial). The draws depend only on the seed, the
/// trial, N, the tap layout and the LoS flags; distances and power only scale.
inline ChannelRealization sample_cascaded_channel(const ScenarioConfig& cfg, std::size_t trial)
{
    const auto N = static_cast<Eigen::Index>(cfg.N);
    const auto G = static_cast<Eigen::Index>(cfg.ofdm.G);
    const auto& geo = cfg.geometry;
    const double scale = std::sqrt(cascade_path_gain(geo));

    ChannelRealization ch;
    ch.geometry = geo;
    ch.seed = cfg.seed;
    ch.trial = trial;
    ch.V.resize(N, G);

    Rng rng = make_rng(cfg.seed, trial, Stream::Channel);
    if (cfg.cascade_mode == CascadeMode::Convolved)
    {
        const auto Ga = cfg.taps.taps_sr;
        const auto Gb = cfg.taps.taps_rd;
        if (Ga + Gb - 1 != cfg.ofdm.G)
            throw std::invalid_argument("sample_cascaded_channel: taps_sr + taps_rd - 1 must equal G");
        ch.hop_sr.resize(N, static_cast<Eigen::Index>(Ga));
        ch.hop_rd.resize(N, static_cast<Eigen::Index>(Gb));
        for (Eigen::Index n = 0; n < N; ++n)
        {
            const auto a = sample_tap_profile(Ga, geo.kappa_sr(), cfg.taps.decay_sr(), rng);
            const auto b = sample_tap_profile(Gb, geo.kappa_rd(), cfg.taps.decay_rd(), rng);
            ch.hop_sr.row(n) = a.taps.transpose();
            ch.hop_rd.row(n) = b.taps.transpose();
            ch.V.row(n) = scale * convolve(a.taps, b.taps).transpose();
        }
    }
    else
    {
        for (Eigen::Index n = 0; n < N; ++n)
        {
            const auto t = sample_tap_profile(cfg.ofdm.G, geo.kappa_rd(), cfg.taps.pdp_decay_rd.value_or(static_cast<double>(cfg.ofdm.G) / 4.0), rng);
            ch.V.row(n) = scale * t.taps.transpose();
        }
    }
    return ch;
}

/// Channel dump: '#' metadata lines, a header, then one row per element with
/// real/imag interleaved per tap.
inline void write_channel_csv(const Eigen::MatrixXcd& V, const LinkGeometry& geo, std::uint64_t seed,
                              std::size_t trial, const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << std::setprecision(17);
    out << "# elements=" << V.rows() << " taps=" << V.cols() << " seed=" << seed << " trial=" << trial
        << " d_sr=" << geo.d_sr << " d_rd=" << geo.d_rd << " beta_sr=" << geo.beta_sr << " beta_rd=" << geo.beta_rd
        << " los_sr=" << geo.los_sr << " los_rd=" << geo.los_rd << '\n';
    for (Eigen::Index g = 0; g < V.cols(); ++g) out << (g ? "," : "") << "re" << g << ",im" << g;
    out << '\n';
    for (Eigen::Index n = 0; n < V.rows(); ++n)
    {
        for (Eigen::Index g = 0; g < V.cols(); ++g)
            out << (g ? "," : "") << V(n, g).real() << ',' << V(n, g).imag();
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

} // namespace rss
