#pragma once

// DFT machinery, the composite frequency response F V^T w, the achievable
// rate over all subcarriers and an incremental evaluator answering
// single-element what-if queries in O(K).

#include "rss/model.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rss {

struct DftMatrix
{
    Eigen::MatrixXcd F; // K x G, F[k,g] = exp(-j 2 pi k g / K)
    std::size_t K = 0;
    std::size_t G = 0;
};

inline DftMatrix dft_matrix(std::size_t K, std::size_t G)
{
    if (G > K) throw std::invalid_argument("dft_matrix: G must not exceed K");
    DftMatrix d;
    d.K = K;
    d.G = G;
    d.F.resize(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(G));
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t g = 0; g < G; ++g)
        {
            // reduce k*g mod K first so large products keep full phase accuracy
            const double ang = -two_pi * static_cast<double>((k * g) % K) / static_cast<double>(K);
            d.F(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(g)) = std::polar(1.0, ang);
        }
    return d;
}

/// Per-element phase state: codebook indices or free angles. Reflection
/// coefficients are always unit modulus.
class RssConfiguration
{
public:
    enum class Mode { Quantized, Continuous };

    RssConfiguration() = default;

    static RssConfiguration quantized(PhaseCodebook codebook, std::vector<std::size_t> levels)
    {
        for (auto l : levels)
            if (l >= codebook.size()) throw std::out_of_range("RssConfiguration: level index beyond codebook");
        RssConfiguration c;
        c.mode_ = Mode::Quantized;
        c.codebook_ = std::move(codebook);
        c.levels_ = std::move(levels);
        return c;
    }

    static RssConfiguration all_level(PhaseCodebook codebook, std::size_t n, std::size_t level = 0)
    {
        return quantized(std::move(codebook), std::vector<std::size_t>(n, level));
    }

    static RssConfiguration continuous(std::vector<double> angles)
    {
        RssConfiguration c;
        c.mode_ = Mode::Continuous;
        for (auto& a : angles) a = wrap_phase(a);
        c.angles_ = std::move(angles);
        return c;
    }

    Mode mode() const { return mode_; }
    bool is_quantized() const { return mode_ == Mode::Quantized; }
    std::size_t size() const { return is_quantized() ? levels_.size() : angles_.size(); }

    double angle(std::size_t n) const { return is_quantized() ? codebook_.phase(levels_.at(n)) : angles_.at(n); }
    std::size_t level(std::size_t n) const
    {
        if (!is_quantized()) throw std::logic_error("RssConfiguration: continuous configuration has no levels");
        return levels_.at(n);
    }
    const std::vector<std::size_t>& levels() const { return levels_; }
    const PhaseCodebook& codebook() const { return codebook_; }

    std::complex<double> coefficient(std::size_t n) const { return std::polar(1.0, angle(n)); }

    Eigen::VectorXcd coefficients() const
    {
        Eigen::VectorXcd w(static_cast<Eigen::Index>(size()));
        for (std::size_t n = 0; n < size(); ++n) w[static_cast<Eigen::Index>(n)] = coefficient(n);
        return w;
    }

    void set_level(std::size_t n, std::size_t level)
    {
        if (!is_quantized()) throw std::logic_error("RssConfiguration: set_level on continuous configuration");
        if (level >= codebook_.size()) throw std::out_of_range("RssConfiguration: level index beyond codebook");
        levels_.at(n) = level;
    }
    void set_angle(std::size_t n, double a)
    {
        if (is_quantized()) throw std::logic_error("RssConfiguration: set_angle on quantized configuration");
        angles_.at(n) = wrap_phase(a);
    }

    bool operator==(const RssConfiguration&) const = default;

private:
    Mode mode_ = Mode::Continuous;
    PhaseCodebook codebook_;
    std::vector<std::size_t> levels_;
    std::vector<double> angles_;
};

/// F (V^T w): the composite frequency response over K subcarriers.
inline Eigen::VectorXcd cascaded_cfr(const Eigen::MatrixXcd& V, const RssConfiguration& omega, const DftMatrix& F)
{
    if (static_cast<std::size_t>(V.rows()) != omega.size())
        throw std::invalid_argument("cascaded_cfr: configuration has " + std::to_string(omega.size()) +
                                    " elements, channel has " + std::to_string(V.rows()));
    if (static_cast<std::size_t>(V.cols()) != F.G) throw std::invalid_argument("cascaded_cfr: tap count mismatch");
    const Eigen::VectorXcd h = V.transpose() * omega.coefficients();
    return F.F * h;
}

inline Eigen::VectorXcd cascaded_cfr(const Eigen::MatrixXcd& V, const RssConfiguration& omega, std::size_t K)
{
    return cascaded_cfr(V, omega, dft_matrix(K, static_cast<std::size_t>(V.cols())));
}

/// sum_i log(1 + x_i), vectorized. log(u) x / (u - 1) with u = 1 + x
/// recovers log1p accuracy for small x.
/// Above 1e-3 the plain log(1 + x) is already within ~1e-13 relative.
inline double sum_log1p(const Eigen::ArrayXd& x)
{
    if (x.size() == 0) return 0.0;
    if (x.minCoeff() > 1e-3) return (1.0 + x).log().sum();
    return ((1.0 + x) == 1.0).select(x, (1.0 + x).log() * x / ((1.0 + x) - 1.0)).sum();
}

/// B/(K+G-1) sum_k log2(1 + P |s_k|^2 / (K B sigma2)).
inline double rate_from_cfr(const Eigen::VectorXcd& s, const OfdmParams& ofdm)
{
    const Eigen::ArrayXd gain = s.array().abs2() * ofdm.snr_scale();
    return ofdm.rate_prefactor() * sum_log1p(gain) / std::numbers::ln2;
}

inline double achievable_rate(const Eigen::MatrixXcd& Vhat, const RssConfiguration& omega, const OfdmParams& ofdm)
{
    return rate_from_cfr(cascaded_cfr(Vhat, omega, ofdm.K), ofdm);
}

struct Flip
{
    std::size_t element = 0;
    std::size_t level = 0;
};

/// Holds C = F Vhat^T (K x N, one column per element) and the composite
/// response s = C w of the committed configuration.
class RateEvaluator
{
public:
    static constexpr std::size_t resync_period = 64;

    RateEvaluator(const Eigen::MatrixXcd& Vhat, RssConfiguration omega0, const OfdmParams& ofdm)
        : RateEvaluator(Vhat, std::move(omega0), ofdm, dft_matrix(ofdm.K, static_cast<std::size_t>(Vhat.cols())))
    {
    }

    RateEvaluator(const Eigen::MatrixXcd& Vhat, RssConfiguration omega0, const OfdmParams& ofdm, const DftMatrix& F)
        : ofdm_(ofdm), config_(std::move(omega0))
    {
        if (static_cast<std::size_t>(Vhat.rows()) != config_.size())
            throw std::invalid_argument("RateEvaluator: configuration size does not match channel rows");
        if (F.K != ofdm.K || F.G != static_cast<std::size_t>(Vhat.cols()))
            throw std::invalid_argument("RateEvaluator: DFT matrix shape mismatch");
        C_.noalias() = F.F * Vhat.transpose();
        C_re_ = C_.real().array();
        C_im_ = C_.imag().array();
        resync();
    }

    const OfdmParams& ofdm() const { return ofdm_; }
    const Eigen::MatrixXcd& projection() const { return C_; }
    const Eigen::VectorXcd& cfr() const { return s_; }
    const RssConfiguration& configuration() const { return config_; }
    double current_rate() const { return rate_; }
    std::size_t elements() const { return static_cast<std::size_t>(C_.cols()); }
    std::size_t subcarriers() const { return static_cast<std::size_t>(C_.rows()); }

    double rate_of(const Eigen::VectorXcd& s) const { return rate_from_cfr(s, ofdm_); }

    /// Rate if element r alone switched to reflection coefficient w.
    double rate_with_coefficient(std::size_t r, std::complex<double> w) const
    {
        check_element(r);
        return rate_with_delta(r, w - config_.coefficient(r));
    }

    double rate_with_flip(std::size_t r, std::size_t level) const
    {
        check_element(r);
        if (level >= config_.codebook().size()) throw std::out_of_range("rate_with_flip: level beyond codebook");
        if (level == config_.level(r)) return rate_;
        return rate_with_delta(r, std::polar(1.0, config_.codebook().phase(level)) - config_.coefficient(r));
    }

    /// Rate of the committed configuration with all `flips` applied together.
    double rate_with_flips(std::span<const Flip> flips) const
    {
        check_distinct(flips);
        Eigen::VectorXcd s = s_;
        for (const auto& f : flips) s += C_.col(idx(f.element)) * flip_delta(f);
        return rate_of(s);
    }

    void commit_flips(std::span<const Flip> flips)
    {
        check_distinct(flips);
        if (flips.empty()) return;
        for (const auto& f : flips)
        {
            s_ += C_.col(idx(f.element)) * flip_delta(f);
            config_.set_level(f.element, f.level);
        }
        after_commit();
    }

    /// Continuous-mode commit of one element's angle.
    void commit_angle(std::size_t r, double angle)
    {
        check_element(r);
        s_ += C_.col(idx(r)) * (std::polar(1.0, angle) - config_.coefficient(r));
        config_.set_angle(r, angle);
        after_commit();
    }

    /// Replaces the committed configuration.
    void reset(RssConfiguration omega)
    {
        if (omega.size() != elements()) throw std::invalid_argument("RateEvaluator: configuration size does not match channel rows");
        config_ = std::move(omega);
        resync();
    }

    /// Recomputes s = C w from scratch.
    void resync()
    {
        s_.noalias() = C_ * config_.coefficients();
        commits_since_resync_ = 0;
        refresh();
    }

private:
    static Eigen::Index idx(std::size_t n) { return static_cast<Eigen::Index>(n); }

    void check_element(std::size_t r) const
    {
        if (r >= elements()) throw std::out_of_range("RateEvaluator: element index " + std::to_string(r) + " out of range");
    }

    void check_distinct(std::span<const Flip> flips) const
    {
        std::vector<std::size_t> seen;
        seen.reserve(flips.size());
        for (const auto& f : flips)
        {
            check_element(f.element);
            if (f.level >= config_.codebook().size()) throw std::out_of_range("RateEvaluator: level beyond codebook");
            seen.push_back(f.element);
        }
        std::sort(seen.begin(), seen.end());
        if (std::adjacent_find(seen.begin(), seen.end()) != seen.end())
            throw std::invalid_argument("RateEvaluator: duplicate element in flip set");
    }

    std::complex<double> flip_delta(const Flip& f) const
    {
        return std::polar(1.0, config_.codebook().phase(f.level)) - config_.coefficient(f.element);
    }

    double rate_with_delta(std::size_t r, std::complex<double> delta) const
    {
        thread_local Eigen::ArrayXd gain;
        const double dr = delta.real();
        const double di = delta.imag();
        const auto cr = C_re_.col(idx(r));
        const auto ci = C_im_.col(idx(r));
        gain = ofdm_.snr_scale() * ((s_re_ + cr * dr - ci * di).square() + (s_im_ + cr * di + ci * dr).square());
        return ofdm_.rate_prefactor() * sum_log1p(gain) / std::numbers::ln2;
    }

    void after_commit()
    {
        if (++commits_since_resync_ >= resync_period)
            resync();
        else
            refresh();
    }

    void refresh()
    {
        s_re_ = s_.real().array();
        s_im_ = s_.imag().array();
        rate_ = rate_of(s_);
    }

    OfdmParams ofdm_;
    Eigen::MatrixXcd C_;
    Eigen::ArrayXXd C_re_, C_im_; // split copy of C for the what-if kernel
    Eigen::VectorXcd s_;
    Eigen::ArrayXd s_re_, s_im_;
    RssConfiguration config_;
    double rate_ = 0.0;
    std::size_t commits_since_resync_ = 0;
};

inline RateEvaluator make_evaluator(const Eigen::MatrixXcd& Vhat, RssConfiguration omega0, const OfdmParams& ofdm)
{
    return RateEvaluator(Vhat, std::move(omega0), ofdm);
}

} // namespace rss
