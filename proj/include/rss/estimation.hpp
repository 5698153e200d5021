#pragma once

// Pilot-based estimation of the cascaded channel: the N pilot RSS
// configurations (columns of Omega), noisy reception Z = X F V^T Omega + N
// and the least-squares recovery Vhat^T = (F^H/K) X^-1 Z Omega^-1.
//
// Omega is never stored densely at run time. For N = 4096 it would be
// 16M complex entries; right-multiplication by Omega or Omega^-1 is a
// length-N DFT / Walsh-Hadamard transform of every row instead.

#include "rss/model.hpp"
#include "rss/ofdm.hpp"
#include "rss/random.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace rss {

/// Dense N x N pilot matrix. DFT: Omega[n,i] = exp(-j 2 pi n i / N).
/// Hadamard: Sylvester construction, entries +-1.
inline Eigen::MatrixXcd pilot_matrix(std::size_t N, PilotKind kind)
{
    if (N < 1) throw std::invalid_argument("pilot_matrix: N >= 1 required");
    const auto n = static_cast<Eigen::Index>(N);
    Eigen::MatrixXcd M(n, n);
    if (kind == PilotKind::Dft)
    {
        for (std::size_t r = 0; r < N; ++r)
            for (std::size_t c = 0; c < N; ++c)
                M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                    std::polar(1.0, -two_pi * static_cast<double>((r * c) % N) / static_cast<double>(N));
        return M;
    }
    if (!is_power_of_two(N)) throw std::invalid_argument("pilot_matrix: Hadamard needs N a power of two");
    M(0, 0) = 1.0;
    for (Eigen::Index h = 1; h < n; h *= 2)
    {
        M.block(0, h, h, h) = M.block(0, 0, h, h);
        M.block(h, 0, h, h) = M.block(0, 0, h, h);
        M.block(h, h, h, h) = -M.block(0, 0, h, h);
    }
    return M;
}

namespace detail {

inline void fwht(std::vector<std::complex<double>>& x)
{
    const std::size_t n = x.size();
    for (std::size_t h = 1; h < n; h *= 2)
        for (std::size_t i = 0; i < n; i += 2 * h)
            for (std::size_t j = i; j < i + h; ++j)
            {
                const auto a = x[j];
                const auto b = x[j + h];
                x[j] = a + b;
                x[j + h] = a - b;
            }
}

} // namespace detail

struct PilotPlan
{
    PilotKind kind = PilotKind::Dft;
    std::size_t N = 0;
    Eigen::VectorXcd pilot_symbols; // diagonal of X, |x_k|^2 = P/K
    std::size_t T_min = 0;          // informational only

    Eigen::MatrixXcd omega() const { return pilot_matrix(N, kind); }

    /// A * Omega for A with N columns.
    Eigen::MatrixXcd apply(const Eigen::MatrixXcd& A) const { return transform_rows(A, false); }
    /// A * Omega^-1 = A * Omega^H / N.
    Eigen::MatrixXcd apply_inverse(const Eigen::MatrixXcd& A) const { return transform_rows(A, true); }

private:
    Eigen::MatrixXcd transform_rows(const Eigen::MatrixXcd& A, bool inverse) const
    {
        if (static_cast<std::size_t>(A.cols()) != N)
            throw std::invalid_argument("PilotPlan: operand has " + std::to_string(A.cols()) + " columns, expected " +
                                        std::to_string(N));
        Eigen::MatrixXcd out(A.rows(), A.cols());
        std::vector<std::complex<double>> row(N), res(N);
        Eigen::FFT<double> fft;
        for (Eigen::Index r = 0; r < A.rows(); ++r)
        {
            for (std::size_t i = 0; i < N; ++i) row[i] = A(r, static_cast<Eigen::Index>(i));
            if (kind == PilotKind::Dft)
            {
                if (inverse)
                    fft.inv(res, row); // includes the 1/N
                else
                    fft.fwd(res, row);
            }
            else
            {
                // Sylvester H is symmetric with H H = N I
                detail::fwht(row);
                res = row;
                if (inverse)
                    for (auto& v : res) v /= static_cast<double>(N);
            }
            for (std::size_t i = 0; i < N; ++i) out(r, static_cast<Eigen::Index>(i)) = res[i];
        }
        return out;
    }
};

/// T = ceil(pi N A / lambda^2) - 1. Ratios within 1e-12 of an integer are
/// snapped to it so exact products survive floating-point rounding.
inline std::size_t min_pilot_subcarriers(std::size_t N, double area, double lambda)
{
    if (N < 1 || !(area > 0.0) || !(lambda > 0.0))
        throw std::invalid_argument("min_pilot_subcarriers: inputs must be positive");
    double x = std::numbers::pi * static_cast<double>(N) * area / (lambda * lambda);
    const double nearest = std::round(x);
    if (std::abs(x - nearest) <= 1e-12 * std::max(1.0, nearest)) x = nearest;
    const double t = std::ceil(x) - 1.0;
    return t < 0.0 ? 0 : static_cast<std::size_t>(t);
}

/// Pilot plan with constant symbols sqrt(P/K) on every subcarrier.
inline PilotPlan make_pilot_plan(std::size_t N, PilotKind kind, const OfdmParams& ofdm)
{
    if (N < 1) throw std::invalid_argument("make_pilot_plan: N >= 1 required");
    if (kind == PilotKind::Hadamard && !is_power_of_two(N))
        throw std::invalid_argument("make_pilot_plan: Hadamard needs N a power of two");
    PilotPlan p;
    p.kind = kind;
    p.N = N;
    p.pilot_symbols = Eigen::VectorXcd::Constant(static_cast<Eigen::Index>(ofdm.K),
                                                 std::sqrt(ofdm.P / static_cast<double>(ofdm.K)));
    return p;
}

/// Z = X F V^T Omega + noise, noise ~ CN(0, B sigma2 / K) i.i.d. per entry.
/// Noise is drawn column by column (pilot transmission), subcarrier fastest.
inline Eigen::MatrixXcd simulate_pilot_rx(const Eigen::MatrixXcd& V, const PilotPlan& plan, const OfdmParams& ofdm,
                                          Rng& rng, const DftMatrix* F = nullptr)
{
    if (static_cast<std::size_t>(V.rows()) != plan.N)
        throw std::invalid_argument("simulate_pilot_rx: channel rows do not match pilot plan N");
    if (static_cast<std::size_t>(plan.pilot_symbols.size()) != ofdm.K)
        throw std::invalid_argument("simulate_pilot_rx: pilot symbol count does not match K");
    DftMatrix local;
    if (F == nullptr)
    {
        local = dft_matrix(ofdm.K, static_cast<std::size_t>(V.cols()));
        F = &local;
    }
    Eigen::MatrixXcd FV = F->F * V.transpose(); // K x N
    Eigen::MatrixXcd Z = plan.apply(FV);
    Z = plan.pilot_symbols.asDiagonal() * Z;

    const double var = ofdm.B * ofdm.sigma2 / static_cast<double>(ofdm.K);
    if (var > 0.0)
    {
        for (Eigen::Index i = 0; i < Z.cols(); ++i)
            for (Eigen::Index k = 0; k < Z.rows(); ++k) Z(k, i) += complex_normal(rng, var);
    }
    return Z;
}

struct ChannelEstimate
{
    Eigen::MatrixXcd Vhat; // N x G
    double noise_level = 0.0;
};

/// Vhat^T = (F^H / K) X^-1 Z Omega^-1.
inline ChannelEstimate lse_estimate(const Eigen::MatrixXcd& Z, const PilotPlan& plan, const DftMatrix& F,
                                    double noise_level = 0.0)
{
    if (static_cast<std::size_t>(Z.rows()) != F.K) throw std::invalid_argument("lse_estimate: Z rows must equal K");
    const auto& x = plan.pilot_symbols;
    if (x.size() != Z.rows()) throw std::invalid_argument("lse_estimate: pilot symbol count must equal K");
    for (Eigen::Index k = 0; k < x.size(); ++k)
        if (x[k] == std::complex<double>{}) throw std::invalid_argument("lse_estimate: zero pilot symbol, X is singular");

    Eigen::MatrixXcd W = plan.apply_inverse(Z);
    W = x.cwiseInverse().asDiagonal() * W;
    Eigen::MatrixXcd VhatT = (F.F.adjoint() * W) / static_cast<double>(F.K); // G x N
    return {VhatT.transpose(), noise_level};
}

} // namespace rss
