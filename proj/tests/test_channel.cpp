#include "rss/channel.hpp"

#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <string>

using namespace rss;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

ScenarioConfig small_config()
{
    ScenarioConfig c;
    c.ofdm.K = 64;
    c.ofdm.G = 8;
    c.ofdm.Lg = 8;
    c.ofdm.sigma2 = 1e-20;
    c.taps.taps_sr = 4;
    c.taps.taps_rd = 5;
    c.N = 16;
    return c;
}

} // namespace

TEST_CASE("tap profile power matches the Rician split")
{
    // Monte Carlo oracle: mean total power 1, mean tap-0 power k/(k+1) + diffuse share of tap 0.
    for (double kdb : {10.0, -10.0})
    {
        const double k = db_to_linear(kdb);
        const std::size_t taps = 10;
        const double decay = 2.5;
        double norm = 0.0;
        for (std::size_t g = 0; g < taps; ++g) norm += std::exp(-static_cast<double>(g) / decay);
        const double tap0 = k / (k + 1.0) + 1.0 / (k + 1.0) / norm;

        Rng rng = make_rng(3, 0, Stream::Channel);
        const int draws = 40000;
        double total = 0.0, p0 = 0.0, plast = 0.0;
        for (int i = 0; i < draws; ++i)
        {
            const auto tp = sample_tap_profile(taps, k, decay, rng);
            total += tp.taps.squaredNorm();
            p0 += std::norm(tp.taps[0]);
            plast += std::norm(tp.taps[taps - 1]);
        }
        CHECK_THAT(total / draws, WithinRel(1.0, 0.02));
        CHECK_THAT(p0 / draws, WithinRel(tap0, 0.02));
        const double last = 1.0 / (k + 1.0) * std::exp(-9.0 / decay) / norm;
        CHECK_THAT(plast / draws, WithinRel(last, 0.05));
    }
}

TEST_CASE("infinite K-factor gives a unit-modulus impulse")
{
    Rng rng = make_rng(1, 0, Stream::Channel);
    const auto tp = sample_tap_profile(5, std::numeric_limits<double>::infinity(), 1.0, rng);
    CHECK_THAT(std::abs(tp.taps[0]), WithinRel(1.0, 1e-15));
    CHECK(tp.taps.tail(4).norm() == 0.0);
}

TEST_CASE("tap profile rejects bad inputs")
{
    Rng rng = make_rng(1, 0, Stream::Channel);
    CHECK_THROWS_AS(sample_tap_profile(0, 1.0, 1.0, rng), std::invalid_argument);
    CHECK_THROWS_AS(sample_tap_profile(3, 1.0, 0.0, rng), std::invalid_argument);
    CHECK_THROWS_AS(sample_tap_profile(3, -1.0, 1.0, rng), std::invalid_argument);
    CHECK_THROWS_AS(path_loss(0.0, 2.0), std::invalid_argument);
}

TEST_CASE("convolution against direct definition")
{
    Eigen::VectorXcd a(2), b(3);
    a << 1.0, std::complex<double>(0, 1);
    b << 2.0, -1.0, std::complex<double>(1, 1);
    const auto c = convolve(a, b);
    REQUIRE(c.size() == 4);
    CHECK(c[0] == std::complex<double>(2, 0));
    CHECK(c[1] == std::complex<double>(-1, 2));
    CHECK(c[2] == std::complex<double>(1, 0));
    CHECK(c[3] == std::complex<double>(-1, 1));
}

TEST_CASE("cascaded rows are scaled convolutions of the two hops")
{
    const auto c = small_config();
    const auto ch = sample_cascaded_channel(c, 3);
    REQUIRE(ch.V.rows() == 16);
    REQUIRE(ch.V.cols() == 8);
    const double scale = std::sqrt(std::pow(100.0, -2.0) * std::pow(15.0, -2.75));
    for (Eigen::Index n = 0; n < ch.V.rows(); ++n)
    {
        const Eigen::VectorXcd row = scale * convolve(ch.hop_sr.row(n).transpose(), ch.hop_rd.row(n).transpose());
        CHECK((ch.V.row(n).transpose() - row).norm() <= 1e-15 * row.norm());
    }
}

TEST_CASE("channel draws depend on seed and trial only")
{
    auto c = small_config();
    const auto a = sample_cascaded_channel(c, 0);
    CHECK(sample_cascaded_channel(c, 0).V == a.V);
    CHECK(sample_cascaded_channel(c, 1).V != a.V);

    // distance changes rescale the same draw
    auto far = c;
    far.geometry.d_sr = 50.0;
    far.geometry.d_rd = 65.0;
    const auto b = sample_cascaded_channel(far, 0);
    const double ratio = std::sqrt(cascade_path_gain(far.geometry) / cascade_path_gain(c.geometry));
    CHECK((b.V - ratio * a.V).norm() <= 1e-12 * b.V.norm());

    c.seed = 2;
    CHECK(sample_cascaded_channel(c, 0).V != a.V);
}

TEST_CASE("direct cascade mode draws G taps per element")
{
    auto c = small_config();
    c.cascade_mode = CascadeMode::Direct;
    const auto ch = sample_cascaded_channel(c, 0);
    CHECK(ch.V.rows() == 16);
    CHECK(ch.V.cols() == 8);
    CHECK(ch.hop_sr.size() == 0);
}

TEST_CASE("mismatched tap split is rejected")
{
    auto c = small_config();
    c.taps.taps_rd = 3;
    CHECK_THROWS_AS(sample_cascaded_channel(c, 0), std::invalid_argument);
}

TEST_CASE("channel dump layout")
{
    const auto c = small_config();
    const auto ch = sample_cascaded_channel(c, 0);
    const auto path = (std::filesystem::temp_directory_path() / "rss_channel_dump.csv").string();
    write_channel_csv(ch.V, c.geometry, c.seed, 0, path);
    std::ifstream in(path);
    std::string meta, header, row;
    std::getline(in, meta);
    std::getline(in, header);
    CHECK(meta.rfind("# elements=16 taps=8", 0) == 0);
    CHECK(header.rfind("re0,im0,re1,im1", 0) == 0);
    std::size_t rows = 0;
    while (std::getline(in, row))
    {
        ++rows;
        CHECK(std::count(row.begin(), row.end(), ',') == 15);
    }
    CHECK(rows == 16);
    std::filesystem::remove(path);
}
