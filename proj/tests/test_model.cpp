#include "rss/model.hpp"
#include "rss/scenario_io.hpp"

#include <catch_amalgamated.hpp>

using namespace rss;
using Catch::Matchers::WithinRel;

namespace {

ScenarioConfig valid_config()
{
    ScenarioConfig c;
    c.ofdm.sigma2 = dbm_per_hz_to_w_per_hz(-165.14);
    return c;
}

} // namespace

TEST_CASE("noise PSD conversion from dBm/Hz")
{
    // 10^((-165.14 - 30) / 10), evaluated independently
    CHECK_THAT(dbm_per_hz_to_w_per_hz(-165.14), WithinRel(3.061963433690682e-20, 1e-13));
    CHECK_THAT(dbm_per_hz_to_w_per_hz(30.0), WithinRel(1.0, 1e-15));
}

TEST_CASE("SNR to power at the reference geometry")
{
    ScenarioConfig c = valid_config();
    // 1000 * K * B * sigma2 / (100^-2 * 15^-2.75), evaluated independently
    const double P = snr_to_power(db_to_linear(30.0), c.geometry, c.ofdm);
    CHECK_THAT(P, WithinRel(2.62555407164844, 1e-12));
    CHECK_THAT(cascade_path_gain(c.geometry), WithinRel(5.8310805074531275e-08, 1e-12));

    c.ofdm.P = P;
    CHECK_THAT(power_to_snr(P, c.geometry, c.ofdm), WithinRel(1000.0, 1e-12));
    CHECK_THAT(c.ofdm.snr_scale() * cascade_path_gain(c.geometry), WithinRel(1000.0, 1e-12));
    CHECK_THROWS_AS(snr_to_power(0.0, c.geometry, c.ofdm), std::invalid_argument);
}

TEST_CASE("rate prefactor accounts for the guard interval")
{
    OfdmParams o;
    CHECK(o.rate_prefactor() == 10e6 / 519.0);
}

TEST_CASE("uniform codebook levels and nearest-level mapping")
{
    const auto cb = PhaseCodebook::uniform(4);
    REQUIRE(cb.size() == 4);
    for (std::size_t l = 0; l < 4; ++l) CHECK_THAT(cb.phase(l), WithinRel(two_pi * l / 4.0, 1e-15));
    CHECK(cb.nearest(0.1) == 0);
    CHECK(cb.nearest(two_pi - 0.1) == 0);
    CHECK(cb.nearest(std::numbers::pi + 0.2) == 2);
    // exactly halfway between levels 0 and 1 goes to the lower index
    CHECK(cb.nearest(std::numbers::pi / 4.0) == 0);
    CHECK(PhaseCodebook::uniform(2).nearest(std::numbers::pi / 2.0) == 0);
    CHECK_THROWS_AS(PhaseCodebook::uniform(0), std::invalid_argument);
}

TEST_CASE("phase helpers wrap into [0, 2pi)")
{
    CHECK(wrap_phase(-0.5) == Catch::Approx(two_pi - 0.5));
    CHECK(wrap_phase(two_pi) == 0.0);
    CHECK(circular_distance(0.1, two_pi - 0.1) == Catch::Approx(0.2));
}

TEST_CASE("validation names the failing invariant")
{
    REQUIRE_NOTHROW(validate_scenario(valid_config()));

    auto c = valid_config();
    c.ofdm.K = 10;
    CHECK_THROWS_WITH(validate_scenario(c), Catch::Matchers::ContainsSubstring("K >= G"));

    c = valid_config();
    c.ofdm.Lg = 5;
    CHECK_THROWS_WITH(validate_scenario(c), Catch::Matchers::ContainsSubstring("guard interval"));

    c = valid_config();
    c.N = 100;
    c.pilot_kind = PilotKind::Hadamard;
    CHECK_THROWS_WITH(validate_scenario(c), Catch::Matchers::ContainsSubstring("Hadamard"));

    c = valid_config();
    c.taps.taps_sr = 5;
    CHECK_THROWS_WITH(validate_scenario(c), Catch::Matchers::ContainsSubstring("tap split"));
    c.cascade_mode = CascadeMode::Direct;
    CHECK_NOTHROW(validate_scenario(c));

    c = valid_config();
    c.algorithms.push_back({AlgorithmId::Greedy, "", GreedyOptions{0.0}, {}});
    CHECK_THROWS_WITH(validate_scenario(c), Catch::Matchers::ContainsSubstring("alpha"));

    c = valid_config();
    c.ofdm.sigma2 = 0.0;
    CHECK_THROWS_AS(validate_scenario(c), std::invalid_argument);
}

TEST_CASE("K-factors convert from dB")
{
    LinkGeometry g;
    CHECK_THAT(g.kappa_sr(), WithinRel(10.0, 1e-12));
    g.los_rd = false;
    CHECK_THAT(g.kappa_rd(), WithinRel(0.1, 1e-12));
}

TEST_CASE("scenario JSON round of defaults and overrides")
{
    const auto doc = nlohmann::json::parse(R"({
        "ofdm": {"K": 64, "G": 8, "Lg": 8, "sigma2_dbm_per_hz": -170},
        "N": 32, "L": 4, "pilot_kind": "hadamard",
        "taps": {"taps_sr": 4, "taps_rd": 5},
        "trials": 7, "seed": 42,
        "algorithms": [{"id": "greedy", "init": "scpgm", "alpha": 0.5}, {"id": "algo2", "label": "a2",
                        "replicas": [{"init": "stm"}, {"init": "all-zero"}]}],
        "sweep": {"axis": "L", "values": [2, 4], "conditions": ["nlos"]}
    })");
    const auto spec = parse_scenario(doc);
    CHECK(spec.axis == SweepAxis::Levels);
    CHECK(spec.values == std::vector<double>{2, 4});
    CHECK(spec.conditions == std::vector<LinkCondition>{LinkCondition::Nlos});
    const auto& c = spec.base;
    CHECK(c.ofdm.K == 64);
    CHECK(c.ofdm.B == 10e6);
    CHECK_THAT(c.ofdm.sigma2, WithinRel(1e-20, 1e-12));
    CHECK(c.N == 32);
    CHECK(c.codebook == PhaseCodebook::uniform(4));
    CHECK(c.pilot_kind == PilotKind::Hadamard);
    CHECK(c.trials == 7);
    CHECK(c.seed == 42);
    REQUIRE(c.algorithms.size() == 2);
    CHECK(algorithm_label(c.algorithms[0]) == "greedy-scpgm");
    CHECK(c.algorithms[0].greedy.alpha == 0.5);
    CHECK(algorithm_label(c.algorithms[1]) == "a2");
    REQUIRE(c.algorithms[1].replicas.size() == 2);
    CHECK(c.algorithms[1].replicas[1].init == InitKind::AllZero);
}

TEST_CASE("scenario JSON rejects unknown keys and bad values")
{
    auto parse = [](const char* text) { return parse_scenario(nlohmann::json::parse(text)); };
    CHECK_THROWS_WITH(parse(R"({"Nn": 4})"), Catch::Matchers::ContainsSubstring("unknown key 'Nn'"));
    CHECK_THROWS_WITH(parse(R"({"ofdm": {"bandwidth": 1}})"), Catch::Matchers::ContainsSubstring("unknown key 'bandwidth'"));
    CHECK_THROWS_WITH(parse(R"({"algorithms": [{"id": "annealing"}]})"), Catch::Matchers::ContainsSubstring("unknown algorithm"));
    CHECK_THROWS_WITH(parse(R"({"algorithms": [{"id": "algo2", "replicas": [{"seed": 1}]}]})"),
                      Catch::Matchers::ContainsSubstring("unknown key 'seed'"));
    CHECK_THROWS_WITH(parse(R"({"sweep": {"axis": "power", "values": [1]}})"), Catch::Matchers::ContainsSubstring("unknown axis"));
    CHECK_THROWS_AS(parse(R"({"ofdm": {"K": 10}})"), std::invalid_argument);
    CHECK_THROWS_AS(parse(R"({"L": 2, "phases": [0, 1]})"), std::invalid_argument);
}

TEST_CASE("roster identifiers round-trip")
{
    for (auto id : {AlgorithmId::Greedy, AlgorithmId::Algo2, AlgorithmId::Stm, AlgorithmId::Scpgm, AlgorithmId::StmContinuous,
                    AlgorithmId::ScpgmContinuous, AlgorithmId::OscpsSurrogate, AlgorithmId::Random, AlgorithmId::Exhaustive})
        CHECK(parse_algorithm_id(algorithm_name(id)) == id);
}
