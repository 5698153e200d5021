#include "rss/figures.hpp"
#include "rss/harness.hpp"
#include "rss/report.hpp"

#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

using namespace rss;

namespace {

SweepSpec tiny_sweep()
{
    SweepSpec s;
    s.axis = SweepAxis::SnrDb;
    s.values = {0.0, 10.0, 20.0, 30.0};
    s.conditions = {LinkCondition::Los, LinkCondition::Nlos};
    auto& b = s.base;
    b.ofdm.K = 16;
    b.ofdm.G = 4;
    b.ofdm.Lg = 4;
    b.ofdm.sigma2 = dbm_per_hz_to_w_per_hz(-165.14);
    b.taps.taps_sr = 2;
    b.taps.taps_rd = 3;
    b.N = 16;
    b.trials = 3;
    b.algorithms = comparison_roster();
    return s;
}

std::string slurp(const std::string& path)
{
    std::ifstream f(path, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::string temp_path(const std::string& name) { return (std::filesystem::temp_directory_path() / name).string(); }

ResultRow sample_row()
{
    ResultRow r;
    r.axis = "snr_db";
    r.value = 10.0;
    r.algorithm = "algo2";
    r.condition = "LoS";
    r.rate_bps = 12345678.901234567;
    r.stderr_bps = 0.1 + 0.2;
    r.trials = 20;
    r.seconds_per_trial = 0.0;
    return r;
}

} // namespace

TEST_CASE("empty rows give a header-only file")
{
    const auto p = temp_path("rss_empty.csv");
    emit_csv({}, p);
    CHECK(slurp(p) == "axis,value,algorithm,condition,rate_bps,stderr_bps,trials,seconds_per_trial\n");
    CHECK(parse_csv(p).empty());
}

TEST_CASE("one row gives a two-line file that parses back exactly")
{
    const auto p = temp_path("rss_one.csv");
    const auto row = sample_row();
    emit_csv({row}, p);
    const auto text = slurp(p);
    CHECK(std::count(text.begin(), text.end(), '\n') == 2);
    CHECK(text.find("snr_db,10,algo2,LoS,12345678.901234567,0.30000000000000004,20,0\n") != std::string::npos);
    const auto back = parse_csv(p);
    REQUIRE(back.size() == 1);
    CHECK(back[0] == row);
}

TEST_CASE("distance rows carry d_rd and survive the round trip")
{
    auto a = sample_row();
    a.axis = "d_sr";
    a.value = 32.0;
    a.d_rd = 83.0;
    auto b = a;
    b.rate_bps = 1.0 / 3.0;
    b.condition = "NLoS";
    const auto text = format_csv({a, b});
    CHECK(text.rfind("axis,value,algorithm,condition,rate_bps,stderr_bps,trials,seconds_per_trial,d_rd\n", 0) == 0);
    const auto back = parse_csv_text(text);
    REQUIRE(back.size() == 2);
    CHECK(back[0] == a);
    CHECK(back[1] == b);
}

TEST_CASE("CSV parser rejects malformed input")
{
    CHECK_THROWS_AS(parse_csv_text("a,b\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_csv_text(std::string(csv_header) + "\nsnr_db,1,x\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_csv_text(std::string(csv_header) + "\nsnr_db,1,x,LoS,abc,0,1,0\n"), std::invalid_argument);
    auto bad = sample_row();
    bad.algorithm = "a,b";
    CHECK_THROWS_AS(format_csv({bad}), std::invalid_argument);
    CHECK_THROWS_AS(emit_csv({}, "/nonexistent-dir/x.csv"), std::runtime_error);
}

TEST_CASE("plot draws one polyline per curve")
{
    auto a = sample_row();
    auto b = a;
    b.value = 20.0;
    b.rate_bps *= 2;
    const auto svg = render_svg({a, b});
    const std::regex poly("<polyline[^>]*points=\"([^\"]*)\"");
    std::vector<std::string> found;
    for (auto it = std::sregex_iterator(svg.begin(), svg.end(), poly); it != std::sregex_iterator(); ++it) found.push_back((*it)[1]);
    REQUIRE(found.size() == 1);
    CHECK(std::count(found[0].begin(), found[0].end(), ' ') == 1); // two vertices
    CHECK(svg.find("SNR (dB)") != std::string::npos);
    CHECK(svg.find("algo2 (LoS)") != std::string::npos);
    CHECK(render_svg({a, b}) == svg);

    auto c = a;
    c.axis = "N";
    CHECK_THROWS_WITH(render_svg({a, c}), Catch::Matchers::ContainsSubstring("mix axes"));
}

TEST_CASE("sweep validation")
{
    auto s = tiny_sweep();
    s.values = {};
    CHECK_THROWS_AS(validate_sweep(s), std::invalid_argument);
    s.values = {10.0, 0.0};
    CHECK_THROWS_AS(validate_sweep(s), std::invalid_argument);
    s.axis = SweepAxis::DistanceSr;
    s.values = {10.0, 115.0};
    CHECK_THROWS_AS(validate_sweep(s), std::invalid_argument);
    s.axis = SweepAxis::Levels;
    s.values = {2.0, 2.5};
    CHECK_THROWS_AS(validate_sweep(s), std::invalid_argument);
}

TEST_CASE("point configs: SNR sets power, distance keeps the total")
{
    auto s = tiny_sweep();
    const auto c = point_config(s, 20.0, LinkCondition::Nlos);
    CHECK_FALSE(c.geometry.los_rd);
    CHECK(power_to_snr(c.ofdm.P, c.geometry, c.ofdm) == Catch::Approx(100.0).epsilon(1e-12));

    s.axis = SweepAxis::DistanceSr;
    s.values = {15.0, 100.0};
    const auto near = point_config(s, 15.0, LinkCondition::Los);
    CHECK(near.geometry.d_sr + near.geometry.d_rd == 115.0);
    // power fixed by the reference geometry, not by the moved RSS
    CHECK(near.ofdm.P == point_config(s, 100.0, LinkCondition::Los).ofdm.P);
}

TEST_CASE("SNR sweep yields one row per value, algorithm and condition")
{
    const auto s = tiny_sweep();
    RunOptions o;
    o.workers = 2;
    const auto rows = run_experiment(s, o);
    CHECK(rows.size() == 4 * 4 * 2);
    for (const auto& r : rows)
    {
        CHECK(r.trials == 3);
        CHECK(r.rate_bps >= 0.0);
        CHECK(r.stderr_bps >= 0.0);
        CHECK(r.seconds_per_trial == 0.0);
        CHECK_FALSE(r.d_rd.has_value());
    }
    CHECK(rows[0].algorithm == "stm-ic");
    CHECK(rows[3].algorithm == "oscps-surrogate");
    CHECK(rows[4].condition == "NLoS");
}

TEST_CASE("identical seed gives identical CSV regardless of worker count")
{
    const auto s = tiny_sweep();
    RunOptions one, many;
    one.workers = 1;
    many.workers = 5;
    const auto a = format_csv(run_experiment(s, one));
    CHECK(a == format_csv(run_experiment(s, many)));
    auto t = s;
    t.base.seed = 2;
    CHECK(a != format_csv(run_experiment(t, one)));
}

TEST_CASE("algo2 is at least every greedy variant on the same trial")
{
    auto s = tiny_sweep();
    s.values = {20.0};
    s.base.trials = 1;
    s.base.algorithms = {greedy_from(InitKind::Stm, "stm-ic"), greedy_from(InitKind::Scpgm, "scpgm-ic"),
                         greedy_from(InitKind::Random, "random-ic"), roster_entry(AlgorithmId::Algo2)};
    const auto rows = run_experiment(s);
    for (std::size_t i = 0; i < rows.size(); i += 4)
        for (std::size_t j = 0; j < 3; ++j) CHECK(rows[i + 3].rate_bps >= rows[i + j].rate_bps);
}

TEST_CASE("harness algo2 agrees with the library replica search")
{
    auto s = tiny_sweep();
    s.values = {10.0};
    s.conditions = {LinkCondition::Los};
    s.base.trials = 1;
    s.base.algorithms = {roster_entry(AlgorithmId::Algo2)};
    const auto cfg = point_config(s, 10.0, LinkCondition::Los);
    const auto est = estimate_trial_channel(cfg, 0, dft_matrix(cfg.ofdm.K, cfg.ofdm.G));
    const auto lib = parallel_optimize(est.Vhat, cfg.codebook, default_replicas(replica_seed(cfg.seed, 0)), cfg.ofdm);
    const auto rows = run_experiment(s);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].rate_bps == achievable_rate(est.Vhat, lib.config, cfg.ofdm));
}

TEST_CASE("distance sweep emits d_rd")
{
    auto s = tiny_sweep();
    s.axis = SweepAxis::DistanceSr;
    s.values = {15.0, 65.0};
    s.base.algorithms = {roster_entry(AlgorithmId::Stm)};
    const auto rows = run_experiment(s);
    REQUIRE(rows.size() == 4);
    CHECK(*rows[0].d_rd == 100.0);
    CHECK(*rows[2].d_rd == 50.0);
}

TEST_CASE("N and L axes")
{
    auto s = tiny_sweep();
    s.axis = SweepAxis::Elements;
    s.values = {4.0, 8.0};
    s.base.algorithms = {roster_entry(AlgorithmId::Exhaustive), roster_entry(AlgorithmId::Random)};
    auto rows = run_experiment(s);
    CHECK(rows.size() == 8);
    for (std::size_t i = 0; i < rows.size(); i += 2) CHECK(rows[i].rate_bps >= rows[i + 1].rate_bps);

    s.axis = SweepAxis::Levels;
    s.values = {2.0, 4.0};
    s.base.algorithms = {roster_entry(AlgorithmId::Algo2)};
    rows = run_experiment(s);
    CHECK(rows.size() == 4);
}

TEST_CASE("errors carry sweep context")
{
    auto s = tiny_sweep();
    s.axis = SweepAxis::Elements;
    s.values = {25.0};
    s.base.algorithms = {roster_entry(AlgorithmId::Exhaustive)};
    CHECK_THROWS_WITH(run_experiment(s), Catch::Matchers::ContainsSubstring("N=25") && Catch::Matchers::ContainsSubstring("exhaustive") &&
                                             Catch::Matchers::ContainsSubstring("trial 0"));
    s.base.pilot_kind = PilotKind::Hadamard;
    CHECK_THROWS_WITH(run_experiment(s), Catch::Matchers::ContainsSubstring("Hadamard"));
}

TEST_CASE("figure presets")
{
    for (int f = 1; f <= 6; ++f)
    {
        const auto full = figure_plan(f);
        REQUIRE_FALSE(full.sweeps.empty());
        for (const auto& s : full.sweeps)
        {
            CHECK(s.base.N == 4096);
            CHECK(s.base.ofdm.K == 500);
            CHECK(s.base.trials == 20);
            CHECK_NOTHROW(validate_sweep(s));
            CHECK_NOTHROW(point_config(s, s.values.front(), LinkCondition::Los));
        }
        for (const auto& s : figure_plan(f, true).sweeps)
        {
            CHECK(s.base.N == 64);
            CHECK(s.base.trials == 100);
            CHECK_NOTHROW(point_config(s, s.values.back(), LinkCondition::Nlos));
        }
    }
    CHECK(figure_plan(4).sweeps.size() == 3);
    CHECK(figure_plan(6, true).sweeps[0].values == std::vector<double>{4, 16, 64});
    CHECK_THROWS_AS(figure_plan(7), std::invalid_argument);
}

TEST_CASE("figure 4 analog plots three L curves plus the surrogate")
{
    auto plan = figure_plan(4, true);
    for (auto& s : plan.sweeps)
    {
        s.base.trials = 2;
        s.base.N = 16;
        s.values = {10.0, 30.0};
        s.conditions = {LinkCondition::Los};
    }
    const auto rows = run_figure(plan);
    const auto curves = group_curves(rows);
    REQUIRE(curves.size() == 4);
    CHECK(curves[0].algorithm == "algo2-L2");
    CHECK(curves[1].algorithm == "oscps-surrogate");
    CHECK(curves[2].algorithm == "algo2-L4");
    CHECK(curves[3].algorithm == "algo2-L8");
    const auto svg = render_svg(rows);
    CHECK(std::count(svg.begin(), svg.end(), '\n') > 10);
}
