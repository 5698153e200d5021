#pragma once

// Scenario files: JSON mirroring ScenarioConfig, plus a "sweep" block.
// Unknown keys are rejected at every level. Noise PSD is given in dBm/Hz
// and SNR in dB; both are converted on load.

#include "rss/model.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace rss {

enum class SweepAxis { SnrDb, DistanceSr, Elements, Levels };

enum class LinkCondition { Los, Nlos };

inline const char* axis_name(SweepAxis a)
{
    switch (a)
    {
    case SweepAxis::SnrDb: return "snr_db";
    case SweepAxis::DistanceSr: return "d_sr";
    case SweepAxis::Elements: return "N";
    case SweepAxis::Levels: return "L";
    }
    return "?";
}

inline const char* condition_name(LinkCondition c) { return c == LinkCondition::Los ? "LoS" : "NLoS"; }

struct SweepSpec
{
    SweepAxis axis = SweepAxis::SnrDb;
    std::vector<double> values;
    ScenarioConfig base;
    std::vector<LinkCondition> conditions; // r-d link; empty means base.geometry.los_rd
    double d_total = 115.0;               // d_sr + d_rd for the distance axis
};

inline const char* algorithm_name(AlgorithmId id)
{
    switch (id)
    {
    case AlgorithmId::Greedy: return "greedy";
    case AlgorithmId::Algo2: return "algo2";
    case AlgorithmId::Stm: return "stm";
    case AlgorithmId::Scpgm: return "scpgm";
    case AlgorithmId::StmContinuous: return "stm-continuous";
    case AlgorithmId::ScpgmContinuous: return "scpgm-continuous";
    case AlgorithmId::OscpsSurrogate: return "oscps-surrogate";
    case AlgorithmId::Random: return "random";
    case AlgorithmId::Exhaustive: return "exhaustive";
    }
    return "?";
}

inline AlgorithmId parse_algorithm_id(const std::string& s)
{
    for (auto id : {AlgorithmId::Greedy, AlgorithmId::Algo2, AlgorithmId::Stm, AlgorithmId::Scpgm, AlgorithmId::StmContinuous,
                    AlgorithmId::ScpgmContinuous, AlgorithmId::OscpsSurrogate, AlgorithmId::Random, AlgorithmId::Exhaustive})
        if (s == algorithm_name(id)) return id;
    throw std::invalid_argument("unknown algorithm id '" + s + "'");
}

inline const char* init_name(InitKind k)
{
    switch (k)
    {
    case InitKind::Random: return "random";
    case InitKind::Stm: return "stm";
    case InitKind::Scpgm: return "scpgm";
    case InitKind::AllZero: return "all-zero";
    }
    return "?";
}

inline InitKind parse_init(const std::string& s)
{
    for (auto k : {InitKind::Random, InitKind::Stm, InitKind::Scpgm, InitKind::AllZero})
        if (s == init_name(k)) return k;
    throw std::invalid_argument("unknown greedy init '" + s + "'");
}

/// Curve name used in outputs: the explicit label, or the id ("greedy-<init>" for greedy).
inline std::string algorithm_label(const AlgorithmSpec& a)
{
    if (!a.label.empty()) return a.label;
    if (a.id == AlgorithmId::Greedy) return std::string("greedy-") + init_name(a.greedy.init);
    return algorithm_name(a.id);
}

namespace detail {

using nlohmann::json;

inline void allow_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys)
{
    if (!j.is_object()) throw std::invalid_argument(where + ": expected an object");
    for (const auto& [k, v] : j.items())
        if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return k == a; }))
            throw std::invalid_argument(where + ": unknown key '" + k + "'");
}

template <typename T>
void read(const json& j, const char* key, T& out)
{
    if (j.contains(key)) out = j.at(key).get<T>();
}

inline GreedyOptions read_greedy(const json& j, const std::string& where)
{
    allow_keys(j, where, {"alpha", "max_iters", "init"});
    GreedyOptions g;
    read(j, "alpha", g.alpha);
    read(j, "max_iters", g.max_iters);
    if (j.contains("init")) g.init = parse_init(j.at("init").get<std::string>());
    return g;
}

} // namespace detail

/// Parses a scenario document; the base config is validated before return.
inline SweepSpec parse_scenario(const nlohmann::json& doc)
{
    using detail::allow_keys;
    using detail::read;
    allow_keys(doc, "scenario", {"ofdm", "geometry", "N", "L", "phases", "pilot_kind", "cascade_mode", "taps", "trials", "seed",
                                 "snr_db", "algorithms", "sweep"});
    SweepSpec spec;
    ScenarioConfig& cfg = spec.base;
    cfg.ofdm.sigma2 = dbm_per_hz_to_w_per_hz(-165.14);

    if (doc.contains("ofdm"))
    {
        const auto& o = doc.at("ofdm");
        allow_keys(o, "ofdm", {"K", "B", "G", "Lg", "sigma2_dbm_per_hz"});
        read(o, "K", cfg.ofdm.K);
        read(o, "B", cfg.ofdm.B);
        read(o, "G", cfg.ofdm.G);
        read(o, "Lg", cfg.ofdm.Lg);
        if (o.contains("sigma2_dbm_per_hz")) cfg.ofdm.sigma2 = dbm_per_hz_to_w_per_hz(o.at("sigma2_dbm_per_hz").get<double>());
    }
    if (doc.contains("geometry"))
    {
        const auto& g = doc.at("geometry");
        allow_keys(g, "geometry", {"d_sr", "d_rd", "beta_sr", "beta_rd", "los_sr", "los_rd", "kappa_los_db", "kappa_nlos_db"});
        auto& geo = cfg.geometry;
        read(g, "d_sr", geo.d_sr);
        read(g, "d_rd", geo.d_rd);
        read(g, "beta_sr", geo.beta_sr);
        read(g, "beta_rd", geo.beta_rd);
        read(g, "los_sr", geo.los_sr);
        read(g, "los_rd", geo.los_rd);
        read(g, "kappa_los_db", geo.kappa_los_db);
        read(g, "kappa_nlos_db", geo.kappa_nlos_db);
    }
    read(doc, "N", cfg.N);
    if (doc.contains("phases") && doc.contains("L")) throw std::invalid_argument("scenario: give either 'L' or 'phases'");
    if (doc.contains("L")) cfg.codebook = PhaseCodebook::uniform(doc.at("L").get<std::size_t>());
    if (doc.contains("phases")) cfg.codebook = PhaseCodebook(doc.at("phases").get<std::vector<double>>());
    if (doc.contains("pilot_kind"))
    {
        const auto k = doc.at("pilot_kind").get<std::string>();
        if (k == "dft") cfg.pilot_kind = PilotKind::Dft;
        else if (k == "hadamard") cfg.pilot_kind = PilotKind::Hadamard;
        else throw std::invalid_argument("scenario: unknown pilot_kind '" + k + "'");
    }
    if (doc.contains("cascade_mode"))
    {
        const auto m = doc.at("cascade_mode").get<std::string>();
        if (m == "convolved") cfg.cascade_mode = CascadeMode::Convolved;
        else if (m == "direct") cfg.cascade_mode = CascadeMode::Direct;
        else throw std::invalid_argument("scenario: unknown cascade_mode '" + m + "'");
    }
    if (doc.contains("taps"))
    {
        const auto& t = doc.at("taps");
        allow_keys(t, "taps", {"taps_sr", "taps_rd", "pdp_decay_sr", "pdp_decay_rd"});
        read(t, "taps_sr", cfg.taps.taps_sr);
        read(t, "taps_rd", cfg.taps.taps_rd);
        if (t.contains("pdp_decay_sr")) cfg.taps.pdp_decay_sr = t.at("pdp_decay_sr").get<double>();
        if (t.contains("pdp_decay_rd")) cfg.taps.pdp_decay_rd = t.at("pdp_decay_rd").get<double>();
    }
    read(doc, "trials", cfg.trials);
    read(doc, "seed", cfg.seed);
    read(doc, "snr_db", cfg.snr_db);
    if (doc.contains("algorithms"))
    {
        for (const auto& a : doc.at("algorithms"))
        {
            detail::allow_keys(a, "algorithm", {"id", "label", "alpha", "max_iters", "init", "replicas"});
            AlgorithmSpec s;
            s.id = parse_algorithm_id(a.at("id").get<std::string>());
            read(a, "label", s.label);
            nlohmann::json greedy_part = nlohmann::json::object();
            for (const char* k : {"alpha", "max_iters", "init"})
                if (a.contains(k)) greedy_part[k] = a.at(k);
            s.greedy = detail::read_greedy(greedy_part, "algorithm");
            if (a.contains("replicas"))
                for (const auto& r : a.at("replicas")) s.replicas.push_back(detail::read_greedy(r, "replica"));
            cfg.algorithms.push_back(std::move(s));
        }
    }
    else
    {
        cfg.algorithms.push_back({AlgorithmId::Algo2, "", {}, {}});
    }

    if (doc.contains("sweep"))
    {
        const auto& s = doc.at("sweep");
        allow_keys(s, "sweep", {"axis", "values", "conditions", "d_total"});
        const auto axis = s.at("axis").get<std::string>();
        bool found = false;
        for (auto a : {SweepAxis::SnrDb, SweepAxis::DistanceSr, SweepAxis::Elements, SweepAxis::Levels})
            if (axis == axis_name(a))
            {
                spec.axis = a;
                found = true;
            }
        if (!found) throw std::invalid_argument("sweep: unknown axis '" + axis + "'");
        spec.values = s.at("values").get<std::vector<double>>();
        read(s, "d_total", spec.d_total);
        if (s.contains("conditions"))
            for (const auto& c : s.at("conditions"))
            {
                const auto name = c.get<std::string>();
                if (name == "los") spec.conditions.push_back(LinkCondition::Los);
                else if (name == "nlos") spec.conditions.push_back(LinkCondition::Nlos);
                else throw std::invalid_argument("sweep: unknown condition '" + name + "'");
            }
    }
    else
    {
        spec.axis = SweepAxis::SnrDb;
        spec.values = {cfg.snr_db};
    }

    // P is derived per sweep point from the SNR; give validation a placeholder.
    cfg.ofdm.P = 1.0;
    validate_scenario(cfg);
    return spec;
}

inline SweepSpec load_scenario_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scenario file " + path);
    nlohmann::json doc;
    try
    {
        in >> doc;
    }
    catch (const nlohmann::json::exception& e)
    {
        throw std::invalid_argument(path + ": " + e.what());
    }
    try
    {
        return parse_scenario(doc);
    }
    catch (const nlohmann::json::exception& e)
    {
        throw std::invalid_argument(path + ": " + e.what());
    }
}

} // namespace rss
