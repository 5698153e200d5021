#pragma once

// CSV and SVG output for ResultRow lists. Numbers are written as shortest
// round-trip decimals, so parsing an emitted file gives back the same doubles.

#include "rss/harness.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

namespace rss {

inline const char* csv_header = "axis,value,algorithm,condition,rate_bps,stderr_bps,trials,seconds_per_trial";

inline std::string format_double(double v)
{
    std::array<char, 64> buf{};
    const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
    return std::string(buf.data(), end);
}

inline double parse_double(const std::string& s)
{
    double v = 0.0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || end != s.data() + s.size()) throw std::invalid_argument("parse_double: bad number '" + s + "'");
    return v;
}

/// Text of the CSV. A trailing d_rd column appears when any row carries one.
inline std::string format_csv(const std::vector<ResultRow>& rows)
{
    const bool with_drd = std::any_of(rows.begin(), rows.end(), [](const ResultRow& r) { return r.d_rd.has_value(); });
    std::string out = csv_header;
    if (with_drd) out += ",d_rd";
    out += '\n';
    for (const auto& r : rows)
    {
        if (r.algorithm.find_first_of(",\n\"") != std::string::npos || r.condition.find_first_of(",\n\"") != std::string::npos)
            throw std::invalid_argument("format_csv: algorithm and condition names must not contain ',', '\"' or newlines");
        out += r.axis + ',' + format_double(r.value) + ',' + r.algorithm + ',' + r.condition + ',' + format_double(r.rate_bps) + ',' +
               format_double(r.stderr_bps) + ',' + std::to_string(r.trials) + ',' + format_double(r.seconds_per_trial);
        if (with_drd) out += ',' + (r.d_rd ? format_double(*r.d_rd) : std::string());
        out += '\n';
    }
    return out;
}

inline void emit_csv(const std::vector<ResultRow>& rows, const std::string& path)
{
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("emit_csv: cannot open " + path);
    f << format_csv(rows);
    if (!f) throw std::runtime_error("emit_csv: write failed for " + path);
}

inline std::vector<ResultRow> parse_csv_text(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("parse_csv: missing header");
    bool with_drd = false;
    if (line == std::string(csv_header) + ",d_rd")
        with_drd = true;
    else if (line != csv_header)
        throw std::invalid_argument("parse_csv: unexpected header '" + line + "'");

    std::vector<ResultRow> rows;
    while (std::getline(in, line))
    {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::size_t pos = 0;
        while (true)
        {
            const auto c = line.find(',', pos);
            f.push_back(line.substr(pos, c == std::string::npos ? std::string::npos : c - pos));
            if (c == std::string::npos) break;
            pos = c + 1;
        }
        if (f.size() != (with_drd ? 9u : 8u)) throw std::invalid_argument("parse_csv: wrong field count in '" + line + "'");
        ResultRow r;
        r.axis = f[0];
        r.value = parse_double(f[1]);
        r.algorithm = f[2];
        r.condition = f[3];
        r.rate_bps = parse_double(f[4]);
        r.stderr_bps = parse_double(f[5]);
        r.trials = static_cast<std::size_t>(std::stoull(f[6]));
        r.seconds_per_trial = parse_double(f[7]);
        if (with_drd && !f[8].empty()) r.d_rd = parse_double(f[8]);
        rows.push_back(std::move(r));
    }
    return rows;
}

inline std::vector<ResultRow> parse_csv(const std::string& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("parse_csv: cannot open " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_csv_text(ss.str());
}

struct Curve
{
    std::string algorithm;
    std::string condition;
    std::vector<std::pair<double, double>> points; // (axis value, rate in bps/Hz units of the plot)
};

/// Groups rows into curves in first-appearance order, points sorted by value.
inline std::vector<Curve> group_curves(const std::vector<ResultRow>& rows)
{
    std::vector<Curve> curves;
    for (const auto& r : rows)
    {
        auto it = std::find_if(curves.begin(), curves.end(),
                               [&](const Curve& c) { return c.algorithm == r.algorithm && c.condition == r.condition; });
        if (it == curves.end())
        {
            curves.push_back({r.algorithm, r.condition, {}});
            it = curves.end() - 1;
        }
        it->points.emplace_back(r.value, r.rate_bps);
    }
    for (auto& c : curves) std::stable_sort(c.points.begin(), c.points.end());
    return curves;
}

namespace detail {

inline std::string svg_escape(const std::string& s)
{
    std::string o;
    for (char c : s)
    {
        switch (c)
        {
        case '&': o += "&amp;"; break;
        case '<': o += "&lt;"; break;
        case '>': o += "&gt;"; break;
        case '"': o += "&quot;"; break;
        default: o += c;
        }
    }
    return o;
}

inline std::string fixed(double v, int digits = 2)
{
    std::array<char, 64> buf{};
    const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::fixed, digits);
    if (ec != std::errc{}) return "0";
    return std::string(buf.data(), end);
}

inline std::string tick_label(double v)
{
    if (v == std::round(v) && std::abs(v) < 1e9) return std::to_string(static_cast<long long>(v));
    return fixed(v, 2);
}

} // namespace detail

/// SVG with one polyline per (algorithm, condition). Rates are drawn in Mbit/s.
inline std::string render_svg(const std::vector<ResultRow>& rows, const std::string& title = "")
{
    for (const auto& r : rows)
        if (r.axis != rows.front().axis) throw std::invalid_argument("emit_plot: rows mix axes '" + rows.front().axis + "' and '" + r.axis + "'");

    const double W = 720, H = 480, left = 80, right = 220, top = 40, bottom = 60;
    const double pw = W - left - right, ph = H - top - bottom;
    const auto curves = group_curves(rows);

    double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    if (!rows.empty())
    {
        xmin = xmax = rows.front().value;
        ymax = rows.front().rate_bps / 1e6;
        for (const auto& r : rows)
        {
            xmin = std::min(xmin, r.value);
            xmax = std::max(xmax, r.value);
            ymax = std::max(ymax, r.rate_bps / 1e6);
        }
        ymin = 0.0;
        if (xmax == xmin) xmax = xmin + 1.0;
        if (ymax <= ymin) ymax = ymin + 1.0;
        ymax *= 1.05;
    }
    auto X = [&](double v) { return left + (v - xmin) / (xmax - xmin) * pw; };
    auto Y = [&](double v) { return top + ph - (v - ymin) / (ymax - ymin) * ph; };

    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"};
    using detail::fixed;
    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W << ' ' << H
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!title.empty())
        s << "<text x=\"" << fixed(left + pw / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" << detail::svg_escape(title)
          << "</text>\n";
    s << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";

    // Ticks at the distinct axis values and five rate levels.
    std::vector<double> xs;
    for (const auto& r : rows) xs.push_back(r.value);
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    for (double v : xs)
        s << "<line x1=\"" << fixed(X(v)) << "\" y1=\"" << fixed(top + ph) << "\" x2=\"" << fixed(X(v)) << "\" y2=\"" << fixed(top + ph + 5)
          << "\" stroke=\"black\"/><text x=\"" << fixed(X(v)) << "\" y=\"" << fixed(top + ph + 18) << "\" text-anchor=\"middle\">"
          << detail::tick_label(v) << "</text>\n";
    for (int i = 0; i <= 5; ++i)
    {
        const double v = ymin + (ymax - ymin) * i / 5.0;
        s << "<line x1=\"" << fixed(left - 5) << "\" y1=\"" << fixed(Y(v)) << "\" x2=\"" << left << "\" y2=\"" << fixed(Y(v))
          << "\" stroke=\"black\"/><text x=\"" << fixed(left - 8) << "\" y=\"" << fixed(Y(v) + 4) << "\" text-anchor=\"end\">"
          << fixed(v, 1) << "</text>\n";
    }
    const std::string axis = rows.empty() ? "" : rows.front().axis;
    const std::string xlabel = axis == "snr_db" ? "SNR (dB)" : axis == "d_sr" ? "d_sr (m)" : axis;
    s << "<text x=\"" << fixed(left + pw / 2) << "\" y=\"" << fixed(H - 15) << "\" text-anchor=\"middle\">" << detail::svg_escape(xlabel)
      << "</text>\n";
    s << "<text x=\"20\" y=\"" << fixed(top + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 " << fixed(top + ph / 2)
      << ")\">Achievable rate (Mbit/s)</text>\n";

    for (std::size_t i = 0; i < curves.size(); ++i)
    {
        const auto& c = curves[i];
        const char* color = palette[i % std::size(palette)];
        const bool dashed = c.condition == "NLoS";
        s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\"" << (dashed ? " stroke-dasharray=\"6 3\"" : "")
          << " points=\"";
        for (std::size_t p = 0; p < c.points.size(); ++p)
            s << (p ? " " : "") << fixed(X(c.points[p].first)) << ',' << fixed(Y(c.points[p].second / 1e6));
        s << "\"/>\n";
        const double ly = top + 10 + 18 * static_cast<double>(i);
        s << "<line x1=\"" << fixed(left + pw + 15) << "\" y1=\"" << fixed(ly) << "\" x2=\"" << fixed(left + pw + 40) << "\" y2=\""
          << fixed(ly) << "\" stroke=\"" << color << "\" stroke-width=\"1.5\"" << (dashed ? " stroke-dasharray=\"6 3\"" : "")
          << "/><text x=\"" << fixed(left + pw + 45) << "\" y=\"" << fixed(ly + 4) << "\">" << detail::svg_escape(c.algorithm + " (" + c.condition + ")")
          << "</text>\n";
    }
    s << "</svg>\n";
    return s.str();
}

inline void emit_plot(const std::vector<ResultRow>& rows, const std::string& path, const std::string& title = "")
{
    const auto svg = render_svg(rows, title);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("emit_plot: cannot open " + path);
    f << svg;
    if (!f) throw std::runtime_error("emit_plot: write failed for " + path);
}

} // namespace rss
