#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "scattering.hpp"
#include "spectrum.hpp"

namespace qgs {

using json = nlohmann::json;

// 12 significant digits, shortest form.
inline std::string fmt12(double x)
{
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

inline json jnum(double x)
{
    if (!std::isfinite(x)) return fmt12(x);
    double r = std::strtod(fmt12(x).c_str(), nullptr);
    return r == 0.0 ? 0.0 : r;   // no negative zero
}

inline json jcplx(cplx z) { return json::array({jnum(z.real()), jnum(z.imag())}); }

inline json spectrum_json(const MetricSpectrum& ms)
{
    json j;
    j["graph"] = ms.graph;
    j["jmax"] = ms.jmax;
    j["truncated"] = ms.truncated;
    j["cutoff"] = jnum(ms.cutoff);
    j["ac"] = json::array();
    for (const auto& iv : ms.merged_ac) j["ac"].push_back({jnum(iv.lo), jnum(iv.hi)});
    j["flat"] = json::array();
    for (const auto& f : ms.flat)
        j["flat"].push_back({{"E", jnum(f.E)}, {"multiplicity", f.multiplicity}, {"kind", f.kind == FlatKind::Dirichlet ? "dirichlet" : "mv"}});
    j["gaps"] = json::array();
    for (const auto& iv : ms.gaps) j["gaps"].push_back({jnum(iv.lo), jnum(iv.hi)});
    return j;
}

inline json determinant_json(const DeterminantResult& r)
{
    json j;
    j["k"] = jcplx(r.k);
    j["D"] = jcplx(r.D);
    j["logD"] = jcplx(r.logD);
    j["logD_series"] = jcplx(r.log_series);
    j["N"] = r.series_terms;
    j["series_applicable"] = r.series_applicable;
    j["remainder"] = jnum(r.remainder_bound);
    j["trace_norm"] = jnum(r.trace_norm);
    j["paper_bound"] = jnum(r.paper_bound);
    j["trace"] = jcplx(r.trace);
    j["jmax"] = r.jmax;
    j["grid"] = r.grid;
    j["tail_bound"] = jnum(r.tail_bound);
    j["c_gamma"] = jnum(r.c_gamma);
    j["degenerate_nodes"] = r.degenerate_nodes;
    return j;
}

inline Potential potential_from_json(const FundamentalGraph& g, const json& doc)
{
    if (!doc.is_object() || !doc.contains("edges")) throw Error(ErrorKind::EmptyPotential, "potential has no 'edges' array");
    const json& arr = doc.at("edges");
    if (!arr.is_array()) throw Error(ErrorKind::InvalidPotential, "'edges' must be an array");
    std::vector<PotentialEntry> entries;
    for (const auto& item : arr) {
        if (!item.is_object() || !item.contains("edge") || !item.contains("cell") || !item.contains("samples"))
            throw Error(ErrorKind::InvalidPotential, "each entry needs 'edge', 'cell' and 'samples'");
        PotentialEntry e;
        if (!item["edge"].is_string()) throw Error(ErrorKind::InvalidPotential, "'edge' must be an edge name");
        const std::string name = item["edge"].get<std::string>();
        e.edge = g.edge_id(name);
        if (e.edge < 0) throw Error(ErrorKind::UnknownEdge, "unknown edge '" + name + "'");
        for (const auto& c : item["cell"]) {
            if (!c.is_number_integer()) throw Error(ErrorKind::InvalidPotential, "cell entries must be integers");
            e.cell.push_back(c.get<std::int64_t>());
        }
        for (const auto& s : item["samples"]) {
            if (!s.is_number()) throw Error(ErrorKind::InvalidPotential, "samples must be numbers");
            e.samples.push_back(s.get<double>());
        }
        entries.push_back(std::move(e));
    }
    return make_potential(g, std::move(entries));
}

inline Potential load_potential(const FundamentalGraph& g, const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::InvalidPotential, "cannot open " + path);
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw Error(ErrorKind::InvalidPotential, "malformed JSON in " + path);
    return potential_from_json(g, doc);
}

inline std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::InvalidGraph, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace qgs
