#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "floquet.hpp"

namespace qgs {

struct ZValue {
    double z = 0.0;
    int n = 0;
    double lambda = 0.0;
};

inline ZValue z_map(double lambda, int n = 0)
{
    if (lambda < -1.0 - 1e-12 || lambda > 1.0 + 1e-12)
        throw Error(ErrorKind::OutOfRange, "eigenvalue outside [-1, 1]");
    return {std::acos(-std::clamp(lambda, -1.0, 1.0)), n, lambda};
}

inline double ladder(double z, int j)
{
    return j % 2 == 0 ? z + kPi * j : (kPi - z) + kPi * j;
}

inline double ladder(const ZValue& z, int j) { return ladder(z.z, j); }

struct MetricBand {
    int n = 0;
    int j = 0;
    double lo = 0.0;
    double hi = 0.0;
};

// Odd levels run the ladder backwards, so the discrete endpoints swap.
inline MetricBand metric_band(int n, int j, const Interval& lam)
{
    double zm = z_map(lam.lo).z, zp = z_map(lam.hi).z;
    MetricBand b{n, j, 0.0, 0.0};
    if (j % 2 == 0) {
        b.lo = std::pow(zm + kPi * j, 2);
        b.hi = std::pow(zp + kPi * j, 2);
    } else {
        b.lo = std::pow(kPi - zp + kPi * j, 2);
        b.hi = std::pow(kPi - zm + kPi * j, 2);
    }
    return b;
}

struct EnergyInterval {
    double lo = 0.0;
    double hi = 0.0;
};

inline std::vector<EnergyInterval> merge_intervals(std::vector<EnergyInterval> v, double tol = 1e-9)
{
    std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.lo < b.lo || (a.lo == b.lo && a.hi < b.hi); });
    std::vector<EnergyInterval> out;
    for (const auto& x : v) {
        if (!out.empty() && x.lo <= out.back().hi + tol) out.back().hi = std::max(out.back().hi, x.hi);
        else out.push_back(x);
    }
    return out;
}

enum class FlatKind { Dirichlet, MV };

struct FlatLevel {
    double E = 0.0;
    int multiplicity = 0;
    FlatKind kind = FlatKind::Dirichlet;
};

struct MetricSpectrum {
    std::string graph;
    int jmax = 0;
    double cutoff = 0.0;   // (pi (jmax + 1))^2; everything above is not reported
    bool truncated = true;
    std::vector<MetricBand> ac_bands;
    std::vector<EnergyInterval> merged_ac;
    std::vector<FlatLevel> flat;   // sorted by E
    std::vector<EnergyInterval> gaps;
};

inline MetricSpectrum metric_spectrum(const FundamentalGraph& g, const BandSurface& s, int jmax)
{
    if (jmax < 1) throw Error(ErrorKind::OutOfRange, "jmax must be at least 1");
    MetricSpectrum ms;
    ms.graph = g.name();
    ms.jmax = jmax;
    ms.cutoff = std::pow(kPi * (jmax + 1), 2);

    std::vector<EnergyInterval> all;
    for (int n = 1; n <= s.nu; ++n)
        for (int j = 0; j <= jmax; ++j) {
            MetricBand b = metric_band(n, j, s.band_edges[n - 1]);
            ms.ac_bands.push_back(b);
            all.push_back({b.lo, b.hi});
        }
    ms.merged_ac = merge_intervals(all);

    for (const auto& fb : detect_flat_bands(s)) {
        double z = z_map(fb.value).z;
        for (int j = 0; j <= jmax; ++j) ms.flat.push_back({std::pow(ladder(z, j), 2), 1, FlatKind::MV});
    }
    int mult = g.num_edges() - g.num_vertices();
    if (mult > 0)
        for (int j = 1; j <= jmax; ++j) ms.flat.push_back({std::pow(kPi * j, 2), mult, FlatKind::Dirichlet});
    std::stable_sort(ms.flat.begin(), ms.flat.end(), [](const auto& a, const auto& b) { return a.E < b.E; });

    double cursor = 0.0;
    for (const auto& iv : ms.merged_ac) {
        if (iv.lo > cursor + 1e-9) ms.gaps.push_back({cursor, std::min(iv.lo, ms.cutoff)});
        cursor = std::max(cursor, iv.hi);
        if (cursor >= ms.cutoff) break;
    }
    if (cursor < ms.cutoff - 1e-9) ms.gaps.push_back({cursor, ms.cutoff});
    return ms;
}

inline MetricSpectrum metric_spectrum(const FundamentalGraph& g, int jmax, int N = 64)
{
    return metric_spectrum(g, refined_surface(g, N), jmax);
}

inline bool in_merged_ac(const MetricSpectrum& ms, double E)
{
    for (const auto& iv : ms.merged_ac)
        if (E >= iv.lo && E <= iv.hi) return true;
    return false;
}

inline bool is_dirichlet_energy(double E, double tol = 1e-9)
{
    if (E < 0.0) return false;
    double j = std::round(std::sqrt(E) / kPi);
    return j >= 1.0 && std::abs(E - std::pow(kPi * j, 2)) <= tol;
}

// Membership of -cos sqrt(E) in the discrete band spectrum.
inline bool bgp_check(const FundamentalGraph& g, double E, const BandSurface& s)
{
    (void)g;
    if (E < 0.0) throw Error(ErrorKind::OutOfRange, "energy must be nonnegative");
    if (is_dirichlet_energy(E)) throw Error(ErrorKind::DirichletPoint, "energy lies on the Dirichlet spectrum");
    double lam = -std::cos(std::sqrt(E));
    for (const auto& b : s.band_edges)
        if (lam >= b.lo && lam <= b.hi) return true;
    return false;
}

} // namespace qgs
