#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "floquet.hpp"
#include "spectrum.hpp"

namespace qgs {

enum class Parity { Even, Odd };

inline Parity parity_of(int j) { return j % 2 == 0 ? Parity::Even : Parity::Odd; }

// Vertex:    Psi_e(t) = a_e sin(z(1-t)) + b_e sin(zt)
// Dirichlet: Psi_e(t) = a_e sqrt2 sin(zt), z = pi j
// Cosine:    Psi_e(t) = a_e cos(zt), z = pi j (extra modes at theta = 0 only)
enum class WaveKind { Vertex, Dirichlet, Cosine };

struct EdgeWaveFunction {
    WaveKind kind = WaveKind::Vertex;
    double z = 0.0;
    int n = 0;
    int j = 0;
    std::vector<cplx> a;
    std::vector<cplx> b;
    QuasiMomentum theta;

    int num_edges() const { return static_cast<int>(a.size()); }
};

inline EdgeWaveFunction scaled(EdgeWaveFunction wf, cplx c)
{
    for (auto& x : wf.a) x *= c;
    for (auto& x : wf.b) x *= c;
    return wf;
}

inline cplx evaluate(const EdgeWaveFunction& wf, int e, double t)
{
    if (e < 0 || e >= wf.num_edges()) throw Error(ErrorKind::UnknownEdge, "edge id " + std::to_string(e));
    if (t < 0.0 || t > 1.0) throw Error(ErrorKind::OutOfRange, "edge coordinate outside [0, 1]");
    switch (wf.kind) {
    case WaveKind::Vertex: return wf.a[e] * std::sin(wf.z * (1.0 - t)) + wf.b[e] * std::sin(wf.z * t);
    case WaveKind::Dirichlet: return wf.a[e] * std::sqrt(2.0) * std::sin(wf.z * t);
    case WaveKind::Cosine: return wf.a[e] * std::cos(wf.z * t);
    }
    return 0.0;
}

inline cplx derivative(const EdgeWaveFunction& wf, int e, double t)
{
    if (e < 0 || e >= wf.num_edges()) throw Error(ErrorKind::UnknownEdge, "edge id " + std::to_string(e));
    const double z = wf.z;
    switch (wf.kind) {
    case WaveKind::Vertex: return z * (-wf.a[e] * std::cos(z * (1.0 - t)) + wf.b[e] * std::cos(z * t));
    case WaveKind::Dirichlet: return wf.a[e] * std::sqrt(2.0) * z * std::cos(z * t);
    case WaveKind::Cosine: return -wf.a[e] * z * std::sin(z * t);
    }
    return 0.0;
}

// ---------------------------------------------------------------- Dirichlet family

struct DirichletSystem {
    Parity parity = Parity::Even;
    Eigen::MatrixXcd matrix;   // vertices x edges
    QuasiMomentum theta;
};

namespace detail {

inline Eigen::MatrixXcd dirichlet_matrix(const FundamentalGraph& g, Parity p, const QuasiMomentum& theta)
{
    Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(g.num_vertices(), g.num_edges());
    const double sign = p == Parity::Even ? -1.0 : 1.0;   // (-1)^{j+1}
    for (const auto& e : g.edges()) {
        d(e.tail, e.id) += 1.0;
        d(e.head, e.id) += sign * std::polar(1.0, -index_dot(e.index, theta));
    }
    return d;
}

struct NullSpace {
    int rank = 0;
    Eigen::MatrixXcd basis;   // orthonormal columns
};

// Entries are unit scale, so the threshold is relative to max(top singular value, 1); a matrix
// that is zero up to rounding has rank 0.
inline NullSpace null_space(const Eigen::MatrixXcd& m, double rel = 1e-10)
{
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    const double floor = rel * std::max(s.size() > 0 ? s(0) : 0.0, 1.0);
    int rank = 0;
    for (int i = 0; i < s.size(); ++i)
        if (s(i) > floor) ++rank;
    NullSpace ns;
    ns.rank = rank;
    ns.basis = svd.matrixV().rightCols(m.cols() - rank);
    return ns;
}

inline void check_theta(const QuasiMomentum& theta)
{
    if (theta_norm(theta) <= 1e-8) throw Error(ErrorKind::ThetaZero, "quasimomentum too close to 0");
}

inline void check_dim(const FundamentalGraph& g, const QuasiMomentum& theta)
{
    if (static_cast<int>(theta.size()) != g.dim()) throw Error(ErrorKind::DimensionMismatch, "quasimomentum dimension");
}

} // namespace detail

inline DirichletSystem dirichlet_system(const FundamentalGraph& g, Parity p, const QuasiMomentum& theta)
{
    detail::check_dim(g, theta);
    detail::check_theta(theta);
    return {p, detail::dirichlet_matrix(g, p, theta), theta};
}

// Columns are an orthonormal basis of the solutions X; there are nu* - nu of them.
inline Eigen::MatrixXcd dirichlet_basis(const FundamentalGraph& g, Parity p, const QuasiMomentum& theta)
{
    DirichletSystem sys = dirichlet_system(g, p, theta);
    detail::NullSpace ns = detail::null_space(sys.matrix);
    if (ns.rank != g.num_vertices())
        throw Error(ErrorKind::RankAnomaly, "Dirichlet system has rank " + std::to_string(ns.rank) + ", expected " +
                                                std::to_string(g.num_vertices()));
    return ns.basis;
}

inline EdgeWaveFunction dirichlet_eigenfunction(const Eigen::VectorXcd& X, int j, const QuasiMomentum& theta = {})
{
    if (j < 1) throw Error(ErrorKind::OutOfRange, "Dirichlet level must be at least 1");
    EdgeWaveFunction wf;
    wf.kind = WaveKind::Dirichlet;
    wf.z = kPi * j;
    wf.j = j;
    wf.a.assign(X.data(), X.data() + X.size());
    wf.b.assign(X.size(), 0.0);
    wf.theta = theta;
    return wf;
}

struct DirichletZeroBasis {
    Parity parity = Parity::Even;
    int rank = 0;
    Eigen::MatrixXcd sine_modes;       // columns X, used as a_e sqrt2 sin(pi j t)
    std::optional<Eigen::VectorXcd> cos_mode;   // a_e for a_e cos(pi j t)
};

// At theta = 0 the system loses rank: even parity always, odd parity on bipartite graphs.
// The lost rank reappears as a cosine mode.
inline DirichletZeroBasis dirichlet_basis_at_zero(const FundamentalGraph& g, Parity p)
{
    DirichletZeroBasis out;
    out.parity = p;
    detail::NullSpace ns = detail::null_space(detail::dirichlet_matrix(g, p, QuasiMomentum(g.dim(), 0.0)));
    out.rank = ns.rank;
    out.sine_modes = ns.basis;
    const double amp = std::sqrt(2.0 / g.num_edges());
    if (p == Parity::Even) {
        out.cos_mode = Eigen::VectorXcd::Constant(g.num_edges(), amp);
    } else if (auto bp = is_bipartite(g)) {
        Eigen::VectorXcd c(g.num_edges());
        for (const auto& e : g.edges()) c(e.id) = bp->color[e.tail] == 0 ? amp : -amp;
        out.cos_mode = c;
    }
    return out;
}

inline EdgeWaveFunction cosine_eigenfunction(const Eigen::VectorXcd& c, int j, int dim)
{
    if (j < 1) throw Error(ErrorKind::OutOfRange, "level must be at least 1");
    EdgeWaveFunction wf;
    wf.kind = WaveKind::Cosine;
    wf.z = kPi * j;
    wf.j = j;
    wf.a.assign(c.data(), c.data() + c.size());
    wf.b.assign(c.size(), 0.0);
    wf.theta = QuasiMomentum(dim, 0.0);
    return wf;
}

// ---------------------------------------------------------------- vertex family

inline void check_vertex_fiber(const EigenSystem& es, int n)
{
    if (n < 1 || n > es.size()) throw Error(ErrorKind::OutOfRange, "band index out of range");
    double lam = es.lambda(n);
    if (std::abs(lam) > 1.0 - 1e-8) throw Error(ErrorKind::SinSingular, "eigenvalue within 1e-8 of +-1");
    if ((n > 1 && lam - es.lambda(n - 1) < 1e-8) || (n < es.size() && es.lambda(n + 1) - lam < 1e-8))
        throw Error(ErrorKind::DegenerateFiber, "eigenvalue " + std::to_string(n) + " is degenerate");
}

// The prefactor uses sin z_n rather than sin z_{n,j}; for odd j this flips the sign of all
// vertex values, which is still an eigenfunction of the same norm.
inline EdgeWaveFunction vertex_eigenfunction(const FundamentalGraph& g, const QuasiMomentum& theta, int n, int j,
                                             const EigenSystem& es)
{
    detail::check_dim(g, theta);
    detail::check_theta(theta);
    if (j < 0) throw Error(ErrorKind::OutOfRange, "ladder level must be nonnegative");
    check_vertex_fiber(es, n);
    double zn = z_map(es.lambda(n)).z;
    double s = std::sin(zn);
    Eigen::VectorXcd psi = es.psi(n);
    EdgeWaveFunction wf;
    wf.kind = WaveKind::Vertex;
    wf.z = ladder(zn, j);
    wf.n = n;
    wf.j = j;
    wf.theta = theta;
    wf.a.resize(g.num_edges());
    wf.b.resize(g.num_edges());
    for (const auto& e : g.edges()) {
        wf.a[e.id] = std::sqrt(2.0) * psi(e.tail) / (std::sqrt(static_cast<double>(g.degree(e.tail))) * s);
        wf.b[e.id] = std::sqrt(2.0) * psi(e.head) * std::polar(1.0, index_dot(e.index, theta)) /
                     (std::sqrt(static_cast<double>(g.degree(e.head))) * s);
    }
    return wf;
}

inline EdgeWaveFunction vertex_eigenfunction(const FundamentalGraph& g, const QuasiMomentum& theta, int n, int j)
{
    detail::check_dim(g, theta);
    return vertex_eigenfunction(g, theta, n, j, eigensystem(g, theta));
}

// Values seen at each vertex, one per incidence, in edge-id order (tail end before head end).
inline std::vector<std::vector<cplx>> vertex_values(const FundamentalGraph& g, const EdgeWaveFunction& wf)
{
    std::vector<std::vector<cplx>> vals(g.num_vertices());
    for (const auto& e : g.edges()) {
        vals[e.tail].push_back(evaluate(wf, e.id, 0.0));
        vals[e.head].push_back(std::polar(1.0, -index_dot(e.index, wf.theta)) * evaluate(wf, e.id, 1.0));
    }
    return vals;
}

inline double vertex_condition_residual(const FundamentalGraph& g, const QuasiMomentum& theta, const EdgeWaveFunction& wf)
{
    std::vector<std::vector<cplx>> vals(g.num_vertices());
    std::vector<cplx> flux(g.num_vertices(), 0.0);
    for (const auto& e : g.edges()) {
        cplx back = std::polar(1.0, -index_dot(e.index, theta));
        vals[e.tail].push_back(evaluate(wf, e.id, 0.0));
        vals[e.head].push_back(back * evaluate(wf, e.id, 1.0));
        flux[e.tail] += derivative(wf, e.id, 0.0);
        flux[e.head] -= back * derivative(wf, e.id, 1.0);
    }
    double worst = 0.0;
    for (int v = 0; v < g.num_vertices(); ++v) {
        double mismatch = 0.0;
        for (const auto& x : vals[v]) mismatch = std::max(mismatch, std::abs(x - vals[v].front()));
        worst = std::max(worst, mismatch + std::abs(flux[v]));
    }
    return worst;
}

struct NormCheck {
    double closed_form = 0.0;   // squared L2 norm
    double quadrature = 0.0;
};

inline NormCheck norm_check(const FundamentalGraph& g, const QuasiMomentum& theta, const EdgeWaveFunction& wf)
{
    (void)theta;
    NormCheck nc;
    const double z = wf.z;
    for (int e = 0; e < g.num_edges(); ++e) {
        const cplx A = wf.a[e], B = wf.b[e];
        switch (wf.kind) {
        case WaveKind::Vertex:
            nc.closed_form += (std::norm(A) + std::norm(B)) * (0.5 - std::sin(2.0 * z) / (4.0 * z)) +
                              2.0 * std::real(A * std::conj(B)) * (std::sin(z) - z * std::cos(z)) / (2.0 * z);
            break;
        case WaveKind::Dirichlet: nc.closed_form += std::norm(A); break;
        case WaveKind::Cosine: nc.closed_form += std::norm(A) * (0.5 + std::sin(2.0 * z) / (4.0 * z)); break;
        }
    }
    const int m = 256 * std::max(1, static_cast<int>(std::ceil(z / kPi)));
    const double h = 1.0 / m;
    for (int e = 0; e < g.num_edges(); ++e) {
        double s = 0.0;
        for (int i = 0; i <= m; ++i) {
            double w = (i == 0 || i == m) ? 1.0 : (i % 2 ? 4.0 : 2.0);
            s += w * std::norm(evaluate(wf, e, i * h));
        }
        nc.quadrature += s * h / 3.0;
    }
    return nc;
}

// psi(v) = sqrt(kappa_v) e^{-i delta <tau, theta>} Psi_e(delta), read from incidence `slot` at every vertex.
inline Eigen::VectorXcd project_to_discrete(const FundamentalGraph& g, const EdgeWaveFunction& wf, int slot = 0)
{
    auto vals = vertex_values(g, wf);
    Eigen::VectorXcd psi(g.num_vertices());
    for (int v = 0; v < g.num_vertices(); ++v) {
        const auto& list = vals[v];
        psi(v) = std::sqrt(static_cast<double>(g.degree(v))) * list[std::min<std::size_t>(slot, list.size() - 1)];
    }
    return psi;
}

inline cplx bloch_extend(cplx value, const QuasiMomentum& theta, const LatticeVector& m)
{
    if (m.size() != theta.size()) throw Error(ErrorKind::DimensionMismatch, "cell vector dimension");
    return value * std::polar(1.0, index_dot(m, theta));
}

inline Eigen::VectorXcd bloch_extend(const Eigen::VectorXcd& values, const QuasiMomentum& theta, const LatticeVector& m)
{
    if (m.size() != theta.size()) throw Error(ErrorKind::DimensionMismatch, "cell vector dimension");
    return values * std::polar(1.0, index_dot(m, theta));
}

// ---------------------------------------------------------------- sup norms and bounds

// max over [0,1] of |a sin(z(1-t)) + b sin(zt)|, written as sqrt(C0 + amp cos(2zt - phi)).
inline double edge_sup(cplx A, cplx B, double z)
{
    cplx P = A * std::sin(z), R = B - A * std::cos(z);
    double c0 = 0.5 * (std::norm(P) + std::norm(R));
    double ca = 0.5 * (std::norm(P) - std::norm(R));
    double cb = std::real(P * std::conj(R));
    double amp = std::hypot(ca, cb);
    double phi = std::atan2(cb, ca);
    // maximisers t = (phi + 2 pi k) / (2z)
    double kmin = std::ceil(-phi / (2.0 * kPi));
    if ((phi + 2.0 * kPi * kmin) / (2.0 * z) <= 1.0) return std::sqrt(std::max(0.0, c0 + amp));
    double f0 = std::norm(P), f1 = std::norm(A * std::sin(0.0) + B * std::sin(z));
    return std::sqrt(std::max(f0, f1));
}

inline double sup_norm(const EdgeWaveFunction& wf)
{
    double best = 0.0;
    for (int e = 0; e < wf.num_edges(); ++e) {
        switch (wf.kind) {
        case WaveKind::Vertex: best = std::max(best, edge_sup(wf.a[e], wf.b[e], wf.z)); break;
        case WaveKind::Dirichlet: best = std::max(best, std::sqrt(2.0) * std::abs(wf.a[e])); break;
        case WaveKind::Cosine: best = std::max(best, std::abs(wf.a[e])); break;
        }
    }
    return best;
}

enum class BoundId {
    LowestBandLowerHalf,    // n = 1, z1 <= pi/2
    LowestBandUpperHalf,    // n = 1, z1 > pi/2
    InteriorBand,           // 1 < n < nu
    TopBandNonBipartite,
    TopBandBipartite,
    DirichletMode,
};

inline const char* bound_name(BoundId id)
{
    switch (id) {
    case BoundId::LowestBandLowerHalf: return "lowest_band_lower_half";
    case BoundId::LowestBandUpperHalf: return "lowest_band_upper_half";
    case BoundId::InteriorBand: return "interior_band";
    case BoundId::TopBandNonBipartite: return "top_band_non_bipartite";
    case BoundId::TopBandBipartite: return "top_band_bipartite";
    case BoundId::DirichletMode: return "dirichlet_mode";
    }
    return "unknown";
}

struct BoundReport {
    double measured = 0.0;
    double bound = 0.0;
    BoundId id = BoundId::DirichletMode;
    bool satisfied = false;
};

struct BoundContext {
    GraphConstants constants;
    std::vector<Interval> band_edges;
    bool bipartite = false;

    // inf over theta of sin z_n, from the band edges
    double sin_inf(int n) const
    {
        const auto& b = band_edges[n - 1];
        return std::sqrt(std::max(0.0, 1.0 - std::max(b.lo * b.lo, b.hi * b.hi)));
    }
};

inline BoundContext make_bound_context(const FundamentalGraph& g, int N = 64)
{
    BoundContext c;
    c.constants = graph_constants(g, N);
    c.band_edges = refined_surface(g, N).band_edges;
    c.bipartite = is_bipartite(g).has_value();
    return c;
}

inline double low_band_bound(const BoundContext& ctx, const QuasiMomentum& theta, double sin_z1)
{
    const auto& c = ctx.constants;
    double lam_term = std::isinf(c.Lambda) ? 0.0 : kPi / c.Lambda;
    return std::sqrt(2.0) * (2.0 + lam_term + c.M * theta_norm(theta) / sin_z1);
}

inline BoundReport bound_check(const FundamentalGraph& g, const QuasiMomentum& theta, int n, int j,
                               const BoundContext& ctx)
{
    EigenSystem es = eigensystem(g, theta);
    EdgeWaveFunction wf = vertex_eigenfunction(g, theta, n, j, es);
    const int nu = g.num_vertices();
    const double inf = std::numeric_limits<double>::infinity();
    double z1 = z_map(es.lambda(1)).z;
    BoundReport r;
    r.measured = sup_norm(wf);
    auto ratio_bound = [&](double s) { return s > 1e-12 ? 2.0 * std::sqrt(2.0) / s : inf; };
    if (n == 1) {
        if (z1 <= kPi / 2) {
            r.id = BoundId::LowestBandLowerHalf;
            r.bound = low_band_bound(ctx, theta, std::sin(z1));
        } else {
            r.id = BoundId::LowestBandUpperHalf;
            r.bound = ratio_bound(std::sin(z_map(ctx.band_edges[0].hi).z));
        }
    } else if (n < nu) {
        r.id = BoundId::InteriorBand;
        double alpha = inf;
        for (int m = 2; m < nu; ++m) alpha = std::min(alpha, ctx.sin_inf(m));
        r.bound = ratio_bound(alpha);
    } else if (!ctx.bipartite) {
        r.id = BoundId::TopBandNonBipartite;
        r.bound = ratio_bound(ctx.sin_inf(nu));
    } else {
        r.id = BoundId::TopBandBipartite;
        r.bound = low_band_bound(ctx, theta, std::sin(z1));
    }
    r.satisfied = r.measured <= r.bound + 1e-9;
    return r;
}

inline BoundReport bound_check(const FundamentalGraph& g, const QuasiMomentum& theta, int n, int j)
{
    return bound_check(g, theta, n, j, make_bound_context(g));
}

inline BoundReport dirichlet_bound_check(const EdgeWaveFunction& wf)
{
    BoundReport r;
    r.id = BoundId::DirichletMode;
    r.measured = sup_norm(wf);
    r.bound = std::sqrt(2.0);
    r.satisfied = r.measured <= r.bound + 1e-9;
    return r;
}

struct CGammaEstimate {
    double value = 0.0;
    int grid = 0;
    int jmax = 0;
    long skipped = 0;   // nodes at theta = 0, degenerate, or with sin z_n ~ 0
};

// Measured sup of vertex-family sup norms over an N^d grid and j <= jmax; at least sqrt2 from the
// Dirichlet family.
inline CGammaEstimate estimate_c_gamma(const FundamentalGraph& g, int N = 32, int jmax = 6)
{
    CGammaEstimate out;
    out.grid = N;
    out.jmax = jmax;
    long total = grid_size(N, g.dim());
    std::vector<double> best(static_cast<std::size_t>(total), 0.0);
    std::vector<long> skip(static_cast<std::size_t>(total), 0);
    parallel_for(static_cast<int>(total), [&](int node) {
        QuasiMomentum t = grid_theta(N, g.dim(), node);
        if (theta_norm(t) <= 1e-8) {
            skip[node] = 1;
            return;
        }
        EigenSystem es = eigensystem(g, t);
        for (int n = 1; n <= es.size(); ++n) {
            try {
                check_vertex_fiber(es, n);
            } catch (const Error&) {
                skip[node] = 1;
                continue;
            }
            EdgeWaveFunction wf = vertex_eigenfunction(g, t, n, 0, es);
            for (int j = 0; j <= jmax; ++j) {
                wf.z = ladder(z_map(es.lambda(n)).z, j);
                best[node] = std::max(best[node], sup_norm(wf));
            }
        }
    });
    out.value = std::sqrt(2.0);
    for (long i = 0; i < total; ++i) {
        out.value = std::max(out.value, best[i]);
        out.skipped += skip[i];
    }
    return out;
}

} // namespace qgs
