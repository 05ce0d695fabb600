#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <vector>

#include <Eigen/Dense>

#include "eigenfunctions.hpp"

namespace qgs {

// ---------------------------------------------------------------- potential

struct PotentialEntry {
    int edge = 0;
    LatticeVector cell;
    std::vector<double> samples;   // uniform grid on [0, 1], piecewise linear in between

    double at(double t) const
    {
        const int m = static_cast<int>(samples.size());
        double x = std::clamp(t, 0.0, 1.0) * (m - 1);
        int i = std::min(static_cast<int>(x), m - 2);
        double f = x - i;
        return (1.0 - f) * samples[i] + f * samples[i + 1];
    }
};

struct Potential {
    std::vector<PotentialEntry> entries;
    double l1 = 0.0;
    double l2 = 0.0;

    bool empty() const { return entries.empty(); }
};

inline Potential make_potential(const FundamentalGraph& g, std::vector<PotentialEntry> entries)
{
    Potential q;
    std::map<std::pair<int, LatticeVector>, int> seen;
    double sq = 0.0;
    for (auto& e : entries) {
        if (e.edge < 0 || e.edge >= g.num_edges()) throw Error(ErrorKind::UnknownEdge, "edge id " + std::to_string(e.edge));
        if (static_cast<int>(e.cell.size()) != g.dim()) throw Error(ErrorKind::DimensionMismatch, "cell vector dimension");
        if (e.samples.size() < 3) throw Error(ErrorKind::InvalidPotential, "at least 3 samples per edge are required");
        for (double s : e.samples)
            if (!std::isfinite(s)) throw Error(ErrorKind::InvalidPotential, "non-finite sample");
        if (!seen.emplace(std::make_pair(e.edge, e.cell), 1).second)
            throw Error(ErrorKind::InvalidPotential, "edge " + g.edge_names()[e.edge] + " listed twice for one cell");
        const double h = 1.0 / (e.samples.size() - 1);
        for (std::size_t i = 0; i + 1 < e.samples.size(); ++i) {
            q.l1 += 0.5 * h * (std::abs(e.samples[i]) + std::abs(e.samples[i + 1]));
            sq += 0.5 * h * (e.samples[i] * e.samples[i] + e.samples[i + 1] * e.samples[i + 1]);
        }
    }
    q.l2 = std::sqrt(sq);
    q.entries = std::move(entries);
    return q;
}

inline Potential scaled(const Potential& q, double s)
{
    Potential out = q;
    for (auto& e : out.entries)
        for (auto& x : e.samples) x *= s;
    out.l1 *= std::abs(s);
    out.l2 *= std::abs(s);
    return out;
}

namespace detail {

// int_{t0}^{t1} q(t) e^{i om t} dt for q linear between (t0, q0) and (t1, q1).
inline cplx linear_exp_integral(double t0, double t1, double q0, double q1, double om)
{
    const double h = t1 - t0;
    if (std::abs(om) * h < 0.5) {
        static const double x[4] = {0.1834346424956498, 0.5255324099163290, 0.7966664774136267, 0.9602898564975363};
        static const double w[4] = {0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};
        cplx s = 0.0;
        for (int i = 0; i < 4; ++i)
            for (double sg : {-1.0, 1.0}) {
                double u = 0.5 * (1.0 + sg * x[i]);
                s += w[i] * (q0 + (q1 - q0) * u) * std::polar(1.0, om * (t0 + h * u));
            }
        return 0.5 * h * s;
    }
    const double qp = (q1 - q0) / h;
    auto F = [&](double t, double q) {
        cplx e = std::polar(1.0, om * t);
        return q * e / cplx(0.0, om) + qp * e / (om * om);
    };
    return F(t1, q1) - F(t0, q0);
}

inline cplx potential_fourier(const PotentialEntry& e, double om)
{
    const int m = static_cast<int>(e.samples.size());
    const double h = 1.0 / (m - 1);
    cplx s = 0.0;
    for (int i = 0; i + 1 < m; ++i) s += linear_exp_integral(i * h, (i + 1) * h, e.samples[i], e.samples[i + 1], om);
    return s;
}

} // namespace detail

// ---------------------------------------------------------------- truncation policy

struct ScatteringOptions {
    int N = 24;                 // torus grid per axis
    int quad = 33;              // Simpson points per supported edge (odd)
    int jmax = 0;               // 0: chosen by the tail policy
    double tail_tol = 1e-4;     // tail bound relative to the full majorant series
    int jmax_cap = 1 << 15;
    double c_gamma = 0.0;       // <= 0: measured on a 32^d grid, j <= 6
};

inline void check_k(cplx k)
{
    if (!(k.imag() >= 1e-6)) throw Error(ErrorKind::InvalidEnergy, "Im k must be at least 1e-6");
}

inline double tail_prefactor(const FundamentalGraph& g, double c_gamma)
{
    return 2.0 * (g.num_vertices() * c_gamma * c_gamma + g.num_edges() - g.num_vertices());
}

// C * sum_{j > J} 1/((pi j)^2 - |k|^2), bounded by the integral from J; needs pi J > |k|.
inline double tail_bound(double prefactor, cplx k, int J)
{
    const double a = std::abs(k), pj = kPi * J;
    if (pj <= a) return std::numeric_limits<double>::infinity();
    if (a < 1e-8) return prefactor / (kPi * kPi * J);
    return prefactor / (2.0 * kPi * a) * std::log((pj + a) / (pj - a));
}

// C * sum_{j >= 0} 1/|(pi j)^2 - k^2|: the scale the tail is measured against.
inline double majorant_sum(double prefactor, cplx k)
{
    const int J = 100000;
    double s = 0.0;
    for (int j = 0; j <= J; ++j) s += 1.0 / std::abs(std::pow(kPi * j, 2) - k * k);
    return prefactor * (s + 1.0 / (kPi * kPi * J));
}

struct Truncation {
    int jmax = 0;
    double tail = 0.0;
    double c_gamma = 0.0;
};

inline Truncation choose_truncation(const FundamentalGraph& g, cplx k, const ScatteringOptions& opt)
{
    Truncation t;
    t.c_gamma = opt.c_gamma > 0.0 ? opt.c_gamma : estimate_c_gamma(g).value;
    const double pre = tail_prefactor(g, t.c_gamma);
    const double target = opt.tail_tol * majorant_sum(pre, k);
    if (opt.jmax > 0) {
        t.jmax = opt.jmax;
        t.tail = tail_bound(pre, k, t.jmax);
        if (!(t.tail <= target))
            throw Error(ErrorKind::TailTooLarge, "tail bound " + std::to_string(t.tail) + " exceeds tolerance at jmax " +
                                                     std::to_string(t.jmax));
        return t;
    }
    int lo = std::max(1, static_cast<int>(std::abs(k) / kPi) + 1), hi = opt.jmax_cap;
    if (!(tail_bound(pre, k, hi) <= target))
        throw Error(ErrorKind::TailTooLarge, "tail tolerance not reachable below jmax " + std::to_string(hi));
    while (lo < hi) {
        int mid = (lo + hi) / 2;
        if (tail_bound(pre, k, mid) <= target) hi = mid;
        else lo = mid + 1;
    }
    t.jmax = lo;
    t.tail = tail_bound(pre, k, lo);
    return t;
}

// ---------------------------------------------------------------- torus quadrature

struct TorusQuadrature {
    int N = 0;
    int dim = 0;
    std::vector<double> weight;   // zero on skipped nodes
    long degenerate = 0;
    long total = 0;
};

// A node is usable when theta != 0, every band is simple with |lambda| < 1 - 1e-8 and both
// Dirichlet systems have full rank.
inline bool fiber_node_valid(const FundamentalGraph& g, const QuasiMomentum& theta)
{
    if (theta_norm(theta) <= 1e-8) return false;
    EigenSystem es = eigensystem(g, theta);
    for (int n = 1; n <= es.size(); ++n) {
        try {
            check_vertex_fiber(es, n);
        } catch (const Error&) {
            return false;
        }
    }
    if (g.num_edges() > g.num_vertices())
        for (Parity p : {Parity::Even, Parity::Odd})
            if (detail::null_space(detail::dirichlet_matrix(g, p, theta)).rank != g.num_vertices()) return false;
    return true;
}

// Periodic trapezoid weights; a skipped node hands its weight to its usable axis neighbours,
// i.e. it takes their mean.
inline TorusQuadrature torus_quadrature(const FundamentalGraph& g, int N)
{
    TorusQuadrature tq;
    tq.N = N;
    tq.dim = g.dim();
    tq.total = grid_size(N, g.dim());
    std::vector<char> ok(static_cast<std::size_t>(tq.total));
    parallel_for(static_cast<int>(tq.total), [&](int node) { ok[node] = fiber_node_valid(g, grid_theta(N, g.dim(), node)); });
    const double base = 1.0 / static_cast<double>(tq.total);
    tq.weight.assign(static_cast<std::size_t>(tq.total), 0.0);
    for (long node = 0; node < tq.total; ++node) {
        if (ok[node]) {
            tq.weight[node] += base;
            continue;
        }
        ++tq.degenerate;
        std::vector<long> nbrs;
        long stride = 1;
        for (int a = g.dim() - 1; a >= 0; --a) {
            long digit = (node / stride) % N;
            for (int s : {-1, 1}) {
                long nd = ((digit + s) % N + N) % N;
                long other = node + (nd - digit) * stride;
                if (ok[other]) nbrs.push_back(other);
            }
            stride *= N;
        }
        for (long o : nbrs) tq.weight[o] += base / static_cast<double>(nbrs.size());
    }
    return tq;
}

// ---------------------------------------------------------------- kernels

struct GraphPoint {
    int edge = 0;
    double t = 0.0;
};

struct KernelPoint {
    int edge = 0;
    LatticeVector cell;
    double t = 0.0;
};

struct FiberKernelValue {
    cplx value = 0.0;
    double tail_bound = 0.0;
};

// Sum over both eigenfunction families of one fiber, levels j <= jmax.
inline FiberKernelValue fiber_resolvent_kernel(const FundamentalGraph& g, const QuasiMomentum& theta, cplx k,
                                               const GraphPoint& x, const GraphPoint& xp, int jmax, const EigenSystem& es,
                                               double c_gamma = 0.0)
{
    check_k(k);
    if (jmax < 1) throw Error(ErrorKind::OutOfRange, "jmax must be at least 1");
    for (const auto* p : {&x, &xp})
        if (p->edge < 0 || p->edge >= g.num_edges()) throw Error(ErrorKind::UnknownEdge, "edge id " + std::to_string(p->edge));
    FiberKernelValue out;
    const cplx k2 = k * k;
    for (int n = 1; n <= es.size(); ++n) {
        EdgeWaveFunction wf = vertex_eigenfunction(g, theta, n, 0, es);
        const double zn = z_map(es.lambda(n)).z;
        for (int j = 0; j <= jmax; ++j) {
            wf.z = ladder(zn, j);
            out.value += evaluate(wf, x.edge, x.t) * std::conj(evaluate(wf, xp.edge, xp.t)) / (wf.z * wf.z - k2);
        }
    }
    if (g.num_edges() > g.num_vertices())
        for (Parity p : {Parity::Even, Parity::Odd}) {
            Eigen::MatrixXcd X = dirichlet_basis(g, p, theta);
            cplx proj = (X.row(x.edge) * X.row(xp.edge).adjoint())(0, 0);
            for (int j = p == Parity::Even ? 2 : 1; j <= jmax; j += 2)
                out.value += proj * 2.0 * std::sin(kPi * j * x.t) * std::sin(kPi * j * xp.t) / (std::pow(kPi * j, 2) - k2);
        }
    if (c_gamma > 0.0) out.tail_bound = tail_bound(tail_prefactor(g, c_gamma), k, jmax);
    return out;
}

struct KernelBlock {
    Eigen::MatrixXcd G;   // G(i, i') = G_k(x_i + m_i, x_i' + m_i')
    int jmax = 0;
    double tail_bound = 0.0;
    double c_gamma = 0.0;
    long degenerate_nodes = 0;
    long grid_nodes = 0;
};

namespace detail {

inline int ladder_columns(int nu, int jmax) { return nu * (jmax + 1); }

} // namespace detail

// Resolvent kernel between all pairs of points by torus quadrature of the fiber expansion.
inline KernelBlock kernel_block(const FundamentalGraph& g, const std::vector<KernelPoint>& pts, cplx k,
                                const ScatteringOptions& opt)
{
    check_k(k);
    for (const auto& p : pts) {
        if (p.edge < 0 || p.edge >= g.num_edges()) throw Error(ErrorKind::UnknownEdge, "edge id " + std::to_string(p.edge));
        if (static_cast<int>(p.cell.size()) != g.dim()) throw Error(ErrorKind::DimensionMismatch, "cell vector dimension");
    }
    Truncation tr = choose_truncation(g, k, opt);
    TorusQuadrature tq = torus_quadrature(g, opt.N);
    KernelBlock kb;
    kb.jmax = tr.jmax;
    kb.tail_bound = tr.tail;
    kb.c_gamma = tr.c_gamma;
    kb.degenerate_nodes = tq.degenerate;
    kb.grid_nodes = tq.total;

    const int P = static_cast<int>(pts.size());
    const int nu = g.num_vertices();
    const int J = tr.jmax;
    const cplx k2 = k * k;
    kb.G = Eigen::MatrixXcd::Zero(P, P);
    if (P == 0) return kb;

    // distinct (edge, cell) groups carry the Dirichlet projector
    std::map<std::pair<int, LatticeVector>, int> group_id;
    std::vector<int> group(P);
    std::vector<const KernelPoint*> rep;
    for (int i = 0; i < P; ++i) {
        auto [it, fresh] = group_id.emplace(std::make_pair(pts[i].edge, pts[i].cell), static_cast<int>(rep.size()));
        if (fresh) rep.push_back(&pts[i]);
        group[i] = it->second;
    }
    const int ng = static_cast<int>(rep.size());
    const bool has_dirichlet = g.num_edges() > nu;
    Eigen::MatrixXcd W[2] = {Eigen::MatrixXcd::Zero(ng, ng), Eigen::MatrixXcd::Zero(ng, ng)};

    Eigen::MatrixXcd V(P, detail::ladder_columns(nu, J));
    Eigen::VectorXcd c(detail::ladder_columns(nu, J));
    for (long node = 0; node < tq.total; ++node) {
        const double w = tq.weight[node];
        if (w == 0.0) continue;
        QuasiMomentum theta = grid_theta(opt.N, g.dim(), node);
        EigenSystem es = eigensystem(g, theta);
        std::vector<cplx> cell_phase(P);
        for (int i = 0; i < P; ++i) cell_phase[i] = std::polar(1.0, index_dot(pts[i].cell, theta));
        for (int n = 1; n <= nu; ++n) {
            EdgeWaveFunction wf = vertex_eigenfunction(g, theta, n, 0, es);
            const double z = z_map(es.lambda(n)).z;
            const int col0 = (n - 1) * (J + 1);
            for (int j = 0; j <= J; ++j) {
                double Z = ladder(z, j);
                c(col0 + j) = w / (Z * Z - k2);
            }
            const cplx eiz = std::polar(1.0, z);
            for (int i = 0; i < P; ++i) {
                const double t = pts[i].t;
                const cplx A = wf.a[pts[i].edge] * cell_phase[i], B = wf.b[pts[i].edge] * cell_phase[i];
                const cplx step = std::polar(1.0, 2.0 * kPi * t);
                cplx even = std::polar(1.0, z * t);             // e^{i Z_j t}, j = 2l
                cplx odd = std::conj(even) * step;              // e^{i Z_j t}, j = 2l + 1
                for (int j = 0; j <= J; ++j) {
                    const cplx& E = j % 2 == 0 ? even : odd;
                    const cplx eZ = j % 2 == 0 ? eiz : std::conj(eiz);
                    V(i, col0 + j) = A * std::imag(eZ * std::conj(E)) + B * std::imag(E);
                    if (j % 2 == 0) even *= step;
                    else odd *= step;
                }
            }
        }
        kb.G.noalias() += (V * c.asDiagonal()) * V.adjoint();

        if (has_dirichlet)
            for (int p = 0; p < 2; ++p) {
                detail::NullSpace ns = detail::null_space(detail::dirichlet_matrix(g, p == 0 ? Parity::Even : Parity::Odd, theta));
                Eigen::MatrixXcd proj = ns.basis * ns.basis.adjoint();
                for (int a = 0; a < ng; ++a)
                    for (int b = 0; b < ng; ++b)
                        W[p](a, b) += w * std::polar(1.0, index_dot(rep[a]->cell, theta) - index_dot(rep[b]->cell, theta)) *
                                      proj(rep[a]->edge, rep[b]->edge);
            }
    }

    if (has_dirichlet) {
        for (int p = 0; p < 2; ++p) {
            const int j0 = p == 0 ? 2 : 1;
            const int count = j0 <= J ? (J - j0) / 2 + 1 : 0;
            if (count == 0) continue;
            Eigen::MatrixXd S(P, count);
            Eigen::VectorXcd d(count);
            for (int r = 0; r < count; ++r) {
                int j = j0 + 2 * r;
                d(r) = 2.0 / (std::pow(kPi * j, 2) - k2);
                for (int i = 0; i < P; ++i) S(i, r) = std::sin(kPi * j * pts[i].t);
            }
            Eigen::MatrixXcd Sc = S.cast<cplx>();
            Eigen::MatrixXcd series = (Sc * d.asDiagonal()) * Sc.transpose();
            for (int i = 0; i < P; ++i)
                for (int ip = 0; ip < P; ++ip) kb.G(i, ip) += W[p](group[i], group[ip]) * series(i, ip);
        }
    }
    return kb;
}

struct GreensValue {
    cplx value = 0.0;
    int jmax = 0;
    double tail_bound = 0.0;
    long degenerate_nodes = 0;
};

inline GreensValue greens_function(const FundamentalGraph& g, cplx k, const GraphPoint& x, const LatticeVector& m,
                                   const GraphPoint& xp, const LatticeVector& mp, const ScatteringOptions& opt = {})
{
    KernelBlock kb = kernel_block(g, {{x.edge, m, x.t}, {xp.edge, mp, xp.t}}, k, opt);
    return {kb.G(0, 1), kb.jmax, kb.tail_bound, kb.degenerate_nodes};
}

// ---------------------------------------------------------------- Y0 and its trace

struct KernelNode {
    int entry = 0;
    int edge = 0;
    LatticeVector cell;
    double t = 0.0;
    double weight = 0.0;
    double q = 0.0;
};

struct KernelMatrix {
    std::vector<KernelNode> nodes;
    Eigen::MatrixXcd Y;
    int jmax = 0;
    int N = 0;
    double tail_bound = 0.0;
    double c_gamma = 0.0;
    long degenerate_nodes = 0;
    long grid_nodes = 0;
};

inline std::vector<KernelNode> simpson_nodes(const Potential& q, int per_edge)
{
    if (per_edge < 3 || per_edge % 2 == 0) throw Error(ErrorKind::OutOfRange, "quadrature points per edge must be odd and >= 3");
    std::vector<KernelNode> out;
    const double h = 1.0 / (per_edge - 1);
    for (std::size_t a = 0; a < q.entries.size(); ++a) {
        const auto& e = q.entries[a];
        for (int i = 0; i < per_edge; ++i) {
            double w = (i == 0 || i == per_edge - 1) ? 1.0 : (i % 2 ? 4.0 : 2.0);
            double t = i * h;
            out.push_back({static_cast<int>(a), e.edge, e.cell, t, w * h / 3.0, e.at(t)});
        }
    }
    return out;
}

inline KernelMatrix assemble_Y0(const FundamentalGraph& g, const Potential& q, cplx k, const ScatteringOptions& opt = {})
{
    check_k(k);
    KernelMatrix km;
    km.N = opt.N;
    km.nodes = simpson_nodes(q, opt.quad);
    std::vector<KernelPoint> pts;
    for (const auto& n : km.nodes) pts.push_back({n.edge, n.cell, n.t});
    KernelBlock kb = kernel_block(g, pts, k, opt);
    km.jmax = kb.jmax;
    km.tail_bound = kb.tail_bound;
    km.c_gamma = kb.c_gamma;
    km.degenerate_nodes = kb.degenerate_nodes;
    km.grid_nodes = kb.grid_nodes;
    const int P = static_cast<int>(pts.size());
    Eigen::VectorXd left(P), right(P);
    for (int i = 0; i < P; ++i) {
        double s = std::sqrt(km.nodes[i].weight * std::abs(km.nodes[i].q));
        left(i) = s;
        right(i) = km.nodes[i].q < 0.0 ? -s : s;
    }
    km.Y = left.asDiagonal() * kb.G * right.asDiagonal();
    return km;
}

struct TraceResult {
    cplx value = 0.0;
    int jmax = 0;
    double tail_bound = 0.0;
    long degenerate_nodes = 0;
};

// Trace of Y0 from the weighted fiber integrals of Q |Psi|^2, integrated exactly in t.
inline TraceResult trace_formula(const FundamentalGraph& g, const Potential& q, cplx k, const ScatteringOptions& opt = {})
{
    check_k(k);
    TraceResult out;
    if (q.empty()) return out;
    Truncation tr = choose_truncation(g, k, opt);
    TorusQuadrature tq = torus_quadrature(g, opt.N);
    out.jmax = tr.jmax;
    out.tail_bound = tr.tail;
    out.degenerate_nodes = tq.degenerate;
    const int J = tr.jmax;
    const int nu = g.num_vertices();
    const cplx k2 = k * k;
    const int na = static_cast<int>(q.entries.size());
    std::vector<double> mass(na);
    for (int a = 0; a < na; ++a) mass[a] = detail::potential_fourier(q.entries[a], 0.0).real();
    std::vector<double> proj_diag[2] = {std::vector<double>(na, 0.0), std::vector<double>(na, 0.0)};
    const bool has_dirichlet = g.num_edges() > nu;

    for (long node = 0; node < tq.total; ++node) {
        const double w = tq.weight[node];
        if (w == 0.0) continue;
        QuasiMomentum theta = grid_theta(opt.N, g.dim(), node);
        EigenSystem es = eigensystem(g, theta);
        cplx acc = 0.0;
        for (int n = 1; n <= nu; ++n) {
            EdgeWaveFunction wf = vertex_eigenfunction(g, theta, n, 0, es);
            const double z = z_map(es.lambda(n)).z;
            for (int j = 0; j <= J; ++j) {
                const double Z = ladder(z, j), sZ = std::sin(Z), cZ = std::cos(Z);
                double sum = 0.0;
                for (int a = 0; a < na; ++a) {
                    const int e = q.entries[a].edge;
                    const cplx P = wf.a[e] * sZ, R = wf.b[e] - wf.a[e] * cZ;
                    const double c0 = 0.5 * (std::norm(P) + std::norm(R));
                    const double ca = 0.5 * (std::norm(P) - std::norm(R));
                    const double cb = std::real(P * std::conj(R));
                    const cplx f = detail::potential_fourier(q.entries[a], 2.0 * Z);
                    sum += c0 * mass[a] + ca * f.real() + cb * f.imag();
                }
                acc += sum / (Z * Z - k2);
            }
        }
        out.value += w * acc;
        if (has_dirichlet)
            for (int p = 0; p < 2; ++p) {
                detail::NullSpace ns = detail::null_space(detail::dirichlet_matrix(g, p == 0 ? Parity::Even : Parity::Odd, theta));
                for (int a = 0; a < na; ++a) proj_diag[p][a] += w * ns.basis.row(q.entries[a].edge).squaredNorm();
            }
    }
    if (has_dirichlet)
        for (int a = 0; a < na; ++a)
            for (int j = 1; j <= J; ++j) {
                double weighted = mass[a] - detail::potential_fourier(q.entries[a], 2.0 * kPi * j).real();
                out.value += proj_diag[j % 2][a] * weighted / (std::pow(kPi * j, 2) - k2);
            }
    return out;
}

// ---------------------------------------------------------------- bounds and determinant

inline double trace_norm_bound(const FundamentalGraph& g, const Potential& q, cplx k, double c_gamma)
{
    check_k(k);
    const double c0 = tail_prefactor(g, c_gamma);
    const double im = k.imag(), ak = std::abs(k);
    return c0 * q.l1 * std::sqrt(2.0 / (im * im) + 1.0 / im) * std::sqrt(2.0 / (ak * ak) + 1.0 / ak);
}

// sum_{j <= jmax} 1/|z_{n,j} - k|^2 for one discrete value z
inline double fiber_sum(double z, cplx k, int jmax)
{
    double s = 0.0;
    for (int j = 0; j <= jmax; ++j) s += 1.0 / std::norm(ladder(z, j) - k);
    return s;
}

struct DeterminantResult {
    cplx k = 0.0;
    cplx D = 1.0;
    cplx logD = 0.0;          // sum of log(1 + mu) over eigenvalues of Y0
    cplx log_series = 0.0;    // -sum_{n <= N} Tr(-Y0)^n / n
    int series_terms = 0;
    bool series_applicable = false;   // paper_bound < 1
    double remainder_bound = 0.0;
    double trace_norm = 0.0;  // singular value sum
    double paper_bound = 0.0;
    cplx trace = 0.0;
    int jmax = 0;
    int grid = 0;
    double tail_bound = 0.0;
    double c_gamma = 0.0;
    long degenerate_nodes = 0;
};

inline cplx log_series(const Eigen::MatrixXcd& Y, int terms)
{
    cplx s = 0.0;
    Eigen::MatrixXcd power = Eigen::MatrixXcd::Identity(Y.rows(), Y.cols());
    for (int n = 1; n <= terms; ++n) {
        power = power * (-Y);
        s -= power.trace() / static_cast<double>(n);
    }
    return s;
}

inline DeterminantResult determinant_of(const KernelMatrix& km, double paper_bound, int terms)
{
    DeterminantResult r;
    r.series_terms = terms;
    r.paper_bound = paper_bound;
    r.jmax = km.jmax;
    r.grid = km.N;
    r.tail_bound = km.tail_bound;
    r.c_gamma = km.c_gamma;
    r.degenerate_nodes = km.degenerate_nodes;
    if (km.Y.rows() == 0) return r;
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(km.Y, false);
    for (int i = 0; i < es.eigenvalues().size(); ++i) {
        cplx f = 1.0 + es.eigenvalues()(i);
        r.D *= f;
        r.logD += std::log(f);
    }
    r.trace = km.Y.trace();
    r.trace_norm = Eigen::JacobiSVD<Eigen::MatrixXcd>(km.Y).singularValues().sum();
    r.log_series = log_series(km.Y, terms);
    r.series_applicable = paper_bound < 1.0;
    r.remainder_bound = r.series_applicable
                            ? std::pow(r.trace_norm, terms + 1) / ((terms + 1) * (1.0 - paper_bound))
                            : std::numeric_limits<double>::infinity();
    return r;
}

inline DeterminantResult determinant(const FundamentalGraph& g, const Potential& q, cplx k, const ScatteringOptions& opt = {},
                                     int terms = 3)
{
    check_k(k);
    if (terms < 0) throw Error(ErrorKind::OutOfRange, "series terms must be nonnegative");
    if (q.empty()) {
        DeterminantResult r;
        r.k = k;
        r.series_terms = terms;
        r.series_applicable = true;
        r.grid = opt.N;
        return r;
    }
    KernelMatrix km = assemble_Y0(g, q, k, opt);
    DeterminantResult r = determinant_of(km, trace_norm_bound(g, q, k, km.c_gamma), terms);
    r.k = k;
    return r;
}

struct PhaseResult {
    double E = 0.0;
    double eps = 0.0;
    cplx phase_eps = 1.0;       // conj(D)/D at sqrt(E) + i eps
    cplx phase_half = 1.0;      // at sqrt(E) + i eps/2
    cplx extrapolated = 1.0;    // exp(i (2 arg S(eps/2) - arg S(eps)))
    double modulus = 1.0;
    double change = 0.0;        // |S(eps/2) - S(eps)|
    double estimate = 0.0;      // |extrapolated - S(eps/2)|
};

inline PhaseResult birman_krein_phase(const FundamentalGraph& g, const Potential& q, double E, double eps,
                                      const ScatteringOptions& opt = {}, const MetricSpectrum* spectrum = nullptr)
{
    if (eps < 1e-3 || eps > 1e-1) throw Error(ErrorKind::OutOfRange, "eps must lie in [1e-3, 1e-1]");
    if (!(E > 0.0)) throw Error(ErrorKind::InvalidEnergy, "energy must be positive");
    MetricSpectrum local;
    if (!spectrum) {
        local = metric_spectrum(g, static_cast<int>(std::sqrt(E) / kPi) + 2, 32);
        spectrum = &local;
    }
    if (!in_merged_ac(*spectrum, E)) throw Error(ErrorKind::InvalidEnergy, "energy is not in the absolutely continuous spectrum");
    const double margin = 10.0 * eps * eps;
    for (const auto& b : spectrum->ac_bands)
        if (std::abs(E - b.lo) < margin || std::abs(E - b.hi) < margin)
            throw Error(ErrorKind::NearSingularEnergy, "energy too close to a band edge");
    for (const auto& f : spectrum->flat)
        if (std::abs(E - f.E) < margin) throw Error(ErrorKind::NearSingularEnergy, "energy too close to a flat band");
    PhaseResult r;
    r.E = E;
    r.eps = eps;
    if (q.empty()) return r;
    auto phase = [&](double e) {
        cplx D = determinant(g, q, cplx(std::sqrt(E), e), opt, 1).D;
        return std::conj(D) / D;
    };
    r.phase_eps = phase(eps);
    r.phase_half = phase(0.5 * eps);
    // extrapolate the angle, not the complex value, so the result stays on the unit circle
    const double a1 = std::arg(r.phase_eps), a2 = a1 + wrap_angle(std::arg(r.phase_half) - a1);
    const double m1 = std::abs(r.phase_eps), m2 = std::abs(r.phase_half);
    r.extrapolated = std::polar(m2 * m2 / m1, 2.0 * a2 - a1);
    r.modulus = std::abs(r.extrapolated);
    r.change = std::abs(r.phase_half - r.phase_eps);
    r.estimate = std::abs(r.extrapolated - r.phase_half);
    return r;
}

} // namespace qgs
