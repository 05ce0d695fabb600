#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "graph.hpp"
#include "parallel.hpp"

namespace qgs {

using cplx = std::complex<double>;
using QuasiMomentum = std::vector<double>;

inline constexpr double kPi = 3.14159265358979323846;

inline double wrap_angle(double x)
{
    double y = std::remainder(x, 2.0 * kPi);   // [-pi, pi]
    return y <= -kPi ? y + 2.0 * kPi : y;
}

inline QuasiMomentum wrap_theta(const QuasiMomentum& t)
{
    QuasiMomentum w(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) w[i] = wrap_angle(t[i]);
    return w;
}

// Euclidean length of the representative in (-pi, pi]^d.
inline double theta_norm(const QuasiMomentum& t)
{
    double s = 0.0;
    for (double x : t) s += wrap_angle(x) * wrap_angle(x);
    return std::sqrt(s);
}

inline double index_dot(const LatticeVector& tau, const QuasiMomentum& t)
{
    double s = 0.0;
    for (std::size_t i = 0; i < tau.size(); ++i) s += static_cast<double>(tau[i]) * t[i];
    return s;
}

inline double index_norm(const LatticeVector& tau)
{
    double s = 0.0;
    for (auto x : tau) s += static_cast<double>(x) * static_cast<double>(x);
    return std::sqrt(s);
}

// Torus grid: node k along an axis sits at 2*pi*k/N - pi; the last axis varies fastest.
inline QuasiMomentum grid_theta(int N, int d, long node)
{
    QuasiMomentum t(d);
    for (int a = d - 1; a >= 0; --a) {
        t[a] = 2.0 * kPi * static_cast<double>(node % N) / N - kPi;
        node /= N;
    }
    return t;
}

inline long grid_size(int N, int d)
{
    long n = 1;
    for (int a = 0; a < d; ++a) n *= N;
    return n;
}

struct FloquetMatrix {
    Eigen::MatrixXcd m;
    QuasiMomentum theta;
};

struct EigenSystem {
    Eigen::VectorXd values;     // ascending
    Eigen::MatrixXcd vectors;   // column n-1 belongs to band n
    QuasiMomentum theta;

    int size() const { return static_cast<int>(values.size()); }
    double lambda(int n) const { return values(n - 1); }
    Eigen::VectorXcd psi(int n) const { return vectors.col(n - 1); }
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

inline FloquetMatrix floquet_matrix(const FundamentalGraph& g, const QuasiMomentum& theta)
{
    if (static_cast<int>(theta.size()) != g.dim())
        throw Error(ErrorKind::DimensionMismatch, "quasimomentum has " + std::to_string(theta.size()) +
                                                      " components, graph dimension is " + std::to_string(g.dim()));
    const int nv = g.num_vertices();
    FloquetMatrix f;
    f.theta = theta;
    f.m = Eigen::MatrixXcd::Zero(nv, nv);
    for (const auto& e : g.edges()) {
        double scale = 1.0 / std::sqrt(static_cast<double>(g.degree(e.tail)) * g.degree(e.head));
        cplx w = std::polar(scale, index_dot(e.index, theta));
        f.m(e.tail, e.head) -= w;
        f.m(e.head, e.tail) -= std::conj(w);
    }
    return f;
}

inline EigenSystem eigensystem(const FloquetMatrix& f)
{
    const Eigen::MatrixXcd& m = f.m;
    double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw Error(ErrorKind::NonHermitianInput, "matrix is not Hermitian");
    Eigen::MatrixXcd h = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h);
    EigenSystem es;
    es.theta = f.theta;
    es.values = solver.eigenvalues();
    es.vectors = solver.eigenvectors();
    for (int c = 0; c < es.vectors.cols(); ++c) {
        for (int r = 0; r < es.vectors.rows(); ++r) {
            cplx z = es.vectors(r, c);
            if (std::abs(z) > 1e-8) {
                es.vectors.col(c) *= std::conj(z) / std::abs(z);
                es.vectors(r, c) = std::abs(z);
                break;
            }
        }
    }
    return es;
}

inline EigenSystem eigensystem(const FundamentalGraph& g, const QuasiMomentum& theta)
{
    return eigensystem(floquet_matrix(g, theta));
}

inline Eigen::VectorXd band_values(const FundamentalGraph& g, const QuasiMomentum& theta)
{
    FloquetMatrix f = floquet_matrix(g, theta);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(f.m, Eigen::EigenvaluesOnly);
    return solver.eigenvalues();
}

struct BandSurface {
    int N = 0;
    int dim = 0;
    int nu = 0;
    std::vector<double> samples;        // node-major, nu values per node
    std::vector<Interval> band_edges;   // index n-1

    long nodes() const { return grid_size(N, dim); }
    double at(long node, int n) const { return samples[static_cast<std::size_t>(node) * nu + (n - 1)]; }
};

inline BandSurface band_sample(const FundamentalGraph& g, int N)
{
    if (N < 4) throw Error(ErrorKind::OutOfRange, "grid size must be at least 4");
    BandSurface s;
    s.N = N;
    s.dim = g.dim();
    s.nu = g.num_vertices();
    long total = s.nodes();
    s.samples.assign(static_cast<std::size_t>(total) * s.nu, 0.0);
    parallel_for(static_cast<int>(total), [&](int node) {
        Eigen::VectorXd v = band_values(g, grid_theta(N, s.dim, node));
        for (int n = 0; n < s.nu; ++n) s.samples[static_cast<std::size_t>(node) * s.nu + n] = v(n);
    });
    s.band_edges.assign(s.nu, {std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()});
    for (long node = 0; node < total; ++node)
        for (int n = 1; n <= s.nu; ++n) {
            s.band_edges[n - 1].lo = std::min(s.band_edges[n - 1].lo, s.at(node, n));
            s.band_edges[n - 1].hi = std::max(s.band_edges[n - 1].hi, s.at(node, n));
        }
    return s;
}

namespace detail {

template <class F>
double golden_min(F&& f, double a, double b, double& xbest, double tol = 1e-13)
{
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - r * (b - a), x2 = a + r * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > tol) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        }
    }
    if (f1 < f2) {
        xbest = x1;
        return f1;
    }
    xbest = x2;
    return f2;
}

// Minimises sign*lambda_n by coordinate-wise golden section starting at theta0.
inline double refine_extremum(const FundamentalGraph& g, int n, double sign, QuasiMomentum theta, double half_width,
                              int rounds)
{
    auto value = [&](const QuasiMomentum& t) { return sign * band_values(g, t)(n - 1); };
    double best = value(theta);
    for (int r = 0; r < rounds; ++r) {
        double before = best;
        for (std::size_t c = 0; c < theta.size(); ++c) {
            QuasiMomentum t = theta;
            double x = theta[c];
            double v = golden_min(
                [&](double y) {
                    t[c] = y;
                    return value(t);
                },
                theta[c] - half_width, theta[c] + half_width, x);
            if (v < best) {
                best = v;
                theta[c] = x;
            }
        }
        if (before - best < 1e-15) break;
    }
    return sign * best;
}

inline double snap_unit(double x)
{
    if (std::abs(x + 1.0) < 1e-10) return -1.0;
    if (std::abs(x - 1.0) < 1e-10) return 1.0;
    return x;
}

} // namespace detail

// Refines [lambda_n^-, lambda_n^+] from an existing surface. Values within 1e-10 of +-1 are snapped,
// since arccos amplifies their rounding error.
inline Interval band_edges(const FundamentalGraph& g, const BandSurface& s, int n, int rounds = 60, int starts = 4)
{
    if (n < 1 || n > s.nu) throw Error(ErrorKind::OutOfRange, "band index out of range");
    long total = s.nodes();
    std::vector<long> order(static_cast<std::size_t>(total));
    std::iota(order.begin(), order.end(), 0L);
    Interval out = s.band_edges[n - 1];
    const double h = 2.0 * kPi / s.N;
    for (double sign : {1.0, -1.0}) {
        std::partial_sort(order.begin(), order.begin() + std::min<long>(starts, total), order.end(),
                          [&](long a, long b) { return sign * s.at(a, n) < sign * s.at(b, n); });
        std::vector<double> found(std::min<long>(starts, total));
        parallel_for(static_cast<int>(found.size()), [&](int i) {
            found[i] = detail::refine_extremum(g, n, sign, grid_theta(s.N, s.dim, order[i]), h, rounds);
        });
        for (double v : found) {
            if (sign > 0) out.lo = std::min(out.lo, v);
            else out.hi = std::max(out.hi, v);
        }
    }
    out.lo = detail::snap_unit(out.lo);
    out.hi = detail::snap_unit(out.hi);
    return out;
}

inline Interval band_edges(const FundamentalGraph& g, int n, int N = 64, int rounds = 60)
{
    return band_edges(g, band_sample(g, N), n, rounds);
}

// Surface with every band's edges refined.
inline BandSurface refined_surface(const FundamentalGraph& g, int N = 64, int rounds = 60)
{
    BandSurface s = band_sample(g, N);
    std::vector<Interval> edges(s.nu);
    for (int n = 1; n <= s.nu; ++n) edges[n - 1] = band_edges(g, s, n, rounds);
    s.band_edges = edges;
    return s;
}

struct FlatBand {
    int n = 0;
    double value = 0.0;
};

inline std::vector<FlatBand> detect_flat_bands(const BandSurface& s, double tol = 1e-10)
{
    std::vector<FlatBand> out;
    long total = s.nodes();
    for (int n = 1; n <= s.nu; ++n) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo, sum = 0.0;
        for (long node = 0; node < total; ++node) {
            double v = s.at(node, n);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
            sum += v;
        }
        if (total > 0 && hi - lo < tol) out.push_back({n, sum / static_cast<double>(total)});
    }
    return out;
}

struct GraphConstants {
    double Lambda = 0.0;     // gap of Delta(0) above -1; +inf for a single vertex
    double M = 0.0;
    double T1 = 0.0;
    int kappa_total = 0;
    double C_ratio = 0.0;    // sup |theta| / sin z1(theta); +inf when lambda_1 reaches 1
    double bridge_sum = 0.0; // sum of |tau|^2 over the chosen bridges
    std::vector<int> bridges;
};

// d bridges with rationally independent indices, lowest id first.
inline std::vector<int> independent_bridges(const FundamentalGraph& g)
{
    std::vector<int> chosen;
    std::vector<LatticeVector> rows;
    for (const auto& e : g.edges()) {
        if (detail::is_zero(e.index)) continue;
        rows.push_back(e.index);
        if (detail::integer_rank(rows, g.dim()) == static_cast<int>(rows.size())) chosen.push_back(e.id);
        else rows.pop_back();
        if (static_cast<int>(chosen.size()) == g.dim()) break;
    }
    return chosen;
}

inline GraphConstants graph_constants(const FundamentalGraph& g, int N = 64)
{
    GraphConstants c;
    const int nv = g.num_vertices();
    const int d = g.dim();
    c.kappa_total = g.total_degree();

    Eigen::VectorXd at0 = band_values(g, QuasiMomentum(d, 0.0));
    c.Lambda = nv > 1 ? at0(1) - at0(0) : std::numeric_limits<double>::infinity();

    double max_bridge = 0.0;
    for (const auto& e : g.edges()) max_bridge = std::max(max_bridge, index_norm(e.index));
    std::vector<double> row(nv, 0.0);
    for (const auto& e : g.edges()) {
        double w = index_norm(e.index) / std::sqrt(static_cast<double>(g.degree(e.tail)) * g.degree(e.head));
        row[e.tail] += w;
        row[e.head] += w;
    }
    double T = *std::max_element(row.begin(), row.end());
    c.M = max_bridge + (std::isinf(c.Lambda) ? 0.0 : 2.0 / c.Lambda * T);

    c.bridges = independent_bridges(g);
    for (int e : c.bridges) c.bridge_sum += std::pow(index_norm(g.edge(e).index), 2);
    c.T1 = 1.0 / (static_cast<double>(c.kappa_total) * nv * d) *
           std::pow((d - 1) / c.bridge_sum, static_cast<double>(d - 1));

    long total = grid_size(N, d);
    std::vector<double> ratio(static_cast<std::size_t>(total), 0.0);
    parallel_for(static_cast<int>(total), [&](int node) {
        QuasiMomentum t = grid_theta(N, d, node);
        double r = theta_norm(t);
        if (r < 1e-12) return;
        double l1 = std::clamp(band_values(g, t)(0), -1.0, 1.0);
        double s = std::sqrt(std::max(0.0, 1.0 - l1 * l1));
        ratio[node] = s > 1e-7 ? r / s : std::numeric_limits<double>::infinity();
    });
    c.C_ratio = *std::max_element(ratio.begin(), ratio.end());
    return c;
}

// Half the second derivative of lambda_1 along omega at 0, Richardson-extrapolated over h and h/2.
inline double effective_mass(const FundamentalGraph& g, const QuasiMomentum& omega, double h = 1e-2)
{
    double norm = 0.0;
    for (double w : omega) norm += w * w;
    if (std::abs(std::sqrt(norm) - 1.0) > 1e-9) throw Error(ErrorKind::OutOfRange, "direction must be a unit vector");
    if (h < 1e-4 || h > 1e-1) throw Error(ErrorKind::OutOfRange, "step must lie in [1e-4, 1e-1]");
    auto lam1 = [&](double s) {
        QuasiMomentum t(omega.size());
        for (std::size_t i = 0; i < t.size(); ++i) t[i] = s * omega[i];
        return band_values(g, t)(0);
    };
    double l0 = lam1(0.0);
    auto second = [&](double step) { return (lam1(step) - 2.0 * l0 + lam1(-step)) / (2.0 * step * step); };
    return (4.0 * second(0.5 * h) - second(h)) / 3.0;
}

} // namespace qgs
