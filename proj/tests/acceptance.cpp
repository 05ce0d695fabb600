// Acceptance run: one PASS/FAIL line per criterion with its measured value and wall time.
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>

#include <qgs/dsl.hpp>
#include <qgs/io.hpp>
#include <qgs/scattering.hpp>

#include "oracles.hpp"
#include "seeded_errors.hpp"

using namespace qgs;
using namespace oracle;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int id;
    const char* what;
    double limit;   // seconds
    std::function<Outcome()> run;
};

std::string fmt(const char* f, double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

std::string sci(double x) { return fmt("%.2e", x); }

const std::vector<std::string> kGraphs = {"lattice2", "graphene", "stanene"};

// ---------------------------------------------------------------- discrete bands

Outcome stanene_band_edges()
{
    BandSurface s = refined_surface(builtin("stanene"), 64);
    const double expect[4][2] = {{-1, -0.5}, {-0.5, -0.25}, {0.25, 0.5}, {0.5, 1}};
    double worst = 0.0;
    for (int n = 0; n < 4; ++n)
        worst = std::max({worst, std::abs(s.band_edges[n].lo - expect[n][0]), std::abs(s.band_edges[n].hi - expect[n][1])});
    return {worst <= 1e-6, "max endpoint error " + sci(worst)};
}

Outcome stanene_product_law()
{
    FundamentalGraph g = builtin("stanene");
    double worst = 0.0;
    const long total = grid_size(64, 2);
    for (long node = 0; node < total; ++node) {
        Eigen::VectorXd v = band_values(g, grid_theta(64, 2, node));
        worst = std::max(worst, std::abs(v(0) * v(1) - 0.25));
    }
    return {worst <= 1e-10, "max |lambda1 lambda2 - 1/4| = " + sci(worst) + " over " + std::to_string(total) + " nodes"};
}

Outcome graphene_closed_form()
{
    FundamentalGraph g = builtin("graphene");
    std::mt19937_64 rng(101);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        QuasiMomentum t = random_theta(rng, 2);
        double ref = -std::abs(1.0 + std::polar(1.0, t[0]) + std::polar(1.0, t[1])) / 3.0;
        worst = std::max(worst, std::abs(band_values(g, t)(0) - ref));
    }
    return {worst <= 1e-12, "max error " + sci(worst)};
}

// ---------------------------------------------------------------- metric spectrum

Outcome golden_spectra()
{
    std::ostringstream out;
    bool ok = true;
    MetricSpectrum lat = metric_spectrum(builtin("lattice2"), 3);
    const bool lat_ok = lat.merged_ac.size() == 1 && lat.merged_ac[0].lo == 0.0 &&
                        std::abs(lat.merged_ac[0].hi - std::pow(4 * kPi, 2)) <= 1e-6 && lat.gaps.empty();
    ok &= lat_ok;
    MetricSpectrum gr = metric_spectrum(builtin("graphene"), 3);
    const bool gr_ok = gr.merged_ac.size() == 1 && gr.gaps.empty();
    ok &= gr_ok;
    MetricSpectrum st = metric_spectrum(builtin("stanene"), 3);
    const double rp = std::acos(0.25), rm = std::acos(-0.25);
    const double expect[4][2] = {{rp * rp, rm * rm},
                                 {std::pow(2 * kPi - rm, 2), std::pow(2 * kPi - rp, 2)},
                                 {std::pow(2 * kPi + rp, 2), std::pow(2 * kPi + rm, 2)},
                                 {std::pow(4 * kPi - rm, 2), std::pow(4 * kPi - rp, 2)}};
    double worst = st.gaps.size() == 4 ? 0.0 : std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < std::min<std::size_t>(4, st.gaps.size()); ++i)
        worst = std::max({worst, std::abs(st.gaps[i].lo - expect[i][0]), std::abs(st.gaps[i].hi - expect[i][1])});
    ok &= worst <= 1e-6;
    out << "lattice2 " << (lat_ok ? "gapless" : "WRONG") << ", graphene " << (gr_ok ? "gapless" : "WRONG") << ", stanene "
        << st.gaps.size() << " gaps, max endpoint error " << sci(worst);
    return {ok, out.str()};
}

Outcome bgp_cross_check()
{
    std::mt19937_64 rng(102);
    int agree = 0, total = 0;
    for (const auto& name : kGraphs) {
        FundamentalGraph g = builtin(name);
        BandSurface s = refined_surface(g, 64);
        MetricSpectrum ms = metric_spectrum(g, s, 3);
        std::uniform_real_distribution<double> U(0.0, ms.cutoff);
        for (int checked = 0; checked < 200;) {
            double E = U(rng);
            if (is_dirichlet_energy(E, 1e-6)) continue;
            agree += bgp_check(g, E, s) == in_merged_ac(ms, E);
            ++total;
            ++checked;
        }
    }
    return {agree == total, std::to_string(agree) + "/" + std::to_string(total) + " agree"};
}

// ---------------------------------------------------------------- eigenfunctions

Outcome dirichlet_family()
{
    std::mt19937_64 rng(103);
    int rank_bad = 0, cases = 0;
    double sup = 0.0;
    for (const auto& name : kGraphs) {
        FundamentalGraph g = builtin(name);
        for (Parity p : {Parity::Even, Parity::Odd})
            for (int i = 0; i < 100; ++i) {
                QuasiMomentum t = random_theta(rng, g.dim());
                detail::NullSpace ns = detail::null_space(dirichlet_system(g, p, t).matrix);
                ++cases;
                if (ns.rank != g.num_vertices() || ns.basis.cols() != g.num_edges() - g.num_vertices()) {
                    ++rank_bad;
                    continue;
                }
                const int j = p == Parity::Even ? 2 : 1;
                for (int s = 0; s < ns.basis.cols(); ++s)
                    sup = std::max(sup, sup_norm(dirichlet_eigenfunction(ns.basis.col(s), j, t)));
            }
    }
    FundamentalGraph gr = builtin("graphene");
    double gap = 0.0;
    for (int done = 0; done < 20;) {
        QuasiMomentum t = random_theta(rng, 2);
        if (std::abs(wrap_angle(t[0] - t[1])) < 1e-2) continue;
        Eigen::Vector3cd ref = graphene_dirichlet(t);
        for (Parity p : {Parity::Even, Parity::Odd}) {
            Eigen::VectorXcd X = dirichlet_basis(gr, p, t).col(0);
            gap = std::max({gap, std::abs(std::abs(X(2)) - std::abs(ref(2))), 1.0 - std::abs(ref.dot(X))});
        }
        ++done;
    }
    const bool ok = rank_bad == 0 && sup <= std::sqrt(2.0) + 1e-12 && gap <= 1e-10;
    return {ok, "rank/nullity failures " + std::to_string(rank_bad) + "/" + std::to_string(cases) + ", max sup " +
                    fmt("%.15f", sup) + ", graphene e3 error " + sci(gap)};
}

struct VertexCase {
    std::string graph;
    QuasiMomentum theta;
    int n, j;
};

std::vector<VertexCase> vertex_cases()
{
    std::mt19937_64 rng(104);
    std::vector<VertexCase> out;
    for (const auto& name : kGraphs) {
        FundamentalGraph g = builtin(name);
        for (int done = 0; done < 50;) {
            QuasiMomentum t = random_theta(rng, g.dim());
            int n = 1 + static_cast<int>(rng() % g.num_vertices());
            int j = static_cast<int>(rng() % 5);
            if (!usable(g, t, n)) continue;
            out.push_back({name, t, n, j});
            ++done;
        }
    }
    return out;
}

Outcome vertex_family()
{
    double residual = 0.0, norm = 0.0, closed = 0.0;
    int compared = 0;
    for (const auto& c : vertex_cases()) {
        FundamentalGraph g = builtin(c.graph);
        EdgeWaveFunction wf = vertex_eigenfunction(g, c.theta, c.n, c.j);
        residual = std::max(residual, vertex_condition_residual(g, c.theta, wf));
        norm = std::max(norm, std::abs(norm_check(g, c.theta, wf).closed_form - 1.0));
        std::optional<Profile> ref;
        if (c.graph == "lattice2") ref = lattice_vertex(c.theta, c.j);
        else if (c.graph == "graphene") ref = graphene_vertex(g, c.theta, c.n, c.j);
        else ref = stanene_vertex(g, c.theta, c.n, c.j);
        if (!ref) continue;
        closed = std::max(closed, phase_aligned_gap(wf, *ref));
        ++compared;
    }
    const bool ok = residual < 1e-10 && norm <= 1e-10 && closed <= 1e-10;
    return {ok, "max residual " + sci(residual) + ", max |norm-1| " + sci(norm) + ", closed-form gap " + sci(closed) + " (" +
                    std::to_string(compared) + " compared)"};
}

Outcome round_trip()
{
    double deficit = 0.0;
    for (const auto& c : vertex_cases()) {
        FundamentalGraph g = builtin(c.graph);
        EigenSystem es = eigensystem(g, c.theta);
        Eigen::VectorXcd p = project_to_discrete(g, vertex_eigenfunction(g, c.theta, c.n, c.j, es));
        deficit = std::max(deficit, 1.0 - std::abs(es.psi(c.n).dot(p)) / p.norm());
    }
    return {deficit < 1e-10, "max overlap deficit " + sci(deficit)};
}

Outcome uniform_bounds()
{
    std::map<std::string, BoundContext> ctx;
    for (const auto& name : kGraphs) ctx[name] = make_bound_context(builtin(name));
    int failed = 0, total = 0;
    double worst = 0.0;
    for (const auto& c : vertex_cases()) {
        BoundReport r = bound_check(builtin(c.graph), c.theta, c.n, c.j, ctx[c.graph]);
        ++total;
        failed += !r.satisfied;
        if (std::isfinite(r.bound)) worst = std::max(worst, r.measured / r.bound);
    }
    const GraphConstants& gc = ctx["graphene"].constants;
    const GraphConstants& sc = ctx["stanene"].constants;
    const bool consts = std::abs(gc.Lambda - 2.0) <= 1e-9 && std::abs(gc.T1 - 1.0 / 48) <= 1e-12 &&
                        std::abs(sc.Lambda - 0.75) <= 1e-9;
    FundamentalGraph gr = builtin("graphene");
    double mu_min = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 8; ++k) {
        const double a = kPi * k / 8;
        mu_min = std::min(mu_min, effective_mass(gr, {std::cos(a), std::sin(a)}));
    }
    const bool ok = failed == 0 && consts && mu_min >= 1.0 / 48;
    return {ok, std::to_string(total - failed) + "/" + std::to_string(total) + " within bound (max ratio " + fmt("%.3f", worst) +
                    "), constants " + (consts ? "ok" : "WRONG") + ", min effective mass " + fmt("%.6f", mu_min)};
}

// ---------------------------------------------------------------- scattering

Outcome fiber_sum_bound()
{
    std::mt19937_64 rng(105);
    int failed = 0, total = 0;
    double worst = 0.0;
    for (const auto& name : kGraphs) {
        FundamentalGraph g = builtin(name);
        for (int done = 0; done < 20;) {
            QuasiMomentum t = random_theta(rng, g.dim());
            int n = 1 + static_cast<int>(rng() % g.num_vertices());
            double lam = band_values(g, t)(n - 1);
            if (std::abs(lam) > 1.0) continue;
            const double z = z_map(lam).z;
            for (cplx k : {cplx(1, 1), cplx(0, 2)}) {
                const double q = k.imag(), bound = 4.0 / (q * q) + 2.0 / q;
                double s = 0.0;
                for (int j = 0; j <= 20000; ++j) {
                    s += 1.0 / std::norm(ladder(z, j) - k);
                    if (s > bound) break;
                }
                ++total;
                failed += s > bound;
                worst = std::max(worst, s / bound);
            }
            ++done;
        }
    }
    return {failed == 0, std::to_string(total - failed) + "/" + std::to_string(total) + " within bound, max ratio " +
                             fmt("%.4f", worst)};
}

struct Config {
    std::string graph;
    Potential q;
};

std::vector<Config> trace_configs()
{
    std::vector<Config> out;
    for (std::string name : {"lattice2", "graphene"}) {
        FundamentalGraph g = builtin(name);
        out.push_back({name, make_potential(g, {{0, LatticeVector(g.dim(), 0), {0.5, 0.5, 0.5}}})});
    }
    return out;
}

ScatteringOptions accept_opts()
{
    ScatteringOptions o;
    o.N = 24;
    return o;
}

Outcome trace_consistency()
{
    std::ostringstream out;
    bool ok = true;
    for (const auto& c : trace_configs()) {
        FundamentalGraph g = builtin(c.graph);
        KernelMatrix km = assemble_Y0(g, c.q, {1, 1}, accept_opts());
        TraceResult tr = trace_formula(g, c.q, {1, 1}, accept_opts());
        const double rel = std::abs(km.Y.trace() - tr.value) / std::abs(tr.value);
        ok &= rel <= 0.02;
        out << c.graph << " rel " << sci(rel) << " (jmax " << km.jmax << ") ";
    }
    return {ok, out.str()};
}

Outcome determinant_control()
{
    FundamentalGraph g = builtin("lattice2");
    const cplx k(1, 1);
    const double cg = estimate_c_gamma(g).value;
    Potential q0 = load_potential(g, std::string(QGS_FIXTURES) + "/lattice2_potential.json");
    const double s = 0.4 / trace_norm_bound(g, q0, k, cg);
    Potential q = scaled(q0, s);
    std::ostringstream out;
    bool ok = true;
    KernelMatrix km = assemble_Y0(g, q, k, accept_opts());
    const double C = trace_norm_bound(g, q, k, km.c_gamma);
    ok &= C < 0.5;
    out << "C = " << fmt("%.3f", C);
    for (int terms : {1, 2, 3}) {
        DeterminantResult r = determinant_of(km, C, terms);
        const double err = std::abs(r.logD - r.log_series);
        ok &= err <= r.remainder_bound;
        out << ", N=" << terms << " " << sci(err) << " <= " << sci(r.remainder_bound);
    }
    Potential zero = load_potential(g, std::string(QGS_FIXTURES) + "/zero_potential.json");
    const bool unit = determinant(g, zero, k).D == cplx(1.0);
    ok &= unit;
    out << ", D(0) " << (unit ? "= 1" : "!= 1");
    return {ok, out.str()};
}

Outcome trace_norm_ordering()
{
    std::ostringstream out;
    bool ok = true;
    for (const auto& c : trace_configs()) {
        FundamentalGraph g = builtin(c.graph);
        DeterminantResult r = determinant(g, c.q, {1, 1}, accept_opts());
        ok &= r.trace_norm <= r.paper_bound;
        out << c.graph << " " << fmt("%.3f", r.trace_norm) << " <= " << fmt("%.3f", r.paper_bound) << "; ";
    }
    // Along k = iq the estimate q C(Q, iq) must not grow. The measured q ||Y0(iq)||_1 stays below it
    // and below its large-q limit ||Q||_1 / 2 (the free-line diagonal 1/(2q)); it approaches that
    // limit from below, so it is reported but not required to decrease.
    FundamentalGraph g = builtin("lattice2");
    const Potential q = trace_configs()[0].q;
    ScatteringOptions o = accept_opts();
    o.N = 12;
    o.tail_tol = 1e-2;
    double prev = std::numeric_limits<double>::infinity();
    std::ostringstream est, meas;
    for (double s : {5.0, 10.0, 20.0}) {
        DeterminantResult r = determinant(g, q, {0, s}, o);
        const double e = s * r.paper_bound, m = s * r.trace_norm;
        ok &= e <= prev * (1 + 1e-12) && m <= e && m <= 0.5 * q.l1 * (1 + 1e-3);
        prev = e;
        est << " " << fmt("%.4f", e);
        meas << " " << fmt("%.4f", m);
    }
    out << "q*C(iq):" << est.str() << "; q*||Y0(iq)||_1:" << meas.str() << " (limit " << fmt("%.4f", 0.5 * q.l1) << ")";
    return {ok, out.str()};
}

Outcome birman_krein()
{
    FundamentalGraph g = builtin("lattice2");
    Potential q = load_potential(g, std::string(QGS_FIXTURES) + "/lattice2_potential.json");
    PhaseResult r = birman_krein_phase(g, q, 2.0, 0.05, accept_opts());
    const double dev = std::abs(r.modulus - 1.0);
    return {dev <= 5e-3, "||det S| - 1| = " + sci(dev) + ", phase change between eps and eps/2 " + sci(r.change)};
}

// ---------------------------------------------------------------- parser

Outcome parser()
{
    int round_ok = 0, seeded_ok = 0;
    for (const auto& name : kGraphs) {
        std::string text = read_file(std::string(QGS_FIXTURES) + "/" + name + ".qg");
        auto r = parse(text);
        if (auto* s = std::get_if<GraphSpec>(&r)) round_ok += serialize(*s) == text;
    }
    auto cases = load_seeded_errors(std::string(QGS_FIXTURES) + "/errors");
    for (const auto& c : cases) {
        auto r = parse(c.text);
        auto* d = std::get_if<std::vector<ParseDiagnostic>>(&r);
        seeded_ok += d && !d->empty() && d->front().line == c.line;
    }
    const bool ok = round_ok == 3 && cases.size() == 20 && seeded_ok == 20;
    return {ok, "round trip " + std::to_string(round_ok) + "/3, seeded lines " + std::to_string(seeded_ok) + "/" +
                    std::to_string(cases.size())};
}

} // namespace

int main()
{
    const std::vector<Criterion> criteria = {
        {1, "stanene discrete band edges", 10, stanene_band_edges},
        {2, "stanene product law", 5, stanene_product_law},
        {3, "graphene lowest band closed form", 2, graphene_closed_form},
        {4, "golden metric spectra", 30, golden_spectra},
        {5, "band-gap membership cross-check", 10, bgp_cross_check},
        {6, "Dirichlet family", 10, dirichlet_family},
        {7, "vertex family", 20, vertex_family},
        {8, "lift/project round trip", 10, round_trip},
        {9, "uniform sup-norm bounds", 20, uniform_bounds},
        {10, "fiber sum bound", 5, fiber_sum_bound},
        {11, "trace consistency", 60, trace_consistency},
        {12, "determinant series control", 60, determinant_control},
        {13, "trace-norm ordering and decay", 60, trace_norm_ordering},
        {14, "scattering phase modulus", 60, birman_krein},
        {15, "parser round trip and diagnostics", 1, parser},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = secs <= c.limit;
        const bool pass = o.pass && in_time;
        failed += !pass;
        std::printf("%s  %2d  %-36s %s  [%.2fs / %.0fs%s]\n", pass ? "PASS" : "FAIL", c.id, c.what, o.detail.c_str(), secs,
                    c.limit, in_time ? "" : " over time");
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
