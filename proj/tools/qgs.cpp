#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <regex>
#include <sstream>

#include <qgs/dsl.hpp>
#include <qgs/io.hpp>

using namespace qgs;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseFailure {
    std::vector<ParseDiagnostic> diags;
};

FundamentalGraph load_graph(const std::string& source)
{
    if (!std::filesystem::exists(source)) {
        try {
            return builtin(source);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::UnknownBuiltin) throw;
            throw Error(ErrorKind::UnknownBuiltin, "'" + source + "' is neither a builtin graph nor a readable file");
        }
    }
    auto res = parse(read_file(source));
    if (auto* d = std::get_if<std::vector<ParseDiagnostic>>(&res)) throw ParseFailure{*d};
    return build_graph(std::get<GraphSpec>(res));
}

// "1.5", "-pi/2", "2pi/3", "pi"
double parse_angle(const std::string& s)
{
    static const std::regex re(R"(^\s*([+-]?)([0-9]*\.?[0-9]*(?:[eE][+-]?[0-9]+)?)(pi)?(?:/([0-9]*\.?[0-9]+))?\s*$)");
    std::smatch m;
    if (!std::regex_match(s, m, re) || (m[2].str().empty() && !m[3].matched)) throw UsageError("bad number '" + s + "'");
    double v = m[2].str().empty() ? 1.0 : std::stod(m[2].str());
    if (m[3].matched) v *= kPi;
    if (m[4].matched) v /= std::stod(m[4].str());
    return m[1].str() == "-" ? -v : v;
}

std::vector<double> parse_list(const std::string& s)
{
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_angle(item));
    if (out.empty()) throw UsageError("empty list '" + s + "'");
    return out;
}

cplx parse_k(const std::string& s)
{
    auto v = parse_list(s);
    if (v.size() == 1) return {v[0], 0.0};
    if (v.size() != 2) throw UsageError("k must be 're,im'");
    return {v[0], v[1]};
}

class Output {
public:
    explicit Output(const std::string& path)
    {
        if (!path.empty() && path != "-") {
            file_.open(path);
            if (!file_) throw UsageError("cannot write " + path);
        }
    }
    std::ostream& os() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

private:
    std::ofstream file_;
};

json constants_json(const FundamentalGraph& g, int N)
{
    GraphConstants c = graph_constants(g, N);
    json j;
    j["graph"] = g.name();
    j["Lambda"] = jnum(c.Lambda);
    j["M"] = jnum(c.M);
    j["T1"] = jnum(c.T1);
    j["kappa_total"] = c.kappa_total;
    j["C_ratio"] = jnum(c.C_ratio);
    j["bridges"] = json::array();
    for (int e : c.bridges) j["bridges"].push_back(g.edge_names()[e]);
    CGammaEstimate cg = estimate_c_gamma(g);
    j["C_gamma"] = jnum(cg.value);
    j["mu"] = json::array();
    for (int a = 0; a < g.dim(); ++a) {
        QuasiMomentum w(g.dim(), 0.0);
        w[a] = 1.0;
        j["mu"].push_back(jnum(effective_mass(g, w)));
    }
    return j;
}

json check_report(const FundamentalGraph& g, std::uint64_t seed, bool& ok)
{
    json j;
    j["graph"] = g.name();
    j["dim"] = g.dim();
    j["nu"] = g.num_vertices();
    j["nu_star"] = g.num_edges();
    j["degrees"] = g.degrees();
    j["euler"] = {{"lhs", g.num_vertices() + g.dim()}, {"rhs", g.num_edges() + 1}};
    auto bp = is_bipartite(g);
    j["bipartite"] = bp.has_value();
    if (bp) {
        json parts = json::array();
        for (const auto* part : {&bp->part0, &bp->part1}) {
            json p = json::array();
            for (int v : *part) p.push_back(g.vertex_names()[v]);
            parts.push_back(p);
        }
        j["parts"] = parts;
    }
    SpanningTreeInfo t = spanning_tree(g);
    j["tree"] = json::array();
    for (int e : t.tree_edges) j["tree"].push_back(g.edge_names()[e]);
    FundamentalGraph norm = normalize_indices(g, t);
    json cycles = json::array();
    bool sums_kept = true;
    for (const auto& c : t.bridge_cycles) {
        json names = json::array();
        for (int e : c.edges) names.push_back(g.edge_names()[e]);
        cycles.push_back({{"edge", g.edge_names()[c.edge]}, {"edges", names}, {"index_sum", c.index_sum}});
        TreeCycle shifted = c;
        sums_kept = sums_kept && detail::cycle_sum(norm, shifted) == c.index_sum;
    }
    j["cycles"] = cycles;

    int deg_sum = 0;
    for (int d : g.degrees()) deg_sum += d;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-kPi, kPi);
    double herm = 0.0, range = 0.0;
    for (int i = 0; i < 200; ++i) {
        QuasiMomentum th(g.dim());
        for (auto& x : th) x = U(rng);
        FloquetMatrix f = floquet_matrix(g, th);
        herm = std::max(herm, (f.m - f.m.adjoint()).cwiseAbs().maxCoeff());
        Eigen::VectorXd v = band_values(g, th);
        range = std::max(range, v.cwiseAbs().maxCoeff() - 1.0);
    }
    json inv;
    inv["degree_sum"] = deg_sum == 2 * g.num_edges();
    inv["euler"] = g.num_vertices() + g.dim() <= g.num_edges() + 1;
    inv["normalize_preserves_cycle_sums"] = sums_kept;
    inv["hermitian"] = herm <= 1e-14;
    inv["eigenvalue_range"] = range <= 1e-12;
    j["invariants"] = inv;
    ok = true;
    for (auto& [k, v] : inv.items()) ok = ok && v.get<bool>();
    return j;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Spectral and scattering computations on periodic equilateral metric graphs"};
    app.require_subcommand(1);

    std::string graph, out, format, theta_s, band_s = "1", k_s = "1,1", potential;
    int grid = 0, jmax = 0, j = 0, samples = 101, quad = 33, terms = 3;
    double E = 2.0, eps = 0.1;
    std::uint64_t seed = 0;
    bool bk = false, emit = false;
    std::string parity_s;

    auto common = [&](CLI::App* c) {
        c->add_option("--graph", graph, "builtin name (graphene, stanene, latticeD) or .qg path")->required();
        c->add_option("--out", out, "output file (default stdout)");
    };
    auto tabular = [&](CLI::App* c, const char* def) {
        c->add_option("--format", format, std::string("csv or json (default ") + def + ")")->check(CLI::IsMember({"csv", "json"}));
    };

    auto* check = app.add_subcommand("check", "validate a graph and report its structure");
    common(check);
    check->add_option("--seed", seed, "seed for the sampled Hermiticity check");
    check->add_flag("--emit", emit, "print the canonical .qg text instead of the report");

    auto* bands = app.add_subcommand("bands", "band surface (csv) or band edges (json)");
    common(bands);
    tabular(bands, "json");
    bands->add_option("--grid", grid, "torus grid per axis (default 64)")->check(CLI::Range(4, 4096));

    auto* spectrum = app.add_subcommand("spectrum", "metric Laplacian spectrum up to level jmax");
    common(spectrum);
    spectrum->add_option("--grid", grid, "torus grid per axis (default 64)")->check(CLI::Range(4, 4096));
    spectrum->add_option("--jmax", jmax, "highest ladder level (default 3)")->check(CLI::Range(1, 10000));

    auto* eigf = app.add_subcommand("eigenfunction", "sample a fiber eigenfunction");
    common(eigf);
    tabular(eigf, "csv");
    eigf->add_option("--theta", theta_s, "quasimomentum, e.g. 1,2 or pi/2,pi")->required();
    eigf->add_option("--band", band_s, "band index n, or dirichlet[:s]");
    eigf->add_option("--j", j, "ladder level")->check(CLI::Range(0, 100000));
    eigf->add_option("--parity", parity_s, "even or odd (Dirichlet modes; default from --j)")
        ->check(CLI::IsMember({"even", "odd"}));
    eigf->add_option("--samples", samples, "points per edge (default 101)")->check(CLI::Range(2, 1000000));

    auto* scat = app.add_subcommand("scattering", "Fredholm determinant or Birman-Krein phase");
    common(scat);
    scat->add_option("--potential", potential, "potential JSON")->required();
    scat->add_option("--k", k_s, "wavenumber re,im with im > 0 (default 1,1)");
    scat->add_option("--grid", grid, "torus grid per axis (default 24)")->check(CLI::Range(4, 512));
    scat->add_option("--jmax", jmax, "ladder cutoff (default: tail policy)")->check(CLI::Range(0, 100000));
    scat->add_option("--quad", quad, "Simpson points per edge, odd (default 33)")->check(CLI::Range(3, 1001));
    scat->add_option("--terms", terms, "series terms (default 3)")->check(CLI::Range(0, 50));
    scat->add_flag("--bk-phase", bk, "compute the Birman-Krein phase at --E");
    scat->add_option("--E", E, "energy for --bk-phase (default 2)");
    scat->add_option("--eps", eps, "imaginary offset for --bk-phase (default 0.1)")->check(CLI::Range(1e-3, 1e-1));

    auto* cons = app.add_subcommand("constants", "graph constants");
    common(cons);
    cons->add_option("--grid", grid, "torus grid per axis (default 64)")->check(CLI::Range(4, 4096));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        FundamentalGraph g = load_graph(graph);
        if (format.empty()) format = *eigf ? "csv" : "json";
        Output o(out);
        std::ostream& os = o.os();

        if (*check) {
            if (emit) {
                os << serialize(g.to_spec());
                return 0;
            }
            bool ok = false;
            json rep = check_report(g, seed, ok);
            os << rep.dump(2) << "\n";
            return ok ? 0 : 1;
        }
        if (*bands) {
            int N = grid ? grid : 64;
            BandSurface s = band_sample(g, N);
            if (format == "csv") {
                for (int a = 1; a <= g.dim(); ++a) os << (a > 1 ? "," : "") << "theta" << a;
                for (int n = 1; n <= s.nu; ++n) os << ",lambda" << n;
                os << "\n";
                for (long node = 0; node < s.nodes(); ++node) {
                    QuasiMomentum t = grid_theta(N, g.dim(), node);
                    for (int a = 0; a < g.dim(); ++a) os << (a ? "," : "") << fmt12(t[a]);
                    for (int n = 1; n <= s.nu; ++n) os << "," << fmt12(s.at(node, n));
                    os << "\n";
                }
                return 0;
            }
            json jr;
            jr["graph"] = g.name();
            jr["grid"] = N;
            jr["band_edges"] = json::array();
            for (int n = 1; n <= s.nu; ++n) {
                Interval iv = band_edges(g, s, n);
                jr["band_edges"].push_back({jnum(iv.lo), jnum(iv.hi)});
            }
            jr["flat"] = json::array();
            for (const auto& f : detect_flat_bands(s)) jr["flat"].push_back({{"n", f.n}, {"value", jnum(f.value)}});
            os << jr.dump(2) << "\n";
            return 0;
        }
        if (*spectrum) {
            MetricSpectrum ms = metric_spectrum(g, jmax ? jmax : 3, grid ? grid : 64);
            os << spectrum_json(ms).dump(2) << "\n";
            return 0;
        }
        if (*eigf) {
            QuasiMomentum th = parse_list(theta_s);
            if (static_cast<int>(th.size()) != g.dim()) throw Error(ErrorKind::DimensionMismatch, "--theta needs dim components");
            EdgeWaveFunction wf;
            std::string label;
            if (band_s.rfind("dirichlet", 0) == 0) {
                int s = 1;
                if (band_s.size() > 9) {
                    if (band_s[9] != ':') throw UsageError("--band dirichlet[:s]");
                    s = std::stoi(band_s.substr(10));
                }
                if (j < 1) throw UsageError("Dirichlet modes need --j >= 1");
                Parity p = parity_s.empty() ? parity_of(j) : (parity_s == "even" ? Parity::Even : Parity::Odd);
                if (p != parity_of(j)) throw UsageError("--parity disagrees with --j");
                Eigen::MatrixXcd X = dirichlet_basis(g, p, th);
                if (s < 1 || s > X.cols()) throw Error(ErrorKind::OutOfRange, "Dirichlet mode index out of range");
                wf = dirichlet_eigenfunction(X.col(s - 1), j, th);
                label = "dirichlet:" + std::to_string(s);
            } else {
                int n = 0;
                try {
                    n = std::stoi(band_s);
                } catch (...) {
                    throw UsageError("--band must be an integer or dirichlet[:s]");
                }
                wf = vertex_eigenfunction(g, th, n, j);
                label = std::to_string(n);
            }
            double res = vertex_condition_residual(g, th, wf);
            NormCheck nc = norm_check(g, th, wf);
            if (format == "json") {
                json jr;
                jr["graph"] = g.name();
                jr["band"] = label;
                jr["j"] = j;
                jr["z"] = jnum(wf.z);
                jr["residual"] = jnum(res);
                jr["norm"] = jnum(nc.closed_form);
                jr["norm_quadrature"] = jnum(nc.quadrature);
                jr["sup"] = jnum(sup_norm(wf));
                jr["edges"] = json::array();
                for (int e = 0; e < g.num_edges(); ++e)
                    jr["edges"].push_back({{"edge", g.edge_names()[e]}, {"a", jcplx(wf.a[e])}, {"b", jcplx(wf.b[e])}});
                os << jr.dump(2) << "\n";
                return 0;
            }
            os << "edge,t,re,im\n";
            for (int e = 0; e < g.num_edges(); ++e)
                for (int i = 0; i < samples; ++i) {
                    double t = static_cast<double>(i) / (samples - 1);
                    cplx v = evaluate(wf, e, t);
                    os << g.edge_names()[e] << "," << fmt12(t) << "," << fmt12(v.real() == 0.0 ? 0.0 : v.real()) << ","
                       << fmt12(v.imag() == 0.0 ? 0.0 : v.imag()) << "\n";
                }
            os << "# residual=" << fmt12(res) << " norm=" << fmt12(nc.closed_form) << " sup=" << fmt12(sup_norm(wf))
               << "\n";
            return 0;
        }
        if (*scat) {
            Potential q = load_potential(g, potential);
            ScatteringOptions opt;
            if (grid) opt.N = grid;
            opt.jmax = jmax;
            opt.quad = quad;
            if (bk) {
                PhaseResult r = birman_krein_phase(g, q, E, eps, opt);
                json jr;
                jr["E"] = jnum(r.E);
                jr["eps"] = jnum(r.eps);
                jr["phase_eps"] = jcplx(r.phase_eps);
                jr["phase_half_eps"] = jcplx(r.phase_half);
                jr["phase"] = jcplx(r.extrapolated);
                jr["modulus"] = jnum(r.modulus);
                jr["change"] = jnum(r.change);
                jr["estimate"] = jnum(r.estimate);
                os << jr.dump(2) << "\n";
                return 0;
            }
            DeterminantResult r = determinant(g, q, parse_k(k_s), opt, terms);
            os << determinant_json(r).dump(2) << "\n";
            return 0;
        }
        if (*cons) {
            os << constants_json(g, grid ? grid : 64).dump(2) << "\n";
            return 0;
        }
    } catch (const ParseFailure& pf) {
        for (const auto& d : pf.diags) std::cerr << graph << ":" << format_diagnostic(d) << "\n";
        return 1;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
