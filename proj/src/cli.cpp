#include "berslab/cli.hpp"

#include "berslab/beltrami.hpp"
#include "berslab/grunsky.hpp"
#include "berslab/norms.hpp"
#include "berslab/polygon.hpp"
#include "berslab/schwarz_ode.hpp"
#include "berslab/theta.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

namespace berslab::cli {

using nlohmann::json;

std::vector<double> parse_t_grid(const std::string& spec)
{
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
    if (!spec.empty() && spec.back() == ':') parts.emplace_back();

    auto number = [&](const std::string& s) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != s.size() || !std::isfinite(v))
            throw ValidationError("t_grid", "malformed t grid '" + spec + "' (expected a:b:step)");
        return v;
    };

    std::vector<double> grid;
    if (parts.size() == 1) {
        grid.push_back(number(parts[0]));
    } else if (parts.size() == 3) {
        const double a = number(parts[0]), b = number(parts[1]), step = number(parts[2]);
        if (!(step > 0.0)) throw ValidationError("t_grid", "t grid step must be positive");
        const double slack = 1e-9 * step;
        for (std::size_t k = 0;; ++k) {
            double t = a + static_cast<double>(k) * step;
            if (t > b + slack) break;
            if (std::abs(t - b) <= slack) t = b;
            grid.push_back(t);
            if (grid.size() > 100000) throw ValidationError("t_grid", "t grid has more than 100000 points");
        }
    } else {
        throw ValidationError("t_grid", "malformed t grid '" + spec + "' (expected a:b:step)");
    }
    if (grid.empty()) throw ValidationError("empty_grid", "t grid '" + spec + "' contains no points");
    for (double t : grid)
        if (!(t > 0.0 && t <= 1.0)) throw ValidationError("t_range", "t grid values must lie in (0, 1]");
    return grid;
}

namespace {

struct Options {
    ExperimentConfig cfg;
    bool json_output = false;
    double t = 0.0;
    bool t_given = false;
    std::string variant = "homotopy";
    std::string probe_variant = "both";
    std::string pairs = "upper";
    double scale = 0.5;
    int samples = 32;
    int theta_samples = 4;
    int grid_nx = 40;
    int grid_ny = 20;
    std::string generators;
    bool traces = false;
};

PolygonSpec polygon_of(const Options& o)
{
    if (o.cfg.polygon_path.empty()) throw ValidationError("polygon", "--polygon is required");
    if (!std::filesystem::exists(o.cfg.polygon_path))
        throw ValidationError("file", "polygon file '" + o.cfg.polygon_path + "' does not exist");
    return load_polygon(o.cfg.polygon_path);
}

std::filesystem::path out_dir(const Options& o)
{
    std::filesystem::path dir(o.cfg.out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir))
        throw ValidationError("out_dir", "cannot create output directory '" + o.cfg.out_dir + "'");
    return dir;
}

void write_file(const std::filesystem::path& path, const std::string& content)
{
    std::ofstream f(path, std::ios::binary);
    f << content;
    if (!f) throw ValidationError("out_dir", "cannot write '" + path.string() + "'");
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json pair_of(Complex z) { return json::array({z.real(), z.imag()}); }

// The probe parameter when --t is absent: the critical point of either family.
double t_of(const Options& o, ProbeVariant v, const PolygonSpec& p)
{
    if (o.t_given) return o.t;
    return v == ProbeVariant::scaled ? 1.0 : critical_radius(p).r0;
}

std::vector<Complex> seeded_samples(std::uint64_t seed, int count)
{
    std::mt19937_64 rng(seed);
    std::vector<Complex> z;
    for (int k = 0; k < count; ++k) {
        const double x = -1.0 + 2.0 * static_cast<double>(rng() >> 11) * 0x1.0p-53;
        const double y = 0.3 + 1.7 * static_cast<double>(rng() >> 11) * 0x1.0p-53;
        z.emplace_back(x, y);
    }
    return z;
}

HolomorphicFunction quartic()
{
    return {[](Complex z) { return 1.0 / std::pow(z + I, 4); }, {}};
}

std::vector<MoebiusTransform> generators_of(const Options& o)
{
    if (!o.generators.empty()) return load_generators(o.generators);
    return {MoebiusTransform::hyperbolic(1.0, 2.0, 6.0), MoebiusTransform::hyperbolic(-2.0, -1.0, 6.0)};
}

NormEstimate norm_in(const PoleExpansion& phi, NormModel model)
{
    switch (model) {
    case NormModel::disk: return hyperbolic_sup_norm(cayley_transport(as_function(phi)), NormModel::disk);
    case NormModel::becker: return exterior_becker_norm(phi);
    default: return hyperbolic_sup_norm(phi, model);
    }
}

json critical_radius_json(const PolygonSpec& p, const CriticalRadius& cr, const std::string& pairs)
{
    return {{"schema", "berslab.critical_radius/1"},
            {"n", p.size()},
            {"pair_sum", pairs},
            {"a", cr.a},
            {"b", cr.b},
            {"c", cr.c},
            {"r0", cr.r0},
            {"discriminant", cr.discriminant()},
            {"residual", cr.residual()}};
}

int cmd_critical_radius(const Options& o, std::ostream& out)
{
    const PolygonSpec p = polygon_of(o);
    PairSum pairs = PairSum::upper_triangle;
    if (o.pairs == "full") pairs = PairSum::full;
    else if (o.pairs == "off") pairs = PairSum::off_diagonal;
    const auto cr = critical_radius(p, pairs);
    const json j = critical_radius_json(p, cr, o.pairs);
    if (o.json_output) {
        out << dump(j);
    } else {
        auto term = [](double v) { return (v < 0.0 ? " - " : " + ") + (std::ostringstream() << std::setprecision(10) << std::abs(v)).str(); };
        out << std::setprecision(10) << "quadratic: " << cr.a << " r^2" << term(cr.b) << " r" << term(cr.c) << " = 0\n"
            << std::fixed << std::setprecision(6) << "r0 = " << cr.r0 << '\n';
        out.unsetf(std::ios::floatfield);
    }
    if (!o.cfg.out_dir.empty()) write_file(out_dir(o) / "critical_radius.json", dump(j));
    return 0;
}

// Distance of q from the line through a and b, relative to |b - a|.
double line_residual(Complex a, Complex b, Complex q)
{
    const Complex d = b - a;
    return std::abs((std::conj(d) * (q - a)).imag()) / std::norm(d);
}

int cmd_sc_trace(const Options& o, std::ostream& out)
{
    const PolygonSpec p = polygon_of(o);
    const BoundaryPolyline poly = image_polygon(p, o.samples);
    const auto& pts = poly.points;
    const std::size_t m = pts.size() - 1;   // the last point returns to the first
    const std::size_t n = p.size();

    json vertices = json::array();
    double worst_angle = 0.0, worst_line = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t at = poly.vertex_index[j];
        const std::size_t end = j + 1 < n ? poly.vertex_index[j + 1] : pts.size() - 1;
        const Complex a = pts[at], b = pts[j + 1 < n ? poly.vertex_index[j + 1] : poly.vertex_index[0]];
        double line = 0.0;
        for (std::size_t k = at + 1; k < end; ++k) line = std::max(line, line_residual(a, b, pts[k]));
        const Complex prev = pts[(at + m - 1) % m], next = pts[(at + 1) % m];
        const double turn = std::arg((next - pts[at]) / (pts[at] - prev));
        const double want = std::numbers::pi * (1.0 - p.alphas()[j]);
        worst_angle = std::max(worst_angle, std::abs(turn - want));
        worst_line = std::max(worst_line, line);
        vertices.push_back({{"index", j + 1},
                            {"prevertex", p.prevertices()[j]},
                            {"image", pair_of(a)},
                            {"turning_angle", turn},
                            {"expected_turning_angle", want},
                            {"edge_line_residual", line}});
    }
    const json j = {{"schema", "berslab.sc_trace/1"},
                    {"closure_gap", poly.closure_gap},
                    {"max_turning_angle_error", worst_angle},
                    {"max_edge_line_residual", worst_line},
                    {"image_of_infinity", pair_of(pts[poly.infinity_index])},
                    {"vertices", vertices}};
    if (o.json_output) {
        out << dump(j);
    } else {
        out << std::setprecision(3) << std::scientific << "closure gap " << poly.closure_gap
            << ", max turning-angle error " << worst_angle << ", max edge residual " << worst_line << '\n';
        out.unsetf(std::ios::floatfield);
    }
    if (!o.cfg.out_dir.empty()) {
        const auto dir = out_dir(o);
        write_file(dir / "sc_trace.json", dump(j));
        std::ostringstream csv;
        csv << "# schema=berslab.sc_trace_points/1\nindex,re,im,vertex\n" << std::setprecision(17);
        for (std::size_t k = 0; k < pts.size(); ++k) {
            const auto v = std::find(poly.vertex_index.begin(), poly.vertex_index.end(), k);
            csv << k << ',' << pts[k].real() << ',' << pts[k].imag() << ','
                << (v == poly.vertex_index.end() ? 0 : static_cast<long>(v - poly.vertex_index.begin()) + 1) << '\n';
        }
        write_file(dir / "sc_trace.csv", csv.str());
    }
    return 0;
}

std::vector<ProbeVariant> variants_of(const std::string& name)
{
    if (name == "both") return {ProbeVariant::scaled, ProbeVariant::homotopy};
    return {parse_variant(name)};
}

int cmd_ray_probe(const Options& o, std::ostream& out)
{
    const PolygonSpec p = polygon_of(o);
    const auto grid = parse_t_grid(o.cfg.t_grid);
    ProbeOptions opts;
    opts.variants = variants_of(o.probe_variant);
    opts.keep_traces = o.traces && !o.cfg.out_dir.empty();
    const ProbeReport report = ray_probe(p, grid, opts);

    std::ostringstream csv;
    write_probe_csv(csv, report);
    out << csv.str();
    if (!o.cfg.out_dir.empty()) {
        const auto dir = out_dir(o);
        write_file(dir / "ray_probe.csv", csv.str());
        write_file(dir / "ray_probe.json", dump(json(report)));
        if (opts.keep_traces) {
            std::filesystem::create_directories(dir / "traces");
            for (std::size_t k = 0; k < report.rows.size(); ++k) {
                const auto& row = report.rows[k];
                if (!row.trace) continue;
                std::ostringstream t;
                write_trace_csv(t, *row.trace);
                write_file(dir / "traces" / ("trace_" + std::string(to_string(row.variant)) + "_" + std::to_string(k) + ".csv"),
                           t.str());
            }
        }
    }
    const bool any_ok = std::any_of(report.rows.begin(), report.rows.end(), [](const ProbeRow& r) { return r.ok; });
    return any_ok ? 0 : 1;
}

int cmd_bnorm(const Options& o, std::ostream& out)
{
    const PolygonSpec p = polygon_of(o);
    const ProbeVariant v = parse_variant(o.variant);
    const double t = t_of(o, v, p);
    const auto phi = probe_schwarzian(p, v, t);
    std::vector<std::string> names = o.cfg.conventions;
    if (names.empty()) names.emplace_back("hp1");
    json results = json::array();
    for (const auto& name : names) {
        const auto e = norm_in(phi, NormConvention::parse(name).model);
        json row = e;
        results.push_back(row);
    }
    json j = {{"schema", "berslab.bnorm/1"}, {"variant", to_string(v)}, {"t", t}};
    if (results.size() == 1) {
        for (auto& [key, value] : results[0].items()) j[key] = value;
    } else {
        j["norms"] = results;
    }
    out << dump(j);
    if (!o.cfg.out_dir.empty()) write_file(out_dir(o) / "bnorm.json", dump(j));
    return 0;
}

json beltrami_json(const AhlforsWeillReport& r)
{
    json j = r;
    j["schema"] = "berslab.beltrami/1";
    return j;
}

int cmd_beltrami(const Options& o, std::ostream& out)
{
    const PolygonSpec p = polygon_of(o);
    const ProbeVariant v = parse_variant(o.variant);
    const double t = t_of(o, v, p);
    const BeltramiField field = ahlfors_weill_field(probe_schwarzian(p, v, t), o.scale);
    json j = beltrami_json(ahlfors_weill_report(field));
    j["variant"] = to_string(v);
    j["t"] = t;
    out << dump(j);
    if (!o.cfg.out_dir.empty()) {
        const auto dir = out_dir(o);
        write_file(dir / "beltrami.json", dump(j));
        const auto& a = p.prevertices();
        std::ostringstream csv;
        write_field_grid(csv, field, a.front() - 1.0, a.back() + 1.0, -2.0, -0.02, o.grid_nx, o.grid_ny);
        write_file(dir / "beltrami_grid.csv", csv.str());
    }
    return 0;
}

std::vector<std::size_t> doubling_sizes(std::size_t n)
{
    std::vector<std::size_t> sizes;
    for (std::size_t k = 1; k < n; k *= 2) sizes.push_back(k);
    sizes.push_back(n);
    return sizes;
}

json grunsky_json(const PoleExpansion& phi, const Options& o, GrunskyMatrix* matrix_out)
{
    if (o.cfg.grunsky_n < 1) throw ValidationError("truncation", "--N must be at least 1");
    const auto f = exterior_expansion_from_schwarzian(phi, o.cfg.grunsky_n, o.cfg.grunsky_m);
    const double beltrami = field_sup_norm(ahlfors_weill_field(phi, 0.5)).value;
    const auto report = grunsky_report(f, doubling_sizes(o.cfg.grunsky_n), beltrami);
    const auto m = grunsky_matrix(f, o.cfg.grunsky_n);
    json j = report;
    j["N"] = o.cfg.grunsky_n;
    j["M"] = o.cfg.grunsky_m;
    j["symmetry_defect"] = m.symmetry_defect;
    j["ill_conditioned"] = m.ill_conditioned;
    if (matrix_out) *matrix_out = m;
    return j;
}

int cmd_grunsky(const Options& o, std::ostream& out)
{
    const PolygonSpec p = polygon_of(o);
    const ProbeVariant v = parse_variant(o.variant);
    const double t = t_of(o, v, p);
    GrunskyMatrix m;
    json j = grunsky_json(probe_schwarzian(p, v, t), o, &m);
    j["variant"] = to_string(v);
    j["t"] = t;
    out << dump(j);
    if (!o.cfg.out_dir.empty()) {
        const auto dir = out_dir(o);
        write_file(dir / "grunsky.json", dump(j));
        std::ostringstream csv;
        write_grunsky_csv(csv, m);
        write_file(dir / "grunsky_matrix.csv", csv.str());
    }
    return 0;
}

json theta_json(const Options& o, std::vector<EquivarianceRow>* rows_out)
{
    if (o.theta_samples < 1) throw ValidationError("samples", "--samples must be at least 1");
    const auto gens = generators_of(o);
    const auto samples = seeded_samples(o.cfg.seed, o.theta_samples);
    const auto rows = equivariance_table(quartic(), gens, o.cfg.theta_l, samples);
    const auto value = theta_series(quartic(), enumerate_ball(gens, o.cfg.theta_l), samples.front());
    json pts = json::array();
    for (const Complex& z : samples) pts.push_back(pair_of(z));
    json j = {{"schema", "berslab.theta/1"},
              {"phi", "1/(z+i)^4"},
              {"generators", generators_to_json(gens)},
              {"L", o.cfg.theta_l},
              {"seed", o.cfg.seed},
              {"samples", pts},
              {"table", rows},
              {"value_at_first_sample", pair_of(value.value)},
              {"shell_magnitudes", value.shell_magnitudes},
              {"convergent", value.convergent}};
    if (rows_out) *rows_out = rows;
    return j;
}

int cmd_theta(const Options& o, std::ostream& out)
{
    std::vector<EquivarianceRow> rows;
    const json j = theta_json(o, &rows);
    std::ostringstream csv;
    csv << "# schema=berslab.theta_residuals/1\nL,elements,residual,tail_estimate\n" << std::setprecision(12);
    for (const auto& r : rows) csv << r.max_word_length << ',' << r.elements << ',' << r.residual << ',' << r.tail_estimate << '\n';
    out << csv.str();
    if (!o.cfg.out_dir.empty()) {
        const auto dir = out_dir(o);
        write_file(dir / "theta.json", dump(j));
        write_file(dir / "theta_residuals.csv", csv.str());
    }
    return 0;
}

int cmd_report(const Options& o, std::ostream& out)
{
    const PolygonSpec p = polygon_of(o);
    const ProbeVariant v = parse_variant(o.variant);
    const double t = t_of(o, v, p);
    const auto phi = probe_schwarzian(p, v, t);

    const auto hp1 = hyperbolic_sup_norm(phi, NormModel::half_plane_1);
    const auto hp4 = hyperbolic_sup_norm(phi, NormModel::half_plane_4);
    const auto aw = ahlfors_weill_report(ahlfors_weill_field(phi, 0.5));
    json norms = json::object();
    norms["hp1"] = hp1;
    norms["hp4"] = hp4;
    for (const auto& name : o.cfg.conventions) {
        const auto conv = NormConvention::parse(name);
        if (conv.model == NormModel::half_plane_1 || conv.model == NormModel::half_plane_4) continue;
        norms[conv.name()] = norm_in(phi, conv.model);
    }

    json j = {{"schema", "berslab.report/1"},
              {"polygon", polygon_to_json(p)},
              {"variant", to_string(v)},
              {"t", t},
              {"seed", o.cfg.seed},
              {"critical_radius", critical_radius_json(p, critical_radius(p), "upper")},
              {"norm_hp1", hp1.value},
              {"norm_hp4", hp4.value},
              {"beltrami_norm", aw.field_norm},
              {"norms", norms},
              {"ahlfors_weill", beltrami_json(aw)},
              {"grunsky", grunsky_json(phi, o, nullptr)},
              {"theta", theta_json(o, nullptr)}};
    out << dump(j);
    if (!o.cfg.out_dir.empty()) write_file(out_dir(o) / "report.json", dump(j));
    return 0;
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    Options o;
    CLI::App app{"berslab: Schwarzians of polygon maps, hyperbolic norms and univalence probes"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand");

    auto polygon = [&](CLI::App* s) { s->add_option("--polygon", o.cfg.polygon_path, "Polygon JSON file")->required(); };
    auto out_opt = [&](CLI::App* s) { s->add_option("--out", o.cfg.out_dir, "Directory for JSON/CSV outputs"); };
    auto family = [&](CLI::App* s) {
        s->add_option("--variant", o.variant, "scaled (t * S at r0) or homotopy (S_t)")
            ->check(CLI::IsMember({"scaled", "homotopy"}));
        s->add_option("--t", o.t, "Family parameter (default: 1 for scaled, r0 for homotopy)");
    };

    auto* cr = app.add_subcommand("critical-radius", "Quadratic for the critical radius and its positive root");
    polygon(cr);
    out_opt(cr);
    cr->add_option("--pairs", o.pairs, "Pair-sum reading: upper (j<l), full or off")->check(CLI::IsMember({"upper", "full", "off"}));
    cr->add_flag("--json", o.json_output, "Print JSON instead of text");

    auto* sc = app.add_subcommand("sc-trace", "Boundary of the polygon map: closure, angles and edges");
    polygon(sc);
    out_opt(sc);
    sc->add_option("--samples", o.samples, "Samples per edge")->check(CLI::PositiveNumber);
    sc->add_flag("--json", o.json_output, "Print JSON instead of text");

    auto* rp = app.add_subcommand("ray-probe", "Simplicity of the boundary image along the t grid");
    polygon(rp);
    out_opt(rp);
    rp->add_option("--t-grid", o.cfg.t_grid, "a:b:step within (0, 1]");
    rp->add_option("--variant", o.probe_variant, "scaled, homotopy or both")
        ->check(CLI::IsMember({"scaled", "homotopy", "both"}));
    rp->add_flag("--traces", o.traces, "Also write every boundary trace under --out");

    auto* bn = app.add_subcommand("bnorm", "Hyperbolic sup-norm of a family member");
    polygon(bn);
    out_opt(bn);
    family(bn);
    bn->add_option("--convention", o.cfg.conventions, "hp1, hp4, disk or becker (repeatable)")
        ->check(CLI::IsMember({"hp1", "hp4", "disk", "becker"}));

    auto* be = app.add_subcommand("beltrami", "Harmonic Beltrami coefficient and its norm");
    polygon(be);
    out_opt(be);
    family(be);
    be->add_option("--scale", o.scale, "Coefficient factor in nu = -scale y^2 phi(conj z)");
    be->add_option("--nx", o.grid_nx, "Grid columns for the CSV dump")->check(CLI::PositiveNumber);
    be->add_option("--ny", o.grid_ny, "Grid rows for the CSV dump")->check(CLI::PositiveNumber);

    auto* gr = app.add_subcommand("grunsky", "Truncated Grunsky operator norms");
    polygon(gr);
    out_opt(gr);
    family(gr);
    gr->add_option("--N", o.cfg.grunsky_n, "Truncation size");
    gr->add_option("--M", o.cfg.grunsky_m, "Contour nodes (at least 8N)");

    auto* th = app.add_subcommand("theta", "Theta series equivariance residuals");
    out_opt(th);
    th->add_option("--generators", o.generators, "Generator JSON (default: a two-generator Schottky group)");
    th->add_option("--L", o.cfg.theta_l, "Maximal word length");
    th->add_option("--seed", o.cfg.seed, "Seed for the sample points");
    th->add_option("--samples", o.theta_samples, "Number of sample points");

    auto* rep = app.add_subcommand("report", "Combined JSON: norms, Beltrami, Grunsky and theta");
    polygon(rep);
    out_opt(rep);
    family(rep);
    rep->add_option("--convention", o.cfg.conventions, "Extra norm conventions (disk, becker)")
        ->check(CLI::IsMember({"hp1", "hp4", "disk", "becker"}));
    rep->add_option("--N", o.cfg.grunsky_n, "Grunsky truncation size");
    rep->add_option("--M", o.cfg.grunsky_m, "Contour nodes");
    rep->add_option("--L", o.cfg.theta_l, "Theta word length");
    rep->add_option("--seed", o.cfg.seed, "Seed for the theta sample points");
    rep->add_option("--generators", o.generators, "Generator JSON for the theta section");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? 0 : 2;
    }

    try {
        const CLI::App* sub = app.get_subcommands().front();
        const std::string name = sub->get_name();
        const CLI::Option* t_opt = sub->get_option_no_throw("--t");
        o.t_given = t_opt != nullptr && t_opt->count() > 0;
        if (name == "critical-radius") return cmd_critical_radius(o, out);
        if (name == "sc-trace") return cmd_sc_trace(o, out);
        if (name == "ray-probe") return cmd_ray_probe(o, out);
        if (name == "bnorm") return cmd_bnorm(o, out);
        if (name == "beltrami") return cmd_beltrami(o, out);
        if (name == "grunsky") return cmd_grunsky(o, out);
        if (name == "theta") return cmd_theta(o, out);
        return cmd_report(o, out);
    } catch (const ValidationError& e) {
        err << "error [" << e.code() << "]: " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        err << "error [" << e.code() << "]: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

} // namespace berslab::cli
