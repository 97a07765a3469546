#include "berslab/schwarz_ode.hpp"

#include "berslab/parallel.hpp"
#include "berslab/schwarzian.hpp"

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <numbers>
#include <ostream>

namespace berslab {

namespace {

namespace odeint = boost::numeric::odeint;
using State = std::array<double, 8>;
constexpr double pi = std::numbers::pi;

State pack(const CompanionState& s)
{
    State x{};
    for (int k = 0; k < 4; ++k) {
        x[2 * k] = s.y[k].real();
        x[2 * k + 1] = s.y[k].imag();
    }
    return x;
}

CompanionState unpack(const State& x)
{
    CompanionState s;
    for (int k = 0; k < 4; ++k) s.y[k] = {x[2 * k], x[2 * k + 1]};
    return s;
}

// A path z(s) with its derivative; the parameter always increases.
struct PathPiece {
    std::function<Complex(double)> z;
    std::function<Complex(double)> dz;
};

PathPiece segment(Complex a, Complex b)
{
    return {[=](double s) { return a + s * (b - a); }, [=](double) { return b - a; }};
}

PathPiece real_axis()
{
    return {[](double s) { return Complex(s, 0.0); }, [](double) { return Complex(1.0, 0.0); }};
}

// Upper semicircle around c from c - r (s = 0) to c + r (s = pi).
PathPiece upper_arc(Complex c, double r)
{
    return {[=](double s) { return c + std::polar(r, pi - s); },
            [=](double s) { return Complex(0.0, -1.0) * std::polar(r, pi - s); }};
}

class Integrator {
public:
    Integrator(std::function<Complex(Complex)> phi, const OdeOptions& o) : phi_(std::move(phi)), opt_(o) {}

    void advance(CompanionState& st, const PathPiece& path, double s0, double s1)
    {
        if (!(s1 > s0)) return;
        State x = pack(st);
        auto system = [&](const State& y, State& dy, double s) {
            const Complex dz = path.dz(s);
            const Complex half_phi = 0.5 * phi_(path.z(s));
            for (int k = 0; k < 2; ++k) {
                const Complex u(y[4 * k], y[4 * k + 1]), du(y[4 * k + 2], y[4 * k + 3]);
                const Complex a = du * dz, b = -half_phi * u * dz;
                dy[4 * k] = a.real();
                dy[4 * k + 1] = a.imag();
                dy[4 * k + 2] = b.real();
                dy[4 * k + 3] = b.imag();
            }
        };
        auto stepper =
            odeint::make_controlled(opt_.abs_tol, opt_.rel_tol, odeint::runge_kutta_fehlberg78<State>());
        double s = s0;
        double free_dt = std::min(dt_, s1 - s0);
        std::size_t guard = 0;
        while (s < s1) {
            const bool clipped = free_dt >= s1 - s;
            double h = clipped ? s1 - s : free_dt;
            if (stepper.try_step(system, x, s, h) == odeint::success) {
                if (!clipped) free_dt = h;
                else free_dt = std::max(free_dt, h);
                if (clipped) s = s1; // guard against round-off in the last step
            } else {
                free_dt = h;
                if (h < 1e-15 * std::max(1.0, std::abs(s)))
                    throw NumericalError("step_underflow", "step size underflow in the companion equation");
            }
            if (++guard > 5'000'000)
                throw NumericalError("step_limit", "too many steps in the companion equation");
        }
        dt_ = free_dt;
        st = unpack(x);
        const double drift = std::abs(st.wronskian() - 1.0);
        max_drift_ = std::max(max_drift_, drift);
        if (!(drift <= opt_.wronskian_abort))
            throw NumericalError("wronskian_drift", "Wronskian drifted from 1 beyond tolerance");
    }

    [[nodiscard]] double max_drift() const { return max_drift_; }

private:
    std::function<Complex(Complex)> phi_;
    OdeOptions opt_;
    double dt_ = 1e-2;
    double max_drift_ = 0.0;
};

void check_segment_clearance(const PoleExpansion& phi, Complex a, Complex b, double min_distance)
{
    if (a.imag() < 0.0 || b.imag() < 0.0)
        throw ValidationError("outside_domain", "path leaves the closed upper half-plane");
    for (double p : phi.poles()) {
        const Complex d = b - a;
        const double len2 = std::norm(d);
        double s = len2 > 0 ? ((Complex(p, 0.0) - a) * std::conj(d)).real() / len2 : 0.0;
        s = std::clamp(s, 0.0, 1.0);
        if (std::abs(a + s * d - p) < min_distance)
            throw ValidationError("path_near_pole", "path passes too close to a pole");
    }
}

// Frobenius solutions x^rho * sum g_n x^n of u'' + (1/2)(sum p_k x^(k-2)) u = 0.
struct Frobenius {
    LocalExponents ex;
    Complex rho_plus, rho_minus;
    std::vector<Complex> g_plus, g_minus; // g_minus empty when the series does not exist

    static std::vector<Complex> series(const std::vector<Complex>& p, Complex rho, std::size_t terms,
                                       bool& ok)
    {
        std::vector<Complex> g(terms);
        g[0] = 1.0;
        ok = true;
        for (std::size_t n = 1; n < terms; ++n) {
            const Complex den = double(n) * (double(n) + 2.0 * rho - 1.0);
            if (std::abs(den) < 1e-6 * double(n)) {
                ok = false;
                return {};
            }
            Complex acc{};
            for (std::size_t k = 1; k <= n && k < p.size(); ++k) acc += p[k] * g[n - k];
            g[n] = -0.5 * acc / den;
        }
        return g;
    }

    static Frobenius build(const std::vector<Complex>& p, std::size_t terms)
    {
        Frobenius f;
        f.ex = local_exponents(p[0]);
        f.rho_plus = 0.5 * (1.0 + f.ex.kappa);
        f.rho_minus = 0.5 * (1.0 - f.ex.kappa);
        bool ok = true;
        f.g_plus = series(p, f.rho_plus, terms, ok);
        if (!f.ex.resonant) {
            f.g_minus = series(p, f.rho_minus, terms, ok);
            if (!ok) f.ex.resonant = true;
        }
        return f;
    }

    [[nodiscard]] bool complete() const { return !g_minus.empty() && !g_plus.empty(); }

    // y and dy/dx at x in the closed upper half-plane (principal branch, arg x in [0, pi]).
    static void eval(const std::vector<Complex>& g, Complex rho, Complex x, Complex& y, Complex& dy)
    {
        Complex s{}, ds{};
        for (std::size_t n = g.size(); n-- > 0;) {
            s = s * x + g[n];
            if (n > 0) ds = ds * x + double(n) * g[n];
        }
        const Complex xr = std::exp(rho * std::log(x));
        y = xr * s;
        dy = xr * (rho * s / x + ds);
    }
};

std::vector<double> log_steps(double from, double to, std::size_t count)
{
    // count points strictly after `from`, ending exactly at `to`, geometric spacing
    std::vector<double> d(count);
    for (std::size_t k = 1; k <= count; ++k)
        d[k - 1] = from * std::pow(to / from, double(k) / double(count));
    d.back() = to;
    return d;
}

std::size_t spiral_count(std::size_t base, double ratio, const LocalExponents& ex, double per_turn)
{
    if (!ex.spiral) return base;
    const double turns = std::log(ratio) * std::abs(ex.kappa.imag()) / (2.0 * pi);
    return std::max(base, static_cast<std::size_t>(std::ceil(turns * per_turn)));
}

struct Recorder {
    std::vector<Complex> params, points;
    void push(Complex param, Complex w)
    {
        params.push_back(param);
        points.push_back(w);
    }
};

// Detour around a regular singular point `c` of the current chart. `to_param` converts a
// chart point into the boundary parameter stored with each sample.
void detour(Integrator& integ, CompanionState& st, Complex c, double r, const Frobenius& fr,
            const TraceOptions& opt, const std::function<Complex(Complex)>& to_param, Recorder& rec,
            std::optional<Complex>& vertex_w)
{
    const PathPiece arc = upper_arc(c, r);
    auto match = [&](Complex x, std::array<Complex, 2>& A, std::array<Complex, 2>& B) {
        Complex yp, dyp, ym, dym;
        Frobenius::eval(fr.g_plus, fr.rho_plus, x, yp, dyp);
        Frobenius::eval(fr.g_minus, fr.rho_minus, x, ym, dym);
        const Complex wr = yp * dym - ym * dyp;
        for (int i = 0; i < 2; ++i) {
            const Complex u = st.y[2 * i], du = st.y[2 * i + 1];
            A[i] = (u * dym - du * ym) / wr;
            B[i] = (yp * du - dyp * u) / wr;
        }
    };

    if (fr.ex.spiral && fr.complete()) {
        integ.advance(st, arc, 0.0, 0.5 * pi);
        std::array<Complex, 2> A, B;
        match(Complex(0.0, r), A, B);
        auto w_at = [&](Complex x) {
            Complex yp, dyp, ym, dym;
            Frobenius::eval(fr.g_plus, fr.rho_plus, x, yp, dyp);
            Frobenius::eval(fr.g_minus, fr.rho_minus, x, ym, dym);
            return (A[0] * yp + B[0] * ym) / (A[1] * yp + B[1] * ym);
        };
        const std::size_t k = spiral_count(8, r / opt.inner_radius, fr.ex, opt.samples_per_turn);
        for (double d : log_steps(r, opt.inner_radius, k)) {
            const Complex x(-d, 0.0);
            rec.push(to_param(c + x), w_at(x));
        }
        for (int m = 1; m < opt.arc_samples; ++m) {
            const Complex x = std::polar(opt.inner_radius, pi - pi * m / opt.arc_samples);
            rec.push(to_param(c + x), w_at(x));
        }
        const auto outward = log_steps(opt.inner_radius, r, k);
        rec.push(to_param(c + opt.inner_radius), w_at(Complex(opt.inner_radius, 0.0)));
        for (std::size_t m = 0; m + 1 < outward.size(); ++m) {
            const Complex x(outward[m], 0.0);
            rec.push(to_param(c + x), w_at(x));
        }
        integ.advance(st, arc, 0.5 * pi, pi);
        rec.push(to_param(c + r), st.w());
        return;
    }

    const int half = std::max(1, opt.arc_samples / 2);
    double s = 0.0;
    for (int m = 1; m <= 2 * half; ++m) {
        const double next = pi * m / (2 * half);
        integ.advance(st, arc, s, next);
        s = next;
        if (m == half) {
            if (fr.complete() && !fr.ex.spiral) {
                std::array<Complex, 2> A, B;
                match(Complex(0.0, r), A, B);
                vertex_w = B[0] / B[1];
            } else if (!fr.ex.spiral) {
                vertex_w = st.w();
            }
        }
        rec.push(to_param(m == 2 * half ? c + r : arc.z(s)), st.w());
    }
}

} // namespace

LocalExponents local_exponents(Complex p0)
{
    LocalExponents e;
    e.kappa = std::sqrt(1.0 - 2.0 * p0);
    const double re = e.kappa.real(), im = e.kappa.imag();
    e.resonant = std::abs(im) < 1e-9 && std::abs(re - std::round(re)) < 1e-9;
    e.spiral = !e.resonant && std::abs(im) > 1e-12;
    return e;
}

SchwarzSolution solve_companion(const PoleExpansion& phi, const std::vector<Complex>& path,
                                const OdeOptions& options)
{
    std::vector<Complex> pts;
    pts.push_back(options.base);
    for (const Complex& z : path)
        if (!(pts.size() == 1 && z == options.base)) pts.push_back(z);
    for (std::size_t k = 0; k + 1 < pts.size(); ++k)
        check_segment_clearance(phi, pts[k], pts[k + 1], options.min_pole_distance);
    if (options.base.imag() <= 0.0)
        throw ValidationError("outside_domain", "base point must lie in the upper half-plane");

    Integrator integ([&](Complex z) { return phi.evaluate(z); }, options);
    CompanionState st;
    std::vector<SchwarzSolution::Checkpoint> cps{{pts[0], st}};
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
        integ.advance(st, segment(pts[k], pts[k + 1]), 0.0, 1.0);
        cps.push_back({pts[k + 1], st});
    }
    return {phi, options.base, std::move(cps), integ.max_drift()};
}

Complex schwarz_map(const PoleExpansion& phi, Complex z, const OdeOptions& options)
{
    return solve_companion(phi, {z}, options).checkpoints().back().state.w();
}

HolomorphicFunction exterior_pre_schwarzian(const PoleExpansion& phi, const OdeOptions& options)
{
    OdeOptions opts = options;
    opts.base = I;
    HolomorphicFunction out;
    out.eval = [phi, opts](Complex z) {
        const Complex t = cayley_exterior(z);
        const auto& y = solve_companion(phi, {t}, opts).checkpoints().back().state.y;
        // w''/w' = -2 u2'/u2 because w' = -W / u2^2 with constant Wronskian W
        const Complex d = z - 1.0;
        const Complex dt = -2.0 * I / (d * d);
        return -2.0 * y[3] / y[2] * dt - 2.0 / d;
    };
    for (double a : phi.poles()) out.hot_points.push_back(cayley_exterior_inverse(Complex(a, 0.0)));
    out.hot_points.emplace_back(1.0, 0.0);
    return out;
}

NormEstimate exterior_becker_norm(const PoleExpansion& phi, const SamplingBudget& budget, const OdeOptions& options)
{
    OdeOptions opts = options;
    opts.min_pole_distance = std::min(opts.min_pole_distance, 1e-6);
    const auto psi = exterior_pre_schwarzian(phi, opts);
    HolomorphicFunction guarded{[eval = psi.eval](Complex z) {
                                    try {
                                        return eval(z);
                                    } catch (const Error&) {
                                        // too close to a prevertex for the integrator: skip the point
                                        return Complex(std::numeric_limits<double>::quiet_NaN(), 0.0);
                                    }
                                },
                                psi.hot_points};
    return hyperbolic_sup_norm(guarded, NormModel::becker, budget);
}

BoundaryTrace trace_boundary(const PoleExpansion& phi, const TraceOptions& opt)
{
    const auto& a = phi.poles();
    const std::size_t n = a.size();
    const std::size_t samples = opt.n_samples == 0 ? 64 * (n + 1) : opt.n_samples;
    if (samples < 8 * n)
        throw ValidationError("too_few_samples", "trace needs at least 8 samples per pole");
    const double r = opt.detour_radius;
    double min_gap = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j + 1 < n; ++j) min_gap = std::min(min_gap, a[j + 1] - a[j]);
    if (!(r > 0.0) || !(r < 0.25 * min_gap))
        throw ValidationError("detour_radius", "detour radius must be positive and below a quarter of the pole spacing");
    if (!(opt.inner_radius > 0.0 && opt.inner_radius < r) || opt.arc_samples < 2)
        throw ValidationError("trace_options", "inner radius must lie in (0, detour radius); arc samples >= 2");

    double amax = 0.0;
    for (double x : a) amax = std::max(amax, std::abs(x));
    const double X = 2.0 * amax + 1.0;

    // Chart at infinity: zeta = -1/z, U = zeta u, phi~(zeta) = phi(-1/zeta) zeta^-4.
    const std::size_t q_terms = 72;
    const auto q = phi.laurent_at_infinity(q_terms);
    if (std::abs(q[0]) + std::abs(q[1]) > 1e-10 * (1.0 + std::abs(q[2]) + std::abs(q[3])))
        throw ValidationError("not_decaying", "phi must decay like z^-2 at infinity");
    std::vector<Complex> qt(q_terms - 2);
    for (std::size_t m = 0; m + 2 < q_terms; ++m) qt[m] = (m % 2 ? -1.0 : 1.0) * q[m + 2];
    auto phi_inf = [qt](Complex zeta) {
        Complex s{};
        for (std::size_t m = qt.size(); m-- > 0;) s = s * zeta + qt[m];
        return s / (zeta * zeta);
    };

    const std::size_t series_terms = 40;
    std::vector<Frobenius> local;
    for (std::size_t j = 0; j < n; ++j) local.push_back(Frobenius::build(phi.laurent_at_pole(j, series_terms), series_terms));
    const Frobenius at_inf = Frobenius::build({qt.begin(), qt.begin() + series_terms}, series_terms);

    BoundaryTrace out;
    out.at_infinity = at_inf.ex;
    Integrator zint([&](Complex z) { return phi.evaluate(z); }, opt.ode);
    Integrator inf_int(phi_inf, opt.ode);
    Recorder rec;
    CompanionState st;
    zint.advance(st, segment(opt.ode.base, Complex(-X, 0.0)), 0.0, 1.0);
    rec.push(-X, st.w());

    const std::size_t base_k = std::max<std::size_t>(4, samples / (2 * (n + 1)));
    const PathPiece axis = real_axis();
    double x = -X;
    auto walk_to = [&](double target) {
        zint.advance(st, axis, x, target);
        x = target;
        rec.push(x, st.w());
    };
    auto identity = [](Complex z) { return z; };

    for (std::size_t j = 0; j < n; ++j) {
        if (j == 0) {
            const double span = a[0] + X;
            for (double d : log_steps(span, r, spiral_count(2 * base_k, span / r, local[0].ex, opt.samples_per_turn)))
                if (d < span) walk_to(a[0] - d);
        } else {
            const double h = 0.5 * (a[j] - a[j - 1]);
            for (double d : log_steps(r, h, spiral_count(base_k, h / r, local[j - 1].ex, opt.samples_per_turn)))
                walk_to(a[j - 1] + d);
            const auto back = log_steps(h, r, spiral_count(base_k, h / r, local[j].ex, opt.samples_per_turn));
            for (double d : back) walk_to(a[j] - d);
        }
        VertexImage v;
        v.pole_index = j;
        v.exponents = local[j].ex;
        detour(zint, st, a[j], r, local[j], opt, identity, rec, v.w);
        x = a[j] + r;
        out.vertices.push_back(v);
    }
    {
        const double span = X - a[n - 1];
        for (double d : log_steps(r, span, spiral_count(2 * base_k, span / r, local[n - 1].ex, opt.samples_per_turn)))
            walk_to(a[n - 1] + d);
    }

    // Through infinity.
    {
        const double zeta0 = 1.0 / X;
        const double rinf = r / X;
        CompanionState u;
        const Complex zeta(-zeta0, 0.0);
        for (int i = 0; i < 2; ++i) {
            u.y[2 * i] = zeta * st.y[2 * i];
            u.y[2 * i + 1] = st.y[2 * i] + st.y[2 * i + 1] / zeta;
        }
        auto to_z = [](Complex zt) { return -1.0 / zt; };
        double s = -zeta0;
        auto walk_inf = [&](double target) {
            inf_int.advance(u, axis, s, target);
            s = target;
            rec.push(to_z(Complex(s, 0.0)), u.w());
        };
        const std::size_t kinf = spiral_count(2 * base_k, zeta0 / rinf, at_inf.ex, opt.samples_per_turn);
        for (double d : log_steps(zeta0, rinf, kinf)) walk_inf(-d);
        std::optional<Complex> w_inf;
        detour(inf_int, u, 0.0, rinf, at_inf, opt, to_z, rec, w_inf);
        s = rinf;
        const auto tail = log_steps(rinf, zeta0, kinf);
        for (std::size_t m = 0; m + 1 < tail.size(); ++m) walk_inf(tail[m]);
        inf_int.advance(u, axis, s, zeta0);
        out.closure_gap = std::abs(u.w() - rec.points.front());
    }

    // Drop consecutive duplicates so zero-length segments do not read as contacts.
    for (std::size_t k = 0; k < rec.points.size(); ++k) {
        if (!out.points.empty() &&
            std::abs(rec.points[k] - out.points.back()) <= 1e-15 * (1.0 + std::abs(rec.points[k])))
            continue;
        out.points.push_back(rec.points[k]);
        out.parameters.push_back(rec.params[k]);
    }
    out.max_wronskian_drift = std::max(zint.max_drift(), inf_int.max_drift());

    const auto check = check_closed_polyline(out.points);
    out.simple = check.simple;
    out.min_relative_gap = check.min_relative_gap;
    out.indeterminate = check.simple && check.min_relative_gap < 1e-6;
    if (check.first)
        out.first_self_intersection = std::make_pair(out.parameters[check.first->first],
                                                     out.parameters[check.first->second]);
    return out;
}

namespace {

double cross(Complex a, Complex b) { return a.real() * b.imag() - a.imag() * b.real(); }

int orientation(Complex p, Complex q, Complex r, double tol)
{
    const double o = cross(q - p, r - p);
    if (std::abs(o) <= tol * std::abs(q - p) * std::abs(r - p)) return 0;
    return o > 0 ? 1 : -1;
}

bool within_box(Complex p, Complex q, Complex r, double slack)
{
    return r.real() >= std::min(p.real(), q.real()) - slack && r.real() <= std::max(p.real(), q.real()) + slack &&
           r.imag() >= std::min(p.imag(), q.imag()) - slack && r.imag() <= std::max(p.imag(), q.imag()) + slack;
}

double point_segment_distance(Complex p, Complex a, Complex b)
{
    const Complex d = b - a;
    const double len2 = std::norm(d);
    if (len2 == 0.0) return std::abs(p - a);
    const double s = std::clamp(((p - a) * std::conj(d)).real() / len2, 0.0, 1.0);
    return std::abs(p - (a + s * d));
}

} // namespace

bool segments_intersect(Complex p1, Complex p2, Complex q1, Complex q2, double tol)
{
    const int o1 = orientation(p1, p2, q1, tol), o2 = orientation(p1, p2, q2, tol);
    const int o3 = orientation(q1, q2, p1, tol), o4 = orientation(q1, q2, p2, tol);
    if (o1 * o2 < 0 && o3 * o4 < 0) return true;
    const double sp = tol * std::abs(p2 - p1), sq = tol * std::abs(q2 - q1);
    if (o1 == 0 && within_box(p1, p2, q1, sp)) return true;
    if (o2 == 0 && within_box(p1, p2, q2, sp)) return true;
    if (o3 == 0 && within_box(q1, q2, p1, sq)) return true;
    if (o4 == 0 && within_box(q1, q2, p2, sq)) return true;
    return false;
}

PolylineCheck check_closed_polyline(const std::vector<Complex>& pts, double tol, double gap_threshold)
{
    PolylineCheck out;
    const std::size_t m = pts.size();
    out.min_relative_gap = std::max(gap_threshold, 1e-3);
    if (m < 4) return out;

    double x0 = pts[0].real(), x1 = x0, y0 = pts[0].imag(), y1 = y0;
    for (const auto& p : pts) {
        if (!std::isfinite(p.real()) || !std::isfinite(p.imag())) {
            out.simple = false;
            return out;
        }
        x0 = std::min(x0, p.real());
        x1 = std::max(x1, p.real());
        y0 = std::min(y0, p.imag());
        y1 = std::max(y1, p.imag());
    }
    const double diam = std::hypot(x1 - x0, y1 - y0);
    if (diam == 0.0) {
        out.simple = false;
        return out;
    }
    const double delta = out.min_relative_gap * diam;

    std::vector<double> cum(m + 1, 0.0);
    for (std::size_t i = 0; i < m; ++i) cum[i + 1] = cum[i] + std::abs(pts[(i + 1) % m] - pts[i]);
    const double total = cum[m];

    struct Seg {
        double lo_x, hi_x, lo_y, hi_y;
        std::size_t i;
    };
    std::vector<Seg> segs(m);
    for (std::size_t i = 0; i < m; ++i) {
        const Complex a = pts[i], b = pts[(i + 1) % m];
        segs[i] = {std::min(a.real(), b.real()), std::max(a.real(), b.real()), std::min(a.imag(), b.imag()),
                   std::max(a.imag(), b.imag()), i};
    }
    std::sort(segs.begin(), segs.end(), [](const Seg& s, const Seg& t) {
        return s.lo_x < t.lo_x || (s.lo_x == t.lo_x && s.i < t.i);
    });

    std::vector<Seg> active;
    for (const Seg& s : segs) {
        std::erase_if(active, [&](const Seg& t) { return t.hi_x + delta < s.lo_x; });
        for (const Seg& t : active) {
            if (t.hi_y + delta < s.lo_y || s.hi_y + delta < t.lo_y) continue;
            const std::size_t i = std::min(s.i, t.i), j = std::max(s.i, t.i);
            if (j == i + 1 || (i == 0 && j == m - 1)) continue;
            const Complex a = pts[i], b = pts[(i + 1) % m], c = pts[j], d = pts[(j + 1) % m];
            if (segments_intersect(a, b, c, d, tol)) {
                out.simple = false;
                if (!out.first || std::make_pair(i, j) < *out.first) out.first = std::make_pair(i, j);
                continue;
            }
            const double dist = std::min({point_segment_distance(a, c, d), point_segment_distance(b, c, d),
                                          point_segment_distance(c, a, b), point_segment_distance(d, a, b)});
            if (dist >= delta) continue;
            const double along = std::min(cum[j] - cum[i + 1], total - cum[j + 1] + cum[i]);
            if (along > 4.0 * dist) out.min_relative_gap = std::min(out.min_relative_gap, dist / diam);
        }
        active.push_back(s);
    }
    return out;
}

const char* to_string(ProbeVariant v) { return v == ProbeVariant::scaled ? "scaled" : "homotopy"; }

ProbeVariant parse_variant(std::string_view name)
{
    if (name == "scaled") return ProbeVariant::scaled;
    if (name == "homotopy") return ProbeVariant::homotopy;
    throw ValidationError("variant", "unknown variant '" + std::string(name) + "' (expected scaled or homotopy)");
}

PoleExpansion probe_schwarzian(const PolygonSpec& p, ProbeVariant v, double t)
{
    if (v == ProbeVariant::homotopy) return polygon_homotopy_schwarzian(p, t);
    return polygon_homotopy_schwarzian(p, critical_radius(p).r0).scaled(t);
}

ProbeReport ray_probe(const PolygonSpec& p, const std::vector<double>& t_grid, const ProbeOptions& options)
{
    if (t_grid.empty()) throw ValidationError("empty_grid", "t grid is empty");
    for (std::size_t k = 0; k < t_grid.size(); ++k) {
        if (!(std::isfinite(t_grid[k]) && t_grid[k] > 0.0))
            throw ValidationError("grid_range", "t values must be positive and finite");
        if (k > 0 && !(t_grid[k] > t_grid[k - 1]))
            throw ValidationError("grid_order", "t grid must be strictly increasing");
    }
    if (options.variants.empty()) throw ValidationError("variant", "no probe variant selected");

    ProbeReport report;
    report.r0 = critical_radius(p).r0;
    const std::size_t nt = t_grid.size();
    report.rows.resize(options.variants.size() * nt);
    parallel_for(report.rows.size(), [&](std::size_t idx) {
        ProbeRow& row = report.rows[idx];
        row.variant = options.variants[idx / nt];
        row.t = t_grid[idx % nt];
        try {
            const auto phi = probe_schwarzian(p, row.variant, row.t);
            const auto norm = hyperbolic_sup_norm(phi, NormModel::half_plane_1, options.norm_budget);
            row.norm_hp1 = norm.value;
            row.norm_hp4 = 4.0 * norm.value;
            row.aw_applicable = norm.value < 0.5;
            const auto trace = trace_boundary(phi, options.trace);
            row.simple = trace.simple;
            row.indeterminate = trace.indeterminate;
            row.min_relative_gap = trace.min_relative_gap;
            row.closure_gap = trace.closure_gap;
            row.max_wronskian_drift = trace.max_wronskian_drift;
            row.kraus_flag = row.simple && norm.value > 1.5;
            row.aw_conflict = row.aw_applicable && !row.simple;
            if (options.keep_traces) row.trace = trace;
            row.ok = true;
        } catch (const Error& e) {
            row.error = e.code();
        }
    });

    for (ProbeVariant v : options.variants) {
        ProbeBracket b;
        b.variant = v;
        for (const auto& row : report.rows) {
            if (row.variant != v || !row.ok) continue;
            if (row.simple) b.largest_simple = row.t;
            else if (!b.smallest_nonsimple) b.smallest_nonsimple = row.t;
        }
        b.monotone = !(b.largest_simple && b.smallest_nonsimple && *b.largest_simple > *b.smallest_nonsimple);
        for (auto& row : report.rows)
            if (row.variant == v && row.ok && row.simple && b.smallest_nonsimple && row.t > *b.smallest_nonsimple)
                row.breakdown_flag = true;
        report.brackets.push_back(b);
    }
    return report;
}

void write_probe_csv(std::ostream& out, const ProbeReport& report)
{
    out << "# schema=berslab.ray_probe/1\n"
        << "t,variant,simple,norm_hp1,norm_hp4,aw_applicable,breakdown_flag,indeterminate,"
           "kraus_flag,aw_conflict,min_relative_gap,closure_gap,wronskian_drift,error\n";
    out << std::setprecision(12);
    for (const auto& r : report.rows) {
        out << r.t << ',' << to_string(r.variant) << ',' << (r.ok ? (r.simple ? "true" : "false") : "") << ','
            << r.norm_hp1 << ',' << r.norm_hp4 << ',' << (r.aw_applicable ? "true" : "false") << ','
            << (r.breakdown_flag ? "true" : "false") << ',' << (r.indeterminate ? "true" : "false") << ','
            << (r.kraus_flag ? "true" : "false") << ',' << (r.aw_conflict ? "true" : "false") << ','
            << r.min_relative_gap << ',' << r.closure_gap << ',' << r.max_wronskian_drift << ',' << r.error
            << '\n';
    }
}

void write_trace_csv(std::ostream& out, const BoundaryTrace& trace)
{
    out << "# schema=berslab.trace/1\nindex,param_re,param_im,w_re,w_im\n" << std::setprecision(17);
    for (std::size_t k = 0; k < trace.points.size(); ++k)
        out << k << ',' << trace.parameters[k].real() << ',' << trace.parameters[k].imag() << ','
            << trace.points[k].real() << ',' << trace.points[k].imag() << '\n';
}

void to_json(nlohmann::json& j, const ProbeReport& report)
{
    j = nlohmann::json{{"schema", "berslab.ray_probe/1"},
                       {"r0", report.r0}, {"rows", nlohmann::json::array()}, {"brackets", nlohmann::json::array()}};
    for (const auto& r : report.rows) {
        nlohmann::json row{{"t", r.t},
                           {"variant", to_string(r.variant)},
                           {"ok", r.ok},
                           {"simple", r.simple},
                           {"indeterminate", r.indeterminate},
                           {"norm_hp1", r.norm_hp1},
                           {"norm_hp4", r.norm_hp4},
                           {"aw_applicable", r.aw_applicable},
                           {"breakdown_flag", r.breakdown_flag},
                           {"kraus_flag", r.kraus_flag},
                           {"aw_conflict", r.aw_conflict},
                           {"min_relative_gap", r.min_relative_gap},
                           {"closure_gap", r.closure_gap},
                           {"wronskian_drift", r.max_wronskian_drift}};
        if (!r.ok) row["error"] = r.error;
        j["rows"].push_back(row);
    }
    for (const auto& b : report.brackets) {
        nlohmann::json e{{"variant", to_string(b.variant)}, {"monotone", b.monotone}};
        e["largest_simple"] = b.largest_simple ? nlohmann::json(*b.largest_simple) : nlohmann::json(nullptr);
        e["smallest_nonsimple"] =
            b.smallest_nonsimple ? nlohmann::json(*b.smallest_nonsimple) : nlohmann::json(nullptr);
        j["brackets"].push_back(e);
    }
}

} // namespace berslab
