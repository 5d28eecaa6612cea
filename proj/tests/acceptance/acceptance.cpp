// Acceptance suite: one PASS/FAIL line per criterion.
//
// Usage: acceptance [work_dir] [criterion ...]

#include "heatpath/billiard.hpp"
#include "heatpath/bundle.hpp"
#include "heatpath/error.hpp"
#include "heatpath/geometry.hpp"
#include "heatpath/harness.hpp"
#include "heatpath/oracle.hpp"
#include "heatpath/semigroup.hpp"

#include <Eigen/Dense>
#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace heatpath;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::uint64_t kSeed = 20240611;

struct Outcome {
    bool pass = false;
    std::string detail;
};

fs::path work_dir;

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::vector<double>> interval_grid(int n, double a, double b) {
    std::vector<std::vector<double>> g;
    for (int k = 1; k <= n; ++k) g.push_back({a + (b - a) * k / (n + 1)});
    return g;
}

// ---------------------------------------------------------------- 1

RunConfig flat_config(int workers) {
    RunConfig c = default_config();
    c.geometry = Descriptor{"interval", {0.0, kPi}};
    c.boundary = Descriptor{"dirichlet", {}};
    c.section = Descriptor{"sin", {1.0}};
    c.t = 0.25;
    c.partitions = {1, 2, 4, 8};
    c.samples = 200000;
    c.seed = kSeed;
    c.grid = interval_grid(9, 0.0, kPi);
    c.workers = workers;
    return c;
}

Outcome flat_exactness() {
    const RunConfig cfg = flat_config(8);
    const ConvergenceReport r = run_convergence(cfg);
    emit_report(r, (work_dir / "c1_w8").string(), OutputFormat::csv);
    double worst = 0.0;
    bool ok = r.rows.size() == 36;
    for (const ReportRow& row : r.rows) {
        const double exact = std::exp(-0.25) * std::sin(row.x[0]);
        const double z = std::fabs(row.estimate(0).real() - exact) / row.stderr_re(0);
        worst = std::max(worst, z);
        ok = ok && z <= 4.0 && row.rejected == 0;
    }
    return {ok, "max |est - e^{-t}sin x| / stderr = " + fmt("%.3f", worst) + " (limit 4)"};
}

// ---------------------------------------------------------------- 2

// Image-sum kernel written out here so it does not share code with the library oracle.
double dirichlet_image_solution(double x, double t) {
    const int panels = 6000;
    const double h = kPi / panels;
    double acc = 0.0;
    for (int i = 0; i <= panels; ++i) {
        const double y = i * h;
        double k = 0.0;
        for (int n = -6; n <= 6; ++n) {
            const double d1 = x - y + 2.0 * n * kPi, d2 = x + y + 2.0 * n * kPi;
            k += std::exp(-d1 * d1 / (4.0 * t)) - std::exp(-d2 * d2 / (4.0 * t));
        }
        k /= std::sqrt(4.0 * kPi * t);
        const double w = (i == 0 || i == panels) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        acc += w * k * std::sin(y);
    }
    return acc * h / 3.0;
}

Outcome dirichlet_sign_weight() {
    const GeometryModel g = GeometryModel::interval(0.0, kPi);
    const BundleSpec b = make_bundle(1, false, make_connection(Descriptor{"zero", {}}, 1, false, g),
                                     make_potential(Descriptor{"zero", {}}, 1), 0.0);
    const BoundaryOperator B = BoundaryOperator::dirichlet(1);
    const FieldSection u = make_section(Descriptor{"sin", {1.0}}, 1, g);
    double worst = 0.0;
    for (double x : {0.3, 0.9, 1.5, 2.2, 2.9}) {
        const CVector q = quadrature_step_1d(g, b, B, u, Vec(x, 0, 0), 0.25);
        worst = std::max(worst, std::abs(q(0) - dirichlet_image_solution(x, 0.25)));
    }
    return {worst <= 1e-4, "max |quadrature - image sum| = " + fmt("%.3e", worst) + " (limit 1e-4)"};
}

// ---------------------------------------------------------------- 3

Outcome boundary_zero() {
    const GeometryModel g = GeometryModel::interval(0.0, kPi);
    const BundleSpec b = make_bundle(1, false, make_connection(Descriptor{"zero", {}}, 1, false, g),
                                     make_potential(Descriptor{"constant", {0.5}}, 1), 0.5);
    const BoundaryOperator B = BoundaryOperator::dirichlet(1);
    const FieldSection u = make_section(Descriptor{"cos", {1.0}}, 1, g);  // nonzero at the boundary
    bool ok = true;
    int runs = 0;
    for (double x : {0.0, kPi})
        for (long m : {2L, 64L, 1000L, 50001L})
            for (int n : {1, 3, 8}) {
                EstimateOptions o;
                o.seed = kSeed + m + n;
                o.samples = m;
                o.antithetic = true;
                const SliceEstimate e = estimate_slice(g, b, B, u, Vec(x, 0, 0), Partition::uniform(0.25, n), o);
                ok = ok && e.value(0) == Complex(0.0, 0.0);
                ++runs;
            }
    return {ok, std::to_string(runs) + " boundary estimates, all exactly zero: " + (ok ? "yes" : "no")};
}

// ---------------------------------------------------------------- 4

RunConfig potential_config(int workers) {
    RunConfig c = default_config();
    c.geometry = Descriptor{"interval", {0.0, kPi}};
    c.boundary = Descriptor{"neumann", {}};
    c.potential = Descriptor{"cosine-well", {1.0}};
    c.alpha = 1.0;
    c.section = Descriptor{"cos", {2.0}};
    c.t = 0.25;
    c.partitions = {1, 2, 4, 8, 16};
    c.samples = 400000;
    c.seed = kSeed + 4;
    c.grid = interval_grid(9, 0.0, kPi);
    c.oracle = "fd";
    c.workers = workers;
    return c;
}

std::string trend_detail(const std::vector<double>& err, const std::vector<double>& se) {
    std::string s = "sup errors";
    for (std::size_t i = 0; i < err.size(); ++i) s += fmt(i ? ", %.2e" : " %.2e", err[i]);
    s += fmt("; final stderr %.2e", se.back());
    return s;
}

Outcome chernoff_potential() {
    const RunConfig cfg = potential_config(8);
    const ConvergenceReport r = run_convergence(cfg);
    emit_report(r, (work_dir / "c4_w8").string(), OutputFormat::csv);
    std::vector<double> err, se;
    for (const LevelSummary& l : r.levels) {
        err.push_back(l.sup_error);
        se.push_back(l.max_stderr);
    }
    bool ok = r.oracle_name == "fd" && r.oracle_self_consistency <= 1e-7;
    for (std::size_t i = 1; i < err.size(); ++i) ok = ok && err[i] <= err[i - 1] + 2.0 * std::max(se[i], se[i - 1]);
    ok = ok && err.back() <= std::max(0.005 * 1.0, 4.0 * se.back());
    return {ok, trend_detail(err, se) + fmt("; fd self-consistency %.1e", r.oracle_self_consistency)};
}

// ---------------------------------------------------------------- 5

Outcome sphere_closed() {
    RunConfig c = default_config();
    c.geometry = Descriptor{"sphere", {1.0}};
    c.boundary = Descriptor{"neumann", {}};
    c.section = Descriptor{"sphere-l1", {0.0, 0.0, 1.0}};
    c.t = 0.2;
    c.partitions = {1, 2, 4, 8, 16};
    c.samples = 400000;
    c.seed = kSeed + 5;
    c.workers = 8;
    c.grid.clear();
    for (Vec p : {Vec(0, 0, 1), Vec(0, 0, -1), Vec(1, 1, 1), Vec(0.6, 0, 0.8), Vec(0, -0.8, 0.6), Vec(-0.48, 0.6, 0.64)}) {
        p.normalize();
        c.grid.push_back({p[0], p[1], p[2]});
    }
    c.oracle = "none";
    c.descriptive = true;
    const ConvergenceReport r = run_convergence(c);
    std::vector<double> err(c.partitions.size(), 0.0), se(c.partitions.size(), 0.0);
    for (const ReportRow& row : r.rows) {
        const auto i = std::find(c.partitions.begin(), c.partitions.end(), row.N) - c.partitions.begin();
        const double exact = std::exp(-2.0 * 0.2) * row.x[2];
        err[i] = std::max(err[i], std::fabs(row.estimate(0).real() - exact));
        se[i] = std::max(se[i], row.stderr_re(0));
    }
    bool ok = true;
    for (std::size_t i = 1; i < err.size(); ++i) ok = ok && err[i] <= err[i - 1] + 2.0 * std::max(se[i], se[i - 1]);
    ok = ok && err.back() <= 0.01 * 1.0 + 4.0 * se.back();
    return {ok, trend_detail(err, se)};
}

// ---------------------------------------------------------------- 6

Outcome holonomy() {
    RunConfig c = default_config();
    c.geometry = Descriptor{"circle", {1.0}};
    c.complex_field = true;
    c.connection = Descriptor{"circle-holonomy", {0.5}};
    c.boundary = Descriptor{"neumann", {}};
    c.section = Descriptor{"expi", {1.0}};
    c.t = 1.0;
    c.partitions = {4};
    c.samples = 200000;
    c.seed = kSeed + 6;
    c.workers = 8;
    c.grid.clear();
    for (int k = 0; k < 8; ++k) c.grid.push_back({k * kPi / 4.0});
    c.oracle = "none";
    c.descriptive = true;
    const ConvergenceReport r = run_convergence(c);
    double worst = 0.0;
    for (const ReportRow& row : r.rows) {
        const Complex exact = std::exp(-2.25) * std::polar(1.0, row.x[0]);
        const Complex d = row.estimate(0) - exact;
        worst = std::max({worst, std::fabs(d.real()) / row.stderr_re(0), std::fabs(d.imag()) / row.stderr_im(0)});
    }
    return {worst <= 4.0 && r.rows.size() == 8, "max |part error| / part stderr = " + fmt("%.3f", worst) + " (limit 4)"};
}

// ---------------------------------------------------------------- 7

struct RandomCase {
    std::string text;
    GeometryModel g;
    BundleSpec b;
    BoundaryOperator B;
    FieldSection u;
    double t;
};

Outcome norm_bounds() {
    std::mt19937_64 rng(kSeed + 7);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const std::vector<Descriptor> geoms = {
        {"interval", {0.0, kPi}}, {"disk", {1.0}},        {"circle", {1.0}},
        {"torus", {2.0, 3.0}},    {"sphere", {1.0}},      {"ellipse", {1.5, 1.0}}};
    double worst_weight = 0.0, worst_value = 0.0, worst_sample = 0.0;
    int cases = 0;
    while (cases < 100) {
        const Descriptor gd = geoms[rng() % geoms.size()];
        const GeometryModel g = make_geometry(gd);
        const int rank = 1 + static_cast<int>(rng() % 2);
        const bool complex_field = rng() % 2;
        const double alpha = unif(rng);
        const double t = 0.05 + 0.95 * unif(rng);
        Descriptor pot;
        switch (rng() % 4) {
            case 0: pot = {"constant", {alpha * (2.0 * unif(rng) - 1.0)}}; break;
            case 1: pot = {"cosine-well", {alpha * unif(rng)}}; break;
            case 2: {
                std::vector<double> d;
                for (int i = 0; i < rank; ++i) d.push_back(alpha * (2.0 * unif(rng) - 1.0));
                pot = {"diagonal", d};
                break;
            }
            default:
                if (rank == 2) {
                    const double a = unif(rng), bb = unif(rng), cc = unif(rng);
                    const double s = alpha / std::sqrt(a * a + bb * bb + 2.0 * cc * cc);
                    pot = {"coupled", {a * s, bb * s, cc * s}};
                } else {
                    pot = {"zero", {}};
                }
        }
        Descriptor conn{"zero", {}};
        const double cval = 2.0 * unif(rng);
        const auto pick = rng() % 4;
        if (pick == 1 && complex_field) conn = {"u1", {cval}};
        if (pick == 2 && rank == 2) conn = {"offdiag", {cval}};
        if (pick == 3 && rank == 2 && complex_field) conn = {"su2", {cval}};
        if (gd.name == "circle" && rank == 1 && complex_field && pick == 0) conn = {"circle-holonomy", {cval}};
        const Descriptor bd = (rng() % 2) ? Descriptor{"dirichlet", {}} : Descriptor{"neumann", {}};
        const std::vector<Descriptor> secs = {{"const", {1.0}}, {"gauss", {0.2, 0.1, 0.8}}, {"cos", {1.0}}};
        const Descriptor sd = secs[rng() % secs.size()];

        try {
            const Connection c = make_connection(conn, rank, complex_field, g);
            const Potential p = make_potential(pot, rank);
            const BundleSpec b = make_bundle(rank, complex_field, c, p, std::max(alpha, p.sup_norm));
            const BoundaryOperator B = make_boundary_operator(bd, rank);
            const FieldSection u = make_section(sd, rank, g);
            const double bound = std::exp(t * b.alpha);

            std::vector<Vec> points;
            for (int i = 0; i < 2; ++i) {
                Vec x = Vec::Zero();
                if (gd.name == "sphere") {
                    x = Vec(unif(rng) - 0.5, unif(rng) - 0.5, unif(rng) - 0.5).normalized();
                } else if (g.dim() == 1) {
                    x[0] = gd.name == "circle" ? 2.0 * kPi * unif(rng) : kPi * unif(rng);
                } else {
                    do {
                        x = Vec(3.0 * unif(rng) - 1.5, 3.0 * unif(rng) - 1.5, 0.0);
                        if (gd.name == "torus") x = Vec(2.0 * unif(rng), 3.0 * unif(rng), 0.0);
                    } while (g.classify(x) == PointClass::outside);
                }
                points.push_back(x);
            }
            const int n = 1 + static_cast<int>(rng() % 6);
            const Partition tau = Partition::uniform(t, n);
            for (const Vec& x : points) {
                EstimateOptions o;
                o.seed = rng();
                o.samples = 1500;
                const SliceEstimate e = estimate_slice(g, b, B, u, x, tau, o);
                worst_weight = std::max(worst_weight, e.max_weight_norm / bound);
                worst_value = std::max(worst_value, e.value.norm() / (bound * u.sup_norm));
                // every individual weighted sample value
                PathSampler sampler(g, b, B, u);
                CVector val(rank);
                for (int i = 0; i < 200; ++i) {
                    PhiloxStream s(o.seed ^ 0x5bd1e995ULL, i);
                    sampler.draw(tau, s);
                    if (!sampler.evaluate(x, tau, false, val)) continue;
                    worst_sample = std::max(worst_sample, val.norm() / (bound * u.sup_norm));
                    worst_weight = std::max(worst_weight, sampler.last_weight_norm() / bound);
                }
            }
            ++cases;
        } catch (const Error&) {
            continue;  // registry combination not admissible, draw again
        }
    }
    const bool ok = worst_weight <= 1.0 + 1e-6 && worst_value <= 1.0 && worst_sample <= 1.0 + 1e-12;
    return {ok, "100 configs: max weight / e^{t alpha} = " + fmt("%.9f", worst_weight) +
                    ", max |estimate| / bound = " + fmt("%.4f", worst_value) +
                    ", max |sample| / bound = " + fmt("%.4f", worst_sample)};
}

// ---------------------------------------------------------------- 8

Outcome generator() {
    const GeometryModel g = GeometryModel::interval(0.0, kPi);
    const BundleSpec b = make_bundle(1, false, make_connection(Descriptor{"zero", {}}, 1, false, g),
                                     make_potential(Descriptor{"zero", {}}, 1), 0.0);
    const BoundaryOperator B = BoundaryOperator::dirichlet(1);
    const FieldSection u = make_section(Descriptor{"sin", {1.0}}, 1, g);
    EstimateOptions o;
    o.seed = kSeed + 8;
    o.samples = 4000000;
    o.workers = 8;
    const GeneratorProbe p = generator_probe(g, b, B, u, Vec(1.2, 0, 0), {0.04, 0.02, 0.01}, o);
    const double target = -std::sin(1.2);
    const double err = std::fabs(p.value(0).real() - target);
    const double tol = 0.02 * std::fabs(target) + 4.0 * p.stderr_re(0);
    return {err <= tol, "value " + fmt("%.5f", p.value(0).real()) + fmt(" vs %.5f", target) +
                            fmt(", |diff| %.2e", err) + fmt(" <= %.2e", tol) +
                            (p.inconclusive ? " (flagged inconclusive)" : "")};
}

// ---------------------------------------------------------------- 9

// Exact area of [x0,x1] x [y0,y1] intersected with the unit disk.
double cell_area(double x0, double x1, double y0, double y1) {
    auto G = [](double x) { return 0.5 * (x * std::sqrt(std::max(0.0, 1.0 - x * x)) + std::asin(x)); };
    std::set<double> cuts{x0, x1};
    for (double y : {y0, y1})
        if (std::fabs(y) < 1.0)
            for (double c : {-std::sqrt(1.0 - y * y), std::sqrt(1.0 - y * y)})
                if (c > x0 && c < x1) cuts.insert(c);
    for (double c : {-1.0, 1.0})
        if (c > x0 && c < x1) cuts.insert(c);
    double area = 0.0;
    for (auto it = cuts.begin(); std::next(it) != cuts.end(); ++it) {
        const double a = std::clamp(*it, -1.0, 1.0), b = std::clamp(*std::next(it), -1.0, 1.0);
        if (b <= a) continue;
        const double m = 0.5 * (a + b), s = std::sqrt(1.0 - m * m);
        if (std::min(y1, s) <= std::max(y0, -s)) continue;
        const double upper = (y1 < s) ? y1 * (b - a) : G(b) - G(a);
        const double lower = (y0 > -s) ? y0 * (b - a) : -(G(b) - G(a));
        area += upper - lower;
    }
    return area;
}

Outcome billiard_suite() {
    std::mt19937_64 rng(kSeed + 9);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const std::vector<GeometryModel> models = {GeometryModel::interval(0.0, kPi), GeometryModel::disk(1.0),
                                               GeometryModel::ellipse(1.5, 1.0), GeometryModel::lens(1.0)};
    double speed = 0.0, inversion = 0.0, rescale = 0.0, straight = 0.0;
    long ok_paths = 0;
    for (const GeometryModel& g : models) {
        for (int i = 0; i < 4000; ++i) {
            Vec x = Vec::Zero(), v = Vec::Zero();
            do {
                x = g.dim() == 1 ? Vec(kPi * unif(rng), 0, 0) : Vec(3.0 * unif(rng) - 1.5, 2.0 * unif(rng) - 1.0, 0);
            } while (g.classify(x) != PointClass::interior);
            const double s = 0.3 + 2.0 * unif(rng);
            const double th = 2.0 * kPi * unif(rng);
            v = g.dim() == 1 ? Vec(unif(rng) < 0.5 ? -s : s, 0, 0) : Vec(s * std::cos(th), s * std::sin(th), 0);
            const double t = 0.2 + 2.0 * unif(rng);
            const FlowResult f = billiard_flow(g, PhasePoint{x, v}, t);
            if (!f.in_domain) continue;
            ++ok_paths;
            for (const PathSegment& seg : f.path.segments)
                speed = std::max(speed, std::fabs(seg.start.velocity.norm() - s) / s);
            speed = std::max(speed, std::fabs(f.final_point.velocity.norm() - s) / s);
            const FlowResult back = billiard_flow(g, f.final_point, -t);
            if (back.in_domain)
                inversion = std::max(inversion, std::hypot((back.final_point.position - x).norm(),
                                                           (back.final_point.velocity - v).norm()));
            const FlowResult unit = billiard_flow(g, PhasePoint{x, v / s}, t * s);
            if (unit.in_domain)
                rescale = std::max(rescale, std::hypot((unit.final_point.position - f.final_point.position).norm(),
                                                       (s * unit.final_point.velocity - f.final_point.velocity).norm()));
            const std::vector<Vec> u = anti_development(g, f.path, 4);
            const Vec d = (u.back() - u.front()).normalized();
            for (const Vec& q : u) {
                const Vec r = q - u.front();
                straight = std::max(straight, (r - r.dot(d) * d).norm() / (s * t));
            }
        }
    }

    // position marginal after the flow, 10x10 cells, small cells pooled
    const GeometryModel disk = GeometryModel::disk(1.0);
    const int n = 100000, cells = 10;
    std::vector<double> counts(cells * cells, 0.0);
    for (int i = 0; i < n; ++i) {
        const double r = std::sqrt(unif(rng)), a = 2.0 * kPi * unif(rng);
        const double sp = std::sqrt(0.25 + (2.25 - 0.25) * unif(rng)), b = 2.0 * kPi * unif(rng);
        const FlowResult f = billiard_flow(
            disk, PhasePoint{Vec(r * std::cos(a), r * std::sin(a), 0), Vec(sp * std::cos(b), sp * std::sin(b), 0)}, 1.0);
        const Vec& y = f.final_point.position;
        const int cx = std::clamp(static_cast<int>((y[0] + 1.0) * cells / 2.0), 0, cells - 1);
        const int cy = std::clamp(static_cast<int>((y[1] + 1.0) * cells / 2.0), 0, cells - 1);
        counts[cx * cells + cy] += 1.0;
    }
    double chi2 = 0.0, small_obs = 0.0, small_exp = 0.0;
    int bins = 0;
    for (int cx = 0; cx < cells; ++cx)
        for (int cy = 0; cy < cells; ++cy) {
            const double x0 = -1.0 + 0.2 * cx, y0 = -1.0 + 0.2 * cy;
            const double e = n * cell_area(x0, x0 + 0.2, y0, y0 + 0.2) / kPi;
            const double o = counts[cx * cells + cy];
            if (e < 5.0) {
                small_obs += o;
                small_exp += e;
            } else {
                chi2 += (o - e) * (o - e) / e;
                ++bins;
            }
        }
    if (small_exp > 0.0) {
        chi2 += (small_obs - small_exp) * (small_obs - small_exp) / small_exp;
        ++bins;
    }
    const double pvalue = boost::math::cdf(boost::math::complement(boost::math::chi_squared(bins - 1), chi2));

    const bool ok = speed <= 1e-10 && inversion <= 1e-9 && rescale <= 1e-9 && straight <= 1e-8 && pvalue >= 0.001;
    return {ok, std::to_string(ok_paths) + " paths: speed " + fmt("%.1e", speed) + fmt(", inversion %.1e", inversion) +
                    fmt(", rescaling %.1e", rescale) + fmt(", straightness %.1e", straight) +
                    fmt(", chi2 p-value %.3f", pvalue)};
}

// ---------------------------------------------------------------- 10

Outcome reproducibility() {
    bool ok = true;
    std::string detail;
    const std::pair<const char*, RunConfig> runs[] = {{"c1", flat_config(1)}, {"c4", potential_config(1)}};
    for (const auto& [tag, cfg] : runs) {
        const fs::path one = work_dir / (std::string(tag) + "_w1");
        const fs::path eight = work_dir / (std::string(tag) + "_w8");
        if (!fs::exists(eight / "convergence.csv")) {
            RunConfig c8 = cfg;
            c8.workers = 8;
            emit_report(run_convergence(c8), eight.string(), OutputFormat::csv);
        }
        const auto files = emit_report(run_convergence(cfg), one.string(), OutputFormat::csv);
        for (const std::string& f : files) {
            const fs::path name = fs::path(f).filename();
            const bool same = slurp(one / name) == slurp(eight / name) && !slurp(one / name).empty();
            ok = ok && same;
            detail += std::string(detail.empty() ? "" : ", ") + tag + "/" + name.string() + (same ? " identical" : " DIFFERS");
        }
    }
    return {ok, detail};
}

struct Criterion {
    int id;
    const char* name;
    double budget_seconds;
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
    work_dir = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "heatpath-acceptance";
    std::set<int> only;
    for (int i = 2; i < argc; ++i) only.insert(std::atoi(argv[i]));
    fs::create_directories(work_dir);

    const std::vector<Criterion> criteria = {
        {1, "flat exactness on the Dirichlet interval", 30, flat_exactness},
        {2, "Dirichlet sign weight vs image sum", 5, dirichlet_sign_weight},
        {3, "antithetic zero at a Dirichlet boundary point", 5, boundary_zero},
        {4, "convergence with potential vs finite differences", 180, chernoff_potential},
        {5, "closed curved case on the sphere", 180, sphere_closed},
        {6, "holonomy transport on the circle", 60, holonomy},
        {7, "norm and Gronwall bounds", 60, norm_bounds},
        {8, "generator probe", 60, generator},
        {9, "billiard dynamics suite", 60, billiard_suite},
        {10, "reproducibility across 1 and 8 workers", 1e9, reproducibility},
    };
    int failures = 0;
    for (const Criterion& c : criteria) {
        if (!only.empty() && !only.count(c.id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = secs <= c.budget_seconds;
        const bool pass = out.pass && in_time;
        if (!pass) ++failures;
        std::printf("%s criterion %d (%s): %s; %.1f s", pass ? "PASS" : "FAIL", c.id, c.name, out.detail.c_str(), secs);
        if (c.budget_seconds < 1e8) std::printf(" (budget %.0f s%s)", c.budget_seconds, in_time ? "" : ", EXCEEDED");
        std::printf("\n");
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
