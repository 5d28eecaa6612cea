#include "heatpath/error.hpp"
#include "heatpath/harness.hpp"
#include "heatpath/oracle.hpp"

#include <Eigen/Dense>
#include <boost/math/distributions/chi_squared.hpp>

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

namespace heatpath {

namespace {

constexpr double kPi = std::numbers::pi;

class Suite {
public:
    explicit Suite(const RunConfig& cfg) : seed_(cfg.seed), workers_(cfg.workers) {}

    PhiloxStream stream(std::uint64_t id) const { return PhiloxStream(seed_, id); }
    std::uint64_t seed() const { return seed_; }
    int workers() const { return workers_; }

    void upper(const std::string& name, double measured, double threshold, std::string note = {}) {
        add(name, measured <= threshold, measured, threshold, threshold - measured, std::move(note));
    }
    void lower(const std::string& name, double measured, double threshold, std::string note = {}) {
        add(name, measured >= threshold, measured, threshold, measured - threshold, std::move(note));
    }
    void failed(const std::string& name, const std::string& why) {
        add(name, false, std::numeric_limits<double>::quiet_NaN(), 0.0, std::numeric_limits<double>::quiet_NaN(), why);
    }

    PropertyReport report;

private:
    void add(const std::string& name, bool passed, double measured, double threshold, double margin, std::string note) {
        report.checks.push_back({name, passed && std::isfinite(measured), measured, threshold, margin, std::move(note)});
    }
    std::uint64_t seed_;
    int workers_;
};

struct NamedModel {
    std::string name;
    GeometryModel g;
};

std::vector<NamedModel> bounded_models() {
    return {{"interval", GeometryModel::interval(0.0, kPi)},
            {"disk", GeometryModel::disk(1.0)},
            {"ellipse", GeometryModel::ellipse(1.5, 1.0)},
            {"lens", GeometryModel::lens(1.0)}};
}

Vec random_interior(const GeometryModel& g, PhiloxStream& rng) {
    switch (g.kind()) {
        case ModelKind::interval: return Vec(g.lower() + (g.upper() - g.lower()) * rng.uniform(), 0.0, 0.0);
        case ModelKind::disk: {
            const double r = g.radius() * std::sqrt(rng.uniform()), th = 2.0 * kPi * rng.uniform();
            return Vec(r * std::cos(th), r * std::sin(th), 0.0);
        }
        default:
            for (;;) {
                const Vec x(-2.0 + 4.0 * rng.uniform(), -2.0 + 4.0 * rng.uniform(), 0.0);
                if (g.classify(x) == PointClass::interior) return x;
            }
    }
}

Vec random_velocity(const GeometryModel& g, PhiloxStream& rng, double smin, double smax) {
    const double s = smin + (smax - smin) * rng.uniform();
    if (g.dim() == 1) return Vec(rng.uniform() < 0.5 ? -s : s, 0.0, 0.0);
    const double th = 2.0 * kPi * rng.uniform();
    return Vec(s * std::cos(th), s * std::sin(th), 0.0);
}

Vec random_boundary(const std::string& name, const GeometryModel& g, PhiloxStream& rng) {
    if (name == "interval") return Vec(rng.uniform() < 0.5 ? g.lower() : g.upper(), 0.0, 0.0);
    const double th = 2.0 * kPi * rng.uniform();
    if (name == "disk") return Vec(std::cos(th), std::sin(th), 0.0);
    if (name == "ellipse") return Vec(1.5 * std::cos(th), std::sin(th), 0.0);
    // lens(1): arcs of unit circles centred at (-+1/2, 0), away from the corners
    const double yc = std::sqrt(0.75);
    const double phi = std::asin(yc) * (1.8 * rng.uniform() - 0.9);
    return rng.uniform() < 0.5 ? Vec(-0.5 + std::cos(phi), std::sin(phi), 0.0)
                               : Vec(0.5 - std::cos(phi), std::sin(phi), 0.0);
}

// ---------------------------------------------------------------- geometry

void geometry_checks(Suite& s) {
    for (const auto& [name, g] : bounded_models()) {
        PhiloxStream rng = s.stream(101);
        double invol = 0.0, iso = 0.0;
        for (int i = 0; i < 1000; ++i) {
            const Vec x = random_boundary(name, g, rng);
            const Vec v = random_velocity(g, rng, 0.1, 3.0);
            const Vec rv = g.reflect(x, v);
            invol = std::max(invol, (g.reflect(x, rv) - v).norm());
            iso = std::max(iso, std::fabs(rv.norm() - v.norm()));
        }
        s.upper("geometry.reflection_involution." + name, invol, 1e-12);
        s.upper("geometry.reflection_isometry." + name, iso, 1e-12);

        double landing = 0.0;
        int early_outside = 0, hits = 0;
        PhiloxStream rng2 = s.stream(102);
        for (int i = 0; i < 1000; ++i) {
            const PhasePoint p{random_interior(g, rng2), random_velocity(g, rng2, 0.5, 2.0)};
            const auto hit = g.first_boundary_hit(p, 100.0);
            if (!hit) continue;
            ++hits;
            landing = std::max(landing, g.boundary_distance(g.advance(p, hit->time).position));
            if (g.classify(g.advance(p, hit->time * (1.0 - 1e-6)).position) != PointClass::interior) ++early_outside;
        }
        s.upper("geometry.hit_landing." + name, landing, g.hit_tolerance(), std::to_string(hits) + " hits");
        s.upper("geometry.hit_early_interior." + name, early_outside, 0.0);
    }

    const GeometryModel sphere = GeometryModel::sphere(2.0);
    PhiloxStream rng = s.stream(103);
    PhasePoint p{Vec(0.0, 0.0, 2.0), sphere.tangent_vector(Vec(0.0, 0.0, 2.0), 0.8, -0.3)};
    double radial = 0.0, tangency = 0.0;
    for (int i = 0; i < 10000; ++i) {
        p = sphere.advance(p, 0.05 + rng.uniform());
        radial = std::max(radial, std::fabs(p.position.norm() - 2.0) / 2.0);
        tangency = std::max(tangency, std::fabs(p.position.dot(p.velocity)) / (2.0 * p.velocity.norm()));
    }
    s.upper("geometry.sphere_radius_drift", radial, 1e-10);
    s.upper("geometry.sphere_tangency_drift", tangency, 1e-10);
}

// ---------------------------------------------------------------- billiard

double disk_cell_area(double x0, double x1, double y0, double y1) {
    const int n = 4000;
    const double h = (x1 - x0) / n;
    double a = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = x0 + (i + 0.5) * h;
        const double s = std::sqrt(std::max(0.0, 1.0 - x * x));
        a += std::max(0.0, std::min(y1, s) - std::max(y0, -s));
    }
    return a * h;
}

/// p-value of the position-marginal chi-square test after the billiard flow on Disk(1).
double measure_preservation_pvalue(std::uint64_t seed, int points, double t, double* statistic, int* dof) {
    const GeometryModel g = GeometryModel::disk(1.0);
    const int cells = 10;
    std::vector<double> counts(cells * cells, 0.0);
    PhiloxStream rng(seed, 104);
    for (int i = 0; i < points; ++i) {
        const double r = std::sqrt(rng.uniform()), th = 2.0 * kPi * rng.uniform();
        const double sp = std::sqrt(0.25 + 2.0 * rng.uniform()), ph = 2.0 * kPi * rng.uniform();
        const PhasePoint p{Vec(r * std::cos(th), r * std::sin(th), 0.0), Vec(sp * std::cos(ph), sp * std::sin(ph), 0.0)};
        const FlowResult f = billiard_flow(g, p, t);
        const Vec& y = f.final_point.position;
        const int cx = std::clamp(static_cast<int>((y[0] + 1.0) / 2.0 * cells), 0, cells - 1);
        const int cy = std::clamp(static_cast<int>((y[1] + 1.0) / 2.0 * cells), 0, cells - 1);
        counts[cy * cells + cx] += 1.0;
    }
    // pool cells with small expectation into one bin
    double chi2 = 0.0, pooled_obs = 0.0, pooled_exp = 0.0;
    int bins = 0;
    for (int cy = 0; cy < cells; ++cy)
        for (int cx = 0; cx < cells; ++cx) {
            const double x0 = -1.0 + 2.0 * cx / cells, y0 = -1.0 + 2.0 * cy / cells;
            const double expected = points * disk_cell_area(x0, x0 + 2.0 / cells, y0, y0 + 2.0 / cells) / kPi;
            const double obs = counts[cy * cells + cx];
            if (expected < 5.0) {
                pooled_obs += obs;
                pooled_exp += expected;
                continue;
            }
            chi2 += (obs - expected) * (obs - expected) / expected;
            ++bins;
        }
    if (pooled_exp > 0.0) {
        chi2 += (pooled_obs - pooled_exp) * (pooled_obs - pooled_exp) / pooled_exp;
        ++bins;
    }
    const int k = bins - 1;
    if (statistic) *statistic = chi2;
    if (dof) *dof = k;
    return boost::math::cdf(boost::math::complement(boost::math::chi_squared(k), chi2));
}

void billiard_checks(Suite& s) {
    for (const auto& [name, g] : bounded_models()) {
        PhiloxStream rng = s.stream(201);
        double drift = 0.0, inversion = 0.0, rescale = 0.0, straight = 0.0;
        int ok = 0;
        for (int i = 0; i < 10000; ++i) {
            const PhasePoint p{random_interior(g, rng), random_velocity(g, rng, 0.5, 2.0)};
            const double t = 0.5 + 1.5 * rng.uniform();
            const FlowResult f = billiard_flow(g, p, t);
            if (!f.in_domain) continue;
            ++ok;
            const double speed = p.velocity.norm();
            for (const PathSegment& seg : f.path.segments)
                drift = std::max(drift, std::fabs(seg.start.velocity.norm() - speed) / speed);
            drift = std::max(drift, std::fabs(f.final_point.velocity.norm() - speed) / speed);
            if (i % 10 != 0) continue;
            const FlowResult back = billiard_flow(g, f.final_point, -t);
            if (back.in_domain)
                inversion = std::max(inversion, (back.final_point.position - p.position).norm() +
                                                    (back.final_point.velocity - p.velocity).norm());
            const FlowResult unit = billiard_flow(g, PhasePoint{p.position, p.velocity / speed}, t * speed);
            if (unit.in_domain)
                rescale = std::max(rescale, (unit.final_point.position - f.final_point.position).norm() +
                                                (speed * unit.final_point.velocity - f.final_point.velocity).norm());
            const std::vector<Vec> u = anti_development(g, f.path, 3);
            const Vec a = u.front(), d = (u.back() - a).normalized();
            double dev = 0.0;
            for (const Vec& q : u) dev = std::max(dev, ((q - a) - (q - a).dot(d) * d).norm());
            straight = std::max(straight, dev / (speed * t));
        }
        const std::string note = std::to_string(ok) + " ok paths";
        s.upper("billiard.speed_preservation." + name, drift, 1e-10, note);
        s.upper("billiard.flow_inversion." + name, inversion, 1e-9);
        s.upper("billiard.rescaling." + name, rescale, 1e-9);
        s.upper("billiard.anti_development_straightness." + name, straight, 1e-8, "deviation / (|v| t)");
    }

    double chi2 = 0.0;
    int dof = 0;
    const double pv = measure_preservation_pvalue(s.seed(), 100000, 1.0, &chi2, &dof);
    std::ostringstream note;
    note << "chi2=" << chi2 << " dof=" << dof;
    s.lower("billiard.measure_preservation_pvalue", pv, 0.001, note.str());

    const GeometryModel disk = GeometryModel::disk(1.0);
    PhiloxStream rng = s.stream(202);
    long rejected = 0;
    const long n = 1000000;
    ReflectedPath path;
    for (long i = 0; i < n; ++i) {
        const Vec x = random_interior(disk, rng);
        const Vec v(std::sqrt(2.0) * rng.normal(), std::sqrt(2.0) * rng.normal(), 0.0);
        trace_reflected(disk, x, v, 1.0, kAutoReflectionCap, path);
        if (!path.ok()) ++rejected;
    }
    s.upper("billiard.rejection_fraction.disk", static_cast<double>(rejected) / n, 1e-4);

    PhiloxStream rng3 = s.stream(203);
    double energy = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const Vec x = random_interior(disk, rng3), v = random_velocity(disk, rng3, 0.5, 3.0);
        const ReflectedPath p = trace_reflected(disk, x, v, 1.3);
        if (!p.ok()) continue;
        const double expect = 0.25 * v.squaredNorm() * 1.3;
        energy = std::max(energy, std::fabs(path_energy(p) - expect) / expect);
    }
    s.upper("billiard.energy_identity", energy, 1e-12);
}

// ---------------------------------------------------------------- bundle

double opnorm(const Matrix& m) { return Eigen::JacobiSVD<Matrix>(m).singularValues()(0); }

void bundle_checks(Suite& s) {
    const GeometryModel disk = GeometryModel::disk(1.0);
    const Potential pot = make_potential(Descriptor{"coupled", {0.3, 0.4, 0.2}}, 2);
    const Connection su2 = make_connection(Descriptor{"su2", {0.7}}, 2, true, disk);
    const BundleSpec full = make_bundle(2, true, su2, pot, pot.sup_norm);
    const BundleSpec flat_v = make_bundle(2, true, su2, make_potential(Descriptor{"zero", {}}, 2), 0.0);
    const BoundaryOperator B = BoundaryOperator::dirichlet(2);

    PhiloxStream rng = s.stream(301);
    double gronwall = 0.0, isometry = 0.0, inverse = 0.0, substep = 0.0;
    for (int i = 0; i < 200; ++i) {
        const double t = 0.05 + 0.95 * rng.uniform();
        const Vec x = random_interior(disk, rng);
        const Vec v = random_velocity(disk, rng, 0.5, 3.0);
        const ReflectedPath path = trace_reflected(disk, x, v, t);
        if (!path.ok()) continue;
        const TransportResult tr = b_transport(full, B, disk, path);
        gronwall = std::max(gronwall, opnorm(tr.P_inv) / std::exp(t * full.alpha));
        inverse = std::max(inverse, (tr.P_inv - tr.P.inverse()).cwiseAbs().maxCoeff());
        if (i < 20) {
            const TransportResult fine = b_transport(full, B, disk, path, 2);
            substep = std::max(substep, (fine.P - tr.P).cwiseAbs().maxCoeff());
        }
        const TransportResult iso = b_transport(flat_v, B, disk, path);
        CVector w(2);
        w << Complex(rng.normal(), rng.normal()), Complex(rng.normal(), rng.normal());
        isometry = std::max(isometry, std::fabs((iso.P * w).norm() - w.norm()));
    }
    s.upper("bundle.gronwall_ratio", gronwall, 1.0 + 1e-6, "||P_inv|| / exp(t alpha)");
    s.upper("bundle.isometry_without_potential", isometry, 1e-8);
    s.upper("bundle.inverse_consistency", inverse, 1e-7);
    s.upper("bundle.substep_convergence", substep, 1e-9);

    const BoundaryOperator blk = BoundaryOperator::blockwise({1, -1});
    const Matrix id = Matrix::Identity(2, 2);
    s.upper("bundle.boundary_involution", (blk.matrix() * blk.matrix() - id).cwiseAbs().maxCoeff(), 1e-14);
}

// ---------------------------------------------------------------- semigroup

struct Setup {
    GeometryModel g;
    BundleSpec b;
    BoundaryOperator B;
    FieldSection u;
};

Setup scalar_setup(GeometryModel g, const Descriptor& pot, double alpha, BoundaryOperator B, const Descriptor& u,
                   const Descriptor& conn = Descriptor{"zero", {}}, bool complex_field = false) {
    Connection c = make_connection(conn, 1, complex_field, g);
    Potential p = make_potential(pot, 1);
    BundleSpec b = make_bundle(1, complex_field, std::move(c), std::move(p), alpha);
    FieldSection sec = make_section(u, 1, g);
    return Setup{std::move(g), std::move(b), std::move(B), std::move(sec)};
}

EstimateOptions options(const Suite& s, std::uint64_t salt, long samples) {
    EstimateOptions o;
    o.seed = s.seed() * 1000003ULL + salt;
    o.samples = samples;
    o.workers = s.workers();
    return o;
}

void semigroup_checks(Suite& s) {
    // deterministic norm bound
    {
        const Setup neu = scalar_setup(GeometryModel::interval(0.0, kPi), Descriptor{"cosine-well", {1.0}}, 1.0,
                                       BoundaryOperator::neumann(1), Descriptor{"cos", {1.0}});
        double value_ratio = 0.0, weight_ratio = 0.0;
        for (int i = 0; i < 5; ++i) {
            const Vec x(0.2 + 0.7 * i, 0.0, 0.0);
            const SliceEstimate e = estimate_slice(neu.g, neu.b, neu.B, neu.u, x, Partition::uniform(0.5, 4),
                                                   options(s, 401 + i, 4000));
            value_ratio = std::max(value_ratio, e.value.norm() / (std::exp(0.5) * neu.u.sup_norm));
            weight_ratio = std::max(weight_ratio, e.max_weight_norm / std::exp(0.5));
        }
        s.upper("semigroup.estimate_norm_bound", value_ratio, 1.0, "||estimate|| / (exp(t alpha) sup|u|)");
        s.upper("semigroup.weight_norm_bound", weight_ratio, 1.0 + 1e-6);
    }
    // exact zero at a Dirichlet boundary point with antithetic pairing
    {
        const Setup dir = scalar_setup(GeometryModel::interval(0.0, kPi), Descriptor{"zero", {}}, 0.0,
                                       BoundaryOperator::dirichlet(1), Descriptor{"sin", {1.0}});
        EstimateOptions o = options(s, 410, 2000);
        o.antithetic = true;
        const SliceEstimate e = estimate_slice(dir.g, dir.b, dir.B, dir.u, Vec::Zero(), Partition::uniform(0.25, 4), o);
        s.upper("semigroup.dirichlet_boundary_zero", e.value.norm(), 0.0);
    }
    // flat exactness for every partition
    {
        struct Case {
            std::string name;
            Setup setup;
            std::vector<Vec> points;
            std::function<double(const Vec&, double)> exact;
        };
        std::vector<Case> cases;
        cases.push_back({"interval",
                         scalar_setup(GeometryModel::interval(0.0, kPi), Descriptor{"zero", {}}, 0.0,
                                      BoundaryOperator::dirichlet(1), Descriptor{"sin", {1.0}}),
                         {Vec(0.4, 0, 0), Vec(1.6, 0, 0), Vec(2.9, 0, 0)},
                         [](const Vec& x, double t) { return std::exp(-t) * std::sin(x[0]); }});
        cases.push_back({"circle",
                         scalar_setup(GeometryModel::circle(1.0), Descriptor{"zero", {}}, 0.0,
                                      BoundaryOperator::neumann(1), Descriptor{"cos", {1.0}}),
                         {Vec(0.3, 0, 0), Vec(2.0, 0, 0), Vec(4.5, 0, 0)},
                         [](const Vec& x, double t) { return std::exp(-t) * std::cos(x[0]); }});
        cases.push_back({"torus",
                         scalar_setup(GeometryModel::flat_torus(2.0 * kPi, 2.0 * kPi), Descriptor{"zero", {}}, 0.0,
                                      BoundaryOperator::neumann(1), Descriptor{"torus-cos", {1.0, 1.0}}),
                         {Vec(0.3, 1.0, 0), Vec(2.0, 5.0, 0), Vec(4.5, 3.0, 0)},
                         [](const Vec& x, double t) { return std::exp(-2.0 * t) * std::cos(x[0] + x[1]); }});
        for (const Case& c : cases) {
            double worst = 0.0;
            std::uint64_t salt = 420;
            for (int N : {1, 2, 4, 8})
                for (const Vec& x : c.points) {
                    const SliceEstimate e = estimate_slice(c.setup.g, c.setup.b, c.setup.B, c.setup.u, x,
                                                           Partition::uniform(0.25, N), options(s, salt++, 20000));
                    worst = std::max(worst, std::fabs(e.value(0).real() - c.exact(x, 0.25)) / e.stderr_re(0));
                }
            s.upper("semigroup.flat_exactness." + c.name, worst, 4.0, "max |error| / stderr over N in 1,2,4,8");
        }
    }
    // strong continuity at zero
    {
        const Setup neu = scalar_setup(GeometryModel::interval(0.0, kPi), Descriptor{"zero", {}}, 0.0,
                                       BoundaryOperator::neumann(1), Descriptor{"cos", {1.0}});
        std::vector<double> dist, se;
        std::uint64_t salt = 440;
        for (double t : {0.1, 0.05, 0.025}) {
            double d = 0.0, e = 0.0;
            for (double xv : {0.3, 1.2, 2.1, 2.9}) {
                const Vec x(xv, 0.0, 0.0);
                const SliceEstimate est = estimate_slice(neu.g, neu.b, neu.B, neu.u, x, Partition::uniform(t, 2),
                                                         options(s, salt++, 20000));
                d = std::max(d, std::fabs(est.value(0).real() - std::cos(xv)));
                e = std::max(e, est.stderr_re(0));
            }
            dist.push_back(d);
            se.push_back(e);
        }
        double violation = -1e300;
        for (std::size_t i = 1; i < dist.size(); ++i)
            violation = std::max(violation, dist[i] - dist[i - 1] - 2.0 * std::max(se[i], se[i - 1]));
        s.upper("semigroup.strong_continuity_monotone", violation, 0.0, "max increase beyond 2 stderr");
    }
    // composition against nested two-stage sampling
    {
        const Setup neu = scalar_setup(GeometryModel::interval(0.0, kPi), Descriptor{"cosine-well", {1.0}}, 1.0,
                                       BoundaryOperator::neumann(1), Descriptor{"cos", {1.0}});
        const Partition tau = Partition::uniform(0.1, 2), tau2 = Partition::uniform(0.1, 2);
        const Vec x(1.0, 0.0, 0.0);
        const SliceEstimate whole =
            estimate_slice(neu.g, neu.b, neu.B, neu.u, x, tau.concatenate(tau2), options(s, 450, 40000));
        FieldSection inner;
        inner.descriptor = Descriptor{"nested", {}};
        inner.rank = 1;
        inner.sup_norm = std::exp(0.1) * neu.u.sup_norm;
        const std::uint64_t inner_seed = s.seed() * 7919ULL + 451;
        inner.eval = [&neu, &tau2, inner_seed](const Vec& y, CVector& out) {
            EstimateOptions o;
            std::uint64_t bits;
            std::memcpy(&bits, &y[0], sizeof bits);
            o.seed = inner_seed ^ bits;
            o.samples = 16;
            out = estimate_slice(neu.g, neu.b, neu.B, neu.u, y, tau2, o).value;
        };
        EstimateOptions outer = options(s, 452, 8000);
        outer.workers = 1;
        const SliceEstimate nested = estimate_slice(neu.g, neu.b, neu.B, inner, x, tau, outer);
        const double diff = std::fabs(whole.value(0).real() - nested.value(0).real());
        const double se = std::hypot(whole.stderr_re(0), nested.stderr_re(0));
        s.upper("semigroup.composition_coarea", diff / se, 4.0, "|whole - nested| / combined stderr");
    }
    // worker-count independence
    {
        const Setup dir = scalar_setup(GeometryModel::interval(0.0, kPi), Descriptor{"cosine-well", {1.0}}, 1.0,
                                       BoundaryOperator::dirichlet(1), Descriptor{"sin", {1.0}});
        EstimateOptions a = options(s, 460, 10000), b = a;
        a.workers = 1;
        b.workers = 4;
        const Vec x(1.1, 0.0, 0.0);
        const SliceEstimate ea = estimate_slice(dir.g, dir.b, dir.B, dir.u, x, Partition::uniform(0.3, 3), a);
        const SliceEstimate eb = estimate_slice(dir.g, dir.b, dir.B, dir.u, x, Partition::uniform(0.3, 3), b);
        const bool same = ea.value(0) == eb.value(0) && ea.stderr_re(0) == eb.stderr_re(0);
        s.upper("semigroup.worker_independence", same ? 0.0 : std::abs(ea.value(0) - eb.value(0)) + 1e-300, 0.0);
    }
}

// ---------------------------------------------------------------- oracle

void oracle_checks(Suite& s) {
    SpectralModel dir;
    dir.tag = ProblemTag::interval_dirichlet;
    dir.lower = 0.0;
    dir.upper = kPi;
    SpectralModel neu = dir;
    neu.tag = ProblemTag::interval_neumann;

    PhiloxStream rng = s.stream(501);
    double agree = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double x = kPi * rng.uniform(), y = kPi * rng.uniform(), t = 0.05 + 0.95 * rng.uniform();
        agree = std::max(agree, std::fabs(spectral_kernel(dir, x, y, t) -
                                          image_kernel(ImageProblem::interval, ImageBc::dirichlet, x, y, t, 0.0, kPi)));
        agree = std::max(agree, std::fabs(spectral_kernel(neu, x, y, t) -
                                          image_kernel(ImageProblem::interval, ImageBc::neumann, x, y, t, 0.0, kPi)));
    }
    s.upper("oracle.kernel_agreement", agree, 1e-10);

    const GeometryModel g = GeometryModel::interval(0.0, kPi);
    double semi = 0.0;
    const FieldSection us = make_section(Descriptor{"sine-series", {1.0, -0.5, 0.25}}, 1, g);
    const FieldSection uc = make_section(Descriptor{"cos", {2.0}}, 1, g);
    const EvolvedSection d1 = spectral_evolve(dir, us, 0.15), d12 = spectral_evolve(dir, us, 0.35);
    const EvolvedSection n1 = spectral_evolve(neu, uc, 0.15), n12 = spectral_evolve(neu, uc, 0.35);
    for (double x : {0.3, 1.1, 2.0, 2.8}) {
        const Vec p(x, 0.0, 0.0);
        semi = std::max(semi, std::abs(apply_image_kernel(ImageBc::dirichlet, d1.section, x, 0.2, 0.0, kPi) -
                                       d12.section(p)(0)));
        semi = std::max(semi, std::abs(apply_image_kernel(ImageBc::neumann, n1.section, x, 0.2, 0.0, kPi) -
                                       n12.section(p)(0)));
    }
    s.upper("oracle.semigroup_property", semi, 1e-10);

    const double edge = std::max(std::abs(d12.section(Vec(0.0, 0, 0))(0)), std::abs(d12.section(Vec(kPi, 0, 0))(0)));
    s.upper("oracle.dirichlet_boundary_value", edge, 1e-12);
    const double h = 1e-7;
    const double slope = std::max(std::abs(n12.section(Vec(h, 0, 0))(0) - n12.section(Vec(0.0, 0, 0))(0)) / h,
                                  std::abs(n12.section(Vec(kPi, 0, 0))(0) - n12.section(Vec(kPi - h, 0, 0))(0)) / h);
    s.upper("oracle.neumann_boundary_slope", slope, 1e-6);
}

// ---------------------------------------------------------------- harness

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void harness_checks(Suite& s) {
    RunConfig cfg = default_config();
    cfg.geometry = Descriptor{"disk", {1.0}};
    cfg.grid = {{0.1, -0.2}, {0.5, 0.5}};
    cfg.partitions = {1, 3};
    cfg.section = Descriptor{"gauss", {0.0, 0.0, 0.7}};
    cfg.boundary = Descriptor{"neumann", {}};
    cfg.samples = 3000;
    cfg.seed = s.seed();
    cfg.descriptive = true;
    cfg.oracle = "none";
    const RunConfig back = parse_config(serialize_config(cfg));
    s.upper("harness.config_roundtrip", back == cfg ? 0.0 : 1.0, 0.0);

    const auto base = std::filesystem::temp_directory_path() /
                      ("heatpath-props-" + std::to_string(s.seed()) + "-" + std::to_string(::getpid()));
    std::string first;
    bool identical = true;
    for (int w : {1, 2, 8}) {
        cfg.workers = w;
        const auto dir = base / ("w" + std::to_string(w));
        const auto files = emit_report(run_convergence(cfg), dir.string(), OutputFormat::csv);
        std::string all;
        for (const auto& f : files) all += slurp(f);
        if (first.empty()) first = all;
        else identical = identical && all == first;
    }
    std::error_code ec;
    std::filesystem::remove_all(base, ec);
    s.upper("harness.reproducible_across_workers", identical ? 0.0 : 1.0, 0.0, "workers 1, 2, 8");
}

}  // namespace

PropertyReport run_property_suite(const RunConfig& cfg) {
    Suite s(cfg);
    using Group = void (*)(Suite&);
    const std::pair<const char*, Group> groups[] = {{"geometry", geometry_checks}, {"billiard", billiard_checks},
                                                    {"bundle", bundle_checks},     {"semigroup", semigroup_checks},
                                                    {"oracle", oracle_checks},     {"harness", harness_checks}};
    for (const auto& [name, group] : groups) {
        try {
            group(s);
        } catch (const std::exception& e) {
            s.failed(std::string(name) + ".error", e.what());
        }
    }
    return std::move(s.report);
}

}  // namespace heatpath
