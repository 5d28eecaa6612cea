#include "heatpath/geometry.hpp"

#include "heatpath/descriptor.hpp"
#include "heatpath/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace heatpath {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_periodic(double x, double period) {
    double r = std::fmod(x, period);
    if (r < 0.0) r += period;
    if (r >= period) r -= period;
    return r;
}

double periodic_gap(double a, double b, double period) {
    double d = std::fabs(wrap_periodic(a - b, period));
    return std::min(d, period - d);
}

std::string fmt(double v) { return format_double(v); }

}  // namespace

const char* to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::interval: return "interval";
        case ModelKind::disk: return "disk";
        case ModelKind::implicit_planar: return "implicit";
        case ModelKind::circle: return "circle";
        case ModelKind::flat_torus: return "torus";
        case ModelKind::sphere: return "sphere";
    }
    return "?";
}

const char* to_string(PointClass cls) {
    switch (cls) {
        case PointClass::interior: return "interior";
        case PointClass::boundary: return "boundary";
        case PointClass::outside: return "outside";
    }
    return "?";
}

GeometryModel GeometryModel::interval(double a, double b) {
    if (!(a < b) || !std::isfinite(a) || !std::isfinite(b))
        fail(ErrorCode::invalid_input, "interval requires finite a < b");
    GeometryModel g;
    g.kind_ = ModelKind::interval;
    g.p0_ = a;
    g.p1_ = b;
    return g;
}

GeometryModel GeometryModel::disk(double radius) {
    if (!(radius > 0.0) || !std::isfinite(radius))
        fail(ErrorCode::invalid_input, "disk radius must be positive");
    GeometryModel g;
    g.kind_ = ModelKind::disk;
    g.p0_ = radius;
    return g;
}

GeometryModel GeometryModel::circle(double radius) {
    if (!(radius > 0.0) || !std::isfinite(radius))
        fail(ErrorCode::invalid_input, "circle radius must be positive");
    GeometryModel g;
    g.kind_ = ModelKind::circle;
    g.p0_ = radius;
    return g;
}

GeometryModel GeometryModel::flat_torus(double l1, double l2) {
    if (!(l1 > 0.0) || !(l2 > 0.0) || !std::isfinite(l1) || !std::isfinite(l2))
        fail(ErrorCode::invalid_input, "torus periods must be positive");
    GeometryModel g;
    g.kind_ = ModelKind::flat_torus;
    g.p0_ = l1;
    g.p1_ = l2;
    return g;
}

GeometryModel GeometryModel::sphere(double radius) {
    if (!(radius > 0.0) || !std::isfinite(radius))
        fail(ErrorCode::invalid_input, "sphere radius must be positive");
    GeometryModel g;
    g.kind_ = ModelKind::sphere;
    g.p0_ = radius;
    return g;
}

GeometryModel GeometryModel::implicit_planar(LevelSet level) {
    if (!level.value || !level.gradient)
        fail(ErrorCode::invalid_input, "implicit domain needs a level function and its gradient");
    if (!(level.lipschitz > 0.0) || !(level.characteristic_size > 0.0))
        fail(ErrorCode::invalid_input, "implicit domain needs positive lipschitz bound and size");
    for (const Vec& b : level.boundary_samples) {
        if (!(level.gradient(b).head<2>().norm() > 0.0))
            fail(ErrorCode::invalid_input, "degenerate level set: vanishing gradient on the boundary");
    }
    GeometryModel g;
    g.kind_ = ModelKind::implicit_planar;
    g.level_ = std::move(level);
    g.hit_tolerance_ = kImplicitHitTolerance;
    return g;
}

GeometryModel GeometryModel::ellipse(double a, double b) {
    if (!(a > 0.0) || !(b > 0.0)) fail(ErrorCode::invalid_input, "ellipse semi-axes must be positive");
    LevelSet ls;
    ls.name = "ellipse";
    ls.params = {a, b};
    ls.value = [a, b](const Vec& x) { return 1.0 - (x[0] * x[0]) / (a * a) - (x[1] * x[1]) / (b * b); };
    ls.gradient = [a, b](const Vec& x) { return Vec(-2.0 * x[0] / (a * a), -2.0 * x[1] / (b * b), 0.0); };
    // on the box [-1.5a,1.5a]x[-1.5b,1.5b]
    ls.lipschitz = 3.0 * std::hypot(1.0 / a, 1.0 / b);
    ls.characteristic_size = std::min(a, b);
    for (int i = 0; i < 64; ++i) {
        double th = kTwoPi * i / 64.0;
        ls.boundary_samples.emplace_back(a * std::cos(th), b * std::sin(th), 0.0);
    }
    return implicit_planar(std::move(ls));
}

GeometryModel GeometryModel::lens(double separation) {
    if (!(separation > 0.0) || !(separation < 2.0))
        fail(ErrorCode::invalid_input, "lens separation must lie in (0,2)");
    const double h = separation / 2.0;
    LevelSet ls;
    ls.name = "lens";
    ls.params = {separation};
    auto f1 = [h](const Vec& x) { return 1.0 - (x[0] + h) * (x[0] + h) - x[1] * x[1]; };
    auto f2 = [h](const Vec& x) { return 1.0 - (x[0] - h) * (x[0] - h) - x[1] * x[1]; };
    ls.value = [f1, f2](const Vec& x) { return std::min(f1(x), f2(x)); };
    ls.gradient = [f1, f2, h](const Vec& x) {
        if (f1(x) <= f2(x)) return Vec(-2.0 * (x[0] + h), -2.0 * x[1], 0.0);
        return Vec(-2.0 * (x[0] - h), -2.0 * x[1], 0.0);
    };
    ls.lipschitz = 2.0 * (2.0 + separation);
    const double yc = std::sqrt(1.0 - h * h);
    ls.characteristic_size = std::min(yc, 1.0 - h);
    ls.corners = {Vec(0.0, yc, 0.0), Vec(0.0, -yc, 0.0)};
    for (int i = 1; i < 16; ++i) {
        double th = std::asin(yc) * (2.0 * i / 16.0 - 1.0);
        ls.boundary_samples.emplace_back(-h + std::cos(th), std::sin(th), 0.0);
        ls.boundary_samples.emplace_back(h - std::cos(th), std::sin(th), 0.0);
    }
    return implicit_planar(std::move(ls));
}

GeometryModel GeometryModel::with_tolerances(double hit_tolerance, double grazing_threshold) const {
    if (!(hit_tolerance > 0.0) || !(grazing_threshold >= 0.0))
        fail(ErrorCode::invalid_input, "tolerances must be positive");
    GeometryModel g = *this;
    g.hit_tolerance_ = hit_tolerance;
    g.grazing_threshold_ = grazing_threshold;
    return g;
}

int GeometryModel::dim() const {
    switch (kind_) {
        case ModelKind::interval:
        case ModelKind::circle: return 1;
        default: return 2;
    }
}

int GeometryModel::ambient_dim() const { return kind_ == ModelKind::sphere ? 3 : dim(); }

bool GeometryModel::has_boundary() const {
    return kind_ == ModelKind::interval || kind_ == ModelKind::disk ||
           kind_ == ModelKind::implicit_planar;
}

std::string GeometryModel::descriptor() const {
    switch (kind_) {
        case ModelKind::interval: return "interval(" + fmt(p0_) + "," + fmt(p1_) + ")";
        case ModelKind::disk: return "disk(" + fmt(p0_) + ")";
        case ModelKind::circle: return "circle(" + fmt(p0_) + ")";
        case ModelKind::flat_torus: return "torus(" + fmt(p0_) + "," + fmt(p1_) + ")";
        case ModelKind::sphere: return "sphere(" + fmt(p0_) + ")";
        case ModelKind::implicit_planar: {
            std::string s = level_->name + "(";
            for (std::size_t i = 0; i < level_->params.size(); ++i)
                s += (i ? "," : "") + fmt(level_->params[i]);
            return s + ")";
        }
    }
    return "?";
}

void GeometryModel::check_finite(const Vec& x) const {
    for (int i = 0; i < ambient_dim(); ++i)
        if (!std::isfinite(x[i])) fail(ErrorCode::invalid_input, "non-finite coordinates");
}

double GeometryModel::level_value(const Vec& x) const { return level_->value(x); }
Vec GeometryModel::level_gradient(const Vec& x) const { return level_->gradient(x); }

double GeometryModel::boundary_distance(const Vec& x) const {
    check_finite(x);
    switch (kind_) {
        case ModelKind::interval: return std::min(x[0] - p0_, p1_ - x[0]);
        case ModelKind::disk: return p0_ - x.head<2>().norm();
        case ModelKind::implicit_planar: {
            const double f = level_value(x);
            const double gn = level_gradient(x).head<2>().norm();
            if (gn > 0.0) return f / gn;
            return f > 0.0 ? std::numeric_limits<double>::infinity()
                           : -std::numeric_limits<double>::infinity();
        }
        default: return std::numeric_limits<double>::infinity();
    }
}

PointClass GeometryModel::classify(const Vec& x) const {
    check_finite(x);
    if (kind_ == ModelKind::sphere) {
        return std::fabs(x.norm() - p0_) <= 1e-10 * p0_ ? PointClass::interior : PointClass::outside;
    }
    if (!has_boundary()) return PointClass::interior;
    const double d = boundary_distance(x);
    if (std::fabs(d) <= hit_tolerance_) return PointClass::boundary;
    // hits on implicit domains are accepted when |f| is within tolerance
    if (kind_ == ModelKind::implicit_planar && std::fabs(level_value(x)) <= hit_tolerance_)
        return PointClass::boundary;
    return d > 0.0 ? PointClass::interior : PointClass::outside;
}

Vec GeometryModel::inward_normal(const Vec& x) const {
    if (!has_boundary()) fail(ErrorCode::unsupported, std::string(to_string(kind_)) + " has no boundary");
    if (classify(x) != PointClass::boundary)
        fail(ErrorCode::domain, "inward normal requested away from the boundary");
    switch (kind_) {
        case ModelKind::interval:
            return Vec((x[0] - p0_) < (p1_ - x[0]) ? 1.0 : -1.0, 0.0, 0.0);
        case ModelKind::disk: {
            Vec n(-x[0], -x[1], 0.0);
            return n / n.norm();
        }
        default: {
            Vec g = level_gradient(x);
            g[2] = 0.0;
            return g / g.norm();
        }
    }
}

Vec GeometryModel::reflect(const Vec& x, const Vec& v) const {
    const Vec n = inward_normal(x);
    return v - 2.0 * v.dot(n) * n;
}

Vec GeometryModel::wrap(const Vec& x) const {
    switch (kind_) {
        case ModelKind::circle: return Vec(wrap_periodic(x[0], kTwoPi), 0.0, 0.0);
        case ModelKind::flat_torus: return Vec(wrap_periodic(x[0], p0_), wrap_periodic(x[1], p1_), 0.0);
        default: return x;
    }
}

double GeometryModel::position_distance(const Vec& a, const Vec& b) const {
    switch (kind_) {
        case ModelKind::circle: return p0_ * periodic_gap(a[0], b[0], kTwoPi);
        case ModelKind::flat_torus:
            return std::hypot(periodic_gap(a[0], b[0], p0_), periodic_gap(a[1], b[1], p1_));
        default: return (a - b).norm();
    }
}

PhasePoint GeometryModel::advance(const PhasePoint& p, double s) const {
    if (!(s >= 0.0) || !std::isfinite(s)) fail(ErrorCode::invalid_input, "advance duration must be >= 0");
    PhasePoint out = p;
    switch (kind_) {
        case ModelKind::interval:
        case ModelKind::disk:
        case ModelKind::implicit_planar:
            out.position = p.position + s * p.velocity;
            break;
        case ModelKind::circle:
            out.position[0] = wrap_periodic(p.position[0] + s * p.velocity[0] / p0_, kTwoPi);
            break;
        case ModelKind::flat_torus:
            out.position = wrap(p.position + s * p.velocity);
            break;
        case ModelKind::sphere: {
            const double speed = p.velocity.norm();
            if (speed == 0.0 || s == 0.0) break;
            const Vec e = p.velocity / speed;
            const double angle = s * speed / p0_;
            const double c = std::cos(angle), sn = std::sin(angle);
            Vec x = c * p.position + (sn * p0_) * e;
            Vec v = speed * (c * e - (sn / p0_) * p.position);
            // re-project against rounding drift
            x *= p0_ / x.norm();
            v -= (v.dot(x) / (p0_ * p0_)) * x;
            v *= speed / v.norm();
            out.position = x;
            out.velocity = v;
            break;
        }
    }
    return out;
}

std::optional<BoundaryHit> GeometryModel::first_boundary_hit(const PhasePoint& p, double s_max) const {
    if (!has_boundary()) return std::nullopt;
    if (!(s_max > 0.0)) fail(ErrorCode::invalid_input, "s_max must be positive");
    if (classify(p.position) == PointClass::outside)
        fail(ErrorCode::domain, "phase point lies outside the domain");
    const Vec& x = p.position;
    const Vec& v = p.velocity;
    switch (kind_) {
        case ModelKind::interval: {
            if (v[0] == 0.0) return std::nullopt;
            const double target = v[0] > 0.0 ? p1_ : p0_;
            const double t = (target - x[0]) / v[0];
            if (!(t > 0.0) || t > s_max) return std::nullopt;
            return BoundaryHit{t, Vec(target, 0.0, 0.0), 1.0};
        }
        case ModelKind::disk: {
            const double a = v.head<2>().squaredNorm();
            if (a == 0.0) return std::nullopt;
            const double b = x.head<2>().dot(v.head<2>());
            const double c = x.head<2>().squaredNorm() - p0_ * p0_;
            const double disc = std::max(b * b - a * c, 0.0);
            const double sq = std::sqrt(disc);
            // larger root of a s^2 + 2 b s + c, evaluated without cancellation
            const double t = b < 0.0 ? (-b + sq) / a : -c / (b + sq);
            if (!(t > 0.0) || t > s_max) return std::nullopt;
            Vec hit = x + t * v;
            hit[2] = 0.0;
            hit *= p0_ / hit.norm();
            const double cosine = std::fabs(v.head<2>().dot(hit.head<2>())) / (std::sqrt(a) * p0_);
            return BoundaryHit{t, hit, cosine};
        }
        case ModelKind::implicit_planar: return implicit_hit(p, s_max);
        default: return std::nullopt;
    }
}

std::optional<BoundaryHit> GeometryModel::implicit_hit(const PhasePoint& p, double s_max) const {
    const double speed = p.velocity.head<2>().norm();
    if (speed == 0.0) return std::nullopt;
    const double tol = hit_tolerance_;
    // minimum marching step in time units
    const double min_step = std::sqrt(tol) * level_->characteristic_size / speed;
    auto f_at = [&](double s) { return level_value(p.position + s * p.velocity); };

    double lo = 0.0;
    double f_lo = f_at(0.0);
    double hi = -1.0;
    while (lo < s_max) {
        // f is Lipschitz, so no crossing can occur within f / (lip * speed)
        const double safe = std::max(f_lo, 0.0) / (level_->lipschitz * speed);
        const double s = std::min(s_max, lo + std::max(safe, min_step));
        const double f = f_at(s);
        if (f < -tol) {
            hi = s;
            break;
        }
        if (s >= s_max) {
            if (std::fabs(f) <= tol && s > 0.0) {
                hi = s;  // ends on the boundary
            }
            break;
        }
        lo = s;
        f_lo = f;
    }
    if (hi < 0.0) return std::nullopt;

    double t_hit = hi;
    if (f_at(hi) < -tol) {
        double a = lo, b = hi;
        t_hit = a;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (a + b);
            // bisect to machine precision; a loose root breaks time reversal after a few bounces
            const double f = f_at(mid);
            if (f >= 0.0) a = mid;
            else b = mid;
            t_hit = a;
            if (b - a <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, b)) break;
        }
    }
    if (!(t_hit > 0.0)) return std::nullopt;
    Vec hit = p.position + t_hit * p.velocity;
    hit[2] = 0.0;
    Vec grad = level_gradient(hit);
    grad[2] = 0.0;
    const double gn = grad.norm();
    const double cosine = gn > 0.0 ? std::fabs(p.velocity.dot(grad)) / (speed * gn) : 0.0;
    return BoundaryHit{t_hit, hit, cosine};
}

void GeometryModel::tangent_basis(const Vec& x, Vec& e1, Vec& e2) const {
    if (kind_ != ModelKind::sphere) {
        e1 = Vec::UnitX();
        e2 = Vec::UnitY();
        return;
    }
    const Vec n = x / x.norm();
    // least-aligned coordinate axis keeps the basis well conditioned
    int axis = 0;
    if (std::fabs(n[1]) < std::fabs(n[axis])) axis = 1;
    if (std::fabs(n[2]) < std::fabs(n[axis])) axis = 2;
    Vec a = Vec::Zero();
    a[axis] = 1.0;
    e1 = (a - a.dot(n) * n).normalized();
    e2 = n.cross(e1);
}

Vec GeometryModel::tangent_vector(const Vec& x, double c0, double c1) const {
    if (dim() == 1) return Vec(c0, 0.0, 0.0);
    Vec e1, e2;
    tangent_basis(x, e1, e2);
    return c0 * e1 + c1 * e2;
}

}  // namespace heatpath
