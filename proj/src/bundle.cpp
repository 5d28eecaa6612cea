#include "heatpath/bundle.hpp"

#include "heatpath/error.hpp"
#include "heatpath/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace heatpath {

namespace {

constexpr Complex kI{0.0, 1.0};

void require_rank(const Descriptor& d, int rank, int needed) {
    if (rank != needed)
        fail(ErrorCode::validation, d.name + " requires rank " + std::to_string(needed));
}

void require_params(const Descriptor& d, std::size_t n) {
    if (d.params.size() != n)
        fail(ErrorCode::validation, d.name + " expects " + std::to_string(n) + " parameter(s)");
}

double operator_norm(const Matrix& m) {
    if (m.rows() == 1) return std::abs(m(0, 0));
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues()(0);
}

}  // namespace

Connection make_connection(const Descriptor& d, int rank, bool complex_field, const GeometryModel& g) {
    Connection c;
    c.descriptor = d;
    if (d.name == "zero") {
        require_params(d, 0);
        c.eval = [](const Vec&, const Vec&, Matrix& out) { out.setZero(); };
        return c;
    }
    c.is_zero = false;
    if (d.name == "circle-holonomy") {
        require_params(d, 1);
        require_rank(d, rank, 1);
        if (!complex_field) fail(ErrorCode::validation, "circle-holonomy needs a complex bundle");
        if (g.kind() != ModelKind::circle) fail(ErrorCode::validation, "circle-holonomy lives on a circle");
        // omega = c dtheta, dtheta(xi) = xi / r for arclength velocities
        const double k = d.params[0] / g.radius();
        c.bound_per_speed = std::fabs(k);
        c.eval = [k](const Vec&, const Vec& xi, Matrix& out) { out(0, 0) = kI * (k * xi[0]); };
        return c;
    }
    if (d.name == "u1") {
        require_params(d, 1);
        if (!complex_field) fail(ErrorCode::validation, "u1 needs a complex bundle");
        const double k = d.params[0];
        c.bound_per_speed = std::fabs(k);
        c.eval = [k](const Vec&, const Vec& xi, Matrix& out) {
            out.setZero();
            out.diagonal().setConstant(kI * (k * xi[0]));
        };
        return c;
    }
    if (d.name == "offdiag") {
        require_params(d, 1);
        require_rank(d, rank, 2);
        const double k = d.params[0];
        c.bound_per_speed = std::fabs(k);
        c.eval = [k](const Vec&, const Vec& xi, Matrix& out) {
            out(0, 0) = 0.0;
            out(1, 1) = 0.0;
            out(0, 1) = k * xi[0];
            out(1, 0) = -k * xi[0];
        };
        return c;
    }
    if (d.name == "su2") {
        require_params(d, 1);
        require_rank(d, rank, 2);
        if (!complex_field) fail(ErrorCode::validation, "su2 needs a complex bundle");
        const double k = d.params[0];
        c.bound_per_speed = std::fabs(k);
        // i k (xi_0 sigma_x + xi_1 sigma_z)
        c.eval = [k](const Vec&, const Vec& xi, Matrix& out) {
            out(0, 0) = kI * (k * xi[1]);
            out(1, 1) = -kI * (k * xi[1]);
            out(0, 1) = kI * (k * xi[0]);
            out(1, 0) = kI * (k * xi[0]);
        };
        return c;
    }
    fail(ErrorCode::validation, "unknown connection '" + d.name + "'");
}

Potential make_potential(const Descriptor& d, int rank) {
    Potential p;
    p.descriptor = d;
    if (d.name == "zero") {
        require_params(d, 0);
        p.eval = [](const Vec&, Matrix& out) { out.setZero(); };
        return p;
    }
    p.is_zero = false;
    if (d.name == "constant") {
        require_params(d, 1);
        const double a = d.params[0];
        p.sup_norm = std::fabs(a);
        p.eval = [a](const Vec&, Matrix& out) {
            out.setZero();
            out.diagonal().setConstant(a);
        };
        return p;
    }
    if (d.name == "diagonal") {
        require_params(d, static_cast<std::size_t>(rank));
        std::vector<double> a = d.params;
        for (double x : a) p.sup_norm = std::max(p.sup_norm, std::fabs(x));
        p.eval = [a](const Vec&, Matrix& out) {
            out.setZero();
            for (std::size_t i = 0; i < a.size(); ++i) out(i, i) = a[i];
        };
        return p;
    }
    if (d.name == "cosine-well") {
        require_params(d, 1);
        const double a = d.params[0];
        p.sup_norm = std::fabs(a);
        p.eval = [a](const Vec& x, Matrix& out) {
            out.setZero();
            out.diagonal().setConstant(a * std::cos(x[0]));
        };
        return p;
    }
    if (d.name == "coupled") {
        require_params(d, 3);
        require_rank(d, rank, 2);
        const double a = d.params[0], b = d.params[1], c = d.params[2];
        p.sup_norm = std::sqrt(a * a + b * b + 2.0 * c * c);
        p.eval = [a, b, c](const Vec& x, Matrix& out) {
            const double off = c * std::sin(x[0] + x[1]);
            out(0, 0) = a * std::cos(x[0]);
            out(1, 1) = b * std::cos(x[1]);
            out(0, 1) = off;
            out(1, 0) = off;
        };
        return p;
    }
    fail(ErrorCode::validation, "unknown potential '" + d.name + "'");
}

BundleSpec make_bundle(int rank, bool complex_field, Connection connection, Potential potential, double alpha) {
    if (rank < 1) fail(ErrorCode::invalid_input, "bundle rank must be >= 1");
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) fail(ErrorCode::invalid_input, "alpha must be >= 0");
    if (!connection.eval || !potential.eval) fail(ErrorCode::invalid_input, "bundle data missing");
    if (alpha < potential.sup_norm)
        fail(ErrorCode::validation, "alpha " + format_double(alpha) + " is below the potential bound " +
                                        format_double(potential.sup_norm));
    BundleSpec b;
    b.rank = rank;
    b.complex_field = complex_field;
    b.connection = std::move(connection);
    b.potential = std::move(potential);
    b.alpha = alpha;
    return b;
}

namespace {

Vec sample_position(const GeometryModel& g, PhiloxStream& rng) {
    switch (g.kind()) {
        case ModelKind::interval: {
            const double u = rng.uniform();
            return Vec(g.lower() + u * (g.upper() - g.lower()), 0.0, 0.0);
        }
        case ModelKind::disk: {
            const double r = g.radius() * std::sqrt(rng.uniform());
            const double th = 2.0 * std::numbers::pi * rng.uniform();
            return Vec(r * std::cos(th), r * std::sin(th), 0.0);
        }
        case ModelKind::implicit_planar: {
            // rejection from a box grown around the boundary samples
            const LevelSet& ls = *g.level_set();
            Eigen::Vector2d lo(1e300, 1e300), hi(-1e300, -1e300);
            for (const Vec& b : ls.boundary_samples) {
                lo = lo.cwiseMin(b.head<2>());
                hi = hi.cwiseMax(b.head<2>());
            }
            const Eigen::Vector2d pad = 0.1 * (hi - lo);
            lo -= pad;
            hi += pad;
            for (int tries = 0; tries < 10000; ++tries) {
                Vec x(lo[0] + rng.uniform() * (hi[0] - lo[0]), lo[1] + rng.uniform() * (hi[1] - lo[1]), 0.0);
                if (ls.value(x) >= 0.0) return x;
            }
            return ls.boundary_samples.front();
        }
        case ModelKind::circle: return Vec(2.0 * std::numbers::pi * rng.uniform(), 0.0, 0.0);
        case ModelKind::flat_torus: return Vec(g.period(0) * rng.uniform(), g.period(1) * rng.uniform(), 0.0);
        case ModelKind::sphere: {
            Vec x(rng.normal(), rng.normal(), rng.normal());
            return g.radius() * x / x.norm();
        }
    }
    return Vec::Zero();
}

Vec sample_unit_tangent(const GeometryModel& g, const Vec& x, PhiloxStream& rng) {
    if (g.dim() == 1) return Vec(rng.uniform() < 0.5 ? -1.0 : 1.0, 0.0, 0.0);
    const double th = 2.0 * std::numbers::pi * rng.uniform();
    return g.tangent_vector(x, std::cos(th), std::sin(th));
}

/// Random boundary point together with a unit boundary-tangent vector (zero in 1-D).
bool sample_boundary(const GeometryModel& g, PhiloxStream& rng, Vec& x, Vec& tangent) {
    switch (g.kind()) {
        case ModelKind::interval:
            x = Vec(rng.uniform() < 0.5 ? g.lower() : g.upper(), 0.0, 0.0);
            tangent = Vec::Zero();
            return true;
        case ModelKind::disk: {
            const double th = 2.0 * std::numbers::pi * rng.uniform();
            x = Vec(g.radius() * std::cos(th), g.radius() * std::sin(th), 0.0);
            tangent = Vec(-std::sin(th), std::cos(th), 0.0);
            return true;
        }
        case ModelKind::implicit_planar: {
            const auto& samples = g.level_set()->boundary_samples;
            if (samples.empty()) return false;
            x = samples[rng.next_u32() % samples.size()];
            Vec n = g.level_set()->gradient(x);
            n[2] = 0.0;
            n.normalize();
            tangent = Vec(-n[1], n[0], 0.0);
            return true;
        }
        default: return false;
    }
}

}  // namespace

BundleValidation validate_bundle(const BundleSpec& b, const GeometryModel& g, std::uint64_t seed, int samples) {
    BundleValidation r;
    PhiloxStream rng(seed, 0);
    Matrix a(b.rank, b.rank), v(b.rank, b.rank);
    for (int i = 0; i < samples; ++i) {
        const Vec x = sample_position(g, rng);
        const Vec xi = sample_unit_tangent(g, x, rng);
        b.connection.eval(x, xi, a);
        b.potential.eval(x, v);
        r.max_skew_violation = std::max(r.max_skew_violation, (a + a.adjoint()).norm());
        r.max_symmetry_violation = std::max(r.max_symmetry_violation, (v - v.adjoint()).norm());
        r.sampled_potential_sup = std::max(r.sampled_potential_sup, operator_norm(v));
        if (!b.complex_field) {
            r.max_skew_violation = std::max(r.max_skew_violation, a.imag().norm());
            r.max_symmetry_violation = std::max(r.max_symmetry_violation, v.imag().norm());
        }
    }
    r.alpha_covers_potential = b.alpha >= r.sampled_potential_sup;
    r.valid = r.max_skew_violation <= 1e-10 && r.max_symmetry_violation <= 1e-10 && r.alpha_covers_potential;
    return r;
}

BoundaryOperator BoundaryOperator::dirichlet(int rank) {
    if (rank < 1) fail(ErrorCode::invalid_input, "rank must be >= 1");
    BoundaryOperator op;
    op.b_ = -Matrix::Identity(rank, rank);
    op.preset_ = BoundaryPreset::dirichlet;
    op.signs_.assign(rank, -1);
    op.scalar_sign_ = -1;
    return op;
}

BoundaryOperator BoundaryOperator::neumann(int rank) {
    if (rank < 1) fail(ErrorCode::invalid_input, "rank must be >= 1");
    BoundaryOperator op;
    op.b_ = Matrix::Identity(rank, rank);
    op.preset_ = BoundaryPreset::neumann;
    op.signs_.assign(rank, 1);
    op.scalar_sign_ = 1;
    return op;
}

BoundaryOperator BoundaryOperator::blockwise(const std::vector<int>& signs) {
    if (signs.empty()) fail(ErrorCode::invalid_input, "blockwise operator needs at least one sign");
    BoundaryOperator op;
    const int k = static_cast<int>(signs.size());
    op.b_ = Matrix::Zero(k, k);
    bool all_plus = true, all_minus = true;
    for (int i = 0; i < k; ++i) {
        if (signs[i] != 1 && signs[i] != -1) fail(ErrorCode::validation, "blockwise signs must be +1 or -1");
        op.b_(i, i) = signs[i];
        all_plus = all_plus && signs[i] == 1;
        all_minus = all_minus && signs[i] == -1;
    }
    op.preset_ = BoundaryPreset::blockwise;
    op.signs_ = signs;
    op.scalar_sign_ = all_plus ? 1 : (all_minus ? -1 : 0);
    return op;
}

BoundaryOperator BoundaryOperator::custom(const Matrix& b) {
    if (b.rows() != b.cols() || b.rows() < 1) fail(ErrorCode::invalid_input, "boundary operator must be square");
    const Matrix id = Matrix::Identity(b.rows(), b.cols());
    if ((b * b - id).norm() > 1e-12) fail(ErrorCode::validation, "boundary operator is not an involution");
    if ((b - b.adjoint()).norm() > 1e-12) fail(ErrorCode::validation, "boundary operator is not symmetric");
    BoundaryOperator op;
    op.b_ = b;
    op.preset_ = BoundaryPreset::custom;
    if ((b - id).norm() <= 1e-12) op.scalar_sign_ = 1;
    else if ((b + id).norm() <= 1e-12) op.scalar_sign_ = -1;
    else op.scalar_sign_ = 0;
    return op;
}

Matrix BoundaryOperator::projector_plus() const {
    return 0.5 * (Matrix::Identity(rank(), rank()) + b_);
}

Matrix BoundaryOperator::projector_minus() const {
    return 0.5 * (Matrix::Identity(rank(), rank()) - b_);
}

std::string BoundaryOperator::descriptor() const {
    switch (preset_) {
        case BoundaryPreset::dirichlet: return "dirichlet";
        case BoundaryPreset::neumann: return "neumann";
        case BoundaryPreset::blockwise: {
            Descriptor d{"blockwise", {}};
            for (int s : signs_) d.params.push_back(s);
            return format_descriptor(d);
        }
        case BoundaryPreset::custom: return "custom";
    }
    return "?";
}

BoundaryOperator make_boundary_operator(const Descriptor& d, int rank) {
    if (d.name == "dirichlet") {
        require_params(d, 0);
        return BoundaryOperator::dirichlet(rank);
    }
    if (d.name == "neumann") {
        require_params(d, 0);
        return BoundaryOperator::neumann(rank);
    }
    if (d.name == "blockwise") {
        require_params(d, static_cast<std::size_t>(rank));
        std::vector<int> signs;
        for (double s : d.params) signs.push_back(static_cast<int>(std::lround(s)));
        return BoundaryOperator::blockwise(signs);
    }
    fail(ErrorCode::validation, "unknown boundary operator '" + d.name + "'");
}

BoundaryValidation validate_boundary_operator(const BundleSpec& b, const BoundaryOperator& B,
                                              const GeometryModel& g, std::uint64_t seed, int samples) {
    BoundaryValidation r;
    if (B.rank() != b.rank) fail(ErrorCode::validation, "boundary operator rank does not match bundle rank");
    if (!g.has_boundary()) {
        r.note = "closed geometry: no boundary condition to check";
        return r;
    }
    const Matrix& m = B.matrix();
    const Matrix id = Matrix::Identity(m.rows(), m.cols());
    r.involution_error = (m * m - id).norm();
    r.symmetry_error = (m - m.adjoint()).norm();
    const Matrix pp = B.projector_plus(), pm = B.projector_minus();
    r.projector_error = std::max({(pp * pp - pp).norm(), (pm * pm - pm).norm(), (pp - pp.adjoint()).norm(),
                                  (pm - pm.adjoint()).norm(), (pp * pm).norm()});
    PhiloxStream rng(seed, 0);
    Matrix a(b.rank, b.rank);
    for (int i = 0; i < samples; ++i) {
        Vec x, tangent;
        if (!sample_boundary(g, rng, x, tangent)) break;
        if (tangent.squaredNorm() == 0.0) continue;
        b.connection.eval(x, tangent, a);
        r.max_commutator = std::max(r.max_commutator, (a * m - m * a).norm());
    }
    r.valid = r.involution_error <= 1e-12 && r.symmetry_error <= 1e-12 && r.projector_error <= 1e-12 &&
              r.max_commutator <= 1e-8;
    if (!r.valid) {
        if (r.max_commutator > 1e-8) r.note = "B is not parallel along the boundary: [A(xi), B] != 0";
        else r.note = "B is not a symmetric involution";
    }
    return r;
}

int transport_substeps(const BundleSpec& b, double speed, double duration, int refinement) {
    if (duration <= 0.0) return 0;
    const double h_max = 0.01 / (b.alpha + b.connection.bound_per_speed * speed + 1.0);
    const int n = static_cast<int>(std::ceil(duration / h_max - 1e-12));
    return std::max(1, n) * std::max(1, refinement);
}

namespace {

/// Generator F(s) = V(gamma(s)) - A(gamma(s), gamma'(s)) on a segment.
struct SegmentField {
    const BundleSpec& b;
    const GeometryModel& g;
    const PathSegment& seg;
    Matrix a;

    SegmentField(const BundleSpec& b_, const GeometryModel& g_, const PathSegment& s)
        : b(b_), g(g_), seg(s), a(b_.rank, b_.rank) {}

    void operator()(double s, Matrix& out) {
        const PhasePoint p = s == 0.0 ? seg.start : g.advance(seg.start, s);
        b.potential.eval(p.position, out);
        if (!b.connection.is_zero) {
            b.connection.eval(p.position, p.velocity, a);
            out -= a;
        }
    }
};

Complex scalar_exponent(const BundleSpec& b, const GeometryModel& g, const PathSegment& seg, int refinement) {
    const int n = transport_substeps(b, seg.start.velocity.norm(), seg.duration, refinement);
    if (n == 0) return 0.0;
    SegmentField field(b, g, seg);
    Matrix f(1, 1);
    const double h = seg.duration / n;
    Complex sum = 0.0;
    field(0.0, f);
    Complex f_left = f(0, 0);
    for (int i = 0; i < n; ++i) {
        field((i + 0.5) * h, f);
        const Complex f_mid = f(0, 0);
        field((i + 1) * h, f);
        const Complex f_right = f(0, 0);
        sum += f_left + 4.0 * f_mid + f_right;
        f_left = f_right;
    }
    return sum * (h / 6.0);
}

}  // namespace

Complex transport_segment_scalar(const BundleSpec& b, const GeometryModel& g, const PathSegment& seg,
                                 int refinement) {
    if (b.rank != 1) fail(ErrorCode::unsupported, "closed-form transport needs a rank-1 bundle");
    return std::exp(scalar_exponent(b, g, seg, refinement));
}

Matrix transport_segment(const BundleSpec& b, const GeometryModel& g, const PathSegment& seg, int refinement) {
    const int k = b.rank;
    Matrix p = Matrix::Identity(k, k);
    const int n = transport_substeps(b, seg.start.velocity.norm(), seg.duration, refinement);
    if (n == 0 || b.is_flat_trivial()) return p;
    SegmentField field(b, g, seg);
    Matrix f0(k, k), fm(k, k), f1(k, k), k1(k, k), k2(k, k), k3(k, k), k4(k, k);
    const double h = seg.duration / n;
    field(0.0, f0);
    for (int i = 0; i < n; ++i) {
        field((i + 0.5) * h, fm);
        field((i + 1) * h, f1);
        k1.noalias() = f0 * p;
        k2.noalias() = fm * (p + 0.5 * h * k1);
        k3.noalias() = fm * (p + 0.5 * h * k2);
        k4.noalias() = f1 * (p + h * k3);
        p += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        f0 = f1;
    }
    return p;
}

namespace {

/// Q <- Q * (segment inverse), RK4 on Q' = -Q F.
void integrate_inverse(const BundleSpec& b, const GeometryModel& g, const PathSegment& seg, int refinement,
                       Matrix& q, Matrix& f0, Matrix& fm, Matrix& f1, Matrix& k1, Matrix& k2, Matrix& k3,
                       Matrix& k4, Matrix& tmp) {
    const int n = transport_substeps(b, seg.start.velocity.norm(), seg.duration, refinement);
    if (n == 0 || b.is_flat_trivial()) return;
    SegmentField field(b, g, seg);
    const double h = seg.duration / n;
    field(0.0, f0);
    for (int i = 0; i < n; ++i) {
        field((i + 0.5) * h, fm);
        field((i + 1) * h, f1);
        k1.noalias() = -q * f0;
        tmp = q + 0.5 * h * k1;
        k2.noalias() = -tmp * fm;
        tmp = q + 0.5 * h * k2;
        k3.noalias() = -tmp * fm;
        tmp = q + h * k3;
        k4.noalias() = -tmp * f1;
        q += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        f0 = f1;
    }
}

}  // namespace

TransportResult b_transport(const BundleSpec& b, const BoundaryOperator& B, const GeometryModel& g,
                            const ReflectedPath& path, int refinement) {
    if (!path.ok()) fail(ErrorCode::undefined, "transport along a rejected path is undefined");
    if (B.rank() != b.rank) fail(ErrorCode::validation, "boundary operator rank does not match bundle rank");
    const int k = b.rank;
    TransportResult r;
    r.P = Matrix::Identity(k, k);
    r.P_inv = Matrix::Identity(k, k);
    Matrix f0(k, k), fm(k, k), f1(k, k), k1(k, k), k2(k, k), k3(k, k), k4(k, k), tmp(k, k);
    std::size_t next_event = 0;
    auto insert_events_until = [&](double time) {
        while (next_event < path.events.size() && path.events[next_event].time <= time) {
            r.P = B.matrix() * r.P;
            r.P_inv = r.P_inv * B.matrix();
            ++r.b_insertions;
            ++next_event;
        }
    };
    for (const PathSegment& seg : path.segments) {
        insert_events_until(seg.start_time);
        r.P = transport_segment(b, g, seg, refinement) * r.P;
        integrate_inverse(b, g, seg, refinement, r.P_inv, f0, fm, f1, k1, k2, k3, k4, tmp);
    }
    insert_events_until(path.total_time);
    return r;
}

InverseTransport::InverseTransport(const BundleSpec& b, const BoundaryOperator& B, const GeometryModel& g)
    : bundle_(b), boundary_(B), geometry_(g), scalar_(b.rank == 1) {
    if (B.rank() != b.rank) fail(ErrorCode::validation, "boundary operator rank does not match bundle rank");
    const int k = b.rank;
    for (Matrix* m : {&q_, &f0_, &fm_, &f1_, &k1_, &k2_, &k3_, &k4_, &tmp_, &a_, &v_}) m->resize(k, k);
    if (scalar_) b_scalar_ = B.matrix()(0, 0);
    reset();
}

void InverseTransport::reset() {
    q_scalar_ = 1.0;
    q_.setIdentity();
}

void InverseTransport::segment_inverse(const PathSegment& seg) {
    if (bundle_.is_flat_trivial()) return;
    if (scalar_) {
        q_scalar_ *= std::exp(-scalar_exponent(bundle_, geometry_, seg, 1));
        return;
    }
    integrate_inverse(bundle_, geometry_, seg, 1, q_, f0_, fm_, f1_, k1_, k2_, k3_, k4_, tmp_);
}

void InverseTransport::apply(const ReflectedPath& piece) {
    if (!piece.ok()) fail(ErrorCode::undefined, "transport along a rejected path is undefined");
    std::size_t next_event = 0;
    auto insert_events_until = [&](double time) {
        while (next_event < piece.events.size() && piece.events[next_event].time <= time) {
            if (scalar_) q_scalar_ *= b_scalar_;
            else q_ = q_ * boundary_.matrix();
            ++next_event;
        }
    };
    for (const PathSegment& seg : piece.segments) {
        insert_events_until(seg.start_time);
        segment_inverse(seg);
    }
    insert_events_until(piece.total_time);
}

const Matrix& InverseTransport::value() {
    if (scalar_) q_(0, 0) = q_scalar_;
    return q_;
}

double InverseTransport::norm() {
    if (scalar_) return std::abs(q_scalar_);
    return operator_norm(value());
}

void InverseTransport::apply_to(const CVector& u, CVector& out) {
    if (scalar_) {
        out(0) = q_scalar_ * u(0);
        return;
    }
    out.noalias() = q_ * u;
}

}  // namespace heatpath
