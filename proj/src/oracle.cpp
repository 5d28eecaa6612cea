#include "heatpath/oracle.hpp"

#include "heatpath/error.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>

namespace heatpath {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr Complex kI{0.0, 1.0};

/// n if x is within 1e-9 of an integer n, nullopt otherwise.
std::optional<long> as_integer(double x) {
    const double r = std::round(x);
    if (std::fabs(x - r) <= 1e-9 * std::max(1.0, std::fabs(x))) return static_cast<long>(r);
    return std::nullopt;
}

[[noreturn]] void not_expandable(const FieldSection& u, ProblemTag tag) {
    fail(ErrorCode::unsupported, "section " + format_descriptor(u.descriptor) + " has no finite expansion for " +
                                     to_string(tag));
}

}  // namespace

const char* to_string(ProblemTag tag) {
    switch (tag) {
        case ProblemTag::interval_dirichlet: return "interval-dirichlet";
        case ProblemTag::interval_neumann: return "interval-neumann";
        case ProblemTag::circle: return "circle";
        case ProblemTag::circle_holonomy: return "circle-holonomy";
        case ProblemTag::torus: return "torus";
        case ProblemTag::sphere: return "sphere";
    }
    return "?";
}

double SpectralModel::eigenvalue(int m0, int m1) const {
    switch (tag) {
        case ProblemTag::interval_dirichlet:
        case ProblemTag::interval_neumann: {
            const double w = m0 * kPi / length();
            return w * w;
        }
        case ProblemTag::circle:
        case ProblemTag::circle_holonomy: {
            const double w = (m0 + holonomy) / radius;
            return w * w;
        }
        case ProblemTag::torus: {
            const double w0 = 2.0 * kPi * m0 / period0, w1 = 2.0 * kPi * m1 / period1;
            return w0 * w0 + w1 * w1;
        }
        case ProblemTag::sphere: return m0 * (m0 + 1.0) / (radius * radius);
    }
    return 0.0;
}

std::vector<Eigenpair> SpectralModel::eigenpairs(int count) const {
    std::vector<Eigenpair> out;
    if (count <= 0) return out;
    auto push = [&](int a, int b) {
        Eigenpair e;
        e.mode[0] = a;
        e.mode[1] = b;
        e.lambda = eigenvalue(a, b);
        out.push_back(e);
    };
    switch (tag) {
        case ProblemTag::interval_dirichlet:
            for (int k = 1; k <= count; ++k) push(k, 0);
            break;
        case ProblemTag::interval_neumann:
            for (int k = 0; k < count; ++k) push(k, 0);
            break;
        case ProblemTag::circle:
        case ProblemTag::circle_holonomy:
            for (int k = -count; k <= count; ++k) push(k, 0);
            break;
        case ProblemTag::torus: {
            const int r = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(count)))) + 1;
            for (int a = -r; a <= r; ++a)
                for (int b = -r; b <= r; ++b) push(a, b);
            break;
        }
        case ProblemTag::sphere:
            // each l carries 2l+1 eigenfunctions
            for (int l = 0; static_cast<int>(out.size()) < count; ++l)
                for (int m = -l; m <= l; ++m) push(l, m);
            break;
    }
    std::stable_sort(out.begin(), out.end(), [](const Eigenpair& x, const Eigenpair& y) { return x.lambda < y.lambda; });
    if (static_cast<int>(out.size()) > count) out.resize(count);
    return out;
}

std::vector<ModalTerm> SpectralModel::decompose(const FieldSection& u) const {
    const Descriptor& d = u.descriptor;
    std::vector<ModalTerm> terms;
    switch (tag) {
        case ProblemTag::interval_dirichlet:
        case ProblemTag::interval_neumann: {
            const bool dir = tag == ProblemTag::interval_dirichlet;
            const double a = lower, len = length();
            auto add_mode = [&](double k, double c) {
                // sin(kx) = (-1)^m sin(k(x-a)) when ka = m pi; same for cos
                const auto n = as_integer(k * len / kPi);
                const auto m = as_integer(k * a / kPi);
                if (!n || !m || (dir && *n == 0)) not_expandable(u, tag);
                const double sign = (*m % 2 == 0) ? 1.0 : -1.0;
                ModalTerm t;
                t.lambda = eigenvalue(static_cast<int>(std::labs(*n)));
                t.coefficient = c * sign;
                if (dir) t.basis = [k, a](const Vec& x) { return Complex(std::sin(k * (x[0] - a))); };
                else t.basis = [k, a](const Vec& x) { return Complex(std::cos(k * (x[0] - a))); };
                terms.push_back(std::move(t));
            };
            if (dir && d.name == "sin") add_mode(d.params[0], 1.0);
            else if (dir && d.name == "sine-series")
                for (std::size_t k = 0; k < d.params.size(); ++k) add_mode(k + 1.0, d.params[k]);
            else if (!dir && d.name == "cos") add_mode(d.params[0], 1.0);
            else if (!dir && d.name == "const") {
                ModalTerm t;
                t.lambda = 0.0;
                t.coefficient = d.params[0];
                t.basis = [](const Vec&) { return Complex(1.0); };
                terms.push_back(std::move(t));
            } else not_expandable(u, tag);
            return terms;
        }
        case ProblemTag::circle:
        case ProblemTag::circle_holonomy: {
            auto exp_mode = [&](long k, Complex c) {
                ModalTerm t;
                t.lambda = eigenvalue(static_cast<int>(k));
                t.coefficient = c;
                t.basis = [k](const Vec& x) { return std::polar(1.0, static_cast<double>(k) * x[0]); };
                terms.push_back(std::move(t));
            };
            if (d.name == "const") {
                exp_mode(0, d.params[0]);
                return terms;
            }
            const auto k = d.params.empty() ? std::nullopt : as_integer(d.params[0]);
            if (!k) not_expandable(u, tag);
            if (d.name == "expi") exp_mode(*k, 1.0);
            else if (d.name == "sin") {
                exp_mode(*k, 1.0 / (2.0 * kI));
                exp_mode(-*k, -1.0 / (2.0 * kI));
            } else if (d.name == "cos") {
                exp_mode(*k, 0.5);
                exp_mode(-*k, 0.5);
            } else not_expandable(u, tag);
            return terms;
        }
        case ProblemTag::torus: {
            if (d.name == "const") {
                terms.push_back(ModalTerm{0.0, d.params[0], [](const Vec&) { return Complex(1.0); }});
            } else if (d.name == "torus-cos") {
                const auto k0 = as_integer(d.params[0]), k1 = as_integer(d.params[1]);
                if (!k0 || !k1) not_expandable(u, tag);
                const double w0 = 2.0 * kPi * d.params[0] / period0, w1 = 2.0 * kPi * d.params[1] / period1;
                terms.push_back(ModalTerm{eigenvalue(static_cast<int>(*k0), static_cast<int>(*k1)), 1.0,
                                          [w0, w1](const Vec& x) { return Complex(std::cos(w0 * x[0] + w1 * x[1])); }});
            } else not_expandable(u, tag);
            return terms;
        }
        case ProblemTag::sphere: {
            if (d.name == "const") {
                terms.push_back(ModalTerm{0.0, d.params[0], [](const Vec&) { return Complex(1.0); }});
            } else if (d.name == "sphere-l1") {
                const Vec c(d.params[0], d.params[1], d.params[2]);
                const double r = radius;
                terms.push_back(ModalTerm{eigenvalue(1), 1.0, [c, r](const Vec& x) { return Complex(c.dot(x) / r); }});
            } else not_expandable(u, tag);
            return terms;
        }
    }
    not_expandable(u, tag);
}

std::optional<SpectralModel> spectral_model_for(const GeometryModel& g, const BundleSpec& b,
                                                const BoundaryOperator& B) {
    if (!b.potential.is_zero) return std::nullopt;
    const bool holonomy = b.connection.descriptor.name == "circle-holonomy";
    if (!b.connection.is_zero && !holonomy) return std::nullopt;
    SpectralModel m;
    switch (g.kind()) {
        case ModelKind::interval:
            if (B.scalar_sign() == 0) return std::nullopt;
            m.tag = B.scalar_sign() < 0 ? ProblemTag::interval_dirichlet : ProblemTag::interval_neumann;
            m.lower = g.lower();
            m.upper = g.upper();
            return m;
        case ModelKind::circle:
            m.tag = holonomy ? ProblemTag::circle_holonomy : ProblemTag::circle;
            m.radius = g.radius();
            m.holonomy = holonomy ? b.connection.descriptor.params[0] : 0.0;
            return m;
        case ModelKind::flat_torus:
            m.tag = ProblemTag::torus;
            m.period0 = g.period(0);
            m.period1 = g.period(1);
            return m;
        case ModelKind::sphere:
            m.tag = ProblemTag::sphere;
            m.radius = g.radius();
            return m;
        default: return std::nullopt;
    }
}

EvolvedSection spectral_evolve(const SpectralModel& model, const FieldSection& u0, double t) {
    if (!(t >= 0.0)) fail(ErrorCode::invalid_input, "evolution time must be >= 0");
    std::vector<ModalTerm> terms = model.decompose(u0);
    double sup = 0.0;
    for (ModalTerm& term : terms) {
        term.coefficient *= std::exp(-term.lambda * t);
        sup += std::abs(term.coefficient);
    }
    EvolvedSection out;
    out.terms = terms.size();
    out.tail_bound = 0.0;  // registry sections have finite expansions
    out.section.descriptor = u0.descriptor;
    out.section.rank = u0.rank;
    out.section.complex_valued = u0.complex_valued || model.tag == ProblemTag::circle_holonomy;
    out.section.sup_norm = sup * std::sqrt(static_cast<double>(u0.rank));
    out.section.eval = [terms = std::move(terms)](const Vec& x, CVector& v) {
        Complex s = 0.0;
        for (const ModalTerm& term : terms) s += term.coefficient * term.basis(x);
        v.setConstant(s);
    };
    return out;
}

double spectral_kernel(const SpectralModel& model, double x, double y, double t, double tail_tol) {
    if (!(t > 0.0)) fail(ErrorCode::invalid_input, "kernel time must be positive");
    const bool dir = model.tag == ProblemTag::interval_dirichlet;
    if (!dir && model.tag != ProblemTag::interval_neumann)
        fail(ErrorCode::unsupported, "spectral kernel is implemented for interval problems");
    const double len = model.length();
    const double xs = x - model.lower, ys = y - model.lower;
    double sum = dir ? 0.0 : 1.0 / len;
    const double a = (kPi / len) * (kPi / len) * t;
    for (int n = 1;; ++n) {
        const double w = n * kPi / len;
        const double decay = std::exp(-a * n * n);
        sum += (2.0 / len) * decay *
               (dir ? std::sin(w * xs) * std::sin(w * ys) : std::cos(w * xs) * std::cos(w * ys));
        // sum_{m>n} e^{-a m^2} <= e^{-a (n+1)^2} / (1 - e^{-a (2n+3)})
        const double tail = (2.0 / len) * std::exp(-a * (n + 1.0) * (n + 1.0)) / (1.0 - std::exp(-a * (2.0 * n + 3.0)));
        if (tail < tail_tol) break;
        if (n > 10000000) fail(ErrorCode::invalid_input, "spectral kernel does not converge for this t");
    }
    return sum;
}

double image_kernel(ImageProblem problem, ImageBc bc, double x, double y, double t, double a, double b) {
    if (!(t > 0.0)) fail(ErrorCode::invalid_input, "kernel time must be positive");
    const double norm = 1.0 / std::sqrt(4.0 * kPi * t);
    auto g = [&](double d) { return norm * std::exp(-d * d / (4.0 * t)); };
    const double s = bc == ImageBc::dirichlet ? -1.0 : 1.0;
    if (problem == ImageProblem::half_line) return g(x - y) + s * g(x + y);
    if (!(a < b)) fail(ErrorCode::invalid_input, "interval requires a < b");
    const double len = b - a, xs = x - a, ys = y - a;
    double sum = g(xs - ys) + s * g(xs + ys);
    for (int n = 1;; ++n) {
        const double terms[4] = {g(xs - ys + 2.0 * n * len), g(xs - ys - 2.0 * n * len), g(xs + ys + 2.0 * n * len),
                                 g(xs + ys - 2.0 * n * len)};
        sum += terms[0] + terms[1] + s * (terms[2] + terms[3]);
        if (std::max({terms[0], terms[1], terms[2], terms[3]}) < 1e-16) break;
    }
    return sum;
}

Complex apply_image_kernel(ImageBc bc, const FieldSection& u0, double x, double t, double a, double b, int panels) {
    if (panels < 2) fail(ErrorCode::invalid_input, "need at least two panels");
    if (panels % 2) ++panels;
    const double h = (b - a) / panels;
    Complex sum = 0.0;
    CVector val(u0.rank);
    for (int i = 0; i <= panels; ++i) {
        const double y = a + i * h;
        u0.eval(Vec(y, 0.0, 0.0), val);
        const double w = (i == 0 || i == panels) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        sum += w * image_kernel(ImageProblem::interval, bc, x, y, t, a, b) * val(0);
    }
    return sum * (h / 3.0);
}

// ---------------------------------------------------------------- finite differences

namespace {

std::vector<double> crank_nicolson(double a, double b, const Potential& v, ImageBc bc, const FieldSection& u0,
                                   double t, int n) {
    const double h = (b - a) / n;
    std::vector<double> u(n + 1), pot(n + 1);
    Matrix vm(1, 1);
    CVector val(u0.rank);
    for (int i = 0; i <= n; ++i) {
        const Vec x(a + i * h, 0.0, 0.0);
        u0.eval(x, val);
        u[i] = val(0).real();
        v.eval(x, vm);
        pot[i] = vm(0, 0).real();
    }
    const bool dir = bc == ImageBc::dirichlet;
    if (dir) u[0] = u[n] = 0.0;
    if (t == 0.0) return u;

    const long steps = static_cast<long>(std::ceil(t / (h * h)));
    const double c = 0.5 * t / steps;  // dt / 2

    // unknowns are nodes first..last; Dirichlet values stay zero, Neumann uses the ghost u_{-1} = u_1
    const int first = dir ? 1 : 0, last = dir ? n - 1 : n;
    const int m = last - first + 1;
    const double ih2 = 1.0 / (h * h);
    std::vector<double> lo(m), di(m), up(m);
    for (int j = 0; j < m; ++j) {
        lo[j] = (j > 0) ? ih2 : 0.0;
        up[j] = (j < m - 1) ? ih2 : 0.0;
        di[j] = -2.0 * ih2 - pot[first + j];
    }
    if (!dir) {
        up[0] = 2.0 * ih2;
        lo[m - 1] = 2.0 * ih2;
    }
    // (I - c A) factorised once
    std::vector<double> cp(m), inv(m), carry(m);
    for (int j = 0; j < m; ++j) {
        const double d = 1.0 - c * di[j] - (j > 0 ? -c * lo[j] * cp[j - 1] : 0.0);
        inv[j] = 1.0 / d;
        cp[j] = -c * up[j] * inv[j];
        carry[j] = c * lo[j] * inv[j];
    }
    std::vector<double> w(m + 2, 0.0), y(m + 1, 0.0);  // w[j+1] = u_j with zero padding
    for (int j = 0; j < m; ++j) w[j + 1] = u[first + j];
    for (long s = 0; s < steps; ++s) {
        double prev = 0.0;
        for (int j = 0; j < m; ++j) {
            const double rhs = w[j + 1] + c * (lo[j] * w[j] + di[j] * w[j + 1] + up[j] * w[j + 2]);
            prev = rhs * inv[j] + carry[j] * prev;  // keeps the serial dependency to one multiply-add
            y[j] = prev;
        }
        double next = 0.0;
        for (int j = m - 1; j >= 0; --j) {
            next = y[j] - cp[j] * next;
            w[j + 1] = next;
        }
    }
    for (int j = 0; j < m; ++j) u[first + j] = w[j + 1];
    return u;
}

}  // namespace

FdSolution fd_reference_evolve(double a, double b, const Potential& v, ImageBc bc, const FieldSection& u0, double t,
                               int grid) {
    if (!(a < b)) fail(ErrorCode::invalid_input, "interval requires a < b");
    if (grid < 2000) fail(ErrorCode::invalid_input, "finite-difference reference needs at least 2000 intervals");
    if (!(t >= 0.0) || !std::isfinite(t)) fail(ErrorCode::invalid_input, "evolution time must be >= 0");
    if (u0.rank != 1) fail(ErrorCode::unsupported, "finite-difference reference is scalar");
    FdSolution sol;
    if (t == 0.0) {
        CVector val(1);
        for (int i = 0; i <= grid; ++i) {
            sol.nodes.push_back(a + (b - a) * i / grid);
            u0.eval(Vec(sol.nodes.back(), 0.0, 0.0), val);
            sol.values.push_back(val(0).real());
        }
        return sol;
    }
    for (int refinement = 0;; ++refinement) {
        const std::vector<double> coarse = crank_nicolson(a, b, v, bc, u0, t, grid);
        const std::vector<double> fine = crank_nicolson(a, b, v, bc, u0, t, 2 * grid);
        sol = FdSolution{};
        for (int i = 0; i <= grid; ++i) {
            const double f = fine[2 * i];
            sol.nodes.push_back(a + (b - a) * i / grid);
            sol.values.push_back((4.0 * f - coarse[i]) / 3.0);
            sol.self_consistency = std::max(sol.self_consistency, std::fabs(f - coarse[i]) / 3.0);
        }
        for (double x : sol.values)
            if (!std::isfinite(x)) fail(ErrorCode::invalid_input, "finite-difference evolution became unstable");
        if (sol.self_consistency <= kFdSelfConsistency) return sol;
        if (refinement == 1)
            fail(ErrorCode::invalid_input, "finite-difference reference did not reach its self-consistency target");
        grid *= 2;
    }
}

double FdSolution::eval(double x) const {
    const int n = static_cast<int>(nodes.size()) - 1;
    const double a = nodes.front(), b = nodes.back();
    if (x < a - 1e-12 || x > b + 1e-12) fail(ErrorCode::domain, "evaluation outside the finite-difference grid");
    const double h = (b - a) / n;
    const double s = (x - a) / h;
    const long nearest = std::lround(s);
    if (std::fabs(s - nearest) < 1e-9) return values[std::clamp<long>(nearest, 0, n)];
    // cubic Lagrange on four surrounding nodes
    int i0 = static_cast<int>(std::floor(s)) - 1;
    i0 = std::clamp(i0, 0, n - 3);
    double result = 0.0;
    for (int j = 0; j < 4; ++j) {
        double w = 1.0;
        for (int m = 0; m < 4; ++m)
            if (m != j) w *= (s - (i0 + m)) / static_cast<double>(j - m);
        result += w * values[i0 + j];
    }
    return result;
}

FieldSection FdSolution::as_section() const {
    FieldSection s;
    s.descriptor = Descriptor{"fd-reference", {}};
    s.rank = 1;
    double sup = 0.0;
    for (double v : values) sup = std::max(sup, std::fabs(v));
    s.sup_norm = sup;
    auto self = std::make_shared<FdSolution>(*this);
    s.eval = [self](const Vec& x, CVector& out) { out(0) = self->eval(x[0]); };
    return s;
}

}  // namespace heatpath
