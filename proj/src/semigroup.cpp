#include "heatpath/semigroup.hpp"

#include "heatpath/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <thread>

namespace heatpath {

// ---------------------------------------------------------------- Partition

Partition::Partition(std::vector<double> times) : times_(std::move(times)) {
    if (times_.size() < 2) fail(ErrorCode::invalid_input, "partition needs at least one slice");
    if (times_.front() != 0.0) fail(ErrorCode::invalid_input, "partition must start at 0");
    for (std::size_t i = 1; i < times_.size(); ++i)
        if (!(times_[i] > times_[i - 1]) || !std::isfinite(times_[i]))
            fail(ErrorCode::invalid_input, "partition times must be strictly increasing");
}

Partition Partition::uniform(double t, int n) {
    if (!(t > 0.0) || n < 1) fail(ErrorCode::invalid_input, "uniform partition needs t > 0 and n >= 1");
    std::vector<double> times(n + 1);
    for (int i = 0; i <= n; ++i) times[i] = t * i / n;
    times[n] = t;
    return Partition(std::move(times));
}

double Partition::mesh() const {
    double m = 0.0;
    for (int j = 0; j < size(); ++j) m = std::max(m, step(j));
    return m;
}

Partition Partition::concatenate(const Partition& other) const {
    std::vector<double> times = times_;
    const double shift = total();
    for (std::size_t i = 1; i < other.times_.size(); ++i) times.push_back(shift + other.times_[i]);
    return Partition(std::move(times));
}

// ---------------------------------------------------------------- sections

CVector FieldSection::operator()(const Vec& x) const {
    CVector out(rank);
    eval(x, out);
    return out;
}

namespace {

void need(const Descriptor& d, std::size_t n) {
    if (d.params.size() != n)
        fail(ErrorCode::validation, "section " + d.name + " expects " + std::to_string(n) + " parameter(s)");
}

FieldSection scalar_section(const Descriptor& d, int rank, double sup, bool complex_valued,
                            std::function<Complex(const Vec&)> f) {
    FieldSection s;
    s.descriptor = d;
    s.rank = rank;
    s.complex_valued = complex_valued;
    s.sup_norm = sup * std::sqrt(static_cast<double>(rank));
    s.eval = [f = std::move(f)](const Vec& x, CVector& out) { out.setConstant(f(x)); };
    return s;
}

}  // namespace

FieldSection make_section(const Descriptor& d, int rank, const GeometryModel& g) {
    if (rank < 1) fail(ErrorCode::invalid_input, "section rank must be >= 1");
    if (d.name == "const") {
        need(d, 1);
        const double c = d.params[0];
        return scalar_section(d, rank, std::fabs(c), false, [c](const Vec&) { return Complex(c); });
    }
    if (d.name == "sin") {
        need(d, 1);
        const double k = d.params[0];
        return scalar_section(d, rank, 1.0, false, [k](const Vec& x) { return Complex(std::sin(k * x[0])); });
    }
    if (d.name == "cos") {
        need(d, 1);
        const double k = d.params[0];
        return scalar_section(d, rank, 1.0, false, [k](const Vec& x) { return Complex(std::cos(k * x[0])); });
    }
    if (d.name == "sine-series") {
        if (d.params.empty()) fail(ErrorCode::validation, "sine-series needs coefficients");
        std::vector<double> c = d.params;
        double sup = 0.0;
        for (double v : c) sup += std::fabs(v);
        return scalar_section(d, rank, sup, false, [c](const Vec& x) {
            double s = 0.0;
            for (std::size_t k = 0; k < c.size(); ++k) s += c[k] * std::sin((k + 1.0) * x[0]);
            return Complex(s);
        });
    }
    if (d.name == "expi") {
        need(d, 1);
        const double k = d.params[0];
        return scalar_section(d, rank, 1.0, true,
                              [k](const Vec& x) { return std::polar(1.0, k * x[0]); });
    }
    if (d.name == "sphere-l1") {
        need(d, 3);
        if (g.kind() != ModelKind::sphere) fail(ErrorCode::validation, "sphere-l1 lives on a sphere");
        const Vec c(d.params[0], d.params[1], d.params[2]);
        const double r = g.radius();
        return scalar_section(d, rank, c.norm(), false, [c, r](const Vec& x) { return Complex(c.dot(x) / r); });
    }
    if (d.name == "torus-cos") {
        need(d, 2);
        if (g.kind() != ModelKind::flat_torus) fail(ErrorCode::validation, "torus-cos lives on a torus");
        const double w0 = 2.0 * std::numbers::pi * d.params[0] / g.period(0);
        const double w1 = 2.0 * std::numbers::pi * d.params[1] / g.period(1);
        return scalar_section(d, rank, 1.0, false,
                              [w0, w1](const Vec& x) { return Complex(std::cos(w0 * x[0] + w1 * x[1])); });
    }
    if (d.name == "gauss") {
        need(d, 3);
        const double c0 = d.params[0], c1 = d.params[1], w = d.params[2];
        if (!(w > 0.0)) fail(ErrorCode::validation, "gauss width must be positive");
        return scalar_section(d, rank, 1.0, false, [c0, c1, w](const Vec& x) {
            const double r2 = (x[0] - c0) * (x[0] - c0) + (x[1] - c1) * (x[1] - c1);
            return Complex(std::exp(-r2 / (w * w)));
        });
    }
    fail(ErrorCode::validation, "unknown section '" + d.name + "'");
}

// ---------------------------------------------------------------- sampling

Vec sample_segment_velocity(int dim, double dtau, PhiloxStream& rng) {
    if (!(dtau > 0.0)) fail(ErrorCode::invalid_input, "slice length must be positive");
    if (dim < 1 || dim > 3) fail(ErrorCode::invalid_input, "dimension must be 1, 2 or 3");
    const double sd = std::sqrt(2.0 / dtau);
    Vec v = Vec::Zero();
    for (int i = 0; i < dim; ++i) v[i] = sd * rng.normal();
    return v;
}

PathSampler::PathSampler(const GeometryModel& g, const BundleSpec& b, const BoundaryOperator& B,
                         const FieldSection& u, int max_reflections)
    : g_(g), b_(b), u_(u), max_reflections_(max_reflections), transport_(b, B, g), u_val_(b.rank) {
    if (u.rank != b.rank) fail(ErrorCode::validation, "section rank does not match bundle rank");
}

void PathSampler::draw(const Partition& tau, PhiloxStream& rng) {
    const int n = tau.size();
    coords_.resize(2 * static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        coords_[2 * j] = rng.normal();
        coords_[2 * j + 1] = g_.dim() == 2 ? rng.normal() : 0.0;
    }
}

bool PathSampler::evaluate(const Vec& x, const Partition& tau, bool reflect_first, CVector& out) {
    transport_.reset();
    Vec pos = x;
    for (int j = 0; j < tau.size(); ++j) {
        const double dt = tau.step(j);
        const double sd = std::sqrt(2.0 / dt);
        Vec v = g_.tangent_vector(pos, sd * coords_[2 * j], sd * coords_[2 * j + 1]);
        if (j == 0 && reflect_first) v = g_.reflect(pos, v);
        trace_reflected(g_, pos, v, dt, max_reflections_, piece_);
        if (!piece_.ok()) return false;
        transport_.apply(piece_);
        pos = piece_.end.position;
    }
    u_.eval(pos, u_val_);
    transport_.apply_to(u_val_, out);
    weight_norm_ = transport_.norm();
    return true;
}

namespace {

constexpr long kChunkUnits = 2048;

/// Streaming mean/variance per real channel, mergeable in a fixed order.
struct Moments {
    double count = 0.0;
    std::vector<double> mean, m2;
    long rejected = 0;
    double max_norm = 0.0;

    explicit Moments(std::size_t channels = 0) : mean(channels, 0.0), m2(channels, 0.0) {}

    void add(const double* x) {
        count += 1.0;
        for (std::size_t c = 0; c < mean.size(); ++c) {
            const double d = x[c] - mean[c];
            mean[c] += d / count;
            m2[c] += d * (x[c] - mean[c]);
        }
    }

    void merge(const Moments& o) {
        rejected += o.rejected;
        max_norm = std::max(max_norm, o.max_norm);
        if (o.count == 0.0) return;
        if (count == 0.0) {
            count = o.count;
            mean = o.mean;
            m2 = o.m2;
            return;
        }
        const double n = count + o.count;
        for (std::size_t c = 0; c < mean.size(); ++c) {
            const double d = o.mean[c] - mean[c];
            mean[c] += d * o.count / n;
            m2[c] += o.m2[c] + d * d * count * o.count / n;
        }
        count = n;
    }

    double stderr_of(std::size_t c) const {
        if (count < 2.0) return 0.0;
        return std::sqrt(m2[c] / (count - 1.0) / count);
    }
};

/// Runs `body(chunk, begin, end, moments)` over fixed chunks and merges in chunk order.
template <class Body>
Moments run_chunked(long units, int workers, std::size_t channels, Body&& body) {
    const long chunks = (units + kChunkUnits - 1) / kChunkUnits;
    std::vector<Moments> partial(static_cast<std::size_t>(chunks), Moments(channels));
    std::atomic<long> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    auto worker = [&] {
        try {
            auto state = body.make_state();
            for (long c = next++; c < chunks && !failed; c = next++) {
                const long begin = c * kChunkUnits;
                const long end = std::min(units, begin + kChunkUnits);
                body.run(state, begin, end, partial[static_cast<std::size_t>(c)]);
            }
        } catch (...) {
            if (!failed.exchange(true)) error = std::current_exception();
        }
    };
    const int n_threads = std::max(1, std::min<int>(workers, static_cast<int>(std::max<long>(chunks, 1))));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (error) std::rethrow_exception(error);
    Moments total(channels);
    for (const Moments& m : partial) total.merge(m);
    return total;
}

void check_inputs(const GeometryModel& g, const BundleSpec& b, const BoundaryOperator& B, const FieldSection& u,
                  const Vec& x) {
    if (B.rank() != b.rank) fail(ErrorCode::validation, "boundary operator rank does not match bundle rank");
    if (u.rank != b.rank) fail(ErrorCode::validation, "section rank does not match bundle rank");
    if (g.classify(x) == PointClass::outside) fail(ErrorCode::domain, "evaluation point lies outside the domain");
}

}  // namespace

SliceEstimate estimate_slice(const GeometryModel& g, const BundleSpec& b, const BoundaryOperator& B,
                             const FieldSection& u, const Vec& x, const Partition& tau,
                             const EstimateOptions& opts) {
    check_inputs(g, b, B, u, x);
    if (opts.samples < 1) fail(ErrorCode::invalid_input, "need at least one sample");
    const int k = b.rank;
    const std::size_t channels = 2 * static_cast<std::size_t>(k);
    const bool paired = opts.antithetic && g.has_boundary() && g.classify(x) == PointClass::boundary;
    const long units = paired ? std::max<long>(1, opts.samples / 2) : opts.samples;

    struct Body {
        const GeometryModel& g;
        const BundleSpec& b;
        const BoundaryOperator& B;
        const FieldSection& u;
        const Vec& x;
        const Partition& tau;
        const EstimateOptions& opts;
        bool paired;
        int k;

        struct State {
            PathSampler sampler;
            CVector a, c;
            std::vector<double> row;
        };
        State make_state() const {
            return State{PathSampler(g, b, B, u, opts.max_reflections), CVector(k), CVector(k),
                         std::vector<double>(2 * k)};
        }
        void run(State& s, long begin, long end, Moments& m) const {
            for (long i = begin; i < end; ++i) {
                PhiloxStream rng(opts.seed, static_cast<std::uint64_t>(i));
                s.sampler.draw(tau, rng);
                if (!s.sampler.evaluate(x, tau, false, s.a)) {
                    m.rejected += paired ? 2 : 1;
                    continue;
                }
                double norm = s.sampler.last_weight_norm();
                if (paired) {
                    if (!s.sampler.evaluate(x, tau, true, s.c)) {
                        m.rejected += 2;
                        continue;
                    }
                    norm = std::max(norm, s.sampler.last_weight_norm());
                    s.a = 0.5 * (s.a + s.c);
                }
                m.max_norm = std::max(m.max_norm, norm);
                for (int j = 0; j < k; ++j) {
                    s.row[2 * j] = s.a(j).real();
                    s.row[2 * j + 1] = s.a(j).imag();
                }
                m.add(s.row.data());
            }
        }
    } body{g, b, B, u, x, tau, opts, paired, k};

    const Moments m = run_chunked(units, opts.workers, channels, body);

    SliceEstimate est;
    est.value = CVector::Zero(k);
    est.stderr_re = Eigen::VectorXd::Zero(k);
    est.stderr_im = Eigen::VectorXd::Zero(k);
    for (int j = 0; j < k; ++j) {
        est.value(j) = Complex(m.mean[2 * j], m.mean[2 * j + 1]);
        est.stderr_re(j) = m.stderr_of(2 * j);
        est.stderr_im(j) = m.stderr_of(2 * j + 1);
    }
    est.samples_used = static_cast<long>(m.count) * (paired ? 2 : 1);
    est.rejected = m.rejected;
    est.seed = opts.seed;
    est.max_weight_norm = m.max_norm;
    const double total = static_cast<double>(est.samples_used + est.rejected);
    est.rejection_warning = total > 0.0 && est.rejected > 0.01 * total;
    return est;
}

// ---------------------------------------------------------------- quadrature

void gauss_hermite(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    if (n < 1) fail(ErrorCode::invalid_input, "need at least one node");
    // Golub-Welsch on the symmetric Jacobi matrix of the Hermite recurrence
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) {
        const double off = std::sqrt(i / 2.0);
        jacobi(i, i - 1) = off;
        jacobi(i - 1, i) = off;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
    nodes.resize(n);
    weights.resize(n);
    for (int i = 0; i < n; ++i) {
        nodes[i] = es.eigenvalues()(i);
        const double v0 = es.eigenvectors()(0, i);
        weights[i] = std::sqrt(std::numbers::pi) * v0 * v0;
    }
}

CVector quadrature_step_1d(const GeometryModel& g, const BundleSpec& b, const BoundaryOperator& B,
                           const FieldSection& u, const Vec& x, double t, int nodes) {
    if (g.dim() != 1) fail(ErrorCode::unsupported, "quadrature step is only available in one dimension");
    check_inputs(g, b, B, u, x);
    if (!(t > 0.0)) fail(ErrorCode::invalid_input, "t must be positive");
    nodes = std::max(nodes, 64);
    std::vector<double> xi, w;
    gauss_hermite(nodes, xi, w);
    InverseTransport transport(b, B, g);
    ReflectedPath path;
    CVector acc = CVector::Zero(b.rank), uval(b.rank), term(b.rank);
    const double scale = 2.0 / std::sqrt(t);  // v ~ N(0, 2/t)  <=>  v = 2 xi / sqrt(t)
    const double norm = 1.0 / std::sqrt(std::numbers::pi);
    for (int i = 0; i < nodes; ++i) {
        trace_reflected(g, x, Vec(scale * xi[i], 0.0, 0.0), t, kAutoReflectionCap, path);
        if (!path.ok()) continue;
        transport.reset();
        transport.apply(path);
        u.eval(path.end.position, uval);
        transport.apply_to(uval, term);
        acc += (w[i] * norm) * term;
    }
    return acc;
}

// ---------------------------------------------------------------- generator

GeneratorProbe generator_probe(const GeometryModel& g, const BundleSpec& b, const BoundaryOperator& B,
                               const FieldSection& u, const Vec& x, const std::vector<double>& t_list,
                               const EstimateOptions& opts) {
    check_inputs(g, b, B, u, x);
    if (t_list.empty()) fail(ErrorCode::invalid_input, "t_list must not be empty");
    for (std::size_t i = 0; i < t_list.size(); ++i) {
        if (!(t_list[i] > 0.0)) fail(ErrorCode::invalid_input, "probe times must be positive");
        if (i > 0 && !(t_list[i] < t_list[i - 1])) fail(ErrorCode::invalid_input, "probe times must decrease");
    }
    if (opts.samples < 1) fail(ErrorCode::invalid_input, "need at least one sample");
    const int k = b.rank;
    const std::size_t levels = t_list.size();
    // Lagrange weights of the interpolating polynomial evaluated at t = 0
    std::vector<double> lagrange(levels, 1.0);
    for (std::size_t i = 0; i < levels; ++i)
        for (std::size_t j = 0; j < levels; ++j)
            if (i != j) lagrange[i] *= (0.0 - t_list[j]) / (t_list[i] - t_list[j]);

    const CVector u0 = u(x);
    const std::size_t channels = 2 * static_cast<std::size_t>(k) * (levels + 1);
    std::vector<Partition> parts;
    for (double t : t_list) parts.push_back(Partition::uniform(t, 1));

    struct Body {
        const GeometryModel& g;
        const BundleSpec& b;
        const BoundaryOperator& B;
        const FieldSection& u;
        const Vec& x;
        const std::vector<double>& t_list;
        const std::vector<Partition>& parts;
        const std::vector<double>& lagrange;
        const CVector& u0;
        const EstimateOptions& opts;
        int k;
        std::size_t channels;

        struct State {
            PathSampler sampler;
            CVector val;
            std::vector<double> row;
        };
        State make_state() const {
            return State{PathSampler(g, b, B, u, opts.max_reflections), CVector(k), std::vector<double>(channels)};
        }
        void run(State& s, long begin, long end, Moments& m) const {
            const std::size_t levels = t_list.size();
            const std::size_t combined = 2 * k * levels;
            for (long i = begin; i < end; ++i) {
                std::fill(s.row.begin(), s.row.end(), 0.0);
                bool ok = true;
                for (std::size_t l = 0; l < levels && ok; ++l) {
                    // identical draws for every t
                    PhiloxStream rng(opts.seed, static_cast<std::uint64_t>(i));
                    s.sampler.draw(parts[l], rng);
                    ok = s.sampler.evaluate(x, parts[l], false, s.val);
                    if (!ok) break;
                    for (int j = 0; j < k; ++j) {
                        const Complex q = (s.val(j) - u0(j)) / t_list[l];
                        s.row[2 * k * l + 2 * j] = q.real();
                        s.row[2 * k * l + 2 * j + 1] = q.imag();
                        s.row[combined + 2 * j] += lagrange[l] * q.real();
                        s.row[combined + 2 * j + 1] += lagrange[l] * q.imag();
                    }
                }
                if (!ok) {
                    ++m.rejected;
                    continue;
                }
                m.add(s.row.data());
            }
        }
    } body{g, b, B, u, x, t_list, parts, lagrange, u0, opts, k, channels};

    const Moments m = run_chunked(opts.samples, opts.workers, channels, body);

    GeneratorProbe r;
    const std::size_t combined = 2 * k * levels;
    r.value = CVector::Zero(k);
    r.stderr_re = Eigen::VectorXd::Zero(k);
    r.stderr_im = Eigen::VectorXd::Zero(k);
    double max_level_se = 0.0;
    for (std::size_t l = 0; l < levels; ++l) {
        CVector q(k);
        Eigen::VectorXd se(k);
        for (int j = 0; j < k; ++j) {
            q(j) = Complex(m.mean[2 * k * l + 2 * j], m.mean[2 * k * l + 2 * j + 1]);
            se(j) = m.stderr_of(2 * k * l + 2 * j);
            max_level_se = std::max({max_level_se, se(j), m.stderr_of(2 * k * l + 2 * j + 1)});
        }
        r.quotients.push_back(q);
        r.quotient_stderr_re.push_back(se);
    }
    for (int j = 0; j < k; ++j) {
        r.value(j) = Complex(m.mean[combined + 2 * j], m.mean[combined + 2 * j + 1]);
        r.stderr_re(j) = m.stderr_of(combined + 2 * j);
        r.stderr_im(j) = m.stderr_of(combined + 2 * j + 1);
    }
    const double trend = (r.quotients.front() - r.quotients.back()).norm();
    r.inconclusive = levels > 1 && max_level_se > 0.5 * trend;
    r.samples_used = static_cast<long>(m.count);
    r.rejected = m.rejected;
    return r;
}

}  // namespace heatpath
