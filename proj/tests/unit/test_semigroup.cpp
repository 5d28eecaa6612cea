#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "heatpath/error.hpp"
#include "heatpath/semigroup.hpp"

#include <cmath>
#include <numbers>

using namespace heatpath;
using std::numbers::pi;

namespace {

BundleSpec flat(const GeometryModel& g) {
    return make_bundle(1, false, make_connection(parse_descriptor("zero"), 1, false, g),
                       make_potential(parse_descriptor("zero"), 1), 0.0);
}

}  // namespace

TEST_CASE("partitions") {
    const Partition p = Partition::uniform(1.0, 4);
    CHECK(p.size() == 4);
    CHECK(p.step(2) == doctest::Approx(0.25));
    const Partition q = p.concatenate(Partition({0.0, 0.5}));
    CHECK(q.size() == 5);
    CHECK(q.total() == doctest::Approx(1.5));
    CHECK(q.mesh() == doctest::Approx(0.5));
    CHECK_THROWS_AS(Partition({0.0, 0.5, 0.5}), Error);
}

TEST_CASE("gauss hermite integrates x^2 exp(-x^2)") {
    std::vector<double> x, w;
    gauss_hermite(64, x, w);
    double s0 = 0, s2 = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        s0 += w[i];
        s2 += w[i] * x[i] * x[i];
    }
    CHECK(s0 == doctest::Approx(std::sqrt(pi)).epsilon(1e-13));
    CHECK(s2 == doctest::Approx(std::sqrt(pi) / 2).epsilon(1e-13));
}

TEST_CASE("single-step quadrature on the dirichlet interval") {
    const auto g = GeometryModel::interval(0.0, pi);
    const BundleSpec b = flat(g);
    const auto B = BoundaryOperator::dirichlet(1);
    const FieldSection u = make_section(parse_descriptor("sin(1)"), 1, g);
    const CVector v = quadrature_step_1d(g, b, B, u, Vec(1, 0, 0), 0.25);
    // exp(-1/4) sin(1)
    CHECK(v(0).real() == doctest::Approx(0.6553382619).epsilon(1e-8));
    const FieldSection u3 = make_section(parse_descriptor("sin(3)"), 1, g);
    const CVector v3 = quadrature_step_1d(g, b, B, u3, Vec(pi / 2, 0, 0), 0.25);
    CHECK(v3(0).real() == doctest::Approx(-std::exp(-2.25)).epsilon(1e-8));
}

TEST_CASE("monte carlo estimate on the circle") {
    const auto g = GeometryModel::circle(1.0);
    const BundleSpec b = flat(g);
    const auto B = BoundaryOperator::neumann(1);
    const FieldSection u = make_section(parse_descriptor("cos(1)"), 1, g);
    EstimateOptions opts;
    opts.seed = 3;
    opts.samples = 50000;
    const SliceEstimate e = estimate_slice(g, b, B, u, Vec(0.4, 0, 0), Partition::uniform(0.5, 2), opts);
    const double exact = std::exp(-0.5) * std::cos(0.4);
    CHECK(e.samples_used == 50000);
    CHECK(e.rejected == 0);
    CHECK(std::abs(e.value(0).real() - exact) < 4 * e.stderr_re(0));
}

TEST_CASE("estimates do not depend on the worker count") {
    const auto g = GeometryModel::disk(1.0);
    const BundleSpec b = flat(g);
    const auto B = BoundaryOperator::neumann(1);
    const FieldSection u = make_section(parse_descriptor("gauss(0.2,0,0.5)"), 1, g);
    EstimateOptions opts;
    opts.samples = 3000;
    const Partition tau = Partition::uniform(0.3, 3);
    const SliceEstimate one = estimate_slice(g, b, B, u, Vec(0.5, 0.1, 0), tau, opts);
    opts.workers = 4;
    const SliceEstimate four = estimate_slice(g, b, B, u, Vec(0.5, 0.1, 0), tau, opts);
    CHECK(one.value(0) == four.value(0));
    CHECK(one.stderr_re(0) == four.stderr_re(0));
}

TEST_CASE("antithetic pairs vanish at a dirichlet boundary point") {
    const auto g = GeometryModel::interval(0.0, pi);
    const BundleSpec b = flat(g);
    const auto B = BoundaryOperator::dirichlet(1);
    const FieldSection u = make_section(parse_descriptor("cos(1)"), 1, g);
    EstimateOptions opts;
    opts.samples = 1000;
    opts.antithetic = true;
    const SliceEstimate e = estimate_slice(g, b, B, u, Vec(0, 0, 0), Partition::uniform(0.2, 2), opts);
    CHECK(e.value(0) == Complex(0.0, 0.0));
}

TEST_CASE("sections outside the registry are rejected") {
    const auto g = GeometryModel::interval(0.0, 1.0);
    CHECK_THROWS_AS(make_section(parse_descriptor("tanh(1)"), 1, g), Error);
}
