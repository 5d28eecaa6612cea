#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "heatpath/error.hpp"
#include "heatpath/oracle.hpp"

#include <cmath>
#include <numbers>

using namespace heatpath;
using std::numbers::pi;

namespace {

BundleSpec flat(const GeometryModel& g, const char* potential = "zero", double alpha = 0.0) {
    return make_bundle(1, false, make_connection(parse_descriptor("zero"), 1, false, g),
                       make_potential(parse_descriptor(potential), 1), alpha);
}

SpectralModel model(const GeometryModel& g, const BoundaryOperator& B) {
    const auto m = spectral_model_for(g, flat(g), B);
    REQUIRE(m);
    return *m;
}

}  // namespace

// Reference values below were computed from the cosine/sine series truncated at 200 modes.
TEST_CASE("interval kernels agree with series values") {
    const auto g = GeometryModel::interval(0.0, pi);
    const SpectralModel neu = model(g, BoundaryOperator::neumann(1));
    const SpectralModel dir = model(g, BoundaryOperator::dirichlet(1));
    CHECK(neu.tag == ProblemTag::interval_neumann);
    CHECK(spectral_kernel(neu, 1.0, 2.0, 0.3) == doctest::Approx(0.22418162357078614).epsilon(1e-11));
    CHECK(spectral_kernel(dir, 1.0, 2.0, 0.3) == doctest::Approx(0.22348257968879232).epsilon(1e-11));
    CHECK(image_kernel(ImageProblem::interval, ImageBc::neumann, 1.0, 2.0, 0.3, 0.0, pi) ==
          doctest::Approx(0.22418162357078614).epsilon(1e-11));
    CHECK(image_kernel(ImageProblem::interval, ImageBc::dirichlet, 1.0, 2.0, 0.3, 0.0, pi) ==
          doctest::Approx(0.22348257968879232).epsilon(1e-11));
}

TEST_CASE("half-line neumann kernel at the origin") {
    // 2 / sqrt(4 pi t) at t = 1
    CHECK(image_kernel(ImageProblem::half_line, ImageBc::neumann, 0.0, 0.0, 1.0) ==
          doctest::Approx(0.5641895835477563).epsilon(1e-14));
    CHECK(image_kernel(ImageProblem::half_line, ImageBc::dirichlet, 0.0, 0.7, 1.0) == 0.0);
}

TEST_CASE("eigenvalues") {
    const SpectralModel dir = model(GeometryModel::interval(0.0, 2.0), BoundaryOperator::dirichlet(1));
    CHECK(dir.eigenvalue(1) == doctest::Approx(pi * pi / 4));
    const SpectralModel sph = model(GeometryModel::sphere(2.0), BoundaryOperator::neumann(1));
    CHECK(sph.eigenvalue(2) == doctest::Approx(6.0 / 4.0));
    const SpectralModel tor = model(GeometryModel::flat_torus(1.0, 2.0), BoundaryOperator::neumann(1));
    CHECK(tor.eigenvalue(1, 1) == doctest::Approx(4 * pi * pi * 1.25));
    const auto pairs = tor.eigenpairs(5);
    REQUIRE(pairs.size() == 5);
    for (std::size_t i = 1; i < pairs.size(); ++i) CHECK(pairs[i - 1].lambda <= pairs[i].lambda);
}

TEST_CASE("spectral evolution of registry sections") {
    const auto g = GeometryModel::interval(0.0, pi);
    const SpectralModel dir = model(g, BoundaryOperator::dirichlet(1));
    const EvolvedSection e = spectral_evolve(dir, make_section(parse_descriptor("sin(1)"), 1, g), 0.25);
    CHECK(e.section(Vec(1, 0, 0))(0).real() == doctest::Approx(0.655338261900256).epsilon(1e-13));

    const auto c = GeometryModel::circle(1.0);
    const SpectralModel circ = model(c, BoundaryOperator::neumann(1));
    const EvolvedSection ec = spectral_evolve(circ, make_section(parse_descriptor("cos(2)"), 1, c), 0.5);
    CHECK(ec.section(Vec(0.3, 0, 0))(0).real() == doctest::Approx(std::exp(-2.0) * std::cos(0.6)));

    CHECK_THROWS_AS(dir.decompose(make_section(parse_descriptor("gauss(1,0,0.2)"), 1, g)), Error);
}

TEST_CASE("no spectral model with a potential") {
    const auto g = GeometryModel::interval(0.0, pi);
    CHECK(!spectral_model_for(g, flat(g, "cosine-well(1)", 1.0), BoundaryOperator::neumann(1)));
}

TEST_CASE("finite differences") {
    const auto g = GeometryModel::interval(0.0, pi);
    const FieldSection one = make_section(parse_descriptor("const(1)"), 1, g);
    const Potential v = make_potential(parse_descriptor("constant(0.7)"), 1);

    const FdSolution at0 = fd_reference_evolve(0.0, pi, v, ImageBc::neumann, make_section(parse_descriptor("cos(2)"), 1, g),
                                               0.0);
    CHECK(at0.eval(1.3) == doctest::Approx(std::cos(2.6)).epsilon(1e-6));

    const FdSolution decay = fd_reference_evolve(0.0, pi, v, ImageBc::neumann, one, 0.1);
    CHECK(decay.self_consistency <= kFdSelfConsistency);
    CHECK(decay.eval(0.0) == doctest::Approx(std::exp(-0.07)).epsilon(1e-9));
    CHECK(decay.eval(2.0) == doctest::Approx(std::exp(-0.07)).epsilon(1e-9));

    const Potential zero = make_potential(parse_descriptor("zero"), 1);
    const FdSolution sine = fd_reference_evolve(0.0, pi, zero, ImageBc::dirichlet,
                                                make_section(parse_descriptor("sin(1)"), 1, g), 0.25);
    CHECK(sine.eval(1.0) == doctest::Approx(0.655338261900256).epsilon(1e-7));
    CHECK(sine.eval(0.0) == 0.0);
}
