#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "heatpath/billiard.hpp"

#include <cmath>
#include <numbers>

using namespace heatpath;
using std::numbers::pi;

TEST_CASE("interval flow folds the straight line") {
    const auto g = GeometryModel::interval(0.0, pi);
    const FlowResult r = billiard_flow(g, {Vec(1, 0, 0), Vec(3, 0, 0)}, 1.0);
    REQUIRE(r.in_domain);
    CHECK(r.reflections == 1);
    CHECK(r.final_point.position[0] == doctest::Approx(2 * pi - 4));
    CHECK(r.final_point.velocity[0] == doctest::Approx(-3.0));
}

TEST_CASE("disk flow through the centre bounces straight back") {
    const auto g = GeometryModel::disk(1.0);
    const FlowResult r = billiard_flow(g, {Vec(0, 0, 0), Vec(2, 0, 0)}, 1.0);
    REQUIRE(r.in_domain);
    CHECK(r.reflections == 1);
    CHECK(r.final_point.position.norm() < 1e-12);
    CHECK(r.final_point.velocity.x() == doctest::Approx(-2.0));
}

TEST_CASE("negative time inverts the flow") {
    const auto g = GeometryModel::lens(1.0);
    const PhasePoint p{Vec(0.1, 0.2, 0), Vec(1.3, -0.7, 0)};
    const FlowResult f = billiard_flow(g, p, 2.5);
    REQUIRE(f.in_domain);
    const FlowResult b = billiard_flow(g, f.final_point, -2.5);
    REQUIRE(b.in_domain);
    CHECK((b.final_point.position - p.position).norm() < 1e-9);
    CHECK((b.final_point.velocity - p.velocity).norm() < 1e-9);
}

TEST_CASE("energy is a quarter of speed squared times duration") {
    const auto g = GeometryModel::disk(1.0);
    const ReflectedPath path = trace_reflected(g, Vec(0.2, 0.1, 0), Vec(3, 4, 0), 0.8);
    REQUIRE(path.ok());
    CHECK(path.reflections() >= 1);
    CHECK(path_energy(path) == doctest::Approx(0.25 * 25 * 0.8));
}

TEST_CASE("split and concatenate round trip") {
    const auto g = GeometryModel::interval(0.0, 1.0);
    const ReflectedPath path = trace_reflected(g, Vec(0.3, 0, 0), Vec(5, 0, 0), 1.0);
    const auto [first, second] = split_path(g, path, 0.37);
    CHECK(first.total_time == doctest::Approx(0.37));
    CHECK(second.total_time == doctest::Approx(0.63));
    const ReflectedPath joined = concatenate(first, second);
    CHECK(joined.reflections() == path.reflections());
    CHECK(joined.end.position[0] == doctest::Approx(path.end.position[0]));
}

TEST_CASE("reflection cap rejects the path") {
    const auto g = GeometryModel::interval(0.0, 1.0);
    const ReflectedPath path = trace_reflected(g, Vec(0.5, 0, 0), Vec(100, 0, 0), 1.0, 10);
    CHECK(path.status == PathStatus::cap_exceeded);
    CHECK(default_reflection_cap(0.001, 1.0) == 64);
}

TEST_CASE("anti-development of a flat reflected path is a straight line") {
    const auto g = GeometryModel::disk(1.0);
    const ReflectedPath path = trace_reflected(g, Vec(0, 0, 0), Vec(0, 3, 0), 1.0);
    const auto pts = anti_development(g, path);
    REQUIRE(pts.size() >= 2);
    CHECK(pts.back().y() == doctest::Approx(3.0));
    for (const Vec& p : pts) CHECK(std::abs(p.x()) < 1e-12);
}
