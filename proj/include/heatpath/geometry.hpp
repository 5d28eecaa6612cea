#pragma once
/**
 * @file geometry.hpp
 * @brief Model manifolds with exact geodesics and boundary queries.
 *
 * Every model stores points and tangent vectors in a 3-component vector;
 * components beyond the chart dimension are zero. Chart conventions:
 *   - Interval, Disk, ImplicitPlanar: ambient Cartesian coordinates.
 *   - Circle: angle in [0, 2*pi); velocities are arclength speeds.
 *   - FlatTorus: fundamental-domain coordinates in [0,L1) x [0,L2).
 *   - Sphere: ambient 3-vectors of norm `radius`, velocities tangent.
 *
 * Boundary models (Interval, Disk, ImplicitPlanar) describe the closure
 * of {f > 0}. All queries are const; a model is immutable once built.
 */

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace heatpath {

using Vec = Eigen::Vector3d;

enum class ModelKind { interval, disk, implicit_planar, circle, flat_torus, sphere };
enum class PointClass { interior, boundary, outside };

const char* to_string(ModelKind kind);
const char* to_string(PointClass cls);

struct PhasePoint {
    Vec position = Vec::Zero();
    Vec velocity = Vec::Zero();
};

struct BoundaryHit {
    double time = 0.0;
    Vec point = Vec::Zero();
    double incidence_cosine = 0.0;
};

/// Level function of a planar domain {f > 0} together with the data needed
/// to search it for boundary crossings without tunneling.
struct LevelSet {
    std::string name;
    std::vector<double> params;
    std::function<double(const Vec&)> value;
    std::function<Vec(const Vec&)> gradient;
    double lipschitz = 1.0;             // sup |grad f| on a neighbourhood of the closure
    double characteristic_size = 1.0;   // length scale for the minimum search step
    std::vector<Vec> corners;           // hits near these points are rejected by the tracer
    std::vector<Vec> boundary_samples;  // points on {f = 0} used for validation
};

class GeometryModel {
public:
    static constexpr double kFlatHitTolerance = 1e-12;
    static constexpr double kImplicitHitTolerance = 1e-10;
    static constexpr double kGrazingThreshold = 1e-8;

    static GeometryModel interval(double a, double b);
    static GeometryModel disk(double radius);
    static GeometryModel implicit_planar(LevelSet level);
    static GeometryModel circle(double radius);
    static GeometryModel flat_torus(double l1, double l2);
    static GeometryModel sphere(double radius);

    /// {x^2/a^2 + y^2/b^2 < 1}
    static GeometryModel ellipse(double a, double b);
    /// Intersection of two unit disks centred at (+-separation/2, 0); has two corners.
    static GeometryModel lens(double separation);

    GeometryModel with_tolerances(double hit_tolerance, double grazing_threshold) const;

    ModelKind kind() const { return kind_; }
    int dim() const;
    /// Number of coordinates used to store a position (3 for the sphere).
    int ambient_dim() const;
    bool has_boundary() const;
    double hit_tolerance() const { return hit_tolerance_; }
    double grazing_threshold() const { return grazing_threshold_; }

    double lower() const { return p0_; }
    double upper() const { return p1_; }
    double radius() const { return p0_; }
    double period(int axis) const { return axis == 0 ? p0_ : p1_; }
    const LevelSet* level_set() const { return level_ ? &*level_ : nullptr; }

    /// Canonical descriptor, e.g. "interval(0,1)" or "sphere(1)".
    std::string descriptor() const;

    PointClass classify(const Vec& x) const;
    /// Signed distance to the boundary (first order for implicit domains),
    /// positive inside. Closed models return +infinity.
    double boundary_distance(const Vec& x) const;
    Vec inward_normal(const Vec& x) const;
    /// v - 2<v,n>n at the boundary point x.
    Vec reflect(const Vec& x, const Vec& v) const;
    PhasePoint advance(const PhasePoint& p, double s) const;
    std::optional<BoundaryHit> first_boundary_hit(const PhasePoint& p, double s_max) const;

    /// Representative of x in the fundamental domain (angles, torus cell).
    Vec wrap(const Vec& x) const;
    /// Distance between positions, respecting periodic identifications.
    double position_distance(const Vec& a, const Vec& b) const;
    /// Orthonormal basis of the tangent space at x, `dim()` vectors.
    void tangent_basis(const Vec& x, Vec& e1, Vec& e2) const;
    /// Project a tangent-space coordinate vector onto a chart velocity.
    Vec tangent_vector(const Vec& x, double c0, double c1) const;

private:
    GeometryModel() = default;

    double level_value(const Vec& x) const;
    Vec level_gradient(const Vec& x) const;
    std::optional<BoundaryHit> implicit_hit(const PhasePoint& p, double s_max) const;
    void check_finite(const Vec& x) const;

    ModelKind kind_ = ModelKind::interval;
    double p0_ = 0.0;
    double p1_ = 1.0;
    std::optional<LevelSet> level_;
    double hit_tolerance_ = kFlatHitTolerance;
    double grazing_threshold_ = kGrazingThreshold;
};

}  // namespace heatpath
