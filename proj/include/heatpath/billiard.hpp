#pragma once
/**
 * @file billiard.hpp
 * @brief Reflected geodesics and the broken billiard flow.
 *
 * A reflected geodesic alternates exact geodesic segments with specular
 * reflections at transversal boundary hits. Paths that graze the boundary,
 * hit a declared corner, or exceed the reflection cap are flagged rather
 * than continued; they stand in for the measure-zero set on which the
 * flow is not defined.
 */

#include "heatpath/geometry.hpp"

#include <vector>

namespace heatpath {

enum class PathStatus { ok, grazing_rejected, corner_rejected, cap_exceeded };

const char* to_string(PathStatus status);

struct PathSegment {
    PhasePoint start;
    double start_time = 0.0;
    double duration = 0.0;
};

struct ReflectionEvent {
    double time = 0.0;
    Vec point = Vec::Zero();
    Vec incoming = Vec::Zero();
    Vec outgoing = Vec::Zero();
};

struct ReflectedPath {
    std::vector<PathSegment> segments;
    std::vector<ReflectionEvent> events;
    int sign = 1;  // -1 only for boundary starts that reflect at time zero
    double total_time = 0.0;
    PathStatus status = PathStatus::ok;
    PhasePoint end;

    int reflections() const { return static_cast<int>(events.size()); }
    bool ok() const { return status == PathStatus::ok; }
    void clear();
};

/// Reflection cap used when the caller passes kAutoReflectionCap:
/// 1e4 reflections per unit time per unit speed, never fewer than 64.
inline constexpr int kAutoReflectionCap = -1;
int default_reflection_cap(double t, double speed);

ReflectedPath trace_reflected(const GeometryModel& g, const Vec& x, const Vec& v, double t,
                              int max_reflections = kAutoReflectionCap);
/// Same as above, reusing the storage of `out`.
void trace_reflected(const GeometryModel& g, const Vec& x, const Vec& v, double t, int max_reflections,
                     ReflectedPath& out);

struct FlowResult {
    PhasePoint final_point;
    int reflections = 0;
    ReflectedPath path;
    bool in_domain = false;
};

/// Theta_t; negative t uses Theta_t(v) = -Theta_{-t}(-v). Off the good set
/// the flow is the identity and in_domain is false.
FlowResult billiard_flow(const GeometryModel& g, const PhasePoint& p, double t,
                         int max_reflections = kAutoReflectionCap);

/// (1/4) * integral of |gamma'|^2.
double path_energy(const ReflectedPath& path);

/// gamma_1 * gamma_2; the second path must start where the first ends.
ReflectedPath concatenate(const ReflectedPath& first, const ReflectedPath& second);
/// Split at interior time s into [0,s] and [s,t] (second part re-based at 0).
std::pair<ReflectedPath, ReflectedPath> split_path(const GeometryModel& g, const ReflectedPath& path, double s);

/// Samples of the reflected anti-development U_R(gamma) in R^dim at the
/// start and end of every segment plus `interior_samples` points inside it.
std::vector<Vec> anti_development(const GeometryModel& g, const ReflectedPath& path, int interior_samples = 3);

}  // namespace heatpath
