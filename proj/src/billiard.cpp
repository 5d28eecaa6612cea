#include "heatpath/billiard.hpp"

#include "heatpath/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace heatpath {

const char* to_string(PathStatus status) {
    switch (status) {
        case PathStatus::ok: return "ok";
        case PathStatus::grazing_rejected: return "grazing_rejected";
        case PathStatus::corner_rejected: return "corner_rejected";
        case PathStatus::cap_exceeded: return "cap_exceeded";
    }
    return "?";
}

void ReflectedPath::clear() {
    segments.clear();
    events.clear();
    sign = 1;
    total_time = 0.0;
    status = PathStatus::ok;
    end = PhasePoint{};
}

int default_reflection_cap(double t, double speed) {
    const double cap = std::ceil(1e4 * std::fabs(t) * speed);
    if (!(cap < 1e9)) return 1000000000;
    return std::max(64, static_cast<int>(cap));
}

namespace {

bool near_corner(const GeometryModel& g, const Vec& point) {
    const LevelSet* ls = g.level_set();
    if (!ls) return false;
    for (const Vec& c : ls->corners)
        if ((point - c).head<2>().norm() <= g.hit_tolerance()) return true;
    return false;
}

}  // namespace

void trace_reflected(const GeometryModel& g, const Vec& x, const Vec& v, double t, int max_reflections,
                     ReflectedPath& out) {
    out.clear();
    if (!(t >= 0.0) || !std::isfinite(t)) fail(ErrorCode::invalid_input, "trace duration must be >= 0");
    const PointClass cls = g.classify(x);
    if (cls == PointClass::outside) fail(ErrorCode::domain, "start point outside the domain");
    for (int i = 0; i < 3; ++i)
        if (!std::isfinite(v[i])) fail(ErrorCode::invalid_input, "non-finite velocity");

    const double speed = v.norm();
    const int cap = max_reflections < 0 ? default_reflection_cap(t, speed) : max_reflections;
    out.total_time = t;

    PhasePoint cur{g.wrap(x), v};
    double time = 0.0;

    if (cls == PointClass::boundary && speed > 0.0) {
        const Vec n = g.inward_normal(x);
        const double vn = v.dot(n);
        if (std::fabs(vn) / speed < g.grazing_threshold()) {
            out.status = PathStatus::grazing_rejected;
            out.end = cur;
            return;
        }
        if (vn < 0.0) {
            // starts outward: reflect at time zero, sign -1
            const Vec w = v - 2.0 * vn * n;
            out.events.push_back(ReflectionEvent{0.0, x, v, w});
            out.sign = -1;
            cur.velocity = w;
            if (out.reflections() > cap) {
                out.status = PathStatus::cap_exceeded;
                out.end = cur;
                return;
            }
        }
    }

    while (time < t) {
        const double remaining = t - time;
        std::optional<BoundaryHit> hit;
        if (g.has_boundary() && speed > 0.0) hit = g.first_boundary_hit(cur, remaining);
        if (!hit || hit->time >= remaining) {
            out.segments.push_back(PathSegment{cur, time, remaining});
            cur = g.advance(cur, remaining);
            time = t;
            break;
        }
        out.segments.push_back(PathSegment{cur, time, hit->time});
        if (hit->incidence_cosine < g.grazing_threshold()) {
            out.status = PathStatus::grazing_rejected;
            break;
        }
        if (near_corner(g, hit->point)) {
            out.status = PathStatus::corner_rejected;
            break;
        }
        time += hit->time;
        if (out.reflections() + 1 > cap) {
            out.status = PathStatus::cap_exceeded;
            break;
        }
        const Vec incoming = cur.velocity;
        const Vec outgoing = g.reflect(hit->point, incoming);
        out.events.push_back(ReflectionEvent{time, hit->point, incoming, outgoing});
        cur.position = hit->point;
        cur.velocity = outgoing;
    }
    out.end = cur;
}

ReflectedPath trace_reflected(const GeometryModel& g, const Vec& x, const Vec& v, double t, int max_reflections) {
    ReflectedPath path;
    trace_reflected(g, x, v, t, max_reflections, path);
    return path;
}

FlowResult billiard_flow(const GeometryModel& g, const PhasePoint& p, double t, int max_reflections) {
    FlowResult r;
    const bool backward = t < 0.0;
    const Vec v0 = backward ? Vec(-p.velocity) : p.velocity;
    r.path = trace_reflected(g, p.position, v0, std::fabs(t), max_reflections);
    r.reflections = r.path.reflections();
    r.in_domain = r.path.ok();
    if (!r.in_domain) {
        r.final_point = p;
        return r;
    }
    r.final_point = r.path.end;
    if (backward) r.final_point.velocity = -r.final_point.velocity;
    return r;
}

double path_energy(const ReflectedPath& path) {
    if (!path.ok()) fail(ErrorCode::undefined, "energy of a rejected path is undefined");
    double e = 0.0;
    for (const PathSegment& s : path.segments) e += 0.25 * s.start.velocity.squaredNorm() * s.duration;
    return e;
}

ReflectedPath concatenate(const ReflectedPath& first, const ReflectedPath& second) {
    ReflectedPath out = first;
    const double shift = first.total_time;
    for (PathSegment s : second.segments) {
        s.start_time += shift;
        out.segments.push_back(s);
    }
    for (ReflectionEvent e : second.events) {
        e.time += shift;
        out.events.push_back(e);
    }
    out.total_time = first.total_time + second.total_time;
    out.status = first.ok() ? second.status : first.status;
    out.end = second.end;
    return out;
}

std::pair<ReflectedPath, ReflectedPath> split_path(const GeometryModel& g, const ReflectedPath& path, double s) {
    if (!(s > 0.0 && s < path.total_time)) fail(ErrorCode::invalid_input, "split time must be interior");
    if (!path.ok()) fail(ErrorCode::undefined, "cannot split a rejected path");
    ReflectedPath a, b;
    a.sign = path.sign;
    a.total_time = s;
    b.total_time = path.total_time - s;
    for (const PathSegment& seg : path.segments) {
        const double t0 = seg.start_time, t1 = seg.start_time + seg.duration;
        if (t1 <= s) {
            a.segments.push_back(seg);
        } else if (t0 >= s) {
            PathSegment moved = seg;
            moved.start_time -= s;
            b.segments.push_back(moved);
        } else {
            a.segments.push_back(PathSegment{seg.start, t0, s - t0});
            const PhasePoint mid = g.advance(seg.start, s - t0);
            b.segments.push_back(PathSegment{mid, 0.0, t1 - s});
        }
    }
    for (const ReflectionEvent& e : path.events) {
        if (e.time < s) {
            a.events.push_back(e);
        } else {
            ReflectionEvent moved = e;
            moved.time -= s;
            b.events.push_back(moved);
        }
    }
    if (!b.events.empty() && b.events.front().time == 0.0) b.sign = -1;
    b.end = path.end;
    a.end = b.segments.empty() ? path.end : b.segments.front().start;
    if (!b.events.empty() && b.events.front().time == 0.0) {
        a.end.velocity = b.events.front().incoming;
    }
    return {std::move(a), std::move(b)};
}

std::vector<Vec> anti_development(const GeometryModel& g, const ReflectedPath& path, int interior_samples) {
    if (g.kind() == ModelKind::sphere)
        fail(ErrorCode::unsupported, "anti-development needs flat transport; sphere is unsupported");
    if (!path.ok()) fail(ErrorCode::undefined, "anti-development of a rejected path is undefined");
    interior_samples = std::max(interior_samples, 0);

    Eigen::Matrix3d transport_inv = Eigen::Matrix3d::Identity();
    Vec u = Vec::Zero();
    std::vector<Vec> samples{u};
    std::size_t next_event = 0;
    for (const PathSegment& seg : path.segments) {
        while (next_event < path.events.size() && path.events[next_event].time <= seg.start_time) {
            const Vec n = g.inward_normal(path.events[next_event].point);
            const Eigen::Matrix3d r = Eigen::Matrix3d::Identity() - 2.0 * n * n.transpose();
            transport_inv = transport_inv * r;
            ++next_event;
        }
        const Vec rate = transport_inv * seg.start.velocity;
        for (int k = 1; k <= interior_samples + 1; ++k) {
            const double frac = static_cast<double>(k) / (interior_samples + 1);
            samples.push_back(u + frac * seg.duration * rate);
        }
        u += seg.duration * rate;
    }
    return samples;
}

}  // namespace heatpath
