#pragma once
/**
 * @file harness.hpp
 * @brief Run configuration, convergence sweeps, report emission and the
 * property suite.
 *
 * Config files are `key = value` lines; `#` starts a comment. Unknown or
 * repeated keys are rejected. Keys:
 *
 *   geometry         interval(a,b) | disk(r) | circle(r) | torus(l1,l2) | sphere(r) | ellipse(a,b) | lens(h)
 *   rank             fibre dimension k
 *   field            real | complex
 *   connection       zero | circle-holonomy(c) | u1(c) | offdiag(c) | su2(c)
 *   potential        zero | constant(a) | diagonal(a1,..) | cosine-well(a) | coupled(a,b,c)
 *   alpha            bound on the potential (>= its sup norm)
 *   boundary         dirichlet | neumann | blockwise(s1,..)
 *   section          initial data, see make_section
 *   t                final time
 *   partitions       strictly increasing slice counts, e.g. 1,2,4,8
 *   samples          Monte Carlo samples per grid point and partition
 *   seed             master seed
 *   grid             evaluation points separated by ';', coordinates by ','
 *   antithetic       true | false
 *   oracle           auto | spectral | fd | none
 *   descriptive      true | false, allows runs without an oracle
 *   max_reflections  -1 for the automatic cap
 *   trace_start, trace_velocity, trace_samples   billiard trace inputs
 *   probe_times      decreasing times for the generator probe
 *   out, format, workers                          output directory, csv | jsonl, threads
 */

#include "heatpath/bundle.hpp"
#include "heatpath/geometry.hpp"
#include "heatpath/semigroup.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace heatpath {

inline constexpr const char* kVersion = "0.1.0";

enum class OutputFormat { csv, jsonl };

struct RunConfig {
    Descriptor geometry{"interval", {0.0, 3.141592653589793}};
    int rank = 1;
    bool complex_field = false;
    Descriptor connection{"zero", {}};
    Descriptor potential{"zero", {}};
    double alpha = 0.0;
    Descriptor boundary{"dirichlet", {}};
    Descriptor section{"sin", {1.0}};
    double t = 0.25;
    std::vector<int> partitions{1, 2, 4, 8};
    long samples = 100000;
    std::uint64_t seed = 1;
    std::vector<std::vector<double>> grid;
    bool antithetic = false;
    std::string oracle = "auto";
    bool descriptive = false;
    int max_reflections = kAutoReflectionCap;
    std::vector<double> trace_start{1.0};
    std::vector<double> trace_velocity{1.0};
    int trace_samples = 101;
    std::vector<double> probe_times{0.04, 0.02, 0.01};
    std::string out = ".";
    std::string format = "csv";
    int workers = 1;

    bool operator==(const RunConfig&) const = default;
};

RunConfig default_config();
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);
std::string serialize_config(const RunConfig& cfg);
void set_config_value(RunConfig& cfg, std::string_view key, std::string_view value);
std::string get_config_value(const RunConfig& cfg, std::string_view key);
/// Checks ranges and orderings that do not need the geometry.
void validate_config(const RunConfig& cfg);
/// FNV-1a of the serialized config without out/format/workers.
std::uint64_t config_hash(const RunConfig& cfg);
OutputFormat output_format(const RunConfig& cfg);

GeometryModel make_geometry(const Descriptor& d);

/// Everything an estimate needs, built from a config. Not movable: samplers
/// keep references into it.
struct Problem {
    GeometryModel geometry;
    BundleSpec bundle;
    BoundaryOperator boundary;
    FieldSection section;
    std::vector<Vec> grid;

    Problem(GeometryModel g, BundleSpec b, BoundaryOperator B, FieldSection u, std::vector<Vec> pts)
        : geometry(std::move(g)), bundle(std::move(b)), boundary(std::move(B)), section(std::move(u)),
          grid(std::move(pts)) {}
    Problem(const Problem&) = delete;
    Problem& operator=(const Problem&) = delete;

    /// Number of coordinates written per point (angle on the circle, ambient on the sphere).
    int coordinates() const { return geometry.ambient_dim(); }
};

std::unique_ptr<Problem> build_problem(const RunConfig& cfg);

/// Reference solution u(t, .) at the configured time, if one is available.
struct OracleFunction {
    std::string name;  // "spectral", "fd" or "image"
    double self_consistency = 0.0;
    std::function<CVector(const Vec&)> eval;
};

std::optional<OracleFunction> make_oracle(const RunConfig& cfg, const Problem& p, double t);

struct EstimateRow {
    Vec x = Vec::Zero();
    CVector value;
    Eigen::VectorXd stderr_re, stderr_im;
    long samples = 0;
    long rejected = 0;
};

struct ReportRow {
    int N = 0;
    double mesh = 0.0;
    Vec x = Vec::Zero();
    CVector estimate;
    Eigen::VectorXd stderr_re, stderr_im;
    CVector oracle;
    long rejected = 0;
};

struct LevelSummary {
    int N = 0;
    double mesh = 0.0;
    double sup_error = 0.0;
    double l2_error = 0.0;
    double max_stderr = 0.0;
    long rejected = 0;
    long samples = 0;
    bool rejection_warning = false;
};

struct ConvergenceReport {
    RunConfig config;
    int coordinates = 1;
    bool complex_valued = false;
    bool has_oracle = false;
    std::string oracle_name;
    double oracle_self_consistency = 0.0;
    std::vector<ReportRow> rows;
    std::vector<LevelSummary> levels;
};

/// Per-part error used throughout: max over components of max(|Re diff|, |Im diff|).
double row_error(const ReportRow& row);
/// Per-part standard error: max over components of max(se_re, se_im).
double row_stderr(const ReportRow& row);

std::vector<EstimateRow> run_slices(const RunConfig& cfg, const Problem& p, int N);
ConvergenceReport run_convergence(const RunConfig& cfg);
std::vector<EstimateRow> run_oracle_eval(const RunConfig& cfg);

struct TraceRow {
    double s = 0.0;
    Vec x = Vec::Zero();
    Vec v = Vec::Zero();
    bool event = false;
};

struct TraceResult {
    int coordinates = 1;
    std::vector<TraceRow> rows;
    PathStatus status = PathStatus::ok;
    int reflections = 0;
};

TraceResult run_trace(const RunConfig& cfg);

struct PropertyCheck {
    std::string name;
    bool passed = false;
    double measured = 0.0;
    double threshold = 0.0;
    /// threshold - measured for upper bounds; positive means room to spare.
    double margin = 0.0;
    std::string note;
};

struct PropertyReport {
    std::vector<PropertyCheck> checks;
    bool all_passed() const;
};

PropertyReport run_property_suite(const RunConfig& cfg);

// Emission. Paths are created inside `dir`; returned vectors list the files written.
std::vector<std::string> emit_report(const ConvergenceReport& report, const std::string& dir, OutputFormat format);
std::string emit_estimates(const std::vector<EstimateRow>& rows, int coordinates, bool complex_valued,
                           const std::string& path, OutputFormat format);
std::string emit_trace(const TraceResult& trace, const std::string& path);
std::string emit_properties(const PropertyReport& report, const std::string& path, OutputFormat format);
std::string emit_metadata(const RunConfig& cfg, const std::string& path, const std::string& extra_json = "");

}  // namespace heatpath
