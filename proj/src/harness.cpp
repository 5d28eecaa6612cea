#include "heatpath/harness.hpp"

#include "heatpath/error.hpp"
#include "heatpath/oracle.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

namespace heatpath {

namespace {

using ordered_json = nlohmann::ordered_json;

template <class T>
T parse_integer(std::string_view key, std::string_view text) {
    text = trim(text);
    T value{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size())
        fail(ErrorCode::validation, std::string(key) + ": not an integer: '" + std::string(text) + "'");
    return value;
}

bool parse_bool(std::string_view key, std::string_view text) {
    text = trim(text);
    if (text == "true") return true;
    if (text == "false") return false;
    fail(ErrorCode::validation, std::string(key) + ": expected true or false");
}

std::string one_of(std::string_view key, std::string_view text, std::initializer_list<std::string_view> allowed) {
    text = trim(text);
    for (auto a : allowed)
        if (text == a) return std::string(text);
    std::string msg = std::string(key) + ": expected one of";
    for (auto a : allowed) msg += " " + std::string(a);
    fail(ErrorCode::validation, msg);
}

std::vector<double> parse_doubles(std::string_view text) {
    std::vector<double> out;
    text = trim(text);
    if (text.empty()) return out;
    for (auto part : split(text, ',')) out.push_back(parse_double(part));
    return out;
}

std::string join_doubles(const std::vector<double>& v, char sep = ',') {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += sep;
        s += format_double(v[i]);
    }
    return s;
}

struct KeySpec {
    const char* name;
    void (*set)(RunConfig&, std::string_view);
    std::string (*get)(const RunConfig&);
    bool hashed;
};

const KeySpec kKeys[] = {
    {"geometry", [](RunConfig& c, std::string_view v) { c.geometry = parse_descriptor(v); },
     [](const RunConfig& c) { return format_descriptor(c.geometry); }, true},
    {"rank", [](RunConfig& c, std::string_view v) { c.rank = parse_integer<int>("rank", v); },
     [](const RunConfig& c) { return std::to_string(c.rank); }, true},
    {"field", [](RunConfig& c, std::string_view v) { c.complex_field = one_of("field", v, {"real", "complex"}) == "complex"; },
     [](const RunConfig& c) { return std::string(c.complex_field ? "complex" : "real"); }, true},
    {"connection", [](RunConfig& c, std::string_view v) { c.connection = parse_descriptor(v); },
     [](const RunConfig& c) { return format_descriptor(c.connection); }, true},
    {"potential", [](RunConfig& c, std::string_view v) { c.potential = parse_descriptor(v); },
     [](const RunConfig& c) { return format_descriptor(c.potential); }, true},
    {"alpha", [](RunConfig& c, std::string_view v) { c.alpha = parse_double(v); },
     [](const RunConfig& c) { return format_double(c.alpha); }, true},
    {"boundary", [](RunConfig& c, std::string_view v) { c.boundary = parse_descriptor(v); },
     [](const RunConfig& c) { return format_descriptor(c.boundary); }, true},
    {"section", [](RunConfig& c, std::string_view v) { c.section = parse_descriptor(v); },
     [](const RunConfig& c) { return format_descriptor(c.section); }, true},
    {"t", [](RunConfig& c, std::string_view v) { c.t = parse_double(v); },
     [](const RunConfig& c) { return format_double(c.t); }, true},
    {"partitions",
     [](RunConfig& c, std::string_view v) {
         c.partitions.clear();
         if (!trim(v).empty())
             for (auto part : split(trim(v), ',')) c.partitions.push_back(parse_integer<int>("partitions", part));
     },
     [](const RunConfig& c) {
         std::string s;
         for (std::size_t i = 0; i < c.partitions.size(); ++i) s += (i ? "," : "") + std::to_string(c.partitions[i]);
         return s;
     },
     true},
    {"samples", [](RunConfig& c, std::string_view v) { c.samples = parse_integer<long>("samples", v); },
     [](const RunConfig& c) { return std::to_string(c.samples); }, true},
    {"seed", [](RunConfig& c, std::string_view v) { c.seed = parse_integer<std::uint64_t>("seed", v); },
     [](const RunConfig& c) { return std::to_string(c.seed); }, true},
    {"grid",
     [](RunConfig& c, std::string_view v) {
         c.grid.clear();
         if (!trim(v).empty())
             for (auto point : split(trim(v), ';')) c.grid.push_back(parse_doubles(point));
     },
     [](const RunConfig& c) {
         std::string s;
         for (std::size_t i = 0; i < c.grid.size(); ++i) s += (i ? ";" : "") + join_doubles(c.grid[i]);
         return s;
     },
     true},
    {"antithetic", [](RunConfig& c, std::string_view v) { c.antithetic = parse_bool("antithetic", v); },
     [](const RunConfig& c) { return std::string(c.antithetic ? "true" : "false"); }, true},
    {"oracle", [](RunConfig& c, std::string_view v) { c.oracle = one_of("oracle", v, {"auto", "spectral", "fd", "none"}); },
     [](const RunConfig& c) { return c.oracle; }, true},
    {"descriptive", [](RunConfig& c, std::string_view v) { c.descriptive = parse_bool("descriptive", v); },
     [](const RunConfig& c) { return std::string(c.descriptive ? "true" : "false"); }, true},
    {"max_reflections",
     [](RunConfig& c, std::string_view v) { c.max_reflections = parse_integer<int>("max_reflections", v); },
     [](const RunConfig& c) { return std::to_string(c.max_reflections); }, true},
    {"trace_start", [](RunConfig& c, std::string_view v) { c.trace_start = parse_doubles(v); },
     [](const RunConfig& c) { return join_doubles(c.trace_start); }, true},
    {"trace_velocity", [](RunConfig& c, std::string_view v) { c.trace_velocity = parse_doubles(v); },
     [](const RunConfig& c) { return join_doubles(c.trace_velocity); }, true},
    {"trace_samples", [](RunConfig& c, std::string_view v) { c.trace_samples = parse_integer<int>("trace_samples", v); },
     [](const RunConfig& c) { return std::to_string(c.trace_samples); }, true},
    {"probe_times", [](RunConfig& c, std::string_view v) { c.probe_times = parse_doubles(v); },
     [](const RunConfig& c) { return join_doubles(c.probe_times); }, true},
    {"out", [](RunConfig& c, std::string_view v) { c.out = std::string(trim(v)); },
     [](const RunConfig& c) { return c.out; }, false},
    {"format", [](RunConfig& c, std::string_view v) { c.format = one_of("format", v, {"csv", "jsonl"}); },
     [](const RunConfig& c) { return c.format; }, false},
    {"workers", [](RunConfig& c, std::string_view v) { c.workers = parse_integer<int>("workers", v); },
     [](const RunConfig& c) { return std::to_string(c.workers); }, false},
};

const KeySpec& find_key(std::string_view key) {
    for (const KeySpec& k : kKeys)
        if (key == k.name) return k;
    fail(ErrorCode::validation, "unknown config key '" + std::string(key) + "'");
}

std::string serialize_keys(const RunConfig& cfg, bool hashed_only) {
    std::string s;
    for (const KeySpec& k : kKeys) {
        if (hashed_only && !k.hashed) continue;
        const std::string v = k.get(cfg);
        s += std::string(k.name) + " =" + (v.empty() ? "" : " " + v) + "\n";
    }
    return s;
}

std::uint64_t splitmix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Seed of the estimate at grid point `index` for N slices.
std::uint64_t point_seed(std::uint64_t seed, int N, std::size_t index) {
    return splitmix(seed ^ splitmix((static_cast<std::uint64_t>(N) << 32) | index));
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    const auto [ptr, ec] = std::to_chars(buf, buf + 16, v, 16);
    (void)ec;
    std::string s(buf, ptr);
    return std::string(16 - s.size(), '0') + s;
}

std::ofstream open_for_write(const std::string& path) {
    const std::filesystem::path p(path);
    std::error_code ec;
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
    if (ec) fail(ErrorCode::io, "cannot create directory " + p.parent_path().string() + ": " + ec.message());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::io, "cannot open " + path + " for writing");
    return out;
}

void finish(std::ofstream& out, const std::string& path) {
    out.flush();
    if (!out) fail(ErrorCode::io, "write failed for " + path);
}

std::string coordinate_header(const char* stem, int coordinates) {
    if (coordinates == 1) return stem;
    std::string s;
    for (int i = 0; i < coordinates; ++i) s += (i ? "," : "") + std::string(stem) + std::to_string(i);
    return s;
}

std::string coordinates_csv(const Vec& x, int coordinates) {
    std::string s;
    for (int i = 0; i < coordinates; ++i) s += (i ? "," : "") + format_double(x[i]);
    return s;
}

ordered_json coordinates_json(const Vec& x, int coordinates) {
    ordered_json a = ordered_json::array();
    for (int i = 0; i < coordinates; ++i) a.push_back(x[i]);
    return a;
}

/// One (component label, value part, stderr part) per written row.
struct Part {
    std::string label;
    double estimate, stderr, oracle;
};

std::vector<Part> parts(const CVector& est, const Eigen::VectorXd& se_re, const Eigen::VectorXd& se_im,
                        const CVector* oracle, bool complex_valued) {
    std::vector<Part> out;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (Eigen::Index c = 0; c < est.size(); ++c) {
        const std::string idx = std::to_string(c);
        const double o_re = oracle ? (*oracle)(c).real() : nan;
        const double o_im = oracle ? (*oracle)(c).imag() : nan;
        if (complex_valued) {
            out.push_back({idx + ".re", est(c).real(), se_re(c), o_re});
            out.push_back({idx + ".im", est(c).imag(), se_im(c), o_im});
        } else {
            out.push_back({idx, est(c).real(), se_re(c), o_re});
        }
    }
    return out;
}

std::string csv_number(double v) { return std::isnan(v) ? std::string() : format_double(v); }

}  // namespace

// ---------------------------------------------------------------- config

RunConfig default_config() {
    RunConfig cfg;
    for (int k = 1; k <= 9; ++k) cfg.grid.push_back({k * std::numbers::pi / 10.0});
    return cfg;
}

void set_config_value(RunConfig& cfg, std::string_view key, std::string_view value) {
    find_key(trim(key)).set(cfg, value);
}

std::string get_config_value(const RunConfig& cfg, std::string_view key) { return find_key(trim(key)).get(cfg); }

RunConfig parse_config(std::string_view text) {
    RunConfig cfg = default_config();
    std::vector<std::string> seen;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t end = std::min(text.find('\n', pos), text.size());
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            fail(ErrorCode::validation, "line " + std::to_string(line_no) + ": expected key = value");
        const std::string key(trim(line.substr(0, eq)));
        if (std::find(seen.begin(), seen.end(), key) != seen.end())
            fail(ErrorCode::validation, "line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
        try {
            set_config_value(cfg, key, line.substr(eq + 1));
        } catch (const Error& e) {
            fail(e.code(), "line " + std::to_string(line_no) + ": " + e.what());
        }
        seen.push_back(key);
    }
    validate_config(cfg);
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::io, "cannot read config " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_config(ss.str());
    } catch (const Error& e) {
        fail(e.code(), path + ": " + e.what());
    }
}

std::string serialize_config(const RunConfig& cfg) { return serialize_keys(cfg, false); }

void validate_config(const RunConfig& cfg) {
    auto bad = [](const std::string& msg) { fail(ErrorCode::validation, msg); };
    if (cfg.rank < 1) bad("rank must be >= 1");
    if (!(cfg.t > 0.0) || !std::isfinite(cfg.t)) bad("t must be positive");
    if (!(cfg.alpha >= 0.0)) bad("alpha must be >= 0");
    if (cfg.partitions.empty()) bad("partitions must not be empty");
    for (std::size_t i = 0; i < cfg.partitions.size(); ++i) {
        if (cfg.partitions[i] < 1) bad("partition sizes must be >= 1");
        if (i && cfg.partitions[i] <= cfg.partitions[i - 1]) bad("partition sizes must be strictly increasing");
    }
    if (cfg.samples < 1) bad("samples must be >= 1");
    if (cfg.antithetic && cfg.samples < 2) bad("antithetic sampling needs samples >= 2");
    if (cfg.max_reflections < -1) bad("max_reflections must be >= 0, or -1 for automatic");
    if (cfg.trace_samples < 2) bad("trace_samples must be >= 2");
    if (cfg.probe_times.empty()) bad("probe_times must not be empty");
    for (std::size_t i = 0; i < cfg.probe_times.size(); ++i) {
        if (!(cfg.probe_times[i] > 0.0)) bad("probe_times must be positive");
        if (i && !(cfg.probe_times[i] < cfg.probe_times[i - 1])) bad("probe_times must be decreasing");
    }
    if (cfg.workers < 1) bad("workers must be >= 1");
    if (cfg.out.empty()) bad("out must not be empty");
}

std::uint64_t config_hash(const RunConfig& cfg) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : serialize_keys(cfg, true)) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

OutputFormat output_format(const RunConfig& cfg) {
    return cfg.format == "jsonl" ? OutputFormat::jsonl : OutputFormat::csv;
}

// ---------------------------------------------------------------- problem

GeometryModel make_geometry(const Descriptor& d) {
    auto need = [&](std::size_t n) {
        if (d.params.size() != n)
            fail(ErrorCode::validation, "geometry " + d.name + " expects " + std::to_string(n) + " parameter(s)");
    };
    if (d.name == "interval") { need(2); return GeometryModel::interval(d.params[0], d.params[1]); }
    if (d.name == "disk") { need(1); return GeometryModel::disk(d.params[0]); }
    if (d.name == "circle") { need(1); return GeometryModel::circle(d.params[0]); }
    if (d.name == "torus") { need(2); return GeometryModel::flat_torus(d.params[0], d.params[1]); }
    if (d.name == "sphere") { need(1); return GeometryModel::sphere(d.params[0]); }
    if (d.name == "ellipse") { need(2); return GeometryModel::ellipse(d.params[0], d.params[1]); }
    if (d.name == "lens") { need(1); return GeometryModel::lens(d.params[0]); }
    fail(ErrorCode::validation, "unknown geometry '" + d.name + "'");
}

std::unique_ptr<Problem> build_problem(const RunConfig& cfg) {
    validate_config(cfg);
    GeometryModel g = make_geometry(cfg.geometry);
    Connection conn = make_connection(cfg.connection, cfg.rank, cfg.complex_field, g);
    Potential pot = make_potential(cfg.potential, cfg.rank);
    BundleSpec b = make_bundle(cfg.rank, cfg.complex_field, std::move(conn), std::move(pot), cfg.alpha);
    BoundaryOperator B = make_boundary_operator(cfg.boundary, cfg.rank);
    const BoundaryValidation bv = validate_boundary_operator(b, B, g);
    if (!bv.valid) fail(ErrorCode::validation, "boundary operator rejected: " + bv.note);
    FieldSection u = make_section(cfg.section, cfg.rank, g);
    if (u.complex_valued && !cfg.complex_field)
        fail(ErrorCode::validation, "section " + format_descriptor(cfg.section) + " needs field = complex");
    const int coords = g.ambient_dim();
    std::vector<Vec> pts;
    for (std::size_t i = 0; i < cfg.grid.size(); ++i) {
        const auto& p = cfg.grid[i];
        if (static_cast<int>(p.size()) != coords)
            fail(ErrorCode::validation, "grid point " + std::to_string(i) + " needs " + std::to_string(coords) +
                                            " coordinate(s)");
        Vec x = Vec::Zero();
        for (int c = 0; c < coords; ++c) x[c] = p[c];
        if (g.classify(x) == PointClass::outside)
            fail(ErrorCode::validation, "grid point " + std::to_string(i) + " lies outside " + g.descriptor());
        pts.push_back(x);
    }
    return std::make_unique<Problem>(std::move(g), std::move(b), std::move(B), std::move(u), std::move(pts));
}

std::optional<OracleFunction> make_oracle(const RunConfig& cfg, const Problem& p, double t) {
    if (cfg.oracle == "none") return std::nullopt;
    if (cfg.oracle == "auto" || cfg.oracle == "spectral") {
        if (const auto model = spectral_model_for(p.geometry, p.bundle, p.boundary)) {
            try {
                auto evolved = std::make_shared<EvolvedSection>(spectral_evolve(*model, p.section, t));
                return OracleFunction{"spectral", evolved->tail_bound,
                                      [evolved](const Vec& x) { return evolved->section(x); }};
            } catch (const Error& e) {
                if (e.code() != ErrorCode::unsupported || cfg.oracle == "spectral") throw;
            }
        } else if (cfg.oracle == "spectral") {
            fail(ErrorCode::unsupported, "no spectral oracle for this geometry and bundle");
        }
    }
    const bool fd_ok = p.geometry.kind() == ModelKind::interval && p.bundle.rank == 1 &&
                       p.bundle.connection.is_zero && p.boundary.scalar_sign() != 0 && !p.section.complex_valued;
    if (fd_ok) {
        const ImageBc bc = p.boundary.scalar_sign() < 0 ? ImageBc::dirichlet : ImageBc::neumann;
        auto sol = std::make_shared<FdSolution>(fd_reference_evolve(
            p.geometry.lower(), p.geometry.upper(), p.bundle.potential, bc, p.section, t));
        return OracleFunction{"fd", sol->self_consistency, [sol](const Vec& x) {
                                  CVector v(1);
                                  v(0) = sol->eval(x[0]);
                                  return v;
                              }};
    }
    if (cfg.oracle == "fd") fail(ErrorCode::unsupported, "finite-difference oracle needs a scalar interval problem");
    return std::nullopt;
}

// ---------------------------------------------------------------- runs

double row_error(const ReportRow& row) {
    double e = 0.0;
    for (Eigen::Index c = 0; c < row.estimate.size(); ++c) {
        const Complex d = row.estimate(c) - row.oracle(c);
        e = std::max({e, std::fabs(d.real()), std::fabs(d.imag())});
    }
    return e;
}

double row_stderr(const ReportRow& row) {
    double s = 0.0;
    for (Eigen::Index c = 0; c < row.stderr_re.size(); ++c) s = std::max({s, row.stderr_re(c), row.stderr_im(c)});
    return s;
}

std::vector<EstimateRow> run_slices(const RunConfig& cfg, const Problem& p, int N) {
    const Partition tau = Partition::uniform(cfg.t, N);
    std::vector<EstimateRow> rows;
    rows.reserve(p.grid.size());
    for (std::size_t i = 0; i < p.grid.size(); ++i) {
        EstimateOptions opts;
        opts.seed = point_seed(cfg.seed, N, i);
        opts.samples = cfg.samples;
        opts.workers = cfg.workers;
        opts.antithetic = cfg.antithetic;
        opts.max_reflections = cfg.max_reflections;
        const SliceEstimate est = estimate_slice(p.geometry, p.bundle, p.boundary, p.section, p.grid[i], tau, opts);
        EstimateRow row;
        row.x = p.grid[i];
        row.value = est.value;
        row.stderr_re = est.stderr_re;
        row.stderr_im = est.stderr_im;
        row.samples = est.samples_used;
        row.rejected = est.rejected;
        rows.push_back(std::move(row));
    }
    return rows;
}

ConvergenceReport run_convergence(const RunConfig& cfg) {
    const auto p = build_problem(cfg);
    const auto oracle = make_oracle(cfg, *p, cfg.t);
    if (!oracle && !cfg.descriptive)
        fail(ErrorCode::unsupported, "no oracle for this problem; set descriptive = true for an estimate-only run");

    ConvergenceReport report;
    report.config = cfg;
    report.coordinates = p->coordinates();
    report.complex_valued = cfg.complex_field;
    report.has_oracle = oracle.has_value();
    report.oracle_name = oracle ? oracle->name : "none";
    report.oracle_self_consistency = oracle ? oracle->self_consistency : 0.0;

    std::vector<CVector> reference;
    if (oracle)
        for (const Vec& x : p->grid) reference.push_back(oracle->eval(x));

    for (int N : cfg.partitions) {
        const double mesh = Partition::uniform(cfg.t, N).mesh();
        const std::vector<EstimateRow> est = run_slices(cfg, *p, N);
        LevelSummary level;
        level.N = N;
        level.mesh = mesh;
        double sq = 0.0;
        for (std::size_t i = 0; i < est.size(); ++i) {
            ReportRow row;
            row.N = N;
            row.mesh = mesh;
            row.x = est[i].x;
            row.estimate = est[i].value;
            row.stderr_re = est[i].stderr_re;
            row.stderr_im = est[i].stderr_im;
            row.rejected = est[i].rejected;
            level.rejected += est[i].rejected;
            level.samples += est[i].samples;
            level.max_stderr = std::max(level.max_stderr, row_stderr(row));
            if (oracle) {
                row.oracle = reference[i];
                level.sup_error = std::max(level.sup_error, row_error(row));
                sq += (row.estimate - row.oracle).squaredNorm();
            }
            report.rows.push_back(std::move(row));
        }
        if (oracle) level.l2_error = est.empty() ? 0.0 : std::sqrt(sq / static_cast<double>(est.size()));
        else level.sup_error = level.l2_error = std::numeric_limits<double>::quiet_NaN();
        const long total = level.samples + level.rejected;
        level.rejection_warning = total > 0 && level.rejected > 0.01 * total;
        report.levels.push_back(level);
    }
    return report;
}

std::vector<EstimateRow> run_oracle_eval(const RunConfig& cfg) {
    const auto p = build_problem(cfg);
    const auto oracle = make_oracle(cfg, *p, cfg.t);
    if (!oracle) fail(ErrorCode::unsupported, "no oracle for this problem");
    std::vector<EstimateRow> rows;
    for (const Vec& x : p->grid) {
        EstimateRow row;
        row.x = x;
        row.value = oracle->eval(x);
        row.stderr_re = Eigen::VectorXd::Zero(row.value.size());
        row.stderr_im = Eigen::VectorXd::Zero(row.value.size());
        rows.push_back(std::move(row));
    }
    return rows;
}

TraceResult run_trace(const RunConfig& cfg) {
    validate_config(cfg);
    const GeometryModel g = make_geometry(cfg.geometry);
    const int coords = g.ambient_dim();
    if (static_cast<int>(cfg.trace_start.size()) != coords || static_cast<int>(cfg.trace_velocity.size()) != coords)
        fail(ErrorCode::validation, "trace_start and trace_velocity need " + std::to_string(coords) + " coordinate(s)");
    Vec x = Vec::Zero(), v = Vec::Zero();
    for (int c = 0; c < coords; ++c) {
        x[c] = cfg.trace_start[c];
        v[c] = cfg.trace_velocity[c];
    }
    if (g.kind() == ModelKind::sphere && std::fabs(x.dot(v)) > 1e-9 * x.norm() * std::max(1.0, v.norm()))
        fail(ErrorCode::validation, "trace_velocity must be tangent to the sphere at trace_start");
    const ReflectedPath path = trace_reflected(g, x, v, cfg.t, cfg.max_reflections);
    if (!path.ok())
        fail(ErrorCode::domain, std::string("trajectory rejected: ") + to_string(path.status));

    TraceResult out;
    out.coordinates = coords;
    out.status = path.status;
    out.reflections = path.reflections();
    const int n = cfg.trace_samples;
    std::size_t seg = 0, ev = 0;
    for (int i = 0; i < n; ++i) {
        const double s = (i == n - 1) ? cfg.t : cfg.t * i / (n - 1);
        while (ev < path.events.size() && path.events[ev].time <= s) {
            const ReflectionEvent& e = path.events[ev++];
            out.rows.push_back({e.time, e.point, e.outgoing, true});
        }
        while (seg + 1 < path.segments.size() && path.segments[seg + 1].start_time <= s) ++seg;
        const PathSegment& sg = path.segments[seg];
        const PhasePoint pt = (i == n - 1) ? path.end : g.advance(sg.start, s - sg.start_time);
        out.rows.push_back({s, pt.position, pt.velocity, false});
    }
    while (ev < path.events.size()) {
        const ReflectionEvent& e = path.events[ev++];
        out.rows.push_back({e.time, e.point, e.outgoing, true});
    }
    return out;
}

bool PropertyReport::all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const PropertyCheck& c) { return c.passed; });
}

// ---------------------------------------------------------------- emission

std::string emit_metadata(const RunConfig& cfg, const std::string& path, const std::string& extra_json) {
    ordered_json meta;
    meta["version"] = kVersion;
    meta["seed"] = cfg.seed;
    meta["config_hash"] = hex64(config_hash(cfg));
    meta["config"] = serialize_keys(cfg, true);
    meta["conventions"] = {
        {"path_energy", "E(gamma) = 1/4 * integral of |gamma'|^2"},
        {"velocity_law", "per slice, each velocity component ~ N(0, 2/dtau)"},
        {"operator_sign", "L = -(sum of second derivatives) + V; semigroup exp(-tL)"},
        {"sample_weight", "inverse B-path-ordered exponential applied to u(gamma(t))"},
        {"seed_derivation", "Philox4x32-10, key = seed, stream = sample index; per (N, point) seed via splitmix64"},
    };
    if (!extra_json.empty()) meta["run"] = ordered_json::parse(extra_json);
    std::ofstream out = open_for_write(path);
    out << meta.dump(2) << "\n";
    finish(out, path);
    return path;
}

std::vector<std::string> emit_report(const ConvergenceReport& report, const std::string& dir, OutputFormat format) {
    const std::filesystem::path base(dir);
    const int k = report.coordinates;
    std::vector<std::string> files;

    const std::string main_path =
        (base / (format == OutputFormat::csv ? "convergence.csv" : "convergence.jsonl")).string();
    {
        std::ofstream out = open_for_write(main_path);
        if (format == OutputFormat::csv)
            out << "N,mesh," << coordinate_header("x", k) << ",component,estimate,stderr,oracle,abs_error,rejected\n";
        for (const ReportRow& row : report.rows) {
            const auto ps = parts(row.estimate, row.stderr_re, row.stderr_im, report.has_oracle ? &row.oracle : nullptr,
                                  report.complex_valued);
            for (const Part& part : ps) {
                const double err = report.has_oracle ? std::fabs(part.estimate - part.oracle)
                                                     : std::numeric_limits<double>::quiet_NaN();
                if (format == OutputFormat::csv) {
                    out << row.N << ',' << format_double(row.mesh) << ',' << coordinates_csv(row.x, k) << ','
                        << part.label << ',' << format_double(part.estimate) << ',' << format_double(part.stderr)
                        << ',' << csv_number(part.oracle) << ',' << csv_number(err) << ',' << row.rejected << '\n';
                } else {
                    ordered_json j;
                    j["N"] = row.N;
                    j["mesh"] = row.mesh;
                    j["x"] = coordinates_json(row.x, k);
                    j["component"] = part.label;
                    j["estimate"] = part.estimate;
                    j["stderr"] = part.stderr;
                    j["oracle"] = report.has_oracle ? ordered_json(part.oracle) : ordered_json(nullptr);
                    j["abs_error"] = report.has_oracle ? ordered_json(err) : ordered_json(nullptr);
                    j["rejected"] = row.rejected;
                    out << j.dump() << '\n';
                }
            }
        }
        finish(out, main_path);
        files.push_back(main_path);
    }

    const std::string plot_path = (base / "convergence_plot.csv").string();
    {
        std::ofstream out = open_for_write(plot_path);
        out << "N,mesh,log10_mesh,sup_error,log10_sup_error,l2_error,log10_l2_error,max_stderr,rejected\n";
        auto lg = [](double v) { return (v > 0.0) ? format_double(std::log10(v)) : std::string(); };
        for (const LevelSummary& l : report.levels)
            out << l.N << ',' << format_double(l.mesh) << ',' << lg(l.mesh) << ',' << csv_number(l.sup_error) << ','
                << lg(l.sup_error) << ',' << csv_number(l.l2_error) << ',' << lg(l.l2_error) << ','
                << format_double(l.max_stderr) << ',' << l.rejected << '\n';
        finish(out, plot_path);
        files.push_back(plot_path);
    }

    ordered_json run;
    run["kind"] = "convergence";
    run["oracle"] = report.oracle_name;
    run["oracle_self_consistency"] = report.oracle_self_consistency;
    run["descriptive"] = !report.has_oracle;
    ordered_json levels = ordered_json::array();
    for (const LevelSummary& l : report.levels) {
        ordered_json j;
        j["N"] = l.N;
        j["mesh"] = l.mesh;
        j["sup_error"] = report.has_oracle ? ordered_json(l.sup_error) : ordered_json(nullptr);
        j["l2_error"] = report.has_oracle ? ordered_json(l.l2_error) : ordered_json(nullptr);
        j["max_stderr"] = l.max_stderr;
        j["samples"] = l.samples;
        j["rejected"] = l.rejected;
        j["rejection_warning"] = l.rejection_warning;
        levels.push_back(j);
    }
    run["levels"] = levels;
    files.push_back(emit_metadata(report.config, (base / "convergence.meta.json").string(), run.dump()));
    return files;
}

std::string emit_estimates(const std::vector<EstimateRow>& rows, int coordinates, bool complex_valued,
                           const std::string& path, OutputFormat format) {
    std::ofstream out = open_for_write(path);
    if (format == OutputFormat::csv)
        out << coordinate_header("x", coordinates) << ",component,estimate,stderr,samples,rejected\n";
    for (const EstimateRow& row : rows) {
        for (const Part& part : parts(row.value, row.stderr_re, row.stderr_im, nullptr, complex_valued)) {
            if (format == OutputFormat::csv) {
                out << coordinates_csv(row.x, coordinates) << ',' << part.label << ',' << format_double(part.estimate)
                    << ',' << format_double(part.stderr) << ',' << row.samples << ',' << row.rejected << '\n';
            } else {
                ordered_json j;
                j["x"] = coordinates_json(row.x, coordinates);
                j["component"] = part.label;
                j["estimate"] = part.estimate;
                j["stderr"] = part.stderr;
                j["samples"] = row.samples;
                j["rejected"] = row.rejected;
                out << j.dump() << '\n';
            }
        }
    }
    finish(out, path);
    return path;
}

std::string emit_trace(const TraceResult& trace, const std::string& path) {
    std::ofstream out = open_for_write(path);
    out << "s," << coordinate_header("x", trace.coordinates) << ',' << coordinate_header("v", trace.coordinates)
        << ",event_flag\n";
    for (const TraceRow& r : trace.rows)
        out << format_double(r.s) << ',' << coordinates_csv(r.x, trace.coordinates) << ','
            << coordinates_csv(r.v, trace.coordinates) << ',' << (r.event ? 1 : 0) << '\n';
    finish(out, path);
    return path;
}

std::string emit_properties(const PropertyReport& report, const std::string& path, OutputFormat format) {
    std::ofstream out = open_for_write(path);
    if (format == OutputFormat::csv) out << "property,passed,measured,threshold,margin,note\n";
    for (const PropertyCheck& c : report.checks) {
        if (format == OutputFormat::csv) {
            std::string note = c.note;
            std::replace(note.begin(), note.end(), ',', ';');
            out << c.name << ',' << (c.passed ? "true" : "false") << ',' << format_double(c.measured) << ','
                << format_double(c.threshold) << ',' << format_double(c.margin) << ',' << note << '\n';
        } else {
            ordered_json j;
            j["property"] = c.name;
            j["passed"] = c.passed;
            j["measured"] = c.measured;
            j["threshold"] = c.threshold;
            j["margin"] = c.margin;
            j["note"] = c.note;
            out << j.dump() << '\n';
        }
    }
    finish(out, path);
    return path;
}

}  // namespace heatpath
