#include "heatpath/heatpath.h"

#include "heatpath/error.hpp"
#include "heatpath/harness.hpp"

#include <cstring>
#include <filesystem>
#include <string>

struct hp_config {
    heatpath::RunConfig cfg;
};

struct hp_geometry {
    heatpath::GeometryModel g;
};

namespace {

thread_local std::string last_error;

hp_status to_status(heatpath::ErrorCode code) {
    using heatpath::ErrorCode;
    switch (code) {
        case ErrorCode::invalid_input: return HP_ERR_INVALID_INPUT;
        case ErrorCode::domain: return HP_ERR_DOMAIN;
        case ErrorCode::unsupported: return HP_ERR_UNSUPPORTED;
        case ErrorCode::undefined: return HP_ERR_UNDEFINED;
        case ErrorCode::validation: return HP_ERR_VALIDATION;
        case ErrorCode::io: return HP_ERR_IO;
    }
    return HP_ERR_INTERNAL;
}

template <class F>
hp_status guarded(F&& f) {
    try {
        last_error.clear();
        return f();
    } catch (const heatpath::Error& e) {
        last_error = e.what();
        return to_status(e.code());
    } catch (const std::exception& e) {
        last_error = e.what();
        return HP_ERR_INTERNAL;
    } catch (...) {
        last_error = "unknown error";
        return HP_ERR_INTERNAL;
    }
}

hp_status copy_out(const std::string& s, char* buf, size_t len, size_t* needed) {
    if (needed) *needed = s.size() + 1;
    if (buf && len > 0) {
        const size_t n = std::min(len - 1, s.size());
        std::memcpy(buf, s.data(), n);
        buf[n] = '\0';
    }
    if (buf && len < s.size() + 1) {
        last_error = "buffer too small";
        return HP_ERR_INVALID_INPUT;
    }
    return HP_OK;
}

hp_status null_arg(const char* what) {
    last_error = std::string(what) + " must not be null";
    return HP_ERR_INVALID_INPUT;
}

std::string out_path(const heatpath::RunConfig& cfg, const std::string& name) {
    return (std::filesystem::path(cfg.out) / name).string();
}

std::string extension(const heatpath::RunConfig& cfg) {
    return heatpath::output_format(cfg) == heatpath::OutputFormat::csv ? ".csv" : ".jsonl";
}

void write_estimates(const heatpath::RunConfig& cfg, const heatpath::Problem& p,
                     const std::vector<heatpath::EstimateRow>& rows, const std::string& stem, const char* kind,
                     int N) {
    heatpath::emit_estimates(rows, p.coordinates(), cfg.complex_field, out_path(cfg, stem + extension(cfg)),
                             heatpath::output_format(cfg));
    std::string extra = std::string("{\"kind\":\"") + kind + "\"";
    if (N > 0) extra += ",\"N\":" + std::to_string(N);
    extra += "}";
    heatpath::emit_metadata(cfg, out_path(cfg, stem + ".meta.json"), extra);
}

}  // namespace

extern "C" {

const char* hp_version(void) { return heatpath::kVersion; }

const char* hp_last_error(void) { return last_error.c_str(); }

const char* hp_status_name(hp_status status) {
    switch (status) {
        case HP_OK: return "ok";
        case HP_ERR_INVALID_INPUT: return "invalid-input";
        case HP_ERR_DOMAIN: return "domain";
        case HP_ERR_UNSUPPORTED: return "unsupported";
        case HP_ERR_UNDEFINED: return "undefined";
        case HP_ERR_VALIDATION: return "validation";
        case HP_ERR_IO: return "io";
        case HP_ERR_PROPERTY_FAILED: return "property-failed";
        case HP_ERR_INTERNAL: return "internal";
    }
    return "unknown";
}

hp_status hp_config_create(hp_config** out) {
    if (!out) return null_arg("out");
    return guarded([&] {
        *out = new hp_config{heatpath::default_config()};
        return HP_OK;
    });
}

hp_status hp_config_parse(const char* text, hp_config** out) {
    if (!text) return null_arg("text");
    if (!out) return null_arg("out");
    return guarded([&] {
        *out = new hp_config{heatpath::parse_config(text)};
        return HP_OK;
    });
}

hp_status hp_config_load(const char* path, hp_config** out) {
    if (!path) return null_arg("path");
    if (!out) return null_arg("out");
    return guarded([&] {
        *out = new hp_config{heatpath::load_config(path)};
        return HP_OK;
    });
}

void hp_config_destroy(hp_config* cfg) { delete cfg; }

hp_status hp_config_set(hp_config* cfg, const char* key, const char* value) {
    if (!cfg) return null_arg("cfg");
    if (!key || !value) return null_arg("key/value");
    return guarded([&] {
        heatpath::RunConfig next = cfg->cfg;
        heatpath::set_config_value(next, key, value);
        cfg->cfg = std::move(next);
        return HP_OK;
    });
}

hp_status hp_config_get(const hp_config* cfg, const char* key, char* buf, size_t len, size_t* needed) {
    if (!cfg) return null_arg("cfg");
    if (!key) return null_arg("key");
    return guarded([&] { return copy_out(heatpath::get_config_value(cfg->cfg, key), buf, len, needed); });
}

hp_status hp_config_serialize(const hp_config* cfg, char* buf, size_t len, size_t* needed) {
    if (!cfg) return null_arg("cfg");
    return guarded([&] { return copy_out(heatpath::serialize_config(cfg->cfg), buf, len, needed); });
}

hp_status hp_config_hash(const hp_config* cfg, uint64_t* out) {
    if (!cfg) return null_arg("cfg");
    if (!out) return null_arg("out");
    return guarded([&] {
        *out = heatpath::config_hash(cfg->cfg);
        return HP_OK;
    });
}

hp_status hp_run_trace(const hp_config* cfg) {
    if (!cfg) return null_arg("cfg");
    return guarded([&] {
        const heatpath::TraceResult trace = heatpath::run_trace(cfg->cfg);
        heatpath::emit_trace(trace, out_path(cfg->cfg, "trace.csv"));
        heatpath::emit_metadata(cfg->cfg, out_path(cfg->cfg, "trace.meta.json"),
                                "{\"kind\":\"trace\",\"reflections\":" + std::to_string(trace.reflections) + "}");
        return HP_OK;
    });
}

hp_status hp_run_step(const hp_config* cfg) {
    if (!cfg) return null_arg("cfg");
    return guarded([&] {
        const auto p = heatpath::build_problem(cfg->cfg);
        write_estimates(cfg->cfg, *p, heatpath::run_slices(cfg->cfg, *p, 1), "step", "step", 1);
        return HP_OK;
    });
}

hp_status hp_run_slices(const hp_config* cfg) {
    if (!cfg) return null_arg("cfg");
    return guarded([&] {
        const auto p = heatpath::build_problem(cfg->cfg);
        for (int N : cfg->cfg.partitions)
            write_estimates(cfg->cfg, *p, heatpath::run_slices(cfg->cfg, *p, N), "slices_N" + std::to_string(N),
                            "slices", N);
        return HP_OK;
    });
}

hp_status hp_run_converge(const hp_config* cfg) {
    if (!cfg) return null_arg("cfg");
    return guarded([&] {
        heatpath::emit_report(heatpath::run_convergence(cfg->cfg), cfg->cfg.out, heatpath::output_format(cfg->cfg));
        return HP_OK;
    });
}

hp_status hp_run_oracle(const hp_config* cfg) {
    if (!cfg) return null_arg("cfg");
    return guarded([&] {
        const auto p = heatpath::build_problem(cfg->cfg);
        write_estimates(cfg->cfg, *p, heatpath::run_oracle_eval(cfg->cfg), "oracle", "oracle", 0);
        return HP_OK;
    });
}

hp_status hp_run_props(const hp_config* cfg) {
    if (!cfg) return null_arg("cfg");
    return guarded([&] {
        heatpath::validate_config(cfg->cfg);
        const heatpath::PropertyReport report = heatpath::run_property_suite(cfg->cfg);
        heatpath::emit_properties(report, out_path(cfg->cfg, "properties" + extension(cfg->cfg)),
                                  heatpath::output_format(cfg->cfg));
        if (report.all_passed()) return HP_OK;
        std::string names;
        for (const auto& c : report.checks)
            if (!c.passed) names += (names.empty() ? "" : ", ") + c.name;
        last_error = "failed properties: " + names;
        return HP_ERR_PROPERTY_FAILED;
    });
}

hp_status hp_geometry_create(const char* descriptor, hp_geometry** out) {
    if (!descriptor) return null_arg("descriptor");
    if (!out) return null_arg("out");
    return guarded([&] {
        *out = new hp_geometry{heatpath::make_geometry(heatpath::parse_descriptor(descriptor))};
        return HP_OK;
    });
}

void hp_geometry_destroy(hp_geometry* g) { delete g; }

int hp_geometry_coordinates(const hp_geometry* g) { return g ? g->g.ambient_dim() : 0; }

hp_status hp_billiard_flow(const hp_geometry* g, const double* x, const double* v, double t, double* x_out,
                           double* v_out, int* reflections) {
    if (!g) return null_arg("g");
    if (!x || !v || !x_out || !v_out) return null_arg("x/v");
    return guarded([&] {
        const int k = g->g.ambient_dim();
        heatpath::PhasePoint p;
        for (int i = 0; i < k; ++i) {
            p.position[i] = x[i];
            p.velocity[i] = v[i];
        }
        const heatpath::FlowResult r = heatpath::billiard_flow(g->g, p, t);
        for (int i = 0; i < k; ++i) {
            x_out[i] = r.final_point.position[i];
            v_out[i] = r.final_point.velocity[i];
        }
        if (reflections) *reflections = r.reflections;
        if (!r.in_domain) {
            last_error = std::string("trajectory rejected: ") + heatpath::to_string(r.path.status);
            return HP_ERR_DOMAIN;
        }
        return HP_OK;
    });
}

hp_status hp_estimate_point(const hp_config* cfg, const double* x, int n, double* re, double* im, double* stderr_re,
                            double* stderr_im, long* rejected) {
    if (!cfg) return null_arg("cfg");
    if (!x || !re || !im || !stderr_re || !stderr_im) return null_arg("x/outputs");
    return guarded([&] {
        heatpath::RunConfig c = cfg->cfg;
        c.grid.assign(1, {});
        const heatpath::GeometryModel g = heatpath::make_geometry(c.geometry);
        for (int i = 0; i < g.ambient_dim(); ++i) c.grid[0].push_back(x[i]);
        const auto p = heatpath::build_problem(c);
        const auto rows = heatpath::run_slices(c, *p, n);
        for (Eigen::Index i = 0; i < rows[0].value.size(); ++i) {
            re[i] = rows[0].value(i).real();
            im[i] = rows[0].value(i).imag();
            stderr_re[i] = rows[0].stderr_re(i);
            stderr_im[i] = rows[0].stderr_im(i);
        }
        if (rejected) *rejected = rows[0].rejected;
        return HP_OK;
    });
}

}  // extern "C"
