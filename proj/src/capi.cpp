#include "priorgan/priorgan.h"

#include <cstring>
#include <iostream>
#include <new>
#include <string>

#include "priorgan/commands.hpp"
#include "priorgan/io.hpp"

struct pg_prior {
    priorgan::PriorModel model;
};

struct pg_config {
    priorgan::RunConfig cfg;
};

namespace {

thread_local std::string g_last_error;

pg_status set_error(pg_status status, const std::string& message) {
    g_last_error = message;
    return status;
}

// Runs `fn` and converts every escaping exception to a status code.
template <typename F>
pg_status guarded(F&& fn) noexcept {
    try {
        g_last_error.clear();
        fn();
        return PG_OK;
    } catch (const priorgan::Error& e) {
        return set_error(static_cast<pg_status>(static_cast<int>(e.code())), e.what());
    } catch (const std::bad_alloc&) {
        return set_error(PG_INTERNAL_ERROR, "out of memory");
    } catch (const std::exception& e) {
        return set_error(PG_INTERNAL_ERROR, e.what());
    } catch (...) {
        return set_error(PG_INTERNAL_ERROR, "unknown error");
    }
}

void need(const void* p, const char* name) {
    if (!p) priorgan::fail(priorgan::ErrorCode::InvalidArgument, std::string(name) + " is NULL");
}

std::optional<std::string> opt_path(const char* p) {
    if (!p || !*p) return std::nullopt;
    return std::string(p);
}

void check_point(const pg_prior* prior, const double* x, size_t dim) {
    need(prior, "prior");
    need(x, "x");
    priorgan::require(dim == prior->model.feature_map.input_dim(), priorgan::ErrorCode::DimensionMismatch,
                      "point has " + std::to_string(dim) + " coordinates, the prior expects " +
                          std::to_string(prior->model.feature_map.input_dim()));
}

}  // namespace

extern "C" {

const char* pg_version(void) { return "1.0.0"; }

const char* pg_rng_version(void) { return priorgan::Rng::kVersion; }

const char* pg_last_error(void) { return g_last_error.c_str(); }

const char* pg_status_name(pg_status status) {
    if (status == PG_INTERNAL_ERROR) return "InternalError";
    if (status < PG_OK || status > PG_VERSION_MISMATCH) return "Unknown";
    return priorgan::error_code_name(static_cast<priorgan::ErrorCode>(static_cast<int>(status)));
}

int pg_exit_code(pg_status status) {
    if (status == PG_INTERNAL_ERROR) return 1;
    if (status < PG_OK || status > PG_VERSION_MISMATCH) return 1;
    return priorgan::exit_code_for(static_cast<priorgan::ErrorCode>(static_cast<int>(status)));
}

pg_status pg_config_load(const char* path, pg_config** out) {
    return guarded([&] {
        need(path, "path");
        need(out, "out");
        *out = nullptr;
        *out = new pg_config{priorgan::load_run_config(path)};
    });
}

pg_status pg_config_resolved_json(const pg_config* cfg, char* buf, size_t cap, size_t* needed) {
    return guarded([&] {
        need(cfg, "config");
        const std::string text = priorgan::resolved_config_json(cfg->cfg);
        if (needed) *needed = text.size() + 1;
        if (!buf) return;
        priorgan::require(cap > text.size(), priorgan::ErrorCode::InvalidArgument, "buffer too small");
        std::memcpy(buf, text.c_str(), text.size() + 1);
    });
}

void pg_config_free(pg_config* cfg) { delete cfg; }

pg_status pg_prior_fit(const pg_config* cfg, pg_prior** out) {
    return guarded([&] {
        need(cfg, "config");
        need(out, "out");
        *out = nullptr;
        *out = new pg_prior{priorgan::fit_prior_from_config(cfg->cfg).model};
    });
}

pg_status pg_prior_load(const char* path, pg_prior** out) {
    return guarded([&] {
        need(path, "path");
        need(out, "out");
        *out = nullptr;
        *out = new pg_prior{priorgan::load_prior_model(path)};
    });
}

pg_status pg_prior_save(const pg_prior* prior, const char* path) {
    return guarded([&] {
        need(prior, "prior");
        need(path, "path");
        priorgan::save_prior_model(prior->model, path);
    });
}

void pg_prior_free(pg_prior* prior) { delete prior; }

pg_status pg_prior_dims(const pg_prior* prior, size_t* input_dim, size_t* feature_dim, size_t* components) {
    return guarded([&] {
        need(prior, "prior");
        if (input_dim) *input_dim = prior->model.feature_map.input_dim();
        if (feature_dim) *feature_dim = prior->model.feature_map.output_dim();
        if (components) *components = prior->model.gmm.components();
    });
}

pg_status pg_prior_log_density(const pg_prior* prior, const double* x, size_t dim, double* out) {
    return guarded([&] {
        check_point(prior, x, dim);
        need(out, "out");
        *out = prior->model.gmm.log_density(prior->model.features(std::span(x, dim)));
    });
}

pg_status pg_prior_quality_loss(const pg_prior* prior, const double* x, size_t dim, double* out) {
    return guarded([&] {
        check_point(prior, x, dim);
        need(out, "out");
        *out = priorgan::quality_loss(prior->model.gmm, prior->model.quality_config(1.0),
                                      prior->model.features(std::span(x, dim)));
    });
}

pg_status pg_prior_assign(const pg_prior* prior, const double* x, size_t dim, size_t* component) {
    return guarded([&] {
        check_point(prior, x, dim);
        need(component, "component");
        *component = prior->model.gmm.assign_component(prior->model.features(std::span(x, dim)));
    });
}

pg_status pg_prior_quality_score(const pg_prior* prior, const double* xs, size_t n, size_t dim, double* out) {
    return guarded([&] {
        check_point(prior, xs, dim);
        need(out, "out");
        priorgan::require(n > 0, priorgan::ErrorCode::EmptySet, "no points");
        std::vector<priorgan::Vec> pts(n);
        for (size_t i = 0; i < n; ++i) pts[i].assign(xs + i * dim, xs + (i + 1) * dim);
        *out = priorgan::quality_score(prior->model.gmm, prior->model.qs, prior->model.features(pts));
    });
}

pg_status pg_diversity_distance(const double* f_real, const double* f_gen, size_t m, double* d_out,
                                double* dds_out) {
    return guarded([&] {
        need(f_real, "f_real");
        need(f_gen, "f_gen");
        const auto r = priorgan::diversity_distance(std::span(f_real, m), std::span(f_gen, m));
        if (d_out) std::copy(r.d.begin(), r.d.end(), d_out);
        if (dds_out) *dds_out = r.dds;
    });
}

pg_status pg_resample_update(const double* f_real, const double* f_gen, size_t m, double alpha, double* f_new_out) {
    return guarded([&] {
        need(f_real, "f_real");
        need(f_gen, "f_gen");
        need(f_new_out, "f_new_out");
        const auto f = priorgan::resample_update(std::span(f_real, m), std::span(f_gen, m), alpha);
        std::copy(f.begin(), f.end(), f_new_out);
    });
}

pg_status pg_cmd_fit_prior(const char* config_path) {
    return guarded([&] {
        need(config_path, "config_path");
        priorgan::cmd_fit_prior(config_path, std::cout);
    });
}

pg_status pg_cmd_train(const char* config_path, const char* prior_path) {
    return guarded([&] {
        need(config_path, "config_path");
        priorgan::cmd_train({config_path, opt_path(prior_path)}, std::cout);
    });
}

pg_status pg_cmd_eval(const char* prior_path, const char* samples_path, const char* checkpoint_path, size_t samples,
                      uint64_t seed, const char* report_path) {
    return guarded([&] {
        need(prior_path, "prior_path");
        priorgan::EvalCommand cmd;
        cmd.prior_path = prior_path;
        cmd.samples_path = opt_path(samples_path);
        cmd.checkpoint_path = opt_path(checkpoint_path);
        if (samples) cmd.samples = samples;
        cmd.seed = seed;
        cmd.output_path = opt_path(report_path);
        priorgan::cmd_eval(cmd, std::cout);
    });
}

pg_status pg_cmd_gradfield(const char* checkpoint_path, const char* prior_path, const char* source, size_t grid,
                           double theta_percentile, uint64_t seed, const char* output_dir) {
    return guarded([&] {
        need(source, "source");
        need(output_dir, "output_dir");
        priorgan::GradfieldCommand cmd;
        cmd.checkpoint_path = checkpoint_path ? checkpoint_path : "";
        cmd.prior_path = prior_path ? prior_path : "";
        cmd.source = priorgan::field_source_from_string(source);
        cmd.grid = grid;
        if (theta_percentile >= 0.0) cmd.theta_percentile = theta_percentile;
        cmd.seed = seed;
        cmd.output_dir = output_dir;
        priorgan::cmd_gradfield(cmd, std::cout);
    });
}

pg_status pg_cmd_gradfield_replay(const char* resolved_path) {
    return guarded([&] {
        need(resolved_path, "resolved_path");
        std::string text;
        try {
            text = priorgan::read_text_file(resolved_path);
        } catch (const priorgan::Error& e) {
            throw priorgan::Error(priorgan::ErrorCode::InvalidArgument, e.what());
        }
        priorgan::cmd_gradfield(priorgan::gradfield_command_from_json(text), std::cout);
    });
}

pg_status pg_cmd_sweep(const char* config_path, const char* param, const double* values, size_t count) {
    return guarded([&] {
        need(config_path, "config_path");
        need(param, "param");
        if (count) need(values, "values");
        priorgan::SweepCommand cmd;
        cmd.config_path = config_path;
        cmd.param = priorgan::sweep_param_from_string(param);
        cmd.values.assign(values, values + count);
        priorgan::cmd_sweep(cmd, std::cout);
    });
}

}  // extern "C"
