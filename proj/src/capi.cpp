#include "fairaudit.h"

#include <cstring>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "fairaudit/context.hpp"
#include "fairaudit/correction.hpp"
#include "fairaudit/divergence.hpp"
#include "fairaudit/path.hpp"
#include "fairaudit/perturbation.hpp"
#include "fairaudit/report.hpp"

using namespace fairaudit;

namespace {

thread_local std::string g_last_error;

template <typename Fn>
int wrap(Fn&& fn) {
    try {
        fn();
        g_last_error.clear();
        return FA_OK;
    } catch (const Error& e) {
        g_last_error = e.what();
        return static_cast<int>(e.code());
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return FA_INTERNAL;
    }
}

void require(bool ok, const char* what) {
    if (!ok) fail(ErrorCode::InvalidArgument, what);
}

std::vector<std::string> label_vector(size_t n, const char* const* labels,
                                      const char* prefix) {
    std::vector<std::string> out(n);
    for (size_t i = 0; i < n; ++i)
        out[i] = labels != nullptr && labels[i] != nullptr
                     ? std::string(labels[i])
                     : std::string(prefix) + std::to_string(i);
    return out;
}

DiscreteDistribution array_distribution(const double* w, size_t n, const char* prefix) {
    require(w != nullptr && n > 0, "null or empty weight vector");
    return make_distribution(label_vector(n, nullptr, prefix),
                             std::vector<double>(w, w + n));
}

LambdaWeights lambda_from(const double* lambda) {
    require(lambda != nullptr, "null lambda vector");
    return LambdaWeights(lambda[0], lambda[1], lambda[2], lambda[3]);
}

ChannelSource source_from(const char* name) {
    if (name == nullptr || std::strcmp(name, "model") == 0) return ChannelSource::Model;
    if (std::strcmp(name, "empirical") == 0) return ChannelSource::Empirical;
    fail(ErrorCode::InvalidArgument,
         std::string("unknown channel source '") + name + "' (want model|empirical)");
}

std::string string_or_empty(const char* s) { return s != nullptr ? std::string(s) : std::string(); }

}  // namespace

struct fa_context {
    AuditContext ctx;
};

struct fa_correction {
    CorrectionResult result;
};

extern "C" {

const char* fa_version(void) { return "1.0.0"; }

const char* fa_error_name(int code) {
    if (code < 0 || code > FA_INTERNAL) return "unknown";
    return error_code_name(static_cast<ErrorCode>(code));
}

int fa_error_is_usage(int code) {
    if (code < 0 || code > FA_INTERNAL) return 0;
    return is_usage_error(static_cast<ErrorCode>(code)) ? 1 : 0;
}

const char* fa_last_error(void) { return g_last_error.c_str(); }

fa_context* fa_context_create(size_t n_inputs, const char* const* input_labels,
                              const double* p0_weights, const double* p1_weights,
                              size_t n_outputs, const char* const* output_labels,
                              const double* channel_row_major, int* err) {
    fa_context* handle = nullptr;
    const int code = wrap([&] {
        require(p0_weights != nullptr && p1_weights != nullptr, "null weight vector");
        require(channel_row_major != nullptr, "null channel matrix");
        require(n_inputs > 0 && n_outputs > 0, "empty alphabet");
        SupportPtr in = make_support(label_vector(n_inputs, input_labels, "x"));
        SupportPtr out = make_support(label_vector(n_outputs, output_labels, "y"));
        std::vector<std::vector<double>> rows(n_inputs);
        for (size_t x = 0; x < n_inputs; ++x)
            rows[x].assign(channel_row_major + x * n_outputs,
                           channel_row_major + (x + 1) * n_outputs);
        AuditContext ctx(
            make_distribution(in, std::vector<double>(p0_weights, p0_weights + n_inputs)),
            make_distribution(in, std::vector<double>(p1_weights, p1_weights + n_inputs)),
            Channel(in, out, std::move(rows)));
        handle = new fa_context{std::move(ctx)};
    });
    if (err != nullptr) *err = code;
    return handle;
}

void fa_context_free(fa_context* ctx) { delete ctx; }

size_t fa_context_input_size(const fa_context* ctx) {
    return ctx != nullptr ? ctx->ctx.input_size() : 0;
}

size_t fa_context_output_size(const fa_context* ctx) {
    return ctx != nullptr ? ctx->ctx.output_size() : 0;
}

int fa_kl_divergence(const double* p, const double* q, size_t n, double* out) {
    return wrap([&] {
        require(out != nullptr, "null output pointer");
        *out = kl_divergence(array_distribution(p, n, "x"), array_distribution(q, n, "x"));
    });
}

int fa_renyi_divergence(double alpha, const double* p, const double* q, size_t n,
                        double* out) {
    return wrap([&] {
        require(out != nullptr, "null output pointer");
        *out = renyi_divergence(array_distribution(p, n, "x"),
                                array_distribution(q, n, "x"), alpha);
    });
}

int fa_total_variation(const double* p, const double* q, size_t n, double* out) {
    return wrap([&] {
        require(out != nullptr, "null output pointer");
        *out = total_variation(array_distribution(p, n, "x"), array_distribution(q, n, "x"));
    });
}

int fa_delta_lambda(const fa_context* ctx, const double* lambda, const double* f,
                    double* out) {
    return wrap([&] {
        require(ctx != nullptr && f != nullptr && out != nullptr, "null argument");
        ScoreFunction score(ctx->ctx.input_support(),
                            std::vector<double>(f, f + ctx->ctx.input_size()));
        *out = delta_lambda(lambda_from(lambda), ctx->ctx, score);
    });
}

fa_correction* fa_correction_solve(const fa_context* ctx, const double* lambda, int* err) {
    fa_correction* handle = nullptr;
    const int code = wrap([&] {
        require(ctx != nullptr, "null context");
        handle = new fa_correction{correction_function(lambda_from(lambda), ctx->ctx)};
    });
    if (err != nullptr) *err = code;
    return handle;
}

void fa_correction_free(fa_correction* corr) { delete corr; }

double fa_correction_delta(const fa_correction* corr) {
    return corr != nullptr ? corr->result.delta_opt : 0.0;
}

int fa_correction_f_star(const fa_correction* corr, double* buf) {
    return wrap([&] {
        require(corr != nullptr && buf != nullptr, "null argument");
        const std::vector<double>& v = corr->result.f_star.values();
        std::copy(v.begin(), v.end(), buf);
    });
}

int fa_correction_f_l(const fa_correction* corr, double* buf) {
    return wrap([&] {
        require(corr != nullptr && buf != nullptr, "null argument");
        const std::vector<double>& v = corr->result.f_l.values();
        std::copy(v.begin(), v.end(), buf);
    });
}

int fa_correction_coefficients(const fa_correction* corr, double* a1, double* a2,
                               double* b1, double* rho_m, double* n_l, double* n_m,
                               int* independent) {
    return wrap([&] {
        require(corr != nullptr, "null correction");
        const CorrectionCoefficients& c = corr->result.coef;
        if (a1 != nullptr) *a1 = c.a1;
        if (a2 != nullptr) *a2 = c.a2;
        if (b1 != nullptr) *b1 = c.b1;
        if (rho_m != nullptr) *rho_m = c.rho_m;
        if (n_l != nullptr) *n_l = c.n_l;
        if (n_m != nullptr) *n_m = c.n_m;
        if (independent != nullptr)
            *independent = corr->result.principal.has_value() ? 0 : 1;
    });
}

int fa_solve_path_point(const fa_context* ctx, const double* lambda, double* qx_buf,
                        double* objective, long* iterations, int* converged,
                        int* non_unique) {
    return wrap([&] {
        require(ctx != nullptr, "null context");
        const PathPoint pt = solve_correction_path(lambda_from(lambda), ctx->ctx);
        if (qx_buf != nullptr) {
            const std::vector<double>& m = pt.qx.masses();
            std::copy(m.begin(), m.end(), qx_buf);
        }
        if (objective != nullptr) *objective = pt.objective;
        if (iterations != nullptr) *iterations = static_cast<long>(pt.iterations);
        if (converged != nullptr) *converged = pt.converged ? 1 : 0;
        if (non_unique != nullptr) *non_unique = pt.non_unique ? 1 : 0;
    });
}

int fa_run_audit(const char* data_csv, const char* schema_json, const double* lambda,
                 double smooth, const char* channel_source, const char* cells_override,
                 const char* out_dir) {
    return wrap([&] {
        require(data_csv != nullptr && schema_json != nullptr && out_dir != nullptr,
                "audit requires data, schema, and output paths");
        AuditOptions opt;
        opt.data_path = data_csv;
        opt.schema_path = schema_json;
        opt.out_dir = out_dir;
        opt.lam = lambda_from(lambda);
        opt.smooth = smooth;
        opt.channel_source = source_from(channel_source);
        opt.cells_override = string_or_empty(cells_override);
        run_audit(opt);
    });
}

int fa_run_path(const char* data_csv, const char* schema_json, const char* context_json,
                const char* schedule_file, double smooth, const char* channel_source,
                const char* cells_override, const char* out_dir) {
    return wrap([&] {
        require(schedule_file != nullptr && out_dir != nullptr,
                "path requires schedule and output paths");
        PathOptions opt;
        opt.data_path = string_or_empty(data_csv);
        opt.schema_path = string_or_empty(schema_json);
        opt.context_path = string_or_empty(context_json);
        opt.schedule_path = schedule_file;
        opt.out_dir = out_dir;
        opt.smooth = smooth;
        opt.channel_source = source_from(channel_source);
        opt.cells_override = string_or_empty(cells_override);
        run_path(opt);
    });
}

int fa_run_selftest(const char* out_path, int* failures) {
    return wrap([&] {
        int failed = 0;
        if (out_path == nullptr) {
            failed = run_selftest(std::cout);
        } else {
            std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
            if (!out)
                fail(ErrorCode::IoError,
                     std::string("cannot write '") + out_path + "'");
            failed = run_selftest(out);
        }
        if (failures != nullptr) *failures = failed;
    });
}

}  // extern "C"
