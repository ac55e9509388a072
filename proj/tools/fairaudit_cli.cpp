// Command-line front end; talks to the core exclusively through the C API.
#include <cstdio>
#include <cstdlib>
#include <string>

#include <CLI11.hpp>

#include "fairaudit.h"

namespace {

std::string json_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", c);
                    out += buf;
                } else {
                    out.push_back(c);
                }
        }
    }
    return out;
}

int emit_error(int code, const std::string& message) {
    std::fprintf(stderr, "{\"error\":{\"code\":%d,\"name\":\"%s\",\"message\":\"%s\"}}\n",
                 code, fa_error_name(code), json_escape(message).c_str());
    return fa_error_is_usage(code) != 0 ? 2 : 1;
}

bool parse_lambda(const std::string& spec, double out[4], std::string& err) {
    std::size_t pos = 0;
    for (int i = 0; i < 4; ++i) {
        const std::size_t next = spec.find(',', pos);
        const bool last = i == 3;
        if (last != (next == std::string::npos)) {
            err = "--lambda wants exactly 4 comma-separated values, got '" + spec + "'";
            return false;
        }
        const std::string part = spec.substr(pos, last ? std::string::npos : next - pos);
        char* end = nullptr;
        out[i] = std::strtod(part.c_str(), &end);
        if (end == part.c_str() || *end != '\0' || out[i] < 0.0 || out[i] != out[i]) {
            err = "--lambda component '" + part + "' is not a nonnegative number";
            return false;
        }
        pos = next + 1;
    }
    return true;
}

const char* opt_cstr(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Audits group disparity in a discrete classification context: finds the "
                 "steepest-descent correction direction, traces objective paths, and "
                 "cross-checks its own numerics."};
    app.require_subcommand(1);

    std::string data, schema, out_dir, cells, lambda_spec = "0,1,0,1";
    std::string channel = "model";
    double smooth = 0.0;

    CLI::App* audit = app.add_subcommand("audit", "Run a dataset audit and emit reports");
    audit->add_option("--data", data, "input CSV file")->required();
    audit->add_option("--schema", schema, "dataset schema JSON")->required();
    audit->add_option("--lambda", lambda_spec, "objective weights l1,l2,l3,l4")
        ->capture_default_str();
    audit->add_option("--smooth", smooth, "additive cell smoothing")->capture_default_str();
    audit->add_option("--cells", cells, "override numeric bin edges: Feat=e1|e2;Feat2=e");
    audit->add_option("--channel", channel, "outcome channel source")
        ->check(CLI::IsMember({"model", "empirical"}))
        ->capture_default_str();
    audit->add_option("--out", out_dir, "output directory")->required();

    std::string schedule, context;
    CLI::App* path = app.add_subcommand("path", "Trace objective minimizers along a "
                                                "weight schedule");
    path->add_option("--schedule", schedule, "CSV schedule of l1,l2,l3,l4 rows")->required();
    path->add_option("--data", data, "input CSV file");
    path->add_option("--schema", schema, "dataset schema JSON");
    path->add_option("--context", context, "context JSON (alternative to --data/--schema)");
    path->add_option("--smooth", smooth, "additive cell smoothing")->capture_default_str();
    path->add_option("--cells", cells, "override numeric bin edges");
    path->add_option("--channel", channel, "outcome channel source")
        ->check(CLI::IsMember({"model", "empirical"}))
        ->capture_default_str();
    path->add_option("--out", out_dir, "output directory")->required();

    std::string selftest_out;
    CLI::App* selftest =
        app.add_subcommand("selftest", "Run built-in numeric cross-checks");
    selftest->add_option("--out", selftest_out, "write the JSON summary here (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return emit_error(FA_INVALID_ARGUMENT, e.what());
    }

    if (audit->parsed()) {
        double lam[4];
        std::string err;
        if (!parse_lambda(lambda_spec, lam, err)) return emit_error(FA_INVALID_ARGUMENT, err);
        const int code = fa_run_audit(data.c_str(), schema.c_str(), lam, smooth,
                                      channel.c_str(), opt_cstr(cells), out_dir.c_str());
        return code == FA_OK ? 0 : emit_error(code, fa_last_error());
    }

    if (path->parsed()) {
        const int code =
            fa_run_path(opt_cstr(data), opt_cstr(schema), opt_cstr(context),
                        schedule.c_str(), smooth, channel.c_str(), opt_cstr(cells),
                        out_dir.c_str());
        return code == FA_OK ? 0 : emit_error(code, fa_last_error());
    }

    int failures = 0;
    const int code = fa_run_selftest(opt_cstr(selftest_out), &failures);
    if (code != FA_OK) return emit_error(code, fa_last_error());
    return failures == 0 ? 0 : 1;
}
