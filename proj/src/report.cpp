#include "fairaudit/report.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "fairaudit/correction.hpp"
#include "fairaudit/divergence.hpp"
#include "fairaudit/kde.hpp"
#include "fairaudit/numeric.hpp"
#include "fairaudit/oracle.hpp"
#include "fairaudit/path.hpp"
#include "fairaudit/perturbation.hpp"

namespace fairaudit {

namespace {

using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    parts.push_back(cur);
    return parts;
}

bool parse_number(const std::string& s, double& out) {
    const std::string t = trim(s);
    if (t.empty()) return false;
    char* end = nullptr;
    out = std::strtod(t.c_str(), &end);
    return end == t.c_str() + t.size();
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string sanitize_filename(const std::string& s) {
    std::string out;
    for (char c : s)
        out.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '-' ? c : '_');
    return out;
}

void write_file(const fs::path& path, const std::string& content) {
    std::error_code ec;
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::IoError, "cannot write '" + path.string() + "'");
    out << content;
    if (!out) fail(ErrorCode::IoError, "write failed for '" + path.string() + "'");
}

double safe_kl(const DiscreteDistribution& a, const DiscreteDistribution& b) {
    try {
        return kl_divergence(a, b);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::AbsoluteContinuityViolation)
            return std::numeric_limits<double>::infinity();
        throw;
    }
}

ordered_json logistic_json(const LogisticModel& model, const DatasetSchema& schema) {
    ordered_json j;
    j["intercept"] = model.intercept;
    ordered_json coefs;
    for (std::size_t i = 0; i < model.coefficients.size(); ++i)
        coefs[schema.features[i].name] = model.coefficients[i];
    j["coefficients"] = std::move(coefs);
    j["iterations"] = model.iterations;
    j["grad_norm"] = model.grad_norm;
    j["converged"] = model.converged;
    return j;
}

struct DensityStratum {
    std::string label;
    std::vector<double> samples;
};

std::string density_csv(const std::vector<DensityStratum>& strata) {
    std::ostringstream out;
    out << "stratum,x,density,flag\n";
    for (const DensityStratum& st : strata) {
        if (st.samples.empty()) continue;
        const KdeResult kde = kde_density(st.samples);
        if (kde.degenerate) {
            out << csv_escape(st.label) << ',' << format_double(kde.spike_at) << ",,spike\n";
            continue;
        }
        for (std::size_t i = 0; i < kde.grid.size(); ++i)
            out << csv_escape(st.label) << ',' << format_double(kde.grid[i]) << ','
                << format_double(kde.density[i]) << ",\n";
    }
    return out.str();
}

}  // namespace

std::vector<LambdaWeights> parse_schedule_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::IoError, "cannot open schedule file '" + path + "'");
    std::vector<LambdaWeights> schedule;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::vector<std::string> parts = split(line, ',');
        if (parts.size() != 4)
            fail(ErrorCode::MalformedSchedule,
                 "schedule line " + std::to_string(lineno) + ": expected 4 comma-separated "
                 "values, got " + std::to_string(parts.size()));
        double v[4];
        for (int i = 0; i < 4; ++i) {
            if (!parse_number(parts[static_cast<std::size_t>(i)], v[i]) || !std::isfinite(v[i]) ||
                v[i] < 0.0)
                fail(ErrorCode::MalformedSchedule,
                     "schedule line " + std::to_string(lineno) + ": '" +
                         trim(parts[static_cast<std::size_t>(i)]) +
                         "' is not a nonnegative number");
        }
        schedule.emplace_back(v[0], v[1], v[2], v[3]);
    }
    if (schedule.empty())
        fail(ErrorCode::MalformedSchedule, "schedule file '" + path + "' has no rows");
    return schedule;
}

AuditContext parse_context_json(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::InvalidArgument, std::string("context: invalid JSON: ") + e.what());
    }
    try {
        const auto labels = j.at("labels").get<std::vector<std::string>>();
        const auto p0 = j.at("p0").get<std::vector<double>>();
        const auto p1 = j.at("p1").get<std::vector<double>>();
        const auto out_labels = j.at("output_labels").get<std::vector<std::string>>();
        const auto rows = j.at("channel").get<std::vector<std::vector<double>>>();
        SupportPtr in = make_support(labels);
        SupportPtr out = make_support(out_labels);
        return AuditContext(make_distribution(in, p0), make_distribution(in, p1),
                            Channel(in, out, rows));
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::InvalidArgument, std::string("context: ") + e.what());
    }
}

AuditContext parse_context_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::IoError, "cannot open context file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_context_json(buf.str());
}

void apply_cells_override(DatasetSchema& schema, const std::string& spec) {
    for (const std::string& entry_raw : split(spec, ';')) {
        const std::string entry = trim(entry_raw);
        if (entry.empty()) continue;
        const std::size_t eq = entry.find('=');
        if (eq == std::string::npos)
            fail(ErrorCode::InvalidArgument,
                 "cells override '" + entry + "': expected Feature=edge|edge|...");
        const std::string name = trim(entry.substr(0, eq));
        FeatureSpec* feature = schema.find_feature(name);
        if (feature == nullptr)
            fail(ErrorCode::InvalidArgument, "cells override: unknown feature '" + name + "'");
        if (feature->kind != FeatureKind::Numeric)
            fail(ErrorCode::InvalidArgument,
                 "cells override: feature '" + name + "' is not numeric");
        std::vector<double> edges;
        for (const std::string& part : split(entry.substr(eq + 1), '|')) {
            double v;
            if (!parse_number(part, v) || !std::isfinite(v))
                fail(ErrorCode::InvalidArgument,
                     "cells override: '" + trim(part) + "' is not a number");
            edges.push_back(v);
        }
        feature->edges = std::move(edges);
        feature->bin_labels.clear();
    }
    schema.validate();
}

namespace {

struct Prototype {
    std::size_t cell = 0;
    double value = 0.0;
    bool found = false;
};

ordered_json prototype_json(const Prototype& proto, const GroupedDataset& ds,
                            const DatasetSchema& schema) {
    if (!proto.found) return nullptr;
    const CellInfo& cell = ds.cells[proto.cell];
    ordered_json j;
    j["cell"] = cell.label;
    j["f_star"] = proto.value;
    ordered_json feats;
    for (std::size_t f = 0; f < schema.features.size(); ++f)
        feats[schema.features[f].name] =
            schema.features[f].bin_label(static_cast<std::size_t>(cell.bins[f]));
    j["features"] = std::move(feats);
    j["group0_count"] = cell.count_s[0];
    j["group1_count"] = cell.count_s[1];
    return j;
}

}  // namespace

void run_audit(const AuditOptions& opt) {
    if (opt.out_dir.empty())
        fail(ErrorCode::InvalidArgument, "audit: an output directory is required");
    DatasetSchema schema = parse_schema_file(opt.schema_path);
    if (!opt.cells_override.empty()) apply_cells_override(schema, opt.cells_override);
    GroupedDataset ds = load_csv(opt.data_path, schema);
    discretize(ds, schema);
    BuiltContext built = build_context(ds, opt.channel_source, opt.smooth);
    const AuditContext& ctx = built.ctx;

    // Group-membership model: the f_l route used when the channel itself is
    // model-based; the empirical channel pairs with the empirical f_l.
    Warnings warnings;
    std::optional<LogisticModel> membership;
    std::optional<ScoreFunction> fl_override;
    if (opt.channel_source == ChannelSource::Model) {
        std::vector<std::vector<double>> x;
        std::vector<int> labels;
        x.reserve(ds.records.size());
        labels.reserve(ds.records.size());
        for (const RawRecord& rec : ds.records) {
            x.push_back(rec.features);
            labels.push_back(rec.s == 0 ? 1 : 0);
        }
        membership = fit_logistic(x, labels);
        std::vector<double> posterior(ds.cells.size());
        for (std::size_t c = 0; c < ds.cells.size(); ++c)
            posterior[c] = membership->predict(ds.cells[c].representative);
        fl_override = fl_from_membership_model(ctx, posterior, &warnings);
    }

    std::optional<CorrectionResult> corr;
    try {
        corr = correction_function(opt.lam, ctx, fl_override);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::DegenerateObjective) throw;
    }
    if (corr) {
        warnings.clipped_log_odds += corr->warnings.clipped_log_odds;
        warnings.extreme_log_ratio += corr->warnings.extreme_log_ratio;
    }

    std::vector<double> scores;
    if (corr) scores = score_records(ds, corr->f_star);

    const auto groups = ds.group_counts();
    KahanSum ysum[2];
    for (const RawRecord& rec : ds.records)
        ysum[rec.s].add(static_cast<double>(rec.y));
    const double mean_y0 = ysum[0].value() / static_cast<double>(groups[0]);
    const double mean_y1 = ysum[1].value() / static_cast<double>(groups[1]);

    Prototype argmax, argmin, closest;
    if (corr) {
        for (std::size_t c = 0; c < ds.cells.size(); ++c) {
            if (ds.cells[c].count_s[0] == 0) continue;  // prototypes come from group 0
            const double v = corr->f_star.value(c);
            const std::string& label = ds.cells[c].label;
            auto better = [&](const Prototype& cur, double key, double cur_key) {
                return !cur.found || key > cur_key ||
                       (key == cur_key && label < ds.cells[cur.cell].label);
            };
            if (better(argmax, v, argmax.found ? corr->f_star.value(argmax.cell) : 0))
                argmax = {c, v, true};
            if (better(argmin, -v, argmin.found ? -corr->f_star.value(argmin.cell) : 0))
                argmin = {c, v, true};
            if (better(closest, -std::abs(v),
                       closest.found ? -std::abs(corr->f_star.value(closest.cell)) : 0))
                closest = {c, v, true};
        }
    }

    ordered_json report;
    report["mode"] = "audit";
    report["lambda"] = {{"l1", opt.lam.l1}, {"l2", opt.lam.l2}, {"l3", opt.lam.l3},
                        {"l4", opt.lam.l4}};
    report["channel_source"] =
        opt.channel_source == ChannelSource::Model ? "model" : "empirical";
    report["smoothing"] = opt.smooth;
    report["dataset"] = {{"rows_read", ds.rows_read},
                         {"records", ds.records.size()},
                         {"dropped_missing", ds.dropped_missing},
                         {"dropped_group_filter", ds.dropped_group},
                         {"group0_records", groups[0]},
                         {"group1_records", groups[1]},
                         {"cells", ds.cells.size()},
                         {"clamped_numeric_values", ds.clamped_values}};
    report["models"] = {{"outcome", built.outcome_model
                                        ? logistic_json(*built.outcome_model, schema)
                                        : ordered_json(nullptr)},
                        {"membership", membership ? logistic_json(*membership, schema)
                                                  : ordered_json(nullptr)}};
    report["disparity"] = {{"mean_outcome_group0", mean_y0},
                           {"mean_outcome_group1", mean_y1},
                           {"q0_outcome_rate", ctx.q0().mass(1)},
                           {"q1_outcome_rate", ctx.q1().mass(1)},
                           {"kl_output", safe_kl(ctx.q0(), ctx.q1())}};
    {
        ordered_json jc;
        jc["degenerate"] = !corr.has_value();
        if (corr) {
            jc["delta_opt"] = corr->delta_opt;
            jc["rho_m"] = corr->coef.rho_m;
            jc["independent_channel"] = !corr->principal.has_value();
            jc["a1"] = corr->coef.a1;
            jc["a2"] = corr->coef.a2;
            jc["b1"] = corr->coef.b1;
            jc["n_l"] = corr->coef.n_l;
            jc["n_m"] = corr->coef.n_m;
        } else {
            jc["delta_opt"] = 0.0;
        }
        jc["warnings"] = {{"clipped_log_odds", warnings.clipped_log_odds},
                          {"extreme_log_ratio", warnings.extreme_log_ratio}};
        report["correction"] = std::move(jc);
    }
    report["prototypes"] = {{"argmax", prototype_json(argmax, ds, schema)},
                            {"argmin", prototype_json(argmin, ds, schema)},
                            {"closest_to_zero", prototype_json(closest, ds, schema)}};
    report["outputs"] = {{"fstar_by_cell", "fstar_by_cell.csv"},
                         {"densities_dir",
                          corr ? ordered_json("densities") : ordered_json(nullptr)}};

    const fs::path out_dir(opt.out_dir);
    write_file(out_dir / "report.json", report.dump(2) + "\n");

    {
        std::ostringstream csv;
        csv << "cell";
        for (const FeatureSpec& f : schema.features) csv << ',' << csv_escape(f.name);
        csv << ",p0,p1,group0_count,group1_count,channel_p1,f_star,f_l\n";
        for (std::size_t c = 0; c < ds.cells.size(); ++c) {
            const CellInfo& cell = ds.cells[c];
            csv << csv_escape(cell.label);
            for (std::size_t f = 0; f < schema.features.size(); ++f)
                csv << ','
                    << csv_escape(schema.features[f].bin_label(
                           static_cast<std::size_t>(cell.bins[f])));
            csv << ',' << format_double(ctx.p0().mass(c)) << ','
                << format_double(ctx.p1().mass(c)) << ',' << cell.count_s[0] << ','
                << cell.count_s[1] << ',' << format_double(ctx.channel().prob(c, 1));
            if (corr)
                csv << ',' << format_double(corr->f_star.value(c)) << ','
                    << format_double(corr->f_l.value(c));
            else
                csv << ",,";
            csv << '\n';
        }
        write_file(out_dir / "fstar_by_cell.csv", csv.str());
    }

    if (corr) {
        std::error_code ec;
        fs::create_directories(out_dir / "densities", ec);
        for (std::size_t f = 0; f < schema.features.size(); ++f) {
            const FeatureSpec& spec = schema.features[f];
            std::vector<DensityStratum> strata(spec.bin_count());
            for (std::size_t b = 0; b < spec.bin_count(); ++b)
                strata[b].label = spec.bin_label(b);
            for (std::size_t r = 0; r < ds.records.size(); ++r) {
                if (ds.records[r].s != 0) continue;  // conditional curves for group 0
                const int cell = ds.cell_of_record[r];
                const int b = ds.cells[static_cast<std::size_t>(cell)].bins[f];
                strata[static_cast<std::size_t>(b)].samples.push_back(scores[r]);
            }
            write_file(out_dir / "densities" / (sanitize_filename(spec.name) + ".csv"),
                       density_csv(strata));

            if (spec.kind != FeatureKind::Numeric) continue;
            // Second stratification for numeric features: the most frequent
            // raw values get their own conditional curves.
            std::map<double, std::size_t> freq;
            for (const RawRecord& rec : ds.records)
                if (rec.s == 0) ++freq[rec.features[f]];
            std::vector<std::pair<double, std::size_t>> ranked(freq.begin(), freq.end());
            std::stable_sort(ranked.begin(), ranked.end(),
                             [](const auto& a, const auto& b) { return a.second > b.second; });
            if (ranked.size() > 5) ranked.resize(5);
            std::sort(ranked.begin(), ranked.end());
            std::vector<DensityStratum> by_value;
            for (const auto& [value, count] : ranked) {
                DensityStratum st;
                st.label = format_double(value);
                for (std::size_t r = 0; r < ds.records.size(); ++r)
                    if (ds.records[r].s == 0 && ds.records[r].features[f] == value)
                        st.samples.push_back(scores[r]);
                by_value.push_back(std::move(st));
            }
            write_file(out_dir / "densities" /
                           (sanitize_filename(spec.name) + "_by_value.csv"),
                       density_csv(by_value));
        }
    }
}

void run_path(const PathOptions& opt) {
    if (opt.out_dir.empty())
        fail(ErrorCode::InvalidArgument, "path: an output directory is required");
    if (!opt.context_path.empty() && !opt.data_path.empty())
        fail(ErrorCode::InvalidArgument, "path: give either a context file or a dataset, not both");
    std::optional<AuditContext> ctx;
    if (!opt.context_path.empty()) {
        ctx = parse_context_file(opt.context_path);
    } else {
        if (opt.data_path.empty() || opt.schema_path.empty())
            fail(ErrorCode::InvalidArgument, "path: --data with --schema, or --context");
        DatasetSchema schema = parse_schema_file(opt.schema_path);
        if (!opt.cells_override.empty()) apply_cells_override(schema, opt.cells_override);
        GroupedDataset ds = load_csv(opt.data_path, schema);
        discretize(ds, schema);
        ctx = empirical_context(ds, opt.channel_source, opt.smooth);
    }
    const std::vector<LambdaWeights> schedule = parse_schedule_file(opt.schedule_path);
    const std::vector<PathPoint> points = trace_path(schedule, *ctx);
    std::ostringstream csv;
    csv << "l1,l2,l3,l4,objective,kl_qx_p0,kl_qx_p1,kl_qy_q0,kl_qy_q1,iterations,converged,"
           "non_unique\n";
    for (const PathPoint& pt : points) {
        csv << format_double(pt.lam.l1) << ',' << format_double(pt.lam.l2) << ','
            << format_double(pt.lam.l3) << ',' << format_double(pt.lam.l4) << ','
            << format_double(pt.objective);
        for (double d : pt.divergences) csv << ',' << format_double(d);
        csv << ',' << pt.iterations << ',' << (pt.converged ? 1 : 0) << ','
            << (pt.non_unique ? 1 : 0) << '\n';
    }
    write_file(fs::path(opt.out_dir) / "path.csv", csv.str());
}

namespace {

struct Check {
    std::string name;
    bool pass = false;
    std::string detail;
};

AuditContext random_context(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> mass(0.2, 1.0);
    std::uniform_real_distribution<double> prob(0.15, 0.85);
    std::vector<std::string> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = "x" + std::to_string(i);
    SupportPtr in = make_support(labels);
    SupportPtr out = make_support({"0", "1"});
    std::vector<double> w0(n), w1(n);
    for (double& v : w0) v = mass(rng);
    for (double& v : w1) v = mass(rng);
    std::vector<std::vector<double>> rows(n);
    for (auto& row : rows) {
        const double p1y = prob(rng);
        row = {1.0 - p1y, p1y};
    }
    return AuditContext(make_distribution(in, w0), make_distribution(in, w1),
                        Channel(in, out, std::move(rows)));
}

ScoreFunction random_direction(std::mt19937_64& rng, const DiscreteDistribution& p0) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> v(p0.size());
    for (double& x : v) x = gauss(rng);
    return normalize_direction(p0, ScoreFunction(p0.support(), std::move(v)));
}

Check check_finite_difference() {
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> lam_draw(0.0, 2.0);
    double worst = 0.0;
    bool pass = true;
    for (int i = 0; i < 20; ++i) {
        const std::size_t n = 2 + static_cast<std::size_t>(i % 5);
        const AuditContext ctx = random_context(rng, n);
        const LambdaWeights lam(0.5, lam_draw(rng), 0.5, lam_draw(rng));
        const ScoreFunction f = random_direction(rng, ctx.p0());
        const double exact = delta_lambda(lam, ctx, f);
        const double ladder[] = {1e-3, 1e-4, 1e-5};
        const double approx = richardson_delta(lam, ctx, f, ladder);
        const double err = std::abs(approx - exact);
        worst = std::max(worst, err);
        if (err > std::max(1e-4, 1e-3 * std::abs(exact))) pass = false;
    }
    return {"delta_closed_form_vs_finite_difference", pass,
            "20 instances, worst |err| = " + format_double(worst)};
}

Check check_brute_force() {
    std::mt19937_64 rng(202);
    std::uniform_real_distribution<double> lam_draw(0.2, 2.0);
    bool pass = true;
    double worst_gap = 0.0;
    double worst_cos = 1.0;
    const std::size_t sizes[] = {2, 3, 4, 3, 4};
    for (std::size_t i = 0; i < 5; ++i) {
        const AuditContext ctx = random_context(rng, sizes[i]);
        const LambdaWeights lam(0.0, lam_draw(rng), 0.0, lam_draw(rng));
        const CorrectionResult corr = correction_function(lam, ctx);
        const BruteForceResult brute =
            brute_force_min_delta(lam, ctx, 20000, true, 7000 + i);
        const double gap = brute.delta_best - corr.delta_opt;
        worst_gap = std::max(worst_gap, std::abs(gap));
        if (gap < -1e-6 || gap > 1e-4) pass = false;
        KahanSum dot;
        for (std::size_t x = 0; x < ctx.input_size(); ++x)
            dot.add(ctx.p0().mass(x) * brute.f_best.value(x) * corr.f_star.value(x));
        const double c = std::abs(dot.value());
        worst_cos = std::min(worst_cos, c);
        if (c < 0.999) pass = false;
    }
    return {"closed_form_optimum_vs_random_search", pass,
            "5 instances, worst |gap| = " + format_double(worst_gap) +
                ", worst |cos| = " + format_double(worst_cos)};
}

Check check_spectral_rho() {
    std::mt19937_64 rng(303);
    double worst = 0.0;
    bool pass = true;
    for (int i = 0; i < 20; ++i) {
        const AuditContext ctx = random_context(rng, 2 + static_cast<std::size_t>(i % 7));
        const double direct = principal_functions(ctx).rho_m;
        const double spectral = maximal_correlation_svd(ctx);
        const double err = std::abs(direct - spectral);
        worst = std::max(worst, err);
        if (err > 1e-9) pass = false;
    }
    return {"maximal_correlation_spectral_agreement", pass,
            "20 instances, worst |err| = " + format_double(worst)};
}

Check check_channel_only_collapse() {
    std::mt19937_64 rng(404);
    std::uniform_real_distribution<double> lam_draw(0.5, 2.0);
    double worst_point = 0.0;
    double worst_delta = 0.0;
    bool pass = true;
    for (int i = 0; i < 10; ++i) {
        const AuditContext ctx = random_context(rng, 2 + static_cast<std::size_t>(i % 5));
        const LambdaWeights lam(0.0, 0.0, 0.0, lam_draw(rng));
        const CorrectionResult corr = correction_function(lam, ctx);
        const double sign = corr.coef.b1 >= 0.0 ? 1.0 : -1.0;
        for (std::size_t x = 0; x < ctx.input_size(); ++x) {
            const double want = -sign * corr.principal->f_m.value(x);
            worst_point = std::max(worst_point, std::abs(corr.f_star.value(x) - want));
        }
        KahanSum var;
        const ScoreFunction gl = log_likelihood_ratio_gl(ctx);
        for (std::size_t y = 0; y < ctx.output_size(); ++y)
            var.add(ctx.q0().mass(y) * gl.value(y) * gl.value(y));
        const double closed =
            -lam.l4 * corr.coef.rho_m * std::sqrt(std::max(0.0, var.value()));
        worst_delta = std::max(worst_delta, std::abs(corr.delta_opt - closed));
    }
    if (worst_point > 1e-12 || worst_delta > 1e-10) pass = false;
    return {"channel_only_weights_principal_collapse", pass,
            "10 instances, worst pointwise = " + format_double(worst_point) +
                ", worst delta = " + format_double(worst_delta)};
}

Check check_path_endpoints() {
    std::mt19937_64 rng(505);
    bool pass = true;
    double worst = 0.0;
    for (int i = 0; i < 5; ++i) {
        const AuditContext ctx = random_context(rng, 3 + static_cast<std::size_t>(i % 4));
        const PathPoint only_p0 = solve_correction_path(LambdaWeights(1, 0, 0, 0), ctx);
        const PathPoint only_p1 = solve_correction_path(LambdaWeights(0, 1, 0, 0), ctx);
        const PathPoint consistent = solve_correction_path(LambdaWeights(0, 1, 0, 1), ctx);
        const double tv0 = total_variation(only_p0.qx, ctx.p0());
        const double tv1 = total_variation(only_p1.qx, ctx.p1());
        worst = std::max({worst, tv0, tv1, consistent.objective});
        if (tv0 > 1e-8 || tv1 > 1e-6 || consistent.objective > 1e-8) pass = false;
    }
    return {"path_endpoint_identities", pass, "5 instances, worst residual = " +
                                                  format_double(worst)};
}

Check check_grid_agreement() {
    std::mt19937_64 rng(606);
    bool pass = true;
    double worst = 0.0;
    for (int i = 0; i < 2; ++i) {
        const AuditContext ctx = random_context(rng, 3);
        const LambdaWeights lam(1, 1, 0, 1);
        const PathPoint solved = solve_correction_path(lam, ctx);
        const GridResult grid = grid_simplex_min(lam, ctx, 600);
        const double err = std::abs(solved.objective - grid.objective);
        worst = std::max(worst, err);
        if (err > 1e-5) pass = false;
    }
    return {"grid_oracle_agreement", pass, "2 instances, worst |err| = " +
                                               format_double(worst)};
}

Check check_kl_quadratic() {
    std::mt19937_64 rng(707);
    bool pass = true;
    double lo = 1.0;
    double hi = 0.0;
    for (int i = 0; i < 5; ++i) {
        const AuditContext ctx = random_context(rng, 2 + static_cast<std::size_t>(i % 5));
        const ScoreFunction f = random_direction(rng, ctx.p0());
        const double eps = 1e-4;
        const double ratio =
            kl_divergence(perturbed_distribution(ctx.p0(), f, eps), ctx.p0()) / (eps * eps);
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
        if (ratio < 0.4 || ratio > 0.6) pass = false;
    }
    return {"kl_second_order_limit", pass,
            "5 instances, ratio range [" + format_double(lo) + ", " + format_double(hi) + "]"};
}

Check check_kde_integral() {
    std::mt19937_64 rng(808);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> samples(2000);
    for (double& s : samples) s = gauss(rng);
    const KdeResult kde = kde_density(samples);
    KahanSum integral;
    for (std::size_t i = 1; i < kde.grid.size(); ++i)
        integral.add(0.5 * (kde.density[i] + kde.density[i - 1]) *
                     (kde.grid[i] - kde.grid[i - 1]));
    const double err = std::abs(integral.value() - 1.0);
    return {"kde_integrates_to_one", err <= 1e-3, "|integral - 1| = " + format_double(err)};
}

}  // namespace

int run_selftest(std::ostream& out) {
    const Check checks[] = {check_finite_difference(),    check_brute_force(),
                            check_spectral_rho(),         check_channel_only_collapse(),
                            check_path_endpoints(),       check_grid_agreement(),
                            check_kl_quadratic(),         check_kde_integral()};
    int failed = 0;
    ordered_json items = ordered_json::array();
    for (const Check& c : checks) {
        if (!c.pass) ++failed;
        items.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    }
    ordered_json root;
    root["selftest"] = {{"passed", static_cast<int>(std::size(checks)) - failed},
                        {"failed", failed},
                        {"checks", std::move(items)}};
    out << root.dump(2) << "\n";
    return failed;
}

}  // namespace fairaudit
