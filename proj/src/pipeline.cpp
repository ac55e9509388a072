#include "fairaudit/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <json.hpp>

#include "fairaudit/numeric.hpp"

namespace fairaudit {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
    return s.substr(b, e - b);
}

bool parse_number(const std::string& s, double& out) {
    const std::string t = trim(s);
    if (t.empty()) return false;
    char* end = nullptr;
    out = std::strtod(t.c_str(), &end);
    return end == t.c_str() + t.size() && std::isfinite(out);
}

// RFC-4180-ish reader: quoted fields, "" escapes, optional CR before LF.
std::vector<std::vector<std::string>> read_csv_rows(std::istream& in) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool any = false;
    char c;
    while (in.get(c)) {
        if (quoted) {
            if (c == '"') {
                if (in.peek() == '"') {
                    field.push_back('"');
                    in.get();
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
            any = true;
            continue;
        }
        switch (c) {
            case '"':
                quoted = true;
                any = true;
                break;
            case ',':
                row.push_back(std::move(field));
                field.clear();
                any = true;
                break;
            case '\r':
                break;
            case '\n':
                if (any) {
                    row.push_back(std::move(field));
                    field.clear();
                    rows.push_back(std::move(row));
                    row.clear();
                    any = false;
                }
                break;
            default:
                field.push_back(c);
                any = true;
        }
    }
    if (any) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

std::size_t FeatureSpec::bin_count() const {
    return kind == FeatureKind::Categorical ? categories.size() : edges.size() + 1;
}

std::string FeatureSpec::bin_label(std::size_t bin) const {
    if (!bin_labels.empty()) return bin_labels.at(bin);
    if (kind == FeatureKind::Categorical) return categories.at(bin);
    if (edges.empty()) return "all";
    if (bin == 0) return "<" + format_double(edges.front());
    if (bin == edges.size()) return ">=" + format_double(edges.back());
    return "[" + format_double(edges[bin - 1]) + "," + format_double(edges[bin]) + ")";
}

void DatasetSchema::validate() const {
    if (features.empty())
        fail(ErrorCode::InvalidArgument, "schema: at least one feature is required");
    if (outcome.empty() || group.empty())
        fail(ErrorCode::InvalidArgument, "schema: outcome and group columns are required");
    if (group_zero_value.empty() || group_one_value.empty() ||
        group_zero_value == group_one_value)
        fail(ErrorCode::InvalidArgument, "schema: two distinct group values are required");
    for (const FeatureSpec& f : features) {
        if (f.name.empty()) fail(ErrorCode::InvalidArgument, "schema: feature without a name");
        if (f.kind == FeatureKind::Categorical) {
            if (f.categories.empty())
                fail(ErrorCode::InvalidArgument,
                     "schema: categorical feature '" + f.name + "' lists no categories");
        } else {
            for (std::size_t i = 1; i < f.edges.size(); ++i)
                if (!(f.edges[i - 1] < f.edges[i]))
                    fail(ErrorCode::InvalidArgument,
                         "schema: bin edges of '" + f.name + "' must be strictly increasing");
        }
        if (!f.bin_labels.empty() && f.bin_labels.size() != f.bin_count())
            fail(ErrorCode::InvalidArgument,
                 "schema: '" + f.name + "' needs " + std::to_string(f.bin_count()) +
                     " bin labels, got " + std::to_string(f.bin_labels.size()));
    }
    for (std::size_t i = 0; i < features.size(); ++i)
        for (std::size_t j = i + 1; j < features.size(); ++j)
            if (features[i].name == features[j].name)
                fail(ErrorCode::InvalidArgument,
                     "schema: duplicate feature '" + features[i].name + "'");
}

FeatureSpec* DatasetSchema::find_feature(const std::string& name) {
    for (FeatureSpec& f : features)
        if (f.name == name) return &f;
    return nullptr;
}

DatasetSchema parse_schema_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::InvalidArgument, std::string("schema: invalid JSON: ") + e.what());
    }
    DatasetSchema schema;
    try {
        for (const auto& jf : j.at("features")) {
            FeatureSpec f;
            f.name = jf.at("name").get<std::string>();
            const std::string kind = jf.at("kind").get<std::string>();
            if (kind == "categorical") {
                f.kind = FeatureKind::Categorical;
                f.categories = jf.at("categories").get<std::vector<std::string>>();
            } else if (kind == "numeric") {
                f.kind = FeatureKind::Numeric;
                if (jf.contains("edges")) f.edges = jf.at("edges").get<std::vector<double>>();
            } else {
                fail(ErrorCode::InvalidArgument,
                     "schema: feature '" + f.name + "' has unknown kind '" + kind + "'");
            }
            if (jf.contains("bin_labels"))
                f.bin_labels = jf.at("bin_labels").get<std::vector<std::string>>();
            schema.features.push_back(std::move(f));
        }
        schema.outcome = j.at("outcome").get<std::string>();
        schema.group = j.at("group").get<std::string>();
        schema.group_zero_value = j.at("group_zero_value").get<std::string>();
        schema.group_one_value = j.at("group_one_value").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::InvalidArgument, std::string("schema: ") + e.what());
    }
    schema.validate();
    return schema;
}

DatasetSchema parse_schema_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::IoError, "cannot open schema file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_schema_json(buf.str());
}

GroupedDataset load_csv(const std::string& path, const DatasetSchema& schema) {
    schema.validate();
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::IoError, "cannot open data file '" + path + "'");
    const auto rows = read_csv_rows(in);
    if (rows.empty()) fail(ErrorCode::InvalidArgument, "data file '" + path + "' has no header");

    std::map<std::string, std::size_t> header;
    for (std::size_t i = 0; i < rows[0].size(); ++i) header.emplace(trim(rows[0][i]), i);
    auto column = [&](const std::string& name) {
        const auto it = header.find(name);
        if (it == header.end())
            fail(ErrorCode::MissingColumn, "data file has no column '" + name + "'");
        return it->second;
    };
    std::vector<std::size_t> feature_cols;
    feature_cols.reserve(schema.features.size());
    for (const FeatureSpec& f : schema.features) feature_cols.push_back(column(f.name));
    const std::size_t outcome_col = column(schema.outcome);
    const std::size_t group_col = column(schema.group);

    GroupedDataset ds;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        ++ds.rows_read;
        auto field = [&](std::size_t col) -> std::string {
            return col < row.size() ? trim(row[col]) : std::string();
        };
        const std::string group_value = field(group_col);
        if (group_value.empty()) {
            ++ds.dropped_missing;
            continue;
        }
        int s;
        if (group_value == schema.group_zero_value)
            s = 0;
        else if (group_value == schema.group_one_value)
            s = 1;
        else {
            ++ds.dropped_group;
            continue;
        }
        const std::string outcome_value = field(outcome_col);
        int y;
        if (outcome_value == "0")
            y = 0;
        else if (outcome_value == "1")
            y = 1;
        else {
            ++ds.dropped_missing;
            continue;
        }
        RawRecord rec;
        rec.s = s;
        rec.y = y;
        rec.features.reserve(schema.features.size());
        bool ok = true;
        for (std::size_t fi = 0; fi < schema.features.size(); ++fi) {
            const FeatureSpec& spec = schema.features[fi];
            const std::string value = field(feature_cols[fi]);
            if (value.empty()) {
                ok = false;
                break;
            }
            if (spec.kind == FeatureKind::Categorical) {
                const auto it =
                    std::find(spec.categories.begin(), spec.categories.end(), value);
                if (it == spec.categories.end())
                    fail(ErrorCode::UnmappableCategory,
                         "value '" + value + "' of column '" + spec.name +
                             "' is not in the schema's category list");
                rec.features.push_back(
                    static_cast<double>(std::distance(spec.categories.begin(), it)));
            } else {
                double v;
                if (!parse_number(value, v)) {
                    ok = false;
                    break;
                }
                rec.features.push_back(v);
            }
        }
        if (!ok) {
            ++ds.dropped_missing;
            continue;
        }
        ds.records.push_back(std::move(rec));
    }
    if (ds.records.empty())
        fail(ErrorCode::EmptyAfterFiltering, "no usable records after filtering '" + path + "'");
    return ds;
}

void discretize(GroupedDataset& ds, const DatasetSchema& schema) {
    schema.validate();
    const std::size_t nf = schema.features.size();
    // Observed span per numeric feature, for end-bin representatives.
    std::vector<double> lo(nf, std::numeric_limits<double>::infinity());
    std::vector<double> hi(nf, -std::numeric_limits<double>::infinity());
    for (const RawRecord& rec : ds.records) {
        for (std::size_t f = 0; f < nf; ++f) {
            lo[f] = std::min(lo[f], rec.features[f]);
            hi[f] = std::max(hi[f], rec.features[f]);
        }
    }

    ds.clamped_values = 0;
    std::vector<std::vector<int>> bins(ds.records.size());
    std::map<std::vector<int>, int> cell_ids;
    for (std::size_t r = 0; r < ds.records.size(); ++r) {
        std::vector<int> tuple(nf);
        for (std::size_t f = 0; f < nf; ++f) {
            const FeatureSpec& spec = schema.features[f];
            const double v = ds.records[r].features[f];
            if (spec.kind == FeatureKind::Categorical) {
                tuple[f] = static_cast<int>(v);
            } else if (spec.edges.empty()) {
                tuple[f] = 0;
            } else {
                const auto it =
                    std::upper_bound(spec.edges.begin(), spec.edges.end(), v);
                tuple[f] = static_cast<int>(std::distance(spec.edges.begin(), it));
                if (v < spec.edges.front() || v >= spec.edges.back()) ++ds.clamped_values;
            }
        }
        cell_ids.emplace(tuple, 0);  // id assigned after the sorted sweep
        bins[r] = std::move(tuple);
    }

    ds.cells.clear();
    ds.cells.reserve(cell_ids.size());
    int next_id = 0;
    for (auto& [tuple, id] : cell_ids) {  // std::map iterates in bin-tuple order
        id = next_id++;
        CellInfo cell;
        cell.bins = tuple;
        std::string label;
        std::vector<double> rep;
        rep.reserve(nf);
        for (std::size_t f = 0; f < nf; ++f) {
            const FeatureSpec& spec = schema.features[f];
            const int b = tuple[f];
            if (!label.empty()) label.push_back('|');
            label += spec.name + "=" + spec.bin_label(static_cast<std::size_t>(b));
            if (spec.kind == FeatureKind::Categorical) {
                rep.push_back(static_cast<double>(b));
            } else if (spec.edges.empty()) {
                rep.push_back((lo[f] + hi[f]) / 2.0);
            } else {
                const double left = b == 0 ? std::min(lo[f], spec.edges.front())
                                           : spec.edges[static_cast<std::size_t>(b) - 1];
                const double right = b == static_cast<int>(spec.edges.size())
                                         ? std::max(hi[f], spec.edges.back())
                                         : spec.edges[static_cast<std::size_t>(b)];
                rep.push_back((left + right) / 2.0);
            }
        }
        cell.label = std::move(label);
        cell.representative = std::move(rep);
        ds.cells.push_back(std::move(cell));
    }

    ds.cell_of_record.assign(ds.records.size(), -1);
    for (std::size_t r = 0; r < ds.records.size(); ++r) {
        const int id = cell_ids.at(bins[r]);
        ds.cell_of_record[r] = id;
        CellInfo& cell = ds.cells[static_cast<std::size_t>(id)];
        const auto s = static_cast<std::size_t>(ds.records[r].s);
        const auto y = static_cast<std::size_t>(ds.records[r].y);
        ++cell.count_s[s];
        ++cell.count_sy[s][y];
    }

    std::vector<std::string> labels;
    std::vector<std::vector<double>> reps;
    labels.reserve(ds.cells.size());
    reps.reserve(ds.cells.size());
    for (const CellInfo& cell : ds.cells) {
        labels.push_back(cell.label);
        reps.push_back(cell.representative);
    }
    ds.cell_support = make_support(std::move(labels), std::move(reps));
}

std::array<std::size_t, 2> GroupedDataset::group_counts() const {
    std::array<std::size_t, 2> counts{0, 0};
    for (const RawRecord& rec : records) ++counts[static_cast<std::size_t>(rec.s)];
    return counts;
}

namespace {

double sigmoid(double eta) {
    if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-std::min(eta, 35.0)));
    const double e = std::exp(std::max(eta, -35.0));
    return e / (1.0 + e);
}

// Solves the symmetric positive-definite system in place; true on success.
bool cholesky_solve(std::vector<std::vector<double>>& a, std::vector<double>& b) {
    const std::size_t n = a.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            KahanSum s;
            s.add(a[i][j]);
            for (std::size_t k = 0; k < j; ++k) s.add(-a[i][k] * a[j][k]);
            const double v = s.value();
            if (i == j) {
                if (!(v > 0.0)) return false;
                a[i][i] = std::sqrt(v);
            } else {
                a[i][j] = v / a[j][j];
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        KahanSum s;
        s.add(b[i]);
        for (std::size_t k = 0; k < i; ++k) s.add(-a[i][k] * b[k]);
        b[i] = s.value() / a[i][i];
    }
    for (std::size_t ii = n; ii-- > 0;) {
        KahanSum s;
        s.add(b[ii]);
        for (std::size_t k = ii + 1; k < n; ++k) s.add(-a[k][ii] * b[k]);
        b[ii] = s.value() / a[ii][ii];
    }
    return true;
}

}  // namespace

double LogisticModel::predict(std::span<const double> x) const {
    if (x.size() != coefficients.size())
        fail(ErrorCode::InvalidArgument,
             "LogisticModel::predict: expected " + std::to_string(coefficients.size()) +
                 " features, got " + std::to_string(x.size()));
    KahanSum eta;
    eta.add(intercept);
    for (std::size_t i = 0; i < x.size(); ++i) eta.add(coefficients[i] * x[i]);
    return sigmoid(eta.value());
}

LogisticModel fit_logistic(const std::vector<std::vector<double>>& rows,
                           const std::vector<int>& labels, const LogisticConfig& cfg) {
    const std::size_t n = rows.size();
    if (n < 2 || labels.size() != n)
        fail(ErrorCode::InvalidArgument,
             "fit_logistic: needs >= 2 rows and one label per row");
    const std::size_t d = rows[0].size();
    bool has0 = false;
    bool has1 = false;
    for (std::size_t i = 0; i < n; ++i) {
        if (rows[i].size() != d)
            fail(ErrorCode::InvalidArgument, "fit_logistic: ragged feature matrix");
        for (double v : rows[i])
            if (!std::isfinite(v))
                fail(ErrorCode::InvalidArgument, "fit_logistic: non-finite feature value");
        if (labels[i] == 0)
            has0 = true;
        else if (labels[i] == 1)
            has1 = true;
        else
            fail(ErrorCode::InvalidArgument, "fit_logistic: labels must be 0 or 1");
    }
    if (!has0 || !has1)
        fail(ErrorCode::InvalidArgument, "fit_logistic: both label values must be present");
    if (!(cfg.l2 >= 0.0) || cfg.max_iters == 0 || !(cfg.tol > 0.0))
        fail(ErrorCode::InvalidArgument, "fit_logistic: invalid config");

    const std::size_t p = d + 1;  // intercept first
    std::vector<double> beta(p, 0.0);
    std::vector<double> eta(n), prob(n);
    LogisticModel model;
    for (std::size_t iter = 1; iter <= cfg.max_iters; ++iter) {
        for (std::size_t i = 0; i < n; ++i) {
            KahanSum e;
            e.add(beta[0]);
            for (std::size_t j = 0; j < d; ++j) e.add(beta[j + 1] * rows[i][j]);
            eta[i] = e.value();
            prob[i] = sigmoid(eta[i]);
        }
        std::vector<double> grad(p, 0.0);
        {
            std::vector<KahanSum> acc(p);
            for (std::size_t i = 0; i < n; ++i) {
                const double r = labels[i] - prob[i];
                acc[0].add(r);
                for (std::size_t j = 0; j < d; ++j) acc[j + 1].add(r * rows[i][j]);
            }
            for (std::size_t j = 0; j < p; ++j) grad[j] = acc[j].value();
            for (std::size_t j = 1; j < p; ++j) grad[j] -= cfg.l2 * beta[j];
        }
        double gnorm = 0.0;
        for (double g : grad) gnorm = std::max(gnorm, std::abs(g));
        model.iterations = iter - 1;
        model.grad_norm = gnorm;
        if (gnorm <= cfg.tol) {
            model.converged = true;
            break;
        }
        // Weighted normal equations for the Newton step.
        std::vector<std::vector<double>> hess(p, std::vector<double>(p, 0.0));
        {
            std::vector<std::vector<KahanSum>> acc(p, std::vector<KahanSum>(p));
            for (std::size_t i = 0; i < n; ++i) {
                const double w = std::max(prob[i] * (1.0 - prob[i]), 1e-10);
                acc[0][0].add(w);
                for (std::size_t j = 0; j < d; ++j) {
                    const double wx = w * rows[i][j];
                    acc[j + 1][0].add(wx);
                    for (std::size_t k = 0; k <= j; ++k)
                        acc[j + 1][k + 1].add(wx * rows[i][k]);
                }
            }
            for (std::size_t j = 0; j < p; ++j)
                for (std::size_t k = 0; k <= j; ++k)
                    hess[j][k] = hess[k][j] = acc[std::max(j, k)][std::min(j, k)].value();
            for (std::size_t j = 1; j < p; ++j) hess[j][j] += cfg.l2;
        }
        std::vector<double> step = grad;
        if (!cholesky_solve(hess, step))
            fail(ErrorCode::InvalidArgument,
                 "fit_logistic: singular design matrix (collinear features)");
        for (std::size_t j = 0; j < p; ++j) beta[j] += step[j];
        KahanSum norm2;
        for (double b : beta) norm2.add(b * b);
        if (std::sqrt(norm2.value()) > 1e6)
            fail(ErrorCode::PerfectSeparation,
                 "fit_logistic: coefficients diverge (separable data); set l2 > 0");
        model.iterations = iter;
    }
    model.intercept = beta[0];
    model.coefficients.assign(beta.begin() + 1, beta.end());
    return model;
}

BuiltContext build_context(const GroupedDataset& ds, ChannelSource source, double smooth) {
    if (!ds.discretized())
        fail(ErrorCode::InvalidArgument, "build_context: dataset is not discretized");
    if (!(smooth >= 0.0))
        fail(ErrorCode::InvalidArgument, "build_context: smoothing pseudocount must be >= 0");
    const auto groups = ds.group_counts();
    for (int s = 0; s < 2; ++s)
        if (groups[static_cast<std::size_t>(s)] == 0)
            fail(ErrorCode::EmptyGroup, "build_context: group " + std::to_string(s) +
                                            " has no records");
    const std::size_t k = ds.cells.size();
    std::vector<double> w0(k), w1(k);
    for (std::size_t c = 0; c < k; ++c) {
        w0[c] = static_cast<double>(ds.cells[c].count_s[0]) + smooth;
        w1[c] = static_cast<double>(ds.cells[c].count_s[1]) + smooth;
    }
    DiscreteDistribution p0 = make_distribution(ds.cell_support, w0);
    DiscreteDistribution p1 = make_distribution(ds.cell_support, w1);

    SupportPtr out = make_support({"0", "1"});
    std::vector<std::vector<double>> channel_rows(k);
    std::optional<LogisticModel> outcome_model;
    if (source == ChannelSource::Model) {
        std::vector<std::vector<double>> x;
        std::vector<int> y;
        x.reserve(ds.records.size());
        y.reserve(ds.records.size());
        for (const RawRecord& rec : ds.records) {
            x.push_back(rec.features);
            y.push_back(rec.y);
        }
        outcome_model = fit_logistic(x, y);
        for (std::size_t c = 0; c < k; ++c) {
            const double w1y = outcome_model->predict(ds.cells[c].representative);
            channel_rows[c] = {1.0 - w1y, w1y};
        }
    } else {
        for (std::size_t c = 0; c < k; ++c) {
            const CellInfo& cell = ds.cells[c];
            const double total =
                static_cast<double>(cell.count_s[0] + cell.count_s[1]);
            const double ones =
                static_cast<double>(cell.count_sy[0][1] + cell.count_sy[1][1]);
            const double w1y = ones / total;
            channel_rows[c] = {1.0 - w1y, w1y};
        }
    }
    Channel channel(ds.cell_support, out, std::move(channel_rows));
    return BuiltContext{AuditContext(std::move(p0), std::move(p1), std::move(channel)),
                        std::move(outcome_model)};
}

AuditContext empirical_context(const GroupedDataset& ds, ChannelSource source, double smooth) {
    return build_context(ds, source, smooth).ctx;
}

std::vector<double> score_records(const GroupedDataset& ds, const ScoreFunction& f_star) {
    if (!ds.discretized())
        fail(ErrorCode::UnknownCell, "score_records: dataset is not discretized");
    if (!aligned(f_star.support(), ds.cell_support))
        fail(ErrorCode::UnknownCell,
             "score_records: function lives on a different cell structure");
    std::vector<double> scores(ds.records.size());
    for (std::size_t r = 0; r < ds.records.size(); ++r) {
        const int c = ds.cell_of_record[r];
        if (c < 0 || static_cast<std::size_t>(c) >= f_star.size())
            fail(ErrorCode::UnknownCell,
                 "score_records: record " + std::to_string(r) + " maps to no known cell");
        scores[r] = f_star.value(static_cast<std::size_t>(c));
    }
    return scores;
}

}  // namespace fairaudit
