#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairaudit/context.hpp"
#include "fairaudit/score.hpp"

namespace fairaudit {

enum class FeatureKind { Categorical, Numeric };

// One column of the input table. Numeric features carry k interior bin
// edges defining k+1 bins with unbounded end bins; categorical features bin
// by category index.
struct FeatureSpec {
    std::string name;
    FeatureKind kind = FeatureKind::Numeric;
    std::vector<std::string> categories;  // categorical only
    std::vector<double> edges;            // numeric only, strictly increasing
    std::vector<std::string> bin_labels;  // optional, one per bin

    std::size_t bin_count() const;
    std::string bin_label(std::size_t bin) const;
};

struct DatasetSchema {
    std::vector<FeatureSpec> features;
    std::string outcome;           // column with values 0/1
    std::string group;             // column carrying the group attribute
    std::string group_zero_value;  // raw value mapped to S=0
    std::string group_one_value;   // raw value mapped to S=1

    void validate() const;
    FeatureSpec* find_feature(const std::string& name);
};

DatasetSchema parse_schema_json(const std::string& text);
DatasetSchema parse_schema_file(const std::string& path);

struct RawRecord {
    std::vector<double> features;  // categorical values coded by category index
    int s = 0;
    int y = 0;
};

struct CellInfo {
    std::vector<int> bins;  // per-feature bin index
    std::string label;      // "feat=bin|feat=bin|..."
    std::vector<double> representative;
    std::array<std::size_t, 2> count_s{0, 0};                      // [s]
    std::array<std::array<std::size_t, 2>, 2> count_sy{{{0, 0}, {0, 0}}};  // [s][y]
};

struct GroupedDataset {
    std::vector<RawRecord> records;
    std::size_t rows_read = 0;
    std::size_t dropped_missing = 0;  // missing or unparseable active column
    std::size_t dropped_group = 0;    // group value outside the two mapped ones

    // Filled by discretize:
    std::vector<int> cell_of_record;
    std::vector<CellInfo> cells;  // sorted by bin tuple
    SupportPtr cell_support;      // labels + numeric representatives
    std::size_t clamped_values = 0;  // numeric values beyond the edge span (end bins)

    bool discretized() const { return cell_support != nullptr; }
    std::array<std::size_t, 2> group_counts() const;
};

// Parses the CSV (header row required), maps group/outcome to {0,1}, codes
// categorical features, drops rows with missing or unparseable fields, and
// filters rows whose group value matches neither mapped value.
GroupedDataset load_csv(const std::string& path, const DatasetSchema& schema);

// Assigns each record to the cartesian-product cell of its per-feature bins;
// occupied cells become the audit alphabet, ordered by bin tuple. Cell
// representatives take bin midpoints, with end bins spanning to the observed
// min/max of the feature.
void discretize(GroupedDataset& ds, const DatasetSchema& schema);

struct LogisticConfig {
    double l2 = 0.0;  // ridge penalty, intercept unpenalized
    std::size_t max_iters = 100;
    double tol = 1e-8;  // sup-norm of the log-likelihood gradient
};

struct LogisticModel {
    double intercept = 0.0;
    std::vector<double> coefficients;
    std::size_t iterations = 0;
    double grad_norm = 0.0;
    bool converged = false;

    double predict(std::span<const double> x) const;  // P(label = 1 | x)
};

// Maximum-likelihood logistic fit by iteratively reweighted least squares.
// Deterministic; throws PerfectSeparation when coefficients diverge.
LogisticModel fit_logistic(const std::vector<std::vector<double>>& rows,
                           const std::vector<int>& labels, const LogisticConfig& cfg = {});

enum class ChannelSource { Model, Empirical };

struct BuiltContext {
    AuditContext ctx;
    std::optional<LogisticModel> outcome_model;  // present when source = Model
};

// p0, p1 from per-group cell frequencies (optional additive smoothing with
// pseudocount `smooth` per cell); channel rows from a logistic outcome model
// evaluated at cell representatives, or from pooled per-cell outcome
// frequencies.
BuiltContext build_context(const GroupedDataset& ds, ChannelSource source, double smooth = 0.0);
AuditContext empirical_context(const GroupedDataset& ds, ChannelSource source,
                               double smooth = 0.0);

// f_star value of each record's cell. The function must live on the
// dataset's cell support.
std::vector<double> score_records(const GroupedDataset& ds, const ScoreFunction& f_star);

}  // namespace fairaudit
