#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "fairaudit/path.hpp"
#include "fairaudit/pipeline.hpp"

namespace fairaudit {

struct AuditOptions {
    std::string data_path;
    std::string schema_path;
    std::string out_dir;
    LambdaWeights lam{0.0, 1.0, 0.0, 1.0};
    double smooth = 0.0;
    ChannelSource channel_source = ChannelSource::Model;
    std::string cells_override;  // "Feature=e1|e2;Other=e" replaces numeric bin edges
};

// Full audit: ingest, discretize, build the context, compute the correction,
// and write report.json, fstar_by_cell.csv and densities/*.csv under out_dir.
// Outputs are byte-deterministic for fixed inputs.
void run_audit(const AuditOptions& opt);

struct PathOptions {
    // Either data_path+schema_path (pipeline input) or context_path (direct
    // distributions JSON: labels, p0, p1, output_labels, channel rows).
    std::string data_path;
    std::string schema_path;
    std::string context_path;
    std::string schedule_path;
    std::string out_dir;
    double smooth = 0.0;
    ChannelSource channel_source = ChannelSource::Model;
    std::string cells_override;
};

// Traces the lambda schedule and writes path.csv under out_dir.
void run_path(const PathOptions& opt);

// Oracle battery on seeded random instances; writes a JSON report to `out`
// and returns the number of failed checks.
int run_selftest(std::ostream& out);

// Schedule file: one "l1,l2,l3,l4" row per line, '#' comments allowed.
// Throws MalformedSchedule naming the offending line.
std::vector<LambdaWeights> parse_schedule_file(const std::string& path);

AuditContext parse_context_json(const std::string& text);
AuditContext parse_context_file(const std::string& path);

// Replaces the edges of numeric features in place, e.g. "Age=21|35|50".
void apply_cells_override(DatasetSchema& schema, const std::string& spec);

}  // namespace fairaudit
