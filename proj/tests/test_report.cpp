#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fairaudit/report.hpp"

using namespace fairaudit;
namespace fs = std::filesystem;

namespace {

std::string fixture_dir() {
    const char* env = std::getenv("FAIRAUDIT_FIXTURES");
    return env ? env : "tests/fixtures";
}

fs::path temp_root() {
    return fs::temp_directory_path() / "fairaudit_report_tests";
}

std::string write_temp(const std::string& name, const std::string& content) {
    fs::create_directories(temp_root());
    const fs::path path = temp_root() / name;
    std::ofstream out(path, std::ios::binary);
    out << content;
    out.close();
    return path.string();
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE_MESSAGE(in.good(), "missing file: " << path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Numeric leaves within relative 1e-9, everything else exact.
void check_json_close(const nlohmann::json& got, const nlohmann::json& want,
                      const std::string& where) {
    if (want.is_number_float() && got.is_number()) {
        const double w = want.get<double>();
        const double g = got.get<double>();
        const double tol = 1e-9 * std::max(1.0, std::abs(w));
        CHECK_MESSAGE(std::abs(g - w) <= tol, where << ": " << g << " vs " << w);
        return;
    }
    if (want.is_object()) {
        REQUIRE_MESSAGE(got.is_object(), where << ": expected object");
        for (const auto& [key, value] : want.items()) {
            REQUIRE_MESSAGE(got.contains(key), where << ": missing key " << key);
            check_json_close(got.at(key), value, where + "." + key);
        }
        CHECK_MESSAGE(got.size() == want.size(), where << ": extra keys");
        return;
    }
    if (want.is_array()) {
        REQUIRE_MESSAGE(got.is_array(), where << ": expected array");
        REQUIRE_MESSAGE(got.size() == want.size(), where << ": length mismatch");
        for (std::size_t i = 0; i < want.size(); ++i)
            check_json_close(got.at(i), want.at(i), where + "[" + std::to_string(i) + "]");
        return;
    }
    CHECK_MESSAGE(got == want, where << ": " << got.dump() << " vs " << want.dump());
}

}  // namespace

TEST_CASE("parse_schedule_file") {
    SUBCASE("comments and blank lines are skipped") {
        const std::string path = write_temp("sched_ok.txt",
                                            "# warm-up\n"
                                            "\n"
                                            "0,1,0,1\n"
                                            "  0.5, 1.5, 0, 2  # trailing comment\n");
        const auto sched = parse_schedule_file(path);
        REQUIRE(sched.size() == 2);
        CHECK(sched[0].l2 == 1.0);
        CHECK(sched[1].l1 == 0.5);
        CHECK(sched[1].l4 == 2.0);
    }
    SUBCASE("wrong arity names the line") {
        const std::string path = write_temp("sched_arity.txt", "0,1,0\n");
        CHECK_THROWS_WITH_AS(parse_schedule_file(path), doctest::Contains("line 1"), Error);
    }
    SUBCASE("negative weight names the line") {
        const std::string path = write_temp("sched_neg.txt", "0,1,0,1\n0,-1,0,1\n");
        CHECK_THROWS_WITH_AS(parse_schedule_file(path), doctest::Contains("line 2"), Error);
    }
    SUBCASE("an empty schedule is rejected") {
        const std::string path = write_temp("sched_empty.txt", "# nothing here\n");
        try {
            parse_schedule_file(path);
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::MalformedSchedule);
        }
    }
}

TEST_CASE("apply_cells_override") {
    DatasetSchema schema;
    FeatureSpec age;
    age.name = "Age";
    age.kind = FeatureKind::Numeric;
    age.edges = {25.0, 45.0};
    age.bin_labels = {"<25", "25 to 45", ">45"};
    FeatureSpec charge;
    charge.name = "Charge";
    charge.kind = FeatureKind::Categorical;
    charge.categories = {"F", "M"};
    schema.features = {age, charge};
    schema.outcome = "y";
    schema.group = "g";
    schema.group_zero_value = "A";
    schema.group_one_value = "B";

    SUBCASE("replaces edges and clears stale labels") {
        apply_cells_override(schema, "Age=21|35|50");
        CHECK(schema.features[0].edges == std::vector<double>{21.0, 35.0, 50.0});
        CHECK(schema.features[0].bin_labels.empty());
    }
    SUBCASE("unknown feature") {
        CHECK_THROWS_WITH_AS(apply_cells_override(schema, "Height=1|2"),
                             doctest::Contains("Height"), Error);
    }
    SUBCASE("categorical feature is not overridable") {
        CHECK_THROWS_AS(apply_cells_override(schema, "Charge=1|2"), Error);
    }
    SUBCASE("unparseable edge") {
        CHECK_THROWS_AS(apply_cells_override(schema, "Age=21|abc"), Error);
    }
}

TEST_CASE("parse_context_json") {
    SUBCASE("well formed") {
        const AuditContext ctx = parse_context_json(R"({
            "labels": ["a", "b"],
            "p0": [0.8, 0.2],
            "p1": [0.2, 0.8],
            "output_labels": ["0", "1"],
            "channel": [[0.25, 0.75], [0.9, 0.1]]
        })");
        CHECK(ctx.input_size() == 2);
        CHECK(ctx.p0().mass(0) == doctest::Approx(0.8).epsilon(1e-12));
        CHECK(ctx.channel().prob(1, 0) == doctest::Approx(0.9).epsilon(1e-12));
    }
    SUBCASE("missing key") {
        CHECK_THROWS_AS(parse_context_json(R"({"labels": ["a"], "p0": [1.0]})"), Error);
    }
    SUBCASE("malformed JSON") {
        CHECK_THROWS_AS(parse_context_json("{"), Error);
    }
}

TEST_CASE("run_audit writes the full report set") {
    const fs::path out = temp_root() / "audit_out";
    fs::remove_all(out);
    AuditOptions opt;
    opt.data_path = fixture_dir() + "/synthetic_compas.csv";
    opt.schema_path = fixture_dir() + "/synthetic_schema.json";
    opt.out_dir = out.string();
    run_audit(opt);

    CHECK(fs::exists(out / "report.json"));
    CHECK(fs::exists(out / "fstar_by_cell.csv"));
    CHECK(fs::exists(out / "densities"));

    const auto report = nlohmann::json::parse(slurp(out / "report.json"));
    CHECK(report.at("mode") == "audit");
    CHECK(report.at("dataset").at("records") == 200);
    CHECK(report.at("correction").at("delta_opt").get<double>() < 0.0);

    SUBCASE("matches the golden report") {
        const fs::path golden = fs::path(fixture_dir()).parent_path() / "golden" /
                                "synthetic_report.json";
        if (fs::exists(golden)) {
            const auto want = nlohmann::json::parse(slurp(golden));
            check_json_close(report, want, "report");
        } else {
            MESSAGE("golden report not generated yet; skipping comparison");
        }
    }

    SUBCASE("per-cell table carries one row per cell plus a header") {
        const std::string table = slurp(out / "fstar_by_cell.csv");
        const auto cells = report.at("dataset").at("cells").get<std::size_t>();
        std::size_t lines = 0;
        for (char c : table)
            if (c == '\n') ++lines;
        CHECK(lines == cells + 1);
        CHECK(table.rfind("cell,", 0) == 0);
    }
}

TEST_CASE("run_audit on a no-disparity table degrades gracefully") {
    // Both groups identical: nothing to correct, report flags degeneracy.
    std::string csv = "g,v,y\n";
    for (int i = 0; i < 6; ++i) {
        const std::string v = i % 2 == 0 ? "5" : "15";
        const std::string y = i % 2 == 0 ? "1" : "0";
        csv += "A," + v + "," + y + "\n";
        csv += "B," + v + "," + y + "\n";
    }
    const std::string data = write_temp("flat.csv", csv);
    const std::string schema = write_temp("flat_schema.json", R"({
        "features": [{"name": "v", "kind": "numeric", "edges": [10]}],
        "outcome": "y",
        "group": "g",
        "group_zero_value": "A",
        "group_one_value": "B"
    })");
    const fs::path out = temp_root() / "flat_out";
    fs::remove_all(out);
    AuditOptions opt;
    opt.data_path = data;
    opt.schema_path = schema;
    opt.out_dir = out.string();
    opt.channel_source = ChannelSource::Empirical;
    run_audit(opt);

    const auto report = nlohmann::json::parse(slurp(out / "report.json"));
    CHECK(report.at("correction").at("degenerate") == true);
    CHECK(report.at("correction").at("delta_opt").get<double>() == 0.0);
    CHECK(report.at("prototypes").at("argmax").is_null());
    CHECK_FALSE(fs::exists(out / "densities"));
}

TEST_CASE("run_path") {
    const std::string context = write_temp("ctx.json", R"({
        "labels": ["a", "b", "c"],
        "p0": [0.5, 0.3, 0.2],
        "p1": [0.2, 0.3, 0.5],
        "output_labels": ["0", "1"],
        "channel": [[0.8, 0.2], [0.4, 0.6], [0.3, 0.7]]
    })");

    SUBCASE("row per schedule entry; endpoint objective vanishes") {
        const std::string schedule =
            write_temp("sched_run.txt", "1,0,0,0\n1,0,0,0.5\n1,0,0,1\n");
        const fs::path out = temp_root() / "path_out";
        fs::remove_all(out);
        PathOptions opt;
        opt.context_path = context;
        opt.schedule_path = schedule;
        opt.out_dir = out.string();
        run_path(opt);

        std::ifstream in(out / "path.csv");
        std::string header;
        REQUIRE(std::getline(in, header));
        CHECK(header ==
              "l1,l2,l3,l4,objective,kl_qx_p0,kl_qx_p1,kl_qy_q0,kl_qy_q1,iterations,"
              "converged,non_unique");
        std::vector<std::vector<std::string>> rows;
        std::string line;
        while (std::getline(in, line)) {
            std::vector<std::string> fields;
            std::stringstream ss(line);
            std::string field;
            while (std::getline(ss, field, ',')) fields.push_back(field);
            rows.push_back(fields);
        }
        REQUIRE(rows.size() == 3);
        // Pure l1: the minimizer is p0 itself.
        CHECK(std::abs(std::stod(rows[0][4])) < 1e-10);
        CHECK(rows[0][10] == "1");
        // Raising l4 with l1 fixed pulls q_y toward q1: its divergence shrinks.
        const double d0 = std::stod(rows[0][8]);
        const double d1 = std::stod(rows[1][8]);
        const double d2 = std::stod(rows[2][8]);
        CHECK(d1 <= d0 + 1e-12);
        CHECK(d2 <= d1 + 1e-12);
    }

    SUBCASE("context and data inputs are mutually exclusive") {
        PathOptions opt;
        opt.context_path = context;
        opt.data_path = "whatever.csv";
        opt.schema_path = "whatever.json";
        opt.schedule_path = write_temp("sched_tiny.txt", "1,0,0,0\n");
        opt.out_dir = (temp_root() / "never").string();
        CHECK_THROWS_AS(run_path(opt), Error);
        PathOptions neither;
        neither.schedule_path = opt.schedule_path;
        neither.out_dir = opt.out_dir;
        CHECK_THROWS_AS(run_path(neither), Error);
    }
}

TEST_CASE("run_selftest passes its own battery") {
    std::ostringstream out;
    const int failures = run_selftest(out);
    CHECK(failures == 0);
    const auto report = nlohmann::json::parse(out.str());
    CHECK(report.at("selftest").at("failed") == 0);
    CHECK(report.at("selftest").at("checks").size() == 8);
}
