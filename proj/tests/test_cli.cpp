#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "amkm/cli/config.hpp"
#include "amkm/cli/runner.hpp"

using namespace amkm;
using namespace amkm::cli;

namespace {

const char* kSyntheticConf =
    "# d=1 shifted gaussians\n"
    "method = kmm\n"
    "data.source = synthetic\n"
    "data.synthetic.d = 1\n"
    "data.synthetic.reference_mean = 0.5\n"
    "data.synthetic.n_m = 40\n"
    "data.synthetic.n_r = 200\n"
    "kernel.policy = median\n"
    "params.lambda = 1e-3\n"
    "seed = 3\n"
    "repeats = 2\n"
    "timing = false\n"
    "output = out.csv\n";

RunConfig synthetic_config() { return make_run_config(parse_config_text(kSyntheticConf)); }

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempPath {
    std::string path;
    explicit TempPath(std::string p) : path(std::move(p)) {}
    ~TempPath() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("config parse, overrides and round-trip") {
    KeyValues kv = parse_config_text(kSyntheticConf);
    CHECK(kv.at("method") == "kmm");
    CHECK(kv.at("data.synthetic.n_m") == "40");

    apply_override(kv, "method=amkm");
    apply_override(kv, "params.t = 3");
    CHECK(kv.at("method") == "amkm");
    CHECK(kv.at("params.t") == "3");

    KeyValues reparsed = parse_config_text(dump_config(kv));
    CHECK(reparsed == kv);
}

TEST_CASE("config rejects unknown keys and malformed lines") {
    CHECK_THROWS_WITH_AS(parse_config_text("methd = kmm\n"), doctest::Contains("unknown key"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_config_text("method kmm\n"), doctest::Contains("key = value"),
                         std::invalid_argument);
    KeyValues kv;
    CHECK_THROWS_AS(apply_override(kv, "nope=1"), std::invalid_argument);
    CHECK_THROWS_AS(apply_override(kv, "no-equals"), std::invalid_argument);
}

TEST_CASE("config validation reports the offending field") {
    KeyValues kv = parse_config_text(kSyntheticConf);
    kv["params.t"] = "0";
    CHECK_THROWS_WITH_AS(make_run_config(kv), doctest::Contains("params.t"),
                         std::invalid_argument);

    kv = parse_config_text(kSyntheticConf);
    kv["method"] = "locKMM";
    CHECK_THROWS_WITH_AS(make_run_config(kv), doctest::Contains("method"), std::invalid_argument);

    kv = parse_config_text(kSyntheticConf);
    kv["kernel.policy"] = "fixed";
    CHECK_THROWS_WITH_AS(make_run_config(kv), doctest::Contains("kernel.sigma"),
                         std::invalid_argument);

    kv = parse_config_text(kSyntheticConf);
    kv["data.csv.path"] = "x.csv";
    CHECK_THROWS_WITH_AS(make_run_config(kv), doctest::Contains("data.source"),
                         std::invalid_argument);

    kv = parse_config_text(kSyntheticConf);
    kv["truth"] = "full-kmm-oracle";
    RunConfig oracle_cfg = make_run_config(kv);
    CHECK(oracle_cfg.truth == TruthMode::full_kmm_oracle);
}

TEST_CASE("run emits repeats plus an aggregate with the exact mean") {
    RunConfig cfg = synthetic_config();
    auto records = run(cfg);
    REQUIRE(records.size() == cfg.repeats + 1);
    for (std::size_t r = 0; r < cfg.repeats; ++r) {
        CHECK(records[r].method == "kmm");
        CHECK(records[r].seed == cfg.seed + r);
        CHECK(records[r].nmse > 0.0);
        CHECK(records[r].mmd2 >= 0.0);
        CHECK(records[r].truth_mode == "analytic");
    }
    const auto& agg = records.back();
    CHECK(agg.method == "kmm:mean");
    double mean = 0.0;
    for (std::size_t r = 0; r < cfg.repeats; ++r) mean += records[r].nmse;
    mean /= static_cast<double>(cfg.repeats);
    CHECK(std::abs(agg.nmse - mean) <= 1e-12);
}

TEST_CASE("identical config and seed produce identical output bytes") {
    RunConfig cfg = synthetic_config();
    TempPath out1("cli_det_1.csv"), out2("cli_det_2.csv");
    cfg.output = out1.path;
    write_results(run(cfg), cfg);
    cfg.output = out2.path;
    write_results(run(cfg), cfg);
    std::string a = slurp(out1.path);
    std::string b = slurp(out2.path);
    CHECK(!a.empty());
    CHECK(a == b);
}

TEST_CASE("csv records are schema-complete in the pinned column order") {
    RunConfig cfg = synthetic_config();
    TempPath out("cli_schema.csv");
    cfg.output = out.path;
    write_results(run(cfg), cfg);

    std::ifstream in(out.path);
    std::string header;
    std::getline(in, header);
    CHECK(header ==
          "method,n_m,n_r,t,n,n_s,n_h,partitions,lambda,sigma,seed,nmse,mmd2,wallclock_ms,"
          "truth_mode");
    std::string line;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ++rows;
        CHECK(std::count(line.begin(), line.end(), ',') == 14);
    }
    CHECK(rows == cfg.repeats + 1);
}

TEST_CASE("jsonl output mirrors the field names") {
    RunConfig cfg = synthetic_config();
    cfg.format = OutputFormat::jsonl;
    cfg.repeats = 1;
    TempPath out("cli_schema.jsonl");
    cfg.output = out.path;
    write_results(run(cfg), cfg);

    std::string text = slurp(out.path);
    CHECK(text.find("\"method\":\"kmm\"") != std::string::npos);
    for (const char* field : {"n_m", "n_r", "t", "n_s", "n_h", "partitions", "lambda", "sigma",
                              "seed", "nmse", "mmd2", "wallclock_ms", "truth_mode"}) {
        CHECK(text.find("\"" + std::string(field) + "\":") != std::string::npos);
    }
}

TEST_CASE("single-value sweep equals the plain run aggregate") {
    RunConfig cfg = synthetic_config();
    cfg.sweep_axis = "n_r";
    cfg.sweep_values = {200};
    auto swept = sweep(cfg);
    REQUIRE(swept.size() == 1);

    auto records = run(cfg);
    const auto& agg = records.back();
    CHECK(swept[0].nmse == agg.nmse);
    CHECK(swept[0].mmd2 == agg.mmd2);
    CHECK(swept[0].n_r == 200);
}

TEST_CASE("sweep emits one aggregate per value in order") {
    RunConfig cfg = synthetic_config();
    cfg.method = "amkm";
    cfg.params.t = 2;
    cfg.repeats = 1;
    cfg.sweep_axis = "n";
    cfg.sweep_values = {20, 40, 60, 80};
    auto swept = sweep(cfg);
    REQUIRE(swept.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(swept[i].params.n == cfg.sweep_values[i]);
        CHECK(swept[i].method == "amkm");
    }
}

TEST_CASE("sweep rejects inapplicable axes") {
    RunConfig cfg = synthetic_config();
    cfg.sweep_axis = "n_s";
    cfg.sweep_values = {10, 20};
    CHECK_THROWS_WITH_AS(sweep(cfg), doctest::Contains("sweep.axis"), std::invalid_argument);
}

TEST_CASE("compare runs every method on the shared split") {
    RunConfig cfg = synthetic_config();
    cfg.repeats = 1;
    cfg.params.t = 2;
    cfg.params.n = 30;
    cfg.params.n_s = 60;
    cfg.params.n_h = 60;
    cfg.params.partitions = 3;
    auto rows = compare(cfg);
    REQUIRE(rows.size() == 4);
    for (const auto& row : rows) {
        CHECK(row.n_m == rows[0].n_m);
        CHECK(row.n_r == rows[0].n_r);
        CHECK(row.seed == rows[0].seed);
    }
    CHECK(rows[0].method == "kmm");
    CHECK(rows[1].method == "glokmm");
    CHECK(rows[2].method == "amkm");
    CHECK(rows[3].method == "enskmm");
}

TEST_CASE("scalable emits one record per batch step with growing n_r") {
    RunConfig cfg = synthetic_config();
    cfg.method = "amkm";
    cfg.repeats = 1;
    cfg.params.t = 2;
    cfg.params.n = 20;
    cfg.params.n_s = 40;
    cfg.scalable_initial = 150;
    cfg.scalable_batch = 50;
    cfg.scalable_batches = 3;
    auto records = scalable(cfg);
    REQUIRE(records.size() == 3);
    for (std::size_t i = 0; i < records.size(); ++i) {
        CHECK(records[i].n_r == cfg.scalable_initial + (i + 1) * cfg.scalable_batch);
        CHECK(records[i].nmse >= 0.0);
    }

    cfg.scalable_batches = 0;
    CHECK(scalable(cfg).empty());
}

TEST_CASE("csv data source round-trips through split and oracle truth") {
    TempPath csv("cli_data.csv");
    {
        std::ofstream out(csv.path);
        std::mt19937_64 eng(7);
        std::uniform_real_distribution<double> dist(-1, 1);
        for (int i = 0; i < 120; ++i) {
            out << dist(eng) << ',' << dist(eng) << '\n';
        }
    }
    KeyValues kv;
    kv["method"] = "kmm";
    kv["data.source"] = "csv";
    kv["data.csv.path"] = csv.path;
    kv["data.split.n_matching"] = "30";
    kv["data.split.n_reference"] = "80";
    kv["repeats"] = "1";
    kv["seed"] = "5";
    kv["timing"] = "false";
    kv["standardize"] = "true";
    RunConfig cfg = make_run_config(kv);
    CHECK(cfg.truth == TruthMode::full_kmm_oracle);

    auto records = run(cfg);
    REQUIRE(records.size() == 2);
    CHECK(records[0].n_m == 30);
    CHECK(records[0].n_r == 80);
    CHECK(records[0].truth_mode == "full-kmm-oracle");
    CHECK(records[0].nmse >= 0.0);
}

TEST_CASE("pre-split csv pair drives a run") {
    TempPath mcsv("cli_matching.csv"), rcsv("cli_reference.csv");
    {
        std::ofstream m(mcsv.path), r(rcsv.path);
        std::mt19937_64 eng(8);
        std::uniform_real_distribution<double> dist(-1, 1);
        for (int i = 0; i < 20; ++i) m << dist(eng) << ',' << dist(eng) << '\n';
        for (int i = 0; i < 60; ++i) r << dist(eng) + 0.3 << ',' << dist(eng) << '\n';
    }
    KeyValues kv;
    kv["method"] = "enskmm";
    kv["data.source"] = "csv";
    kv["data.csv.matching"] = mcsv.path;
    kv["data.csv.reference"] = rcsv.path;
    kv["params.partitions"] = "3";
    kv["repeats"] = "1";
    kv["timing"] = "false";
    auto records = run(make_run_config(kv));
    REQUIRE(records.size() == 2);
    CHECK(records[0].n_m == 20);
    CHECK(records[0].n_r == 60);
    CHECK(records[0].truth_mode == "full-kmm-oracle");
}

TEST_CASE("missing output path is a field-level error") {
    RunConfig cfg = synthetic_config();
    cfg.output.clear();
    auto records = run(cfg);
    CHECK_THROWS_WITH_AS(write_results(records, cfg), doctest::Contains("output"),
                         std::invalid_argument);
}
