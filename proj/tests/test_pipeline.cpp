#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "fdrkit/embedding.hpp"
#include "fdrkit/gml.hpp"
#include "fdrkit/pipeline.hpp"
#include "fdrkit/util.hpp"

#include <json.hpp>

using namespace fdrkit;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = FDRKIT_FIXTURE_DIR;

fs::path fresh_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / ("fdrkit_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

PipelineConfig bench_config(const fs::path& out_dir) {
    PipelineConfig cfg = PipelineConfig::load(kFixtures / "bench.cfg");
    cfg.out_dir = out_dir;
    return cfg;
}

} // namespace

TEST_CASE("config loading: values land and seeds fan out") {
    PipelineConfig cfg = PipelineConfig::load(kFixtures / "bench.cfg");
    CHECK(cfg.seed == 11);
    CHECK(cfg.train_fraction == 0.6);
    CHECK(cfg.walk.walk_length == 20);
    CHECK(cfg.walk.dims == 8);
    CHECK(cfg.svr.gamma == 0.01);
    CHECK(cfg.svr.epsilon == 0.0125);
    CHECK(cfg.svr.c == 10.0);
    CHECK(cfg.mlp.layer_sizes == std::vector<int>{126, 64, 36, 12, 1});
    CHECK(cfg.mlp.batch_size == 10);
    CHECK(cfg.stimulus_cycles == 32);
    CHECK(cfg.plan.mode == FaultPlan::Mode::Exhaustive);

    // per-stage seeds differ from each other and from the global seed
    CHECK(cfg.walk.seed != cfg.plan.seed);
    CHECK(cfg.walk.seed != cfg.svr.seed);
    CHECK(cfg.svr.seed != cfg.mlp.seed);
}

TEST_CASE("config loading: errors") {
    CHECK_THROWS_AS(PipelineConfig::load(kFixtures / "no_such.cfg"), Error);

    fs::path dir = fresh_dir("cfg_errors");
    write_file(dir / "bad.cfg", "[paths]\nnetlist = x.v\ncell_library = y.lib\ntypo_key = 1\n");
    try {
        PipelineConfig::load(dir / "bad.cfg");
        FAIL("expected");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::invalid_params);
        CHECK(std::string(e.what()).find("typo_key") != std::string::npos);
    }

    write_file(dir / "nokey.cfg", "seed = 1\n");
    CHECK_THROWS_AS(PipelineConfig::load(dir / "nokey.cfg"), Error);
}

TEST_CASE("cmd_graph writes a valid gml file; missing netlist is a clean error") {
    fs::path out = fresh_dir("graph_out");
    PipelineConfig cfg = PipelineConfig::load(kFixtures / "toy_counter.cfg");
    cfg.out_dir = out;
    cmd_graph(cfg);
    REQUIRE(fs::exists(out / "circuit.gml"));
    CircuitGraph g = read_gml(read_file(out / "circuit.gml"));
    CHECK(g.node_count() == 9);

    cfg.netlist_path = kFixtures / "missing.v";
    try {
        cmd_graph(cfg);
        FAIL("expected");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::file_not_found);
        CHECK(std::string(e.what()).find("missing.v") != std::string::npos);
        CHECK(exit_code_for(e.code()) == 3);
    }
}

TEST_CASE("malformed netlist surfaces a located syntax error") {
    fs::path dir = fresh_dir("badnetlist");
    write_file(dir / "broken.v", "module m (a, y);\n input a\n output y;\nendmodule\n");
    PipelineConfig cfg = PipelineConfig::load(kFixtures / "toy_counter.cfg");
    cfg.out_dir = dir / "out";
    cfg.netlist_path = dir / "broken.v";
    try {
        cmd_graph(cfg);
        FAIL("expected");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::syntax_error);
        REQUIRE(e.where().has_value());
        CHECK(e.where()->line == 3);
        CHECK(exit_code_for(e.code()) == 4);
    }
}

TEST_CASE("full pipeline on the bench fixture") {
    fs::path out = fresh_dir("bench_run");
    PipelineConfig cfg = bench_config(out);
    run_all(cfg);

    for (const char* name :
         {"circuit.gml", "embeddings.csv", "embeddings.bin", "fdr.csv", "report_svr.json",
          "report_dnn.json", "reports.csv", "predictions_svr.csv", "predictions_dnn.csv",
          "scatter_svr.svg", "scatter_dnn.svg", "sorted_svr.svg", "sorted_dnn.svg",
          "ci_comparison.csv", "svr_model.bin", "svr_model.json", "dnn_model.bin",
          "dnn_model.json", "timing.log"})
        CHECK(fs::exists(out / name));

    // 20 flip-flops: 12 train / 8 test
    auto report = nlohmann::json::parse(read_file(out / "report_svr.json"));
    CHECK(report["n_test"] == 8);
    CHECK(report["split"]["train"].size() == 12);
    CHECK(std::isfinite(report["metrics"]["mse"].get<double>()));
    CHECK(std::isfinite(report["metrics"]["r2"].get<double>()));
    CHECK(std::isfinite(report["metrics"]["evs"].get<double>()));

    // non-FF nodes are embedded but dropped from training, and listed
    auto dropped = report["dropped_labels"];
    CHECK(dropped.size() > 0);
    bool has_clock = false;
    for (const auto& label : dropped)
        if (label.get<std::string>().rfind("clk", 0) == 0) has_clock = true;
    CHECK(has_clock);

    // embeddings rows = graph nodes, labels in graph order
    CircuitGraph g = read_gml(read_file(out / "circuit.gml"));
    EmbeddingMatrix emb = read_embeddings_csv(read_file(out / "embeddings.csv"));
    CHECK(emb.rows() == g.node_count());
    CHECK(emb.dims == 8);

    // prediction csv has one row per test sample
    auto pred_lines = split(read_file(out / "predictions_svr.csv"), '\n');
    CHECK(pred_lines.size() == 1 + 8 + 1); // header + rows + empty tail piece
}

TEST_CASE("pipeline determinism: identical runs produce identical bytes") {
    fs::path out1 = fresh_dir("det_run1");
    fs::path out2 = fresh_dir("det_run2");
    run_all(bench_config(out1));
    run_all(bench_config(out2));

    for (const char* name :
         {"circuit.gml", "embeddings.csv", "fdr.csv", "report_svr.json", "report_dnn.json",
          "reports.csv", "predictions_svr.csv", "predictions_dnn.csv", "ci_comparison.csv",
          "scatter_svr.svg", "sorted_dnn.svg"}) {
        CHECK(read_file(out1 / name) == read_file(out2 / name));
    }
}

TEST_CASE("seed changes the outputs") {
    fs::path out1 = fresh_dir("seed_run1");
    fs::path out2 = fresh_dir("seed_run2");
    PipelineConfig a = bench_config(out1);
    PipelineConfig b = bench_config(out2);
    b.seed = 12;
    b.apply_seed();
    run_all(a);
    run_all(b);
    CHECK(read_file(out1 / "embeddings.csv") != read_file(out2 / "embeddings.csv"));
}

TEST_CASE("train-eval consumes exactly the stage artifacts (composability)") {
    fs::path out = fresh_dir("compose");
    PipelineConfig cfg = bench_config(out);
    cmd_graph(cfg);
    cmd_embed(cfg);
    cmd_campaign(cfg);
    cmd_train_eval(cfg); // no hidden state: works from the files alone
    CHECK(fs::exists(out / "report_svr.json"));
}

TEST_CASE("label mismatch is reported with the offending flip-flop") {
    fs::path out = fresh_dir("mismatch");
    write_file(out / "embeddings.csv", "label,f0,f1\nff_a,0.1,0.2\nother,0.3,0.4\n");
    write_file(out / "fdr.csv", "ff_name,injections,failures,fdr\nff_a,16,8,0.5\nff_b,16,4,0.25\n");

    PipelineConfig cfg = bench_config(out);
    try {
        cmd_train_eval(cfg);
        FAIL("expected");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::label_mismatch);
        CHECK(std::string(e.what()).find("ff_b") != std::string::npos);
        CHECK(exit_code_for(e.code()) == 7);
    }
}

TEST_CASE("stimulus file is honored when configured") {
    fs::path out = fresh_dir("stimfile");
    PipelineConfig cfg = PipelineConfig::load(kFixtures / "toy_counter.cfg");
    cfg.out_dir = out;
    write_file(out / "toy.stim", "inputs clk en\ninit 0\nvector 2\nvector 2\nvector 2\nvector 2\n");
    cfg.stimulus_path = out / "toy.stim";
    cmd_campaign(cfg);
    FdrTable table = FdrTable::from_csv(read_file(out / "fdr.csv"));
    REQUIRE(table.rows.size() == 2);
    for (const FdrRow& row : table.rows) CHECK(row.injections == 4);
}

TEST_CASE("dump_walks emits a corpus file of node-id lines") {
    fs::path out = fresh_dir("walkdump");
    PipelineConfig cfg = bench_config(out);
    cfg.dump_walks = true;
    cmd_graph(cfg);
    cmd_embed(cfg);
    REQUIRE(fs::exists(out / "walks.txt"));
    std::string walks = read_file(out / "walks.txt");
    CircuitGraph g = read_gml(read_file(out / "circuit.gml"));
    size_t lines = 0;
    for (std::string_view line : split(walks, '\n'))
        if (!trim(line).empty()) ++lines;
    CHECK(lines == g.node_count() * size_t(cfg.walk.walks_per_node));
}
