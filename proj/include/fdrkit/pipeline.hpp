#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "fdrkit/campaign.hpp"
#include "fdrkit/metrics.hpp"
#include "fdrkit/mlp.hpp"
#include "fdrkit/svr.hpp"
#include "fdrkit/walks.hpp"

namespace fdrkit {

/// Everything the pipeline subcommands need, from one config file. The
/// single global seed fans out to stage seeds hashed by stage name, so any
/// stage reruns reproducibly on its own.
struct PipelineConfig {
    std::filesystem::path netlist_path;
    std::filesystem::path cell_library_path;
    std::optional<std::filesystem::path> stimulus_path; // absent -> random stimulus
    std::filesystem::path out_dir = "out";

    uint64_t seed = 1;
    int jobs = 1;
    double train_fraction = 0.6;

    WalkParams walk;
    bool dump_walks = false;

    size_t stimulus_cycles = 256; // random stimulus only
    FaultPlan plan;

    SvrParams svr;
    MlpParams mlp;

    static PipelineConfig load(const std::filesystem::path& path);
    void apply_seed(); // derive per-stage seeds from the global seed

    std::filesystem::path out(const std::string& name) const { return out_dir / name; }
};

/// netlist -> validated graph -> out/circuit.gml
void cmd_graph(const PipelineConfig& cfg);

/// out/circuit.gml -> out/embeddings.csv (+ .bin cache, optional walks.txt)
void cmd_embed(const PipelineConfig& cfg);

/// netlist + stimulus -> fault campaign -> out/fdr.csv
void cmd_campaign(const PipelineConfig& cfg);

/// embeddings.csv + fdr.csv -> models, reports, prediction CSVs and plots
void cmd_train_eval(const PipelineConfig& cfg);

/// All four stages in order.
void run_all(const PipelineConfig& cfg);

/// Maps an Errc to the documented process exit code.
int exit_code_for(Errc code);

} // namespace fdrkit
