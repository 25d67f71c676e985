// fdrkit — gate-level functional-derating prediction pipeline.
// Subcommands mirror the pipeline stages; `all` chains every stage.

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "fdrkit/pipeline.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::optional<uint64_t> seed;
    std::optional<int> jobs;
    std::optional<std::string> out_dir;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "pipeline config file")->required();
    cmd->add_option("--seed", opts.seed, "override the global seed");
    cmd->add_option("--jobs", opts.jobs, "worker cap for parallel stages");
    cmd->add_option("--out", opts.out_dir, "override the output directory");
}

fdrkit::PipelineConfig load_config(const CommonOpts& opts) {
    fdrkit::PipelineConfig cfg = fdrkit::PipelineConfig::load(opts.config_path);
    if (opts.seed) {
        cfg.seed = *opts.seed;
        cfg.apply_seed();
    }
    if (opts.jobs) cfg.jobs = *opts.jobs;
    if (opts.out_dir) cfg.out_dir = *opts.out_dir;
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"gate-level functional-derating prediction pipeline"};
    app.require_subcommand(1);

    CommonOpts graph_opts, embed_opts, campaign_opts, train_opts, all_opts;
    CLI::App* graph = app.add_subcommand("graph", "netlist -> probabilistic graph (GML)");
    add_common(graph, graph_opts);
    CLI::App* embed = app.add_subcommand("embed", "GML -> node feature vectors (CSV)");
    add_common(embed, embed_opts);
    CLI::App* campaign =
        app.add_subcommand("campaign", "SEU injection campaign -> FDR ground truth (CSV)");
    add_common(campaign, campaign_opts);
    CLI::App* train =
        app.add_subcommand("train-eval", "train SVR + DNN on embeddings vs FDR and evaluate");
    add_common(train, train_opts);
    CLI::App* all = app.add_subcommand("all", "run every stage in order");
    add_common(all, all_opts);

    CLI11_PARSE(app, argc, argv);

    try {
        if (graph->parsed()) {
            fdrkit::cmd_graph(load_config(graph_opts));
            std::cout << "wrote circuit.gml\n";
        } else if (embed->parsed()) {
            fdrkit::cmd_embed(load_config(embed_opts));
            std::cout << "wrote embeddings.csv\n";
        } else if (campaign->parsed()) {
            fdrkit::cmd_campaign(load_config(campaign_opts));
            std::cout << "wrote fdr.csv\n";
        } else if (train->parsed()) {
            fdrkit::cmd_train_eval(load_config(train_opts));
            std::cout << "wrote reports and models\n";
        } else if (all->parsed()) {
            fdrkit::PipelineConfig cfg = load_config(all_opts);
            fdrkit::run_all(cfg);
            std::cout << "pipeline complete; artifacts in " << cfg.out_dir.string() << "\n";
        }
    } catch (const fdrkit::Error& e) {
        std::cerr << e.formatted() << "\n";
        return fdrkit::exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "ERROR " << e.what() << "\n";
        return 1;
    }
    return 0;
}
