#include "fdrkit/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <iostream>
#include <set>
#include <unordered_map>

#include "fdrkit/embedding.hpp"
#include "fdrkit/gml.hpp"
#include "fdrkit/svg_plot.hpp"
#include "fdrkit/util.hpp"

namespace fdrkit {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Config file
// ---------------------------------------------------------------------------

namespace {

struct ConfigEntry {
    std::string value;
    int line;
};

using Section = std::unordered_map<std::string, ConfigEntry>;

struct RawConfig {
    std::unordered_map<std::string, Section> sections;
    fs::path file;

    Error fail(const std::string& msg, int line) const {
        return Error(Errc::invalid_params, msg, SourceLoc{file.string(), line, 1});
    }
};

RawConfig parse_config_text(const std::string& text, const fs::path& file) {
    RawConfig raw;
    raw.file = file;
    std::string section; // global keys live in the "" section
    int line_no = 0;
    for (std::string_view raw_line : split(text, '\n')) {
        ++line_no;
        std::string_view line = trim(raw_line);
        if (auto hash = line.find('#'); hash != std::string_view::npos)
            line = trim(line.substr(0, hash));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw raw.fail("unterminated section header", line_no);
            section = std::string(trim(line.substr(1, line.size() - 2)));
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string_view::npos) throw raw.fail("expected key = value", line_no);
        std::string key(trim(line.substr(0, eq)));
        std::string value(trim(line.substr(eq + 1)));
        if (key.empty()) throw raw.fail("empty key", line_no);
        if (raw.sections[section].count(key))
            throw raw.fail("duplicate key '" + key + "'", line_no);
        raw.sections[section][key] = {value, line_no};
    }
    return raw;
}

class ConfigReader {
public:
    ConfigReader(RawConfig raw) : raw_(std::move(raw)) {}

    bool has(const std::string& section, const std::string& key) const {
        auto s = raw_.sections.find(section);
        return s != raw_.sections.end() && s->second.count(key);
    }

    std::string get_string(const std::string& section, const std::string& key) {
        const ConfigEntry& e = entry(section, key);
        return e.value;
    }

    double get_double(const std::string& section, const std::string& key) {
        const ConfigEntry& e = entry(section, key);
        double v;
        if (!parse_double(e.value, v))
            throw raw_.fail("'" + key + "' needs a number, got '" + e.value + "'", e.line);
        return v;
    }

    int64_t get_int(const std::string& section, const std::string& key) {
        const ConfigEntry& e = entry(section, key);
        int64_t v;
        if (!parse_i64(e.value, v))
            throw raw_.fail("'" + key + "' needs an integer, got '" + e.value + "'", e.line);
        return v;
    }

    uint64_t get_u64(const std::string& section, const std::string& key) {
        const ConfigEntry& e = entry(section, key);
        uint64_t v;
        if (!parse_u64(e.value, v))
            throw raw_.fail("'" + key + "' needs an unsigned integer, got '" + e.value + "'",
                            e.line);
        return v;
    }

    bool get_bool(const std::string& section, const std::string& key) {
        const ConfigEntry& e = entry(section, key);
        if (e.value == "true" || e.value == "1") return true;
        if (e.value == "false" || e.value == "0") return false;
        throw raw_.fail("'" + key + "' needs true/false", e.line);
    }

    void mark_known(const std::string& section, const std::string& key) {
        known_.insert(section + "\x1f" + key);
    }

    void reject_unknown() const {
        for (const auto& [section, entries] : raw_.sections)
            for (const auto& [key, e] : entries)
                if (!known_.count(section + "\x1f" + key))
                    throw raw_.fail("unknown config key '" + key + "' in section [" + section + "]",
                                    e.line);
    }

    const RawConfig& raw() const { return raw_; }

private:
    const ConfigEntry& entry(const std::string& section, const std::string& key) {
        auto s = raw_.sections.find(section);
        if (s == raw_.sections.end() || !s->second.count(key))
            throw Error(Errc::invalid_params, "config is missing [" + section + "] " + key + " (" +
                                                  raw_.file.string() + ")");
        mark_known(section, key);
        return s->second.at(key);
    }

    RawConfig raw_;
    std::set<std::string> known_;
};

} // namespace

PipelineConfig PipelineConfig::load(const fs::path& path) {
    ConfigReader reader(parse_config_text(read_file(path), path));
    PipelineConfig cfg;
    fs::path base = path.parent_path();
    auto resolve = [&](const std::string& p) {
        fs::path fp(p);
        return fp.is_absolute() ? fp : base / fp;
    };

    cfg.netlist_path = resolve(reader.get_string("paths", "netlist"));
    cfg.cell_library_path = resolve(reader.get_string("paths", "cell_library"));
    if (reader.has("paths", "stimulus"))
        cfg.stimulus_path = resolve(reader.get_string("paths", "stimulus"));
    if (reader.has("paths", "out_dir")) cfg.out_dir = resolve(reader.get_string("paths", "out_dir"));

    if (reader.has("", "seed")) cfg.seed = reader.get_u64("", "seed");
    if (reader.has("", "jobs")) cfg.jobs = static_cast<int>(reader.get_int("", "jobs"));
    if (reader.has("", "train_fraction")) cfg.train_fraction = reader.get_double("", "train_fraction");

    auto opt_double = [&](const std::string& sec, const std::string& key, double& out) {
        if (reader.has(sec, key)) out = reader.get_double(sec, key);
    };
    auto opt_int = [&](const std::string& sec, const std::string& key, int& out) {
        if (reader.has(sec, key)) out = static_cast<int>(reader.get_int(sec, key));
    };

    opt_double("walk", "p", cfg.walk.return_p);
    opt_double("walk", "q", cfg.walk.in_out_q);
    opt_int("walk", "length", cfg.walk.walk_length);
    opt_int("walk", "walks_per_node", cfg.walk.walks_per_node);
    opt_int("walk", "window", cfg.walk.window);
    opt_int("walk", "dims", cfg.walk.dims);
    opt_int("walk", "negatives", cfg.walk.negatives);
    opt_int("walk", "epochs", cfg.walk.epochs);
    opt_double("walk", "learning_rate", cfg.walk.learning_rate);
    if (reader.has("walk", "traversal")) {
        std::string t = reader.get_string("walk", "traversal");
        if (t == "directed")
            cfg.walk.traversal = Traversal::Directed;
        else if (t == "undirected")
            cfg.walk.traversal = Traversal::Undirected;
        else
            throw Error(Errc::invalid_params, "walk.traversal must be directed|undirected");
    }
    if (reader.has("walk", "dump_walks")) cfg.dump_walks = reader.get_bool("walk", "dump_walks");

    if (reader.has("stimulus", "cycles"))
        cfg.stimulus_cycles = static_cast<size_t>(reader.get_u64("stimulus", "cycles"));

    if (reader.has("fault", "mode")) {
        std::string mode = reader.get_string("fault", "mode");
        if (mode == "exhaustive")
            cfg.plan.mode = FaultPlan::Mode::Exhaustive;
        else if (mode == "random")
            cfg.plan.mode = FaultPlan::Mode::Random;
        else
            throw Error(Errc::invalid_params, "fault.mode must be exhaustive|random");
    }
    if (reader.has("fault", "samples"))
        cfg.plan.samples = static_cast<size_t>(reader.get_u64("fault", "samples"));

    opt_double("svr", "gamma", cfg.svr.gamma);
    opt_double("svr", "epsilon", cfg.svr.epsilon);
    opt_double("svr", "c", cfg.svr.c);
    opt_double("svr", "kkt_tol", cfg.svr.kkt_tol);
    opt_int("svr", "max_passes", cfg.svr.max_passes);

    if (reader.has("mlp", "layers")) {
        cfg.mlp.layer_sizes.clear();
        for (std::string_view part : split(reader.get_string("mlp", "layers"), ',')) {
            int64_t v;
            if (!parse_i64(trim(part), v) || v < 1)
                throw Error(Errc::invalid_params, "mlp.layers must be positive integers");
            cfg.mlp.layer_sizes.push_back(static_cast<int>(v));
        }
    }
    opt_double("mlp", "learning_rate", cfg.mlp.learning_rate);
    opt_int("mlp", "batch_size", cfg.mlp.batch_size);
    opt_int("mlp", "epochs", cfg.mlp.epochs);

    reader.reject_unknown();
    cfg.apply_seed();
    return cfg;
}

void PipelineConfig::apply_seed() {
    walk.seed = derive_seed(seed, "embed");
    plan.seed = derive_seed(seed, "campaign");
    svr.seed = derive_seed(seed, "svr");
    mlp.seed = derive_seed(seed, "mlp");
}

// ---------------------------------------------------------------------------
// Stages
// ---------------------------------------------------------------------------

namespace {

Netlist load_inputs(const PipelineConfig& cfg) {
    CellLibrary lib = CellLibrary::load_file(cfg.cell_library_path);
    Netlist n = load_netlist(cfg.netlist_path, lib);
    for (const Diagnostic& d : validate_netlist(n)) {
        if (d.severity == Diagnostic::Error)
            throw Error(d.code, d.message);
        std::cerr << d.to_string() << "\n";
    }
    return n;
}

Stimulus make_stimulus(const PipelineConfig& cfg, const Netlist& n) {
    if (cfg.stimulus_path) return Stimulus::load_file(*cfg.stimulus_path, n);
    return Stimulus::random(n, cfg.stimulus_cycles, derive_seed(cfg.seed, "stimulus"));
}

void ensure_out_dir(const PipelineConfig& cfg) {
    std::error_code ec;
    fs::create_directories(cfg.out_dir, ec);
    if (ec) throw Error(Errc::io_error, "cannot create '" + cfg.out_dir.string() + "'");
}

struct JoinedDataset {
    Matrix x;
    std::vector<double> y;
    std::vector<std::string> ff_names;     // row order = fdr.csv order
    std::vector<std::string> dropped;      // embedding labels without ground truth
};

JoinedDataset join_features_labels(const EmbeddingMatrix& emb, const FdrTable& fdr) {
    std::unordered_map<std::string, size_t> emb_rows;
    for (size_t r = 0; r < emb.labels.size(); ++r) emb_rows[emb.labels[r]] = r;

    JoinedDataset ds;
    ds.x = Matrix(fdr.rows.size(), emb.dims);
    ds.y.resize(fdr.rows.size());
    for (size_t i = 0; i < fdr.rows.size(); ++i) {
        auto it = emb_rows.find(fdr.rows[i].ff);
        if (it == emb_rows.end())
            throw Error(Errc::label_mismatch, "flip-flop '" + fdr.rows[i].ff +
                                                  "' has ground truth but no embedding row");
        auto src = emb.row(it->second);
        std::copy(src.begin(), src.end(), ds.x.row(i).begin());
        ds.y[i] = fdr.rows[i].fdr;
        ds.ff_names.push_back(fdr.rows[i].ff);
    }

    std::unordered_map<std::string, char> ff_set;
    for (const FdrRow& row : fdr.rows) ff_set[row.ff] = 1;
    for (const std::string& label : emb.labels)
        if (!ff_set.count(label)) ds.dropped.push_back(label);
    return ds;
}

std::string predictions_csv(const std::vector<std::string>& names,
                            const std::vector<size_t>& test_idx, std::span<const double> y_true,
                            std::span<const double> y_pred) {
    std::string out = "ff_name,true_fdr,predicted_fdr\n";
    for (size_t k = 0; k < test_idx.size(); ++k)
        out += names[test_idx[k]] + ',' + fmt_double(y_true[k]) + ',' + fmt_double(y_pred[k]) + '\n';
    return out;
}

} // namespace

void cmd_graph(const PipelineConfig& cfg) {
    ensure_out_dir(cfg);
    Netlist n = load_inputs(cfg);
    CircuitGraph g = netlist_to_graph(n);
    write_file(cfg.out("circuit.gml"), write_gml(g));
}

void cmd_embed(const PipelineConfig& cfg) {
    ensure_out_dir(cfg);
    std::vector<std::string> warnings;
    CircuitGraph g = read_gml(read_file(cfg.out("circuit.gml")), &warnings);
    for (const std::string& w : warnings) std::cerr << "WARNING gml: " << w << "\n";

    TransitionTables tables(g, cfg.walk);
    for (const std::string& w : tables.warnings()) std::cerr << "WARNING walks: " << w << "\n";
    WalkCorpus corpus = sample_walks(g, tables, cfg.walk);
    if (cfg.dump_walks) write_file(cfg.out("walks.txt"), write_walks(corpus));

    EmbeddingMatrix m = embed(g, cfg.walk);
    write_file(cfg.out("embeddings.csv"), write_embeddings_csv(m));
    write_embeddings_bin(cfg.out("embeddings.bin"), m);
}

void cmd_campaign(const PipelineConfig& cfg) {
    ensure_out_dir(cfg);
    Netlist n = load_inputs(cfg);
    Stimulus s = make_stimulus(cfg, n);
    FdrTable table = run_campaign(n, s, cfg.plan, cfg.jobs);
    write_file(cfg.out("fdr.csv"), table.to_csv());
}

void cmd_train_eval(const PipelineConfig& cfg) {
    ensure_out_dir(cfg);
    EmbeddingMatrix emb = read_embeddings_csv(read_file(cfg.out("embeddings.csv")));
    FdrTable fdr = FdrTable::from_csv(read_file(cfg.out("fdr.csv")));
    JoinedDataset ds = join_features_labels(emb, fdr);

    Split split = split_dataset(ds.y.size(), cfg.train_fraction, derive_seed(cfg.seed, "split"));
    Matrix x_train(split.train.size(), ds.x.cols), x_test(split.test.size(), ds.x.cols);
    std::vector<double> y_train(split.train.size()), y_test(split.test.size());
    for (size_t k = 0; k < split.train.size(); ++k) {
        auto src = ds.x.row(split.train[k]);
        std::copy(src.begin(), src.end(), x_train.row(k).begin());
        y_train[k] = ds.y[split.train[k]];
    }
    for (size_t k = 0; k < split.test.size(); ++k) {
        auto src = ds.x.row(split.test[k]);
        std::copy(src.begin(), src.end(), x_test.row(k).begin());
        y_test[k] = ds.y[split.test[k]];
    }

    MlpParams mlp_params = cfg.mlp;
    mlp_params.input_dim = static_cast<int>(ds.x.cols);

    using clock = std::chrono::steady_clock;
    std::string timing;

    auto t0 = clock::now();
    SvrModel svr_model = fit_svr(x_train, y_train, cfg.svr);
    auto t1 = clock::now();
    std::vector<double> svr_pred = predict_svr(svr_model, x_test);
    auto t2 = clock::now();

    MlpModel mlp_model = fit_mlp(x_train, y_train, mlp_params);
    auto t3 = clock::now();
    std::vector<double> mlp_pred = predict_mlp(mlp_model, x_test);
    auto t4 = clock::now();

    auto seconds = [](auto a, auto b) {
        return std::chrono::duration<double>(b - a).count();
    };
    timing += "svr_fit_seconds=" + fmt_double(seconds(t0, t1)) + "\n";
    timing += "svr_predict_seconds=" + fmt_double(seconds(t1, t2)) + "\n";
    timing += "dnn_fit_seconds=" + fmt_double(seconds(t2, t3)) + "\n";
    timing += "dnn_predict_seconds=" + fmt_double(seconds(t3, t4)) + "\n";

    auto finish_report = [&](RegressionReport r) {
        r.split_seed = derive_seed(cfg.seed, "split");
        r.train_indices = split.train;
        r.test_indices = split.test;
        r.dropped_labels = ds.dropped;
        return r;
    };
    RegressionReport svr_report = finish_report(evaluate_predictions("svr", y_test, svr_pred));
    RegressionReport mlp_report = finish_report(evaluate_predictions("dnn", y_test, mlp_pred));

    write_file(cfg.out("report_svr.json"), svr_report.to_json());
    write_file(cfg.out("report_dnn.json"), mlp_report.to_json());
    write_file(cfg.out("reports.csv"), RegressionReport::csv_header() + "\n" +
                                           svr_report.csv_row() + "\n" + mlp_report.csv_row() + "\n");

    write_file(cfg.out("predictions_svr.csv"),
               predictions_csv(ds.ff_names, split.test, y_test, svr_pred));
    write_file(cfg.out("predictions_dnn.csv"),
               predictions_csv(ds.ff_names, split.test, y_test, mlp_pred));

    write_file(cfg.out("scatter_svr.svg"), scatter_svg(y_test, svr_pred, "SVR: prediction vs truth"));
    write_file(cfg.out("scatter_dnn.svg"), scatter_svg(y_test, mlp_pred, "DNN: prediction vs truth"));
    write_file(cfg.out("sorted_svr.svg"),
               sorted_overlay_svg(y_test, svr_pred, "SVR: prediction over sorted test data"));
    write_file(cfg.out("sorted_dnn.svg"),
               sorted_overlay_svg(y_test, mlp_pred, "DNN: prediction over sorted test data"));

    std::string ci = "model,mean_true,ci_true_lo,ci_true_hi,mean_pred,ci_pred_lo,ci_pred_hi,mean_gap\n";
    for (const RegressionReport* r : {&svr_report, &mlp_report}) {
        ci += r->model;
        for (double v : {r->ci95_true.mean, r->ci95_true.lo, r->ci95_true.hi, r->ci95_pred.mean,
                         r->ci95_pred.lo, r->ci95_pred.hi,
                         std::abs(r->ci95_pred.mean - r->ci95_true.mean)})
            ci += ',' + fmt_double(v);
        ci += '\n';
    }
    write_file(cfg.out("ci_comparison.csv"), ci);

    svr_model.save(cfg.out("svr_model.bin"));
    write_file(cfg.out("svr_model.json"), svr_model.summary_json());
    mlp_model.save(cfg.out("dnn_model.bin"));
    write_file(cfg.out("dnn_model.json"), mlp_model.summary_json());

    write_file(cfg.out("timing.log"), timing); // wall-clock; varies run to run
}

void run_all(const PipelineConfig& cfg) {
    cmd_graph(cfg);
    cmd_embed(cfg);
    cmd_campaign(cfg);
    cmd_train_eval(cfg);
}

int exit_code_for(Errc code) {
    switch (code) {
        case Errc::invalid_params:
        case Errc::io_error: return 2;
        case Errc::file_not_found: return 3;
        case Errc::syntax_error: return 4;
        case Errc::unknown_cell_type:
        case Errc::multiple_drivers:
        case Errc::unconnected_pin:
        case Errc::combinational_loop:
        case Errc::undriven_net: return 5;
        case Errc::gml_syntax:
        case Errc::dangling_edge:
        case Errc::non_positive_weight: return 6;
        case Errc::label_mismatch:
        case Errc::length_mismatch:
        case Errc::dimension_mismatch:
        case Errc::empty_input:
        case Errc::empty_corpus:
        case Errc::zero_variance:
        case Errc::too_few_samples:
        case Errc::unknown_input:
        case Errc::uninitialized_state:
        case Errc::unknown_flip_flop:
        case Errc::cycle_out_of_range:
        case Errc::unknown_node:
        case Errc::not_an_edge: return 7;
        case Errc::non_finite_loss: return 8;
        default: return 1;
    }
}

} // namespace fdrkit
