// contactlab: contact-state surrogate experiments.
//
// Seed precedence: --seed, then "seed" in the config file, then the
// CONTACTLAB_SEED environment variable, then the built-in default.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "contactlab/errors.hpp"
#include "contactlab/experiment.hpp"

namespace fs = std::filesystem;
namespace ex = contactlab::experiment;

namespace {

std::optional<std::uint64_t> env_seed() {
    const char* v = std::getenv("CONTACTLAB_SEED");
    if (!v || !*v) return std::nullopt;
    try {
        std::size_t used = 0;
        const unsigned long long s = std::stoull(v, &used);
        if (used != std::string(v).size()) throw std::invalid_argument(v);
        return s;
    } catch (const std::logic_error&) {
        throw contactlab::InvalidArgument(std::string("CONTACTLAB_SEED is not an integer: ") + v);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Contact-state surrogates for 2D block systems: geometric ground truth, "
                 "TSK neuro-fuzzy and SOM classifiers, window scanning"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir = ".";
    app.add_option("--config", config_path, "Experiment config JSON")->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "Random seed (overrides config and CONTACTLAB_SEED)");
    app.add_option("--out", out_dir, "Output directory");

    auto* gen = app.add_subcommand("gen", "Simulate the scene and write dataset.csv and trace.csv");

    auto* nfis = app.add_subcommand("train-nfis", "Cluster, train and evaluate the TSK model");
    std::string rules = "13";
    std::string nfis_dataset;
    nfis->add_option("--rules", rules, "Rule count to calibrate for, or 'auto'");
    nfis->add_option("--dataset", nfis_dataset, "Dataset CSV (default: OUT/dataset.csv)");

    auto* somc = app.add_subcommand("train-som", "Train and label the SOM on gravity centers");
    std::string som_dataset;
    std::optional<int> som_epochs;
    somc->add_option("--dataset", som_dataset, "Dataset CSV (default: OUT/dataset.csv)");
    somc->add_option("--epochs", som_epochs, "Override the SOM epoch count");

    auto* eval = app.add_subcommand("eval", "Print check-split metrics as JSON");
    std::string eval_dataset;
    std::string eval_nfis;
    std::string eval_som;
    bool eval_oracle = false;
    eval->add_option("--dataset", eval_dataset, "Dataset CSV (default: OUT/dataset.csv)");
    eval->add_option("--nfis", eval_nfis, "NFIS model JSON");
    eval->add_option("--som", eval_som, "SOM grid JSON");
    eval->add_flag("--oracle", eval_oracle, "Also score the geometric oracle (sanity check)");

    auto* scan = app.add_subcommand("scan", "Scan random windows and write the fused contact map");
    std::string scan_nfis;
    std::string scan_som;
    scan->add_option("--nfis", scan_nfis, "NFIS model JSON (default: OUT/nfis_13.json)");
    scan->add_option("--som", scan_som, "SOM grid JSON (default: OUT/som_grid.json)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // --help and --version come through here with status 0.
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        ex::ExperimentConfig config =
            config_path.empty() ? ex::ExperimentConfig{} : ex::load_config(config_path);
        if (seed) {
            config.seed = *seed;
        } else if (!config.seed_from_file) {
            if (const auto s = env_seed()) config.seed = *s;
        }

        const fs::path out(out_dir);
        auto or_default = [&](const std::string& given, const std::string& name) {
            return given.empty() ? out / name : fs::path(given);
        };

        if (*gen) {
            const auto r = ex::cmd_gen(config, out);
            std::cerr << "wrote " << r.dataset.train.size() << " train + "
                      << r.dataset.check.size() << " check samples, " << r.frames.size()
                      << " trace steps\n";
        } else if (*nfis) {
            const auto r =
                ex::cmd_train_nfis(config, out, rules, or_default(nfis_dataset, ex::files::kDataset));
            std::cerr << "rules " << r.model.rule_count() << ", radius " << r.radius
                      << ", check accuracy " << r.check_metrics.accuracy << "\n";
        } else if (*somc) {
            if (som_epochs) config.som.schedule.epochs = *som_epochs;
            const auto r = ex::cmd_train_som(config, out, or_default(som_dataset, ex::files::kDataset));
            std::cerr << "SOM " << r.grid.nx << "x" << r.grid.ny << ", train accuracy "
                      << r.train_metrics.accuracy << "\n";
        } else if (*eval) {
            ex::EvalRequest req;
            req.dataset_path = or_default(eval_dataset, ex::files::kDataset);
            if (!eval_nfis.empty()) req.nfis_path = eval_nfis;
            if (!eval_som.empty()) req.som_path = eval_som;
            req.oracle = eval_oracle;
            std::cout << ex::cmd_eval(config, req);
        } else if (*scan) {
            const auto r = ex::cmd_scan(config, out, or_default(scan_nfis, ex::files::nfis_model("13")),
                                        or_default(scan_som, ex::files::kSomGrid));
            std::cerr << "scanned " << r.reports.size() << " windows\n";
        }
    } catch (const contactlab::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
