#include "contactlab/experiment.hpp"

#include <sstream>

#include "contactlab/errors.hpp"
#include "contactlab/io.hpp"
#include "json.hpp"

namespace contactlab::experiment {

using nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

// Sub-seeds for the independent random streams of one experiment.
enum class Stream : std::uint64_t { Dataset = 0, SomInit = 1, SomTrain = 2, Windows = 3 };

std::uint64_t stream_seed(const ExperimentConfig& c, Stream s) {
    return c.seed + static_cast<std::uint64_t>(s);
}

template <typename T>
void read_opt(const json& j, const char* key, T& target) {
    if (j.contains(key)) target = j.at(key).get<T>();
}

ojson metrics_json(const pipeline::Metrics& m) {
    ojson conf = ojson::array();
    for (const auto& row : m.confusion) conf.push_back(row);
    return ojson{{"accuracy", m.accuracy}, {"total", m.total}, {"confusion", conf}};
}

void ensure_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
}

}  // namespace

void ExperimentConfig::validate() const {
    if (n_train == 0 || n_check == 0) throw InvalidArgument("dataset sizes must be positive");
    if (!(tol > 0.0)) throw InvalidArgument("contact tolerance must be positive");
    subclust.validate();
    som.schedule.validate();
    if (som.nx == 0 || som.ny == 0) throw InvalidArgument("SOM grid dimensions must be positive");
    if (anfis.epochs < 0 || !(anfis.lr > 0.0)) throw InvalidArgument("bad ANFIS training options");
    if (scan.windows == 0 || scan.resolution == 0) throw InvalidArgument("bad scan settings");
    if (!scene_path.empty() && !std::filesystem::exists(scene_path))
        throw ParseError("scene file does not exist: " + scene_path.string());
}

ExperimentConfig config_from_json(const std::string& text, const std::filesystem::path& base_dir) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("config: ") + e.what());
    }
    ExperimentConfig c;
    try {
        if (j.contains("scene")) {
            // An empty string keeps the built-in scene.
            std::filesystem::path p = j.at("scene").get<std::string>();
            if (!p.empty()) c.scene_path = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
        }
        read_opt(j, "seed", c.seed);
        c.seed_from_file = j.contains("seed");
        read_opt(j, "tol", c.tol);
        if (j.contains("subclust")) {
            const auto& s = j.at("subclust");
            read_opt(s, "radius", c.subclust.radius);
            read_opt(s, "squash", c.subclust.squash);
            read_opt(s, "accept_ratio", c.subclust.accept_ratio);
            read_opt(s, "reject_ratio", c.subclust.reject_ratio);
        }
        if (j.contains("anfis")) {
            const auto& a = j.at("anfis");
            read_opt(a, "epochs", c.anfis.epochs);
            read_opt(a, "lr", c.anfis.lr);
            read_opt(a, "ridge", c.anfis.ridge);
        }
        if (j.contains("som")) {
            const auto& s = j.at("som");
            read_opt(s, "nx", c.som.nx);
            read_opt(s, "ny", c.som.ny);
            c.som.schedule = som::SomSchedule::for_grid(c.som.nx, c.som.ny, c.som.schedule.epochs);
            read_opt(s, "epochs", c.som.schedule.epochs);
            read_opt(s, "lr0", c.som.schedule.lr0);
            read_opt(s, "lr_end", c.som.schedule.lr_end);
            read_opt(s, "radius0", c.som.schedule.radius0);
            read_opt(s, "radius_end", c.som.schedule.radius_end);
        }
        if (j.contains("dataset")) {
            read_opt(j.at("dataset"), "train", c.n_train);
            read_opt(j.at("dataset"), "check", c.n_check);
        }
        read_opt(j, "rule_targets", c.rule_targets);
        if (j.contains("scan")) {
            const auto& s = j.at("scan");
            read_opt(s, "windows", c.scan.windows);
            read_opt(s, "width", c.scan.width);
            read_opt(s, "height", c.scan.height);
            read_opt(s, "step", c.scan.step);
            read_opt(s, "margin", c.scan.margin);
            read_opt(s, "resolution", c.scan.resolution);
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("config: ") + e.what());
    }
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    return config_from_json(io::read_file(path), path.parent_path());
}

std::string config_to_json(const ExperimentConfig& c) {
    const auto& sc = c.som.schedule;
    ojson j{
        {"scene", c.scene_path.string()},
        {"seed", c.seed},
        {"tol", c.tol},
        {"subclust",
         {{"radius", c.subclust.radius},
          {"squash", c.subclust.squash},
          {"accept_ratio", c.subclust.accept_ratio},
          {"reject_ratio", c.subclust.reject_ratio}}},
        {"anfis", {{"epochs", c.anfis.epochs}, {"lr", c.anfis.lr}, {"ridge", c.anfis.ridge}}},
        {"som",
         {{"nx", c.som.nx},
          {"ny", c.som.ny},
          {"epochs", sc.epochs},
          {"lr0", sc.lr0},
          {"lr_end", sc.lr_end},
          {"radius0", sc.radius0},
          {"radius_end", sc.radius_end}}},
        {"dataset", {{"train", c.n_train}, {"check", c.n_check}}},
        {"rule_targets", c.rule_targets},
        {"scan",
         {{"windows", c.scan.windows},
          {"width", c.scan.width},
          {"height", c.scan.height},
          {"step", c.scan.step},
          {"margin", c.scan.margin},
          {"resolution", c.scan.resolution}}},
    };
    return j.dump(2) + "\n";
}

pipeline::Scene load_scene(const ExperimentConfig& config) {
    if (config.scene_path.empty()) return pipeline::default_scene();
    return io::load_scene(config.scene_path);
}

std::string files::nfis_model(const std::string& tag) { return "nfis_" + tag + ".json"; }
std::string files::nfis_metrics(const std::string& tag) { return "nfis_" + tag + "_metrics.json"; }

GenResult generate(const ExperimentConfig& config) {
    config.validate();
    const auto scene = load_scene(config);
    GenResult r;
    r.frames = pipeline::simulate(scene, config.tol);
    const auto series = pipeline::series_from_frames(r.frames);
    r.dataset = pipeline::build_dataset(series, config.n_train, config.n_check,
                                        stream_seed(config, Stream::Dataset));
    return r;
}

GenResult cmd_gen(const ExperimentConfig& config, const std::filesystem::path& out_dir) {
    auto r = generate(config);
    const std::string dataset = io::dataset_csv(r.dataset);
    const std::string trace = io::trace_csv(r.frames);
    ensure_dir(out_dir);
    io::write_file_atomic(out_dir / files::kDataset, dataset);
    io::write_file_atomic(out_dir / files::kTrace, trace);
    return r;
}

pipeline::Dataset load_dataset(const ExperimentConfig& config, const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw ParseError("dataset not found: " + path.string());
    return io::split_dataset(io::load_dataset_csv(path), config.n_train, config.n_check);
}

NfisResult train_nfis(const ExperimentConfig& config, const pipeline::Dataset& ds,
                      std::size_t rules) {
    const auto train = pipeline::to_training_set(ds.train);
    const auto standardizer = anfis::Standardizer::fit(train.inputs);
    const auto z = standardizer.apply_all(train.inputs);

    NfisResult r;
    std::vector<subclust::ClusterCenter> centers;
    if (rules == 0) {
        r.radius = config.subclust.radius;
        centers = subclust::subtractive_cluster(z, config.subclust);
    } else {
        auto cal = subclust::calibrate_radius(z, rules, config.subclust);
        r.radius = cal.radius;
        centers = std::move(cal.centers);
    }

    anfis::TskModel initial;
    try {
        initial = subclust::rules_from_clusters(centers, standardizer, train, r.radius,
                                                config.anfis.ridge);
    } catch (const SingularSystem& e) {
        throw SingularSystem(std::string("initial least-squares fit: ") + e.what());
    }
    try {
        r.training = anfis::train_hybrid(initial, train, config.anfis);
    } catch (const SingularSystem& e) {
        throw SingularSystem(std::string("hybrid training: ") + e.what());
    } catch (const NonFinite& e) {
        throw NonFinite(std::string("hybrid training: ") + e.what());
    }
    r.model = r.training.model;
    r.train_metrics = pipeline::evaluate(pipeline::nfis_classifier(r.model), ds.train);
    r.check_metrics = pipeline::evaluate(pipeline::nfis_classifier(r.model), ds.check);
    return r;
}

NfisResult cmd_train_nfis(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                          const std::string& rules_spec,
                          const std::filesystem::path& dataset_path) {
    std::size_t rules = 0;
    if (rules_spec != "auto") {
        try {
            std::size_t used = 0;
            const long v = std::stol(rules_spec, &used);
            if (used != rules_spec.size() || v <= 0) throw std::invalid_argument(rules_spec);
            rules = static_cast<std::size_t>(v);
        } catch (const std::logic_error&) {
            throw InvalidArgument("--rules must be a positive integer or 'auto', got '" +
                                  rules_spec + "'");
        }
    }
    const auto ds = load_dataset(config, dataset_path);
    auto r = train_nfis(config, ds, rules);

    const ojson metrics{
        {"rules", r.model.rule_count()},
        {"radius", r.radius},
        {"train_rmse_trace", r.training.lse_rmse},
        {"gradient_rmse_trace", r.training.gradient_rmse},
        {"best_rmse", r.training.best_rmse},
        {"final_lr", r.training.final_lr},
        {"train", metrics_json(r.train_metrics)},
        {"check_accuracy", r.check_metrics.accuracy},
        {"confusion", metrics_json(r.check_metrics)["confusion"]},
    };
    const std::string model_text = io::model_to_json(r.model);
    const std::string metrics_text = metrics.dump(2) + "\n";
    ensure_dir(out_dir);
    io::write_file_atomic(out_dir / files::nfis_model(rules_spec), model_text);
    io::write_file_atomic(out_dir / files::nfis_metrics(rules_spec), metrics_text);
    return r;
}

SomResult train_som(const ExperimentConfig& config, const pipeline::Dataset& ds) {
    if (ds.train.empty()) throw EmptyData("no training samples for the SOM");
    const auto rows = pipeline::gravity_rows(ds.train);
    SomResult r;
    r.initial = som::init_grid(config.som.nx, config.som.ny, rows,
                               stream_seed(config, Stream::SomInit));
    auto trained =
        som::train_som(r.initial, rows, config.som.schedule, stream_seed(config, Stream::SomTrain));
    auto labeled = som::label_neurons(std::move(trained), rows, pipeline::labels_of(ds.train));
    r.grid = std::move(labeled.grid);
    r.win_counts = std::move(labeled.win_counts);
    r.train_metrics = pipeline::evaluate(pipeline::som_classifier(r.grid), ds.train);
    return r;
}

SomResult cmd_train_som(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                        const std::filesystem::path& dataset_path) {
    const auto ds = load_dataset(config, dataset_path);
    auto r = train_som(config, ds);
    const std::string grid_text = io::grid_to_json(r.grid);
    const std::string table = io::label_table_csv(r.grid, r.win_counts);
    ensure_dir(out_dir);
    io::write_file_atomic(out_dir / files::kSomGrid, grid_text);
    io::write_file_atomic(out_dir / files::kSomLabels, table);
    return r;
}

std::string cmd_eval(const ExperimentConfig& config, const EvalRequest& request) {
    const auto ds = load_dataset(config, request.dataset_path);
    ojson blocks = ojson::array();
    auto add = [&](const std::string& name, const pipeline::Classifier& c) {
        ojson b = metrics_json(pipeline::evaluate(c, ds.check));
        b["classifier"] = name;
        blocks.push_back(b);
    };
    if (request.oracle) add("oracle", pipeline::oracle_classifier(config.tol));
    if (request.nfis_path) {
        const auto model = io::load_model(*request.nfis_path);
        add("nfis", pipeline::nfis_classifier(model));
    }
    if (request.som_path) {
        const auto grid = io::load_grid(*request.som_path);
        add("som", pipeline::som_classifier(grid));
    }
    if (blocks.empty()) throw InvalidArgument("nothing to evaluate: pass --nfis, --som or --oracle");
    const ojson doc{{"split", "check"}, {"samples", ds.check.size()}, {"results", blocks}};
    return doc.dump(2) + "\n";
}

ScanResult scan(const ExperimentConfig& config, const anfis::TskModel& nfis,
                const som::SomGrid& grid) {
    if (!grid.labeled()) throw UnlabeledGrid("SOM grid has not been labeled");
    const auto scene = load_scene(config);
    if (config.scan.step < 0 || config.scan.step >= scene.steps)
        throw InvalidArgument("scan step outside the scene");
    pipeline::Scene upto = scene;
    upto.steps = config.scan.step + 1;
    const auto frames = pipeline::simulate(upto, config.tol);
    const auto& blocks = frames.back().blocks;

    ScanResult r;
    r.domain = pipeline::bounding_domain(blocks, config.scan.margin);
    const auto windows =
        pipeline::random_windows(r.domain, config.scan.windows, config.scan.width,
                                 config.scan.height, stream_seed(config, Stream::Windows));
    r.reports = pipeline::scan_windows(r.domain, windows, grid, nfis, blocks, config.tol);
    r.map = pipeline::contact_map(r.domain, config.scan.resolution, config.scan.width,
                                  config.scan.height, grid, nfis, blocks, config.tol);
    return r;
}

ScanResult cmd_scan(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                    const std::filesystem::path& nfis_path, const std::filesystem::path& som_path) {
    const auto nfis = io::load_model(nfis_path);
    const auto grid = io::load_grid(som_path);
    auto r = scan(config, nfis, grid);

    std::size_t paired = 0, disagree = 0, nfis_ok = 0, som_ok = 0;
    pipeline::Confusion nfis_conf{}, som_conf{};
    for (const auto& w : r.reports) {
        if (!w.pair) continue;
        ++paired;
        disagree += w.disagree ? 1 : 0;
        nfis_ok += w.nfis == w.oracle ? 1 : 0;
        som_ok += w.som == w.oracle ? 1 : 0;
        ++nfis_conf[static_cast<std::size_t>(geometry::code(w.oracle))]
                   [static_cast<std::size_t>(geometry::code(w.nfis))];
        ++som_conf[static_cast<std::size_t>(geometry::code(w.oracle))]
                  [static_cast<std::size_t>(geometry::code(w.som))];
    }
    auto rate = [&](std::size_t k) {
        return paired == 0 ? 0.0 : static_cast<double>(k) / static_cast<double>(paired);
    };
    const ojson summary{
        {"step", config.scan.step},
        {"domain", {r.domain.min.x, r.domain.min.y, r.domain.max.x, r.domain.max.y}},
        {"windows", r.reports.size()},
        {"windows_with_pair", paired},
        {"disagreement_rate", rate(disagree)},
        {"nfis_accuracy", rate(nfis_ok)},
        {"som_accuracy", rate(som_ok)},
        {"nfis_confusion", nfis_conf},
        {"som_confusion", som_conf},
    };

    const std::string report = io::report_csv(r.reports);
    const std::string map = io::contact_map_dat(r.map, config.scan.resolution);
    const std::string summary_text = summary.dump(2) + "\n";
    ensure_dir(out_dir);
    io::write_file_atomic(out_dir / files::kScanReport, report);
    io::write_file_atomic(out_dir / files::kContactMap, map);
    io::write_file_atomic(out_dir / files::kScanSummary, summary_text);
    return r;
}

}  // namespace contactlab::experiment
