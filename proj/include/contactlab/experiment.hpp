#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "contactlab/anfis.hpp"
#include "contactlab/pipeline.hpp"
#include "contactlab/som.hpp"
#include "contactlab/subclust.hpp"

// Reproducible experiments behind the command-line front-end. Each command
// computes everything in memory first and only then writes its outputs, so a
// failing command leaves no partial files behind.
namespace contactlab::experiment {

struct SomConfig {
    std::size_t nx = 3;
    std::size_t ny = 3;
    som::SomSchedule schedule = som::SomSchedule::for_grid(3, 3, 300);
};

struct ScanConfig {
    std::size_t windows = 20;
    double width = 3.0;
    double height = 3.0;
    int step = 60;              // scene step whose snapshot is scanned
    double margin = 1.0;        // domain padding around the snapshot, m
    std::size_t resolution = 40;  // contact map lattice per side
};

struct ExperimentConfig {
    std::filesystem::path scene_path;  // empty: built-in default scene
    std::uint64_t seed = 42;
    bool seed_from_file = false;  // the loaded JSON set "seed"
    double tol = geometry::kDefaultTolerance;
    subclust::SubclustParams subclust;
    anfis::HybridOptions anfis;
    SomConfig som;
    std::size_t n_train = 100;
    std::size_t n_check = 50;
    std::vector<std::size_t> rule_targets{13, 39};
    ScanConfig scan;

    void validate() const;
};

/// Fields present in the JSON override the defaults above. A relative scene
/// path resolves against the config file's directory. Throws ParseError.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig config_from_json(const std::string& text,
                                  const std::filesystem::path& base_dir = {});
std::string config_to_json(const ExperimentConfig& config);

pipeline::Scene load_scene(const ExperimentConfig& config);

/// Output file names inside the output directory.
namespace files {
inline constexpr const char* kDataset = "dataset.csv";
inline constexpr const char* kTrace = "trace.csv";
inline constexpr const char* kSomGrid = "som_grid.json";
inline constexpr const char* kSomLabels = "som_labels.csv";
inline constexpr const char* kScanReport = "scan_report.csv";
inline constexpr const char* kContactMap = "contact_map.dat";
inline constexpr const char* kScanSummary = "scan_summary.json";
std::string nfis_model(const std::string& tag);    // nfis_<tag>.json
std::string nfis_metrics(const std::string& tag);  // nfis_<tag>_metrics.json
}  // namespace files

struct GenResult {
    pipeline::Dataset dataset;
    std::vector<pipeline::Frame> frames;
};

/// Simulates the scene and samples the train/check dataset.
GenResult generate(const ExperimentConfig& config);
GenResult cmd_gen(const ExperimentConfig& config, const std::filesystem::path& out_dir);

pipeline::Dataset load_dataset(const ExperimentConfig& config, const std::filesystem::path& path);

struct NfisResult {
    anfis::TskModel model;
    double radius = 0.0;
    anfis::HybridResult training;
    pipeline::Metrics train_metrics;
    pipeline::Metrics check_metrics;
};

/// `rules` == 0 uses the configured radius; otherwise the radius is
/// calibrated to produce exactly that many rules.
NfisResult train_nfis(const ExperimentConfig& config, const pipeline::Dataset& ds,
                      std::size_t rules);

/// `rules_spec` is "auto" or a rule count. Writes nfis_<rules_spec>.json and
/// nfis_<rules_spec>_metrics.json.
NfisResult cmd_train_nfis(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                          const std::string& rules_spec,
                          const std::filesystem::path& dataset_path);

struct SomResult {
    som::SomGrid initial;
    som::SomGrid grid;  // trained and labeled
    std::vector<std::size_t> win_counts;
    pipeline::Metrics train_metrics;
};

SomResult train_som(const ExperimentConfig& config, const pipeline::Dataset& ds);
SomResult cmd_train_som(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                        const std::filesystem::path& dataset_path);

struct EvalRequest {
    std::filesystem::path dataset_path;
    std::optional<std::filesystem::path> nfis_path;
    std::optional<std::filesystem::path> som_path;
    bool oracle = false;
};

/// JSON metrics document for every requested classifier on the check split.
std::string cmd_eval(const ExperimentConfig& config, const EvalRequest& request);

struct ScanResult {
    pipeline::Domain domain;
    std::vector<pipeline::WindowReport> reports;
    std::vector<pipeline::MapCell> map;
};

ScanResult scan(const ExperimentConfig& config, const anfis::TskModel& nfis,
                const som::SomGrid& grid);
ScanResult cmd_scan(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                    const std::filesystem::path& nfis_path, const std::filesystem::path& som_path);

}  // namespace contactlab::experiment
