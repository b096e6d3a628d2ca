#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "contactlab/anfis.hpp"
#include "contactlab/pipeline.hpp"
#include "contactlab/som.hpp"

// File formats. JSON documents are parsed with nlohmann/json; every
// malformed document or CSV row raises ParseError naming what was wrong.
namespace contactlab::io {

/// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

std::string read_file(const std::filesystem::path& path);

/// Writes via a sibling temporary and a rename, so the target is either
/// absent or complete.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

// {"id": int, "vertices": [[x, y], ...]}
std::string block_to_json(const geometry::Block& block);
geometry::Block block_from_json(const std::string& text);

// {"blocks": [...], "velocities": [[vx, vy], ...], "steps": int, "dt": real,
//  "phases": [{"start_step": int, "velocities": [...]}, ...]}   (phases optional)
std::string scene_to_json(const pipeline::Scene& scene);
pipeline::Scene scene_from_json(const std::string& text);
pipeline::Scene load_scene(const std::filesystem::path& path);

// {"n": int, "standardization": {"means": [], "stds": []},
//  "rules": [{"mf": [{"c": .., "sigma": ..}, ...], "p": [...]}, ...]}
std::string model_to_json(const anfis::TskModel& model);
anfis::TskModel model_from_json(const std::string& text);
anfis::TskModel load_model(const std::filesystem::path& path);

// {"nx": .., "ny": .., "d": .., "weights": [[...], ...], "labels": [...]}
// Labels are integer codes; an unlabeled grid writes an empty list.
std::string grid_to_json(const som::SomGrid& grid);
som::SomGrid grid_from_json(const std::string& text);
som::SomGrid load_grid(const std::filesystem::path& path);

/// Header f1..f18,label,step; one row per sample.
void write_dataset_csv(std::ostream& os, std::span<const pipeline::Sample> samples);
std::vector<pipeline::Sample> read_dataset_csv(std::istream& is);
std::vector<pipeline::Sample> load_dataset_csv(const std::filesystem::path& path);

/// Dataset file layout: the train rows followed by the check rows.
std::string dataset_csv(const pipeline::Dataset& ds);
pipeline::Dataset split_dataset(std::vector<pipeline::Sample> rows, std::size_t n_train,
                                std::size_t n_check);

/// step,t,state for the block pair (0, 1).
std::string trace_csv(std::span<const pipeline::Frame> frames);

/// wx,wy,ww,wh,som,nfis,fused,disagree
std::string report_csv(std::span<const pipeline::WindowReport> reports);

/// i,j,label,win_count per neuron in row-major order.
std::string label_table_csv(const som::SomGrid& grid, std::span<const std::size_t> win_counts);

/// gnuplot grid: "x y code" lines, one blank line between rows of constant y.
std::string contact_map_dat(std::span<const pipeline::MapCell> cells, std::size_t resolution);

}  // namespace contactlab::io
