#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <set>
#include <sstream>
#include <string>

#include "contactlab/experiment.hpp"
#include "contactlab/io.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace contactlab;
namespace fs = std::filesystem;
namespace ex = contactlab::experiment;

namespace {

struct Run {
    int code = -1;
    std::string out;
    std::string err;
};

class Sandbox {
public:
    explicit Sandbox(const std::string& name)
        : root_(fs::temp_directory_path() / ("contactlab_cli_" + name)) {
        fs::remove_all(root_);
        fs::create_directories(root_);
    }
    ~Sandbox() { fs::remove_all(root_); }

    fs::path path(const std::string& rel) const { return root_ / rel; }

    // `env` is prepended to the command line, e.g. "CONTACTLAB_SEED=3".
    Run run(const std::string& args, const std::string& env = "") const {
        const auto out = root_ / ".stdout";
        const auto err = root_ / ".stderr";
        std::string cmd = "env -u CONTACTLAB_SEED " + env + " '" + std::string(CONTACTLAB_CLI_PATH) +
                          "' " + args + " >'" + out.string() + "' 2>'" + err.string() + "'";
        const int status = std::system(cmd.c_str());
        Run r;
        r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        r.out = io::read_file(out);
        r.err = io::read_file(err);
        fs::remove(out);
        fs::remove(err);
        return r;
    }

    void write(const std::string& rel, const std::string& text) const { io::write_file_atomic(path(rel), text); }
    std::string read(const std::string& rel) const { return io::read_file(path(rel)); }

private:
    fs::path root_;
};

std::set<std::string> files_in(const fs::path& dir) {
    std::set<std::string> names;
    if (!fs::exists(dir)) return names;
    for (const auto& e : fs::directory_iterator(dir)) names.insert(e.path().filename().string());
    return names;
}

std::size_t line_count(const std::string& text) {
    std::size_t n = 0;
    for (char c : text) n += c == '\n' ? 1 : 0;
    return n;
}

}  // namespace

TEST_CASE("gen writes the dataset and the trace") {
    Sandbox sb("gen");
    const auto r = sb.run("--out " + sb.path("o").string() + " gen");
    REQUIRE(r.code == 0);
    const auto rows = io::load_dataset_csv(sb.path("o/dataset.csv"));
    CHECK(rows.size() == 150);
    for (const auto& s : rows) CHECK(s.features.size() == 18);
    const auto trace = sb.read("o/trace.csv");
    CHECK(trace.rfind("step,t,state\n", 0) == 0);
    CHECK(line_count(trace) == 1 + static_cast<std::size_t>(pipeline::default_scene().steps));

    const auto again = sb.run("--out " + sb.path("p").string() + " gen");
    REQUIRE(again.code == 0);
    CHECK(sb.read("o/dataset.csv") == sb.read("p/dataset.csv"));
    CHECK(sb.read("o/trace.csv") == sb.read("p/trace.csv"));
}

TEST_CASE("bad scene path fails without partial output") {
    Sandbox sb("badscene");
    sb.write("cfg.json", R"({"scene": "does_not_exist.json"})");
    const auto r = sb.run("--config " + sb.path("cfg.json").string() + " --out " + sb.path("o").string() + " gen");
    CHECK(r.code == 1);
    CHECK(r.err.find("does_not_exist.json") != std::string::npos);
    CHECK(files_in(sb.path("o")).empty());

    sb.write("scene.json", "{\"blocks\": [");
    sb.write("cfg2.json", R"({"scene": "scene.json"})");
    const auto r2 = sb.run("--config " + sb.path("cfg2.json").string() + " --out " + sb.path("o").string() + " gen");
    CHECK(r2.code == 1);
    CHECK(files_in(sb.path("o")).empty());
}

TEST_CASE("usage errors exit 1, help exits 0") {
    Sandbox sb("usage");
    CHECK(sb.run("").code == 1);
    CHECK(sb.run("frobnicate").code == 1);
    CHECK(sb.run("--config " + sb.path("missing.json").string() + " gen").code == 1);
    CHECK(sb.run("--out " + sb.path("o").string() + " train-nfis --rules many").code == 1);
    const auto help = sb.run("--help");
    CHECK(help.code == 0);
    CHECK(help.out.find("train-nfis") != std::string::npos);
}

TEST_CASE("seed precedence: flag, then config, then environment") {
    Sandbox sb("seed");
    auto gen = [&](const std::string& dir, const std::string& extra, const std::string& env = "") {
        REQUIRE(sb.run(extra + " --out " + sb.path(dir).string() + " gen", env).code == 0);
        return sb.read(dir + "/dataset.csv");
    };
    sb.write("seed7.json", R"({"seed": 7})");
    const auto cfg7 = "--config " + sb.path("seed7.json").string();

    const auto d42 = gen("default", "");
    const auto d7 = gen("flag7", "--seed 7");
    const auto d9 = gen("flag9", "--seed 9");
    CHECK(d7 != d42);
    CHECK(d9 != d7);
    CHECK(gen("cfg7", cfg7) == d7);
    CHECK(gen("env7", "", "CONTACTLAB_SEED=7") == d7);
    CHECK(gen("cfg7flag9", cfg7 + " --seed 9") == d9);
    CHECK(gen("cfg7env9", cfg7, "CONTACTLAB_SEED=9") == d7);
    CHECK(gen("env7flag9", "--seed 9", "CONTACTLAB_SEED=7") == d9);
    CHECK(sb.run("--out " + sb.path("x").string() + " gen", "CONTACTLAB_SEED=abc").code == 1);
}

TEST_CASE("train-nfis and eval") {
    Sandbox sb("nfis");
    const auto out = "--out " + sb.path("o").string();
    CHECK(sb.run(out + " train-nfis --rules 13").code == 1);  // no dataset yet
    CHECK(files_in(sb.path("o")).empty());
    REQUIRE(sb.run(out + " gen").code == 0);
    const auto dataset = sb.read("o/dataset.csv");
    REQUIRE(sb.run(out + " train-nfis --rules 13").code == 0);
    CHECK(io::load_model(sb.path("o/nfis_13.json")).rule_count() == 13);
    const auto metrics = nlohmann::json::parse(sb.read("o/nfis_13_metrics.json"));
    CHECK(metrics.at("rules") == 13);
    CHECK(metrics.contains("train_rmse_trace"));
    CHECK(metrics.contains("check_accuracy"));
    CHECK(metrics.at("confusion").size() == 4);
    REQUIRE(sb.run(out + " train-som").code == 0);

    const auto oracle = sb.run(out + " eval --oracle");
    REQUIRE(oracle.code == 0);
    const auto doc = nlohmann::json::parse(oracle.out);
    REQUIRE(doc.at("results").size() == 1);
    CHECK(doc.at("results")[0].at("accuracy") == 1.0);
    CHECK(doc.at("samples") == 50);

    const auto both = sb.run(out + " eval --nfis " + sb.path("o/nfis_13.json").string() + " --som " +
                             sb.path("o/som_grid.json").string());
    REQUIRE(both.code == 0);
    const auto blocks = nlohmann::json::parse(both.out).at("results");
    REQUIRE(blocks.size() == 2);
    CHECK(blocks[0].at("classifier") == "nfis");
    CHECK(blocks[1].at("classifier") == "som");

    sb.write("bad_model.json", "{\"n\": 18, \"rules\": [");
    const auto bad = sb.run(out + " eval --nfis " + sb.path("bad_model.json").string());
    CHECK(bad.code == 1);
    CHECK(bad.err.find("model") != std::string::npos);
    CHECK(bad.err.find("parse") != std::string::npos);
    CHECK(sb.run(out + " eval").code == 1);

    // Inputs are never rewritten.
    CHECK(sb.read("o/dataset.csv") == dataset);
}

TEST_CASE("train-som") {
    Sandbox sb("som");
    const auto out = "--out " + sb.path("o").string();
    CHECK(sb.run(out + " train-som").code == 1);
    REQUIRE(sb.run(out + " gen").code == 0);
    REQUIRE(sb.run(out + " train-som").code == 0);
    const auto table = sb.read("o/som_labels.csv");
    CHECK(line_count(table) == 10);
    std::set<std::string> labels;
    std::istringstream is(table);
    std::string line;
    std::getline(is, line);
    CHECK(line == "i,j,label,win_count");
    while (std::getline(is, line)) {
        std::istringstream row(line);
        std::string i, j, label;
        std::getline(row, i, ',');
        std::getline(row, j, ',');
        std::getline(row, label, ',');
        labels.insert(label);
    }
    CHECK(labels == std::set<std::string>{"0", "1", "2", "3"});

    REQUIRE(sb.run(out + " train-som --epochs 0").code == 0);
    const auto grid = io::load_grid(sb.path("o/som_grid.json"));
    const ex::ExperimentConfig config;
    const auto ds = ex::load_dataset(config, sb.path("o/dataset.csv"));
    CHECK(grid.weights == ex::train_som(config, ds).initial.weights);
}

TEST_CASE("scan") {
    Sandbox sb("scan");
    const auto out = "--out " + sb.path("o").string();
    REQUIRE(sb.run(out + " gen").code == 0);
    REQUIRE(sb.run(out + " train-nfis --rules 13").code == 0);
    REQUIRE(sb.run(out + " train-som").code == 0);
    REQUIRE(sb.run(out + " scan").code == 0);
    const auto report = sb.read("o/scan_report.csv");
    CHECK(line_count(report) == 21);
    CHECK(sb.read("o/contact_map.dat").rfind("# x y code\n", 0) == 0);

    auto grid = io::load_grid(sb.path("o/som_grid.json"));
    grid.labels.clear();
    sb.write("unlabeled.json", io::grid_to_json(grid));
    fs::remove(sb.path("o/scan_report.csv"));
    const auto r = sb.run(out + " scan --som " + sb.path("unlabeled.json").string());
    CHECK(r.code == 1);
    CHECK_FALSE(fs::exists(sb.path("o/scan_report.csv")));
}

TEST_CASE("the shipped config reproduces the built-in defaults") {
    Sandbox sb("shipped");
    const auto cfg = (fs::path(CONTACTLAB_SOURCE_DIR) / "configs" / "default.json").string();
    REQUIRE(sb.run("--config " + cfg + " --out " + sb.path("a").string() + " gen").code == 0);
    REQUIRE(sb.run("--out " + sb.path("b").string() + " gen").code == 0);
    CHECK(sb.read("a/dataset.csv") == sb.read("b/dataset.csv"));
    CHECK(sb.read("a/trace.csv") == sb.read("b/trace.csv"));
}
