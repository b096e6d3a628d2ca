#include "contactlab/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

#include "contactlab/errors.hpp"
#include "json.hpp"

namespace contactlab::io {

using nlohmann::json;
using ojson = nlohmann::ordered_json;

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out << contents;
        out.flush();
        if (!out) throw Error("write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw Error("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
    }
}

namespace {

json parse(const std::string& text, const char* what) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string(what) + ": " + e.what());
    }
}

// Wraps field access so schema violations surface as ParseError.
template <typename F>
auto guarded(const char* what, F&& f) {
    try {
        return f();
    } catch (const json::exception& e) {
        throw ParseError(std::string(what) + ": " + e.what());
    } catch (const ParseError&) {
        throw;
    } catch (const Error& e) {
        throw ParseError(std::string(what) + ": " + e.what());
    }
}

ojson point_json(geometry::Point p) { return ojson::array({p.x, p.y}); }

geometry::Point point_from(const json& j) {
    if (!j.is_array() || j.size() != 2) throw ParseError("point must be [x, y]");
    return {j.at(0).get<double>(), j.at(1).get<double>()};
}

ojson block_json(const geometry::Block& b) {
    ojson v = ojson::array();
    for (const auto& p : b.vertices()) v.push_back(point_json(p));
    return ojson{{"id", b.id()}, {"vertices", v}};
}

geometry::Block block_from(const json& j) {
    std::vector<geometry::Point> v;
    for (const auto& p : j.at("vertices")) v.push_back(point_from(p));
    return geometry::Block(j.at("id").get<int>(), std::move(v));
}

std::vector<geometry::Point> points_from(const json& j) {
    std::vector<geometry::Point> out;
    for (const auto& p : j) out.push_back(point_from(p));
    return out;
}

ojson points_json(std::span<const geometry::Point> pts) {
    ojson a = ojson::array();
    for (const auto& p : pts) a.push_back(point_json(p));
    return a;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& s, std::size_t line) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw ParseError("line " + std::to_string(line) + ": bad number '" + s + "'");
    return v;
}

long parse_int(const std::string& s, std::size_t line) {
    long v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw ParseError("line " + std::to_string(line) + ": bad integer '" + s + "'");
    return v;
}

std::string dataset_header() {
    std::string h;
    for (std::size_t k = 1; k <= pipeline::kFeatureCount; ++k) h += "f" + std::to_string(k) + ",";
    return h + "label,step";
}

}  // namespace

std::string block_to_json(const geometry::Block& block) { return block_json(block).dump(); }

geometry::Block block_from_json(const std::string& text) {
    const json j = parse(text, "block");
    return guarded("block", [&] { return block_from(j); });
}

std::string scene_to_json(const pipeline::Scene& scene) {
    ojson blocks = ojson::array();
    for (const auto& b : scene.blocks) blocks.push_back(block_json(b));
    ojson j{{"blocks", blocks},
            {"velocities", points_json(scene.velocities)},
            {"steps", scene.steps},
            {"dt", scene.dt}};
    if (!scene.phases.empty()) {
        ojson phases = ojson::array();
        for (const auto& ph : scene.phases)
            phases.push_back(
                ojson{{"start_step", ph.start_step}, {"velocities", points_json(ph.velocities)}});
        j["phases"] = phases;
    }
    return j.dump(2) + "\n";
}

pipeline::Scene scene_from_json(const std::string& text) {
    const json j = parse(text, "scene");
    return guarded("scene", [&] {
        pipeline::Scene s;
        for (const auto& b : j.at("blocks")) s.blocks.push_back(block_from(b));
        s.velocities = points_from(j.at("velocities"));
        s.steps = j.at("steps").get<int>();
        s.dt = j.at("dt").get<double>();
        if (j.contains("phases"))
            for (const auto& ph : j.at("phases"))
                s.phases.push_back({ph.at("start_step").get<int>(), points_from(ph.at("velocities"))});
        s.validate();
        return s;
    });
}

pipeline::Scene load_scene(const std::filesystem::path& path) {
    return scene_from_json(read_file(path));
}

std::string model_to_json(const anfis::TskModel& model) {
    ojson rules = ojson::array();
    for (const auto& r : model.rules) {
        ojson mfs = ojson::array();
        for (const auto& mf : r.antecedents) mfs.push_back(ojson{{"c", mf.c}, {"sigma", mf.sigma}});
        rules.push_back(ojson{{"mf", mfs}, {"p", r.consequent}});
    }
    const auto& st = model.standardization;
    ojson j{{"n", model.n},
            {"standardization", ojson{{"means", st.means}, {"stds", st.stds}}},
            {"rules", rules}};
    return j.dump(2) + "\n";
}

anfis::TskModel model_from_json(const std::string& text) {
    const json j = parse(text, "model");
    return guarded("model", [&] {
        anfis::TskModel m;
        m.n = j.at("n").get<std::size_t>();
        if (j.contains("standardization")) {
            m.standardization.means = j.at("standardization").at("means").get<std::vector<double>>();
            m.standardization.stds = j.at("standardization").at("stds").get<std::vector<double>>();
        }
        for (const auto& r : j.at("rules")) {
            anfis::TskRule rule;
            for (const auto& mf : r.at("mf"))
                rule.antecedents.push_back({mf.at("c").get<double>(), mf.at("sigma").get<double>()});
            rule.consequent = r.at("p").get<std::vector<double>>();
            m.rules.push_back(std::move(rule));
        }
        m.validate();
        return m;
    });
}

anfis::TskModel load_model(const std::filesystem::path& path) {
    return model_from_json(read_file(path));
}

std::string grid_to_json(const som::SomGrid& grid) {
    ojson labels = ojson::array();
    if (grid.labeled())
        for (const auto& l : grid.labels) labels.push_back(geometry::code(*l));
    ojson j{{"nx", grid.nx}, {"ny", grid.ny}, {"d", grid.d}, {"weights", grid.weights},
            {"labels", labels}};
    return j.dump(2) + "\n";
}

som::SomGrid grid_from_json(const std::string& text) {
    const json j = parse(text, "grid");
    return guarded("grid", [&] {
        som::SomGrid g(j.at("nx").get<std::size_t>(), j.at("ny").get<std::size_t>(),
                       j.at("d").get<std::size_t>());
        g.weights = j.at("weights").get<std::vector<std::vector<double>>>();
        if (j.contains("labels"))
            for (const auto& l : j.at("labels"))
                g.labels.push_back(geometry::contact_state_from_code(l.get<int>()));
        g.validate();
        return g;
    });
}

som::SomGrid load_grid(const std::filesystem::path& path) { return grid_from_json(read_file(path)); }

void write_dataset_csv(std::ostream& os, std::span<const pipeline::Sample> samples) {
    os << dataset_header() << '\n';
    for (const auto& s : samples) {
        for (double f : s.features) os << format_double(f) << ',';
        os << geometry::code(s.label) << ',' << s.step << '\n';
    }
}

std::vector<pipeline::Sample> read_dataset_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw ParseError("dataset is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != dataset_header()) throw ParseError("dataset header is not f1..f18,label,step");
    std::vector<pipeline::Sample> out;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const auto cells = split(line, ',');
        if (cells.size() != pipeline::kFeatureCount + 2)
            throw ParseError("line " + std::to_string(lineno) + ": expected " +
                             std::to_string(pipeline::kFeatureCount + 2) + " columns");
        pipeline::Sample s;
        for (std::size_t k = 0; k < pipeline::kFeatureCount; ++k)
            s.features.push_back(parse_double(cells[k], lineno));
        const long label = parse_int(cells[pipeline::kFeatureCount], lineno);
        if (label < 0 || label > 3)
            throw ParseError("line " + std::to_string(lineno) + ": label outside 0..3");
        s.label = geometry::contact_state_from_code(static_cast<int>(label));
        s.step = static_cast<int>(parse_int(cells[pipeline::kFeatureCount + 1], lineno));
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<pipeline::Sample> load_dataset_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string());
    return read_dataset_csv(in);
}

std::string dataset_csv(const pipeline::Dataset& ds) {
    std::vector<pipeline::Sample> rows(ds.train);
    rows.insert(rows.end(), ds.check.begin(), ds.check.end());
    std::ostringstream os;
    write_dataset_csv(os, rows);
    return os.str();
}

pipeline::Dataset split_dataset(std::vector<pipeline::Sample> rows, std::size_t n_train,
                                std::size_t n_check) {
    if (rows.size() != n_train + n_check)
        throw ParseError("dataset has " + std::to_string(rows.size()) + " rows, expected " +
                         std::to_string(n_train) + " train + " + std::to_string(n_check) +
                         " check");
    pipeline::Dataset ds;
    const auto cut = rows.begin() + static_cast<std::ptrdiff_t>(n_train);
    ds.train.assign(rows.begin(), cut);
    ds.check.assign(cut, rows.end());
    return ds;
}

std::string trace_csv(std::span<const pipeline::Frame> frames) {
    std::ostringstream os;
    os << "step,t,state\n";
    for (const auto& f : frames)
        os << f.step << ',' << format_double(f.t) << ',' << geometry::code(f.primary_state()) << '\n';
    return os.str();
}

std::string report_csv(std::span<const pipeline::WindowReport> reports) {
    std::ostringstream os;
    os << "wx,wy,ww,wh,som,nfis,fused,disagree\n";
    for (const auto& r : reports) {
        const auto& w = r.window;
        os << format_double(w.origin.x) << ',' << format_double(w.origin.y) << ','
           << format_double(w.width) << ',' << format_double(w.height) << ','
           << geometry::code(r.som) << ',' << geometry::code(r.nfis) << ','
           << geometry::code(r.fused) << ',' << (r.disagree ? "true" : "false") << '\n';
    }
    return os.str();
}

std::string label_table_csv(const som::SomGrid& grid, std::span<const std::size_t> win_counts) {
    if (!grid.labeled()) throw UnlabeledGrid("SOM grid has not been labeled");
    std::ostringstream os;
    os << "i,j,label,win_count\n";
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const auto p = grid.position(k);
        os << p.i << ',' << p.j << ',' << geometry::code(*grid.labels[k]) << ','
           << (k < win_counts.size() ? win_counts[k] : 0) << '\n';
    }
    return os.str();
}

std::string contact_map_dat(std::span<const pipeline::MapCell> cells, std::size_t resolution) {
    std::ostringstream os;
    os << "# x y code\n";
    for (std::size_t k = 0; k < cells.size(); ++k) {
        if (k > 0 && resolution > 0 && k % resolution == 0) os << '\n';
        os << format_double(cells[k].x) << ' ' << format_double(cells[k].y) << ' '
           << geometry::code(cells[k].code) << '\n';
    }
    return os.str();
}

}  // namespace contactlab::io
