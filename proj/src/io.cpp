#include "wavelab/io.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>
#include <sstream>

namespace wavelab {

namespace {

// Path-carrying JSON accessor so configuration errors name the offending
// location, e.g. "$.simulate.grid.h: expected a number".
class Cursor {
public:
    Cursor(const json& j, std::string path) : j_(&j), path_(std::move(path)) {}

    const json& raw() const { return *j_; }
    const std::string& path() const { return path_; }

    bool has(const char* key) const { return j_->is_object() && j_->contains(key); }

    Cursor at(const char* key) const {
        if (!j_->is_object() || !j_->contains(key))
            throw ConfigError(path_ + "." + key + ": missing required field");
        return Cursor((*j_)[key], path_ + "." + key);
    }

    std::optional<Cursor> maybe(const char* key) const {
        if (!has(key)) return std::nullopt;
        return Cursor((*j_)[key], path_ + "." + key);
    }

    double num() const {
        if (!j_->is_number()) throw ConfigError(path_ + ": expected a number");
        return j_->get<double>();
    }

    double num_or(const char* key, double fallback) const {
        auto c = maybe(key);
        return c ? c->num() : fallback;
    }

    long integer() const {
        if (!j_->is_number_integer()) throw ConfigError(path_ + ": expected an integer");
        return j_->get<long>();
    }

    long int_or(const char* key, long fallback) const {
        auto c = maybe(key);
        return c ? c->integer() : fallback;
    }

    bool boolean() const {
        if (!j_->is_boolean()) throw ConfigError(path_ + ": expected a boolean");
        return j_->get<bool>();
    }

    bool bool_or(const char* key, bool fallback) const {
        auto c = maybe(key);
        return c ? c->boolean() : fallback;
    }

    std::string str() const {
        if (!j_->is_string()) throw ConfigError(path_ + ": expected a string");
        return j_->get<std::string>();
    }

    std::size_t size() const {
        if (!j_->is_array()) throw ConfigError(path_ + ": expected an array");
        return j_->size();
    }

    Cursor item(std::size_t i) const {
        return Cursor((*j_)[i], path_ + "[" + std::to_string(i) + "]");
    }

    std::vector<double> num_array() const {
        std::vector<double> out;
        out.reserve(size());
        for (std::size_t i = 0; i < size(); ++i) out.push_back(item(i).num());
        return out;
    }

private:
    const json* j_;
    std::string path_;
};

int based_component(const Cursor& c, int n) {
    const long v = c.integer();
    if (v < 1 || v > n)
        throw ConfigError(c.path() + ": component index " + std::to_string(v) +
                          " out of range [1," + std::to_string(n) + "]");
    return static_cast<int>(v - 1);
}

int derivative_index(const Cursor& c) {
    const long v = c.integer();
    if (v < 0 || v > 2)
        throw ConfigError(c.path() + ": derivative index " + std::to_string(v) +
                          " out of range [0,2]");
    return static_cast<int>(v);
}

} // namespace

json load_json_file(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw MissingInputError("cannot open " + file.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(file.string() + ": " + e.what());
    }
    return j;
}

SystemSpec system_from_json(const json& j) {
    Cursor root(j, "$");
    const int n = static_cast<int>(root.at("n_components").integer());
    if (n < 1) throw ConfigError("$.n_components: must be >= 1");

    std::vector<QuadEntry> quad;
    if (auto arr = root.maybe("quadratic")) {
        for (std::size_t i = 0; i < arr->size(); ++i) {
            const Cursor e = arr->item(i);
            quad.push_back(QuadEntry{based_component(e.at("j"), n), based_component(e.at("k"), n),
                                     based_component(e.at("l"), n), derivative_index(e.at("a")),
                                     derivative_index(e.at("b")), e.at("value").num()});
        }
    }
    std::vector<CubicEntry> cub;
    if (auto arr = root.maybe("cubic")) {
        for (std::size_t i = 0; i < arr->size(); ++i) {
            const Cursor e = arr->item(i);
            cub.push_back(CubicEntry{based_component(e.at("j"), n), based_component(e.at("k"), n),
                                     based_component(e.at("l"), n), based_component(e.at("m"), n),
                                     derivative_index(e.at("a")), derivative_index(e.at("b")),
                                     derivative_index(e.at("c")), e.at("value").num()});
        }
    }
    try {
        return SystemSpec(n, QuadraticTensor(n, std::move(quad)), CubicTensor(n, std::move(cub)));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("system spec: ") + e.what());
    }
}

json system_to_json(const SystemSpec& spec) {
    json j;
    j["n_components"] = spec.n_components;
    j["quadratic"] = json::array();
    for (const auto& e : spec.quadratic.entries())
        j["quadratic"].push_back({{"j", e.j + 1},
                                  {"k", e.k + 1},
                                  {"l", e.l + 1},
                                  {"a", e.a},
                                  {"b", e.b},
                                  {"value", e.value}});
    j["cubic"] = json::array();
    for (const auto& e : spec.cubic.entries())
        j["cubic"].push_back({{"j", e.j + 1},
                              {"k", e.k + 1},
                              {"l", e.l + 1},
                              {"m", e.m + 1},
                              {"a", e.a},
                              {"b", e.b},
                              {"c", e.c},
                              {"value", e.value}});
    return j;
}

WeightMatrix weight_from_json(const json& j) {
    Cursor root(j, "$");
    const int n = static_cast<int>(root.at("n").integer());
    if (n < 1) throw ConfigError("$.n: must be >= 1");
    std::vector<std::vector<TrigPoly>> entries(n, std::vector<TrigPoly>(n));
    std::vector<std::vector<bool>> seen(n, std::vector<bool>(n, false));
    const Cursor arr = root.at("entries");
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const Cursor e = arr.item(i);
        const int r = based_component(e.at("row"), n);
        const int c = based_component(e.at("col"), n);
        std::vector<Harmonic> hs;
        const Cursor harr = e.at("harmonics");
        for (std::size_t k = 0; k < harr.size(); ++k) {
            const Cursor h = harr.item(k);
            if (h.size() != 3) throw ConfigError(h.path() + ": expected [n, cos, sin]");
            const long deg = h.item(0).integer();
            if (deg < 0) throw ConfigError(h.path() + ": harmonic index must be >= 0");
            hs.push_back(Harmonic{static_cast<int>(deg), h.item(1).num(), h.item(2).num()});
        }
        TrigPoly poly(std::move(hs));
        if (seen[r][c] && !entries[r][c].same_coefficients(poly, 0.0))
            throw ConfigError(e.path() + ": duplicate entry with different coefficients");
        entries[r][c] = poly;
        seen[r][c] = true;
        if (!seen[c][r]) entries[c][r] = std::move(poly); // mirror unless given explicitly
    }
    try {
        return WeightMatrix(n, std::move(entries));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("weight matrix: ") + e.what());
    }
}

json weight_to_json(const WeightMatrix& a) {
    json j;
    j["n"] = a.size();
    j["entries"] = json::array();
    for (int r = 0; r < a.size(); ++r)
        for (int c = r; c < a.size(); ++c) {
            if (a.entry(r, c).is_zero()) continue;
            json harmonics = json::array();
            for (const auto& h : a.entry(r, c).harmonics())
                harmonics.push_back({h.n, h.c, h.s});
            j["entries"].push_back({{"row", r + 1}, {"col", c + 1}, {"harmonics", harmonics}});
        }
    return j;
}

namespace {

GridConfig grid_from_json(const Cursor& c) {
    GridConfig g;
    g.h = c.at("h").num();
    g.dt = c.num_or("dt", 0.0);
    g.half_width = c.at("half_width").num();
    g.t_end = c.at("t_end").num();
    g.cfl_max = c.num_or("cfl_max", 0.95);
    g.blowup_threshold = c.num_or("blowup_threshold", 1e6);
    g.correction_sweep = c.bool_or("correction_sweep", true);
    return g;
}

InitialData data_from_json(const Cursor& c, SimulateParams& sim) {
    InitialData d;
    const std::string kind = c.at("kind").str();
    if (kind == "radial_bump")
        d.kind = DataKind::radial_bump;
    else if (kind == "bump_pair")
        d.kind = DataKind::bump_pair;
    else if (kind == "custom")
        d.kind = DataKind::custom;
    else
        throw ConfigError(c.path() + ".kind: unknown kind '" + kind + "'");
    d.radius = c.num_or("radius", 1.0);
    d.eps = c.at("eps").num();
    if (auto f = c.maybe("f_scale")) d.f_scale = f->num_array();
    if (auto g = c.maybe("g_scale")) d.g_scale = g->num_array();
    if (d.kind == DataKind::custom) {
        sim.f_file = c.at("f_file").str();
        sim.g_file = c.at("g_file").str();
    }
    return d;
}

std::vector<RaySpec> rays_from_json(const Cursor& arr, bool with_v0) {
    std::vector<RaySpec> rays;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const Cursor r = arr.item(i);
        RaySpec s;
        s.sigma = r.at("sigma").num();
        s.theta = r.at("theta").num();
        if (with_v0) s.v0 = r.at("v0").num_array();
        rays.push_back(std::move(s));
    }
    return rays;
}

SweepOptions sweep_from_json(const Cursor& c) {
    SweepOptions s;
    s.n_theta = static_cast<int>(c.int_or("n_theta", s.n_theta));
    s.n_y = static_cast<int>(c.int_or("n_y", s.n_y));
    s.identity_tol = c.num_or("identity_tol", s.identity_tol);
    s.agemi_tol = c.num_or("agemi_tol", s.agemi_tol);
    s.strict_margin = c.num_or("strict_margin", s.strict_margin);
    s.pd_tol = c.num_or("pd_tol", s.pd_tol);
    return s;
}

} // namespace

ExperimentConfig load_experiment_config(const std::filesystem::path& file) {
    const json j = load_json_file(file);
    Cursor root(j, "$");
    ExperimentConfig cfg;
    cfg.base_dir = file.has_parent_path() ? file.parent_path() : std::filesystem::path(".");
    cfg.task = root.at("task").str();
    if (cfg.task != "check" && cfg.task != "profile" && cfg.task != "simulate" &&
        cfg.task != "report")
        throw ConfigError("$.task: must be one of check|profile|simulate|report");
    if (auto s = root.maybe("system")) cfg.system = s->raw();
    if (auto w = root.maybe("weight")) cfg.weight = w->raw();
    cfg.seed = static_cast<std::uint64_t>(root.int_or("seed", 0));

    if (auto c = root.maybe("check")) cfg.check.sweep = sweep_from_json(*c);

    if (auto p = root.maybe("profile")) {
        if (auto rays = p->maybe("rays")) cfg.profile.rays = rays_from_json(*rays, true);
        if (auto rr = p->maybe("random_rays")) {
            cfg.profile.random.count = static_cast<int>(rr->at("count").integer());
            cfg.profile.random.sigma_min = rr->num_or("sigma_min", -5.0);
            cfg.profile.random.sigma_max = rr->num_or("sigma_max", 1.0);
            cfg.profile.random.v0_max = rr->num_or("v0_max", 1.0);
        }
        cfg.profile.t1 = p->num_or("t1", 1e6);
        cfg.profile.steps_per_decade = static_cast<int>(p->int_or("steps_per_decade", 256));
        cfg.profile.variational = p->bool_or("variational", false);
        cfg.profile.overflow_limit = p->num_or("overflow_limit", 1e12);
        if (cfg.profile.steps_per_decade < 1)
            throw ConfigError("$.profile.steps_per_decade: must be >= 1");
        if (!(cfg.profile.t1 > 2.0)) throw ConfigError("$.profile.t1: must exceed 2");
    } else if (cfg.task == "profile") {
        throw ConfigError("$.profile: missing required field");
    }

    if (auto s = root.maybe("simulate")) {
        cfg.simulate.grid = grid_from_json(s->at("grid"));
        cfg.simulate.data = data_from_json(s->at("data"), cfg.simulate);
        cfg.simulate.output_every = s->num_or("output_every", 0.5);
        cfg.simulate.mu = s->num_or("mu", 0.05);
        cfg.simulate.ghost_rho = s->num_or("ghost_rho", 2.0);
        cfg.simulate.ghost_every = s->int_or("ghost_every", 0);
        if (auto rays = s->maybe("rays")) cfg.simulate.rays = rays_from_json(*rays, false);
        if (auto snaps = s->maybe("snapshot_times")) cfg.simulate.snapshot_times = snaps->num_array();
        if (!(cfg.simulate.output_every > 0.0))
            throw ConfigError("$.simulate.output_every: must be positive");
    } else if (cfg.task == "simulate") {
        throw ConfigError("$.simulate: missing required field");
    }

    if (auto r = root.maybe("report")) {
        cfg.report.input_dir = r->at("input").str();
        cfg.report.delta = r->num_or("delta", 0.01);
        cfg.report.mu = r->num_or("mu", 0.05);
        cfg.report.headroom = r->num_or("headroom", 1.05);
        cfg.report.monotone_tol = r->num_or("monotone_tol", 1e-10);
        if (!(cfg.report.delta > 0.0)) throw ConfigError("$.report.delta: must be positive");
    } else if (cfg.task == "report") {
        throw ConfigError("$.report: missing required field");
    }

    return cfg;
}

json experiment_config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["task"] = cfg.task;
    if (!cfg.system.is_null()) j["system"] = cfg.system;
    if (!cfg.weight.is_null()) j["weight"] = cfg.weight;
    j["seed"] = cfg.seed;
    j["check"] = {{"n_theta", cfg.check.sweep.n_theta},
                  {"n_y", cfg.check.sweep.n_y},
                  {"identity_tol", cfg.check.sweep.identity_tol},
                  {"agemi_tol", cfg.check.sweep.agemi_tol},
                  {"strict_margin", cfg.check.sweep.strict_margin},
                  {"pd_tol", cfg.check.sweep.pd_tol}};
    if (cfg.task == "profile") {
        json rays = json::array();
        for (const auto& r : cfg.profile.rays)
            rays.push_back({{"sigma", r.sigma}, {"theta", r.theta}, {"v0", r.v0}});
        j["profile"] = {{"rays", rays},
                        {"random_rays",
                         {{"count", cfg.profile.random.count},
                          {"sigma_min", cfg.profile.random.sigma_min},
                          {"sigma_max", cfg.profile.random.sigma_max},
                          {"v0_max", cfg.profile.random.v0_max}}},
                        {"t1", cfg.profile.t1},
                        {"steps_per_decade", cfg.profile.steps_per_decade},
                        {"variational", cfg.profile.variational},
                        {"overflow_limit", cfg.profile.overflow_limit}};
    }
    if (cfg.task == "simulate") {
        const auto& s = cfg.simulate;
        json data = {{"kind", s.data.kind == DataKind::radial_bump
                                  ? "radial_bump"
                                  : (s.data.kind == DataKind::bump_pair ? "bump_pair" : "custom")},
                     {"radius", s.data.radius},
                     {"eps", s.data.eps}};
        if (!s.data.f_scale.empty()) data["f_scale"] = s.data.f_scale;
        if (!s.data.g_scale.empty()) data["g_scale"] = s.data.g_scale;
        if (s.data.kind == DataKind::custom) {
            data["f_file"] = s.f_file;
            data["g_file"] = s.g_file;
        }
        json rays = json::array();
        for (const auto& r : s.rays) rays.push_back({{"sigma", r.sigma}, {"theta", r.theta}});
        j["simulate"] = {{"grid",
                          {{"h", s.grid.h},
                           {"dt", s.grid.dt},
                           {"half_width", s.grid.half_width},
                           {"t_end", s.grid.t_end},
                           {"cfl_max", s.grid.cfl_max},
                           {"blowup_threshold", s.grid.blowup_threshold},
                           {"correction_sweep", s.grid.correction_sweep}}},
                         {"data", data},
                         {"output_every", s.output_every},
                         {"mu", s.mu},
                         {"ghost_rho", s.ghost_rho},
                         {"ghost_every", s.ghost_every},
                         {"rays", rays},
                         {"snapshot_times", s.snapshot_times}};
    }
    if (cfg.task == "report")
        j["report"] = {{"input", cfg.report.input_dir},
                       {"delta", cfg.report.delta},
                       {"mu", cfg.report.mu},
                       {"headroom", cfg.report.headroom},
                       {"monotone_tol", cfg.report.monotone_tol}};
    return j;
}

SystemSpec resolve_system(const ExperimentConfig& cfg) {
    if (cfg.system.is_null()) throw ConfigError("$.system: missing required field");
    if (cfg.system.is_string()) {
        std::filesystem::path p = cfg.system.get<std::string>();
        if (p.is_relative()) p = cfg.base_dir / p;
        return system_from_json(load_json_file(p));
    }
    return system_from_json(cfg.system);
}

std::optional<WeightMatrix> resolve_weight(const ExperimentConfig& cfg) {
    if (cfg.weight.is_null()) return std::nullopt;
    if (cfg.weight.is_string()) {
        std::filesystem::path p = cfg.weight.get<std::string>();
        if (p.is_relative()) p = cfg.base_dir / p;
        return weight_from_json(load_json_file(p));
    }
    return weight_from_json(cfg.weight);
}

std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& file, const std::vector<std::string>& columns)
    : n_cols_(columns.size()) {
    std::filesystem::create_directories(file.parent_path());
    out_.open(file, std::ios::binary); // binary: LF endings everywhere
    if (!out_) throw ConfigError("cannot open for writing: " + file.string());
    for (std::size_t i = 0; i < columns.size(); ++i) {
        out_ << columns[i];
        out_ << (i + 1 == columns.size() ? "\n" : ",");
    }
}

void CsvWriter::row(std::span<const double> values) {
    for (std::size_t i = 0; i < n_cols_; ++i) {
        out_ << (i < values.size() ? format_real(values[i]) : "");
        out_ << (i + 1 == n_cols_ ? "\n" : ",");
    }
}

void CsvWriter::close() { out_.close(); }

int CsvTable::col(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return static_cast<int>(i);
    return -1;
}

std::vector<double> CsvTable::column(const std::string& name) const {
    const int c = col(name);
    if (c < 0) throw MissingInputError("csv column missing: " + name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[c]);
    return out;
}

CsvTable read_csv(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw MissingInputError("cannot open " + file.string());
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) throw MissingInputError("empty csv: " + file.string());
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::stringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) table.columns.push_back(cell);
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<double> row;
        row.reserve(table.columns.size());
        std::size_t pos = 0;
        while (pos <= line.size()) {
            const std::size_t next = line.find(',', pos);
            const std::string field =
                line.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
            row.push_back(field.empty() ? std::numeric_limits<double>::quiet_NaN()
                                        : std::strtod(field.c_str(), nullptr));
            if (next == std::string::npos) break;
            pos = next + 1;
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

namespace {
constexpr char kMagic[8] = {'W', 'L', 'F', 'I', 'E', 'L', 'D', '1'};
}

void write_field_archive(const std::filesystem::path& file, json header,
                         const std::vector<std::pair<std::string, const std::vector<double>*>>& arrays) {
    json names = json::array();
    for (const auto& [name, arr] : arrays)
        names.push_back({{"name", name}, {"count", arr->size()}});
    header["arrays"] = names;
    const std::string htext = header.dump();

    std::filesystem::create_directories(file.parent_path());
    std::ofstream out(file, std::ios::binary);
    if (!out) throw ConfigError("cannot open for writing: " + file.string());
    out.write(kMagic, 8);
    const std::uint64_t hlen = htext.size();
    out.write(reinterpret_cast<const char*>(&hlen), 8);
    out.write(htext.data(), static_cast<std::streamsize>(htext.size()));
    for (const auto& [name, arr] : arrays)
        out.write(reinterpret_cast<const char*>(arr->data()),
                  static_cast<std::streamsize>(arr->size() * sizeof(double)));
}

FieldArchive read_field_archive(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw MissingInputError("cannot open " + file.string());
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0)
        throw ConfigError(file.string() + ": not a field archive");
    std::uint64_t hlen = 0;
    in.read(reinterpret_cast<char*>(&hlen), 8);
    std::string htext(hlen, '\0');
    in.read(htext.data(), static_cast<std::streamsize>(hlen));
    FieldArchive ar;
    try {
        ar.header = json::parse(htext);
    } catch (const json::exception& e) {
        throw ConfigError(file.string() + ": bad archive header: " + e.what());
    }
    for (const auto& entry : ar.header.at("arrays")) {
        const std::size_t count = entry.at("count").get<std::size_t>();
        std::vector<double> data(count);
        in.read(reinterpret_cast<char*>(data.data()),
                static_cast<std::streamsize>(count * sizeof(double)));
        if (!in) throw ConfigError(file.string() + ": truncated archive");
        ar.names.push_back(entry.at("name").get<std::string>());
        ar.arrays.push_back(std::move(data));
    }
    return ar;
}

const std::vector<double>* FieldArchive::find(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return &arrays[i];
    return nullptr;
}

RunSeries load_run_series(const std::filesystem::path& dir) {
    RunSeries run;
    const CsvTable obs = read_csv(dir / "observers.csv");
    run.t = obs.column("t");
    run.energy = obs.column("energy");
    run.max_du = obs.column("max_du");
    run.weighted = obs.column("weighted_norm");
    run.support = obs.column("support_radius");

    const json summary = load_json_file(dir / "summary.json");
    if (!summary.contains("eps")) throw MissingInputError("summary.json: missing eps");
    run.eps = summary["eps"].get<double>();
    if (summary.contains("verdict") && summary["verdict"] == "blow-up") {
        run.blew_up = true;
        run.blow_up_time = summary.value("blow_up_time", 0.0);
    }

    if (std::filesystem::exists(dir / "ghost.csv")) {
        const CsvTable gh = read_csv(dir / "ghost.csv");
        GhostSeries series;
        series.t = gh.column("t");
        series.ghost = gh.column("ghost_energy");
        series.flux = gh.column("z_flux");
        series.source = gh.column("source_integral");
        run.ghost = std::move(series);
    }
    return run;
}

} // namespace wavelab
