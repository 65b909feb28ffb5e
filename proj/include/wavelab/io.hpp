// Configuration ingestion, CSV/JSON emission, and the binary field
// container. All real numbers in CSV files are written with 17 significant
// digits, '.' decimal separator and LF line endings, so identical runs
// produce byte-identical files.

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wavelab/conditions.hpp"
#include "wavelab/diagnostics.hpp"
#include "wavelab/profile_ode.hpp"
#include "wavelab/wave_solver.hpp"

namespace wavelab {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// JSON <-> domain types. Component indices are 1-based in files, derivative
// indices 0-based. Loading failures throw ConfigError naming the JSON path.

json load_json_file(const std::filesystem::path& file);

SystemSpec system_from_json(const json& j);
json system_to_json(const SystemSpec& spec);

WeightMatrix weight_from_json(const json& j);
json weight_to_json(const WeightMatrix& a);

// ---------------------------------------------------------------------------
// Experiment configuration.

struct RaySpec {
    double sigma = 0.0;
    double theta = 0.0;
    std::vector<double> v0; // profile tasks only
};

struct RandomRayParams {
    int count = 0;
    double sigma_min = -5.0, sigma_max = 1.0;
    double v0_max = 1.0;
};

struct ProfileParams {
    std::vector<RaySpec> rays;
    RandomRayParams random;
    double t1 = 1e6;
    int steps_per_decade = 256;
    bool variational = false;
    double overflow_limit = 1e12;
};

struct SimulateParams {
    GridConfig grid;
    InitialData data;
    std::string f_file, g_file; // custom data archives
    double output_every = 0.5;
    double mu = 0.05;
    double ghost_rho = 2.0;
    long ghost_every = 0; // observer steps; 0 = same as output cadence, <0 = off
    std::vector<RaySpec> rays;
    std::vector<double> snapshot_times;
};

struct ReportParams {
    std::string input_dir;
    double delta = 0.01;
    double mu = 0.05;
    double headroom = 1.05;
    double monotone_tol = 1e-10;
};

struct CheckParams {
    SweepOptions sweep;
};

struct ExperimentConfig {
    std::string task; // check | profile | simulate | report
    json system;      // inline object or file path string; may be null for report
    json weight;      // optional
    std::uint64_t seed = 0;
    CheckParams check;
    ProfileParams profile;
    SimulateParams simulate;
    ReportParams report;
    std::filesystem::path base_dir; // directory of the config file, for relative paths
};

ExperimentConfig load_experiment_config(const std::filesystem::path& file);
json experiment_config_to_json(const ExperimentConfig& cfg);

SystemSpec resolve_system(const ExperimentConfig& cfg);
std::optional<WeightMatrix> resolve_weight(const ExperimentConfig& cfg);

// ---------------------------------------------------------------------------
// CSV.

std::string format_real(double v); // %.17g, C locale

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& file, const std::vector<std::string>& columns);
    void row(std::span<const double> values);
    void close();

private:
    std::ofstream out_;
    std::size_t n_cols_;
};

struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    int col(const std::string& name) const; // -1 if absent
    std::vector<double> column(const std::string& name) const;
    std::size_t n_rows() const { return rows.size(); }
};

CsvTable read_csv(const std::filesystem::path& file); // MissingInputError if absent

// ---------------------------------------------------------------------------
// Binary field container: 8-byte magic "WLFIELD1", little-endian u64 header
// length, JSON header, then the named float64 arrays concatenated in header
// order (little-endian).

struct FieldArchive {
    json header;
    std::vector<std::string> names;
    std::vector<std::vector<double>> arrays;

    const std::vector<double>* find(const std::string& name) const;
};

void write_field_archive(const std::filesystem::path& file, json header,
                         const std::vector<std::pair<std::string, const std::vector<double>*>>& arrays);
FieldArchive read_field_archive(const std::filesystem::path& file);

// Recorded run loader (observers.csv, summary.json, optional ghost.csv).
RunSeries load_run_series(const std::filesystem::path& dir);

} // namespace wavelab
