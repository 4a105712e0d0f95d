// io.hpp — CSV tables, trajectory files and JSON metadata sidecars.
#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "nrqb/dynamics.hpp"
#include "nrqb/model.hpp"

namespace nrqb {

/// Column-oriented numeric table with an optional per-row status string.
struct Dataset {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::vector<std::string> status;  // empty, or one entry per row
    nlohmann::json meta = nlohmann::json::object();

    std::size_t column(const std::string& name) const;  // throws std::out_of_range
    std::vector<double> values(const std::string& name) const;
};

/// Shortest-roundtrip style formatting with 17 significant digits.
std::string format_double(double v);

void write_csv(std::ostream& out, const Dataset& d);
void write_trajectory_csv(std::ostream& out, const Trajectory& t);

/// Writes `<dir>/<name>.csv` and `<dir>/<name>.meta.json`; creates `dir`.
void write_dataset(const std::filesystem::path& dir, const Dataset& d);
void write_text(const std::filesystem::path& path, const std::string& text);

nlohmann::json to_json(const SystemParams& p);
nlohmann::json to_json(const EffectiveParams& e);
nlohmann::json to_json(const IntegratorOptions& o);

/// Version string and ISO-8601 UTC timestamp used in metadata.
std::string library_version();
std::string utc_timestamp();

}  // namespace nrqb
