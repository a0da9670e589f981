#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "nsplab/dispersive.hpp"

namespace nsplab {

using json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kCodeVersion = "0.4.0";

// Write to a sibling temp file, then rename over the target.
void write_atomic(const std::filesystem::path& path, const std::string& content);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
    std::string to_string() const;  // %.17g, so a reread is bit exact
};

void write_csv(const std::filesystem::path& path, const CsvTable& t);
void write_json(const std::filesystem::path& path, const json& j);

// Every JSON summary carries {"schema": "nsplab.<kind>", "schema_version": 1}.
json versioned(const std::string& kind);

json to_json(const DecayFit& f);
CsvTable decay_table(const DecayFit& f, double eps, double kappa0, int d);

}  // namespace nsplab
