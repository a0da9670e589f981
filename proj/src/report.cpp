#include "nsplab/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace nsplab {

void write_atomic(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        os << content;
        os.flush();
        if (!os) throw std::runtime_error("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string CsvTable::to_string() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
    os << '\n';
    char buf[32];
    for (const auto& row : rows) {
        if (row.size() != header.size()) throw std::logic_error("csv: row width does not match header");
        for (std::size_t i = 0; i < row.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", row[i]);
            os << (i ? "," : "") << buf;
        }
        os << '\n';
    }
    return os.str();
}

void write_csv(const std::filesystem::path& path, const CsvTable& t) { write_atomic(path, t.to_string()); }

void write_json(const std::filesystem::path& path, const json& j) { write_atomic(path, j.dump(2) + "\n"); }

json versioned(const std::string& kind) {
    json j;
    j["schema"] = "nsplab." + kind;
    j["schema_version"] = kSchemaVersion;
    return j;
}

json to_json(const DecayFit& f) {
    json j;
    j["exponent"] = f.exponent;
    j["intercept"] = f.intercept;
    j["residual"] = f.residual;
    j["fit_window"] = {f.t_min, f.t_max};
    j["times"] = f.times;
    j["values"] = f.values;
    return j;
}

CsvTable decay_table(const DecayFit& f, double eps, double kappa0, int d) {
    CsvTable t{{"eps", "kappa0", "d", "t", "value"}, {}};
    for (std::size_t i = 0; i < f.times.size(); ++i)
        t.rows.push_back({eps, kappa0, static_cast<double>(d), f.times[i], f.values[i]});
    return t;
}

}  // namespace nsplab
