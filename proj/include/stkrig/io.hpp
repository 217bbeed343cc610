#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "stkrig/covmodel.hpp"
#include "stkrig/estimate.hpp"
#include "stkrig/indeptest.hpp"
#include "stkrig/krige.hpp"
#include "stkrig/spectral.hpp"

namespace stkrig {

using Json = nlohmann::ordered_json;

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;  // every row has header.size() cells
};

/// Comma-separated file with a header line. Blank lines are skipped; rows with
/// the wrong number of cells raise LoadError naming the line.
Table read_csv(const std::filesystem::path& path);

/// Numeric cell; LoadError cites `path`, 1-based data row and the column name.
double parse_cell(const Table& table, std::size_t row, std::size_t col, const std::string& path);

struct SiteLocations {
    std::vector<std::string> ids;
    Eigen::MatrixXd coords;  // m x d
};

/// Header `site_id,x1,...,xd`; duplicate ids or coordinates are rejected.
SiteLocations read_locations(const std::filesystem::path& path);

/// Locations plus a series file with header `t,<site_id>,...` whose ids match exactly.
TimeSeriesPanel load_panel(const std::filesystem::path& locations_path,
                           const std::filesystem::path& series_path);

void write_locations(const std::filesystem::path& path, const TimeSeriesPanel& panel);
void write_series(const std::filesystem::path& path, const TimeSeriesPanel& panel);

/// Second column of a `t,value` file.
Eigen::VectorXd read_single_series(const std::filesystem::path& path);
void write_single_series(const std::filesystem::path& path, const Eigen::VectorXd& values,
                         const std::string& name = "value");

/// Shortest round-trip decimal form.
std::string format_double(double x);

Json to_json(const ModelParams& params);
/// Accepts a bare parameter object, a fit result (key "params") or a CLI
/// output document wrapping one under "result".
ModelParams model_from_json(const Json& j);
ModelParams read_model(const std::filesystem::path& path);

Json to_json(const DistanceBins& bins);
Json to_json(const FitResult& fit);
Json to_json(const KrigingOutput& out);
Json to_json(const ForecastOutput& out);
Json to_json(const IndependenceTestResult& out);

Json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const Json& j);

}  // namespace stkrig
