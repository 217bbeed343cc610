#include "stkrig/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "stkrig/errors.hpp"

namespace stkrig {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        cells.push_back(trim(std::string_view(line).substr(start, comma - start)));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return cells;
}

Json vec(const Eigen::VectorXd& v) {
    Json a = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

Json mat(const Eigen::MatrixXd& m) {
    Json a = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(vec(m.row(i).transpose()));
    return a;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

}  // namespace

Table read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw LoadError(path.string() + ": cannot open");
    Table table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto cells = split(line);
        if (table.header.empty()) {
            table.header = std::move(cells);
            continue;
        }
        if (cells.size() != table.header.size()) {
            throw LoadError(path.string() + ": line " + std::to_string(line_no) + " has " +
                            std::to_string(cells.size()) + " cells, header has " +
                            std::to_string(table.header.size()));
        }
        table.rows.push_back(std::move(cells));
    }
    if (table.header.empty()) throw LoadError(path.string() + ": empty file");
    return table;
}

double parse_cell(const Table& table, std::size_t row, std::size_t col, const std::string& path) {
    const std::string& cell = table.rows[row][col];
    auto fail = [&](const std::string& why) {
        return LoadError(path + ": " + why + " at (row " + std::to_string(row + 1) + ", column '" +
                         table.header[col] + "')");
    };
    if (cell.empty()) throw fail("blank cell");
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (ec != std::errc() || ptr != cell.data() + cell.size()) throw fail("unparseable value '" + cell + "'");
    if (!std::isfinite(value)) throw fail("non-finite value");
    return value;
}

SiteLocations read_locations(const std::filesystem::path& path) {
    const Table t = read_csv(path);
    const std::string name = path.string();
    if (t.header.size() < 2 || t.header[0] != "site_id") {
        throw LoadError(name + ": header must be site_id,x1,...,xd");
    }
    if (t.rows.empty()) throw LoadError(name + ": no sites");
    SiteLocations out;
    const std::size_t d = t.header.size() - 1;
    out.coords.resize(static_cast<Eigen::Index>(t.rows.size()), static_cast<Eigen::Index>(d));
    std::set<std::string> seen_ids;
    std::map<std::vector<double>, std::size_t> seen_coords;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const std::string& id = t.rows[r][0];
        if (id.empty()) throw LoadError(name + ": blank site_id at (row " + std::to_string(r + 1) + ", column 'site_id')");
        if (!seen_ids.insert(id).second) throw LoadError(name + ": duplicate site_id '" + id + "'");
        std::vector<double> xy(d);
        for (std::size_t c = 0; c < d; ++c) {
            xy[c] = parse_cell(t, r, c + 1, name);
            out.coords(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = xy[c];
        }
        const auto [it, inserted] = seen_coords.emplace(xy, r);
        if (!inserted) {
            throw LoadError(name + ": duplicate location for sites '" + t.rows[it->second][0] + "' and '" + id +
                            "' (row " + std::to_string(r + 1) + ")");
        }
        out.ids.push_back(id);
    }
    return out;
}

TimeSeriesPanel load_panel(const std::filesystem::path& locations_path,
                           const std::filesystem::path& series_path) {
    SiteLocations loc = read_locations(locations_path);
    const Table t = read_csv(series_path);
    const std::string name = series_path.string();
    if (t.header.empty() || t.header[0] != "t") throw LoadError(name + ": first column must be 't'");
    const std::vector<std::string> ids(t.header.begin() + 1, t.header.end());
    if (ids != loc.ids) {
        std::ostringstream msg;
        msg << name << ": site ids do not match the locations file";
        for (std::size_t i = 0; i < std::max(ids.size(), loc.ids.size()); ++i) {
            const std::string a = i < ids.size() ? ids[i] : "<missing>";
            const std::string b = i < loc.ids.size() ? loc.ids[i] : "<missing>";
            if (a != b) {
                msg << " (column " << i + 2 << ": '" << a << "' vs '" << b << "')";
                break;
            }
        }
        throw LoadError(msg.str());
    }
    const auto m = static_cast<Eigen::Index>(ids.size());
    const auto n = static_cast<Eigen::Index>(t.rows.size());
    Eigen::MatrixXd obs(m, n);
    for (Eigen::Index r = 0; r < n; ++r) {
        parse_cell(t, static_cast<std::size_t>(r), 0, name);
        for (Eigen::Index i = 0; i < m; ++i) {
            obs(i, r) = parse_cell(t, static_cast<std::size_t>(r), static_cast<std::size_t>(i + 1), name);
        }
    }
    try {
        return TimeSeriesPanel(std::move(loc.coords), std::move(obs), std::move(loc.ids));
    } catch (const DomainError& e) {
        throw LoadError(name + ": " + e.what());
    }
}

std::string format_double(double x) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, ptr);
}

void write_locations(const std::filesystem::path& path, const TimeSeriesPanel& panel) {
    auto out = open_out(path);
    out << "site_id";
    for (std::size_t c = 0; c < panel.dimension(); ++c) out << ",x" << c + 1;
    out << '\n';
    for (std::size_t i = 0; i < panel.sites(); ++i) {
        out << panel.site_ids()[i];
        for (std::size_t c = 0; c < panel.dimension(); ++c) {
            out << ',' << format_double(panel.locations()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)));
        }
        out << '\n';
    }
}

void write_series(const std::filesystem::path& path, const TimeSeriesPanel& panel) {
    auto out = open_out(path);
    out << 't';
    for (const auto& id : panel.site_ids()) out << ',' << id;
    out << '\n';
    for (std::size_t t = 0; t < panel.length(); ++t) {
        out << t + 1;
        for (std::size_t i = 0; i < panel.sites(); ++i) {
            out << ',' << format_double(panel.observations()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)));
        }
        out << '\n';
    }
}

Eigen::VectorXd read_single_series(const std::filesystem::path& path) {
    const Table t = read_csv(path);
    if (t.header.size() != 2) throw LoadError(path.string() + ": expected two columns t,value");
    Eigen::VectorXd v(static_cast<Eigen::Index>(t.rows.size()));
    for (std::size_t r = 0; r < t.rows.size(); ++r) v[static_cast<Eigen::Index>(r)] = parse_cell(t, r, 1, path.string());
    return v;
}

void write_single_series(const std::filesystem::path& path, const Eigen::VectorXd& values,
                         const std::string& name) {
    auto out = open_out(path);
    out << "t," << name << '\n';
    for (Eigen::Index t = 0; t < values.size(); ++t) out << t + 1 << ',' << format_double(values[t]) << '\n';
}

Json to_json(const ModelParams& p) {
    Json j;
    j["sigma_e2"] = p.sigma_e2;
    j["nu"] = p.nu;
    j["c_coeffs"] = vec(p.c_coeffs);
    j["nugget"] = p.nugget;
    j["d"] = p.d;
    if (p.planar_constant) j["planar_constant"] = true;
    return j;
}

ModelParams model_from_json(const Json& j) {
    if (j.contains("result")) return model_from_json(j.at("result"));
    if (j.contains("params")) return model_from_json(j.at("params"));
    ModelParams p;
    try {
        p.sigma_e2 = j.at("sigma_e2").get<double>();
        p.nu = j.at("nu").get<double>();
        const auto coeffs = j.at("c_coeffs").get<std::vector<double>>();
        p.c_coeffs = Eigen::Map<const Eigen::VectorXd>(coeffs.data(), static_cast<Eigen::Index>(coeffs.size()));
        p.nugget = j.value("nugget", 0.0);
        p.d = j.value("d", 2);
        p.planar_constant = j.value("planar_constant", false);
    } catch (const nlohmann::json::exception& e) {
        throw LoadError(std::string("model JSON: ") + e.what());
    }
    p.validate();
    return p;
}

Json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw LoadError(path.string() + ": cannot open");
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw LoadError(path.string() + ": " + e.what());
    }
}

ModelParams read_model(const std::filesystem::path& path) { return model_from_json(read_json(path)); }

void write_json(const std::filesystem::path& path, const Json& j) {
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

Json to_json(const DistanceBins& bins) {
    Json a = Json::array();
    for (const auto& b : bins.bins) {
        a.push_back({{"distance", b.distance},
                     {"pairs", b.pairs.size()},
                     {"min_distance", b.min_distance},
                     {"max_distance", b.max_distance}});
    }
    return a;
}

Json to_json(const FitResult& fit) {
    Json j;
    j["params"] = to_json(fit.params_hat);
    j["criterion_value"] = fit.criterion_value;
    j["converged"] = fit.converged;
    j["frequencies_used"] = fit.frequencies_used;
    j["coordinates"] = coordinate_names(fit.layout);
    j["theta_hat"] = vec(fit.theta_hat);
    if (fit.asymptotic_covariance) {
        j["asymptotic_covariance"] = mat(*fit.asymptotic_covariance);
        Json se = Json::array();
        for (Eigen::Index i = 0; i < fit.asymptotic_covariance->rows(); ++i) {
            se.push_back(std::sqrt(std::max(0.0, (*fit.asymptotic_covariance)(i, i))));
        }
        j["standard_errors"] = se;
    } else {
        j["asymptotic_covariance"] = nullptr;
        j["covariance_error"] = fit.covariance_error;
    }
    j["distance_bins"] = to_json(fit.bins_used);
    Json restarts = Json::array();
    for (const auto& r : fit.restarts) {
        restarts.push_back({{"start_value", r.start_value},
                            {"final_value", r.final_value},
                            {"converged", r.converged},
                            {"evaluations", r.evaluations}});
    }
    j["restarts"] = restarts;
    return j;
}

Json to_json(const KrigingOutput& out) {
    Json j;
    j["target"] = vec(out.target);
    j["site_mean"] = out.site_mean;
    j["frequencies"] = vec(out.frequencies);
    j["predicted_dft_re"] = vec(out.predicted_dft.real());
    j["predicted_dft_im"] = vec(out.predicted_dft.imag());
    j["mse"] = vec(out.mse);
    j["nyquist"] = out.nyquist.real();
    j["jitter"] = out.jitter;
    Json failed = Json::array();
    for (std::size_t k = 0; k < out.failed.size(); ++k) {
        if (out.failed[k]) failed.push_back({{"k", k + 1}, {"message", out.failure_messages[k]}});
    }
    j["failed_frequencies"] = failed;
    j["clamped_mse"] = out.clamped_mse;
    j["imag_residue"] = out.imag_residue;
    j["reconstructed"] = vec(out.reconstructed);
    return j;
}

Json to_json(const ForecastOutput& out) {
    Json j;
    j["ar_order"] = out.ar_order;
    j["ar_coefficients"] = vec(out.ar_coefficients);
    j["innovation_variance"] = out.innovation_variance;
    j["mean"] = out.mean;
    j["forecasts"] = vec(out.forecasts);
    j["forecast_mse"] = vec(out.forecast_mse);
    Json cands = Json::array();
    for (const auto& c : out.candidates) {
        cands.push_back({{"order", c.order},
                         {"coefficients", vec(c.coefficients)},
                         {"innovation_variance", c.innovation_variance},
                         {"whittle", c.whittle},
                         {"aic", c.aic}});
    }
    j["candidates"] = cands;
    j["warnings"] = out.warnings;
    return j;
}

Json to_json(const IndependenceTestResult& out) {
    Json j;
    j["lambda_bar"] = out.lambda_bar;
    j["per_frequency_lambdas"] = vec(out.per_frequency_lambdas);
    j["mean_null"] = out.mean_null;
    j["var_null"] = out.var_null;
    j["z_score"] = out.z_score;
    j["p_value"] = out.p_value;
    j["K"] = out.K;
    j["K_prime"] = out.K_prime;
    j["M1"] = out.M1;
    j["n_used"] = out.n_used;
    j["centers"] = out.centers;
    j["repaired_blocks"] = out.repaired_blocks;
    j["warnings"] = out.warnings;
    return j;
}

}  // namespace stkrig
