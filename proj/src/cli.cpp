#include "stkrig/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stkrig/errors.hpp"
#include "stkrig/estimate.hpp"
#include "stkrig/indeptest.hpp"
#include "stkrig/io.hpp"
#include "stkrig/krige.hpp"
#include "stkrig/parallel.hpp"
#include "stkrig/simulate.hpp"
#include "stkrig/version.hpp"

namespace fs = std::filesystem;

namespace stkrig {

namespace {

struct Options {
    unsigned threads = 0;
    std::string locations;
    std::string series;
    std::string model;
    std::string out;
    std::uint64_t seed = 0;

    // simulate
    std::size_t n = 0;
    bool noise = false;

    // spectra
    bool keep_mean = false;

    // estimate
    std::optional<double> nu_fixed;
    std::size_t p = 1;
    std::size_t M = 0;
    std::string bins = "auto";
    bool nugget = false;
    std::size_t multistart = 5;
    std::string criterion = "whittle";
    bool no_covariance = false;

    // krige
    std::string target;
    bool include_noise = false;

    // forecast
    std::string reconstructed;
    std::size_t horizons = 12;
    std::size_t pmax = 8;

    // test-indep
    std::optional<std::size_t> K;
    bool truncate = false;
};

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Every option of the subcommand with its effective value.
Json resolved_config(const CLI::App& app, unsigned threads) {
    Json j;
    for (const CLI::Option* opt : app.get_options()) {
        const std::string name = opt->get_single_name();
        if (name.empty() || name == "help") continue;
        if (opt->get_expected_min() == 0) {
            j[name] = opt->count() > 0;
        } else if (opt->count() > 0) {
            const auto results = opt->results();
            std::string joined;
            for (std::size_t i = 0; i < results.size(); ++i) joined += (i ? "," : "") + results[i];
            j[name] = joined;
        } else if (!opt->get_default_str().empty()) {
            j[name] = opt->get_default_str();
        } else {
            j[name] = nullptr;
        }
    }
    j["threads_resolved"] = threads;
    return j;
}

Json envelope(const std::string& command, const Json& config) {
    Json j;
    j["tool"] = "stkrig";
    j["version"] = kVersion;
    j["command"] = command;
    j["config"] = config;
    return j;
}

BinningSpec parse_bins(const std::string& text) {
    BinningSpec spec;
    if (text == "auto") {
        spec.mode = BinningMode::Auto;
    } else if (text == "exact") {
        spec.mode = BinningMode::Exact;
    } else if (text.rfind("quantile:", 0) == 0) {
        spec.mode = BinningMode::Quantile;
        try {
            const long L = std::stol(text.substr(9));
            if (L < 1) throw UsageError("--bins quantile:L needs L >= 1");
            spec.quantile_bins = static_cast<std::size_t>(L);
        } catch (const std::logic_error&) {
            throw UsageError("--bins: cannot parse '" + text + "'");
        }
    } else {
        throw UsageError("--bins must be auto, exact or quantile:L");
    }
    return spec;
}

Eigen::VectorXd parse_target(const std::string& text) {
    std::vector<double> coords;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            coords.push_back(std::stod(item, &used));
            if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
        } catch (const std::logic_error&) {
            throw UsageError("--target: cannot parse coordinate '" + item + "'");
        }
    }
    if (coords.empty()) throw UsageError("--target needs comma-separated coordinates");
    return Eigen::Map<Eigen::VectorXd>(coords.data(), static_cast<Eigen::Index>(coords.size()));
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create directory " + dir.string() + ": " + ec.message());
}

void ensure_parent(const fs::path& file) {
    if (file.has_parent_path()) ensure_dir(file.parent_path());
}

void run_simulate(const Options& o, Json doc) {
    const SiteLocations loc = read_locations(o.locations);
    SimulationSpec spec;
    spec.locations = loc.coords;
    spec.n = o.n;
    spec.params = read_model(o.model);
    spec.seed = o.seed;
    spec.include_measurement_error = o.noise;
    spec.threads = o.threads;
    SimulationReport report;
    const TimeSeriesPanel sim = simulate_panel(spec, &report);
    const TimeSeriesPanel panel(sim.locations(), sim.observations(), loc.ids);

    const fs::path dir(o.out);
    ensure_dir(dir);
    write_locations(dir / "locations.csv", panel);
    write_series(dir / "series.csv", panel);
    doc["result"] = {{"sites", panel.sites()},
                     {"n", panel.length()},
                     {"params", to_json(spec.params)},
                     {"jittered_frequencies", report.jittered_frequencies},
                     {"max_jitter", report.max_jitter},
                     {"locations_csv", (dir / "locations.csv").string()},
                     {"series_csv", (dir / "series.csv").string()}};
    write_json(dir / "simulate.json", doc);
}

void run_spectra(const Options& o, Json doc) {
    const TimeSeriesPanel panel = load_panel(o.locations, o.series);
    const SpectralPanel spectral = dft_panel(panel, !o.keep_mean, o.threads);
    const fs::path dir(o.out);
    ensure_dir(dir);
    const std::size_t m = panel.sites();
    const auto& ids = panel.site_ids();

    std::vector<Eigen::VectorXd> pg(m);
    for (std::size_t i = 0; i < m; ++i) pg[i] = periodogram(spectral, i);
    {
        std::ofstream out(dir / "periodograms.csv");
        out << "k,omega";
        for (const auto& id : ids) out << ',' << id;
        out << '\n';
        for (Eigen::Index k = 0; k < spectral.frequencies.size(); ++k) {
            out << k + 1 << ',' << format_double(spectral.frequencies[k]);
            for (std::size_t i = 0; i < m; ++i) out << ',' << format_double(pg[i][k]);
            out << '\n';
        }
    }
    {
        std::vector<Eigen::VectorXd> diff;
        std::ofstream out(dir / "difference_periodograms.csv");
        out << "k,omega";
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = i + 1; j < m; ++j) {
                out << ',' << ids[i] << '-' << ids[j];
                diff.push_back(difference_periodogram(spectral, i, j));
            }
        }
        out << '\n';
        for (Eigen::Index k = 0; k < spectral.frequencies.size(); ++k) {
            out << k + 1 << ',' << format_double(spectral.frequencies[k]);
            for (const auto& d : diff) out << ',' << format_double(d[k]);
            out << '\n';
        }
    }
    doc["result"] = {{"sites", m},
                     {"n", panel.length()},
                     {"frequencies", spectral.grid_size()},
                     {"mean_removed", spectral.mean_removed},
                     {"periodograms_csv", (dir / "periodograms.csv").string()},
                     {"difference_periodograms_csv", (dir / "difference_periodograms.csv").string()}};
    write_json(dir / "spectra.json", doc);
}

void run_estimate(const Options& o, Json doc) {
    const TimeSeriesPanel panel = load_panel(o.locations, o.series);
    FitConfig cfg;
    cfg.p = o.p;
    cfg.M = o.M;
    cfg.binning = parse_bins(o.bins);
    cfg.estimate_nugget = o.nugget;
    cfg.nu_fixed = o.nu_fixed;
    cfg.d = static_cast<int>(panel.dimension());
    cfg.multistart = o.multistart;
    cfg.seed = o.seed;
    cfg.compute_covariance = !o.no_covariance;
    cfg.threads = o.threads;
    if (o.criterion == "whittle") {
        cfg.criterion = CriterionKind::Whittle;
    } else if (o.criterion == "approximate") {
        cfg.criterion = CriterionKind::Approximate;
    } else {
        throw UsageError("--criterion must be whittle or approximate");
    }
    const FitResult result = fit(panel, cfg);
    doc["result"] = to_json(result);
    ensure_parent(o.out);
    write_json(o.out, doc);
}

void run_krige(const Options& o, Json doc) {
    const TimeSeriesPanel panel = load_panel(o.locations, o.series);
    const ModelParams params = read_model(o.model);
    const Eigen::VectorXd target = parse_target(o.target);
    if (static_cast<std::size_t>(target.size()) != panel.dimension()) {
        throw UsageError("--target has " + std::to_string(target.size()) + " coordinates, sites have " +
                         std::to_string(panel.dimension()));
    }
    KrigeConfig cfg;
    cfg.target_includes_noise = o.include_noise;
    cfg.threads = o.threads;
    const KrigingOutput result = krige(panel, target, params, cfg);

    const fs::path dir(o.out);
    ensure_dir(dir);
    write_single_series(dir / "target_series.csv", result.reconstructed);
    {
        std::ofstream out(dir / "target_spectrum.csv");
        out << "k,omega,re,im,mse\n";
        for (Eigen::Index k = 0; k < result.frequencies.size(); ++k) {
            out << k + 1 << ',' << format_double(result.frequencies[k]) << ','
                << format_double(result.predicted_dft[k].real()) << ','
                << format_double(result.predicted_dft[k].imag()) << ',' << format_double(result.mse[k]) << '\n';
        }
    }
    doc["result"] = to_json(result);
    doc["result"]["params"] = to_json(params);
    write_json(dir / "krige.json", doc);
}

void run_forecast(const Options& o, Json doc) {
    const Eigen::VectorXd series = read_single_series(o.reconstructed);
    const ForecastOutput result = forecast(series, o.horizons, o.pmax);
    doc["result"] = to_json(result);
    const fs::path out(o.out);
    ensure_parent(out);
    write_json(out, doc);
    fs::path csv = out;
    csv.replace_extension(".csv");
    std::ofstream table(csv);
    table << "h,forecast,mse\n";
    for (Eigen::Index h = 0; h < result.forecasts.size(); ++h) {
        table << h + 1 << ',' << format_double(result.forecasts[h]) << ','
              << format_double(result.forecast_mse[h]) << '\n';
    }
}

void run_test_indep(const Options& o, Json doc) {
    const TimeSeriesPanel panel = load_panel(o.locations, o.series);
    IndependenceConfig cfg;
    cfg.K = o.K;
    cfg.policy = o.truncate ? PartitionPolicy::Truncate : PartitionPolicy::Strict;
    cfg.threads = o.threads;
    doc["result"] = to_json(independence_test(panel, cfg));
    ensure_parent(o.out);
    write_json(o.out, doc);
}

void print_error(const std::string& command, const std::string& kind, const std::string& message) {
    Json j;
    j["tool"] = "stkrig";
    j["version"] = kVersion;
    j["command"] = command;
    j["error"] = {{"kind", kind}, {"message", message}};
    std::cout << j.dump(2) << '\n';
    std::cerr << "stkrig: " << message << '\n';
}

std::string error_kind(const std::exception& e) {
    if (dynamic_cast<const LoadError*>(&e)) return "load_error";
    if (dynamic_cast<const DomainError*>(&e)) return "domain_error";
    if (dynamic_cast<const RangeError*>(&e)) return "range_error";
    if (dynamic_cast<const SingularMatrixError*>(&e)) return "singular_matrix";
    if (dynamic_cast<const SingularHessianError*>(&e)) return "singular_hessian";
    if (dynamic_cast<const EvaluationError*>(&e)) return "evaluation_error";
    if (dynamic_cast<const EstimationError*>(&e)) return "estimation_error";
    return "runtime_error";
}

}  // namespace

int run_cli(int argc, char** argv) {
    CLI::App app{"Frequency-domain space-time kriging and spectral analysis", "stkrig"};
    app.set_version_flag("--version", kVersion);
    app.set_config("--config", "", "TOML/INI file with option values; command-line flags override it");
    app.require_subcommand(1);
    Options o;

    auto add_threads = [&](CLI::App* sub) {
        sub->add_option("--threads", o.threads, "worker threads, 0 = STKRIG_THREADS or all cores")
            ->default_val(0);
    };
    auto add_panel = [&](CLI::App* sub) {
        sub->add_option("--locations", o.locations, "CSV site_id,x1,...,xd")->required()->check(CLI::ExistingFile);
        sub->add_option("--series", o.series, "CSV t,<site_id>,...")->required()->check(CLI::ExistingFile);
    };

    auto* simulate = app.add_subcommand("simulate", "simulate a panel from a model");
    simulate->add_option("--locations", o.locations, "CSV site_id,x1,...,xd")->required()->check(CLI::ExistingFile);
    simulate->add_option("--model", o.model, "model JSON")->required()->check(CLI::ExistingFile);
    simulate->add_option("--n", o.n, "series length")->required();
    simulate->add_option("--seed", o.seed, "random seed")->default_val(0);
    simulate->add_flag("--noise", o.noise, "add N(0, nugget) measurement error");
    simulate->add_option("--out", o.out, "output directory")->required();
    add_threads(simulate);

    auto* spectra = app.add_subcommand("spectra", "per-site and pairwise difference periodograms");
    add_panel(spectra);
    spectra->add_flag("--keep-mean", o.keep_mean, "do not centre the series");
    spectra->add_option("--out", o.out, "output directory")->required();
    add_threads(spectra);

    auto* estimate = app.add_subcommand("estimate", "Whittle fit of the covariance model");
    add_panel(estimate);
    estimate->add_option("--nu-fixed", o.nu_fixed, "hold nu fixed at this value");
    estimate->add_option("--p", o.p, "cosine terms in |c(w)|^2")->default_val(1);
    estimate->add_option("--M", o.M, "frequencies used, 0 = all")->default_val(0);
    estimate->add_option("--bins", o.bins, "auto, exact or quantile:L")->default_val("auto");
    estimate->add_flag("--nugget", o.nugget, "estimate a nugget");
    estimate->add_option("--multistart", o.multistart, "optimizer restarts")->default_val(5);
    estimate->add_option("--seed", o.seed, "restart seed")->default_val(0);
    estimate->add_option("--criterion", o.criterion, "whittle or approximate")->default_val("whittle");
    estimate->add_flag("--no-covariance", o.no_covariance, "skip the sandwich covariance");
    estimate->add_option("--out", o.out, "output JSON")->required();
    add_threads(estimate);

    auto* krige_cmd = app.add_subcommand("krige", "predict the series at an unobserved location");
    add_panel(krige_cmd);
    krige_cmd->add_option("--model", o.model, "model or fit JSON")->required()->check(CLI::ExistingFile);
    krige_cmd->add_option("--target", o.target, "target coordinates, e.g. \"3.5,2.0\"")->required();
    krige_cmd->add_flag("--include-noise", o.include_noise, "predict the noisy observation");
    krige_cmd->add_option("--out", o.out, "output directory")->required();
    add_threads(krige_cmd);

    auto* forecast_cmd = app.add_subcommand("forecast", "AR forecast of a single series");
    forecast_cmd->add_option("--reconstructed", o.reconstructed, "CSV t,value")->required()->check(CLI::ExistingFile);
    forecast_cmd->add_option("--horizons", o.horizons, "steps ahead")->default_val(12);
    forecast_cmd->add_option("--pmax", o.pmax, "largest AR order")->default_val(8);
    forecast_cmd->add_option("--out", o.out, "output JSON (a CSV is written alongside)")->required();

    auto* indep = app.add_subcommand("test-indep", "test mutual independence of the site series");
    add_panel(indep);
    indep->add_option("--K", o.K, "half-window; default is the smallest admissible K with 2K+1 >= 2m");
    indep->add_flag("--truncate", o.truncate, "leave trailing frequencies out instead of requiring exact blocks");
    indep->add_option("--out", o.out, "output JSON")->required();
    add_threads(indep);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::string command;
        if (!app.get_subcommands().empty()) command = app.get_subcommands().front()->get_name();
        print_error(command, "usage_error", e.what());
        return 2;
    }

    CLI::App* sub = app.get_subcommands().front();
    const std::string command = sub->get_name();
    o.threads = resolve_threads(o.threads);
    try {
        const Json doc = envelope(command, resolved_config(*sub, o.threads));
        if (command == "simulate") run_simulate(o, doc);
        else if (command == "spectra") run_spectra(o, doc);
        else if (command == "estimate") run_estimate(o, doc);
        else if (command == "krige") run_krige(o, doc);
        else if (command == "forecast") run_forecast(o, doc);
        else if (command == "test-indep") run_test_indep(o, doc);
    } catch (const UsageError& e) {
        print_error(command, "usage_error", e.what());
        return 2;
    } catch (const std::exception& e) {
        print_error(command, error_kind(e), e.what());
        return 1;
    }
    return 0;
}

}  // namespace stkrig
