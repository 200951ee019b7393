#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <msid/msid.h>

namespace {

// Exit codes: 0 success, 2 usage error, 3 data validation error, 4 numerical
// failure.
int exit_code(msid_status status) {
    switch (status) {
        case MSID_OK:
            return 0;
        case MSID_ERR_ARGUMENT:
            return 2;
        case MSID_ERR_IO:
        case MSID_ERR_DATA:
            return 3;
        default:
            return 4;
    }
}

int fail(msid_status status) {
    std::cerr << "error: " << msid_last_error() << "\n";
    return exit_code(status);
}

/// MSID_OUT_DIR relocates relative output paths; absolute paths win.
std::string resolve_output(const std::string& path) {
    const char* base = std::getenv("MSID_OUT_DIR");
    if (base == nullptr || *base == '\0') {
        return path;
    }
    const std::filesystem::path p(path);
    if (p.is_absolute()) {
        return path;
    }
    return (std::filesystem::path(base) / p).string();
}

struct DesignFlags {
    msid_design_params params{};
    std::string out = "design.json";
};

int cmd_design(const DesignFlags& flags) {
    msid_design* design = nullptr;
    msid_status status = msid_design_create(&flags.params, &design);
    if (status != MSID_OK) {
        return fail(status);
    }
    const std::string path = resolve_output(flags.out);
    status = msid_design_save(design, path.c_str());
    if (status != MSID_OK) {
        msid_design_free(design);
        return fail(status);
    }

    int32_t num_bins = 0;
    msid_design_num_bins(design, &num_bins);
    std::vector<int32_t> bins(static_cast<std::size_t>(num_bins));
    std::vector<double> freqs(static_cast<std::size_t>(num_bins));
    msid_design_excited_bins(design, bins.data(), bins.size());
    msid_design_frequencies_hz(design, freqs.data(), freqs.size());
    double rms = 0.0;
    double crest = 0.0;
    status = msid_design_signal_stats(design, 0, &rms, &crest);
    msid_design_free(design);
    if (status != MSID_OK) {
        return fail(status);
    }

    std::cout << "design written to " << path << "\n";
    std::cout << "excited bins: " << num_bins << "\n";
    std::cout << "bin\tfreq_hz\n";
    for (std::size_t i = 0; i < bins.size(); ++i) {
        std::cout << bins[i] << "\t" << freqs[i] << "\n";
    }
    std::cout << "period rms: " << rms << "\ncrest factor: " << crest << "\n";
    return 0;
}

struct SimulateFlags {
    std::string design;
    std::string plant;
    int32_t periods = 1;
    std::string out = ".";
    std::string basename = "record";
};

int cmd_simulate(const SimulateFlags& flags) {
    msid_design* design = nullptr;
    msid_status status = msid_design_load(flags.design.c_str(), &design);
    if (status != MSID_OK) {
        return fail(status);
    }
    msid_plant* plant = nullptr;
    status = msid_plant_load(flags.plant.c_str(), &plant);
    if (status != MSID_OK) {
        msid_design_free(design);
        return fail(status);
    }
    const std::string out_dir = resolve_output(flags.out);
    int32_t num_records = 0;
    status = msid_simulate(design, plant, flags.periods, out_dir.c_str(),
                           flags.basename.c_str(), &num_records);
    msid_plant_free(plant);
    msid_design_free(design);
    if (status != MSID_OK) {
        return fail(status);
    }
    for (int32_t m = 0; m < num_records; ++m) {
        char name[32];
        std::snprintf(name, sizeof(name), "_r%03d.csv", m);
        std::cout << (std::filesystem::path(out_dir) / (flags.basename + name)).string()
                  << "\n";
    }
    return 0;
}

struct AnalyzeFlags {
    std::string design;
    std::vector<std::string> records;
    std::string method = "etfe";
    int32_t lpm_order = 2;
    int32_t lpm_half_width = 0;
    double drift_threshold = 0.05;
    std::string out = ".";
};

int cmd_analyze(const AnalyzeFlags& flags) {
    msid_analysis_options options;
    msid_analysis_options_init(&options);
    options.use_lpm = flags.method == "lpm" ? 1 : 0;
    options.lpm_poly_order = flags.lpm_order;
    options.lpm_half_width = flags.lpm_half_width;
    options.drift_threshold = flags.drift_threshold;

    std::vector<const char*> paths;
    paths.reserve(flags.records.size());
    for (const std::string& r : flags.records) {
        paths.push_back(r.c_str());
    }
    msid_analysis* analysis = nullptr;
    msid_status status = msid_analyze(flags.design.c_str(), paths.data(), paths.size(),
                                      &options, &analysis);
    if (status != MSID_OK) {
        return fail(status);
    }
    const std::string out_dir = resolve_output(flags.out);
    status = msid_analysis_save(analysis, out_dir.c_str());
    if (status != MSID_OK) {
        msid_analysis_free(analysis);
        return fail(status);
    }
    size_t length = 0;
    msid_analysis_summary_text(analysis, nullptr, 0, &length);
    std::string text(length, '\0');
    status = msid_analysis_summary_text(analysis, text.data(), length + 1, &length);
    msid_analysis_free(analysis);
    if (status != MSID_OK) {
        return fail(status);
    }
    std::cout << "report written to "
              << (std::filesystem::path(out_dir) / "report.json").string() << "\n";
    std::cout << text;
    return 0;
}

struct ReportFlags {
    std::string report;
    std::string out = ".";
    std::string format = "csv";
};

int cmd_report(const ReportFlags& flags) {
    const std::string out_dir = resolve_output(flags.out);
    const msid_status status =
        msid_report(flags.report.c_str(), out_dir.c_str(), flags.format.c_str());
    if (status != MSID_OK) {
        return fail(status);
    }
    std::cout << "figure bundle written to " << out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multisine system-identification toolkit"};
    app.set_version_flag("--version", msid_version());
    app.require_subcommand(1);

    DesignFlags design_flags;
    msid_design_params_init(&design_flags.params);
    CLI::App* design = app.add_subcommand(
        "design", "create a random-phase multisine excitation design");
    design->add_option("--fs", design_flags.params.reference_rate_hz,
                       "reference sample rate [Hz]")
        ->capture_default_str();
    design->add_option("--n", design_flags.params.samples_per_period,
                       "samples per period at the reference rate")
        ->capture_default_str();
    design->add_option("--fmin", design_flags.params.f_min_hz, "band lower edge [Hz]")
        ->capture_default_str();
    design->add_option("--fmax", design_flags.params.f_max_hz, "band upper edge [Hz]")
        ->capture_default_str();
    design->add_option("--amp", design_flags.params.amplitude, "per-tone amplitude")
        ->capture_default_str();
    design->add_option("--prefix", design_flags.params.prefix_samples,
                       "steady-state lead-in samples (reference rate)")
        ->capture_default_str();
    design->add_option("--realizations", design_flags.params.num_realizations,
                       "number of phase realizations")
        ->capture_default_str();
    design->add_option("--seed", design_flags.params.seed, "phase generator seed")
        ->capture_default_str();
    design->add_option("--upsample", design_flags.params.upsample_factor,
                       "zero-order-hold factor to the acquisition rate")
        ->capture_default_str();
    design->add_option("--out", design_flags.out, "design file to write")
        ->capture_default_str();

    SimulateFlags simulate_flags;
    CLI::App* simulate = app.add_subcommand(
        "simulate", "run a synthetic plant against every design realization");
    simulate->add_option("--design", simulate_flags.design, "design JSON file")
        ->required();
    simulate->add_option("--plant", simulate_flags.plant, "plant JSON file")->required();
    simulate->add_option("--periods", simulate_flags.periods, "periods per record")
        ->capture_default_str();
    simulate->add_option("--out", simulate_flags.out, "output directory")
        ->capture_default_str();
    simulate->add_option("--basename", simulate_flags.basename, "record file prefix")
        ->capture_default_str();

    AnalyzeFlags analyze_flags;
    CLI::App* analyze = app.add_subcommand(
        "analyze", "estimate the best linear approximation from records");
    analyze->add_option("--design", analyze_flags.design, "design JSON file")->required();
    analyze->add_option("--records", analyze_flags.records, "record CSV files")
        ->required();
    analyze->add_option("--method", analyze_flags.method, "reported FRF curve")
        ->check(CLI::IsMember({"etfe", "lpm"}))
        ->capture_default_str();
    analyze->add_option("--lpm-order", analyze_flags.lpm_order,
                        "local polynomial order")
        ->capture_default_str();
    analyze
        ->add_option("--lpm-halfwidth", analyze_flags.lpm_half_width,
                     "window half width in excited bins (0 = automatic)")
        ->capture_default_str();
    analyze
        ->add_option("--drift-threshold", analyze_flags.drift_threshold,
                     "relative set-point shift that raises a flag")
        ->capture_default_str();
    analyze->add_option("--out", analyze_flags.out, "output directory")
        ->capture_default_str();

    ReportFlags report_flags;
    CLI::App* report =
        app.add_subcommand("report", "emit plot-ready figure files from a report");
    report->add_option("--report", report_flags.report, "report JSON file")->required();
    report->add_option("--out", report_flags.out, "output directory")
        ->capture_default_str();
    report->add_option("--format", report_flags.format, "figure file format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (design->parsed()) {
        return cmd_design(design_flags);
    }
    if (simulate->parsed()) {
        return cmd_simulate(simulate_flags);
    }
    if (analyze->parsed()) {
        return cmd_analyze(analyze_flags);
    }
    return cmd_report(report_flags);
}
