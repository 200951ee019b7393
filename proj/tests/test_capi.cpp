#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include <msid/msid.h>

namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "msid_test_capi" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

const char* kPlantJson = R"({
  "plant": {
    "kind": "lti",
    "b": [1.0],
    "a": [1.0, -0.5],
    "poly": [],
    "noise_std": 1e-6,
    "seed": 11
  }
})";

}  // namespace

TEST_CASE("version and error channel basics") {
    REQUIRE(msid_version() != nullptr);
    CHECK(std::strlen(msid_version()) > 0);

    CHECK(msid_design_create(nullptr, nullptr) == MSID_ERR_ARGUMENT);
    CHECK(std::strlen(msid_last_error()) > 0);
}

TEST_CASE("design lifecycle through the C interface") {
    msid_design_params params;
    msid_design_params_init(&params);
    CHECK(params.reference_rate_hz == doctest::Approx(31.25));
    CHECK(params.samples_per_period == 400);
    CHECK(params.upsample_factor == 32);

    params.num_realizations = 2;
    params.seed = 7;

    msid_design* design = nullptr;
    REQUIRE(msid_design_create(&params, &design) == MSID_OK);
    REQUIRE(design != nullptr);

    int32_t num_bins = 0;
    REQUIRE(msid_design_num_bins(design, &num_bins) == MSID_OK);
    CHECK(num_bins == 12);

    std::vector<int32_t> bins(num_bins);
    REQUIRE(msid_design_excited_bins(design, bins.data(), bins.size()) == MSID_OK);
    for (int i = 0; i < num_bins; ++i) {
        CHECK(bins[i] == i + 1);
    }
    CHECK(msid_design_excited_bins(design, bins.data(), 3) == MSID_ERR_ARGUMENT);

    std::vector<double> freqs(num_bins);
    REQUIRE(msid_design_frequencies_hz(design, freqs.data(), freqs.size()) == MSID_OK);
    CHECK(freqs[0] == doctest::Approx(31.25 / 400.0));
    CHECK(freqs[11] == doctest::Approx(12.0 * 31.25 / 400.0));

    size_t len = 0;
    REQUIRE(msid_design_reference_signal(design, 0, nullptr, 0, &len) == MSID_OK);
    CHECK(len == 500);  // prefix 100 + period 400
    std::vector<double> samples(len);
    REQUIRE(msid_design_reference_signal(design, 0, samples.data(), samples.size(),
                                         &len) == MSID_OK);
    // the prefix is the period tail
    for (int i = 0; i < 100; ++i) {
        CHECK(samples[i] == samples[i + 400]);
    }
    CHECK(msid_design_reference_signal(design, 5, samples.data(), samples.size(),
                                       &len) == MSID_ERR_ARGUMENT);

    double rms = 0.0;
    double crest = 0.0;
    REQUIRE(msid_design_signal_stats(design, 0, &rms, &crest) == MSID_OK);
    CHECK(rms == doctest::Approx(0.02 * std::sqrt(6.0)).epsilon(1e-10));
    CHECK(crest > 1.0);

    const fs::path dir = fresh_dir("design");
    const std::string path = (dir / "design.json").string();
    REQUIRE(msid_design_save(design, path.c_str()) == MSID_OK);

    msid_design* loaded = nullptr;
    REQUIRE(msid_design_load(path.c_str(), &loaded) == MSID_OK);
    msid_design_params roundtrip;
    REQUIRE(msid_design_get_params(loaded, &roundtrip) == MSID_OK);
    CHECK(roundtrip.seed == 7);
    CHECK(roundtrip.num_realizations == 2);

    msid_design_free(design);
    msid_design_free(loaded);
    msid_design_free(nullptr);  // must be a no-op
}

TEST_CASE("failure paths map onto the documented status codes") {
    msid_design* design = nullptr;
    CHECK(msid_design_load("/nonexistent/design.json", &design) == MSID_ERR_IO);
    CHECK(design == nullptr);
    CHECK(std::string(msid_last_error()).find("design") != std::string::npos);

    msid_design_params params;
    msid_design_params_init(&params);
    params.amplitude = -1.0;
    CHECK(msid_design_create(&params, &design) == MSID_ERR_ARGUMENT);

    msid_design_params_init(&params);
    params.f_min_hz = 0.080;  // between bin 1 (0.078125) and bin 2 (0.15625)
    params.f_max_hz = 0.090;
    CHECK(msid_design_create(&params, &design) == MSID_ERR_DATA);

    msid_plant* plant = nullptr;
    CHECK(msid_plant_from_json("{ broken", &plant) == MSID_ERR_IO);
    CHECK(msid_plant_from_json("{}", &plant) == MSID_ERR_DATA);
    const char* unstable = R"({"plant":{"kind":"lti","b":[1.0],"a":[1.0,-2.0],
                               "poly":[],"noise_std":0.0,"seed":1}})";
    CHECK(msid_plant_from_json(unstable, &plant) == MSID_ERR_NUMERIC);
    CHECK(std::string(msid_last_error()).find("unstable") != std::string::npos);
}

TEST_CASE("simulate, analyze, save and report end to end") {
    const fs::path dir = fresh_dir("chain");

    msid_design_params params;
    msid_design_params_init(&params);
    params.num_realizations = 2;
    params.upsample_factor = 1;  // keep the test quick
    params.seed = 3;
    msid_design* design = nullptr;
    REQUIRE(msid_design_create(&params, &design) == MSID_OK);
    const std::string design_path = (dir / "design.json").string();
    REQUIRE(msid_design_save(design, design_path.c_str()) == MSID_OK);

    msid_plant* plant = nullptr;
    REQUIRE(msid_plant_from_json(kPlantJson, &plant) == MSID_OK);
    const std::string plant_path = (dir / "plant.json").string();
    REQUIRE(msid_plant_save(plant, plant_path.c_str()) == MSID_OK);
    msid_plant* plant_loaded = nullptr;
    REQUIRE(msid_plant_load(plant_path.c_str(), &plant_loaded) == MSID_OK);
    msid_plant_free(plant_loaded);

    int32_t num_records = 0;
    REQUIRE(msid_simulate(design, plant, 3, (dir / "records").string().c_str(), "rec",
                          &num_records) == MSID_OK);
    CHECK(num_records == 2);
    CHECK(fs::exists(dir / "records" / "rec_r000.csv"));
    CHECK(fs::exists(dir / "records" / "rec_r000.meta.json"));
    CHECK(fs::exists(dir / "records" / "rec_r001.csv"));

    const std::string rec0 = (dir / "records" / "rec_r000.csv").string();
    const std::string rec1 = (dir / "records" / "rec_r001.csv").string();
    const char* record_paths[] = {rec0.c_str(), rec1.c_str()};

    msid_analysis_options options;
    msid_analysis_options_init(&options);
    CHECK(options.use_lpm == 0);
    CHECK(options.drift_threshold == doctest::Approx(0.05));

    msid_analysis* analysis = nullptr;
    REQUIRE(msid_analyze(design_path.c_str(), record_paths, 2, &options, &analysis) ==
            MSID_OK);

    msid_summary summary;
    REQUIRE(msid_analysis_summary(analysis, &summary) == MSID_OK);
    CHECK(summary.num_realizations == 2);
    CHECK(summary.num_periods == 3);
    CHECK(summary.num_bins == 12);
    CHECK(summary.noise_available == 1);
    CHECK(summary.total_available == 1);
    CHECK(summary.dof_noise == 4);
    CHECK(summary.dof_total == 1);
    CHECK(summary.drift_flagged == 0);
    CHECK(std::isfinite(summary.median_mag_db));
    CHECK(summary.median_noise_gap_db > 20.0);
    CHECK(summary.median_nl_fraction < 1e-2);

    size_t text_len = 0;
    REQUIRE(msid_analysis_summary_text(analysis, nullptr, 0, &text_len) == MSID_OK);
    REQUIRE(text_len > 0);
    std::string text(text_len, '\0');
    REQUIRE(msid_analysis_summary_text(analysis, text.data(), text.size() + 1,
                                       &text_len) == MSID_OK);
    CHECK(text.find("records analyzed: 2") != std::string::npos);
    char tiny[4];
    CHECK(msid_analysis_summary_text(analysis, tiny, sizeof(tiny), &text_len) ==
          MSID_ERR_ARGUMENT);

    std::vector<double> freq(12), re(12), im(12);
    REQUIRE(msid_analysis_curve(analysis, freq.data(), re.data(), im.data(), 12) ==
            MSID_OK);
    CHECK(freq[0] == doctest::Approx(31.25 / 400.0));
    // one-pole plant: |G| near 2 at the lowest excited bin
    CHECK(std::hypot(re[0], im[0]) == doctest::Approx(2.0).epsilon(0.05));
    CHECK(msid_analysis_curve(analysis, freq.data(), nullptr, nullptr, 4) ==
          MSID_ERR_ARGUMENT);

    std::vector<double> noise_var(12), total_var(12), nl_var(12);
    REQUIRE(msid_analysis_variances(analysis, noise_var.data(), total_var.data(),
                                    nl_var.data(), 12) == MSID_OK);
    for (int i = 0; i < 12; ++i) {
        CHECK(noise_var[i] >= 0.0);
        CHECK(total_var[i] >= 0.0);
        CHECK(nl_var[i] >= 0.0);
    }

    const std::string out_dir = (dir / "analysis").string();
    REQUIRE(msid_analysis_save(analysis, out_dir.c_str()) == MSID_OK);
    CHECK(fs::exists(dir / "analysis" / "report.json"));
    CHECK(fs::exists(dir / "analysis" / "bla_curves.csv"));

    REQUIRE(msid_report((dir / "analysis" / "report.json").string().c_str(),
                        (dir / "figs").string().c_str(), "csv") == MSID_OK);
    int fig_count = 0;
    for (const auto& entry : fs::directory_iterator(dir / "figs")) {
        (void)entry;
        ++fig_count;
    }
    CHECK(fig_count == 5);
    CHECK(msid_report((dir / "analysis" / "report.json").string().c_str(),
                      (dir / "figs2").string().c_str(), "yaml") == MSID_ERR_ARGUMENT);

    msid_analysis_free(analysis);
    msid_plant_free(plant);
    msid_design_free(design);
}

TEST_CASE("analysis with one-period records reports NaN noise variances") {
    const fs::path dir = fresh_dir("single_period");

    msid_design_params params;
    msid_design_params_init(&params);
    params.num_realizations = 2;
    params.upsample_factor = 1;
    params.seed = 5;
    msid_design* design = nullptr;
    REQUIRE(msid_design_create(&params, &design) == MSID_OK);
    const std::string design_path = (dir / "design.json").string();
    REQUIRE(msid_design_save(design, design_path.c_str()) == MSID_OK);

    msid_plant* plant = nullptr;
    REQUIRE(msid_plant_from_json(kPlantJson, &plant) == MSID_OK);
    int32_t num_records = 0;
    REQUIRE(msid_simulate(design, plant, 1, dir.string().c_str(), "rec",
                          &num_records) == MSID_OK);

    const std::string rec0 = (dir / "rec_r000.csv").string();
    const std::string rec1 = (dir / "rec_r001.csv").string();
    const char* record_paths[] = {rec0.c_str(), rec1.c_str()};
    msid_analysis* analysis = nullptr;
    REQUIRE(msid_analyze(design_path.c_str(), record_paths, 2, nullptr, &analysis) ==
            MSID_OK);

    msid_summary summary;
    REQUIRE(msid_analysis_summary(analysis, &summary) == MSID_OK);
    CHECK(summary.noise_available == 0);
    CHECK(summary.total_available == 1);
    CHECK(std::isnan(summary.median_noise_gap_db));
    CHECK(std::isfinite(summary.median_total_gap_db));

    std::vector<double> noise_var(12), total_var(12);
    REQUIRE(msid_analysis_variances(analysis, noise_var.data(), total_var.data(),
                                    nullptr, 12) == MSID_OK);
    for (int i = 0; i < 12; ++i) {
        CHECK(std::isnan(noise_var[i]));
        CHECK(std::isfinite(total_var[i]));
    }

    msid_analysis_free(analysis);
    msid_plant_free(plant);
    msid_design_free(design);
}
