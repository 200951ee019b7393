#include <doctest.h>

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "msid/errors.hpp"
#include "msid/multisine.hpp"
#include "msid/plant.hpp"
#include "msid/spectral.hpp"

using namespace msid;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<double> single_tone(int n, int bin, double amp) {
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) {
        x[i] = amp * std::cos(2.0 * kPi * bin * i / n);
    }
    return x;
}

PlantSpec one_pole_plant() {
    PlantSpec plant;
    plant.b = {1.0};
    plant.a = {1.0, -0.5};
    return plant;
}

MultisineSpec bench_spec() {
    MultisineSpec spec;
    spec.num_realizations = 2;
    spec.seed = 7;
    return spec;
}

}  // namespace

TEST_CASE("polynomial_eval uses ascending-power coefficients") {
    CHECK(polynomial_eval({}, 3.0) == 0.0);
    CHECK(polynomial_eval({4.0}, 100.0) == 4.0);
    CHECK(polynomial_eval({1.0, 2.0, 3.0}, 2.0) == doctest::Approx(17.0));
    CHECK(polynomial_eval({0.0, 0.0, 0.0, 1.0}, -2.0) == doctest::Approx(-8.0));
}

TEST_CASE("identity and normalized filters pass the signal through") {
    const std::vector<double> u{1.0, -2.0, 3.5, 0.0, 7.25};
    CHECK(filter_lti({1.0}, {1.0}, u) == u);
    CHECK(filter_lti({2.0}, {2.0}, u) == u);  // a[0] normalization
    CHECK_THROWS_AS(filter_lti({}, {1.0}, u), ArgumentError);
    CHECK_THROWS_AS(filter_lti({1.0}, {0.0, 1.0}, u), ArgumentError);
}

TEST_CASE("FIR and IIR steps match hand recursion") {
    const std::vector<double> u{1.0, 0.0, 0.0, 0.0, 0.0};

    // moving average
    const std::vector<double> ma = filter_lti({0.5, 0.5}, {1.0}, u);
    CHECK(ma == std::vector<double>{0.5, 0.5, 0.0, 0.0, 0.0});

    // y[n] = u[n] + 0.5 y[n-1]: impulse response 1, 0.5, 0.25, ...
    const std::vector<double> ir = filter_lti({1.0}, {1.0, -0.5}, u);
    for (int i = 0; i < 5; ++i) {
        CHECK(ir[i] == doctest::Approx(std::pow(0.5, i)).epsilon(1e-15));
    }
}

TEST_CASE("max_pole_magnitude finds the dominant root") {
    CHECK(max_pole_magnitude({1.0}) == 0.0);
    CHECK(max_pole_magnitude({1.0, 0.0, 0.0}) == 0.0);  // trailing zeros
    CHECK(max_pole_magnitude({1.0, -0.5}) == doctest::Approx(0.5).epsilon(1e-12));
    // (1 - 0.7 z^-1)(1 - 0.8 z^-1) = 1 - 1.5 z^-1 + 0.56 z^-2
    CHECK(max_pole_magnitude({1.0, -1.5, 0.56}) == doctest::Approx(0.8).epsilon(1e-10));
    CHECK(max_pole_magnitude({1.0, -2.0}) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(max_pole_magnitude({2.0, -1.0}) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK_THROWS_AS(max_pole_magnitude({0.0, 1.0}), ArgumentError);
    CHECK_THROWS_AS(max_pole_magnitude({}), ArgumentError);
}

TEST_CASE("analytic_frf covers identity, delay and one-pole shapes") {
    PlantSpec identity;
    CHECK(std::abs(analytic_frf(identity, 3.7, 31.25) - 1.0) <= 1e-15);

    PlantSpec delay;
    delay.b = {0.0, 0.0, 1.0};  // z^-2
    for (double f : {0.5, 2.0, 11.0}) {
        const std::complex<double> h = analytic_frf(delay, f, 31.25);
        CHECK(std::abs(h) == doctest::Approx(1.0).epsilon(1e-14));
        const double expect = -2.0 * kPi * 2.0 * f / 31.25;
        CHECK(std::remainder(std::arg(h) - expect, 2.0 * kPi) ==
              doctest::Approx(0.0).epsilon(1e-12));
    }

    const PlantSpec pole = one_pole_plant();
    CHECK(std::abs(analytic_frf(pole, 0.0, 31.25) - 2.0) <= 1e-14);  // DC gain 1/(1-0.5)
    const std::complex<double> z = std::polar(1.0, 2.0 * kPi * 1.0 / 31.25);
    const std::complex<double> expect = 1.0 / (1.0 - 0.5 / z);
    CHECK(std::abs(analytic_frf(pole, 1.0, 31.25) - expect) <= 1e-14);
}

TEST_CASE("plant validation rejects bad coefficients and unstable poles") {
    PlantSpec unstable;
    unstable.a = {1.0, -1.1};
    try {
        unstable.validate();
        FAIL("expected NumericError");
    } catch (const NumericError& e) {
        CHECK(std::string(e.what()).find("unstable") != std::string::npos);
    }

    PlantSpec marginal;
    marginal.a = {1.0, -1.0};  // pole exactly on the circle
    CHECK_THROWS_AS(marginal.validate(), NumericError);

    PlantSpec wiener;
    wiener.kind = PlantKind::kWiener;
    CHECK_THROWS_AS(wiener.validate(), ArgumentError);  // no polynomial

    PlantSpec bad_noise;
    bad_noise.noise_std = -1.0;
    CHECK_THROWS_AS(bad_noise.validate(), ArgumentError);

    PlantSpec empty_b;
    empty_b.b = {};
    CHECK_THROWS_AS(empty_b.validate(), ArgumentError);

    CHECK(plant_kind_from_name("hammerstein") == PlantKind::kHammerstein);
    CHECK(plant_kind_name(PlantKind::kWiener) == "wiener");
    CHECK_THROWS_AS(plant_kind_from_name("volterra"), ArgumentError);
}

TEST_CASE("steady period of a one-pole plant matches the analytic response") {
    MultisineSpec spec;
    spec.num_realizations = 1;
    spec.prefix_samples = 0;
    spec.upsample_factor = 1;
    spec.seed = 9;
    const ExcitationSignal signal = generate_multisine(spec, 0);
    const std::vector<double> u_period = signal.period();

    const PlantSpec plant = one_pole_plant();
    const std::vector<double> y = plant_steady_period(plant, u_period);
    REQUIRE(y.size() == u_period.size());

    const Spectrum su = dft_period(u_period, spec.reference_rate_hz);
    const Spectrum sy = dft_period(y, spec.reference_rate_hz);
    for (int k = 0; k < su.num_bins(); ++k) {
        const std::complex<double> expect =
            analytic_frf(plant, su.bin_hz(k), spec.reference_rate_hz) *
            su.coefficients[k];
        CHECK(std::abs(sy.coefficients[k] - expect) <= 1e-8);
    }
}

TEST_CASE("a cubic wiener plant splits one tone into first and third harmonics") {
    const int n = 240;
    PlantSpec plant;
    plant.kind = PlantKind::kWiener;
    plant.poly = {0.0, 0.0, 0.0, 1.0};  // f(x) = x^3

    // cos^3 = (3 cos + cos 3)/4: amplitudes 0.75 and 0.25 for A = 1
    const std::vector<double> y = plant_steady_period(plant, single_tone(n, 4, 1.0));
    const Spectrum sy = dft_period(y, 1000.0);
    CHECK(2.0 * std::abs(sy.coefficients[4]) == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(2.0 * std::abs(sy.coefficients[12]) == doctest::Approx(0.25).epsilon(1e-12));
    for (int k = 0; k < sy.num_bins(); ++k) {
        if (k != 4 && k != 12) {
            CHECK(std::abs(sy.coefficients[k]) <= 1e-13);
        }
    }
}

TEST_CASE("wiener and hammerstein differ in composition order") {
    const int n = 240;
    const std::vector<double> u = single_tone(n, 4, 0.5);

    PlantSpec wiener;
    wiener.kind = PlantKind::kWiener;
    wiener.b = {2.0};
    wiener.poly = {0.0, 0.0, 0.0, 1.0};

    PlantSpec hammerstein = wiener;
    hammerstein.kind = PlantKind::kHammerstein;

    // wiener: (2u)^3 = 8 u^3; hammerstein: 2 u^3
    const Spectrum sw = dft_period(plant_steady_period(wiener, u), 1000.0);
    const Spectrum sh = dft_period(plant_steady_period(hammerstein, u), 1000.0);
    CHECK(std::abs(sw.coefficients[12]) ==
          doctest::Approx(4.0 * std::abs(sh.coefficients[12])).epsilon(1e-12));
    CHECK(2.0 * std::abs(sh.coefficients[12]) ==
          doctest::Approx(2.0 * 0.125 * 0.25).epsilon(1e-12));
}

TEST_CASE("a slow plant fails to settle within a tiny period budget") {
    PlantSpec slow;
    slow.a = {1.0, -0.99};
    const std::vector<double> u = single_tone(400, 3, 1.0);
    SettleOptions tight;
    tight.max_periods = 2;
    try {
        plant_steady_period(slow, u, tight);
        FAIL("expected NumericError");
    } catch (const NumericError& e) {
        CHECK(std::string(e.what()).find("settle") != std::string::npos);
    }
    // the default budget is plenty
    CHECK_NOTHROW(plant_steady_period(slow, u));
    CHECK_THROWS_AS(plant_steady_period(slow, {}), ArgumentError);
    SettleOptions bad;
    bad.tolerance = 0.0;
    CHECK_THROWS_AS(plant_steady_period(slow, u, bad), ArgumentError);
}

TEST_CASE("run_experiment produces the full acquisition geometry") {
    const MultisineSpec spec = bench_spec();
    const ExcitationSignal signal = generate_multisine(spec, 0);
    PlantSpec plant = one_pole_plant();
    plant.noise_std = 1e-5;
    plant.seed = 13;

    const MeasurementRecord record = run_experiment(signal, plant, 3);
    CHECK(record.time_s.size() == 41600);  // 3200 + 3 x 12800
    CHECK(record.metadata.sample_rate_hz == doctest::Approx(1000.0));
    CHECK(record.metadata.samples_per_period == 12800);
    CHECK(record.metadata.prefix_samples == 3200);
    CHECK(record.metadata.num_periods == 3);
    CHECK(record.metadata.realization_index == 0);
    CHECK(record.metadata.load_unit == "N");
    CHECK(record.metadata.indentation_unit == "m");
    CHECK_NOTHROW(record.validate());

    // load channel: ZOH of the steady tail plus the periods; the prefix
    // repeats at the end of every period
    const std::vector<double> period = signal.period();
    CHECK(record.load[0] == period[400 - 100]);
    CHECK(record.load[31] == period[300]);
    CHECK(record.load[32] == period[301]);
    for (int i = 0; i < 3200; ++i) {
        CHECK(record.load[i] == record.load[i + 12800]);
    }

    // noise breaks exact output periodicity, but only at noise scale
    bool identical = true;
    for (int i = 0; i < 12800; ++i) {
        if (record.indentation[3200 + i] != record.indentation[16000 + i]) {
            identical = false;
            break;
        }
    }
    CHECK_FALSE(identical);

    // without noise the output repeats exactly
    PlantSpec quiet = one_pole_plant();
    const MeasurementRecord clean = run_experiment(signal, quiet, 2);
    for (int i = 0; i < 12800; ++i) {
        CHECK(clean.indentation[3200 + i] == clean.indentation[16000 + i]);
    }
}

TEST_CASE("noise reruns are bit-identical and keyed by realization") {
    const MultisineSpec spec = bench_spec();
    const ExcitationSignal signal = generate_multisine(spec, 1);
    PlantSpec plant = one_pole_plant();
    plant.noise_std = 1e-4;
    plant.seed = 99;

    const MeasurementRecord a = run_experiment(signal, plant, 2);
    const MeasurementRecord b = run_experiment(signal, plant, 2);
    CHECK(a.load == b.load);
    CHECK(a.indentation == b.indentation);

    // same waveform, different realization index: same load, fresh noise
    ExcitationSignal relabeled = signal;
    relabeled.realization_index = 0;
    const MeasurementRecord c = run_experiment(relabeled, plant, 2);
    CHECK(c.load == a.load);
    CHECK(c.indentation != a.indentation);
}

TEST_CASE("plant json round trip preserves every field") {
    PlantSpec plant;
    plant.kind = PlantKind::kHammerstein;
    plant.b = {0.2, 0.1};
    plant.a = {1.0, -0.6, 0.05};
    plant.poly = {0.0, 1.0, 0.0, -0.3};
    plant.noise_std = 2.5e-6;
    plant.seed = 0xdeadbeef;

    const PlantSpec loaded = plant_from_json(plant_to_json(plant));
    CHECK(loaded.kind == plant.kind);
    CHECK(loaded.b == plant.b);
    CHECK(loaded.a == plant.a);
    CHECK(loaded.poly == plant.poly);
    CHECK(loaded.noise_std == plant.noise_std);
    CHECK(loaded.seed == plant.seed);

    const fs::path dir = fs::temp_directory_path() / "msid_test_plant";
    fs::create_directories(dir);
    const fs::path path = dir / "plant.json";
    save_plant(plant, path.string());
    const PlantSpec from_file = load_plant(path.string());
    CHECK(from_file.kind == plant.kind);
    CHECK(from_file.b == plant.b);

    CHECK_THROWS_AS(plant_from_json("not json"), IoError);
    CHECK_THROWS_AS(plant_from_json("{}"), DataError);
    CHECK_THROWS_AS(plant_from_json(R"({"plant":{"kind":"volterra","b":[1],"a":[1],"noise_std":0,"seed":1}})"),
                    ArgumentError);
    CHECK_THROWS_AS(load_plant((dir / "missing.json").string()), IoError);
}
