#include <doctest.h>

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "msid/errors.hpp"
#include "msid/multisine.hpp"
#include "msid/spectral.hpp"

using namespace msid;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Direct-summation DFT with the same 1/N one-sided convention, used as the
// oracle against the FFT-backed implementation.
std::vector<std::complex<double>> naive_dft(const std::vector<double>& x) {
    const std::size_t n = x.size();
    std::vector<std::complex<double>> bins(n / 2 + 1);
    for (std::size_t k = 0; k < bins.size(); ++k) {
        std::complex<double> acc(0.0, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double angle = -2.0 * kPi * static_cast<double>(k) *
                                 static_cast<double>(i) / static_cast<double>(n);
            acc += x[i] * std::complex<double>(std::cos(angle), std::sin(angle));
        }
        bins[k] = acc / static_cast<double>(n);
    }
    return bins;
}

std::vector<double> random_samples(int n, unsigned seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> x(n);
    for (double& v : x) {
        v = dist(gen);
    }
    return x;
}

}  // namespace

TEST_CASE("dft_period matches direct summation on random data") {
    for (int n : {8, 64, 400, 401}) {
        const std::vector<double> x = random_samples(n, 11 + static_cast<unsigned>(n));
        const Spectrum spectrum = dft_period(x, 1000.0);
        const auto oracle = naive_dft(x);
        REQUIRE(spectrum.num_bins() == static_cast<int>(oracle.size()));
        CHECK(spectrum.period_length == n);
        for (std::size_t k = 0; k < oracle.size(); ++k) {
            CHECK(std::abs(spectrum.coefficients[k] - oracle[k]) <= 1e-12);
        }
    }
}

TEST_CASE("constant signal concentrates in the DC bin") {
    const Spectrum spectrum = dft_period(std::vector<double>(128, 4.5), 100.0);
    CHECK(spectrum.coefficients[0].real() == doctest::Approx(4.5).epsilon(1e-14));
    CHECK(std::abs(spectrum.coefficients[0].imag()) <= 1e-13);
    for (int k = 1; k < spectrum.num_bins(); ++k) {
        CHECK(std::abs(spectrum.coefficients[k]) <= 1e-13);
    }
}

TEST_CASE("a tone of amplitude A reads A/2 at its bin") {
    const int n = 400;
    const double amp = 0.02;
    const double phase = 0.7;
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) {
        x[i] = amp * std::cos(2.0 * kPi * 12 * i / n + phase);
    }
    const Spectrum spectrum = dft_period(x, 31.25);
    const std::complex<double> coeff = spectrum.coefficients[12];
    CHECK(std::abs(coeff) == doctest::Approx(amp / 2.0).epsilon(1e-12));
    CHECK(std::arg(coeff) == doctest::Approx(phase).epsilon(1e-12));
    CHECK(spectrum.bin_hz(12) == doctest::Approx(12 * 31.25 / 400));
}

TEST_CASE("Parseval: sum of squares equals weighted spectral energy") {
    const int n = 256;
    const std::vector<double> x = random_samples(n, 99);
    const Spectrum spectrum = dft_period(x, 1.0);

    double time_energy = 0.0;
    for (double v : x) {
        time_energy += v * v;
    }
    time_energy /= n;

    // One-sided 1/N scaling: interior bins carry double weight.
    double freq_energy = 0.0;
    for (int k = 0; k <= n / 2; ++k) {
        const double weight = (k == 0 || k == n / 2) ? 1.0 : 2.0;
        freq_energy += weight * std::norm(spectrum.coefficients[k]);
    }
    CHECK(time_energy == doctest::Approx(freq_energy).epsilon(1e-10));
}

TEST_CASE("dft is linear") {
    const int n = 200;
    const std::vector<double> a = random_samples(n, 1);
    const std::vector<double> b = random_samples(n, 2);
    std::vector<double> mix(n);
    for (int i = 0; i < n; ++i) {
        mix[i] = 2.5 * a[i] - 0.5 * b[i];
    }
    const Spectrum sa = dft_period(a, 1.0);
    const Spectrum sb = dft_period(b, 1.0);
    const Spectrum sm = dft_period(mix, 1.0);
    for (int k = 0; k < sm.num_bins(); ++k) {
        const std::complex<double> expect =
            2.5 * sa.coefficients[k] - 0.5 * sb.coefficients[k];
        CHECK(std::abs(sm.coefficients[k] - expect) <= 1e-12);
    }
}

TEST_CASE("circular shift multiplies bin k by a unit phasor") {
    const int n = 96;
    const int shift = 13;
    const std::vector<double> x = random_samples(n, 5);
    std::vector<double> shifted(n);
    for (int i = 0; i < n; ++i) {
        shifted[i] = x[(i + shift) % n];
    }
    const Spectrum sx = dft_period(x, 1.0);
    const Spectrum ss = dft_period(shifted, 1.0);
    for (int k = 0; k < sx.num_bins(); ++k) {
        const std::complex<double> rot =
            std::polar(1.0, 2.0 * kPi * k * shift / static_cast<double>(n));
        CHECK(std::abs(ss.coefficients[k] - sx.coefficients[k] * rot) <= 1e-12);
    }
}

TEST_CASE("multisine spectrum reproduces the drawn amplitudes and phases") {
    MultisineSpec spec;
    spec.reference_rate_hz = 31.25;
    spec.samples_per_period = 400;
    spec.f_min_hz = 0.06;
    spec.f_max_hz = 1.0;
    spec.amplitude = 0.02;
    spec.num_realizations = 1;
    spec.prefix_samples = 0;
    spec.seed = 42;
    const MultisineDesign design = make_design(spec);
    const ExcitationSignal signal = render_signal(design, 0);
    const Spectrum spectrum = dft_period(signal.period(), spec.reference_rate_hz);

    for (std::size_t i = 0; i < design.excited_bins.size(); ++i) {
        const int k = design.excited_bins[i];
        const std::complex<double> expect =
            std::polar(spec.amplitude / 2.0, design.phases[0][i]);
        CHECK(std::abs(spectrum.coefficients[k] - expect) <= 1e-12);
    }
}

TEST_CASE("dft_period validates its arguments") {
    CHECK_THROWS_AS(dft_period({}, 1.0), ArgumentError);
    CHECK_THROWS_AS(dft_period({1.0}, 0.0), ArgumentError);
}

TEST_CASE("spectra_of_block transforms each period on a common grid") {
    PeriodBlock block;
    block.periods_u.push_back(random_samples(64, 7));
    block.periods_u.push_back(random_samples(64, 8));
    block.periods_y.push_back(random_samples(64, 9));
    block.periods_y.push_back(random_samples(64, 10));
    const BlockSpectra spectra = spectra_of_block(block, 500.0);
    REQUIRE(spectra.u.size() == 2);
    REQUIRE(spectra.y.size() == 2);
    CHECK(spectra.u[0].same_grid(spectra.y[1]));

    const auto oracle = naive_dft(block.periods_y[1]);
    for (std::size_t k = 0; k < oracle.size(); ++k) {
        CHECK(std::abs(spectra.y[1].coefficients[k] - oracle[k]) <= 1e-12);
    }
}

TEST_CASE("identical periods average to themselves with zero variance") {
    const std::vector<double> x = random_samples(128, 3);
    const Spectrum one = dft_period(x, 1.0);
    const AveragedSpectrum avg = average_spectra({one, one, one});
    CHECK(avg.periods == 3);
    REQUIRE(avg.variance_available());
    for (int k = 0; k < one.num_bins(); ++k) {
        CHECK(std::abs(avg.mean.coefficients[k] - one.coefficients[k]) <= 1e-15);
        CHECK(avg.variance[k] <= 1e-24);
    }
}

TEST_CASE("a symmetric +-d pair has sample variance 2 d^2") {
    Spectrum base = dft_period(random_samples(32, 21), 1.0);
    Spectrum plus = base;
    Spectrum minus = base;
    const std::complex<double> d(3e-3, -4e-3);  // |d|^2 = 2.5e-5
    plus.coefficients[5] += d;
    minus.coefficients[5] -= d;

    const AveragedSpectrum avg = average_spectra({plus, minus});
    CHECK(std::abs(avg.mean.coefficients[5] - base.coefficients[5]) <= 1e-15);
    CHECK(avg.variance[5] == doctest::Approx(2.0 * std::norm(d)).epsilon(1e-12));
}

TEST_CASE("single-period averages leave the variance unavailable") {
    const Spectrum one = dft_period(random_samples(32, 4), 1.0);
    const AveragedSpectrum avg = average_spectra({one});
    CHECK(avg.periods == 1);
    CHECK_FALSE(avg.variance_available());
    for (int k = 0; k < one.num_bins(); ++k) {
        CHECK(avg.mean.coefficients[k] == one.coefficients[k]);
    }
}

TEST_CASE("averaging across different grids is rejected") {
    const Spectrum a = dft_period(random_samples(32, 1), 1.0);
    const Spectrum b = dft_period(random_samples(64, 1), 1.0);
    const Spectrum c = dft_period(random_samples(32, 1), 2.0);
    CHECK_THROWS_AS(average_spectra({a, b}), DataError);
    CHECK_THROWS_AS(average_spectra({a, c}), DataError);
    CHECK_THROWS_AS(average_spectra({}), ArgumentError);
}

TEST_CASE("spectrum csv lists bin, frequency and both parts") {
    const fs::path dir = fs::temp_directory_path() / "msid_test_spectral";
    fs::create_directories(dir);
    const fs::path path = dir / "spec.csv";

    std::vector<double> x(8);
    for (int i = 0; i < 8; ++i) {
        x[i] = std::cos(2.0 * kPi * i / 8.0);
    }
    write_spectrum_csv(dft_period(x, 16.0), path.string());

    std::ifstream in(path);
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line == "bin,freq_hz,re,im");
    REQUIRE(std::getline(in, line));
    CHECK(line.rfind("0,0,", 0) == 0);
    REQUIRE(std::getline(in, line));
    // bin 1 at 2 Hz holds the tone: re = 0.5
    std::istringstream row(line);
    std::string field;
    std::getline(row, field, ',');
    CHECK(field == "1");
    std::getline(row, field, ',');
    CHECK(std::stod(field) == doctest::Approx(2.0));
    std::getline(row, field, ',');
    CHECK(std::stod(field) == doctest::Approx(0.5).epsilon(1e-12));

    int rows = 2;
    while (std::getline(in, line)) {
        ++rows;
    }
    CHECK(rows == 5);  // bins 0..4
}
