#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "msid/multisine.hpp"
#include "msid/record.hpp"

namespace msid {

enum class PlantKind { kLti, kWiener, kHammerstein };

std::string plant_kind_name(PlantKind kind);
PlantKind plant_kind_from_name(const std::string& name);

/// Synthetic benchmark plant: a discrete-time rational filter at the
/// reference rate, optionally composed with a static polynomial
/// nonlinearity, plus white Gaussian output noise.
///
///   lti:          y = G u            + e
///   wiener:       y = f(G u)         + e
///   hammerstein:  y = G f(u)         + e
///
/// with f(x) = poly[0] + poly[1] x + ... + poly[D] x^D and e ~ N(0,
/// noise_std^2) drawn per reference-rate sample.
struct PlantSpec {
    PlantKind kind = PlantKind::kLti;
    std::vector<double> b{1.0};  ///< numerator, b[i] multiplies u[n-i]
    std::vector<double> a{1.0};  ///< denominator, a[0] != 0, a[j] multiplies y[n-j]
    std::vector<double> poly;    ///< ignored for lti, required otherwise
    double noise_std = 0.0;
    std::uint64_t seed = 1;

    /// Throws ArgumentError on malformed coefficients, NumericError when the
    /// denominator has a pole on or outside the unit circle.
    void validate() const;
};

struct SettleOptions {
    int max_periods = 10000;
    double tolerance = 1e-10;  ///< relative to the period RMS
};

double polynomial_eval(const std::vector<double>& coeffs, double x);

/// Direct-form IIR filter with zero initial state.
std::vector<double> filter_lti(const std::vector<double>& b, const std::vector<double>& a,
                               const std::vector<double>& input);

/// Largest root magnitude of a[0] + a[1] z^-1 + ... (companion eigenvalues).
double max_pole_magnitude(const std::vector<double>& a);

/// Frequency response of the linear core, B(z)/A(z) at z = exp(j 2 pi f / fs).
/// For an lti plant this is the plant FRF; for wiener and hammerstein plants
/// it describes the filter stage only.
std::complex<double> analytic_frf(const PlantSpec& plant, double freq_hz,
                                  double sample_rate_hz);

/// Noise-free steady-state plant response to one period of `u_period`,
/// obtained by cycling the filter until two successive output periods agree
/// within tolerance * RMS. Throws NumericError when settling fails.
std::vector<double> plant_steady_period(const PlantSpec& plant,
                                        const std::vector<double>& u_period,
                                        const SettleOptions& options = {});

/// Simulates one acquisition: the plant in steady state over
/// `num_periods` periods plus the design prefix, with fresh output noise per
/// reference-rate sample, both channels zero-order-hold upsampled to the
/// acquisition rate. The record satisfies MeasurementRecord::validate().
MeasurementRecord run_experiment(const ExcitationSignal& signal, const PlantSpec& plant,
                                 int num_periods, const SettleOptions& options = {});

std::string plant_to_json(const PlantSpec& plant);
PlantSpec plant_from_json(const std::string& text);
void save_plant(const PlantSpec& plant, const std::string& path);
PlantSpec load_plant(const std::string& path);

}  // namespace msid
