#pragma once

#include <complex>
#include <string>
#include <vector>

#include "msid/record.hpp"

namespace msid {

/// One-sided DFT of one real period: X[k] = (1/N) sum_n x[n] e^{-j2pi kn/N}
/// for k = 0..N/2. Under this scaling a tone A cos(2pi k n/N + phi) reads
/// X[k] = (A/2) e^{j phi}.
struct Spectrum {
    /// Scaling convention tag; kAmplitude is the 1/N forward scaling above.
    enum class Scaling { kAmplitude };

    std::vector<std::complex<double>> coefficients;  ///< bins 0 .. N/2
    int period_length = 0;                           ///< N
    double sample_rate_hz = 0.0;
    Scaling scaling = Scaling::kAmplitude;

    int num_bins() const { return static_cast<int>(coefficients.size()); }
    double bin_hz(int k) const {
        return static_cast<double>(k) * sample_rate_hz / period_length;
    }
    bool same_grid(const Spectrum& other) const {
        return period_length == other.period_length &&
               sample_rate_hz == other.sample_rate_hz && scaling == other.scaling;
    }
};

Spectrum dft_period(const std::vector<double>& samples, double sample_rate_hz);

/// Per-period spectra of both channels of a block, on one common bin grid.
struct BlockSpectra {
    std::vector<Spectrum> u;
    std::vector<Spectrum> y;
};

BlockSpectra spectra_of_block(const PeriodBlock& block, double sample_rate_hz);

/// Complex mean across periods plus the per-bin complex sample variance
/// s2[k] = 1/(P-1) sum_p |X_p[k] - mean[k]|^2. The variance is only defined
/// for P >= 2 and left empty otherwise.
struct AveragedSpectrum {
    Spectrum mean;
    std::vector<double> variance;
    int periods = 0;

    bool variance_available() const { return !variance.empty(); }
};

AveragedSpectrum average_spectra(const std::vector<Spectrum>& spectra);

/// Plot-ready export, one row per bin: `bin,freq_hz,re,im`.
void write_spectrum_csv(const Spectrum& spectrum, const std::string& path);

}  // namespace msid
