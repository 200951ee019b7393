#include "msid/spectral.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <mutex>

#include <fftw3.h>

#include "msid/errors.hpp"

namespace msid {

namespace {

// FFTW planning is not thread-safe and plans re-run fastest when cached, so
// one executor guards a small plan cache keyed by N. Buffers come from
// fftw_malloc for stable SIMD alignment (identical codelets, identical
// rounding, run after run).
class FftwExecutor {
public:
    void transform(const std::vector<double>& samples,
                   std::vector<std::complex<double>>& out_bins) {
        const int n = static_cast<int>(samples.size());
        std::lock_guard<std::mutex> lock(mutex_);
        if (n != planned_n_) {
            release();
            in_ = static_cast<double*>(fftw_malloc(sizeof(double) * n));
            out_ = static_cast<fftw_complex*>(
                fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1)));
            plan_ = fftw_plan_dft_r2c_1d(n, in_, out_, FFTW_ESTIMATE);
            if (plan_ == nullptr) {
                release();
                throw NumericError("FFTW failed to plan transform of length " +
                                   std::to_string(n));
            }
            planned_n_ = n;
        }
        std::copy(samples.begin(), samples.end(), in_);
        fftw_execute(plan_);
        const double scale = 1.0 / static_cast<double>(n);
        out_bins.resize(static_cast<std::size_t>(n / 2 + 1));
        for (int k = 0; k <= n / 2; ++k) {
            out_bins[k] = std::complex<double>(out_[k][0] * scale, out_[k][1] * scale);
        }
    }

    ~FftwExecutor() { release(); }

private:
    void release() {
        if (plan_ != nullptr) {
            fftw_destroy_plan(plan_);
            plan_ = nullptr;
        }
        if (in_ != nullptr) {
            fftw_free(in_);
            in_ = nullptr;
        }
        if (out_ != nullptr) {
            fftw_free(out_);
            out_ = nullptr;
        }
        planned_n_ = 0;
    }

    std::mutex mutex_;
    int planned_n_ = 0;
    double* in_ = nullptr;
    fftw_complex* out_ = nullptr;
    fftw_plan plan_ = nullptr;
};

FftwExecutor& executor() {
    static FftwExecutor instance;
    return instance;
}

}  // namespace

Spectrum dft_period(const std::vector<double>& samples, double sample_rate_hz) {
    if (samples.empty()) {
        throw ArgumentError("dft_period on empty sequence");
    }
    if (sample_rate_hz <= 0.0) {
        throw ArgumentError("sample_rate_hz must be positive");
    }
    Spectrum spectrum;
    spectrum.period_length = static_cast<int>(samples.size());
    spectrum.sample_rate_hz = sample_rate_hz;
    executor().transform(samples, spectrum.coefficients);
    return spectrum;
}

BlockSpectra spectra_of_block(const PeriodBlock& block, double sample_rate_hz) {
    if (block.num_periods() == 0) {
        throw ArgumentError("spectra_of_block on empty block");
    }
    BlockSpectra spectra;
    spectra.u.reserve(block.periods_u.size());
    spectra.y.reserve(block.periods_y.size());
    for (const auto& row : block.periods_u) {
        spectra.u.push_back(dft_period(row, sample_rate_hz));
    }
    for (const auto& row : block.periods_y) {
        spectra.y.push_back(dft_period(row, sample_rate_hz));
    }
    return spectra;
}

AveragedSpectrum average_spectra(const std::vector<Spectrum>& spectra) {
    if (spectra.empty()) {
        throw ArgumentError("average_spectra on empty input");
    }
    const Spectrum& first = spectra.front();
    for (const Spectrum& s : spectra) {
        if (!s.same_grid(first) || s.num_bins() != first.num_bins()) {
            throw DataError("spectra are not on a common bin grid");
        }
    }

    AveragedSpectrum result;
    result.periods = static_cast<int>(spectra.size());
    result.mean = first;
    const std::size_t bins = first.coefficients.size();
    for (std::size_t k = 0; k < bins; ++k) {
        std::complex<double> acc = 0.0;
        for (const Spectrum& s : spectra) {
            acc += s.coefficients[k];
        }
        result.mean.coefficients[k] = acc / static_cast<double>(result.periods);
    }
    if (result.periods >= 2) {
        result.variance.resize(bins);
        for (std::size_t k = 0; k < bins; ++k) {
            double acc = 0.0;
            for (const Spectrum& s : spectra) {
                acc += std::norm(s.coefficients[k] - result.mean.coefficients[k]);
            }
            result.variance[k] = acc / static_cast<double>(result.periods - 1);
        }
    }
    return result;
}

void write_spectrum_csv(const Spectrum& spectrum, const std::string& path) {
    std::string body("bin,freq_hz,re,im\n");
    char buf[40];
    auto append = [&](double v, char sep) {
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v,
                                       std::chars_format::general, 17);
        body.append(buf, ptr);
        body.push_back(sep);
    };
    for (int k = 0; k < spectrum.num_bins(); ++k) {
        body.append(std::to_string(k));
        body.push_back(',');
        append(spectrum.bin_hz(k), ',');
        append(spectrum.coefficients[k].real(), ',');
        append(spectrum.coefficients[k].imag(), '\n');
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open spectrum file for writing: " + path);
    }
    out << body;
}

}  // namespace msid
