#include "msid/frf.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <Eigen/Dense>

#include "msid/errors.hpp"

namespace msid {

namespace {

void check_inputs(const Spectrum& u, const Spectrum& y, const std::vector<int>& bins) {
    if (!u.same_grid(y) || u.num_bins() != y.num_bins()) {
        throw DataError("input and output spectra are not on a common bin grid");
    }
    if (bins.empty()) {
        throw ArgumentError("excited bin list is empty");
    }
    for (std::size_t i = 0; i < bins.size(); ++i) {
        if (bins[i] < 0 || bins[i] >= u.num_bins()) {
            throw ArgumentError("excited bin " + std::to_string(bins[i]) +
                                " outside the spectrum grid");
        }
        if (i > 0 && bins[i] <= bins[i - 1]) {
            throw ArgumentError("excited bins must be strictly increasing");
        }
    }
}

double division_guard(const Spectrum& u, const std::vector<int>& bins) {
    double peak = 0.0;
    for (int k : bins) {
        peak = std::max(peak, std::abs(u.coefficients[k]));
    }
    return 1e-12 * peak;
}

}  // namespace

int LpmConfig::resolved_half_width() const {
    if (half_width > 0) {
        return half_width;
    }
    // smallest n with residual_dof >= 4
    int n = poly_order + 1;
    while (residual_dof(n) < 4) {
        ++n;
    }
    return n;
}

void LpmConfig::validate() const {
    if (poly_order < 0) {
        throw ArgumentError("lpm poly_order must be non-negative");
    }
    if (half_width < 0) {
        throw ArgumentError("lpm half_width must be positive or 0 for automatic");
    }
    if (half_width > 0 && residual_dof(half_width) < 4) {
        std::ostringstream msg;
        msg << "lpm window of half width " << half_width << " leaves only "
            << residual_dof(half_width) << " residual dof (need >= 4)";
        throw ArgumentError(msg.str());
    }
}

FrfEstimate etfe_frf(const Spectrum& u, const Spectrum& y,
                     const std::vector<int>& excited_bins) {
    check_inputs(u, y, excited_bins);
    const double guard = division_guard(u, excited_bins);

    FrfEstimate frf;
    frf.method = "etfe";
    frf.excited_bins = excited_bins;
    frf.response.reserve(excited_bins.size());
    for (int k : excited_bins) {
        if (std::abs(u.coefficients[k]) <= guard) {
            throw NumericError("input spectrum is numerically zero at excited bin " +
                               std::to_string(k));
        }
        frf.freq_hz.push_back(u.bin_hz(k));
        frf.response.push_back(y.coefficients[k] / u.coefficients[k]);
    }
    return frf;
}

FrfEstimate lpm_frf(const Spectrum& u, const Spectrum& y,
                    const std::vector<int>& excited_bins, const LpmConfig& config) {
    check_inputs(u, y, excited_bins);
    config.validate();

    const int half = config.resolved_half_width();
    const int window = config.window_size(half);
    const int order = config.poly_order;
    const int num_bins = static_cast<int>(excited_bins.size());
    if (num_bins < window) {
        std::ostringstream msg;
        msg << "lpm needs at least " << window << " excited bins, got " << num_bins;
        throw ArgumentError(msg.str());
    }

    const int ncols = 2 * (order + 1);
    const int dof = window - ncols;
    const double guard = division_guard(u, excited_bins);

    FrfEstimate frf;
    frf.method = "lpm";
    frf.dof = dof;
    frf.excited_bins = excited_bins;
    frf.freq_hz.reserve(excited_bins.size());
    frf.response.resize(excited_bins.size());
    frf.noise_variance.resize(excited_bins.size());

    Eigen::MatrixXcd design(window, ncols);
    Eigen::VectorXcd rhs(window);
    for (int i = 0; i < num_bins; ++i) {
        const int k = excited_bins[i];
        frf.freq_hz.push_back(u.bin_hz(k));
        if (std::abs(u.coefficients[k]) <= guard) {
            throw NumericError("input spectrum is numerically zero at excited bin " +
                               std::to_string(k));
        }

        // Window of the 2n+1 nearest excited bins, shifted inward at the
        // band edges so every bin keeps the same dof.
        const int start = std::clamp(i - half, 0, num_bins - window);
        double offset_scale = 1.0;
        for (int j = 0; j < window; ++j) {
            offset_scale = std::max(
                offset_scale, std::abs(static_cast<double>(excited_bins[start + j] - k)));
        }
        for (int j = 0; j < window; ++j) {
            const int bin = excited_bins[start + j];
            // offsets normalized to [-1, 1]; the constant-term coefficients
            // g_0, t_0 are unaffected by the scaling
            const double t = static_cast<double>(bin - k) / offset_scale;
            double power = 1.0;
            for (int s = 0; s <= order; ++s) {
                design(j, s) = u.coefficients[bin] * power;
                design(j, order + 1 + s) = power;
                power *= t;
            }
            rhs(j) = y.coefficients[bin];
        }

        Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(design);
        if (qr.rank() < ncols) {
            throw NumericError("collinear local regressors at excited bin " +
                               std::to_string(k));
        }
        const Eigen::VectorXcd theta = qr.solve(rhs);
        frf.response[i] = theta(0);
        const double rss = (rhs - design * theta).squaredNorm();
        frf.noise_variance[i] =
            rss / static_cast<double>(dof) / std::norm(u.coefficients[k]);
    }
    return frf;
}

void write_frf_csv(const FrfEstimate& frf, const std::string& path) {
    std::string body("freq_hz,re_G,im_G,mag_db,noise_var_db,method\n");
    char buf[40];
    auto append = [&](double v, char sep) {
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v,
                                       std::chars_format::general, 17);
        body.append(buf, ptr);
        body.push_back(sep);
    };
    for (std::size_t i = 0; i < frf.response.size(); ++i) {
        append(frf.freq_hz[i], ',');
        append(frf.response[i].real(), ',');
        append(frf.response[i].imag(), ',');
        append(20.0 * std::log10(std::abs(frf.response[i])), ',');
        if (frf.noise_variance_available()) {
            append(10.0 * std::log10(frf.noise_variance[i]), ',');
        } else {
            body.append("nan,");
        }
        body.append(frf.method);
        body.push_back('\n');
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open FRF file for writing: " + path);
    }
    out << body;
}

}  // namespace msid
