#pragma once

#include <complex>
#include <string>
#include <vector>

#include "msid/spectral.hpp"

namespace msid {

/// Local polynomial regression configuration. At each excited bin the FRF and
/// a transient term are both modeled as degree-`poly_order` polynomials of the
/// bin offset over a window of the 2n+1 nearest excited bins.
struct LpmConfig {
    int poly_order = 2;  ///< R
    int half_width = 0;  ///< n; 0 selects the smallest n giving residual_dof >= 4

    int window_size(int n) const { return 2 * n + 1; }
    int residual_dof(int n) const { return window_size(n) - 2 * (poly_order + 1); }

    /// The half width actually used; resolves the automatic choice.
    int resolved_half_width() const;
    void validate() const;
};

/// Per-excited-bin complex FRF with an optional noise-variance estimate.
struct FrfEstimate {
    std::vector<int> excited_bins;
    std::vector<double> freq_hz;
    std::vector<std::complex<double>> response;
    /// Variance of the FRF estimate due to noise; empty when the estimator
    /// does not provide one (per-period division gets it later from period
    /// statistics).
    std::vector<double> noise_variance;
    std::string method;  ///< "etfe" | "lpm"
    int dof = 0;         ///< residual dof behind noise_variance, 0 when unset

    bool noise_variance_available() const { return !noise_variance.empty(); }
};

/// Empirical per-period FRF: G[k] = Y[k]/U[k] at the excited bins. Bins where
/// |U[k]| falls below 1e-12 * max|U| raise a NumericError naming the bin.
FrfEstimate etfe_frf(const Spectrum& u, const Spectrum& y,
                     const std::vector<int>& excited_bins);

/// Local polynomial FRF: at each excited bin k, solves the complex least
/// squares Y[k+r] = (sum_s g_s r^s) U[k+r] + (sum_s t_s r^s) over the window
/// of the 2n+1 nearest excited bins (shifted inward at the band edges) and
/// returns G[k] = g_0. noise_variance[k] is the residual sum of squares over
/// the residual dof, divided by |U[k]|^2.
FrfEstimate lpm_frf(const Spectrum& u, const Spectrum& y,
                    const std::vector<int>& excited_bins, const LpmConfig& config = {});

/// Plot-ready export, one row per bin:
/// `freq_hz,re_G,im_G,mag_db,noise_var_db,method`.
void write_frf_csv(const FrfEstimate& frf, const std::string& path);

}  // namespace msid
