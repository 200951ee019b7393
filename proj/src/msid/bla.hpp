#pragma once

#include <complex>
#include <string>
#include <vector>

#include "msid/frf.hpp"

namespace msid {

// Robust best linear approximation over M phase realizations with P periods
// each.  Per-bin variances follow the variance-of-the-mean convention, i.e.
// they describe the uncertainty of `bla` itself:
//
//   G_m        = (1/P) sum_p G_{m,p}
//   s2_m       = (1/(P(P-1))) sum_p |G_{m,p} - G_m|^2
//   bla        = (1/M) sum_m G_m
//   total_var  = (1/(M(M-1))) sum_m |G_m - bla|^2
//   noise_var  = (1/M^2) sum_m s2_m
//   nl_var     = max(0, total_var - noise_var)
//
// A decomposition term that needs more data than was supplied (noise needs
// P >= 2, total needs M >= 2) is marked unavailable, never silently zeroed.
struct BlaResult {
    std::vector<int> excited_bins;
    std::vector<double> freq_hz;
    std::vector<std::complex<double>> bla;

    bool noise_available = false;
    bool total_available = false;
    std::vector<double> noise_variance;   // empty unless noise_available
    std::vector<double> total_variance;   // empty unless total_available
    std::vector<double> nl_variance;      // clipped at 0; empty unless both
    std::vector<double> nl_variance_raw;  // unclipped total - noise

    int num_realizations = 0;
    int num_periods = 0;
    int dof_noise = 0;  // M(P-1)
    int dof_total = 0;  // M-1

    // per-realization intermediates, kept for diagnostics and reporting
    std::vector<std::vector<std::complex<double>>> realization_mean;
    std::vector<std::vector<double>> realization_noise_var;  // empty unless P >= 2
};

// frfs[m][p] is the FRF estimate of period p within realization m.  All
// estimates must share the same excited-bin grid and every realization must
// contribute the same number of periods.
BlaResult robust_bla(const std::vector<std::vector<FrfEstimate>>& frfs);

// 10 log10(v); exact zero maps to -infinity so downstream plots can keep the
// bin while marking it as noise-free.
double variance_to_db(double variance);

// sqrt(total_var[k]) / |bla[k]| per excited bin.  Bins where the BLA
// magnitude is numerically zero (<= 1e-12 x the peak magnitude) are skipped.
// Throws DataError when the total variance is unavailable.
std::vector<double> nl_output_fraction(const BlaResult& bla);

// Median with the usual midpoint convention for even counts.  NaN entries are
// rejected with DataError; an empty input is also a DataError.
double median(std::vector<double> values);

// Exact column contract:
//   freq_hz,mag_db,noise_var_db,total_var_db,nl_var_db,dof_noise,dof_total
// Unavailable variances are written as nan, exact-zero variances as -inf.
void write_bla_csv(const BlaResult& bla, const std::string& path);

}  // namespace msid
