#include "msid/bla.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>

#include "msid/errors.hpp"

namespace msid {

BlaResult robust_bla(const std::vector<std::vector<FrfEstimate>>& frfs) {
    if (frfs.empty() || frfs.front().empty()) {
        throw ArgumentError("robust BLA needs at least one realization with one period");
    }
    const std::size_t num_realizations = frfs.size();
    const std::size_t num_periods = frfs.front().size();
    const FrfEstimate& ref = frfs.front().front();
    const std::size_t num_bins = ref.response.size();

    for (const auto& realization : frfs) {
        if (realization.size() != num_periods) {
            throw DataError("realizations contribute unequal period counts");
        }
        for (const FrfEstimate& frf : realization) {
            if (frf.excited_bins != ref.excited_bins || frf.freq_hz != ref.freq_hz) {
                throw DataError("per-period FRF estimates are not on a common bin grid");
            }
        }
    }

    BlaResult out;
    out.excited_bins = ref.excited_bins;
    out.freq_hz = ref.freq_hz;
    out.num_realizations = static_cast<int>(num_realizations);
    out.num_periods = static_cast<int>(num_periods);
    out.noise_available = num_periods >= 2;
    out.total_available = num_realizations >= 2;
    out.dof_noise = static_cast<int>(num_realizations * (num_periods - 1));
    out.dof_total = static_cast<int>(num_realizations) - 1;

    out.realization_mean.assign(num_realizations,
                                std::vector<std::complex<double>>(num_bins));
    if (out.noise_available) {
        out.realization_noise_var.assign(num_realizations,
                                         std::vector<double>(num_bins));
    }

    for (std::size_t m = 0; m < num_realizations; ++m) {
        for (std::size_t k = 0; k < num_bins; ++k) {
            std::complex<double> mean(0.0, 0.0);
            for (std::size_t p = 0; p < num_periods; ++p) {
                mean += frfs[m][p].response[k];
            }
            mean /= static_cast<double>(num_periods);
            out.realization_mean[m][k] = mean;
            if (out.noise_available) {
                double scatter = 0.0;
                for (std::size_t p = 0; p < num_periods; ++p) {
                    scatter += std::norm(frfs[m][p].response[k] - mean);
                }
                out.realization_noise_var[m][k] =
                    scatter / static_cast<double>(num_periods * (num_periods - 1));
            }
        }
    }

    out.bla.assign(num_bins, std::complex<double>(0.0, 0.0));
    for (std::size_t k = 0; k < num_bins; ++k) {
        for (std::size_t m = 0; m < num_realizations; ++m) {
            out.bla[k] += out.realization_mean[m][k];
        }
        out.bla[k] /= static_cast<double>(num_realizations);
    }

    if (out.total_available) {
        out.total_variance.assign(num_bins, 0.0);
        for (std::size_t k = 0; k < num_bins; ++k) {
            double scatter = 0.0;
            for (std::size_t m = 0; m < num_realizations; ++m) {
                scatter += std::norm(out.realization_mean[m][k] - out.bla[k]);
            }
            out.total_variance[k] =
                scatter / static_cast<double>(num_realizations * (num_realizations - 1));
        }
    }

    if (out.noise_available) {
        out.noise_variance.assign(num_bins, 0.0);
        for (std::size_t k = 0; k < num_bins; ++k) {
            double sum = 0.0;
            for (std::size_t m = 0; m < num_realizations; ++m) {
                sum += out.realization_noise_var[m][k];
            }
            out.noise_variance[k] =
                sum / static_cast<double>(num_realizations * num_realizations);
        }
    }

    if (out.noise_available && out.total_available) {
        out.nl_variance.resize(num_bins);
        out.nl_variance_raw.resize(num_bins);
        for (std::size_t k = 0; k < num_bins; ++k) {
            out.nl_variance_raw[k] = out.total_variance[k] - out.noise_variance[k];
            out.nl_variance[k] = std::max(0.0, out.nl_variance_raw[k]);
        }
    }
    return out;
}

double variance_to_db(double variance) {
    if (variance == 0.0) {
        return -std::numeric_limits<double>::infinity();
    }
    return 10.0 * std::log10(variance);
}

std::vector<double> nl_output_fraction(const BlaResult& bla) {
    if (!bla.total_available) {
        throw DataError("nonlinear output fraction needs the total variance (M >= 2)");
    }
    double peak = 0.0;
    for (const auto& g : bla.bla) {
        peak = std::max(peak, std::abs(g));
    }
    const double floor = 1e-12 * peak;
    std::vector<double> fractions;
    fractions.reserve(bla.bla.size());
    for (std::size_t k = 0; k < bla.bla.size(); ++k) {
        const double mag = std::abs(bla.bla[k]);
        if (mag <= floor) {
            continue;
        }
        fractions.push_back(std::sqrt(bla.total_variance[k]) / mag);
    }
    if (fractions.empty()) {
        throw DataError("all BLA bins are numerically zero");
    }
    return fractions;
}

double median(std::vector<double> values) {
    if (values.empty()) {
        throw DataError("median of an empty set");
    }
    for (double v : values) {
        if (std::isnan(v)) {
            throw DataError("median input contains NaN");
        }
    }
    const std::size_t mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + mid, values.end());
    double upper = values[mid];
    if (values.size() % 2 == 1) {
        return upper;
    }
    double lower = *std::max_element(values.begin(), values.begin() + mid);
    return 0.5 * (lower + upper);
}

void write_bla_csv(const BlaResult& bla, const std::string& path) {
    std::string body(
        "freq_hz,mag_db,noise_var_db,total_var_db,nl_var_db,dof_noise,dof_total\n");
    char buf[40];
    auto append = [&](double v, char sep) {
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v,
                                       std::chars_format::general, 17);
        body.append(buf, ptr);
        body.push_back(sep);
    };
    auto append_var = [&](const std::vector<double>& var, bool available,
                          std::size_t k) {
        if (available) {
            append(variance_to_db(var[k]), ',');
        } else {
            body.append("nan,");
        }
    };
    const bool nl_available = bla.noise_available && bla.total_available;
    for (std::size_t k = 0; k < bla.bla.size(); ++k) {
        append(bla.freq_hz[k], ',');
        append(20.0 * std::log10(std::abs(bla.bla[k])), ',');
        append_var(bla.noise_variance, bla.noise_available, k);
        append_var(bla.total_variance, bla.total_available, k);
        append_var(bla.nl_variance, nl_available, k);
        body.append(std::to_string(bla.dof_noise));
        body.push_back(',');
        body.append(std::to_string(bla.dof_total));
        body.push_back('\n');
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open BLA curve file for writing: " + path);
    }
    out << body;
}

}  // namespace msid
