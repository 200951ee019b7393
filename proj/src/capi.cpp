#include "msid/msid.h"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "msid/errors.hpp"
#include "msid/multisine.hpp"
#include "msid/pipeline.hpp"
#include "msid/plant.hpp"
#include "msid/record.hpp"

struct msid_design {
    msid::MultisineDesign design;
};

struct msid_plant {
    msid::PlantSpec spec;
};

struct msid_analysis {
    msid::AnalysisResult result;
};

namespace {

thread_local std::string g_last_error;

template <typename Fn>
msid_status guarded(Fn&& fn) {
    try {
        fn();
        g_last_error.clear();
        return MSID_OK;
    } catch (const msid::ArgumentError& e) {
        g_last_error = e.what();
        return MSID_ERR_ARGUMENT;
    } catch (const msid::IoError& e) {
        g_last_error = e.what();
        return MSID_ERR_IO;
    } catch (const msid::DataError& e) {
        g_last_error = e.what();
        return MSID_ERR_DATA;
    } catch (const msid::NumericError& e) {
        g_last_error = e.what();
        return MSID_ERR_NUMERIC;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return MSID_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown failure";
        return MSID_ERR_INTERNAL;
    }
}

msid_status fail_argument(const char* message) {
    g_last_error = message;
    return MSID_ERR_ARGUMENT;
}

msid::MultisineSpec spec_from_params(const msid_design_params& p) {
    msid::MultisineSpec spec;
    spec.reference_rate_hz = p.reference_rate_hz;
    spec.samples_per_period = p.samples_per_period;
    spec.f_min_hz = p.f_min_hz;
    spec.f_max_hz = p.f_max_hz;
    spec.amplitude = p.amplitude;
    spec.num_realizations = p.num_realizations;
    spec.seed = p.seed;
    spec.prefix_samples = p.prefix_samples;
    spec.upsample_factor = p.upsample_factor;
    return spec;
}

template <typename Out, typename In>
void copy_array(const std::vector<In>& src, Out* out, size_t capacity,
                const char* what) {
    if (capacity < src.size()) {
        throw msid::ArgumentError(std::string(what) + " buffer too small: need " +
                                  std::to_string(src.size()) + " elements");
    }
    for (std::size_t i = 0; i < src.size(); ++i) {
        out[i] = static_cast<Out>(src[i]);
    }
}

}  // namespace

extern "C" {

const char* msid_version(void) { return "0.1.0"; }

const char* msid_last_error(void) { return g_last_error.c_str(); }

void msid_design_params_init(msid_design_params* params) {
    if (params == nullptr) {
        return;
    }
    const msid::MultisineSpec defaults;
    params->reference_rate_hz = defaults.reference_rate_hz;
    params->samples_per_period = defaults.samples_per_period;
    params->f_min_hz = defaults.f_min_hz;
    params->f_max_hz = defaults.f_max_hz;
    params->amplitude = defaults.amplitude;
    params->num_realizations = defaults.num_realizations;
    params->seed = defaults.seed;
    params->prefix_samples = defaults.prefix_samples;
    params->upsample_factor = defaults.upsample_factor;
}

msid_status msid_design_create(const msid_design_params* params, msid_design** out) {
    if (params == nullptr || out == nullptr) {
        return fail_argument("msid_design_create: null argument");
    }
    *out = nullptr;
    return guarded([&] {
        auto handle = std::make_unique<msid_design>();
        handle->design = msid::make_design(spec_from_params(*params));
        *out = handle.release();
    });
}

msid_status msid_design_load(const char* path, msid_design** out) {
    if (path == nullptr || out == nullptr) {
        return fail_argument("msid_design_load: null argument");
    }
    *out = nullptr;
    return guarded([&] {
        auto handle = std::make_unique<msid_design>();
        handle->design = msid::load_design(path);
        *out = handle.release();
    });
}

msid_status msid_design_save(const msid_design* design, const char* path) {
    if (design == nullptr || path == nullptr) {
        return fail_argument("msid_design_save: null argument");
    }
    return guarded([&] { msid::save_design(design->design, path); });
}

void msid_design_free(msid_design* design) { delete design; }

msid_status msid_design_get_params(const msid_design* design, msid_design_params* out) {
    if (design == nullptr || out == nullptr) {
        return fail_argument("msid_design_get_params: null argument");
    }
    const msid::MultisineSpec& s = design->design.spec;
    out->reference_rate_hz = s.reference_rate_hz;
    out->samples_per_period = s.samples_per_period;
    out->f_min_hz = s.f_min_hz;
    out->f_max_hz = s.f_max_hz;
    out->amplitude = s.amplitude;
    out->num_realizations = s.num_realizations;
    out->seed = s.seed;
    out->prefix_samples = s.prefix_samples;
    out->upsample_factor = s.upsample_factor;
    g_last_error.clear();
    return MSID_OK;
}

msid_status msid_design_num_bins(const msid_design* design, int32_t* out) {
    if (design == nullptr || out == nullptr) {
        return fail_argument("msid_design_num_bins: null argument");
    }
    *out = static_cast<int32_t>(design->design.excited_bins.size());
    g_last_error.clear();
    return MSID_OK;
}

msid_status msid_design_excited_bins(const msid_design* design, int32_t* out,
                                     size_t capacity) {
    if (design == nullptr || out == nullptr) {
        return fail_argument("msid_design_excited_bins: null argument");
    }
    return guarded([&] { copy_array(design->design.excited_bins, out, capacity, "bin"); });
}

msid_status msid_design_frequencies_hz(const msid_design* design, double* out,
                                       size_t capacity) {
    if (design == nullptr || out == nullptr) {
        return fail_argument("msid_design_frequencies_hz: null argument");
    }
    return guarded([&] {
        const double f0 = design->design.spec.frequency_resolution_hz();
        std::vector<double> freqs;
        freqs.reserve(design->design.excited_bins.size());
        for (int k : design->design.excited_bins) {
            freqs.push_back(k * f0);
        }
        copy_array(freqs, out, capacity, "frequency");
    });
}

msid_status msid_design_reference_signal(const msid_design* design, int32_t realization,
                                         double* out, size_t capacity, size_t* out_len) {
    if (design == nullptr || out_len == nullptr) {
        return fail_argument("msid_design_reference_signal: null argument");
    }
    return guarded([&] {
        const msid::ExcitationSignal signal =
            msid::render_signal(design->design, realization);
        *out_len = signal.reference_samples.size();
        if (out != nullptr) {
            copy_array(signal.reference_samples, out, capacity, "signal");
        }
    });
}

msid_status msid_design_signal_stats(const msid_design* design, int32_t realization,
                                     double* rms_out, double* crest_out) {
    if (design == nullptr) {
        return fail_argument("msid_design_signal_stats: null argument");
    }
    return guarded([&] {
        const msid::ExcitationSignal signal =
            msid::render_signal(design->design, realization);
        const std::vector<double> period = signal.period();
        if (rms_out != nullptr) {
            *rms_out = msid::signal_rms(period);
        }
        if (crest_out != nullptr) {
            *crest_out = msid::crest_factor(period);
        }
    });
}

msid_status msid_plant_load(const char* path, msid_plant** out) {
    if (path == nullptr || out == nullptr) {
        return fail_argument("msid_plant_load: null argument");
    }
    *out = nullptr;
    return guarded([&] {
        auto handle = std::make_unique<msid_plant>();
        handle->spec = msid::load_plant(path);
        *out = handle.release();
    });
}

msid_status msid_plant_from_json(const char* json_text, msid_plant** out) {
    if (json_text == nullptr || out == nullptr) {
        return fail_argument("msid_plant_from_json: null argument");
    }
    *out = nullptr;
    return guarded([&] {
        auto handle = std::make_unique<msid_plant>();
        handle->spec = msid::plant_from_json(json_text);
        *out = handle.release();
    });
}

msid_status msid_plant_save(const msid_plant* plant, const char* path) {
    if (plant == nullptr || path == nullptr) {
        return fail_argument("msid_plant_save: null argument");
    }
    return guarded([&] { msid::save_plant(plant->spec, path); });
}

void msid_plant_free(msid_plant* plant) { delete plant; }

msid_status msid_simulate(const msid_design* design, const msid_plant* plant,
                          int32_t num_periods, const char* out_dir,
                          const char* basename, int32_t* num_records_out) {
    if (design == nullptr || plant == nullptr || out_dir == nullptr ||
        basename == nullptr) {
        return fail_argument("msid_simulate: null argument");
    }
    return guarded([&] {
        namespace fs = std::filesystem;
        std::error_code ec;
        fs::create_directories(out_dir, ec);
        if (ec) {
            throw msid::IoError(std::string("cannot create output directory: ") + out_dir);
        }
        const int realizations = design->design.spec.num_realizations;
        for (int m = 0; m < realizations; ++m) {
            const msid::ExcitationSignal signal = msid::render_signal(design->design, m);
            const msid::MeasurementRecord record =
                msid::run_experiment(signal, plant->spec, num_periods);
            char name[32];
            std::snprintf(name, sizeof(name), "_r%03d.csv", m);
            msid::write_record(record, (fs::path(out_dir) / (basename + std::string(name)))
                                           .string());
        }
        if (num_records_out != nullptr) {
            *num_records_out = realizations;
        }
    });
}

void msid_analysis_options_init(msid_analysis_options* options) {
    if (options == nullptr) {
        return;
    }
    const msid::AnalysisOptions defaults;
    options->use_lpm = defaults.method == "lpm" ? 1 : 0;
    options->lpm_poly_order = defaults.lpm.poly_order;
    options->lpm_half_width = defaults.lpm.half_width;
    options->drift_threshold = defaults.drift_threshold;
}

msid_status msid_analyze(const char* design_path, const char* const* record_paths,
                         size_t num_records, const msid_analysis_options* options,
                         msid_analysis** out) {
    if (design_path == nullptr || record_paths == nullptr || out == nullptr) {
        return fail_argument("msid_analyze: null argument");
    }
    *out = nullptr;
    return guarded([&] {
        msid::AnalysisOptions opts;
        if (options != nullptr) {
            opts.method = options->use_lpm != 0 ? "lpm" : "etfe";
            opts.lpm.poly_order = options->lpm_poly_order;
            opts.lpm.half_width = options->lpm_half_width;
            opts.drift_threshold = options->drift_threshold;
        }
        std::vector<std::string> paths;
        paths.reserve(num_records);
        for (size_t i = 0; i < num_records; ++i) {
            if (record_paths[i] == nullptr) {
                throw msid::ArgumentError("msid_analyze: null record path");
            }
            paths.emplace_back(record_paths[i]);
        }
        auto handle = std::make_unique<msid_analysis>();
        handle->result = msid::analyze_files(design_path, paths, opts);
        *out = handle.release();
    });
}

void msid_analysis_free(msid_analysis* analysis) { delete analysis; }

msid_status msid_analysis_summary(const msid_analysis* analysis, msid_summary* out) {
    if (analysis == nullptr || out == nullptr) {
        return fail_argument("msid_analysis_summary: null argument");
    }
    const msid::AnalysisResult& r = analysis->result;
    out->median_mag_db = r.summary.median_mag_db;
    out->median_noise_gap_db = r.summary.median_noise_gap_db;
    out->median_total_gap_db = r.summary.median_total_gap_db;
    out->median_nl_fraction = r.summary.median_nl_fraction;
    out->drift_flagged = r.summary.drift_flagged;
    out->num_realizations = r.bla.num_realizations;
    out->num_periods = r.bla.num_periods;
    out->num_bins = static_cast<int32_t>(r.bla.excited_bins.size());
    out->noise_available = r.bla.noise_available ? 1 : 0;
    out->total_available = r.bla.total_available ? 1 : 0;
    out->dof_noise = r.bla.dof_noise;
    out->dof_total = r.bla.dof_total;
    g_last_error.clear();
    return MSID_OK;
}

msid_status msid_analysis_summary_text(const msid_analysis* analysis, char* buffer,
                                       size_t capacity, size_t* out_len) {
    if (analysis == nullptr || out_len == nullptr) {
        return fail_argument("msid_analysis_summary_text: null argument");
    }
    return guarded([&] {
        const std::string text = msid::summary_text(analysis->result);
        *out_len = text.size();
        if (buffer != nullptr) {
            if (capacity < text.size() + 1) {
                throw msid::ArgumentError("summary buffer too small: need " +
                                          std::to_string(text.size() + 1) + " bytes");
            }
            std::memcpy(buffer, text.c_str(), text.size() + 1);
        }
    });
}

msid_status msid_analysis_curve(const msid_analysis* analysis, double* freq_hz,
                                double* re, double* im, size_t capacity) {
    if (analysis == nullptr) {
        return fail_argument("msid_analysis_curve: null argument");
    }
    return guarded([&] {
        const msid::FrfEstimate& curve = analysis->result.curve;
        if (freq_hz != nullptr) {
            copy_array(curve.freq_hz, freq_hz, capacity, "curve");
        }
        if (re != nullptr || im != nullptr) {
            if (capacity < curve.response.size()) {
                throw msid::ArgumentError("curve buffer too small: need " +
                                          std::to_string(curve.response.size()) +
                                          " elements");
            }
            for (std::size_t k = 0; k < curve.response.size(); ++k) {
                if (re != nullptr) {
                    re[k] = curve.response[k].real();
                }
                if (im != nullptr) {
                    im[k] = curve.response[k].imag();
                }
            }
        }
    });
}

msid_status msid_analysis_variances(const msid_analysis* analysis, double* noise_var,
                                    double* total_var, double* nl_var, size_t capacity) {
    if (analysis == nullptr) {
        return fail_argument("msid_analysis_variances: null argument");
    }
    return guarded([&] {
        const msid::BlaResult& bla = analysis->result.bla;
        const std::size_t bins = bla.bla.size();
        auto fill = [&](const std::vector<double>& src, bool available, double* out) {
            if (out == nullptr) {
                return;
            }
            if (capacity < bins) {
                throw msid::ArgumentError("variance buffer too small: need " +
                                          std::to_string(bins) + " elements");
            }
            for (std::size_t k = 0; k < bins; ++k) {
                out[k] = available ? src[k] : std::numeric_limits<double>::quiet_NaN();
            }
        };
        fill(bla.noise_variance, bla.noise_available, noise_var);
        fill(bla.total_variance, bla.total_available, total_var);
        fill(bla.nl_variance, bla.noise_available && bla.total_available, nl_var);
    });
}

msid_status msid_analysis_save(const msid_analysis* analysis, const char* out_dir) {
    if (analysis == nullptr || out_dir == nullptr) {
        return fail_argument("msid_analysis_save: null argument");
    }
    return guarded([&] { msid::save_analysis(analysis->result, out_dir); });
}

msid_status msid_report(const char* report_path, const char* out_dir,
                        const char* format) {
    if (report_path == nullptr || out_dir == nullptr || format == nullptr) {
        return fail_argument("msid_report: null argument");
    }
    return guarded([&] { msid::write_report_bundle(report_path, out_dir, format); });
}

}  // extern "C"
