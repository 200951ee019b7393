#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace msid {

/// Full parameterization of a random-phase multisine excitation design.
///
/// The signal is synthesized at `reference_rate_hz` with `samples_per_period`
/// samples per period and excites every DFT bin whose frequency falls inside
/// [f_min_hz, f_max_hz], all with the same cosine amplitude. A steady-state
/// lead-in of `prefix_samples` (copied from the period tail) precedes the
/// first period, and the result is zero-order-hold upsampled by
/// `upsample_factor` to the acquisition rate.
struct MultisineSpec {
    double reference_rate_hz = 31.25;
    int samples_per_period = 400;
    double f_min_hz = 0.06;
    double f_max_hz = 1.0;
    double amplitude = 0.02;
    int num_realizations = 1;
    std::uint64_t seed = 0;
    int prefix_samples = 100;
    int upsample_factor = 32;

    double frequency_resolution_hz() const {
        return reference_rate_hz / samples_per_period;
    }
    double acquisition_rate_hz() const {
        return reference_rate_hz * upsample_factor;
    }

    /// Throws ArgumentError when any field violates its invariants.
    void validate() const;
};

/// One rendered realization: drawn phases plus the time-domain samples.
struct ExcitationSignal {
    MultisineSpec spec;
    int realization_index = 0;
    std::vector<double> phases;             ///< one per excited bin, in [0, 2pi)
    std::vector<double> reference_samples;  ///< prefix + one period, reference rate
    std::vector<double> upsampled_samples;  ///< zero-order hold of reference_samples

    /// The single period without the prefix.
    std::vector<double> period() const {
        return {reference_samples.begin() + spec.prefix_samples, reference_samples.end()};
    }
};

/// A design document: spec, derived bin set, and the phases of every
/// realization. Stored designs replay exactly without the generator.
struct MultisineDesign {
    MultisineSpec spec;
    std::vector<int> excited_bins;
    std::vector<std::vector<double>> phases;  ///< [realization][tone]
};

/// All bins k with k*f0 in [f_min, f_max], edges rounded inward; bin 0 and
/// bins at or above N/2 are never excited. Throws DataError when the band
/// contains no bin.
std::vector<int> select_excited_bins(const MultisineSpec& spec);

/// Phases for one realization, drawn from the mt19937_64 stream keyed by
/// (spec.seed, realization_index), one uniform [0, 2pi) draw per tone.
std::vector<double> draw_phases(const MultisineSpec& spec, int realization_index,
                                std::size_t num_tones);

MultisineDesign make_design(const MultisineSpec& spec);

/// Renders the time-domain signal of one stored realization.
ExcitationSignal render_signal(const MultisineDesign& design, int realization_index);

/// make_design + render_signal in one step.
ExcitationSignal generate_multisine(const MultisineSpec& spec, int realization_index);

/// Each input sample repeated `factor` times.
std::vector<double> zoh_upsample(const std::vector<double>& samples, int factor);

double signal_rms(const std::vector<double>& samples);

/// Peak-to-RMS ratio. Throws ArgumentError on empty input, NumericError on
/// zero RMS.
double crest_factor(const std::vector<double>& samples);

// Design document (de)serialization. The JSON carries every spec field plus
// the excited bins and per-realization phase arrays.
std::string design_to_json(const MultisineDesign& design);
MultisineDesign design_from_json(const std::string& text);
void save_design(const MultisineDesign& design, const std::string& path);
MultisineDesign load_design(const std::string& path);

}  // namespace msid
