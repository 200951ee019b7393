#include "msid/multisine.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "msid/errors.hpp"
#include "msid/rng.hpp"

namespace msid {

void MultisineSpec::validate() const {
    if (reference_rate_hz <= 0.0) {
        throw ArgumentError("reference_rate_hz must be positive");
    }
    if (samples_per_period <= 0) {
        throw ArgumentError("samples_per_period must be positive");
    }
    if (!(f_min_hz > 0.0) || !(f_min_hz <= f_max_hz)) {
        throw ArgumentError("excitation band requires 0 < f_min_hz <= f_max_hz");
    }
    if (!(f_max_hz < reference_rate_hz / 2.0)) {
        throw ArgumentError("f_max_hz must lie below the Nyquist frequency");
    }
    if (amplitude <= 0.0) {
        throw ArgumentError("amplitude must be positive");
    }
    if (num_realizations <= 0) {
        throw ArgumentError("num_realizations must be positive");
    }
    if (prefix_samples < 0 || prefix_samples >= samples_per_period) {
        throw ArgumentError("prefix_samples must be in [0, samples_per_period)");
    }
    if (upsample_factor <= 0) {
        throw ArgumentError("upsample_factor must be positive");
    }
}

std::vector<int> select_excited_bins(const MultisineSpec& spec) {
    spec.validate();
    const double f0 = spec.frequency_resolution_hz();
    int k_lo = static_cast<int>(std::ceil(spec.f_min_hz / f0));
    int k_hi = static_cast<int>(std::floor(spec.f_max_hz / f0));
    k_lo = std::max(k_lo, 1);
    // one-sided grid; the Nyquist bin N/2 is never excited
    k_hi = std::min(k_hi, (spec.samples_per_period - 1) / 2);
    if (k_lo > k_hi) {
        std::ostringstream msg;
        msg << "band [" << spec.f_min_hz << ", " << spec.f_max_hz
            << "] Hz contains no DFT bin at resolution " << f0 << " Hz";
        throw DataError(msg.str());
    }
    std::vector<int> bins;
    bins.reserve(static_cast<std::size_t>(k_hi - k_lo + 1));
    for (int k = k_lo; k <= k_hi; ++k) {
        bins.push_back(k);
    }
    return bins;
}

std::vector<double> draw_phases(const MultisineSpec& spec, int realization_index,
                                std::size_t num_tones) {
    std::mt19937_64 gen(stream_seed(spec.seed, static_cast<std::uint64_t>(realization_index)));
    std::vector<double> phases(num_tones);
    for (double& phi : phases) {
        phi = 2.0 * M_PI * uniform53(gen);
    }
    return phases;
}

MultisineDesign make_design(const MultisineSpec& spec) {
    MultisineDesign design;
    design.spec = spec;
    design.excited_bins = select_excited_bins(spec);
    design.phases.reserve(static_cast<std::size_t>(spec.num_realizations));
    for (int m = 0; m < spec.num_realizations; ++m) {
        design.phases.push_back(draw_phases(spec, m, design.excited_bins.size()));
    }
    return design;
}

ExcitationSignal render_signal(const MultisineDesign& design, int realization_index) {
    const MultisineSpec& spec = design.spec;
    spec.validate();
    if (realization_index < 0 ||
        realization_index >= static_cast<int>(design.phases.size())) {
        throw ArgumentError("realization_index out of range");
    }
    const std::vector<double>& phases = design.phases[realization_index];
    if (phases.size() != design.excited_bins.size()) {
        throw DataError("phase count does not match excited bin count");
    }

    const int n = spec.samples_per_period;
    std::vector<double> period(static_cast<std::size_t>(n), 0.0);
    for (std::size_t tone = 0; tone < design.excited_bins.size(); ++tone) {
        const double k = design.excited_bins[tone];
        const double phi = phases[tone];
        for (int i = 0; i < n; ++i) {
            period[i] += spec.amplitude * std::cos(2.0 * M_PI * k * i / n + phi);
        }
    }

    ExcitationSignal signal;
    signal.spec = spec;
    signal.realization_index = realization_index;
    signal.phases = phases;
    signal.reference_samples.reserve(static_cast<std::size_t>(spec.prefix_samples + n));
    signal.reference_samples.assign(period.end() - spec.prefix_samples, period.end());
    signal.reference_samples.insert(signal.reference_samples.end(), period.begin(),
                                    period.end());
    signal.upsampled_samples = zoh_upsample(signal.reference_samples, spec.upsample_factor);
    return signal;
}

ExcitationSignal generate_multisine(const MultisineSpec& spec, int realization_index) {
    if (realization_index < 0 || realization_index >= spec.num_realizations) {
        throw ArgumentError("realization_index out of range");
    }
    return render_signal(make_design(spec), realization_index);
}

std::vector<double> zoh_upsample(const std::vector<double>& samples, int factor) {
    if (factor < 1) {
        throw ArgumentError("upsample factor must be >= 1");
    }
    std::vector<double> out;
    out.reserve(samples.size() * static_cast<std::size_t>(factor));
    for (double v : samples) {
        out.insert(out.end(), static_cast<std::size_t>(factor), v);
    }
    return out;
}

double signal_rms(const std::vector<double>& samples) {
    if (samples.empty()) {
        throw ArgumentError("rms of empty sequence");
    }
    double acc = 0.0;
    for (double v : samples) {
        acc += v * v;
    }
    return std::sqrt(acc / static_cast<double>(samples.size()));
}

double crest_factor(const std::vector<double>& samples) {
    const double rms = signal_rms(samples);
    if (rms == 0.0) {
        throw NumericError("crest factor undefined for zero-RMS signal");
    }
    double peak = 0.0;
    for (double v : samples) {
        peak = std::max(peak, std::abs(v));
    }
    return peak / rms;
}

namespace {

nlohmann::json design_doc(const MultisineDesign& design) {
    const MultisineSpec& s = design.spec;
    nlohmann::json realizations = nlohmann::json::array();
    for (std::size_t m = 0; m < design.phases.size(); ++m) {
        realizations.push_back({{"index", m}, {"phases", design.phases[m]}});
    }
    return nlohmann::json{
        {"multisine_design",
         {{"reference_rate_hz", s.reference_rate_hz},
          {"samples_per_period", s.samples_per_period},
          {"f_min_hz", s.f_min_hz},
          {"f_max_hz", s.f_max_hz},
          {"amplitude", s.amplitude},
          {"num_realizations", s.num_realizations},
          {"seed", s.seed},
          {"prefix_samples", s.prefix_samples},
          {"upsample_factor", s.upsample_factor},
          {"frequency_resolution_hz", s.frequency_resolution_hz()},
          {"excited_bins", design.excited_bins},
          {"realizations", realizations}}}};
}

}  // namespace

std::string design_to_json(const MultisineDesign& design) {
    return design_doc(design).dump(2) + "\n";
}

MultisineDesign design_from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("design JSON parse failure: ") + e.what());
    }
    try {
        const nlohmann::json& d = doc.at("multisine_design");
        MultisineDesign design;
        MultisineSpec& s = design.spec;
        s.reference_rate_hz = d.at("reference_rate_hz").get<double>();
        s.samples_per_period = d.at("samples_per_period").get<int>();
        s.f_min_hz = d.at("f_min_hz").get<double>();
        s.f_max_hz = d.at("f_max_hz").get<double>();
        s.amplitude = d.at("amplitude").get<double>();
        s.num_realizations = d.at("num_realizations").get<int>();
        s.seed = d.at("seed").get<std::uint64_t>();
        s.prefix_samples = d.at("prefix_samples").get<int>();
        s.upsample_factor = d.at("upsample_factor").get<int>();
        s.validate();
        design.excited_bins = d.at("excited_bins").get<std::vector<int>>();
        if (design.excited_bins != select_excited_bins(s)) {
            throw DataError("stored excited bins do not match the spec parameters");
        }
        for (const nlohmann::json& r : d.at("realizations")) {
            design.phases.push_back(r.at("phases").get<std::vector<double>>());
            if (design.phases.back().size() != design.excited_bins.size()) {
                throw DataError("stored phase array length does not match bin count");
            }
        }
        if (static_cast<int>(design.phases.size()) != s.num_realizations) {
            throw DataError("stored realization count does not match num_realizations");
        }
        return design;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("design JSON missing or mistyped field: ") + e.what());
    }
}

void save_design(const MultisineDesign& design, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open design file for writing: " + path);
    }
    out << design_to_json(design);
    if (!out) {
        throw IoError("failed writing design file: " + path);
    }
}

MultisineDesign load_design(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open design file: " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return design_from_json(buf.str());
}

}  // namespace msid
