#include "msid/plant.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "msid/errors.hpp"
#include "msid/rng.hpp"

namespace msid {

namespace {

bool all_finite(const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

/// Direct form II transposed; keeps state across calls so the plant can be
/// cycled period by period while settling.
class IirFilter {
public:
    IirFilter(const std::vector<double>& b, const std::vector<double>& a) {
        const double a0 = a.front();
        const std::size_t order = std::max(b.size(), a.size()) - 1;
        b_.assign(order + 1, 0.0);
        a_.assign(order + 1, 0.0);
        for (std::size_t i = 0; i < b.size(); ++i) {
            b_[i] = b[i] / a0;
        }
        for (std::size_t i = 0; i < a.size(); ++i) {
            a_[i] = a[i] / a0;
        }
        state_.assign(order, 0.0);
    }

    double step(double u) {
        const double y = b_[0] * u + (state_.empty() ? 0.0 : state_[0]);
        for (std::size_t i = 0; i + 1 < state_.size(); ++i) {
            state_[i] = b_[i + 1] * u + state_[i + 1] - a_[i + 1] * y;
        }
        if (!state_.empty()) {
            state_.back() = b_.back() * u - a_.back() * y;
        }
        return y;
    }

private:
    std::vector<double> b_;
    std::vector<double> a_;
    std::vector<double> state_;
};

std::vector<double> apply_polynomial(const std::vector<double>& coeffs,
                                     const std::vector<double>& input) {
    std::vector<double> out(input.size());
    for (std::size_t i = 0; i < input.size(); ++i) {
        out[i] = polynomial_eval(coeffs, input[i]);
    }
    return out;
}

}  // namespace

std::string plant_kind_name(PlantKind kind) {
    switch (kind) {
        case PlantKind::kLti:
            return "lti";
        case PlantKind::kWiener:
            return "wiener";
        case PlantKind::kHammerstein:
            return "hammerstein";
    }
    throw ArgumentError("unknown plant kind");
}

PlantKind plant_kind_from_name(const std::string& name) {
    if (name == "lti") {
        return PlantKind::kLti;
    }
    if (name == "wiener") {
        return PlantKind::kWiener;
    }
    if (name == "hammerstein") {
        return PlantKind::kHammerstein;
    }
    throw ArgumentError("unknown plant kind: " + name);
}

void PlantSpec::validate() const {
    if (b.empty() || !all_finite(b)) {
        throw ArgumentError("plant numerator must be non-empty and finite");
    }
    if (a.empty() || !all_finite(a) || a.front() == 0.0) {
        throw ArgumentError("plant denominator must be non-empty, finite, with a[0] != 0");
    }
    if (kind != PlantKind::kLti) {
        if (poly.empty() || !all_finite(poly)) {
            throw ArgumentError(plant_kind_name(kind) +
                                " plant needs finite polynomial coefficients");
        }
    }
    if (!std::isfinite(noise_std) || noise_std < 0.0) {
        throw ArgumentError("plant noise_std must be finite and non-negative");
    }
    const double pole = max_pole_magnitude(a);
    if (pole >= 1.0) {
        std::ostringstream msg;
        msg << "plant is unstable: pole magnitude " << pole;
        throw NumericError(msg.str());
    }
}

double polynomial_eval(const std::vector<double>& coeffs, double x) {
    double acc = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) {
        acc = acc * x + *it;
    }
    return acc;
}

std::vector<double> filter_lti(const std::vector<double>& b, const std::vector<double>& a,
                               const std::vector<double>& input) {
    if (b.empty() || a.empty() || a.front() == 0.0) {
        throw ArgumentError("filter needs non-empty coefficients with a[0] != 0");
    }
    IirFilter filter(b, a);
    std::vector<double> out(input.size());
    for (std::size_t i = 0; i < input.size(); ++i) {
        out[i] = filter.step(input[i]);
    }
    return out;
}

double max_pole_magnitude(const std::vector<double>& a) {
    if (a.empty() || a.front() == 0.0) {
        throw ArgumentError("denominator must be non-empty with a[0] != 0");
    }
    std::size_t degree = a.size() - 1;
    while (degree > 0 && a[degree] == 0.0) {
        --degree;
    }
    if (degree == 0) {
        return 0.0;
    }
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(degree),
                                                      static_cast<Eigen::Index>(degree));
    for (std::size_t j = 0; j < degree; ++j) {
        companion(0, static_cast<Eigen::Index>(j)) = -a[j + 1] / a[0];
    }
    for (std::size_t j = 1; j < degree; ++j) {
        companion(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j - 1)) = 1.0;
    }
    return companion.eigenvalues().cwiseAbs().maxCoeff();
}

std::complex<double> analytic_frf(const PlantSpec& plant, double freq_hz,
                                  double sample_rate_hz) {
    if (sample_rate_hz <= 0.0) {
        throw ArgumentError("sample rate must be positive");
    }
    const std::complex<double> z =
        std::polar(1.0, 2.0 * std::acos(-1.0) * freq_hz / sample_rate_hz);
    std::complex<double> num(0.0, 0.0);
    std::complex<double> den(0.0, 0.0);
    std::complex<double> zmi(1.0, 0.0);  // z^-i
    for (std::size_t i = 0; i < std::max(plant.b.size(), plant.a.size()); ++i) {
        if (i < plant.b.size()) {
            num += plant.b[i] * zmi;
        }
        if (i < plant.a.size()) {
            den += plant.a[i] * zmi;
        }
        zmi /= z;
    }
    if (std::abs(den) == 0.0) {
        throw NumericError("plant denominator vanishes on the unit circle");
    }
    return num / den;
}

std::vector<double> plant_steady_period(const PlantSpec& plant,
                                        const std::vector<double>& u_period,
                                        const SettleOptions& options) {
    plant.validate();
    if (u_period.empty()) {
        throw ArgumentError("steady-state simulation needs a non-empty period");
    }
    if (options.max_periods < 2 || options.tolerance <= 0.0) {
        throw ArgumentError("settle options need max_periods >= 2 and a positive tolerance");
    }

    const std::vector<double>& filter_input =
        plant.kind == PlantKind::kHammerstein ? apply_polynomial(plant.poly, u_period)
                                              : u_period;

    IirFilter filter(plant.b, plant.a);
    std::vector<double> previous(u_period.size(), 0.0);
    std::vector<double> current(u_period.size(), 0.0);
    for (int cycle = 0; cycle < options.max_periods; ++cycle) {
        for (std::size_t i = 0; i < filter_input.size(); ++i) {
            current[i] = filter.step(filter_input[i]);
        }
        if (cycle > 0) {
            double diff_sq = 0.0;
            double ref_sq = 0.0;
            for (std::size_t i = 0; i < current.size(); ++i) {
                const double d = current[i] - previous[i];
                diff_sq += d * d;
                ref_sq += current[i] * current[i];
            }
            const double scale = std::max(std::sqrt(ref_sq), 1e-300);
            if (std::sqrt(diff_sq) <= options.tolerance * scale) {
                if (plant.kind == PlantKind::kWiener) {
                    return apply_polynomial(plant.poly, current);
                }
                return current;
            }
        }
        std::swap(previous, current);
    }
    std::ostringstream msg;
    msg << "plant did not settle within " << options.max_periods << " periods";
    throw NumericError(msg.str());
}

MeasurementRecord run_experiment(const ExcitationSignal& signal, const PlantSpec& plant,
                                 int num_periods, const SettleOptions& options) {
    if (num_periods < 1) {
        throw ArgumentError("experiment needs at least one period");
    }
    signal.spec.validate();

    const std::vector<double> u_period = signal.period();
    const std::vector<double> y_period = plant_steady_period(plant, u_period, options);
    const int period = signal.spec.samples_per_period;
    const int prefix = signal.spec.prefix_samples;

    // reference-rate streams: steady-state period tail as lead-in, then the
    // periods themselves; noise is fresh per sample, so never periodic
    std::vector<double> u_ref;
    std::vector<double> y_ref;
    u_ref.reserve(static_cast<std::size_t>(prefix + num_periods * period));
    y_ref.reserve(u_ref.capacity());
    u_ref.insert(u_ref.end(), u_period.end() - prefix, u_period.end());
    y_ref.insert(y_ref.end(), y_period.end() - prefix, y_period.end());
    for (int p = 0; p < num_periods; ++p) {
        u_ref.insert(u_ref.end(), u_period.begin(), u_period.end());
        y_ref.insert(y_ref.end(), y_period.begin(), y_period.end());
    }
    if (plant.noise_std > 0.0) {
        GaussianStream noise(stream_seed(plant.seed,
                                         static_cast<std::uint64_t>(signal.realization_index)));
        for (double& y : y_ref) {
            y += plant.noise_std * noise.next();
        }
    }

    MeasurementRecord record;
    record.metadata.sample_rate_hz = signal.spec.acquisition_rate_hz();
    record.metadata.samples_per_period = period * signal.spec.upsample_factor;
    record.metadata.prefix_samples = prefix * signal.spec.upsample_factor;
    record.metadata.num_periods = num_periods;
    record.metadata.realization_index = signal.realization_index;
    record.metadata.load_unit = "N";
    record.metadata.indentation_unit = "m";

    record.load = zoh_upsample(u_ref, signal.spec.upsample_factor);
    record.indentation = zoh_upsample(y_ref, signal.spec.upsample_factor);
    record.time_s.resize(record.load.size());
    for (std::size_t i = 0; i < record.time_s.size(); ++i) {
        record.time_s[i] = static_cast<double>(i) / record.metadata.sample_rate_hz;
    }
    record.validate();
    return record;
}

namespace {

nlohmann::json plant_doc(const PlantSpec& plant) {
    return nlohmann::json{{"plant",
                           {{"kind", plant_kind_name(plant.kind)},
                            {"b", plant.b},
                            {"a", plant.a},
                            {"poly", plant.poly},
                            {"noise_std", plant.noise_std},
                            {"seed", plant.seed}}}};
}

}  // namespace

std::string plant_to_json(const PlantSpec& plant) {
    return plant_doc(plant).dump(2) + "\n";
}

PlantSpec plant_from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("plant JSON parse failure: ") + e.what());
    }
    try {
        const nlohmann::json& p = doc.at("plant");
        PlantSpec plant;
        plant.kind = plant_kind_from_name(p.at("kind").get<std::string>());
        plant.b = p.at("b").get<std::vector<double>>();
        plant.a = p.at("a").get<std::vector<double>>();
        plant.poly = p.value("poly", std::vector<double>{});
        plant.noise_std = p.at("noise_std").get<double>();
        plant.seed = p.at("seed").get<std::uint64_t>();
        plant.validate();
        return plant;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("plant JSON missing or mistyped field: ") + e.what());
    }
}

void save_plant(const PlantSpec& plant, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open plant file for writing: " + path);
    }
    out << plant_to_json(plant);
    if (!out) {
        throw IoError("failed writing plant file: " + path);
    }
}

PlantSpec load_plant(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open plant file: " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return plant_from_json(buf.str());
}

}  // namespace msid
