#include "msid/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "msid/errors.hpp"
#include "msid/spectral.hpp"

namespace fs = std::filesystem;

namespace msid {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

/// Median that ignores NaN entries; NaN when nothing is left.
double median_or_nan(std::vector<double> values) {
    values.erase(std::remove_if(values.begin(), values.end(),
                                [](double v) { return std::isnan(v); }),
                 values.end());
    return values.empty() ? kNan : median(std::move(values));
}

void check_record_against_design(const MultisineSpec& spec, const RecordMetadata& md,
                                 std::size_t record_index) {
    std::ostringstream where;
    where << "record " << record_index;
    const double rate = spec.acquisition_rate_hz();
    if (std::abs(md.sample_rate_hz - rate) > 1e-9 * rate) {
        throw DataError(where.str() + ": sample rate does not match the design");
    }
    if (md.samples_per_period != spec.samples_per_period * spec.upsample_factor) {
        throw DataError(where.str() + ": period length does not match the design");
    }
    if (md.prefix_samples != spec.prefix_samples * spec.upsample_factor) {
        throw DataError(where.str() + ": prefix length does not match the design");
    }
    if (md.realization_index < 0 || md.realization_index >= spec.num_realizations) {
        throw DataError(where.str() + ": realization index " +
                        std::to_string(md.realization_index) + " not in the design");
    }
}

FrfEstimate curve_from_bla(const BlaResult& bla) {
    FrfEstimate curve;
    curve.method = "etfe";
    curve.excited_bins = bla.excited_bins;
    curve.freq_hz = bla.freq_hz;
    curve.response = bla.bla;
    if (bla.noise_available) {
        curve.noise_variance = bla.noise_variance;
        curve.dof = bla.dof_noise;
    }
    return curve;
}

FrfEstimate average_lpm_curves(const std::vector<FrfEstimate>& curves) {
    const std::size_t m_count = curves.size();
    FrfEstimate curve;
    curve.method = "lpm";
    curve.excited_bins = curves.front().excited_bins;
    curve.freq_hz = curves.front().freq_hz;
    // each member variance has `dof` residual dof; the M-average pools them
    curve.dof = curves.front().dof * static_cast<int>(m_count);
    const std::size_t bins = curves.front().response.size();
    curve.response.assign(bins, {0.0, 0.0});
    curve.noise_variance.assign(bins, 0.0);
    for (const FrfEstimate& c : curves) {
        for (std::size_t k = 0; k < bins; ++k) {
            curve.response[k] += c.response[k];
            curve.noise_variance[k] += c.noise_variance[k];
        }
    }
    const double m = static_cast<double>(m_count);
    for (std::size_t k = 0; k < bins; ++k) {
        curve.response[k] /= m;
        curve.noise_variance[k] /= m * m;
    }
    return curve;
}

AnalysisSummary make_summary(const AnalysisResult& r) {
    AnalysisSummary s;
    const std::size_t bins = r.curve.response.size();
    std::vector<double> mag_db(bins);
    for (std::size_t k = 0; k < bins; ++k) {
        mag_db[k] = 20.0 * std::log10(std::abs(r.curve.response[k]));
    }
    s.median_mag_db = median_or_nan(mag_db);

    auto gap_median = [&](const std::vector<double>& variance) {
        std::vector<double> gaps(bins);
        for (std::size_t k = 0; k < bins; ++k) {
            gaps[k] = mag_db[k] - variance_to_db(variance[k]);
        }
        return median_or_nan(std::move(gaps));
    };
    s.median_noise_gap_db = r.bla.noise_available ? gap_median(r.bla.noise_variance) : kNan;
    s.median_total_gap_db = r.bla.total_available ? gap_median(r.bla.total_variance) : kNan;
    s.median_nl_fraction =
        r.bla.total_available ? median_or_nan(nl_output_fraction(r.bla)) : kNan;
    s.drift_flagged = r.drift.num_flagged();
    return s;
}

}  // namespace

void AnalysisOptions::validate() const {
    if (method != "etfe" && method != "lpm") {
        throw ArgumentError("analysis method must be \"etfe\" or \"lpm\", got \"" +
                            method + "\"");
    }
    lpm.validate();
    if (!std::isfinite(drift_threshold) || drift_threshold <= 0.0) {
        throw ArgumentError("drift threshold must be positive");
    }
}

AnalysisResult analyze_records(const MultisineDesign& design,
                               const std::vector<MeasurementRecord>& records,
                               const AnalysisOptions& options) {
    options.validate();
    design.spec.validate();
    if (records.empty()) {
        throw ArgumentError("analysis needs at least one record");
    }
    const int num_periods = records.front().metadata.num_periods;
    std::vector<int> seen;
    for (std::size_t i = 0; i < records.size(); ++i) {
        records[i].validate();
        check_record_against_design(design.spec, records[i].metadata, i);
        if (records[i].metadata.num_periods != num_periods) {
            throw DataError("records carry unequal period counts");
        }
        const int m = records[i].metadata.realization_index;
        if (std::find(seen.begin(), seen.end(), m) != seen.end()) {
            throw DataError("realization " + std::to_string(m) +
                            " appears in more than one record");
        }
        seen.push_back(m);
    }

    AnalysisResult out;
    out.design = design;
    out.options = options;

    const double rate = design.spec.acquisition_rate_hz();
    std::vector<std::vector<FrfEstimate>> per_period_frfs;
    std::vector<FrfEstimate> lpm_curves;
    per_period_frfs.reserve(records.size());
    for (const MeasurementRecord& record : records) {
        out.records.push_back({"", record.metadata.realization_index, num_periods});
        const SegmentResult segmented = segment_periods(record);
        const MeanRemovalResult cleaned = remove_mean(segmented.block);
        const BlockSpectra spectra = spectra_of_block(cleaned.block, rate);
        std::vector<FrfEstimate> per_period;
        per_period.reserve(spectra.u.size());
        for (std::size_t p = 0; p < spectra.u.size(); ++p) {
            per_period.push_back(etfe_frf(spectra.u[p], spectra.y[p], design.excited_bins));
        }
        per_period_frfs.push_back(std::move(per_period));
        if (options.method == "lpm") {
            const AveragedSpectrum u_avg = average_spectra(spectra.u);
            const AveragedSpectrum y_avg = average_spectra(spectra.y);
            lpm_curves.push_back(
                lpm_frf(u_avg.mean, y_avg.mean, design.excited_bins, options.lpm));
        }
    }

    out.bla = robust_bla(per_period_frfs);
    out.curve = options.method == "lpm" ? average_lpm_curves(lpm_curves)
                                        : curve_from_bla(out.bla);
    out.drift = drift_metric(records, options.drift_threshold);
    out.summary = make_summary(out);
    return out;
}

AnalysisResult analyze_files(const std::string& design_path,
                             const std::vector<std::string>& record_paths,
                             const AnalysisOptions& options) {
    const MultisineDesign design = load_design(design_path);
    std::vector<MeasurementRecord> records;
    records.reserve(record_paths.size());
    for (const std::string& path : record_paths) {
        records.push_back(read_record(path));
    }
    AnalysisResult result = analyze_records(design, records, options);
    for (std::size_t i = 0; i < record_paths.size(); ++i) {
        result.records[i].path = record_paths[i];
    }
    return result;
}

namespace {

nlohmann::json complex_columns(const std::vector<std::complex<double>>& values) {
    nlohmann::json re = nlohmann::json::array();
    nlohmann::json im = nlohmann::json::array();
    for (const auto& v : values) {
        re.push_back(v.real());
        im.push_back(v.imag());
    }
    return nlohmann::json{{"re", re}, {"im", im}};
}

std::vector<std::complex<double>> complex_from_columns(const nlohmann::json& j) {
    const auto re = j.at("re").get<std::vector<double>>();
    const auto im = j.at("im").get<std::vector<double>>();
    if (re.size() != im.size()) {
        throw DataError("re/im arrays of unequal length in report");
    }
    std::vector<std::complex<double>> out(re.size());
    for (std::size_t i = 0; i < re.size(); ++i) {
        out[i] = {re[i], im[i]};
    }
    return out;
}

nlohmann::json optional_array(const std::vector<double>& values, bool available) {
    return available ? nlohmann::json(values) : nlohmann::json();
}

double double_or_nan(const nlohmann::json& j) {
    return j.is_null() ? kNan : j.get<double>();
}

}  // namespace

std::string analysis_to_json(const AnalysisResult& result) {
    nlohmann::json records = nlohmann::json::array();
    for (const AnalyzedRecord& r : result.records) {
        records.push_back({{"path", r.path},
                           {"realization_index", r.realization_index},
                           {"num_periods", r.num_periods}});
    }

    const BlaResult& bla = result.bla;
    nlohmann::json realizations = nlohmann::json::array();
    for (std::size_t m = 0; m < bla.realization_mean.size(); ++m) {
        nlohmann::json entry = {{"g", complex_columns(bla.realization_mean[m])}};
        entry["noise_variance"] = bla.noise_available
                                      ? nlohmann::json(bla.realization_noise_var[m])
                                      : nlohmann::json();
        realizations.push_back(std::move(entry));
    }
    const bool nl_available = bla.noise_available && bla.total_available;
    nlohmann::json bla_doc = {
        {"excited_bins", bla.excited_bins},
        {"freq_hz", bla.freq_hz},
        {"g_bla", complex_columns(bla.bla)},
        {"noise_variance", optional_array(bla.noise_variance, bla.noise_available)},
        {"total_variance", optional_array(bla.total_variance, bla.total_available)},
        {"nl_variance", optional_array(bla.nl_variance, nl_available)},
        {"nl_variance_raw", optional_array(bla.nl_variance_raw, nl_available)},
        {"num_realizations", bla.num_realizations},
        {"num_periods", bla.num_periods},
        {"dof_noise", bla.dof_noise},
        {"dof_total", bla.dof_total},
        {"realizations", realizations}};

    nlohmann::json curve_doc = {
        {"method", result.curve.method},
        {"excited_bins", result.curve.excited_bins},
        {"freq_hz", result.curve.freq_hz},
        {"g", complex_columns(result.curve.response)},
        {"noise_variance", optional_array(result.curve.noise_variance,
                                          result.curve.noise_variance_available())},
        {"dof", result.curve.dof}};

    nlohmann::json drift_records = nlohmann::json::array();
    for (const DriftEntry& e : result.drift.records) {
        drift_records.push_back({{"period_mean_load", e.period_mean_load},
                                 {"period_mean_indentation", e.period_mean_indentation},
                                 {"mean_load", e.mean_load},
                                 {"mean_indentation", e.mean_indentation},
                                 {"load_shift_rel", e.load_shift_rel},
                                 {"flagged", e.flagged}});
    }

    nlohmann::json doc = {
        {"report",
         {{"design", nlohmann::json::parse(design_to_json(result.design))},
          {"options",
           {{"method", result.options.method},
            {"lpm_poly_order", result.options.lpm.poly_order},
            {"lpm_half_width", result.options.lpm.half_width},
            {"drift_threshold", result.options.drift_threshold}}},
          {"records", records},
          {"bla", bla_doc},
          {"curve", curve_doc},
          {"drift",
           {{"threshold", result.drift.threshold},
            {"records", drift_records}}},
          {"summary",
           {{"median_mag_db", result.summary.median_mag_db},
            {"median_noise_gap_db", result.summary.median_noise_gap_db},
            {"median_total_gap_db", result.summary.median_total_gap_db},
            {"median_nl_fraction", result.summary.median_nl_fraction},
            {"drift_flagged", result.summary.drift_flagged}}}}}};
    return doc.dump(2) + "\n";
}

AnalysisResult analysis_from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("report JSON parse failure: ") + e.what());
    }
    try {
        const nlohmann::json& r = doc.at("report");
        AnalysisResult result;
        result.design = design_from_json(r.at("design").dump());

        const nlohmann::json& o = r.at("options");
        result.options.method = o.at("method").get<std::string>();
        result.options.lpm.poly_order = o.at("lpm_poly_order").get<int>();
        result.options.lpm.half_width = o.at("lpm_half_width").get<int>();
        result.options.drift_threshold = o.at("drift_threshold").get<double>();
        result.options.validate();

        for (const nlohmann::json& rec : r.at("records")) {
            result.records.push_back({rec.at("path").get<std::string>(),
                                      rec.at("realization_index").get<int>(),
                                      rec.at("num_periods").get<int>()});
        }

        const nlohmann::json& b = r.at("bla");
        BlaResult& bla = result.bla;
        bla.excited_bins = b.at("excited_bins").get<std::vector<int>>();
        bla.freq_hz = b.at("freq_hz").get<std::vector<double>>();
        bla.bla = complex_from_columns(b.at("g_bla"));
        bla.num_realizations = b.at("num_realizations").get<int>();
        bla.num_periods = b.at("num_periods").get<int>();
        bla.dof_noise = b.at("dof_noise").get<int>();
        bla.dof_total = b.at("dof_total").get<int>();
        bla.noise_available = !b.at("noise_variance").is_null();
        bla.total_available = !b.at("total_variance").is_null();
        if (bla.noise_available) {
            bla.noise_variance = b.at("noise_variance").get<std::vector<double>>();
        }
        if (bla.total_available) {
            bla.total_variance = b.at("total_variance").get<std::vector<double>>();
        }
        if (!b.at("nl_variance").is_null()) {
            bla.nl_variance = b.at("nl_variance").get<std::vector<double>>();
            bla.nl_variance_raw = b.at("nl_variance_raw").get<std::vector<double>>();
        }
        for (const nlohmann::json& m : b.at("realizations")) {
            bla.realization_mean.push_back(complex_from_columns(m.at("g")));
            if (bla.noise_available) {
                bla.realization_noise_var.push_back(
                    m.at("noise_variance").get<std::vector<double>>());
            }
        }

        const nlohmann::json& c = r.at("curve");
        result.curve.method = c.at("method").get<std::string>();
        result.curve.excited_bins = c.at("excited_bins").get<std::vector<int>>();
        result.curve.freq_hz = c.at("freq_hz").get<std::vector<double>>();
        result.curve.response = complex_from_columns(c.at("g"));
        if (!c.at("noise_variance").is_null()) {
            result.curve.noise_variance = c.at("noise_variance").get<std::vector<double>>();
        }
        result.curve.dof = c.at("dof").get<int>();

        const nlohmann::json& d = r.at("drift");
        result.drift.threshold = d.at("threshold").get<double>();
        for (const nlohmann::json& e : d.at("records")) {
            DriftEntry entry;
            entry.period_mean_load = e.at("period_mean_load").get<std::vector<double>>();
            entry.period_mean_indentation =
                e.at("period_mean_indentation").get<std::vector<double>>();
            entry.mean_load = e.at("mean_load").get<double>();
            entry.mean_indentation = e.at("mean_indentation").get<double>();
            entry.load_shift_rel = double_or_nan(e.at("load_shift_rel"));
            entry.flagged = e.at("flagged").get<bool>();
            result.drift.records.push_back(std::move(entry));
        }

        const nlohmann::json& s = r.at("summary");
        result.summary.median_mag_db = double_or_nan(s.at("median_mag_db"));
        result.summary.median_noise_gap_db = double_or_nan(s.at("median_noise_gap_db"));
        result.summary.median_total_gap_db = double_or_nan(s.at("median_total_gap_db"));
        result.summary.median_nl_fraction = double_or_nan(s.at("median_nl_fraction"));
        result.summary.drift_flagged = s.at("drift_flagged").get<int>();
        return result;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("report JSON missing or mistyped field: ") + e.what());
    }
}

namespace {

void write_text_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open file for writing: " + path.string());
    }
    out << text;
    if (!out) {
        throw IoError("failed writing file: " + path.string());
    }
}

std::string relative_to(const std::string& path, const fs::path& base) {
    if (path.empty()) {
        return path;
    }
    std::error_code ec;
    const fs::path rel = fs::proximate(path, base, ec);
    return ec ? path : rel.generic_string();
}

void append_double(std::string& body, double v, char sep) {
    char buf[40];
    auto [ptr, ec] =
        std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    body.append(buf, ptr);
    body.push_back(sep);
}

}  // namespace

void save_analysis(const AnalysisResult& result, const std::string& out_dir) {
    const fs::path dir(out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create output directory: " + out_dir);
    }

    AnalysisResult stored = result;
    for (AnalyzedRecord& rec : stored.records) {
        rec.path = relative_to(rec.path, dir);
    }
    write_text_file(dir / "report.json", analysis_to_json(stored));
    write_bla_csv(result.bla, (dir / "bla_curves.csv").string());
    write_frf_csv(result.curve, (dir / "frf.csv").string());

    std::string drift(
        "record_index,path,realization_index,mean_load,mean_indentation,"
        "load_shift_rel,flagged\n");
    for (std::size_t i = 0; i < result.drift.records.size(); ++i) {
        const DriftEntry& e = result.drift.records[i];
        drift.append(std::to_string(i));
        drift.push_back(',');
        drift.append(i < stored.records.size() ? stored.records[i].path : "");
        drift.push_back(',');
        drift.append(std::to_string(i < stored.records.size()
                                        ? stored.records[i].realization_index
                                        : 0));
        drift.push_back(',');
        append_double(drift, e.mean_load, ',');
        append_double(drift, e.mean_indentation, ',');
        append_double(drift, e.load_shift_rel, ',');
        drift.append(e.flagged ? "1" : "0");
        drift.push_back('\n');
    }
    write_text_file(dir / "drift.csv", drift);
}

std::string summary_text(const AnalysisResult& result) {
    std::ostringstream out;
    const auto& bla = result.bla;
    out << "records analyzed: " << bla.num_realizations << " (" << bla.num_periods
        << (bla.num_periods == 1 ? " period" : " periods") << " each)\n";
    out << "excited bins: " << bla.excited_bins.size();
    if (!bla.freq_hz.empty()) {
        out << ", " << bla.freq_hz.front() << " Hz to " << bla.freq_hz.back() << " Hz";
    }
    out << "\nreported curve: " << result.curve.method << "\n";
    out << "median FRF magnitude: " << result.summary.median_mag_db << " dB\n";
    if (bla.noise_available) {
        out << "median noise gap: " << result.summary.median_noise_gap_db << " dB\n";
    } else {
        out << "median noise gap: unavailable (needs P >= 2)\n";
    }
    if (bla.total_available) {
        out << "median total gap: " << result.summary.median_total_gap_db << " dB\n";
        out << "median NL output fraction: " << result.summary.median_nl_fraction << "\n";
    } else {
        out << "median total gap: unavailable (needs M >= 2)\n";
        out << "median NL output fraction: unavailable (needs M >= 2)\n";
    }
    out << "drift-flagged records: " << result.summary.drift_flagged << " of "
        << result.drift.records.size() << "\n";
    return out.str();
}

namespace {

/// Streams one figure table as CSV or as JSON {"columns": [...], "rows":
/// [[...], ...]}. Numbers are written with round-trip precision; non-finite
/// values become nan/inf text in CSV and null in JSON.
class FigureWriter {
public:
    FigureWriter(fs::path path, std::vector<std::string> columns, bool json)
        : path_(std::move(path)), json_(json) {
        out_.open(path_, std::ios::binary);
        if (!out_) {
            throw IoError("cannot open figure file for writing: " + path_.string());
        }
        if (json_) {
            body_ += "{\"columns\":[";
            for (std::size_t i = 0; i < columns.size(); ++i) {
                if (i > 0) {
                    body_ += ',';
                }
                body_ += '"';
                body_ += columns[i];
                body_ += '"';
            }
            body_ += "],\"rows\":[";
        } else {
            for (std::size_t i = 0; i < columns.size(); ++i) {
                if (i > 0) {
                    body_ += ',';
                }
                body_ += columns[i];
            }
            body_ += '\n';
        }
    }

    void number(double v) {
        cell_prefix();
        if (json_ && !std::isfinite(v)) {
            body_ += "null";
        } else {
            char buf[40];
            auto [ptr, ec] =
                std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
            body_.append(buf, ptr);
        }
    }

    void integer(long long v) {
        cell_prefix();
        body_ += std::to_string(v);
    }

    void text(const std::string& v) {
        cell_prefix();
        if (json_) {
            body_ += '"';
            body_ += v;
            body_ += '"';
        } else {
            body_ += v;
        }
    }

    void end_row() {
        if (json_) {
            body_ += ']';
            first_row_ = false;
        } else {
            body_ += '\n';
        }
        in_row_ = false;
        if (body_.size() > 1 << 20) {
            out_ << body_;
            body_.clear();
        }
    }

    std::string finish() {
        if (json_) {
            body_ += "]}\n";
        }
        out_ << body_;
        out_.close();
        if (!out_) {
            throw IoError("failed writing figure file: " + path_.string());
        }
        return path_.string();
    }

private:
    void cell_prefix() {
        if (!in_row_) {
            if (json_) {
                if (!first_row_) {
                    body_ += ',';
                }
                body_ += '[';
            }
            in_row_ = true;
        } else {
            body_ += ',';
        }
    }

    fs::path path_;
    bool json_;
    bool first_row_ = true;
    bool in_row_ = false;
    std::string body_;
    std::ofstream out_;
};

}  // namespace

std::vector<std::string> write_report_bundle(const std::string& report_path,
                                             const std::string& out_dir,
                                             const std::string& format) {
    if (format != "csv" && format != "json") {
        throw ArgumentError("report format must be \"csv\" or \"json\", got \"" +
                            format + "\"");
    }
    const bool json = format == "json";
    const std::string ext = json ? ".json" : ".csv";

    std::ifstream in(report_path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open report file: " + report_path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    const AnalysisResult result = analysis_from_json(buf.str());

    const fs::path base = fs::path(report_path).parent_path();
    const fs::path dir(out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create output directory: " + out_dir);
    }

    std::vector<MeasurementRecord> records;
    records.reserve(result.records.size());
    for (const AnalyzedRecord& ref : result.records) {
        if (ref.path.empty()) {
            throw DataError("report does not reference record files");
        }
        fs::path p(ref.path);
        if (p.is_relative()) {
            p = base / p;
        }
        records.push_back(read_record(p.string()));
    }

    const MultisineSpec& spec = result.design.spec;
    const double ref_rate = spec.reference_rate_hz;
    const double acq_rate = spec.acquisition_rate_hz();
    std::vector<std::string> written;

    {
        FigureWriter w(dir / ("fig_reference_signal" + ext),
                       {"realization", "sample", "time_s", "value"}, json);
        for (const AnalyzedRecord& ref : result.records) {
            const ExcitationSignal signal = render_signal(result.design, ref.realization_index);
            for (std::size_t i = 0; i < signal.reference_samples.size(); ++i) {
                w.integer(ref.realization_index);
                w.integer(static_cast<long long>(i));
                w.number(static_cast<double>(i) / ref_rate);
                w.number(signal.reference_samples[i]);
                w.end_row();
            }
        }
        written.push_back(w.finish());
    }

    std::vector<SegmentResult> segmented;
    segmented.reserve(records.size());
    for (const MeasurementRecord& record : records) {
        segmented.push_back(segment_periods(record));
    }

    {
        FigureWriter w(dir / ("fig_time_periods" + ext),
                       {"realization", "period", "sample", "time_s", "load", "indentation"},
                       json);
        for (std::size_t m = 0; m < segmented.size(); ++m) {
            const PeriodBlock& block = segmented[m].block;
            for (int p = 0; p < block.num_periods(); ++p) {
                for (int i = 0; i < block.period_length(); ++i) {
                    w.integer(result.records[m].realization_index);
                    w.integer(p);
                    w.integer(i);
                    w.number(static_cast<double>(i) / acq_rate);
                    w.number(block.periods_u[p][i]);
                    w.number(block.periods_y[p][i]);
                    w.end_row();
                }
            }
        }
        written.push_back(w.finish());
    }

    {
        FigureWriter w(
            dir / ("fig_spectra_periods" + ext),
            {"realization", "period", "channel", "bin", "freq_hz", "re", "im"}, json);
        for (std::size_t m = 0; m < segmented.size(); ++m) {
            const int realization = result.records[m].realization_index;
            const ExcitationSignal signal = render_signal(result.design, realization);
            const Spectrum reference = dft_period(signal.period(), ref_rate);
            for (int k = 0; k < reference.num_bins(); ++k) {
                w.integer(realization);
                w.integer(-1);
                w.text("reference");
                w.integer(k);
                w.number(reference.bin_hz(k));
                w.number(reference.coefficients[k].real());
                w.number(reference.coefficients[k].imag());
                w.end_row();
            }
            const MeanRemovalResult cleaned = remove_mean(segmented[m].block);
            const BlockSpectra spectra = spectra_of_block(cleaned.block, acq_rate);
            auto emit = [&](const std::vector<Spectrum>& channel, const char* name) {
                for (std::size_t p = 0; p < channel.size(); ++p) {
                    for (int k = 0; k < channel[p].num_bins(); ++k) {
                        w.integer(realization);
                        w.integer(static_cast<long long>(p));
                        w.text(name);
                        w.integer(k);
                        w.number(channel[p].bin_hz(k));
                        w.number(channel[p].coefficients[k].real());
                        w.number(channel[p].coefficients[k].imag());
                        w.end_row();
                    }
                }
            };
            emit(spectra.u, "load");
            emit(spectra.y, "indentation");
        }
        written.push_back(w.finish());
    }

    {
        FigureWriter w(dir / ("fig_trajectories" + ext),
                       {"realization", "period", "sample", "load", "indentation"}, json);
        for (std::size_t m = 0; m < segmented.size(); ++m) {
            const PeriodBlock& block = segmented[m].block;
            for (int p = 0; p < block.num_periods(); ++p) {
                for (int i = 0; i < block.period_length(); ++i) {
                    w.integer(result.records[m].realization_index);
                    w.integer(p);
                    w.integer(i);
                    w.number(block.periods_u[p][i]);
                    w.number(block.periods_y[p][i]);
                    w.end_row();
                }
            }
        }
        written.push_back(w.finish());
    }

    {
        const BlaResult& bla = result.bla;
        const bool nl_available = bla.noise_available && bla.total_available;
        FigureWriter w(dir / ("fig_bla_curves" + ext),
                       {"freq_hz", "mag_db", "noise_var_db", "total_var_db", "nl_var_db",
                        "dof_noise", "dof_total"},
                       json);
        for (std::size_t k = 0; k < bla.bla.size(); ++k) {
            w.number(bla.freq_hz[k]);
            w.number(20.0 * std::log10(std::abs(bla.bla[k])));
            w.number(bla.noise_available ? variance_to_db(bla.noise_variance[k]) : kNan);
            w.number(bla.total_available ? variance_to_db(bla.total_variance[k]) : kNan);
            w.number(nl_available ? variance_to_db(bla.nl_variance[k]) : kNan);
            w.integer(bla.dof_noise);
            w.integer(bla.dof_total);
            w.end_row();
        }
        written.push_back(w.finish());
    }

    return written;
}

}  // namespace msid
