#include "lspie/model_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace lspie {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
    return in;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

bool try_parse_double(const std::string& token, double& out) {
    const char* first = token.data();
    const char* last = token.data() + token.size();
    while (first < last && (*first == ' ' || *first == '\t')) ++first;
    while (last > first && (last[-1] == ' ' || last[-1] == '\t' || last[-1] == '\r')) --last;
    const auto res = std::from_chars(first, last, out);
    return res.ec == std::errc() && res.ptr == last && first != last;
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& token) {
    double v = 0.0;
    if (!try_parse_double(token, v))
        throw std::invalid_argument("not a number: '" + token + "'");
    return v;
}

void write_matrix_csv(const Matrix& mat, const std::filesystem::path& path) {
    auto out = open_out(path);
    for (Eigen::Index i = 0; i < mat.rows(); ++i) {
        for (Eigen::Index j = 0; j < mat.cols(); ++j) {
            if (j) out << ',';
            out << format_double(mat(i, j));
        }
        out << '\n';
    }
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        std::vector<double> row;
        for (const auto& field : split_csv_line(line)) {
            double v = 0.0;
            if (!try_parse_double(field, v))
                throw std::invalid_argument("bad number in " + path.string() + " line " +
                                            std::to_string(rows.size() + 1) + ": '" + field + "'");
            row.push_back(v);
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw std::invalid_argument("ragged CSV in " + path.string());
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::invalid_argument("empty CSV: " + path.string());

    Matrix mat(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows.front().size(); ++j)
            mat(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return mat;
}

void write_series_csv(const TimeSeries& series, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "time,value\n";
    for (Eigen::Index i = 0; i < series.values.size(); ++i) {
        const double t = series.t0 + static_cast<double>(i) / series.sample_rate;
        out << format_double(t) << ',' << format_double(series.values[i]) << '\n';
    }
}

std::vector<TimeSeries> read_series_csv(const std::filesystem::path& path,
                                        const CsvReadOptions& opts) {
    auto in = open_in(path);
    std::vector<std::vector<double>> rows;
    std::string line;
    bool first_line = true;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        const auto fields = split_csv_line(line);
        std::vector<double> row;
        bool numeric = true;
        for (const auto& field : fields) {
            double v = 0.0;
            if (!try_parse_double(field, v)) {
                numeric = false;
                break;
            }
            row.push_back(v);
        }
        if (!numeric) {
            if (first_line) {
                first_line = false;
                continue;  // header
            }
            throw std::invalid_argument("bad number in " + path.string());
        }
        first_line = false;
        if (!rows.empty() && row.size() != rows.front().size())
            throw std::invalid_argument("ragged CSV in " + path.string());
        rows.push_back(std::move(row));
    }
    if (rows.size() < 2) throw std::invalid_argument("need at least 2 samples in " + path.string());

    const std::size_t cols = rows.front().size();
    const std::size_t first_channel = opts.time_column ? 1 : 0;
    if (cols <= first_channel)
        throw std::invalid_argument("no channel columns in " + path.string());

    double t0 = 0.0, rate = 1.0;
    if (opts.time_column) {
        std::vector<double> dt;
        for (std::size_t i = 1; i < rows.size(); ++i) dt.push_back(rows[i][0] - rows[i - 1][0]);
        std::sort(dt.begin(), dt.end());
        const double med = dt[dt.size() / 2];
        if (!(med > 0.0) || !std::isfinite(med))
            throw std::invalid_argument("time column is not increasing in " + path.string());
        t0 = rows.front()[0];
        rate = 1.0 / med;
    }

    std::vector<TimeSeries> channels;
    for (std::size_t c = first_channel; c < cols; ++c) {
        TimeSeries ts;
        ts.t0 = t0;
        ts.sample_rate = rate;
        ts.values.resize(static_cast<Eigen::Index>(rows.size()));
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (!std::isfinite(rows[i][c]))
                throw std::invalid_argument("non-finite value in " + path.string());
            ts.values[static_cast<Eigen::Index>(i)] = rows[i][c];
        }
        channels.push_back(std::move(ts));
    }
    return channels;
}

void write_metrics_csv(const MetricVector& metric, const std::vector<int>& indices,
                       const std::filesystem::path& path) {
    if (static_cast<Eigen::Index>(indices.size()) != metric.values.size())
        throw std::invalid_argument("write_metrics_csv: index/value length mismatch");
    auto out = open_out(path);
    out << "name,index,theta,score\n";
    for (Eigen::Index i = 0; i < metric.values.size(); ++i)
        out << metric.metric_name << ',' << indices[static_cast<std::size_t>(i)] << ','
            << format_double(metric.values[i]) << ',' << format_double(metric.scores[i]) << '\n';
}

void write_clusters_csv(const CondensedModel& condensed, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "original_index,cluster_id,sign\n";
    for (std::size_t c = 0; c < condensed.clusters.size(); ++c)
        for (std::size_t j = 0; j < condensed.clusters[c].size(); ++j)
            out << condensed.clusters[c][j] << ',' << c << ',' << condensed.member_signs[c][j]
                << '\n';
}

void save_model(const LatentModel& model, const std::filesystem::path& path) {
    nlohmann::json j;
    j["kind"] = to_string(model.kind);
    j["k"] = model.k;
    j["seed"] = model.seed;
    j["loadings"] = nlohmann::json::array();
    for (Eigen::Index i = 0; i < model.loadings.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < model.loadings.cols(); ++c) row.push_back(model.loadings(i, c));
        j["loadings"].push_back(std::move(row));
    }
    j["eigenvalues"] = std::vector<double>(model.eigenvalues.data(),
                                           model.eigenvalues.data() + model.eigenvalues.size());
    j["mean"] = std::vector<double>(model.mean.data(), model.mean.data() + model.mean.size());

    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

LatentModel load_model(const std::filesystem::path& path) {
    auto in = open_in(path);
    nlohmann::json j;
    in >> j;

    LatentModel model;
    model.kind = model_kind_from_string(j.at("kind").get<std::string>());
    model.k = j.at("k").get<int>();
    model.seed = j.at("seed").get<std::uint64_t>();

    const auto& rows = j.at("loadings");
    if (rows.empty()) throw std::invalid_argument("load_model: empty loadings in " + path.string());
    model.loadings.resize(static_cast<Eigen::Index>(rows.size()),
                          static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t c = 0; c < rows.front().size(); ++c)
            model.loadings(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
                rows[i][c].get<double>();

    const auto evals = j.at("eigenvalues").get<std::vector<double>>();
    model.eigenvalues = Eigen::Map<const Vector>(evals.data(), static_cast<Eigen::Index>(evals.size()));
    const auto mean = j.at("mean").get<std::vector<double>>();
    model.mean = Eigen::Map<const Vector>(mean.data(), static_cast<Eigen::Index>(mean.size()));

    model.direction_norms.resize(model.loadings.rows());
    for (Eigen::Index i = 0; i < model.loadings.rows(); ++i)
        model.direction_norms[i] = model.loadings.row(i).norm();
    model.id = to_string(model.kind) + "-k" + std::to_string(model.k) +
               (model.kind == ModelKind::ica ? "-seed" + std::to_string(model.seed) : "");
    return model;
}

}  // namespace lspie
