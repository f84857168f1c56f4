#include "lspie/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <utility>

#include <json.hpp>

#include "lspie/errors.hpp"

namespace lspie {

namespace {

namespace fs = std::filesystem;

/// Run one stage, tagging any failure with the stage name. PipelineError
/// passes through untouched so nested stages keep the innermost tag.
template <typename F>
auto stage(const std::string& name, F&& fn) {
    try {
        return fn();
    } catch (const PipelineError&) {
        throw;
    } catch (const std::exception& e) {
        throw PipelineError(name, e.what());
    }
}

std::string join_steps(const std::vector<EnhanceStep>& steps) {
    std::string out;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        if (i > 0) out += ',';
        out += to_string(steps[i]);
    }
    return out;
}

bool has_step(const RunConfig& config, EnhanceStep step) {
    for (EnhanceStep s : config.enhancements)
        if (s == step) return true;
    return false;
}

/// Flat key=value view of a config, using the CLI option names so a
/// config.txt can be replayed via --config.
std::vector<std::pair<std::string, std::string>> config_to_kv(const RunConfig& config) {
    std::vector<std::pair<std::string, std::string>> kv;
    if (config.signal) {
        kv.emplace_back("signal", to_string(*config.signal));
        kv.emplace_back("n-samples", std::to_string(config.n_samples));
        kv.emplace_back("rate", format_double(config.sample_rate));
    } else {
        kv.emplace_back("csv", config.csv_path);
        kv.emplace_back("time-column", config.time_column ? "true" : "false");
    }
    kv.emplace_back("window", std::to_string(config.window));
    kv.emplace_back("model", to_string(config.model));
    kv.emplace_back("k", std::to_string(config.k));
    kv.emplace_back("metric", config.metric);
    kv.emplace_back("enhance", join_steps(config.enhancements));
    kv.emplace_back("order", to_string(config.order));
    kv.emplace_back("scale-division", config.scale_opts.division ? "true" : "false");
    kv.emplace_back("similarity", to_string(config.similarity));
    if (has_step(config, EnhanceStep::cluster)) {
        kv.emplace_back("backend", to_string(config.backend));
        kv.emplace_back("cluster-k", std::to_string(config.cluster_k));
    }
    if (has_step(config, EnhanceStep::condense)) {
        kv.emplace_back("eps", format_double(config.condense_opts.eps));
        kv.emplace_back("min-members", std::to_string(config.condense_opts.min_members));
    }
    kv.emplace_back("filter", config.filter_enabled ? "on" : "off");
    if (config.filter_enabled) {
        kv.emplace_back("filter-order", std::to_string(config.filter.order));
        kv.emplace_back("filter-cutoff", format_double(config.filter.cutoff));
        kv.emplace_back("filter-mode", to_string(config.filter.mode));
    }
    if (config.model == ModelKind::ica) {
        kv.emplace_back("contrast", to_string(config.ica.contrast));
        kv.emplace_back("tol", format_double(config.ica.tol));
        kv.emplace_back("max-iter", std::to_string(config.ica.max_iter));
    }
    kv.emplace_back("seed", std::to_string(config.seed));
    kv.emplace_back("output-dir", config.output_dir.string());
    return kv;
}

void write_config_txt(const RunConfig& config, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    for (const auto& [key, value] : config_to_kv(config)) out << key << '=' << value << '\n';
}

std::vector<double> row_to_vector(const Matrix& mat, int row) {
    std::vector<double> out(static_cast<std::size_t>(mat.cols()));
    for (int j = 0; j < mat.cols(); ++j) out[static_cast<std::size_t>(j)] = mat(row, j);
    return out;
}

LatentModel make_condensed_pseudo_model(const LatentModel& model, const CondensedModel& condensed,
                                        const Matrix& X) {
    LatentModel pseudo;
    pseudo.kind = model.kind;
    pseudo.k = condensed.K;
    pseudo.mean = model.mean;
    pseudo.seed = model.seed;
    pseudo.converged = model.converged;
    pseudo.id = model.id + "-condensed";
    pseudo.loadings = condensed.merged_loadings;
    for (int c = 0; c < pseudo.loadings.rows(); ++c) {
        double norm = pseudo.loadings.row(c).norm();
        if (norm > 0.0) pseudo.loadings.row(c) /= norm;
    }
    pseudo.scores = X * pseudo.loadings.transpose();
    pseudo.direction_norms = Vector::Ones(condensed.K);
    return pseudo;
}

}  // namespace

EnhanceStep enhance_step_from_string(const std::string& name) {
    if (name == "rank") return EnhanceStep::rank;
    if (name == "scale") return EnhanceStep::scale;
    if (name == "cluster") return EnhanceStep::cluster;
    if (name == "condense") return EnhanceStep::condense;
    throw std::invalid_argument("unknown enhancement step: " + name);
}

std::string to_string(EnhanceStep step) {
    switch (step) {
        case EnhanceStep::rank: return "rank";
        case EnhanceStep::scale: return "scale";
        case EnhanceStep::cluster: return "cluster";
        case EnhanceStep::condense: return "condense";
    }
    throw std::logic_error("unreachable");
}

std::string to_string(RankOrder order) {
    return order == RankOrder::descending ? "descending" : "ascending";
}

std::string to_string(Similarity similarity) {
    return similarity == Similarity::abs_cosine ? "abs_cosine" : "score_correlation";
}

std::string to_string(ClusterBackend backend) {
    return backend == ClusterBackend::agglomerative ? "agglomerative" : "kmeans";
}

std::string to_string(IcaContrast contrast) {
    return contrast == IcaContrast::logcosh ? "logcosh" : "cube";
}

std::string to_string(FilterMode mode) {
    return mode == FilterMode::zero_phase ? "zero_phase" : "causal";
}

RankOrder rank_order_from_string(const std::string& name) {
    if (name == "descending") return RankOrder::descending;
    if (name == "ascending") return RankOrder::ascending;
    throw std::invalid_argument("unknown rank order: " + name);
}

Similarity similarity_from_string(const std::string& name) {
    if (name == "abs_cosine") return Similarity::abs_cosine;
    if (name == "score_correlation") return Similarity::score_correlation;
    throw std::invalid_argument("unknown similarity: " + name);
}

ClusterBackend cluster_backend_from_string(const std::string& name) {
    if (name == "agglomerative") return ClusterBackend::agglomerative;
    if (name == "kmeans") return ClusterBackend::kmeans;
    throw std::invalid_argument("unknown cluster backend: " + name);
}

IcaContrast ica_contrast_from_string(const std::string& name) {
    if (name == "logcosh") return IcaContrast::logcosh;
    if (name == "cube") return IcaContrast::cube;
    throw std::invalid_argument("unknown contrast: " + name);
}

FilterMode filter_mode_from_string(const std::string& name) {
    if (name == "zero_phase") return FilterMode::zero_phase;
    if (name == "causal") return FilterMode::causal;
    throw std::invalid_argument("unknown filter mode: " + name);
}

void validate_config(const RunConfig& config) {
    const bool has_signal = config.signal.has_value();
    const bool has_csv = !config.csv_path.empty();
    if (has_signal == has_csv)
        throw std::invalid_argument("exactly one input source required: signal or csv");
    if (has_signal) {
        if (config.n_samples < 3) throw std::invalid_argument("n-samples must be at least 3");
        if (!(config.sample_rate > 0.0)) throw std::invalid_argument("rate must be positive");
    }
    if (config.window < 2) throw std::invalid_argument("window must be at least 2");
    if (config.k < 1) throw std::invalid_argument("k must be positive");
    if (!MetricRegistry::instance().contains(config.metric))
        throw MetricLookupError("unknown metric: " + config.metric);

    int merge_steps = 0;
    for (EnhanceStep step : config.enhancements)
        if (step == EnhanceStep::cluster || step == EnhanceStep::condense) ++merge_steps;
    if (merge_steps > 1)
        throw std::invalid_argument("at most one of cluster/condense per run");
    if (has_step(config, EnhanceStep::cluster) && config.cluster_k < 1)
        throw std::invalid_argument("cluster step requires cluster-k >= 1");
    if (has_step(config, EnhanceStep::condense)) {
        if (!(config.condense_opts.eps >= 0.0))
            throw std::invalid_argument("eps must be non-negative");
        if (config.condense_opts.min_members < 1)
            throw std::invalid_argument("min-members must be at least 1");
    }
    if (config.filter_enabled) {
        if (merge_steps == 0)
            throw std::invalid_argument("filter requires a cluster or condense step");
        if (config.filter.order < 1 || config.filter.order > 8)
            throw std::invalid_argument("filter-order must be in [1, 8]");
        if (!(config.filter.cutoff > 0.0) || !(config.filter.cutoff < 0.5))
            throw std::invalid_argument("filter-cutoff must be in (0, 0.5)");
    }
}

RunReport run_experiment(const RunConfig& config_in) {
    RunConfig config = config_in;
    if (config.output_dir.empty()) config.output_dir = default_output_dir();
    config.ica.seed = config.seed;
    validate_config(config);

    const auto t_start = std::chrono::steady_clock::now();
    RunReport report;

    std::vector<TimeSeries> channels = stage("input", [&] {
        if (config.signal)
            return std::vector<TimeSeries>{
                generate_signal(*config.signal, config.n_samples, config.sample_rate)};
        CsvReadOptions opts;
        opts.time_column = config.time_column;
        return read_series_csv(config.csv_path, opts);
    });

    TrajectoryMatrix trajectory = stage("hankelise", [&] {
        std::vector<TrajectoryMatrix> per_channel;
        per_channel.reserve(channels.size());
        for (const TimeSeries& channel : channels)
            per_channel.push_back(hankelise(channel, config.window));
        return per_channel.size() == 1 ? per_channel.front() : stack_channels(per_channel);
    });

    TrajectoryMatrix X = stage("standardise",
                               [&] { return standardise(trajectory, StandardiseMode::center); });

    LatentModel model = stage("fit", [&] {
        return config.model == ModelKind::pca ? fit_pca(X, config.k)
                                              : fit_ica(X, config.k, config.ica);
    });
    const LatentModel fitted = model;  // pre-enhancement state, for the raw panel

    MetricVector table =
        stage("metrics", [&] { return evaluate_metric(config.metric, model, X.data); });
    std::vector<int> permutation(static_cast<std::size_t>(model.k));
    std::iota(permutation.begin(), permutation.end(), 0);
    std::vector<int> indices = permutation;

    bool has_scaled = false;
    ScaledModel scaled;
    bool has_condensed = false;
    CondensedModel condensed;

    for (EnhanceStep step : config.enhancements) {
        switch (step) {
            case EnhanceStep::rank: {
                RankedModel ranked = stage("enhance:rank", [&] {
                    return rank(model, config.metric, X.data, config.order);
                });
                std::vector<int> composed(permutation.size());
                for (std::size_t p = 0; p < composed.size(); ++p)
                    composed[p] = permutation[static_cast<std::size_t>(ranked.permutation[p])];
                if (has_scaled) {
                    // keep an earlier scale step aligned with the new row order
                    Matrix rows = scaled.scaled_loadings;
                    Vector factors = scaled.scale_factors;
                    for (std::size_t p = 0; p < composed.size(); ++p) {
                        scaled.scaled_loadings.row(static_cast<int>(p)) =
                            rows.row(ranked.permutation[p]);
                        scaled.scale_factors(static_cast<int>(p)) =
                            factors(ranked.permutation[p]);
                    }
                    scaled.base = ranked.base;
                }
                permutation = std::move(composed);
                model = ranked.base;
                table = ranked.metric;
                indices = permutation;
                break;
            }
            case EnhanceStep::scale: {
                scaled = stage("enhance:scale", [&] {
                    return scale(model, config.metric, X.data, config.scale_opts);
                });
                has_scaled = true;
                break;
            }
            case EnhanceStep::cluster: {
                condensed = stage("enhance:cluster", [&] {
                    return cluster(model, config.cluster_k, config.similarity, config.backend);
                });
                has_condensed = true;
                break;
            }
            case EnhanceStep::condense: {
                condensed = stage("enhance:condense", [&] {
                    return condense(model, config.similarity, config.condense_opts);
                });
                has_condensed = true;
                break;
            }
        }
    }

    if (has_condensed && config.filter_enabled)
        condensed =
            stage("filter", [&] { return apply_condense_filter(condensed, config.filter); });

    if (has_condensed) {
        table = stage("metrics", [&] {
            return evaluate_metric(config.metric,
                                   make_condensed_pseudo_model(model, condensed, X.data), X.data);
        });
        indices.resize(static_cast<std::size_t>(condensed.K));
        std::iota(indices.begin(), indices.end(), 0);
        // report cluster members as indices into the fitted model
        report.cluster_assignments.clear();
        for (const auto& members : condensed.clusters) {
            std::vector<int> original;
            original.reserve(members.size());
            for (int j : members) original.push_back(permutation[static_cast<std::size_t>(j)]);
            report.cluster_assignments.push_back(std::move(original));
        }
        report.condensed_k = condensed.K;
    }

    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();

    stage("write", [&] {
        fs::create_directories(config.output_dir);
        auto emit = [&](const std::string& name) { report.files.push_back(name); };

        write_config_txt(config, config.output_dir / "config.txt");
        emit("config.txt");
        write_matrix_csv(model.loadings, config.output_dir / "loadings.csv");
        emit("loadings.csv");
        write_matrix_csv(model.scores, config.output_dir / "scores.csv");
        emit("scores.csv");
        write_metrics_csv(table, indices, config.output_dir / "metrics.csv");
        emit("metrics.csv");
        if (has_scaled) {
            write_matrix_csv(scaled.scaled_loadings, config.output_dir / "scaled_loadings.csv");
            emit("scaled_loadings.csv");
        }
        if (has_condensed) {
            CondensedModel remapped = condensed;
            for (auto& members : remapped.clusters)
                for (int& j : members) j = permutation[static_cast<std::size_t>(j)];
            write_clusters_csv(remapped, config.output_dir / "clusters.csv");
            emit("clusters.csv");
            write_matrix_csv(condensed.merged_loadings,
                             config.output_dir / "condensed_loadings.csv");
            emit("condensed_loadings.csv");
        }
        save_model(model, config.output_dir / "model.json");
        emit("model.json");

        std::vector<SvgSeries> raw_series;
        for (int i = 0; i < fitted.k; ++i)
            raw_series.push_back({"L" + std::to_string(i), row_to_vector(fitted.loadings, i)});
        write_svg_panel("latent directions (" + to_string(config.model) + ")", raw_series,
                        config.output_dir / "raw.svg");
        emit("raw.svg");

        if (has_step(config, EnhanceStep::rank) || has_scaled) {
            const Matrix& rows = has_scaled ? scaled.scaled_loadings : model.loadings;
            std::vector<SvgSeries> enhanced_series;
            for (int p = 0; p < rows.rows(); ++p)
                enhanced_series.push_back(
                    {"L" + std::to_string(permutation[static_cast<std::size_t>(p)]),
                     row_to_vector(rows, p)});
            const std::string title = has_scaled ? "ranked and scaled latent directions"
                                                 : "ranked latent directions";
            write_svg_panel(title, enhanced_series, config.output_dir / "enhanced.svg");
            emit("enhanced.svg");
        }

        if (has_condensed) {
            std::vector<SvgSeries> condensed_series;
            for (int c = 0; c < condensed.K; ++c)
                condensed_series.push_back(
                    {"C" + std::to_string(c) + " (" +
                         std::to_string(condensed.clusters[static_cast<std::size_t>(c)].size()) +
                         ")",
                     row_to_vector(condensed.merged_loadings, c)});
            write_svg_panel("condensed latent directions", condensed_series,
                            config.output_dir / "condensed.svg");
            emit("condensed.svg");
        }

        nlohmann::json j;
        for (const auto& [key, value] : config_to_kv(config)) j["config"][key] = value;
        j["metric"] = table.metric_name;
        j["metric_table"]["index"] = indices;
        j["metric_table"]["theta"] =
            std::vector<double>(table.values.data(), table.values.data() + table.values.size());
        j["metric_table"]["score"] =
            std::vector<double>(table.scores.data(), table.scores.data() + table.scores.size());
        j["permutation"] = permutation;
        j["clusters"] = report.cluster_assignments;
        j["condensed_k"] = report.condensed_k;
        j["ica_converged"] = model.converged;
        j["elapsed_seconds"] = elapsed;
        j["model_id"] = model.id;
        std::vector<std::string> manifest = report.files;
        manifest.push_back("report.json");
        j["files"] = manifest;
        std::ofstream out(config.output_dir / "report.json");
        if (!out) throw std::runtime_error("cannot open report.json for writing");
        out << j.dump(2) << '\n';
        emit("report.json");
        return 0;
    });

    report.config = config;
    report.metric_table = table;
    report.metric_indices = indices;
    report.permutation = permutation;
    report.elapsed_seconds = elapsed;
    report.ica_converged = model.converged;
    report.model = std::move(model);
    if (has_condensed) report.condensed = std::move(condensed);
    return report;
}

std::vector<RunReport> reproduce_paper(const std::filesystem::path& output_root,
                                       std::uint64_t seed) {
    struct Variant {
        const char* name;
        SignalKind signal;
        ModelKind model;
    };
    const Variant variants[] = {
        {"pure_sine_pca", SignalKind::pure_sine, ModelKind::pca},
        {"pure_sine_ica", SignalKind::pure_sine, ModelKind::ica},
        {"decreasing_freq_pca", SignalKind::decreasing_freq, ModelKind::pca},
        {"decreasing_freq_ica", SignalKind::decreasing_freq, ModelKind::ica},
    };

    std::vector<RunReport> reports;
    reports.reserve(4);
    for (const Variant& variant : variants) {
        RunConfig config;
        config.signal = variant.signal;
        config.model = variant.model;
        config.enhancements = {EnhanceStep::rank, EnhanceStep::scale, EnhanceStep::condense};
        config.seed = seed;
        config.output_dir = output_root / variant.name;
        reports.push_back(run_experiment(config));
    }
    return reports;
}

std::filesystem::path default_output_dir() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    localtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y%m%d-%H%M%S", &tm);
    return fs::path("lspie_out") / buf;
}

}  // namespace lspie
