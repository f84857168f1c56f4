#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lspie/enhance.hpp"
#include "lspie/model_io.hpp"
#include "lspie/svg.hpp"

namespace lspie {

enum class EnhanceStep { rank, scale, cluster, condense };

EnhanceStep enhance_step_from_string(const std::string& name);
std::string to_string(EnhanceStep step);
std::string to_string(RankOrder order);
std::string to_string(Similarity similarity);
std::string to_string(ClusterBackend backend);
std::string to_string(IcaContrast contrast);
std::string to_string(FilterMode mode);
RankOrder rank_order_from_string(const std::string& name);
Similarity similarity_from_string(const std::string& name);
ClusterBackend cluster_backend_from_string(const std::string& name);
IcaContrast ica_contrast_from_string(const std::string& name);
FilterMode filter_mode_from_string(const std::string& name);

/// Full description of one experiment run. Input is either a built-in
/// signal or a CSV path, never both.
struct RunConfig {
    std::optional<SignalKind> signal;
    std::string csv_path;
    bool time_column = false;
    int n_samples = 4000;
    double sample_rate = 106.10329539459689;  ///< 4000 samples over ~37.7 s
    int window = 300;
    ModelKind model = ModelKind::pca;
    int k = 8;
    std::string metric = "variance_explained";
    std::vector<EnhanceStep> enhancements;
    RankOrder order = RankOrder::descending;
    ScaleOptions scale_opts;
    Similarity similarity = Similarity::abs_cosine;
    ClusterBackend backend = ClusterBackend::agglomerative;
    int cluster_k = 0;  ///< required by the cluster step
    CondenseOptions condense_opts;
    bool filter_enabled = false;
    FilterSpec filter;
    IcaOptions ica;
    std::uint64_t seed = 0;
    std::filesystem::path output_dir;
};

/// Result record of a run: echoed config, the per-direction metric table in
/// its final state (k rows, or K after condensing), provenance and the file
/// manifest (paths relative to output_dir).
struct RunReport {
    RunConfig config;
    MetricVector metric_table;
    std::vector<int> metric_indices;  ///< original direction ids / cluster ids
    std::vector<int> permutation;
    std::vector<std::vector<int>> cluster_assignments;  ///< original indices
    int condensed_k = 0;
    std::vector<std::string> files;
    double elapsed_seconds = 0.0;
    bool ica_converged = true;
    LatentModel model;          ///< fitted model, enhancement order applied
    CondensedModel condensed;   ///< present when cluster/condense ran
};

/// Check config consistency: one input source, registered metric, at most
/// one of cluster/condense, filter only with a merge step.
void validate_config(const RunConfig& config);

/// Execute generate/load -> hankelise -> standardise -> fit -> enhance ->
/// (filter) -> write. Deterministic given the seed. Failures are rethrown
/// as PipelineError tagged with the stage name.
RunReport run_experiment(const RunConfig& config);

/// Run the four built-in reference experiments (two signals x two models)
/// with ranking, scaling and condensing, writing each under its own
/// subdirectory of output_root. Rerunning with the same seed reproduces
/// identical CSV outputs byte for byte.
std::vector<RunReport> reproduce_paper(const std::filesystem::path& output_root,
                                       std::uint64_t seed = 0);

/// ./lspie_out/<timestamp>
std::filesystem::path default_output_dir();

}  // namespace lspie
