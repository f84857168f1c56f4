#pragma once

#include <string>
#include <vector>

#include "lspie/metrics.hpp"
#include "lspie/postfilter.hpp"

namespace lspie {

enum class RankOrder { descending, ascending };
enum class Similarity { abs_cosine, score_correlation };
enum class ClusterBackend { agglomerative, kmeans };
enum class CondenseMethod { lc, lcon };

/// Model with directions reordered by a metric. permutation[p] is the
/// original index of the direction now at position p; the metric vector is
/// permuted identically and its values are sorted per `order`.
struct RankedModel {
    LatentModel base;
    MetricVector metric;
    std::vector<int> permutation;
    RankOrder order = RankOrder::descending;
};

/// Model with loading lengths set to the scaling scores: prominent
/// directions stay visible, uninformative ones shrink.
struct ScaledModel {
    LatentModel base;
    Matrix scaled_loadings;  ///< k x n, row i parallel to base loading i
    Vector scale_factors;    ///< s_i applied per row
};

/// Clustered/condensed directions. clusters partition {0..M-1}; each merged
/// direction is the sign-aligned sum of its members,
/// merged_loadings[c] = sum_j member_signs[c][j] * loadings[clusters[c][j]].
struct CondensedModel {
    std::vector<std::vector<int>> clusters;
    Matrix merged_loadings;  ///< K x n
    std::vector<std::vector<int>> member_signs;  ///< +1 / -1 per member
    int K = 0;
    bool filter_applied = false;
    CondenseMethod method = CondenseMethod::lcon;
};

/// Reorder directions by a registered metric (stable; ties keep original
/// index order). Default most-informative-first.
RankedModel rank(const LatentModel& model, const std::string& metric, const Matrix& X,
                 RankOrder order = RankOrder::descending);

struct ScaleOptions {
    /// Compatibility switch: divide by s_j instead of multiplying.
    bool division = false;
};

/// Rescale each loading by its scaling score s_j (multiplicative form).
ScaledModel scale(const LatentModel& model, const std::string& metric, const Matrix& X,
                  const ScaleOptions& opts = {});

/// Pairwise direction distances: 1 - |cos| of loadings, or 1 - |corr| of
/// score columns.
Matrix pairwise_distance(const LatentModel& model, Similarity similarity);

/// Merge directions into exactly K clusters. The default backend is
/// deterministic complete-linkage agglomerative clustering; kmeans is a
/// deterministic Lloyd iteration with farthest-first seeding.
CondensedModel cluster(const LatentModel& model, int K,
                       Similarity similarity = Similarity::abs_cosine,
                       ClusterBackend backend = ClusterBackend::agglomerative);

struct CondenseOptions {
    double eps = 0.2;     ///< neighbourhood radius on the distance (<= links)
    int min_members = 1;  ///< DBSCAN core threshold, neighbourhood includes self
};

/// Density-based condensing: K is discovered by DBSCAN on the pairwise
/// distances; noise points become singleton clusters so the partition
/// invariant always holds.
CondensedModel condense(const LatentModel& model,
                        Similarity similarity = Similarity::abs_cosine,
                        const CondenseOptions& opts = {});

/// Replace each merged direction with its filtered version.
CondensedModel apply_condense_filter(const CondensedModel& condensed, const FilterSpec& spec);

}  // namespace lspie
