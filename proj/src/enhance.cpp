#include "lspie/enhance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

namespace lspie {

namespace {

LatentModel permute_model(const LatentModel& model, const std::vector<int>& perm) {
    LatentModel out = model;
    for (std::size_t p = 0; p < perm.size(); ++p) {
        out.loadings.row(static_cast<Eigen::Index>(p)) = model.loadings.row(perm[p]);
        out.scores.col(static_cast<Eigen::Index>(p)) = model.scores.col(perm[p]);
        out.direction_norms[static_cast<Eigen::Index>(p)] = model.direction_norms[perm[p]];
        if (model.eigenvalues.size() == model.k)
            out.eigenvalues[static_cast<Eigen::Index>(p)] = model.eigenvalues[perm[p]];
    }
    return out;
}

/// Clusters ordered by smallest member, members ascending: a canonical,
/// deterministic presentation of the partition.
void canonicalise_clusters(std::vector<std::vector<int>>& clusters) {
    for (auto& c : clusters) std::sort(c.begin(), c.end());
    std::sort(clusters.begin(), clusters.end(),
              [](const std::vector<int>& a, const std::vector<int>& b) { return a.front() < b.front(); });
}

/// Sign-align members to the largest-norm member (lowest index on ties) and
/// sum. Summing antiparallel directions naively would cancel them.
void merge_clusters(const LatentModel& model, CondensedModel& out) {
    const auto n = model.loadings.cols();
    out.K = static_cast<int>(out.clusters.size());
    out.merged_loadings.resize(out.K, n);
    out.member_signs.assign(out.clusters.size(), {});
    for (std::size_t c = 0; c < out.clusters.size(); ++c) {
        const auto& members = out.clusters[c];
        int ref = members.front();
        for (int j : members)
            if (model.direction_norms[j] > model.direction_norms[ref]) ref = j;
        Vector merged = Vector::Zero(n);
        for (int j : members) {
            const double dot = model.loadings.row(j).dot(model.loadings.row(ref));
            const int sign = dot >= 0.0 ? 1 : -1;
            out.member_signs[c].push_back(sign);
            merged += sign * model.loadings.row(j).transpose();
        }
        out.merged_loadings.row(static_cast<Eigen::Index>(c)) = merged.transpose();
    }
}

double correlation(const Vector& a, const Vector& b) {
    const double ma = a.mean(), mb = b.mean();
    const Vector da = (a.array() - ma).matrix();
    const Vector db = (b.array() - mb).matrix();
    const double den = da.norm() * db.norm();
    if (!(den > 0.0)) return 0.0;
    return da.dot(db) / den;
}

std::vector<std::vector<int>> agglomerate(const Matrix& dist, int K) {
    const int M = static_cast<int>(dist.rows());
    std::vector<std::vector<int>> clusters(M);
    for (int i = 0; i < M; ++i) clusters[i] = {i};

    while (static_cast<int>(clusters.size()) > K) {
        // Complete linkage: merge the pair whose farthest members are closest.
        double best = std::numeric_limits<double>::infinity();
        std::size_t bi = 0, bj = 1;
        for (std::size_t i = 0; i + 1 < clusters.size(); ++i) {
            for (std::size_t j = i + 1; j < clusters.size(); ++j) {
                double link = 0.0;
                for (int a : clusters[i])
                    for (int b : clusters[j]) link = std::max(link, dist(a, b));
                if (link < best) {
                    best = link;
                    bi = i;
                    bj = j;
                }
            }
        }
        clusters[bi].insert(clusters[bi].end(), clusters[bj].begin(), clusters[bj].end());
        clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(bj));
    }
    return clusters;
}

std::vector<std::vector<int>> lloyd_kmeans(const Matrix& points, int K) {
    const int M = static_cast<int>(points.rows());

    // Farthest-first seeding from point 0: deterministic, spread-out centers.
    std::vector<int> seeds = {0};
    while (static_cast<int>(seeds.size()) < K) {
        int far = -1;
        double far_d = -1.0;
        for (int p = 0; p < M; ++p) {
            double d = std::numeric_limits<double>::infinity();
            for (int s : seeds) d = std::min(d, (points.row(p) - points.row(s)).squaredNorm());
            if (d > far_d) {
                far_d = d;
                far = p;
            }
        }
        seeds.push_back(far);
    }
    Matrix centers(K, points.cols());
    for (int c = 0; c < K; ++c) centers.row(c) = points.row(seeds[c]);

    std::vector<int> assign(M, 0);
    for (int it = 0; it < 100; ++it) {
        bool moved = false;
        for (int p = 0; p < M; ++p) {
            int best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (int c = 0; c < K; ++c) {
                const double d = (points.row(p) - centers.row(c)).squaredNorm();
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            if (assign[p] != best) {
                assign[p] = best;
                moved = true;
            }
        }
        // Refill empty clusters with the point farthest from its center.
        for (int c = 0; c < K; ++c) {
            if (std::count(assign.begin(), assign.end(), c)) continue;
            int far = -1;
            double far_d = -1.0;
            for (int p = 0; p < M; ++p) {
                if (std::count(assign.begin(), assign.end(), assign[p]) < 2) continue;
                const double d = (points.row(p) - centers.row(assign[p])).squaredNorm();
                if (d > far_d) {
                    far_d = d;
                    far = p;
                }
            }
            if (far >= 0) {
                assign[far] = c;
                moved = true;
            }
        }
        for (int c = 0; c < K; ++c) {
            Vector mean = Vector::Zero(points.cols());
            int count = 0;
            for (int p = 0; p < M; ++p)
                if (assign[p] == c) {
                    mean += points.row(p).transpose();
                    ++count;
                }
            if (count > 0) centers.row(c) = mean.transpose() / count;
        }
        if (!moved) break;
    }

    std::vector<std::vector<int>> clusters(K);
    for (int p = 0; p < M; ++p) clusters[assign[p]].push_back(p);
    clusters.erase(std::remove_if(clusters.begin(), clusters.end(),
                                  [](const std::vector<int>& c) { return c.empty(); }),
                   clusters.end());
    // The iteration cap can leave fewer than K clusters when points
    // coincide; split the largest until the requested count holds.
    while (static_cast<int>(clusters.size()) < K) {
        auto largest = std::max_element(clusters.begin(), clusters.end(),
                                        [](const std::vector<int>& a, const std::vector<int>& b) {
                                            return a.size() < b.size();
                                        });
        clusters.push_back({largest->back()});
        largest->pop_back();
    }
    return clusters;
}

}  // namespace

RankedModel rank(const LatentModel& model, const std::string& metric, const Matrix& X,
                 RankOrder order) {
    const MetricVector mv = evaluate_metric(metric, model, X);

    std::vector<int> perm(static_cast<std::size_t>(model.k));
    std::iota(perm.begin(), perm.end(), 0);
    std::stable_sort(perm.begin(), perm.end(), [&](int a, int b) {
        return order == RankOrder::descending ? mv.values[a] > mv.values[b]
                                              : mv.values[a] < mv.values[b];
    });

    RankedModel ranked;
    ranked.base = permute_model(model, perm);
    ranked.permutation = perm;
    ranked.order = order;
    ranked.metric.metric_name = mv.metric_name;
    ranked.metric.source_model_id = mv.source_model_id;
    ranked.metric.values.resize(model.k);
    ranked.metric.scores.resize(model.k);
    for (int p = 0; p < model.k; ++p) {
        ranked.metric.values[p] = mv.values[perm[static_cast<std::size_t>(p)]];
        ranked.metric.scores[p] = mv.scores[perm[static_cast<std::size_t>(p)]];
    }
    return ranked;
}

ScaledModel scale(const LatentModel& model, const std::string& metric, const Matrix& X,
                  const ScaleOptions& opts) {
    const MetricVector mv = evaluate_metric(metric, model, X);

    ScaledModel scaled;
    scaled.base = model;
    scaled.scale_factors = mv.scores;
    scaled.scaled_loadings.resizeLike(model.loadings);
    for (int i = 0; i < model.k; ++i) {
        const double s = mv.scores[i];
        if (opts.division && !(s > 0.0))
            throw std::invalid_argument("scale: division form needs positive scores");
        scaled.scaled_loadings.row(i) = model.loadings.row(i) * (opts.division ? 1.0 / s : s);
    }
    return scaled;
}

Matrix pairwise_distance(const LatentModel& model, Similarity similarity) {
    const int M = model.k;
    Matrix dist = Matrix::Zero(M, M);
    for (int i = 0; i < M; ++i) {
        for (int j = i + 1; j < M; ++j) {
            double sim;
            if (similarity == Similarity::abs_cosine) {
                const double den = model.loadings.row(i).norm() * model.loadings.row(j).norm();
                sim = den > 0.0 ? std::abs(model.loadings.row(i).dot(model.loadings.row(j)) / den) : 0.0;
            } else {
                sim = std::abs(correlation(model.scores.col(i), model.scores.col(j)));
            }
            dist(i, j) = dist(j, i) = 1.0 - std::min(sim, 1.0);
        }
    }
    return dist;
}

CondensedModel cluster(const LatentModel& model, int K, Similarity similarity,
                       ClusterBackend backend) {
    const int M = model.k;
    if (K < 1 || K > M)
        throw std::invalid_argument("cluster: K = " + std::to_string(K) + " outside [1, " +
                                    std::to_string(M) + "]");

    CondensedModel out;
    out.method = CondenseMethod::lc;
    if (backend == ClusterBackend::agglomerative) {
        out.clusters = agglomerate(pairwise_distance(model, similarity), K);
    } else {
        // Canonical signs make Euclidean k-means meaningful on directions.
        out.clusters = lloyd_kmeans(model.loadings, K);
    }
    canonicalise_clusters(out.clusters);
    merge_clusters(model, out);
    return out;
}

CondensedModel condense(const LatentModel& model, Similarity similarity,
                        const CondenseOptions& opts) {
    if (!(opts.eps > 0.0)) throw std::invalid_argument("condense: eps must be > 0");
    if (opts.min_members < 1) throw std::invalid_argument("condense: min_members must be >= 1");

    const int M = model.k;
    const Matrix dist = pairwise_distance(model, similarity);

    // DBSCAN over the precomputed distances; the neighbourhood of a point
    // includes itself.
    constexpr int kUnvisited = -2, kNoise = -1;
    std::vector<int> label(static_cast<std::size_t>(M), kUnvisited);
    const auto neighbours = [&](int p) {
        std::vector<int> nb;
        for (int q = 0; q < M; ++q)
            if (dist(p, q) <= opts.eps) nb.push_back(q);
        return nb;
    };

    int next = 0;
    for (int p = 0; p < M; ++p) {
        if (label[p] != kUnvisited) continue;
        auto nb = neighbours(p);
        if (static_cast<int>(nb.size()) < opts.min_members) {
            label[p] = kNoise;
            continue;
        }
        const int cid = next++;
        label[p] = cid;
        std::queue<int> todo;
        for (int q : nb) todo.push(q);
        while (!todo.empty()) {
            const int q = todo.front();
            todo.pop();
            if (label[q] == kNoise) label[q] = cid;  // border point
            if (label[q] != kUnvisited) continue;
            label[q] = cid;
            auto nb2 = neighbours(q);
            if (static_cast<int>(nb2.size()) >= opts.min_members)
                for (int r : nb2) todo.push(r);
        }
    }
    for (int p = 0; p < M; ++p)
        if (label[p] == kNoise) label[p] = next++;  // noise becomes a singleton

    CondensedModel out;
    out.method = CondenseMethod::lcon;
    out.clusters.assign(static_cast<std::size_t>(next), {});
    for (int p = 0; p < M; ++p) out.clusters[static_cast<std::size_t>(label[p])].push_back(p);
    canonicalise_clusters(out.clusters);
    merge_clusters(model, out);
    return out;
}

CondensedModel apply_condense_filter(const CondensedModel& condensed, const FilterSpec& spec) {
    CondensedModel out = condensed;
    for (int c = 0; c < out.K; ++c) {
        const Vector row = out.merged_loadings.row(c);
        std::vector<double> buf(row.data(), row.data() + row.size());
        buf = apply_filter(buf, spec);
        out.merged_loadings.row(c) = Eigen::Map<const Vector>(buf.data(), row.size()).transpose();
    }
    out.filter_applied = true;
    return out;
}

}  // namespace lspie
