#pragma once

#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "lspie/lvm.hpp"

namespace lspie {

/// Per-direction metric values theta_i plus the derived scaling scores s_i
/// (s_i = theta_i / sum theta, after a shift when any theta is negative;
/// the scores sum to 1).
struct MetricVector {
    std::string metric_name;
    Vector values;  ///< theta_i, metric units
    Vector scores;  ///< s_i, dimensionless
    std::string source_model_id;
};

/// Metric contract: maps (model, standardised data) to one finite value per
/// latent direction, invariant to direction storage order.
using MetricFn = std::function<Vector(const LatentModel&, const Matrix&)>;

/// Process-wide, append-only metric registry. Built-ins are registered on
/// first use: variance_explained, kurtosis, skewness, negentropy_proxy.
class MetricRegistry {
public:
    static MetricRegistry& instance();

    /// Throws MetricConflictError when the name is taken.
    void register_metric(const std::string& name, MetricFn fn);
    /// Throws MetricLookupError when the name is unknown.
    MetricFn get(const std::string& name) const;
    bool contains(const std::string& name) const;
    std::vector<std::string> names() const;

private:
    MetricRegistry();
    mutable std::mutex mutex_;
    std::map<std::string, MetricFn> fns_;
};

/// Evaluate a registered metric and derive scaling scores. Enforces the
/// metric contract (length k, finite) via MetricContractError.
MetricVector evaluate_metric(const std::string& name, const LatentModel& model, const Matrix& X);

/// s_i = theta'_i / sum theta' with theta' = theta - min(theta) + 1e-12 when
/// any theta is negative, theta otherwise. Throws DegenerateDataError when
/// the values carry no mass (all zero).
Vector scaling_scores(const Vector& values);

/// Fraction of the data's total variance captured by each score column.
Vector variance_explained(const LatentModel& model, const Matrix& X);
/// Absolute excess kurtosis of each score column.
Vector kurtosis_metric(const LatentModel& model);
/// Absolute skewness of each score column.
Vector skewness_metric(const LatentModel& model);
/// Squared distance of E[log cosh] from its standard-normal value, per
/// standardised score column; grows with non-Gaussianity.
Vector negentropy_proxy_metric(const LatentModel& model);

}  // namespace lspie
