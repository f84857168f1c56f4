#include "lspie/metrics.hpp"

#include <cmath>
#include <numbers>

namespace lspie {

namespace {

/// E[log cosh Y] for Y ~ N(0,1).
constexpr double kGaussianLogcosh = 0.374567207491438;

/// log(cosh(x)) without overflow for large |x|.
double logcosh(double x) {
    const double ax = std::abs(x);
    return ax + std::log1p(std::exp(-2.0 * ax)) - std::numbers::ln2;
}

struct Moments {
    double mean, m2, m3, m4;
};

Moments column_moments(const Vector& y) {
    const auto m = y.size();
    const double mean = y.mean();
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
        const double d = y[i] - mean;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    const double inv = 1.0 / static_cast<double>(m);
    return {mean, m2 * inv, m3 * inv, m4 * inv};
}

void require_scores(const LatentModel& model, const char* op) {
    if (model.scores.rows() < 4)
        throw std::invalid_argument(std::string(op) + ": score columns need at least 4 samples");
}

[[noreturn]] void throw_zero_variance(const char* op, Eigen::Index col) {
    throw DegenerateDataError(std::string(op) + ": score column " + std::to_string(col) +
                              " has zero variance");
}

}  // namespace

MetricRegistry& MetricRegistry::instance() {
    static MetricRegistry registry;
    return registry;
}

MetricRegistry::MetricRegistry() {
    fns_["variance_explained"] = [](const LatentModel& m, const Matrix& X) {
        return variance_explained(m, X);
    };
    fns_["kurtosis"] = [](const LatentModel& m, const Matrix&) { return kurtosis_metric(m); };
    fns_["skewness"] = [](const LatentModel& m, const Matrix&) { return skewness_metric(m); };
    fns_["negentropy_proxy"] = [](const LatentModel& m, const Matrix&) {
        return negentropy_proxy_metric(m);
    };
}

void MetricRegistry::register_metric(const std::string& name, MetricFn fn) {
    std::lock_guard<std::mutex> lock(mutex_);
    if (fns_.count(name)) throw MetricConflictError("metric already registered: " + name);
    fns_[name] = std::move(fn);
}

MetricFn MetricRegistry::get(const std::string& name) const {
    std::lock_guard<std::mutex> lock(mutex_);
    const auto it = fns_.find(name);
    if (it == fns_.end()) throw MetricLookupError("unknown metric: " + name);
    return it->second;
}

bool MetricRegistry::contains(const std::string& name) const {
    std::lock_guard<std::mutex> lock(mutex_);
    return fns_.count(name) > 0;
}

std::vector<std::string> MetricRegistry::names() const {
    std::lock_guard<std::mutex> lock(mutex_);
    std::vector<std::string> out;
    for (const auto& [name, fn] : fns_) out.push_back(name);
    return out;
}

Vector scaling_scores(const Vector& values) {
    if (values.size() == 0) throw std::invalid_argument("scaling_scores: empty metric vector");
    Vector shifted = values;
    const double lo = values.minCoeff();
    if (lo < 0.0) shifted = (values.array() - lo + 1e-12).matrix();
    const double total = shifted.sum();
    if (!(total > 0.0))
        throw DegenerateDataError("scaling_scores: metric values carry no mass (all zero)");
    return shifted / total;
}

MetricVector evaluate_metric(const std::string& name, const LatentModel& model, const Matrix& X) {
    const MetricFn fn = MetricRegistry::instance().get(name);
    Vector theta = fn(model, X);
    if (theta.size() != model.k)
        throw MetricContractError("metric " + name + " returned " + std::to_string(theta.size()) +
                                  " values for a model with k = " + std::to_string(model.k));
    if (!theta.allFinite())
        throw MetricContractError("metric " + name + " returned non-finite values");
    MetricVector out;
    out.metric_name = name;
    out.values = std::move(theta);
    out.scores = scaling_scores(out.values);
    out.source_model_id = model.id;
    return out;
}

Vector variance_explained(const LatentModel& model, const Matrix& X) {
    const auto m = X.rows();
    if (m < 2) throw std::invalid_argument("variance_explained: need at least 2 samples");
    if (model.scores.rows() != m)
        throw std::invalid_argument("variance_explained: scores/data row mismatch");

    const Matrix Xc = X.rowwise() - X.colwise().mean();
    const double total = Xc.squaredNorm() / static_cast<double>(m - 1);
    if (!(total > 0.0)) throw DegenerateDataError("variance_explained: data has zero total variance");

    Vector theta(model.k);
    for (int i = 0; i < model.k; ++i) {
        const Vector col = model.scores.col(i);
        const double mean = col.mean();
        theta[i] = (col.array() - mean).square().sum() / static_cast<double>(m - 1) / total;
    }
    return theta;
}

Vector kurtosis_metric(const LatentModel& model) {
    require_scores(model, "kurtosis");
    Vector theta(model.k);
    for (int i = 0; i < model.k; ++i) {
        const Moments mo = column_moments(model.scores.col(i));
        if (!(mo.m2 > 0.0)) throw_zero_variance("kurtosis", i);
        theta[i] = std::abs(mo.m4 / (mo.m2 * mo.m2) - 3.0);
    }
    return theta;
}

Vector skewness_metric(const LatentModel& model) {
    require_scores(model, "skewness");
    Vector theta(model.k);
    for (int i = 0; i < model.k; ++i) {
        const Moments mo = column_moments(model.scores.col(i));
        if (!(mo.m2 > 0.0)) throw_zero_variance("skewness", i);
        theta[i] = std::abs(mo.m3 / std::pow(mo.m2, 1.5));
    }
    return theta;
}

Vector negentropy_proxy_metric(const LatentModel& model) {
    require_scores(model, "negentropy_proxy");
    const auto m = model.scores.rows();
    Vector theta(model.k);
    for (int i = 0; i < model.k; ++i) {
        const Moments mo = column_moments(model.scores.col(i));
        if (!(mo.m2 > 0.0)) throw_zero_variance("negentropy_proxy", i);
        const double sd = std::sqrt(mo.m2);
        double acc = 0.0;
        for (Eigen::Index r = 0; r < m; ++r)
            acc += logcosh((model.scores(r, i) - mo.mean) / sd);
        const double dev = acc / static_cast<double>(m) - kGaussianLogcosh;
        theta[i] = dev * dev;
    }
    return theta;
}

}  // namespace lspie
