#pragma once

#include <mutex>
#include <string>
#include <vector>

#include "lspie/detail/rng.hpp"
#include "lspie/lvm.hpp"
#include "lspie/metrics.hpp"
#include "lspie/signals.hpp"

/// Shared fixtures for the unit tests. The sine trajectory matrices and the
/// k=8 fits are expensive, so they are built once per test binary.
namespace testutil {

inline lspie::Matrix random_matrix(int rows, int cols, std::uint64_t seed) {
    lspie::detail::Rng rng(seed);
    lspie::Matrix out(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) out(i, j) = rng.gaussian();
    return out;
}

inline std::vector<double> to_std(const lspie::Vector& v) {
    return {v.data(), v.data() + v.size()};
}

inline std::vector<std::vector<double>> to_std(const lspie::Matrix& m) {
    std::vector<std::vector<double>> out(static_cast<std::size_t>(m.rows()));
    for (int i = 0; i < m.rows(); ++i) out[static_cast<std::size_t>(i)] = to_std(lspie::Vector(m.row(i)));
    return out;
}

/// Centered 300 x 3701 trajectory matrix of the built-in sine.
inline const lspie::TrajectoryMatrix& sine_trajectory() {
    static const lspie::TrajectoryMatrix traj = [] {
        const lspie::TimeSeries series =
            lspie::generate_signal(lspie::SignalKind::pure_sine, 4000, 106.10329539459689);
        return lspie::standardise(lspie::hankelise(series, 300), lspie::StandardiseMode::center);
    }();
    return traj;
}

inline const lspie::TrajectoryMatrix& chirp_trajectory() {
    static const lspie::TrajectoryMatrix traj = [] {
        const lspie::TimeSeries series =
            lspie::generate_signal(lspie::SignalKind::decreasing_freq, 4000, 106.10329539459689);
        return lspie::standardise(lspie::hankelise(series, 300), lspie::StandardiseMode::center);
    }();
    return traj;
}

inline const lspie::LatentModel& sine_pca() {
    static const lspie::LatentModel model = lspie::fit_pca(sine_trajectory(), 8);
    return model;
}

inline const lspie::LatentModel& sine_ica() {
    static const lspie::LatentModel model = lspie::fit_ica(sine_trajectory(), 8);
    return model;
}

/// Minimal model wrapper around explicit loading rows, for enhance tests.
/// Scores are the projections of small synthetic data so that
/// score_correlation style metrics stay well defined.
inline lspie::LatentModel direction_model(const lspie::Matrix& rows) {
    lspie::LatentModel model;
    model.kind = lspie::ModelKind::pca;
    model.loadings = rows;
    model.k = static_cast<int>(rows.rows());
    model.mean = lspie::Vector::Zero(rows.cols());
    const lspie::Matrix data = random_matrix(32, static_cast<int>(rows.cols()), 99);
    model.scores = data * rows.transpose();
    model.direction_norms = rows.rowwise().norm();
    model.eigenvalues = lspie::Vector::Zero(model.k);
    model.id = "test-directions";
    return model;
}

namespace detail_fixed {
inline std::mutex mutex;
inline std::vector<double> theta;
}  // namespace detail_fixed

/// A registry metric that returns a preset vector, for deterministic
/// rank/scale tests. Set the vector before each use.
inline std::string fixed_metric_name() {
    static const std::string name = [] {
        lspie::MetricRegistry::instance().register_metric(
            "test_fixed", [](const lspie::LatentModel&, const lspie::Matrix&) {
                std::scoped_lock lock(detail_fixed::mutex);
                return Eigen::Map<const lspie::Vector>(detail_fixed::theta.data(),
                                                       static_cast<int>(detail_fixed::theta.size()))
                    .eval();
            });
        return std::string("test_fixed");
    }();
    return name;
}

inline void set_fixed_theta(std::vector<double> values) {
    std::scoped_lock lock(detail_fixed::mutex);
    detail_fixed::theta = std::move(values);
}

}  // namespace testutil
