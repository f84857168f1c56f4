#include "lspie/signals.hpp"

#include <cmath>
#include <numbers>

namespace lspie {

SignalKind signal_kind_from_string(const std::string& name) {
    if (name == "pure_sine") return SignalKind::pure_sine;
    if (name == "decreasing_freq") return SignalKind::decreasing_freq;
    throw std::invalid_argument("unknown signal kind: " + name);
}

std::string to_string(SignalKind kind) {
    return kind == SignalKind::pure_sine ? "pure_sine" : "decreasing_freq";
}

TimeSeries generate_signal(SignalKind kind, int n_samples, double sample_rate) {
    if (n_samples < 2) throw std::invalid_argument("generate_signal: n_samples must be >= 2");
    if (!(sample_rate > 0.0)) throw std::invalid_argument("generate_signal: sample_rate must be > 0");

    constexpr double two_pi = 2.0 * std::numbers::pi;
    TimeSeries series;
    series.sample_rate = sample_rate;
    series.t0 = 0.0;
    series.values.resize(n_samples);
    for (int i = 0; i < n_samples; ++i) {
        const double t = static_cast<double>(i) / sample_rate;
        series.values[i] = kind == SignalKind::pure_sine ? std::sin(two_pi * t)
                                                         : std::sin(two_pi * std::pow(t, 0.85));
    }
    return series;
}

TrajectoryMatrix hankelise(const TimeSeries& series, int window) {
    const int len = static_cast<int>(series.values.size());
    if (window < 2 || window > len - 1)
        throw std::invalid_argument("hankelise: window must satisfy 2 <= window <= len - 1 (len = " +
                                    std::to_string(len) + ", window = " + std::to_string(window) + ")");

    const int m = window;
    const int n = len - window + 1;
    TrajectoryMatrix traj;
    traj.data.resize(m, n);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) traj.data(i, j) = series.values[i + j];
    traj.window = m;
    traj.n_cols = n;
    traj.source_len = len;
    traj.standardisation = Standardisation::raw;
    traj.channels = {{0, m}};
    return traj;
}

Vector dehankelise(const Matrix& matrix) {
    const int m = static_cast<int>(matrix.rows());
    const int n = static_cast<int>(matrix.cols());
    if (m == 0 || n == 0) throw std::invalid_argument("dehankelise: empty matrix");

    Vector out(m + n - 1);
    for (int k = 0; k < m + n - 1; ++k) {
        const int i_lo = std::max(0, k - n + 1);
        const int i_hi = std::min(m - 1, k);
        double sum = 0.0;
        for (int i = i_lo; i <= i_hi; ++i) sum += matrix(i, k - i);
        out[k] = sum / static_cast<double>(i_hi - i_lo + 1);
    }
    return out;
}

TrajectoryMatrix standardise(const TrajectoryMatrix& matrix, StandardiseMode mode,
                             const StandardiseOptions& opts) {
    if (matrix.standardisation != Standardisation::raw)
        throw StateError("standardise: input is already standardised");
    const int m = static_cast<int>(matrix.data.rows());
    if (m < 2) throw std::invalid_argument("standardise: need at least 2 rows");

    TrajectoryMatrix out = matrix;
    out.column_means = matrix.data.colwise().mean();
    out.data = matrix.data.rowwise() - out.column_means.transpose();
    out.standardisation = Standardisation::centered;
    if (mode == StandardiseMode::center) return out;

    // Whiten: eigendecompose the sample covariance of the centered data.
    const Matrix cov = out.data.transpose() * out.data / static_cast<double>(m - 1);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
    if (eig.info() != Eigen::Success)
        throw std::runtime_error("standardise: covariance eigendecomposition failed");

    const int n = static_cast<int>(cov.rows());
    Vector evals(n);   // descending
    Matrix evecs(n, n);
    for (int i = 0; i < n; ++i) {
        evals[i] = eig.eigenvalues()[n - 1 - i];
        evecs.col(i) = eig.eigenvectors().col(n - 1 - i);
    }

    const double lambda_max = evals[0];
    const double null_floor = 1e-10 * std::max(lambda_max, 0.0);
    std::vector<int> null_dirs;
    for (int i = 0; i < n; ++i)
        if (!(evals[i] > null_floor)) null_dirs.push_back(i);

    if (!null_dirs.empty() && !opts.drop_null) {
        std::string msg = "standardise: covariance is rank-deficient; null directions:";
        for (int i : null_dirs) msg += " " + std::to_string(i);
        throw DegenerateRankError(msg, null_dirs);
    }

    const int r = n - static_cast<int>(null_dirs.size());
    Matrix transform;
    if (r == n) {
        // Full rank: symmetric whitening keeps the column identities.
        transform = evecs * evals.cwiseSqrt().cwiseInverse().asDiagonal() * evecs.transpose();
    } else {
        transform = evecs.leftCols(r) * evals.head(r).cwiseSqrt().cwiseInverse().asDiagonal();
    }
    out.data = out.data * transform;
    out.whitening_transform = transform;
    out.n_cols = r;
    out.standardisation = Standardisation::whitened;
    return out;
}

TrajectoryMatrix stack_channels(const std::vector<TrajectoryMatrix>& channels) {
    if (channels.empty()) throw std::invalid_argument("stack_channels: no channels");
    if (channels.size() == 1) return channels.front();

    const int n = channels.front().n_cols;
    const Standardisation mode = channels.front().standardisation;
    int total_rows = 0;
    for (const auto& ch : channels) {
        if (ch.n_cols != n)
            throw std::invalid_argument("stack_channels: mismatched n_cols (" + std::to_string(ch.n_cols) +
                                        " vs " + std::to_string(n) + ")");
        if (ch.standardisation != mode)
            throw std::invalid_argument("stack_channels: mismatched standardisation modes");
        total_rows += static_cast<int>(ch.data.rows());
    }

    TrajectoryMatrix out;
    out.data.resize(total_rows, n);
    int row = 0;
    for (const auto& ch : channels) {
        const int rows = static_cast<int>(ch.data.rows());
        out.data.middleRows(row, rows) = ch.data;
        out.channels.push_back({row, rows});
        row += rows;
    }
    out.window = total_rows;
    out.n_cols = n;
    out.source_len = total_rows + n - 1;
    out.standardisation = mode;
    // Per-channel means/transforms coincide only in trivial cases; keep them
    // when identical across channels, otherwise leave unset.
    if (mode != Standardisation::raw) {
        const Vector& ref = channels.front().column_means;
        bool same_means = true;
        for (const auto& ch : channels)
            same_means = same_means && ch.column_means.size() == ref.size() &&
                         (ref.size() == 0 || (ch.column_means - ref).cwiseAbs().maxCoeff() == 0.0);
        if (same_means) out.column_means = ref;
    }
    return out;
}

TrajectoryMatrix from_matrix(const Matrix& data) {
    if (data.rows() == 0 || data.cols() == 0) throw std::invalid_argument("from_matrix: empty matrix");
    TrajectoryMatrix traj;
    traj.data = data;
    traj.window = static_cast<int>(data.rows());
    traj.n_cols = static_cast<int>(data.cols());
    traj.source_len = traj.window + traj.n_cols - 1;
    traj.standardisation = Standardisation::raw;
    traj.channels = {{0, traj.window}};
    return traj;
}

}  // namespace lspie
