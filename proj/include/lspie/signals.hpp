#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "lspie/errors.hpp"

namespace lspie {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Built-in test signals: a unit sine and a decreasing-frequency sweep
/// (the instantaneous frequency decays as t^-0.15).
enum class SignalKind { pure_sine, decreasing_freq };

SignalKind signal_kind_from_string(const std::string& name);
std::string to_string(SignalKind kind);

/// Uniformly sampled scalar channel.
struct TimeSeries {
    Vector values;
    double sample_rate = 1.0;  ///< samples per second, > 0
    double t0 = 0.0;           ///< start time, seconds
};

enum class Standardisation { raw, centered, whitened };

/// Row range contributed by one source channel of a stacked matrix.
struct ChannelRange {
    int first_row = 0;
    int rows = 0;
};

/// Trajectory (delay-embedding) matrix of a series plus standardisation state.
///
/// For matrices built by hankelise(), data[i][j] = x[i + j] while
/// standardisation == raw: every anti-diagonal is constant. window is the
/// number of rows m; columns are the n = len - m + 1 lagged copies.
struct TrajectoryMatrix {
    Matrix data;          ///< m x n
    int window = 0;       ///< m
    int n_cols = 0;       ///< n
    int source_len = 0;   ///< m + n - 1
    Standardisation standardisation = Standardisation::raw;
    Vector column_means;         ///< length n, present once centered/whitened
    Matrix whitening_transform;  ///< n x r map applied on the right, whitened only
    std::vector<ChannelRange> channels;  ///< provenance of stacked row blocks
};

/// Sample one of the built-in signals at t_i = i / sample_rate.
/// Throws std::invalid_argument for n_samples < 2 or sample_rate <= 0.
TimeSeries generate_signal(SignalKind kind, int n_samples, double sample_rate);

/// Build the trajectory matrix with `window` rows.
/// Requires 2 <= window <= len(values) - 1.
TrajectoryMatrix hankelise(const TimeSeries& series, int window);

/// Invert a trajectory matrix by anti-diagonal averaging. Exact inverse of
/// hankelise for true Hankel matrices; defined for any nonempty matrix.
Vector dehankelise(const Matrix& matrix);

enum class StandardiseMode { center, whiten };

struct StandardiseOptions {
    /// Whitening: drop null directions instead of raising DegenerateRankError.
    bool drop_null = false;
};

/// Center (subtract and store column means) or whiten (center, then
/// decorrelate to unit column covariance via an eigendecomposition of the
/// covariance; the transform is stored for inversion). Input must be raw.
///
/// Whitening a covariance with eigenvalues below 1e-10 x the largest raises
/// DegenerateRankError listing the null directions, unless drop_null is set,
/// in which case those directions are removed and n_cols shrinks.
TrajectoryMatrix standardise(const TrajectoryMatrix& matrix, StandardiseMode mode,
                             const StandardiseOptions& opts = {});

/// Row-stack per-channel trajectory matrices sharing n_cols and
/// standardisation mode; channel row ranges are recorded.
TrajectoryMatrix stack_channels(const std::vector<TrajectoryMatrix>& channels);

/// Adopt an arbitrary data matrix (rows = samples, columns = variables) as a
/// raw TrajectoryMatrix so it can flow through standardise and the model
/// fits. Anti-diagonal semantics apply only to matrices built by hankelise.
TrajectoryMatrix from_matrix(const Matrix& data);

}  // namespace lspie
