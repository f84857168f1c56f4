#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "lspie/enhance.hpp"
#include "lspie/lvm.hpp"
#include "lspie/metrics.hpp"

namespace lspie {

/// Shortest decimal form that parses back to the identical double:
/// locale-independent and bitwise-reproducible.
std::string format_double(double v);

/// Parse a double written by format_double (or any decimal form).
double parse_double(const std::string& token);

/// Header-less numeric CSV, one matrix row per line.
void write_matrix_csv(const Matrix& mat, const std::filesystem::path& path);
Matrix read_matrix_csv(const std::filesystem::path& path);

/// Two-column "time,value" CSV with header.
void write_series_csv(const TimeSeries& series, const std::filesystem::path& path);

struct CsvReadOptions {
    /// Treat the first column as time: t0 and the sample rate are inferred
    /// from it, remaining columns become channels.
    bool time_column = false;
};

/// Read one TimeSeries per channel column. A non-numeric first line is
/// treated as a header. Values must be finite.
std::vector<TimeSeries> read_series_csv(const std::filesystem::path& path,
                                        const CsvReadOptions& opts = {});

/// "name,index,theta,score" rows; indices name the directions (original
/// positions after ranking, cluster ids after condensing).
void write_metrics_csv(const MetricVector& metric, const std::vector<int>& indices,
                       const std::filesystem::path& path);

/// "original_index,cluster_id,sign" rows.
void write_clusters_csv(const CondensedModel& condensed, const std::filesystem::path& path);

/// JSON model file holding kind, k, seed, loadings, eigenvalues and mean.
/// Loading restores those fields exactly; scores are recomputable via
/// encode on the original data.
void save_model(const LatentModel& model, const std::filesystem::path& path);
LatentModel load_model(const std::filesystem::path& path);

}  // namespace lspie
