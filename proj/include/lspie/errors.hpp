#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace lspie {

/// Requested component count exceeds what the data can support.
class RankError : public std::runtime_error {
public:
    explicit RankError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Operation applied to data in the wrong standardisation state.
class StateError : public std::runtime_error {
public:
    explicit StateError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Covariance is numerically rank-deficient where full rank is required.
/// Carries the indices of the null eigen-directions (descending-eigenvalue order).
class DegenerateRankError : public std::runtime_error {
public:
    DegenerateRankError(const std::string& msg, std::vector<int> null_dirs)
        : std::runtime_error(msg), null_directions(std::move(null_dirs)) {}
    std::vector<int> null_directions;
};

/// Data carries no usable variation for the requested statistic.
class DegenerateDataError : public std::runtime_error {
public:
    explicit DegenerateDataError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A metric name is already registered.
class MetricConflictError : public std::runtime_error {
public:
    explicit MetricConflictError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A metric name is not registered.
class MetricLookupError : public std::runtime_error {
public:
    explicit MetricLookupError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A registered metric violated its contract (wrong length or non-finite values).
class MetricContractError : public std::runtime_error {
public:
    explicit MetricContractError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Failure inside a pipeline run, annotated with the stage that raised it.
class PipelineError : public std::runtime_error {
public:
    PipelineError(const std::string& stage_name, const std::string& msg)
        : std::runtime_error("[" + stage_name + "] " + msg), stage(stage_name) {}
    std::string stage;
};

}  // namespace lspie
