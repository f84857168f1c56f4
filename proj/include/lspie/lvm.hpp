#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lspie/signals.hpp"

namespace lspie {

enum class ModelKind { pca, ica };
enum class IcaContrast { logcosh, cube };

ModelKind model_kind_from_string(const std::string& name);
std::string to_string(ModelKind kind);

struct IcaOptions {
    IcaContrast contrast = IcaContrast::logcosh;  ///< logcosh uses a = 1.0
    double tol = 1e-4;
    int max_iter = 200;
    std::uint64_t seed = 0;
    /// Whiten internally via an SVD of the data (the usual convention).
    /// When disabled the input must already be white and k must equal n.
    bool whiten = true;
};

/// A fitted linear latent variable model. Loadings rows are the latent
/// directions in original column space: unit norm, sign-canonicalised so
/// the largest-magnitude entry of each is positive.
struct LatentModel {
    ModelKind kind = ModelKind::pca;
    Matrix loadings;    ///< k x n
    Matrix scores;      ///< m x k, X * loadings^T
    Vector eigenvalues; ///< pca only: descending covariance eigenvalues, length k
    Vector mean;        ///< column means of the original data, length n
    Matrix whitening_transform;  ///< ica: internal n x k whitening map, else empty
    int k = 0;
    std::uint64_t seed = 0;      ///< ica initialisation seed
    Vector direction_norms;      ///< all 1 immediately after fitting
    bool converged = true;       ///< ica: fixed point reached within max_iter
    std::string id;
};

/// Principal components of a standardised trajectory matrix: loadings are the
/// top-k eigenvectors of the sample covariance by descending eigenvalue.
/// Throws RankError when k exceeds min(m, n), StateError on raw input.
LatentModel fit_pca(const TrajectoryMatrix& X, int k);

/// FastICA with symmetric decorrelation on a standardised trajectory matrix.
/// Directions are de-whitened back to original column space and
/// unit-normalised; order is unranked. Deterministic given the seed.
/// Non-convergence sets converged = false (with the model still usable).
LatentModel fit_ica(const TrajectoryMatrix& X, int k, const IcaOptions& opts = {});

/// Project rows of X onto the model's latent directions.
Matrix encode(const LatentModel& model, const Matrix& X);

/// Reconstruct data from scores; subset restricts to the chosen directions
/// (indices into loadings rows). add_mean restores the stored column means.
Matrix decode(const LatentModel& model, const Matrix& scores,
              const std::vector<int>& subset = {}, bool add_mean = true);

}  // namespace lspie
