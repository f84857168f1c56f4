#include "lspie/lvm.hpp"

#include <Eigen/SVD>
#include <cmath>

#include "lspie/detail/rng.hpp"

namespace lspie {

namespace {

void require_standardised(const TrajectoryMatrix& X, const char* op) {
    if (X.standardisation == Standardisation::raw)
        throw StateError(std::string(op) + ": input must be standardised (centered or whitened)");
}

void require_k(const TrajectoryMatrix& X, int k, const char* op) {
    const int max_k = static_cast<int>(std::min(X.data.rows(), X.data.cols()));
    if (k < 1 || k > max_k)
        throw RankError(std::string(op) + ": k = " + std::to_string(k) +
                        " outside [1, " + std::to_string(max_k) + "]");
}

/// Flip each row so its largest-magnitude entry is positive.
void canonicalise_signs(Matrix& loadings) {
    for (Eigen::Index i = 0; i < loadings.rows(); ++i) {
        Eigen::Index j = 0;
        loadings.row(i).cwiseAbs().maxCoeff(&j);
        if (loadings(i, j) < 0.0) loadings.row(i) = -loadings.row(i);
    }
}

Vector stored_mean(const TrajectoryMatrix& X) {
    if (X.column_means.size() > 0) return X.column_means;
    return Vector::Zero(X.data.cols());
}

/// W <- (W W^T)^{-1/2} W, the symmetric decorrelation step.
Matrix symmetric_decorrelation(const Matrix& W) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(W * W.transpose());
    const Vector d = eig.eigenvalues().cwiseMax(1e-300);
    return eig.eigenvectors() * d.cwiseSqrt().cwiseInverse().asDiagonal() *
           eig.eigenvectors().transpose() * W;
}

}  // namespace

ModelKind model_kind_from_string(const std::string& name) {
    if (name == "pca") return ModelKind::pca;
    if (name == "ica") return ModelKind::ica;
    throw std::invalid_argument("unknown model kind: " + name);
}

std::string to_string(ModelKind kind) { return kind == ModelKind::pca ? "pca" : "ica"; }

LatentModel fit_pca(const TrajectoryMatrix& X, int k) {
    require_standardised(X, "fit_pca");
    require_k(X, k, "fit_pca");
    const auto m = X.data.rows();

    // Thin SVD of the data: eigenvalues of the covariance are sigma^2/(m-1)
    // and the right singular vectors stay orthonormal even when the trailing
    // singular values sit at the numerical noise floor. JacobiSVD, not BDCSVD:
    // the divide-and-conquer kernel in Eigen 3.4 loses finiteness on wide
    // rank-deficient inputs like Hankel matrices of pure tones.
    Eigen::JacobiSVD<Matrix> svd(X.data, Eigen::ComputeThinU | Eigen::ComputeThinV);
    LatentModel model;
    model.kind = ModelKind::pca;
    model.k = k;
    model.loadings = svd.matrixV().leftCols(k).transpose();
    canonicalise_signs(model.loadings);
    model.eigenvalues =
        (svd.singularValues().head(k).array().square() / static_cast<double>(m - 1)).matrix();
    model.scores = X.data * model.loadings.transpose();
    model.mean = stored_mean(X);
    model.direction_norms = Vector::Ones(k);
    model.id = "pca-k" + std::to_string(k);
    return model;
}

LatentModel fit_ica(const TrajectoryMatrix& X, int k, const IcaOptions& opts) {
    require_standardised(X, "fit_ica");
    require_k(X, k, "fit_ica");
    if (opts.tol <= 0.0) throw std::invalid_argument("fit_ica: tol must be > 0");
    if (opts.max_iter < 1) throw std::invalid_argument("fit_ica: max_iter must be >= 1");

    const auto m = X.data.rows();
    const double scale = std::sqrt(static_cast<double>(m - 1));

    Matrix Z;         // m x k, unit column covariance
    Matrix V;         // n x k right singular vectors (empty when whiten = off)
    Vector sigma;     // leading singular values
    if (opts.whiten) {
        Eigen::JacobiSVD<Matrix> svd(X.data, Eigen::ComputeThinU | Eigen::ComputeThinV);
        Z = scale * svd.matrixU().leftCols(k);
        V = svd.matrixV().leftCols(k);
        sigma = svd.singularValues().head(k);
    } else {
        if (k != X.n_cols)
            throw std::invalid_argument("fit_ica: whiten = off requires k = n_cols");
        Z = X.data;
    }

    detail::Rng rng(opts.seed);
    Matrix W(k, k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) W(i, j) = rng.gaussian();
    W = symmetric_decorrelation(W);

    const bool logcosh = opts.contrast == IcaContrast::logcosh;
    bool converged = false;
    for (int it = 0; it < opts.max_iter; ++it) {
        const Matrix Y = Z * W.transpose();  // m x k component estimates
        Matrix g, gp;
        if (logcosh) {
            g = Y.array().tanh().matrix();
            gp = (1.0 - g.array().square()).matrix();
        } else {
            g = Y.array().cube().matrix();
            gp = (3.0 * Y.array().square()).matrix();
        }
        const Matrix W1 = symmetric_decorrelation(
            g.transpose() * Z / static_cast<double>(m) -
            gp.colwise().mean().asDiagonal() * W);
        const double lim =
            ((W1 * W.transpose()).diagonal().cwiseAbs().array() - 1.0).abs().maxCoeff();
        W = W1;
        if (lim < opts.tol) {
            converged = true;
            break;
        }
    }

    LatentModel model;
    model.kind = ModelKind::ica;
    model.k = k;
    model.seed = opts.seed;
    model.converged = converged;
    if (opts.whiten) {
        // De-whitening (mixing view): directions re-weighted by the singular
        // spectrum land back in the data's dominant subspace.
        model.loadings = W * sigma.asDiagonal() * V.transpose();
        Vector inv_sigma(k);
        for (int i = 0; i < k; ++i) inv_sigma[i] = sigma[i] > 0.0 ? scale / sigma[i] : 0.0;
        model.whitening_transform = V * inv_sigma.asDiagonal();
        for (int i = 0; i < k; ++i) {
            if (model.loadings.row(i).norm() < 1e-300) {
                // All mixed-in singular values vanished; fall back to the
                // dominant whitened axis of this component.
                Eigen::Index j = 0;
                W.row(i).cwiseAbs().maxCoeff(&j);
                model.loadings.row(i) = V.col(j).transpose();
            }
        }
    } else {
        model.loadings = W;
    }
    for (int i = 0; i < k; ++i) model.loadings.row(i).normalize();
    canonicalise_signs(model.loadings);
    model.scores = X.data * model.loadings.transpose();
    model.mean = stored_mean(X);
    model.direction_norms = Vector::Ones(k);
    model.id = "ica-k" + std::to_string(k) + "-seed" + std::to_string(opts.seed);
    return model;
}

Matrix encode(const LatentModel& model, const Matrix& X) {
    if (X.cols() != model.loadings.cols())
        throw std::invalid_argument("encode: X has " + std::to_string(X.cols()) +
                                    " columns, model expects " + std::to_string(model.loadings.cols()));
    return X * model.loadings.transpose();
}

Matrix decode(const LatentModel& model, const Matrix& scores,
              const std::vector<int>& subset, bool add_mean) {
    Matrix basis;
    if (subset.empty()) {
        basis = model.loadings;
    } else {
        basis.resize(static_cast<Eigen::Index>(subset.size()), model.loadings.cols());
        for (std::size_t s = 0; s < subset.size(); ++s) {
            const int idx = subset[s];
            if (idx < 0 || idx >= model.k)
                throw std::invalid_argument("decode: direction index " + std::to_string(idx) +
                                            " out of range [0, " + std::to_string(model.k) + ")");
            basis.row(static_cast<Eigen::Index>(s)) = model.loadings.row(idx);
        }
    }
    if (scores.cols() != basis.rows())
        throw std::invalid_argument("decode: scores have " + std::to_string(scores.cols()) +
                                    " columns, expected " + std::to_string(basis.rows()));
    Matrix out = scores * basis;
    if (add_mean && model.mean.size() == out.cols()) out.rowwise() += model.mean.transpose();
    return out;
}

}  // namespace lspie
