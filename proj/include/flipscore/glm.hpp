#pragma once

#include <Eigen/Dense>

#include "flipscore/family.hpp"
#include "flipscore/model_data.hpp"

namespace flipscore {

struct IrlsOptions {
    double tol = 1e-8;  ///< relative deviance change
    int max_iter = 50;
};

/// Result of an IRLS fit of g(mu) = design * coef + offset.
struct GlmFit {
    Eigen::VectorXd coefficients;
    Eigen::VectorXd eta;
    Eigen::VectorXd mu;
    Eigen::VectorXd mean_deriv;  ///< dmu/deta at eta
    Eigen::VectorXd v_diag;      ///< var(y) at the (clamped) fitted means
    Eigen::VectorXd w_diag;      ///< mean_deriv^2 / v_diag
    double dispersion = 1.0;
    double deviance = 0.0;
    bool converged = false;
    /// Fitted means ran to the edge of the mean space (separation).
    bool boundary = false;
    int iterations = 0;

    Eigen::MatrixXd design;
    Eigen::VectorXd y;
    Family family = Family::gaussian();
};

/// Fit under the null: g(mu) = Z gamma + offset, tested columns excluded.
struct NullFit : GlmFit {
    const Eigen::VectorXd& gamma_hat() const noexcept { return coefficients; }
};

GlmFit fit_glm(const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
               const Eigen::VectorXd& offset, const Family& family,
               const IrlsOptions& options = {});

NullFit fit_null(const ModelData& data, const Family& family, const IrlsOptions& options = {});

/// Same as fit_null but with an explicit nuisance design.
NullFit fit_null(const Eigen::MatrixXd& nuisance, const ModelData& data, const Family& family,
                 const IrlsOptions& options = {});

/// Orthogonal projection onto span(W^{1/2} Z), held as an orthonormal basis.
///
/// Equivalent to H = W^{1/2} Z (Z' W Z)^{-1} Z' W^{1/2} without forming the
/// n x n matrix.
class WeightedProjector {
public:
    WeightedProjector(const Eigen::MatrixXd& z, const Eigen::VectorXd& w_diag);

    /// n x q orthonormal basis Q with H = Q Q'.
    const Eigen::MatrixXd& basis() const noexcept { return basis_; }
    Eigen::Index rank() const noexcept { return basis_.cols(); }

    Eigen::VectorXd project(const Eigen::VectorXd& v) const;
    /// (I - H) v
    Eigen::VectorXd residual(const Eigen::VectorXd& v) const;
    Eigen::MatrixXd dense() const;

private:
    Eigen::MatrixXd basis_;
};

/// Dense H. Throws SingularDesignError when Z' W Z is singular.
Eigen::MatrixXd hat_projection(const Eigen::MatrixXd& z, const Eigen::VectorXd& w_diag);

/// (D' W D)^{-1} for a full-rank weighted design.
Eigen::MatrixXd weighted_cross_inverse(const Eigen::MatrixXd& design,
                                       const Eigen::VectorXd& w_diag);

}  // namespace flipscore
