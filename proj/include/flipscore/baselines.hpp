#pragma once

#include <Eigen/Dense>

#include "flipscore/blocks.hpp"
#include "flipscore/family.hpp"
#include "flipscore/glm.hpp"
#include "flipscore/model_data.hpp"

namespace flipscore {

/// Full design [x z]; tested column k is coefficient k.
Eigen::MatrixXd full_design(const ModelData& data);

struct WaldResult {
    double estimate = 0.0;
    double std_error = 0.0;
    double z = 0.0;
    double chi_square = 0.0;  ///< z^2
    double p_value = 1.0;     ///< two-sided, standard normal reference
    bool converged = false;
};

/// Two-sided standard normal p-value.
double normal_two_sided_p(double z);

/// Classical GLM Wald test: full-model IRLS, model-based standard error.
/// For gaussian the dispersion is estimated with n - (p + q) degrees of freedom.
WaldResult wald_glm_test(const ModelData& data, const Family& family, Eigen::Index column,
                         const IrlsOptions& options = {});

/// GEE with independence working correlation.
struct SandwichFit {
    Eigen::VectorXd beta_hat;           ///< tested coefficients first, then nuisance
    Eigen::MatrixXd model_variance;     ///< (D'WD)^{-1}, dispersion included
    Eigen::MatrixXd sandwich_variance;  ///< W0^{-1} W1 W0^{-1}
    BlockStructure clusters;
    bool converged = false;
};

SandwichFit gee_independence_fit(const ModelData& data, const Family& family,
                                 const IrlsOptions& options = {});

/// Cluster-blocked sandwich W0^{-1} W1 W0^{-1} with A_j = V_j, evaluated at
/// fit.beta_hat. Throws SingularDesignError when the bread W0 is singular.
Eigen::MatrixXd sandwich_variance(const SandwichFit& fit, const ModelData& data,
                                  const Family& family);

/// Wald test with the robust standard error.
WaldResult gee_wald_test(const SandwichFit& fit, Eigen::Index column);

}  // namespace flipscore
