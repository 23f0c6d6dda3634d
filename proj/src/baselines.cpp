#include "flipscore/baselines.hpp"

#include <cmath>
#include <numbers>

#include "flipscore/error.hpp"

namespace flipscore {

namespace {

void check_tested_column(const ModelData& data, Eigen::Index column)
{
    if (column < 0 || column >= data.x.cols()) {
        throw InputError("tested column index " + std::to_string(column) + " out of range");
    }
}

}  // namespace

Eigen::MatrixXd full_design(const ModelData& data)
{
    Eigen::MatrixXd d(data.rows(), data.x.cols() + data.z.cols());
    d << data.x, data.z;
    return d;
}

double normal_two_sided_p(double z)
{
    return std::erfc(std::abs(z) / std::numbers::sqrt2);
}

WaldResult wald_glm_test(const ModelData& data, const Family& family, Eigen::Index column,
                         const IrlsOptions& options)
{
    data.validate(family);
    check_tested_column(data, column);
    const GlmFit fit = fit_glm(full_design(data), data.y, data.offset_or_zero(), family, options);
    const Eigen::MatrixXd cov = weighted_cross_inverse(fit.design, fit.w_diag);

    WaldResult out;
    out.converged = fit.converged;
    out.estimate = fit.coefficients[column];
    out.std_error = std::sqrt(cov(column, column));
    out.z = out.estimate / out.std_error;
    out.chi_square = out.z * out.z;
    out.p_value = normal_two_sided_p(out.z);
    return out;
}

SandwichFit gee_independence_fit(const ModelData& data, const Family& family,
                                 const IrlsOptions& options)
{
    data.validate(family);
    // With R = I the estimating equation is the GLM score equation.
    const GlmFit fit = fit_glm(full_design(data), data.y, data.offset_or_zero(), family, options);

    SandwichFit out;
    out.beta_hat = fit.coefficients;
    out.converged = fit.converged;
    out.clusters = block_structure(data.cluster);
    out.model_variance = weighted_cross_inverse(fit.design, fit.w_diag);
    out.sandwich_variance = sandwich_variance(out, data, family);
    return out;
}

Eigen::MatrixXd sandwich_variance(const SandwichFit& fit, const ModelData& data,
                                  const Family& family)
{
    const Eigen::MatrixXd design = full_design(data);
    if (fit.beta_hat.size() != design.cols()) {
        throw InputError("coefficient vector does not match the full design");
    }
    const Eigen::VectorXd eta = design * fit.beta_hat + data.offset_or_zero();
    const Eigen::VectorXd mu = family.inverse_link(eta);
    const Eigen::VectorXd dmu = family.mean_derivative(eta);
    // The dispersion cancels between bread and meat; unit scale is used.
    const Eigen::VectorXd var = family.variance(family.clamp_mean(mu), 1.0);
    const Eigen::VectorXd resid = data.y - mu;

    // Row i of dmu/dbeta' is dmu_i * d_i; A_j = V_j is diagonal.
    const Eigen::MatrixXd grad = dmu.asDiagonal() * design;
    const Eigen::VectorXd inv_var = var.cwiseInverse();
    const Eigen::Index k = design.cols();

    const BlockStructure& clusters =
        fit.clusters.n == static_cast<std::size_t>(data.rows()) ? fit.clusters
                                                                 : block_structure(data.cluster);
    Eigen::MatrixXd bread = Eigen::MatrixXd::Zero(k, k);
    Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(k, k);
    Eigen::VectorXd u(k);
    for (const auto& block : clusters.blocks) {
        u.setZero();
        for (Eigen::Index i : block) {
            bread.noalias() += inv_var[i] * grad.row(i).transpose() * grad.row(i);
            u.noalias() += grad.row(i).transpose() * (inv_var[i] * resid[i]);
        }
        meat.noalias() += u * u.transpose();
    }

    const Eigen::LDLT<Eigen::MatrixXd> ldlt(bread);
    const double scale = bread.diagonal().cwiseAbs().maxCoeff();
    const auto d = ldlt.vectorD();
    if (ldlt.info() != Eigen::Success || !(scale > 0.0) ||
        d.cwiseAbs().minCoeff() <= 1e-12 * scale) {
        throw SingularDesignError("sandwich bread matrix is singular");
    }
    const Eigen::MatrixXd bread_inv = ldlt.solve(Eigen::MatrixXd::Identity(k, k));
    Eigen::MatrixXd out = bread_inv * meat * bread_inv;
    return 0.5 * (out + out.transpose());
}

WaldResult gee_wald_test(const SandwichFit& fit, Eigen::Index column)
{
    if (column < 0 || column >= fit.beta_hat.size()) {
        throw InputError("coefficient index " + std::to_string(column) + " out of range");
    }
    const double var = fit.sandwich_variance(column, column);
    if (!(var > 0.0)) {
        throw DegenerateVarianceError("robust standard error is zero");
    }
    WaldResult out;
    out.converged = fit.converged;
    out.estimate = fit.beta_hat[column];
    out.std_error = std::sqrt(var);
    out.z = out.estimate / out.std_error;
    out.chi_square = out.z * out.z;
    out.p_value = normal_two_sided_p(out.z);
    return out;
}

}  // namespace flipscore
