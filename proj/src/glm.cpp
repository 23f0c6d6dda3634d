#include "flipscore/glm.hpp"

#include <cmath>
#include <limits>

#include "flipscore/error.hpp"

namespace flipscore {

namespace {

constexpr double kRankThreshold = 1e-10;
// |eta| beyond this puts a logistic mean within 1e-13 of 0 or 1.
constexpr double kSeparationEta = 30.0;

Eigen::ColPivHouseholderQR<Eigen::MatrixXd> weighted_qr(const Eigen::MatrixXd& design,
                                                        const Eigen::VectorXd& sqrt_w)
{
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(sqrt_w.asDiagonal() * design);
    qr.setThreshold(kRankThreshold);
    if (qr.rank() < design.cols()) {
        throw SingularDesignError("weighted design is rank deficient (rank " +
                                  std::to_string(qr.rank()) + " < " +
                                  std::to_string(design.cols()) + " columns)");
    }
    return qr;
}

bool at_boundary(const Family& family, const Eigen::VectorXd& eta)
{
    switch (family.kind()) {
    case FamilyKind::BinomialLogit:
        return eta.size() > 0 && eta.cwiseAbs().maxCoeff() > kSeparationEta;
    case FamilyKind::PoissonLog:
        return eta.size() > 0 && eta.minCoeff() < -kSeparationEta;
    case FamilyKind::GaussianIdentity:
        return false;
    }
    return false;
}

}  // namespace

GlmFit fit_glm(const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
               const Eigen::VectorXd& offset, const Family& family, const IrlsOptions& options)
{
    const Eigen::Index n = y.size();
    const Eigen::Index q = design.cols();
    if (design.rows() != n || offset.size() != n) {
        throw InputError("design, response and offset row counts differ");
    }
    if (q >= n) {
        throw SingularDesignError("design has " + std::to_string(q) +
                                  " columns for " + std::to_string(n) + " rows");
    }

    GlmFit fit;
    fit.design = design;
    fit.y = y;
    fit.family = family;

    Eigen::VectorXd mu = family.initial_mean(y);
    Eigen::VectorXd eta = family.link(mu);
    Eigen::VectorXd coef = Eigen::VectorXd::Zero(q);
    double dev_old = family.deviance(y, family.clamp_mean(mu));
    bool have_coef = false;

    struct Step {
        Eigen::VectorXd coef, eta, mu;
        double dev;
    };
    const auto irls_step = [&](int iter) {
        const Eigen::VectorXd dmu = family.mean_derivative(eta);
        const Eigen::VectorXd var = family.variance(family.clamp_mean(mu));
        const Eigen::VectorXd w = dmu.array().square() / var.array();
        const Eigen::VectorXd sqrt_w = w.cwiseSqrt();
        const Eigen::VectorXd working =
            (eta - offset).array() + (y - mu).array() / dmu.array().max(1e-300);

        auto qr = weighted_qr(design, sqrt_w);
        Step next{qr.solve(sqrt_w.asDiagonal() * working), {}, {}, 0.0};
        next.eta = design * next.coef + offset;
        next.mu = family.inverse_link(next.eta);
        next.dev = family.deviance(y, family.clamp_mean(next.mu));

        // Step halving only guards against overflow; canonical-link IRLS
        // from these starts does not otherwise need it.
        for (int halve = 0; halve < 30 && have_coef && !std::isfinite(next.dev); ++halve) {
            next.coef = 0.5 * (next.coef + coef);
            next.eta = design * next.coef + offset;
            next.mu = family.inverse_link(next.eta);
            next.dev = family.deviance(y, family.clamp_mean(next.mu));
        }
        if (!std::isfinite(next.dev)) {
            throw NonConvergenceError("IRLS deviance is not finite at iteration " +
                                      std::to_string(iter));
        }
        return next;
    };

    for (int iter = 1; iter <= options.max_iter; ++iter) {
        fit.iterations = iter;
        Step next = irls_step(iter);
        coef = std::move(next.coef);
        eta = std::move(next.eta);
        mu = std::move(next.mu);
        have_coef = true;

        const double change = std::abs(next.dev - dev_old) / (std::abs(next.dev) + 0.1);
        dev_old = next.dev;
        if (change < options.tol) {
            fit.converged = true;
            break;
        }
    }
    // Polishing step once the deviance has settled.
    if (fit.converged && !at_boundary(family, eta)) {
        Step next = irls_step(fit.iterations + 1);
        coef = std::move(next.coef);
        eta = std::move(next.eta);
        mu = std::move(next.mu);
        dev_old = next.dev;
    }

    fit.coefficients = coef;
    fit.eta = eta;
    fit.mu = mu;
    fit.deviance = dev_old;
    fit.boundary = at_boundary(family, eta);
    if (fit.boundary) {
        fit.converged = false;
    }

    const Eigen::VectorXd mu_c = family.clamp_mean(mu);
    if (family.estimates_dispersion()) {
        const double rss = (y - mu).squaredNorm();
        fit.dispersion = rss / static_cast<double>(n - q);
    } else {
        fit.dispersion = family.fixed_dispersion();
    }
    // A zero-residual gaussian fit keeps unit scale for V; flip p-values do
    // not depend on the dispersion.
    const double v_scale = fit.dispersion > 0.0 ? fit.dispersion : 1.0;
    fit.mean_deriv = family.mean_derivative(eta);
    fit.v_diag = family.variance(mu_c, v_scale);
    fit.w_diag = fit.mean_deriv.array().square() / fit.v_diag.array();
    return fit;
}

NullFit fit_null(const ModelData& data, const Family& family, const IrlsOptions& options)
{
    return fit_null(data.z, data, family, options);
}

NullFit fit_null(const Eigen::MatrixXd& nuisance, const ModelData& data, const Family& family,
                 const IrlsOptions& options)
{
    family.validate_response(data.y);
    NullFit out;
    static_cast<GlmFit&>(out) = fit_glm(nuisance, data.y, data.offset_or_zero(), family, options);
    return out;
}

WeightedProjector::WeightedProjector(const Eigen::MatrixXd& z, const Eigen::VectorXd& w_diag)
{
    const Eigen::Index n = z.rows();
    const Eigen::Index q = z.cols();
    if (w_diag.size() != n) {
        throw InputError("weight vector length does not match design rows");
    }
    if ((w_diag.array() < 0.0).any()) {
        throw InputError("weights must be nonnegative");
    }
    if (q == 0) {
        basis_.resize(n, 0);
        return;
    }
    if (q > n) {
        throw SingularDesignError("nuisance design has more columns than rows");
    }
    auto qr = weighted_qr(z, w_diag.cwiseSqrt());
    basis_ = qr.householderQ() * Eigen::MatrixXd::Identity(n, q);
}

Eigen::VectorXd WeightedProjector::project(const Eigen::VectorXd& v) const
{
    return basis_ * (basis_.transpose() * v);
}

Eigen::VectorXd WeightedProjector::residual(const Eigen::VectorXd& v) const
{
    return v - project(v);
}

Eigen::MatrixXd WeightedProjector::dense() const
{
    return basis_ * basis_.transpose();
}

Eigen::MatrixXd hat_projection(const Eigen::MatrixXd& z, const Eigen::VectorXd& w_diag)
{
    return WeightedProjector(z, w_diag).dense();
}

Eigen::MatrixXd weighted_cross_inverse(const Eigen::MatrixXd& design,
                                       const Eigen::VectorXd& w_diag)
{
    const auto qr = weighted_qr(design, w_diag.cwiseSqrt());
    // (D'WD)^{-1} = P R^{-1} R^{-T} P'
    const Eigen::Index k = design.cols();
    const Eigen::MatrixXd r =
        qr.matrixR().topLeftCorner(k, k).template triangularView<Eigen::Upper>();
    const Eigen::MatrixXd r_inv =
        r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
    const Eigen::MatrixXd inner = r_inv * r_inv.transpose();
    const auto& perm = qr.colsPermutation();
    Eigen::MatrixXd out = perm * inner * perm.transpose();
    return 0.5 * (out + out.transpose());
}

}  // namespace flipscore
