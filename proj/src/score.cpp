#include "flipscore/score.hpp"

#include <cmath>

#include "flipscore/error.hpp"

namespace flipscore {

namespace {

constexpr double kContrastTol = 1e-10;
constexpr double kVarianceTol = 1e-12;

void check_column(Eigen::Index column, Eigen::Index columns)
{
    if (column < 0 || column >= columns) {
        throw InputError("column index " + std::to_string(column) + " out of range [0, " +
                         std::to_string(columns) + ")");
    }
}

void check_signs(const Eigen::VectorXd& signs, Eigen::Index n)
{
    if (signs.size() != n) {
        throw InputError("sign vector has length " + std::to_string(signs.size()) +
                         ", expected " + std::to_string(n));
    }
}

// n^{-1} (F u)' (I - H) (F u) = n^{-1} (|u|^2 - |Q' F u|^2)
double projected_flip_variance(const Eigen::VectorXd& u, const Eigen::MatrixXd& basis,
                               const Eigen::VectorXd& signs, double floor)
{
    const Eigen::VectorXd fu = signs.cwiseProduct(u);
    const double n = static_cast<double>(u.size());
    const double var = (fu.squaredNorm() - (basis.transpose() * fu).squaredNorm()) / n;
    if (!(var > floor)) {
        throw DegenerateVarianceError("flip variance " + std::to_string(var) +
                                      " is degenerate");
    }
    return var;
}

}  // namespace

Alternative alternative_from_name(std::string_view name)
{
    if (name == "two-sided" || name == "two.sided") {
        return Alternative::TwoSided;
    }
    if (name == "greater") {
        return Alternative::Greater;
    }
    if (name == "less") {
        return Alternative::Less;
    }
    throw InputError("unknown alternative '" + std::string(name) +
                     "' (expected two-sided, greater or less)");
}

std::string to_string(Alternative alt)
{
    switch (alt) {
    case Alternative::TwoSided: return "two-sided";
    case Alternative::Greater: return "greater";
    case Alternative::Less: return "less";
    }
    return "two-sided";
}

double ScoreDecomposition::observed_score(Eigen::Index k) const
{
    return contributions.row(k).sum() / std::sqrt(static_cast<double>(n()));
}

ScoreDecomposition score_decomposition(const NullFit& fit, const Eigen::MatrixXd& x)
{
    if (!fit.converged) {
        throw NonConvergenceError("null model did not converge after " +
                                  std::to_string(fit.iterations) + " iterations");
    }
    const Eigen::Index n = fit.y.size();
    if (x.rows() != n) {
        throw InputError("tested design has " + std::to_string(x.rows()) +
                         " rows, null fit has " + std::to_string(n));
    }

    const WeightedProjector projector(fit.design, fit.w_diag);
    const Eigen::VectorXd sqrt_w = fit.w_diag.cwiseSqrt();
    const Eigen::VectorXd inv_sqrt_v = fit.v_diag.cwiseSqrt().cwiseInverse();

    ScoreDecomposition out;
    out.r = fit.y - fit.mu;
    out.basis = projector.basis();
    out.a.resize(x.cols(), n);
    out.projected.resize(x.cols(), n);
    for (Eigen::Index k = 0; k < x.cols(); ++k) {
        const Eigen::VectorXd u = projector.residual(sqrt_w.cwiseProduct(x.col(k)));
        if (u.norm() < kContrastTol * x.col(k).norm() || u.norm() == 0.0) {
            throw DegenerateContrastError(
                "tested column " + std::to_string(k) + " lies in the span of the nuisance design",
                static_cast<std::size_t>(k));
        }
        out.projected.row(k) = u.transpose();
        out.a.row(k) = u.cwiseProduct(inv_sqrt_v).transpose();
    }
    out.contributions = out.a.array().rowwise() * out.r.transpose().array();
    return out;
}

double flipped_score(const ScoreDecomposition& decomp, const Eigen::VectorXd& signs,
                     Eigen::Index column)
{
    check_column(column, decomp.columns());
    check_signs(signs, decomp.n());
    return decomp.contributions.row(column).dot(signs) /
           std::sqrt(static_cast<double>(decomp.n()));
}

double flip_variance(const Eigen::MatrixXd& x, const NullFit& fit, const Eigen::VectorXd& signs,
                     Eigen::Index column)
{
    check_column(column, x.cols());
    check_signs(signs, fit.y.size());
    const WeightedProjector projector(fit.design, fit.w_diag);
    const Eigen::VectorXd wx = fit.w_diag.cwiseSqrt().cwiseProduct(x.col(column));
    const Eigen::VectorXd u = projector.residual(wx);
    const double floor = kVarianceTol * u.squaredNorm() / static_cast<double>(u.size());
    return projected_flip_variance(u, projector.basis(), signs, floor);
}

double flip_variance(const ScoreDecomposition& decomp, const Eigen::VectorXd& signs,
                     Eigen::Index column)
{
    check_column(column, decomp.columns());
    check_signs(signs, decomp.n());
    const Eigen::VectorXd u = decomp.projected.row(column).transpose();
    const double floor = kVarianceTol * u.squaredNorm() / static_cast<double>(u.size());
    return projected_flip_variance(u, decomp.basis, signs, floor);
}

double standardized_score(double score, double variance)
{
    if (!(variance > 0.0)) {
        throw DegenerateVarianceError("variance must be positive to standardize a score");
    }
    return score / std::sqrt(variance);
}

PValue compute_pvalue(double observed, std::span<const double> flipped, Alternative alt)
{
    PValue p;
    p.flips = flipped.size();
    for (double s : flipped) {
        switch (alt) {
        case Alternative::Greater:
            p.count += s >= observed;
            break;
        case Alternative::Less:
            p.count += s <= observed;
            break;
        case Alternative::TwoSided:
            p.count += std::abs(s) >= std::abs(observed);
            break;
        }
    }
    return p;
}

BlockFlipEvaluator::BlockFlipEvaluator(const ScoreDecomposition& decomp,
                                       const BlockStructure& blocks)
{
    const Eigen::Index n = decomp.n();
    if (static_cast<Eigen::Index>(blocks.n) != n) {
        throw InputError("block structure covers " + std::to_string(blocks.n) +
                         " observations, decomposition has " + std::to_string(n));
    }
    const auto nb = static_cast<Eigen::Index>(blocks.num_blocks());
    const Eigen::Index p = decomp.columns();
    const Eigen::Index q = decomp.basis.cols();
    inv_sqrt_n_ = 1.0 / std::sqrt(static_cast<double>(n));
    inv_n_ = 1.0 / static_cast<double>(n);

    score_sums_ = Eigen::MatrixXd::Zero(p, nb);
    basis_sums_.assign(static_cast<std::size_t>(p), Eigen::MatrixXd::Zero(q, nb));
    projected_sq_.resize(p);
    variance_floor_.resize(p);
    for (Eigen::Index k = 0; k < p; ++k) {
        auto& bsum = basis_sums_[static_cast<std::size_t>(k)];
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto j = static_cast<Eigen::Index>(blocks.block_of[static_cast<std::size_t>(i)]);
            score_sums_(k, j) += decomp.contributions(k, i);
            bsum.col(j) += decomp.basis.row(i).transpose() * decomp.projected(k, i);
        }
        projected_sq_[k] = decomp.projected.row(k).squaredNorm();
        variance_floor_[k] = kVarianceTol * projected_sq_[k] * inv_n_;
    }
}

BlockFlipEvaluator::Value BlockFlipEvaluator::evaluate(const std::vector<int>& block_signs,
                                                       Eigen::Index column) const
{
    const auto& bsum = basis_sums_[static_cast<std::size_t>(column)];
    double score = 0.0;
    Eigen::VectorXd proj = Eigen::VectorXd::Zero(bsum.rows());
    for (Eigen::Index j = 0; j < score_sums_.cols(); ++j) {
        const double s = block_signs[static_cast<std::size_t>(j)];
        score += s * score_sums_(column, j);
        proj.noalias() += s * bsum.col(j);
    }
    return {score * inv_sqrt_n_, (projected_sq_[column] - proj.squaredNorm()) * inv_n_};
}

}  // namespace flipscore
