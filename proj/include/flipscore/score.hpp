#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "flipscore/blocks.hpp"
#include "flipscore/glm.hpp"

namespace flipscore {

enum class Alternative { TwoSided, Greater, Less };

Alternative alternative_from_name(std::string_view name);
std::string to_string(Alternative alt);

/// Per-observation effective-score contributions for p tested columns.
///
/// Row k of `a` is x_k' W^{1/2} (I - H) V^{-1/2}; the contribution of
/// observation i is a(k, i) * r(i) and the effective score of column k is
/// n^{-1/2} times their sum.
struct ScoreDecomposition {
    Eigen::MatrixXd a;              ///< p x n
    Eigen::VectorXd r;              ///< y - mu_hat
    Eigen::MatrixXd contributions;  ///< p x n
    /// Row k holds (I - H) W^{1/2} x_k, the piece the flip variance needs.
    Eigen::MatrixXd projected;
    /// Orthonormal basis of span(W^{1/2} Z); H = basis * basis'.
    Eigen::MatrixXd basis;

    Eigen::Index n() const noexcept { return r.size(); }
    Eigen::Index columns() const noexcept { return a.rows(); }
    /// S(I) for column k.
    double observed_score(Eigen::Index k) const;
};

/// Throws NonConvergenceError for an unconverged fit and
/// DegenerateContrastError when a column of x is inside span(Z).
ScoreDecomposition score_decomposition(const NullFit& fit, const Eigen::MatrixXd& x);

/// n^{-1/2} sum_i signs_i * contribution(column, i)
double flipped_score(const ScoreDecomposition& decomp, const Eigen::VectorXd& signs,
                     Eigen::Index column);

/// Leading term n^{-1} x'W^{1/2}(I-H)F(I-H)F(I-H)W^{1/2}x of var{S(F)},
/// evaluated from the model directly. Throws DegenerateVarianceError when the
/// result is negligible relative to n^{-1}|W^{1/2}x|^2.
double flip_variance(const Eigen::MatrixXd& x, const NullFit& fit, const Eigen::VectorXd& signs,
                     Eigen::Index column);

/// Same quantity, reusing a decomposition.
double flip_variance(const ScoreDecomposition& decomp, const Eigen::VectorXd& signs,
                     Eigen::Index column);

double standardized_score(double score, double variance);

/// Monte Carlo p-value as count / flips.
struct PValue {
    std::size_t count = 0;
    std::size_t flips = 0;
    double value() const noexcept { return static_cast<double>(count) / static_cast<double>(flips); }
};

/// `flipped` holds all W statistics with the observed one at index 0.
PValue compute_pvalue(double observed, std::span<const double> flipped, Alternative alt);

/// Evaluates S(F) and var{S(F)} for block-constant flips in O(N q) per flip
/// by pre-summing contributions within blocks.
class BlockFlipEvaluator {
public:
    BlockFlipEvaluator(const ScoreDecomposition& decomp, const BlockStructure& blocks);

    struct Value {
        double score;
        double variance;
    };
    Value evaluate(const std::vector<int>& block_signs, Eigen::Index column) const;

    /// Variance below this is treated as degenerate for the column.
    double variance_floor(Eigen::Index column) const { return variance_floor_[column]; }

private:
    double inv_sqrt_n_;
    double inv_n_;
    Eigen::MatrixXd score_sums_;                // p x N
    std::vector<Eigen::MatrixXd> basis_sums_;  // per column: q x N
    Eigen::VectorXd projected_sq_;             // |u_k|^2
    Eigen::VectorXd variance_floor_;
};

}  // namespace flipscore
