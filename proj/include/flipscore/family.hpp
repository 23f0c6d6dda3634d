#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace flipscore {

enum class FamilyKind { BinomialLogit, PoissonLog, GaussianIdentity };

/// Exponential-family specification with its canonical link.
///
/// Binomial and Poisson fix the dispersion at 1. Gaussian estimates it by
/// default; a known dispersion can be pinned with `gaussian(phi)`.
class Family {
public:
    static Family binomial() { return Family(FamilyKind::BinomialLogit, std::nullopt); }
    static Family poisson() { return Family(FamilyKind::PoissonLog, std::nullopt); }
    static Family gaussian(std::optional<double> known_dispersion = std::nullopt);

    /// Accepts "binomial", "poisson", "gaussian" (and the explicit link forms
    /// "binomial-logit", "poisson-log", "gaussian-identity").
    static Family from_name(std::string_view name);

    FamilyKind kind() const noexcept { return kind_; }
    std::string name() const;

    bool estimates_dispersion() const noexcept
    {
        return kind_ == FamilyKind::GaussianIdentity && !known_dispersion_;
    }
    /// Dispersion used when it is not estimated (1 for binomial/poisson).
    double fixed_dispersion() const noexcept { return known_dispersion_.value_or(1.0); }

    Eigen::VectorXd link(const Eigen::VectorXd& mu) const;
    Eigen::VectorXd inverse_link(const Eigen::VectorXd& eta) const;

    /// var(y) as a function of the mean. Throws BoundaryError when a mean is
    /// outside the open mean space.
    Eigen::VectorXd variance(const Eigen::VectorXd& mu, double dispersion = 1.0) const;

    /// dmu/deta evaluated at eta.
    Eigen::VectorXd mean_derivative(const Eigen::VectorXd& eta) const;

    double deviance(const Eigen::VectorXd& y, const Eigen::VectorXd& mu) const;

    /// Throws InputError naming the first row that is not a valid response.
    void validate_response(const Eigen::VectorXd& y) const;

    /// IRLS starting means.
    Eigen::VectorXd initial_mean(const Eigen::VectorXd& y) const;

    /// Pulls fitted means off the boundary so V and W stay finite.
    Eigen::VectorXd clamp_mean(const Eigen::VectorXd& mu) const;

    static constexpr double kMeanClamp = 1e-10;

private:
    Family(FamilyKind kind, std::optional<double> known_dispersion)
        : kind_(kind), known_dispersion_(known_dispersion) {}

    FamilyKind kind_;
    std::optional<double> known_dispersion_;
};

/// Numerically stable logistic function.
double logistic(double eta) noexcept;

}  // namespace flipscore
