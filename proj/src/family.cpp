#include "flipscore/family.hpp"

#include <cmath>

#include "flipscore/error.hpp"

namespace flipscore {

double logistic(double eta) noexcept
{
    if (eta >= 0.0) {
        return 1.0 / (1.0 + std::exp(-eta));
    }
    const double e = std::exp(eta);
    return e / (1.0 + e);
}

Family Family::gaussian(std::optional<double> known_dispersion)
{
    if (known_dispersion && !(*known_dispersion > 0.0)) {
        throw InputError("gaussian dispersion must be positive");
    }
    return Family(FamilyKind::GaussianIdentity, known_dispersion);
}

Family Family::from_name(std::string_view name)
{
    if (name == "binomial" || name == "binomial-logit") {
        return binomial();
    }
    if (name == "poisson" || name == "poisson-log") {
        return poisson();
    }
    if (name == "gaussian" || name == "gaussian-identity") {
        return gaussian();
    }
    throw InputError("unknown family '" + std::string(name) +
                     "' (expected binomial, poisson or gaussian)");
}

std::string Family::name() const
{
    switch (kind_) {
    case FamilyKind::BinomialLogit: return "binomial";
    case FamilyKind::PoissonLog: return "poisson";
    case FamilyKind::GaussianIdentity: return "gaussian";
    }
    return "unknown";
}

Eigen::VectorXd Family::link(const Eigen::VectorXd& mu) const
{
    switch (kind_) {
    case FamilyKind::BinomialLogit:
        return mu.unaryExpr([](double m) { return std::log(m / (1.0 - m)); });
    case FamilyKind::PoissonLog:
        return mu.array().log().matrix();
    case FamilyKind::GaussianIdentity:
        return mu;
    }
    return mu;
}

Eigen::VectorXd Family::inverse_link(const Eigen::VectorXd& eta) const
{
    switch (kind_) {
    case FamilyKind::BinomialLogit:
        return eta.unaryExpr([](double e) { return logistic(e); });
    case FamilyKind::PoissonLog:
        return eta.array().exp().matrix();
    case FamilyKind::GaussianIdentity:
        return eta;
    }
    return eta;
}

Eigen::VectorXd Family::variance(const Eigen::VectorXd& mu, double dispersion) const
{
    const Eigen::Index n = mu.size();
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double m = mu[i];
        switch (kind_) {
        case FamilyKind::BinomialLogit:
            if (!(m > 0.0 && m < 1.0)) {
                throw BoundaryError("binomial mean " + std::to_string(m) +
                                        " at index " + std::to_string(i) +
                                        " is outside (0, 1)",
                                    static_cast<std::size_t>(i));
            }
            v[i] = m * (1.0 - m);
            break;
        case FamilyKind::PoissonLog:
            if (!(m > 0.0)) {
                throw BoundaryError("poisson mean " + std::to_string(m) + " at index " +
                                        std::to_string(i) + " is not positive",
                                    static_cast<std::size_t>(i));
            }
            v[i] = m;
            break;
        case FamilyKind::GaussianIdentity:
            v[i] = dispersion;
            break;
        }
    }
    return v;
}

Eigen::VectorXd Family::mean_derivative(const Eigen::VectorXd& eta) const
{
    switch (kind_) {
    case FamilyKind::BinomialLogit:
        return eta.unaryExpr([](double e) {
            const double m = logistic(e);
            return m * (1.0 - m);
        });
    case FamilyKind::PoissonLog:
        return eta.array().exp().matrix();
    case FamilyKind::GaussianIdentity:
        return Eigen::VectorXd::Ones(eta.size());
    }
    return Eigen::VectorXd::Ones(eta.size());
}

namespace {

// y*log(y/mu) with the 0*log(0) = 0 convention.
double ylogy(double y, double mu)
{
    return y > 0.0 ? y * std::log(y / mu) : 0.0;
}

}  // namespace

double Family::deviance(const Eigen::VectorXd& y, const Eigen::VectorXd& mu) const
{
    double dev = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        switch (kind_) {
        case FamilyKind::BinomialLogit:
            dev += 2.0 * (ylogy(y[i], mu[i]) + ylogy(1.0 - y[i], 1.0 - mu[i]));
            break;
        case FamilyKind::PoissonLog:
            dev += 2.0 * (ylogy(y[i], mu[i]) - (y[i] - mu[i]));
            break;
        case FamilyKind::GaussianIdentity: {
            const double r = y[i] - mu[i];
            dev += r * r;
            break;
        }
        }
    }
    return dev;
}

void Family::validate_response(const Eigen::VectorXd& y) const
{
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double v = y[i];
        if (!std::isfinite(v)) {
            throw InputError("response at row " + std::to_string(i + 1) + " is not finite");
        }
        if (kind_ == FamilyKind::BinomialLogit && v != 0.0 && v != 1.0) {
            throw InputError("binomial response at row " + std::to_string(i + 1) +
                             " is not 0 or 1");
        }
        if (kind_ == FamilyKind::PoissonLog && (v < 0.0 || v != std::floor(v))) {
            throw InputError("poisson response at row " + std::to_string(i + 1) +
                             " is not a nonnegative integer");
        }
    }
}

Eigen::VectorXd Family::initial_mean(const Eigen::VectorXd& y) const
{
    switch (kind_) {
    case FamilyKind::BinomialLogit:
        return ((y.array() + 0.5) / 2.0).matrix();
    case FamilyKind::PoissonLog:
        return (y.array() + 0.5).matrix();
    case FamilyKind::GaussianIdentity:
        return y;
    }
    return y;
}

Eigen::VectorXd Family::clamp_mean(const Eigen::VectorXd& mu) const
{
    switch (kind_) {
    case FamilyKind::BinomialLogit:
        return mu.cwiseMax(kMeanClamp).cwiseMin(1.0 - kMeanClamp);
    case FamilyKind::PoissonLog:
        return mu.cwiseMax(kMeanClamp);
    case FamilyKind::GaussianIdentity:
        return mu;
    }
    return mu;
}

}  // namespace flipscore
