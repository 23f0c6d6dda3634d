#include "flipscore/simulate.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/normal.hpp>

#include "flipscore/baselines.hpp"
#include "flipscore/error.hpp"
#include "flipscore/flip_test.hpp"
#include "flipscore/rng.hpp"

namespace flipscore {

namespace {

constexpr std::uint64_t kDataStream = 0x64617461;  // "data"
constexpr std::uint64_t kFlipStream = 0x666c6970;  // "flip"
constexpr double kPoissonMeanLimit = 1e7;

// Knuth's product method on chunks of mean <= 30.
double draw_poisson(CounterStream& rng, double mean)
{
    if (!(mean <= kPoissonMeanLimit)) {
        throw InputError("poisson mean " + std::to_string(mean) + " is too large to simulate");
    }
    double total = 0.0;
    while (mean > 0.0) {
        const double chunk = std::min(mean, 30.0);
        mean -= chunk;
        const double limit = std::exp(-chunk);
        double prod = rng.uniform();
        while (prod > limit) {
            total += 1.0;
            prod *= rng.uniform();
        }
    }
    return total;
}

double test_p_value(Method method, const ModelData& data, const Scenario& sc,
                    std::size_t rep, SimResult& result, MethodSummary& summary)
{
    try {
        switch (method) {
        case Method::FlipScores: {
            FlipPlan plan;
            plan.num_flips = sc.flips;
            plan.seed = derive_seed(sc.seed, kFlipStream, rep);
            plan.blocks = block_structure(data.cluster);
            const auto res = flip_test(data, sc.family, plan, Alternative::TwoSided, 0);
            result.degenerate_flips += res.degenerate_flips;
            return res.p_values[0];
        }
        case Method::GlmWald: {
            const auto res = wald_glm_test(data, sc.family, 0);
            if (!res.converged || !std::isfinite(res.p_value)) {
                break;
            }
            return res.p_value;
        }
        case Method::Gee: {
            const auto fit = gee_independence_fit(data, sc.family);
            if (!fit.converged) {
                break;
            }
            const auto res = gee_wald_test(fit, 0);
            if (!std::isfinite(res.p_value)) {
                break;
            }
            return res.p_value;
        }
        }
    } catch (const NumericalError&) {
        // counted below
    }
    ++summary.failures;
    ++result.nonconverged;
    return 1.0;
}

}  // namespace

NuisanceMode nuisance_mode_from_name(std::string_view name)
{
    if (name == "cluster-level") {
        return NuisanceMode::ClusterLevel;
    }
    if (name == "within-uncorrelated") {
        return NuisanceMode::WithinUncorrelated;
    }
    if (name == "within-correlated") {
        return NuisanceMode::WithinCorrelated;
    }
    throw InputError("unknown nuisance mode '" + std::string(name) + "'");
}

std::string to_string(NuisanceMode mode)
{
    switch (mode) {
    case NuisanceMode::ClusterLevel: return "cluster-level";
    case NuisanceMode::WithinUncorrelated: return "within-uncorrelated";
    case NuisanceMode::WithinCorrelated: return "within-correlated";
    }
    return "cluster-level";
}

Method method_from_name(std::string_view name)
{
    if (name == "flipscores") {
        return Method::FlipScores;
    }
    if (name == "glm-wald") {
        return Method::GlmWald;
    }
    if (name == "gee") {
        return Method::Gee;
    }
    throw InputError("unknown method '" + std::string(name) +
                     "' (expected flipscores, glm-wald or gee)");
}

std::string to_string(Method method)
{
    switch (method) {
    case Method::FlipScores: return "flipscores";
    case Method::GlmWald: return "glm-wald";
    case Method::Gee: return "gee";
    }
    return "flipscores";
}

void Scenario::validate() const
{
    if (clusters < 2) {
        throw InputError("scenario needs N >= 2 clusters");
    }
    if (per_cluster < 2) {
        throw InputError("scenario needs n_per_cluster >= 2");
    }
    if (reps < 1) {
        throw InputError("scenario needs reps >= 1");
    }
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw InputError("alpha must be in (0, 1)");
    }
    if (!(random_sd >= 0.0)) {
        throw InputError("random_sd must be nonnegative");
    }
    if (!(std::abs(nuisance_correlation) < 1.0)) {
        throw InputError("nuisance correlation must be in (-1, 1)");
    }
    if (methods.empty()) {
        throw InputError("scenario lists no methods");
    }
    if (flips < 2 && std::find(methods.begin(), methods.end(), Method::FlipScores) != methods.end()) {
        throw InputError("flipscores needs at least 2 flips");
    }
}

bool Scenario::documented_limitation() const
{
    return mode == NuisanceMode::WithinCorrelated && random_slope && random_sd > 0.0 &&
           family.kind() != FamilyKind::GaussianIdentity;
}

ModelData simulate_cluster_dataset(const Scenario& scenario, std::size_t rep_index)
{
    return simulate_cluster_draw(scenario, rep_index).data;
}

SimulatedDraw simulate_cluster_draw(const Scenario& sc, std::size_t rep_index)
{
    sc.validate();
    CounterStream rng(derive_seed(sc.seed, kDataStream, rep_index), 0);
    const std::size_t n = sc.clusters * sc.per_cluster;
    const double rho = sc.nuisance_correlation;
    const double rho_c = std::sqrt(1.0 - rho * rho);

    SimulatedDraw draw;
    ModelData& data = draw.data;
    draw.mean.resize(static_cast<Eigen::Index>(n));
    data.y.resize(static_cast<Eigen::Index>(n));
    data.x.resize(static_cast<Eigen::Index>(n), 1);
    data.z.resize(static_cast<Eigen::Index>(n), 2);
    data.cluster.resize(n);
    data.x_names = {"x"};
    data.z_names = {"(Intercept)", "z"};

    Eigen::Index row = 0;
    for (std::size_t j = 0; j < sc.clusters; ++j) {
        const double u = sc.random_sd * rng.normal();
        const double d = sc.random_slope ? sc.random_sd * rng.normal() : 0.0;
        const double z_cluster = rng.normal();
        for (std::size_t i = 0; i < sc.per_cluster; ++i, ++row) {
            const double x = rng.normal();
            double z = z_cluster;
            if (sc.mode == NuisanceMode::WithinUncorrelated) {
                z = rng.normal();
            } else if (sc.mode == NuisanceMode::WithinCorrelated) {
                z = rho * x + rho_c * rng.normal();
            }
            const double eta = x * sc.beta + z * sc.gamma + u + d * x;
            double y = 0.0;
            double mean = eta;
            switch (sc.family.kind()) {
            case FamilyKind::BinomialLogit:
                mean = logistic(eta);
                y = rng.bernoulli(mean) ? 1.0 : 0.0;
                break;
            case FamilyKind::PoissonLog:
                mean = std::exp(eta);
                y = draw_poisson(rng, mean);
                break;
            case FamilyKind::GaussianIdentity:
                y = eta + std::sqrt(sc.family.fixed_dispersion()) * rng.normal();
                break;
            }
            draw.mean[row] = mean;
            data.y[row] = y;
            data.x(row, 0) = x;
            data.z(row, 0) = 1.0;
            data.z(row, 1) = z;
            data.cluster[static_cast<std::size_t>(row)] = static_cast<std::int64_t>(j + 1);
        }
    }
    return draw;
}

const MethodSummary& SimResult::summary(Method method) const
{
    for (const auto& m : methods) {
        if (m.method == method) {
            return m;
        }
    }
    throw InputError("method '" + to_string(method) + "' was not run");
}

SimResult run_scenario(const Scenario& scenario, const ProgressFn& progress)
{
    scenario.validate();
    SimResult result;
    result.scenario = scenario;
    result.documented_limitation = scenario.documented_limitation();
    for (Method m : scenario.methods) {
        MethodSummary s;
        s.method = m;
        s.reps = scenario.reps;
        result.methods.push_back(s);
    }

    for (std::size_t rep = 0; rep < scenario.reps; ++rep) {
        const ModelData data = simulate_cluster_dataset(scenario, rep);
        for (auto& summary : result.methods) {
            const double p = test_p_value(summary.method, data, scenario, rep, result, summary);
            summary.rejections += p <= scenario.alpha;
        }
        if (progress) {
            progress(rep + 1, scenario.reps);
        }
    }

    for (auto& summary : result.methods) {
        summary.rate = static_cast<double>(summary.rejections) / static_cast<double>(summary.reps);
        std::tie(summary.lower, summary.upper) =
            rejection_interval(summary.rejections, summary.reps, 0.95);
    }
    return result;
}

std::pair<double, double> rejection_interval(std::size_t count, std::size_t reps, double level)
{
    if (reps == 0 || count > reps) {
        throw InputError("rejection interval needs 0 <= count <= reps and reps > 0");
    }
    if (!(level > 0.0 && level < 1.0)) {
        throw InputError("confidence level must be in (0, 1)");
    }
    const boost::math::normal_distribution<double> normal;
    const double z = boost::math::quantile(normal, 0.5 + level / 2.0);
    const double n = static_cast<double>(reps);
    const double p = static_cast<double>(count) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double half = z / denom * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
    const double lower = count == 0 ? 0.0 : std::max(0.0, center - half);
    const double upper = count == reps ? 1.0 : std::min(1.0, center + half);
    return {lower, upper};
}

}  // namespace flipscore
