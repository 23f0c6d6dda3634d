#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "flipscore/family.hpp"

namespace flipscore {

using ClusterLabels = std::vector<std::int64_t>;

/// Response, tested design, nuisance design and cluster labels for one
/// analysis. Rows are observations.
struct ModelData {
    Eigen::VectorXd y;
    Eigen::MatrixXd x;  ///< tested columns, n x p
    Eigen::MatrixXd z;  ///< nuisance columns, n x q (intercept included by the caller)
    ClusterLabels cluster;
    Eigen::VectorXd offset;  ///< empty means all zeros

    std::vector<std::string> x_names;
    std::vector<std::string> z_names;

    Eigen::Index rows() const noexcept { return y.size(); }
    Eigen::VectorXd offset_or_zero() const;

    /// Row-count agreement, p >= 1 and response validity for the family.
    void validate(const Family& family) const;

    /// Name of tested column k, or "x<k+1>" when unnamed.
    std::string x_name(Eigen::Index k) const;
};

}  // namespace flipscore
