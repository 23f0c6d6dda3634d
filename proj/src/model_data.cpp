#include "flipscore/model_data.hpp"

#include "flipscore/error.hpp"

namespace flipscore {

Eigen::VectorXd ModelData::offset_or_zero() const
{
    if (offset.size() == 0) {
        return Eigen::VectorXd::Zero(rows());
    }
    return offset;
}

void ModelData::validate(const Family& family) const
{
    const Eigen::Index n = rows();
    if (n == 0) {
        throw InputError("model data has no rows");
    }
    auto check = [n](Eigen::Index got, const char* what) {
        if (got != n) {
            throw InputError(std::string(what) + " has " + std::to_string(got) +
                             " rows, expected " + std::to_string(n));
        }
    };
    check(x.rows(), "tested design");
    check(z.rows(), "nuisance design");
    check(static_cast<Eigen::Index>(cluster.size()), "cluster label vector");
    if (offset.size() != 0) {
        check(offset.size(), "offset");
    }
    if (x.cols() < 1) {
        throw InputError("tested design needs at least one column");
    }
    if (!x.allFinite() || !z.allFinite()) {
        throw InputError("design matrices contain non-finite values");
    }
    family.validate_response(y);
}

std::string ModelData::x_name(Eigen::Index k) const
{
    if (k >= 0 && static_cast<std::size_t>(k) < x_names.size()) {
        return x_names[static_cast<std::size_t>(k)];
    }
    return "x" + std::to_string(k + 1);
}

}  // namespace flipscore
