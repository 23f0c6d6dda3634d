#include "flipscore/blocks.hpp"

#include <unordered_map>

#include "flipscore/error.hpp"
#include "flipscore/rng.hpp"

namespace flipscore {

std::vector<std::size_t> BlockStructure::sizes() const
{
    std::vector<std::size_t> out;
    out.reserve(blocks.size());
    for (const auto& b : blocks) {
        out.push_back(b.size());
    }
    return out;
}

BlockStructure block_structure(const ClusterLabels& labels)
{
    BlockStructure out;
    out.n = labels.size();
    out.block_of.resize(labels.size());
    std::unordered_map<std::int64_t, std::size_t> index;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        auto [it, inserted] = index.try_emplace(labels[i], out.blocks.size());
        if (inserted) {
            out.blocks.emplace_back();
        }
        out.blocks[it->second].push_back(static_cast<Eigen::Index>(i));
        out.block_of[i] = it->second;
    }
    return out;
}

void FlipPlan::validate() const
{
    if (num_flips < 2) {
        throw InvalidPlanError("flip plan needs at least 2 flips (got " +
                               std::to_string(num_flips) + ")");
    }
    if (blocks.num_blocks() == 0) {
        throw InvalidPlanError("flip plan has no blocks");
    }
}

int block_sign(std::uint64_t seed, std::size_t flip, std::size_t block) noexcept
{
    if (flip == 0) {
        return 1;
    }
    // One Philox call yields 128 block signs: counter = (flip, block / 128).
    const std::uint64_t chunk = block / 128;
    const Philox4x32::Counter ctr{
        static_cast<std::uint32_t>(flip), static_cast<std::uint32_t>(std::uint64_t(flip) >> 32),
        static_cast<std::uint32_t>(chunk), static_cast<std::uint32_t>(chunk >> 32)};
    const Philox4x32::Key key{static_cast<std::uint32_t>(seed),
                              static_cast<std::uint32_t>(seed >> 32)};
    const auto bits = Philox4x32::apply(ctr, key);
    const std::size_t bit = block % 128;
    return ((bits[bit / 32] >> (bit % 32)) & 1u) ? 1 : -1;
}

std::vector<int> block_signs(const FlipPlan& plan, std::size_t flip)
{
    const std::size_t nb = plan.blocks.num_blocks();
    std::vector<int> out(nb, 1);
    if (flip == 0) {
        return out;
    }
    const Philox4x32::Key key{static_cast<std::uint32_t>(plan.seed),
                              static_cast<std::uint32_t>(plan.seed >> 32)};
    for (std::size_t chunk = 0; chunk * 128 < nb; ++chunk) {
        const Philox4x32::Counter ctr{static_cast<std::uint32_t>(flip),
                                      static_cast<std::uint32_t>(std::uint64_t(flip) >> 32),
                                      static_cast<std::uint32_t>(chunk),
                                      static_cast<std::uint32_t>(std::uint64_t(chunk) >> 32)};
        const auto bits = Philox4x32::apply(ctr, key);
        for (std::size_t bit = 0; bit < 128 && chunk * 128 + bit < nb; ++bit) {
            out[chunk * 128 + bit] = ((bits[bit / 32] >> (bit % 32)) & 1u) ? 1 : -1;
        }
    }
    return out;
}

Eigen::VectorXd expand_signs(const BlockStructure& blocks, const std::vector<int>& signs)
{
    Eigen::VectorXd out(static_cast<Eigen::Index>(blocks.n));
    for (std::size_t i = 0; i < blocks.n; ++i) {
        out[static_cast<Eigen::Index>(i)] = signs[blocks.block_of[i]];
    }
    return out;
}

Eigen::MatrixXd generate_flips(const FlipPlan& plan)
{
    plan.validate();
    const auto n = static_cast<Eigen::Index>(plan.blocks.n);
    Eigen::MatrixXd out(n, static_cast<Eigen::Index>(plan.num_flips));
    for (std::size_t w = 0; w < plan.num_flips; ++w) {
        out.col(static_cast<Eigen::Index>(w)) = expand_signs(plan.blocks, block_signs(plan, w));
    }
    return out;
}

}  // namespace flipscore
