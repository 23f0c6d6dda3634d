#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "flipscore/model_data.hpp"

namespace flipscore {

/// Partition of the observations into clusters, in order of first
/// appearance of each label. Within-block index order is preserved.
struct BlockStructure {
    std::size_t n = 0;
    std::vector<std::vector<Eigen::Index>> blocks;
    /// block_of[i] is the block index of observation i.
    std::vector<std::size_t> block_of;

    std::size_t num_blocks() const noexcept { return blocks.size(); }
    std::vector<std::size_t> sizes() const;
};

BlockStructure block_structure(const ClusterLabels& labels);

/// Sign-flip sampling plan. Flip 0 is the identity; flips 1..W-1 draw one
/// +/-1 sign per block.
struct FlipPlan {
    std::size_t num_flips = 500;
    std::uint64_t seed = 0;
    BlockStructure blocks;

    void validate() const;
};

/// Sign of `block` in flip `flip` (0-based; flip 0 is always +1). A pure
/// function of (seed, flip, block).
int block_sign(std::uint64_t seed, std::size_t flip, std::size_t block) noexcept;

/// Block signs of one flip, length N.
std::vector<int> block_signs(const FlipPlan& plan, std::size_t flip);

/// Observation-level signs of one flip, length n.
Eigen::VectorXd expand_signs(const BlockStructure& blocks, const std::vector<int>& block_signs);

/// All W observation-level sign vectors as the columns of an n x W matrix.
Eigen::MatrixXd generate_flips(const FlipPlan& plan);

}  // namespace flipscore
