#pragma once

#include "prep/phash.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <vector>

namespace prep {

/// Burkhard-Keller tree over 64-bit hashes under Hamming distance.
///
/// Each child hangs off its parent on the edge labelled with their distance
/// (1..64). Hashes identical to a node's hash are kept in that node's
/// same-hash list instead of on a zero edge. Single writer during build;
/// const queries are safe to run concurrently afterwards.
class BKTree {
public:
    /// Throws std::invalid_argument if the frame id is already present.
    void insert(const PerceptualHash& h);

    /// Every stored hash within `radius` (0..64) of `query`, in no particular order.
    std::vector<PerceptualHash> query(std::uint64_t query, int radius) const;

    std::size_t size() const { return size_; }
    bool empty() const { return size_ == 0; }

    /// Checks the edge-label invariant on every node; used by tests.
    bool check_invariants() const;

private:
    struct Node {
        PerceptualHash hash;
        std::vector<PerceptualHash> same;
        std::map<int, std::size_t> children;  // edge distance -> node index
    };

    std::vector<Node> nodes_;  // nodes_[0] is the root
    std::set<FrameId> ids_;
    std::size_t size_ = 0;
};

}  // namespace prep
