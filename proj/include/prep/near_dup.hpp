#pragma once

#include "prep/bk_tree.hpp"
#include "prep/ingest.hpp"
#include "prep/phash.hpp"

#include <span>
#include <vector>

namespace prep {

struct ClusterMember {
    FrameId frame;
    int distance = 0;  // Hamming distance to the representative
};

/// A seed frame (kept) and every not-yet-clustered frame within h_s of it (removed).
struct DuplicateCluster {
    FrameId representative;
    std::vector<ClusterMember> members;
    int h_s = 0;
};

/// Hashes every frame; result is in input order.
std::vector<PerceptualHash> hash_frames(const FrameSet& frames, unsigned jobs = 1);

/// Greedy star clustering in FrameId order: each unclustered frame queries the
/// BK-tree at radius h_s and claims every unclustered match. Singletons are dropped.
std::vector<DuplicateCluster> cluster_hashes(std::span<const PerceptualHash> hashes, int h_s);

/// hash_frames + cluster_hashes. Input must have provenance `deblurred`.
std::vector<DuplicateCluster> find_duplicates(const FrameSet& frames, int h_s, unsigned jobs = 1);

/// Drops every cluster member; provenance becomes `deduped`.
FrameSet reduce_duplicates(const FrameSet& frames, std::span<const DuplicateCluster> clusters);

}  // namespace prep
