#include "prep/near_dup.hpp"

#include "prep/parallel.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

namespace prep {

std::vector<PerceptualHash> hash_frames(const FrameSet& frames, unsigned jobs) {
    std::vector<PerceptualHash> hashes(frames.size());
    parallel_for(frames.size(), jobs, [&](std::size_t i) { hashes[i] = phash64(frames.frames[i]); });
    return hashes;
}

std::vector<DuplicateCluster> cluster_hashes(std::span<const PerceptualHash> hashes, int h_s) {
    if (h_s < 0 || h_s > 64) {
        throw std::invalid_argument("h_s must be in [0, 64]");
    }
    std::vector<PerceptualHash> ordered(hashes.begin(), hashes.end());
    std::sort(ordered.begin(), ordered.end(),
              [](const PerceptualHash& a, const PerceptualHash& b) { return a.frame < b.frame; });

    BKTree tree;
    for (const auto& h : ordered) {
        tree.insert(h);
    }

    std::set<FrameId> clustered;
    std::vector<DuplicateCluster> clusters;
    for (const auto& seed : ordered) {
        if (clustered.contains(seed.frame)) {
            continue;
        }
        auto matches = tree.query(seed.bits, h_s);
        std::sort(matches.begin(), matches.end(),
                  [](const PerceptualHash& a, const PerceptualHash& b) { return a.frame < b.frame; });
        DuplicateCluster cluster{seed.frame, {}, h_s};
        for (const auto& m : matches) {
            if (m.frame == seed.frame || clustered.contains(m.frame)) {
                continue;
            }
            cluster.members.push_back({m.frame, hamming(seed.bits, m.bits)});
        }
        if (cluster.members.empty()) {
            continue;
        }
        clustered.insert(seed.frame);
        for (const auto& m : cluster.members) {
            clustered.insert(m.frame);
        }
        clusters.push_back(std::move(cluster));
    }
    return clusters;
}

std::vector<DuplicateCluster> find_duplicates(const FrameSet& frames, int h_s, unsigned jobs) {
    if (frames.provenance != Provenance::deblurred) {
        throw std::invalid_argument(std::string("find_duplicates: expected deblurred frames, got ") +
                                    to_string(frames.provenance));
    }
    const auto hashes = hash_frames(frames, jobs);
    return cluster_hashes(hashes, h_s);
}

FrameSet reduce_duplicates(const FrameSet& frames, std::span<const DuplicateCluster> clusters) {
    std::set<FrameId> present;
    for (const auto& f : frames.frames) {
        present.insert(f.id());
    }
    std::set<FrameId> removed;
    for (const auto& c : clusters) {
        if (!present.contains(c.representative)) {
            throw std::invalid_argument("reduce_duplicates: unknown representative " + c.representative.str());
        }
        for (const auto& m : c.members) {
            if (!present.contains(m.frame)) {
                throw std::invalid_argument("reduce_duplicates: unknown member " + m.frame.str());
            }
            removed.insert(m.frame);
        }
    }
    FrameSet out;
    out.provenance = Provenance::deduped;
    for (const auto& f : frames.frames) {
        if (!removed.contains(f.id())) {
            out.frames.push_back(f);
        }
    }
    return out;
}

}  // namespace prep
