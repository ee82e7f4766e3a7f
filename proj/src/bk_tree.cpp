#include "prep/bk_tree.hpp"

#include <stdexcept>

namespace prep {

void BKTree::insert(const PerceptualHash& h) {
    if (!ids_.insert(h.frame).second) {
        throw std::invalid_argument("BKTree: duplicate frame id " + h.frame.str());
    }
    ++size_;
    if (nodes_.empty()) {
        nodes_.push_back({h, {}, {}});
        return;
    }
    std::size_t current = 0;
    for (;;) {
        const int d = hamming(nodes_[current].hash.bits, h.bits);
        if (d == 0) {
            nodes_[current].same.push_back(h);
            return;
        }
        const auto it = nodes_[current].children.find(d);
        if (it == nodes_[current].children.end()) {
            nodes_[current].children.emplace(d, nodes_.size());
            nodes_.push_back({h, {}, {}});
            return;
        }
        current = it->second;
    }
}

std::vector<PerceptualHash> BKTree::query(std::uint64_t q, int radius) const {
    if (radius < 0 || radius > 64) {
        throw std::invalid_argument("BKTree::query: radius must be in [0, 64]");
    }
    std::vector<PerceptualHash> found;
    if (nodes_.empty()) {
        return found;
    }
    std::vector<std::size_t> stack{0};
    while (!stack.empty()) {
        const Node& node = nodes_[stack.back()];
        stack.pop_back();
        const int d = hamming(node.hash.bits, q);
        if (d <= radius) {
            found.push_back(node.hash);
            found.insert(found.end(), node.same.begin(), node.same.end());
        }
        // triangle inequality: only edges in [d - r, d + r] can hold matches
        for (auto it = node.children.lower_bound(d - radius); it != node.children.end() && it->first <= d + radius;
             ++it) {
            stack.push_back(it->second);
        }
    }
    return found;
}

bool BKTree::check_invariants() const {
    for (const auto& node : nodes_) {
        for (const auto& s : node.same) {
            if (s.bits != node.hash.bits) {
                return false;
            }
        }
        for (const auto& [edge, child] : node.children) {
            if (edge < 1 || edge > 64 || hamming(node.hash.bits, nodes_[child].hash.bits) != edge) {
                return false;
            }
        }
    }
    return true;
}

}  // namespace prep
