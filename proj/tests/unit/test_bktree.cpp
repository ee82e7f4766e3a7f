#include "oracles.hpp"

#include "prep/bk_tree.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

namespace {

prep::PerceptualHash ph(std::uint64_t bits, std::uint64_t index) { return {bits, {"A", "0", index}}; }

std::vector<prep::FrameId> sorted_ids(const std::vector<prep::PerceptualHash>& v) {
    std::vector<prep::FrameId> ids;
    for (const auto& h : v) {
        ids.push_back(h.frame);
    }
    std::sort(ids.begin(), ids.end());
    return ids;
}

}  // namespace

TEST(BKTree, EmptyAndRoot) {
    prep::BKTree tree;
    EXPECT_TRUE(tree.empty());
    EXPECT_TRUE(tree.query(0, 64).empty());
    tree.insert(ph(0xff, 0));
    EXPECT_EQ(tree.size(), 1u);
    EXPECT_EQ(tree.query(0xff, 0).size(), 1u);
    EXPECT_TRUE(tree.query(0x0f, 0).empty());
}

TEST(BKTree, EqualHashesShareANode) {
    prep::BKTree tree;
    tree.insert(ph(42, 0));
    tree.insert(ph(42, 1));
    tree.insert(ph(42, 2));
    EXPECT_EQ(tree.size(), 3u);
    EXPECT_EQ(tree.query(42, 0).size(), 3u);
    EXPECT_TRUE(tree.check_invariants());
}

TEST(BKTree, DuplicateFrameIdRejected) {
    prep::BKTree tree;
    tree.insert(ph(1, 7));
    EXPECT_THROW(tree.insert(ph(2, 7)), std::invalid_argument);
    EXPECT_EQ(tree.size(), 1u);
}

TEST(BKTree, RadiusOutOfRange) {
    prep::BKTree tree;
    tree.insert(ph(1, 0));
    EXPECT_THROW(tree.query(0, -1), std::invalid_argument);
    EXPECT_THROW(tree.query(0, 65), std::invalid_argument);
}

TEST(BKTree, Radius64ReturnsEverything) {
    std::mt19937_64 rng(2);
    prep::BKTree tree;
    for (std::uint64_t i = 0; i < 300; ++i) {
        tree.insert(ph(rng(), i));
    }
    EXPECT_EQ(tree.query(rng(), 64).size(), 300u);
}

TEST(BKTree, MatchesLinearScan) {
    std::mt19937_64 rng(7);
    std::vector<prep::PerceptualHash> all;
    prep::BKTree tree;
    for (std::uint64_t i = 0; i < 1000; ++i) {
        // a mix of uniform hashes and near copies of earlier ones
        std::uint64_t bits = rng();
        if (i > 10 && rng() % 3 == 0) {
            bits = all[rng() % all.size()].bits ^ (1ull << (rng() % 64)) ^ (1ull << (rng() % 64));
        }
        all.push_back(ph(bits, i));
        tree.insert(all.back());
    }
    EXPECT_TRUE(tree.check_invariants());
    for (int q = 0; q < 100; ++q) {
        const std::uint64_t query = q % 2 ? rng() : all[rng() % all.size()].bits ^ (1ull << (rng() % 64));
        for (int radius : {0, 4, 8, 16, 24, 64}) {
            EXPECT_EQ(sorted_ids(tree.query(query, radius)), sorted_ids(oracle::linear_scan(all, query, radius)))
                << "query " << q << " radius " << radius;
        }
    }
}
