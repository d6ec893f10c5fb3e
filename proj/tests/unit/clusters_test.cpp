#include "fvd/clusters.hpp"
#include "fvd/errors.hpp"
#include "fvd/rng.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <functional>

using namespace fvd;

namespace {

Snapshot from_coords(const LatticeGeometry &g, const std::vector<Coord> &ups) {
    Snapshot s{g.rows(), g.cols(), std::vector<std::uint8_t>(static_cast<size_t>(g.size()), 0)};
    for (const Coord &c : ups) s.up[static_cast<size_t>(g.snake_index(c.row, c.col))] = 1;
    return s;
}

Snapshot uniform(const LatticeGeometry &g, bool up) {
    return Snapshot{g.rows(), g.cols(), std::vector<std::uint8_t>(static_cast<size_t>(g.size()), up ? 1 : 0)};
}

// Recursive flood fill over the 2D grid, independent of the bond list.
std::vector<int> flood_fill_sizes(const Snapshot &s, const LatticeGeometry &g) {
    std::vector<std::vector<int>> grid(static_cast<size_t>(g.rows()), std::vector<int>(static_cast<size_t>(g.cols())));
    for (int r = 0; r < g.rows(); ++r)
        for (int c = 0; c < g.cols(); ++c) grid[r][c] = s.up[static_cast<size_t>(g.snake_index(r, c))];
    std::function<int(int, int)> fill = [&](int r, int c) {
        if (r < 0 || c < 0 || r >= g.rows() || c >= g.cols() || grid[r][c] != 1) return 0;
        grid[r][c] = 2;
        return 1 + fill(r + 1, c) + fill(r - 1, c) + fill(r, c + 1) + fill(r, c - 1);
    };
    std::vector<int> sizes;
    for (int r = 0; r < g.rows(); ++r)
        for (int c = 0; c < g.cols(); ++c)
            if (grid[r][c] == 1) sizes.push_back(fill(r, c));
    std::sort(sizes.begin(), sizes.end(), std::greater<>());
    return sizes;
}

} // namespace

TEST(FindClusters, Examples) {
    const LatticeGeometry g(3, 3);
    EXPECT_TRUE(find_clusters(uniform(g, false), g).empty());
    EXPECT_EQ(find_clusters(from_coords(g, {{0, 0}, {0, 1}, {2, 2}}), g), (std::vector<int>{2, 1}));
    EXPECT_EQ(find_clusters(uniform(g, true), g), (std::vector<int>{9}));
    EXPECT_EQ(find_clusters(uniform(g, true), g, ClusterReference::Up), (std::vector<int>{}));
}

TEST(FindClusters, DiagonalIsNotConnected) {
    const LatticeGeometry g(2, 2);
    EXPECT_EQ(find_clusters(from_coords(g, {{0, 0}, {1, 1}}), g), (std::vector<int>{1, 1}));
    EXPECT_EQ(find_clusters(from_coords(g, {{0, 1}, {1, 1}}), g), (std::vector<int>{2}));
}

TEST(FindClusters, MatchesFloodFillOnRandomGrids) {
    CounterRng rng(1);
    for (int i = 0; i < 2000; ++i) {
        const LatticeGeometry g(1 + static_cast<int>(rng() % 7), 1 + static_cast<int>(rng() % 7));
        Snapshot s = uniform(g, false);
        const double fill = rng.uniform();
        for (auto &u : s.up) u = rng.uniform() < fill;
        const auto sizes = find_clusters(s, g);
        EXPECT_EQ(sizes, flood_fill_sizes(s, g));
        int mass = 0;
        for (int x : sizes) mass += x;
        EXPECT_EQ(mass, s.up_count());
    }
}

TEST(FindClusters, ChainClustersAreRuns) {
    const LatticeGeometry g(49, 1);
    CounterRng rng(2);
    for (int i = 0; i < 200; ++i) {
        Snapshot s = uniform(g, false);
        for (auto &u : s.up) u = rng.uniform() < 0.5;
        std::vector<int> runs;
        int cur = 0;
        for (auto u : s.up) {
            if (u) ++cur;
            else if (cur > 0) runs.push_back(std::exchange(cur, 0));
        }
        if (cur > 0) runs.push_back(cur);
        std::sort(runs.begin(), runs.end(), std::greater<>());
        EXPECT_EQ(find_clusters(s, g), runs);
    }
}

TEST(FindClusters, GeometryMismatch) {
    EXPECT_THROW((void)find_clusters(uniform(LatticeGeometry(2, 2), false), LatticeGeometry(1, 4)), InputDomainError);
}

TEST(AccumulateStats, SingleAllDownShot) {
    const LatticeGeometry g(3, 3);
    const ClusterStats st = accumulate_stats({uniform(g, false)}, g);
    EXPECT_TRUE(st.n_of_s.empty());
    EXPECT_EQ(st.p_smax, (std::map<int, double>{{0, 1.0}}));
    EXPECT_EQ(st.hamming_hist, (std::map<int, double>{{0, 1.0}}));
    EXPECT_EQ(st.shots, 1);
}

TEST(AccumulateStats, AllUpAndAllDown) {
    const LatticeGeometry g(7, 7);
    const ClusterStats st = accumulate_stats({uniform(g, true), uniform(g, false)}, g);
    EXPECT_EQ(st.n_of_s, (std::map<int, double>{{49, 0.5}}));
    EXPECT_EQ(st.p_smax, (std::map<int, double>{{0, 0.5}, {49, 0.5}}));
    EXPECT_EQ(st.hamming_hist, (std::map<int, double>{{0, 0.5}, {49, 0.5}}));
}

TEST(AccumulateStats, NormalizationAndMass) {
    const LatticeGeometry g(4, 5);
    CounterRng rng(3);
    std::vector<Snapshot> shots;
    int flipped = 0;
    for (int i = 0; i < 500; ++i) {
        Snapshot s = uniform(g, false);
        for (auto &u : s.up) u = rng.uniform() < 0.4;
        flipped += s.up_count();
        shots.push_back(s);
    }
    const ClusterStats st = accumulate_stats(shots, g);
    double p = 0.0, mass = 0.0, h = 0.0;
    for (const auto &[s, v] : st.p_smax) p += v;
    for (const auto &[s, v] : st.n_of_s) mass += s * v * 500;
    for (const auto &[d, v] : st.hamming_hist) h += v;
    EXPECT_NEAR(p, 1.0, 1e-12);
    EXPECT_NEAR(h, 1.0, 1e-12);
    EXPECT_NEAR(mass, flipped, 1e-9);
    EXPECT_THROW((void)accumulate_stats({}, g), InputDomainError);
}

TEST(ClusterAccumulator, MergeIsOrderIndependent) {
    const LatticeGeometry g(3, 4);
    CounterRng rng(4);
    std::vector<Snapshot> shots;
    for (int i = 0; i < 90; ++i) {
        Snapshot s = uniform(g, false);
        for (auto &u : s.up) u = rng.uniform() < 0.5;
        shots.push_back(s);
    }
    ClusterAccumulator a(g), b(g), c(g), all(g);
    for (int i = 0; i < 90; ++i) {
        (i < 30 ? a : i < 60 ? b : c).add(shots[static_cast<size_t>(i)]);
        all.add(shots[static_cast<size_t>(i)]);
    }
    ClusterAccumulator left = a;
    left.merge(b);
    left.merge(c);
    ClusterAccumulator right = c;
    right.merge(a);
    right.merge(b);
    EXPECT_EQ(left.stats().n_of_s, all.stats().n_of_s);
    EXPECT_EQ(right.stats().p_smax, all.stats().p_smax);
}

TEST(PmaxHeatmap, Examples) {
    const LatticeGeometry g(7, 7);
    const auto map = pmax_heatmap({{0.0, {uniform(g, false)}}, {1.0, {uniform(g, false), uniform(g, true)}}, {2.0, {uniform(g, true)}}}, g);
    ASSERT_EQ(map.p.size(), 3U);
    EXPECT_EQ(map.p[0][0], 1.0);
    EXPECT_EQ(map.p[2][49], 1.0);
    for (const auto &row : map.p) {
        double sum = 0.0;
        for (double v : row) sum += v;
        EXPECT_NEAR(sum, 1.0, 1e-12);
        EXPECT_EQ(row.size(), 50U);
    }
}
