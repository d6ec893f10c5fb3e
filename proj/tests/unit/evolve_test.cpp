#include "fvd/errors.hpp"
#include "fvd/evolve.hpp"
#include "fvd/exact.hpp"
#include "fvd/groundstate.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace fvd;

TEST(Evolve, FreeSpinsAnalytic) {
    // J = 0, h = 0: independent spins under -g X.
    const LatticeGeometry g(2, 3);
    const double field = 0.9;
    const auto q = QuenchProtocol::make(0.0, field, 0.0, 0.0, 2.0, 0.02, 5);
    const TrajectoryRecord rec = evolve_quench(product_state(g, false), g, q, {.chi_q = 8});
    ASSERT_EQ(rec.times.size(), 21U);
    for (size_t i = 0; i < rec.times.size(); ++i) {
        const double t = rec.times[i];
        EXPECT_NEAR(rec.p_ret[i], std::pow(std::cos(field * t), 12), 1e-9);
        EXPECT_NEAR(rec.mz[i], -std::cos(2 * field * t), 1e-9);
    }
}

TEST(Evolve, MatchesDenseOracleOnSmallLattice) {
    const LatticeGeometry g(2, 3);
    const auto q = QuenchProtocol::make(1.0, 1.0, 0.1, -0.2, 3.0, 0.02, 10);
    const DmrgResult fv = ground_state(g, q.pre, {});
    const TrajectoryRecord rec = evolve_quench(fv.state, g, q, {.chi_q = 64});

    const DenseHamiltonian h = dense_hamiltonian(g, q.post);
    const DenseState psi0 = dense_state_from_mps(fv.state);
    const auto states = dense_evolve(psi0, h, rec.times);
    for (size_t i = 0; i < rec.times.size(); ++i) {
        EXPECT_NEAR(rec.p_ret[i], dense_return_probability(psi0, states[i]), 1e-6);
        EXPECT_NEAR(rec.mz[i], dense_ztot_moments(states[i]).first / 6.0, 1e-6);
        EXPECT_NEAR(rec.ztot_var[i], dense_ztot_moments(states[i]).variance(), 1e-6);
        EXPECT_NEAR(rec.norm[i], 1.0, 1e-9);
    }
}

TEST(Evolve, TruncationIsControlled) {
    const LatticeGeometry g(3, 3);
    const auto q = QuenchProtocol::make(1.0, 1.0, 0.0, -1.0, 1.0, 0.05, 1);
    const TrajectoryRecord rec = evolve_quench(product_state(g, false), g, q, {.chi_q = 4});
    for (size_t i = 0; i < rec.times.size(); ++i) {
        EXPECT_LE(rec.max_bond[i], 4);
        EXPECT_NEAR(rec.norm[i], 1.0, 1e-9);
        if (i > 0) EXPECT_GE(rec.discarded_weight[i], rec.discarded_weight[i - 1]);
    }
    EXPECT_GT(rec.discarded_weight.back(), 0.0);
}

TEST(Evolve, ShotsAtScheduledTimesAreNonDestructive) {
    const LatticeGeometry g(2, 2);
    const auto q = QuenchProtocol::make(1.0, 1.0, 0.1, -0.2, 1.0, 0.05, 1);
    const TrajectoryRecord plain = evolve_quench(product_state(g, false), g, q, {});
    const TrajectoryRecord sampled =
        evolve_quench(product_state(g, false), g, q, {}, ShotSchedule{{0.0, 0.5, 1.0}, 50, 3});
    ASSERT_EQ(sampled.snapshots.size(), 3U);
    EXPECT_EQ(sampled.snapshots[1].shots.size(), 50U);
    EXPECT_DOUBLE_EQ(sampled.snapshots[1].time, 0.5);
    for (const auto &s : sampled.snapshots[0].shots) EXPECT_EQ(s.up_count(), 0);
    EXPECT_EQ(plain.csv(), sampled.csv());
}

TEST(Evolve, RejectsOffGridShotTimes) {
    const LatticeGeometry g(2, 2);
    const auto q = QuenchProtocol::make(1.0, 1.0, 0.1, -0.2, 1.0, 0.1, 1);
    EXPECT_THROW((void)evolve_quench(product_state(g, false), g, q, {}, ShotSchedule{{0.25}, 10, 1}), InputDomainError);
}

TEST(ReturnProbability, Examples) {
    const LatticeGeometry g(2, 3);
    const MpsState a = product_state(g, false);
    EXPECT_NEAR(return_probability(a, a), 1.0, 1e-15);
    EXPECT_EQ(return_probability(a, product_state(g, true)), 0.0);
    CounterRng rng(1);
    const MpsState x = random_mps(6, 4, rng), y = random_mps(6, 4, rng);
    EXPECT_NEAR(return_probability(x, y), dense_return_probability(dense_state_from_mps(x), dense_state_from_mps(y)), 1e-10);
    EXPECT_THROW((void)return_probability(a, product_state(LatticeGeometry(1, 5), false)), InputDomainError);
}

TEST(TrajectoryRecord, CsvHeader) {
    TrajectoryRecord r;
    EXPECT_EQ(r.csv(), "time,mz,ztot_var,p_ret,energy,max_bond,discarded_weight\n");
}
