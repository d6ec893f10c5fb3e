#include "fvd/errors.hpp"
#include "fvd/exact.hpp"
#include "fvd/mps.hpp"
#include "fvd/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>

using namespace fvd;

namespace {

MpsState bell_pair() {
    Tensor3 a(1, 2, 2), b(2, 2, 1);
    a(0, 0, 0) = 1.0;
    a(0, 1, 1) = 1.0;
    b(0, 0, 0) = 1.0 / std::sqrt(2.0);
    b(1, 1, 0) = 1.0 / std::sqrt(2.0);
    return MpsState({a, b}, 1);
}

MpsState plus_state() {
    Tensor3 a(1, 2, 1);
    a(0, 0, 0) = a(0, 1, 0) = 1.0 / std::sqrt(2.0);
    return MpsState({a}, 0);
}

MpsState random_state(int n, int chi, std::uint64_t seed) {
    CounterRng rng(seed);
    return random_mps(n, chi, rng);
}

} // namespace

TEST(ProductState, Basics) {
    const LatticeGeometry g(2, 2);
    const MpsState down = product_state(g, false), up = product_state(g, true);
    for (int k = 0; k < 4; ++k) {
        EXPECT_DOUBLE_EQ(expect_local(down, Pauli::Z, k), -1.0);
        EXPECT_DOUBLE_EQ(expect_local(down, Pauli::X, k), 0.0);
    }
    EXPECT_EQ(down.max_bond(), 1);
    EXPECT_NEAR(std::abs(overlap(down, down)), 1.0, 1e-15);
    EXPECT_EQ(std::abs(overlap(down, up)), 0.0);
}

TEST(Overlap, MatchesDenseAndIsConjugateSymmetric) {
    const MpsState a = random_state(6, 4, 1), b = random_state(6, 4, 2);
    const cplx ab = overlap(a, b);
    EXPECT_LE(std::abs(ab - std::conj(overlap(b, a))), 1e-14);
    EXPECT_LE(std::abs(ab - dense_overlap(dense_state_from_mps(a), dense_state_from_mps(b))), 1e-10);
    EXPECT_LE(std::abs(ab), 1.0 + 1e-10);
    EXPECT_NEAR(overlap(a, a).real(), 1.0, 1e-12);
    EXPECT_THROW((void)overlap(a, random_state(5, 4, 3)), InputDomainError);
}

TEST(ExpectLocal, MatchesDense) {
    const MpsState psi = random_state(6, 4, 4);
    const DenseState d = dense_state_from_mps(psi);
    for (auto op : {Pauli::X, Pauli::Y, Pauli::Z}) {
        const auto all = local_expectations(psi, op);
        for (int k = 0; k < 6; ++k) {
            const double v = expect_local(psi, op, k);
            EXPECT_LE(std::abs(v - dense_expect_local(d, op, k)), 1e-10);
            EXPECT_LE(std::abs(v - all[static_cast<size_t>(k)]), 1e-12);
            EXPECT_LE(std::abs(v), 1.0 + 1e-9);
        }
    }
    EXPECT_THROW((void)expect_local(psi, Pauli::Z, 6), InputDomainError);
}

TEST(ZtotMoments, Examples) {
    const auto m = expect_ztot_moments(product_state(LatticeGeometry(2, 3), false));
    EXPECT_NEAR(m.first, -6.0, 1e-12);
    EXPECT_NEAR(m.second, 36.0, 1e-12);
    EXPECT_NEAR(m.variance(), 0.0, 1e-12);
    const auto p = expect_ztot_moments(plus_state());
    EXPECT_NEAR(p.first, 0.0, 1e-14);
    EXPECT_NEAR(p.second, 1.0, 1e-14);
    const MpsState psi = random_state(6, 4, 5);
    const auto r = expect_ztot_moments(psi), d = dense_ztot_moments(dense_state_from_mps(psi));
    EXPECT_LE(std::abs(r.first - d.first), 1e-9);
    EXPECT_LE(std::abs(r.second - d.second), 1e-9);
}

TEST(Entropy, Examples) {
    const MpsState prod = product_state(LatticeGeometry(1, 4), true);
    for (int c = 1; c < 4; ++c) EXPECT_NEAR(half_chain_entropy(prod, c), 0.0, 1e-14);
    EXPECT_NEAR(half_chain_entropy(bell_pair(), 1), std::log(2.0), 1e-12);
    const MpsState psi = random_state(6, 4, 6);
    const DenseState d = dense_state_from_mps(psi);
    for (int c = 1; c < 6; ++c) {
        const double s = half_chain_entropy(psi, c);
        EXPECT_LE(std::abs(s - dense_entropy(d, c)), 1e-9);
        EXPECT_LE(s, std::log(psi.bond_dims()[static_cast<size_t>(c - 1)]) + 1e-12);
    }
    EXPECT_THROW((void)half_chain_entropy(psi, 0), InputDomainError);
    EXPECT_THROW((void)half_chain_entropy(psi, 6), InputDomainError);
}

TEST(Entropy, GaugeInvariant) {
    MpsState psi = random_state(6, 4, 7);
    const double s = half_chain_entropy(psi, 3);
    // Insert an invertible matrix and its inverse on bond 2-3.
    std::srand(8);
    const int d = psi.bond_dims()[2];
    const Matrix g = Matrix::Random(d, d) + 3.0 * Matrix::Identity(d, d);
    const Matrix gi = g.inverse();
    Tensor3 &a = psi.tensor(2);
    Tensor3 &b = psi.tensor(3);
    a = Tensor3::from_left_matrix(Matrix(a.left_matrix() * g), a.dl(), 2);
    b = Tensor3::from_right_matrix(Matrix(gi * b.right_matrix()), 2, b.dr());
    psi.set_center(std::nullopt);
    EXPECT_NEAR(half_chain_entropy(psi, 3), s, 1e-10);
}

TEST(Canonical, MoveCenterKeepsIsometries) {
    MpsState psi = random_state(8, 6, 9);
    const DenseState before = dense_state_from_mps(psi);
    for (int k : {7, 3, 0, 5}) {
        psi.move_center(k);
        EXPECT_LE(psi.isometry_error(), 1e-10);
    }
    EXPECT_NEAR(std::abs(dense_overlap(before, dense_state_from_mps(psi))), 1.0, 1e-12);
}

TEST(Truncate, Examples) {
    const auto [p, rep] = truncate(product_state(LatticeGeometry(2, 2), false), 1, 1e-10);
    EXPECT_EQ(rep.total_discarded, 0.0);
    EXPECT_NEAR(std::abs(overlap(p, product_state(LatticeGeometry(2, 2), false))), 1.0, 1e-14);

    const auto [b, brep] = truncate(bell_pair(), 1, 0.0);
    EXPECT_NEAR(brep.total_discarded, 0.5, 1e-12);
    EXPECT_EQ(b.max_bond(), 1);
    EXPECT_NEAR(b.norm(), 1.0, 1e-12);
}

TEST(Truncate, DiscardedWeightMatchesInfidelity) {
    const MpsState psi = random_state(10, 16, 10);
    const auto [t, rep] = truncate(psi, 8, 0.0);
    EXPECT_LE(t.max_bond(), 8);
    EXPECT_LE(t.isometry_error(), 1e-10);
    const double infidelity = 1.0 - std::norm(overlap(psi, t));
    EXPECT_GT(rep.total_discarded, 0.0);
    EXPECT_NEAR(infidelity, rep.total_discarded, 0.1 * rep.total_discarded + 1e-8);
}

TEST(Truncate, SmallWeightsAgreeClosely) {
    // A state close to chi = 2, truncated to 2.
    MpsState psi = random_state(8, 2, 11);
    MpsState noise = random_state(8, 4, 12);
    std::vector<Tensor3> ts;
    for (int k = 0; k < 8; ++k) {
        const Tensor3 &a = psi.tensor(k), &b = noise.tensor(k);
        Tensor3 c(a.dl() + b.dl() - (k == 0), 2, a.dr() + b.dr() - (k == 7));
        const double eps = k == 0 ? 1e-3 : 1.0;
        for (int p = 0; p < 2; ++p) {
            if (k == 0) {
                c.slice(p).leftCols(a.dr()) = a.slice(p);
                c.slice(p).rightCols(b.dr()) = eps * b.slice(p);
            } else if (k == 7) {
                c.slice(p).topRows(a.dl()) = a.slice(p);
                c.slice(p).bottomRows(b.dl()) = b.slice(p);
            } else {
                c.slice(p).topLeftCorner(a.dl(), a.dr()) = a.slice(p);
                c.slice(p).bottomRightCorner(b.dl(), b.dr()) = b.slice(p);
            }
        }
        ts.push_back(c);
    }
    MpsState sum(ts);
    sum.normalize();
    const auto [t, rep] = truncate(sum, 2, 0.0);
    EXPECT_NEAR(1.0 - std::norm(overlap(sum, t)), rep.total_discarded, 1e-8);
}

TEST(Truncate, Idempotent) {
    const MpsState psi = random_state(8, 8, 13);
    const auto [a, ra] = truncate(psi, 4, 1e-10);
    const auto [b, rb] = truncate(a, 4, 1e-10);
    EXPECT_LE(rb.total_discarded, 1e-20);
    EXPECT_NEAR(std::abs(overlap(a, b)), 1.0, 1e-12);
    EXPECT_EQ(a.bond_dims(), b.bond_dims());
}

TEST(RandomMps, NormalizedAndCanonical) {
    const MpsState psi = random_state(7, 5, 14);
    EXPECT_NEAR(psi.norm(), 1.0, 1e-10);
    EXPECT_LE(psi.isometry_error(), 1e-10);
    EXPECT_EQ(psi.bond_dims(), (std::vector<int>{2, 4, 5, 5, 4, 2}));
}

TEST(RandomMpsWithEntropy, Examples) {
    CounterRng rng(15);
    const MpsState zero = random_mps_with_entropy(4, 4, 0.0, 1e-6, rng);
    EXPECT_LE(half_chain_entropy(zero, 2), 1e-6);
    const MpsState ln2 = random_mps_with_entropy(4, 4, std::log(2.0), 0.05, rng);
    EXPECT_NEAR(half_chain_entropy(ln2, 2), std::log(2.0), 0.05);
    EXPECT_NEAR(ln2.norm(), 1.0, 1e-10);
    EXPECT_THROW((void)random_mps_with_entropy(4, 4, 3.0, 0.1, rng), InputDomainError);
}

TEST(RandomMpsWithEntropy, HitsRangeOfTargets) {
    CounterRng rng(16);
    for (double target : {0.2, 0.9, 1.5, 2.0}) {
        const MpsState psi = random_mps_with_entropy(10, 8, target, 1e-3, rng);
        EXPECT_NEAR(half_chain_entropy(psi, 5), target, 1e-3);
    }
}

TEST(Sampling, ProductStateIsDeterministic) {
    const LatticeGeometry g(2, 2);
    const MpsState down = product_state(g, false);
    CounterRng rng(17);
    for (int i = 0; i < 50; ++i) EXPECT_EQ(sample_snapshot(down, g, rng).up_count(), 0);
}

TEST(Sampling, PlusStateHalfUp) {
    const LatticeGeometry g(1, 1);
    CounterRng rng(18);
    int ups = 0;
    for (int i = 0; i < 10000; ++i) ups += sample_snapshot(plus_state(), g, rng).up_count();
    EXPECT_NEAR(ups / 1e4, 0.5, 0.02);
}

TEST(Sampling, MatchesBornDistribution) {
    const LatticeGeometry g(2, 3);
    const MpsState psi = random_state(6, 4, 19);
    const auto born = born_probabilities(dense_state_from_mps(psi));
    const MpsSampler sampler(psi);
    CounterRng rng(20);
    std::vector<double> freq(64, 0.0);
    const int shots = 10000;
    for (int i = 0; i < shots; ++i) {
        const auto s = sampler.sample(rng);
        std::size_t idx = 0;
        for (int k = 0; k < 6; ++k)
            if (s[static_cast<size_t>(k)]) idx |= std::size_t{1} << k;
        freq[idx] += 1.0 / shots;
    }
    double tv = 0.0;
    for (int i = 0; i < 64; ++i) tv += 0.5 * std::abs(freq[static_cast<size_t>(i)] - born[static_cast<size_t>(i)]);
    EXPECT_LE(tv, 0.05);
}

TEST(Sampling, DeterministicGivenSeed) {
    const LatticeGeometry g(2, 3);
    const MpsState psi = random_state(6, 4, 21);
    CounterRng a(22), b(22);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(sample_snapshot(psi, g, a), sample_snapshot(psi, g, b));
}

TEST(ApplyMpo, VarianceOfEigenstateVanishes) {
    const LatticeGeometry g(1, 4);
    const MpsState up = product_state(g, true);
    EXPECT_NEAR(mpo_variance(up, hamiltonian_mpo(g, {1.0, 0.0, 0.3})), 0.0, 1e-12);
    EXPECT_NEAR(mpo_variance(up, hamiltonian_mpo(g, {1.0, 1.0, 0.3})), 4.0, 1e-12);
}

TEST(FlipAllSpins, MapsUpToDown) {
    const LatticeGeometry g(2, 2);
    const MpsState f = flip_all_spins(product_state(g, true));
    EXPECT_NEAR(std::abs(overlap(f, product_state(g, false))), 1.0, 1e-15);
}
