#include "fvd/errors.hpp"
#include "fvd/exact.hpp"
#include "fvd/model.hpp"
#include "fvd/mpo.hpp"
#include "fvd/mps.hpp"
#include "fvd/rng.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace fvd;

namespace {

std::vector<std::uint8_t> all(int n, bool up) { return std::vector<std::uint8_t>(static_cast<size_t>(n), up ? 1 : 0); }

} // namespace

TEST(Model, TermCounts) {
    const LatticeGeometry g(3, 4);
    const auto t = hamiltonian_terms(g, {1.0, 1.0, 0.1});
    EXPECT_EQ(t.size(), g.bonds().size() + 2U * 12U);
    for (const auto &z : t.zz) EXPECT_DOUBLE_EQ(z.weight, -1.0);
    for (const auto &x : t.x) EXPECT_DOUBLE_EQ(x.weight, -1.0);
    for (const auto &z : t.z) EXPECT_DOUBLE_EQ(z.weight, -0.1);
}

TEST(Model, ClassicalEnergies) {
    const LatticeGeometry g(2, 2);
    EXPECT_NEAR(hamiltonian_terms(g, {1.0, 1.0, 0.1}).classical_energy(all(4, false)), -3.6, 1e-14);
    EXPECT_NEAR(hamiltonian_terms(g, {1.0, 0.0, 0.1}).classical_energy(all(4, true)), -4.4, 1e-14);
}

TEST(Model, MpoOnProductStates) {
    EXPECT_NEAR(expect_mpo(product_state(LatticeGeometry(2, 2), false), hamiltonian_mpo(LatticeGeometry(2, 2), {1, 1, 0.1})).real(),
                -3.6, 1e-12);
    EXPECT_NEAR(expect_mpo(product_state(LatticeGeometry(3, 3), false), hamiltonian_mpo(LatticeGeometry(3, 3), {1, 1, 0})).real(),
                -12.0, 1e-12);
}

TEST(Model, MpoMatchesCouplingListOnRandomProductStates) {
    CounterRng rng(11);
    for (int r = 1; r <= 3; ++r)
        for (int c = 1; c <= 4; ++c) {
            const LatticeGeometry g(r, c);
            const ModelParams p{rng.uniform() + 0.5, rng.uniform(), rng.uniform() - 0.5};
            const auto terms = hamiltonian_terms(g, p);
            const Mpo w = hamiltonian_mpo(g, p);
            for (int trial = 0; trial < 10; ++trial) {
                std::vector<std::uint8_t> up(static_cast<size_t>(g.size()));
                for (auto &u : up) u = rng.uniform() < 0.5;
                EXPECT_NEAR(expect_mpo(product_state(up), w).real(), terms.classical_energy(up), 1e-12);
            }
        }
}

TEST(Model, MpoMatchesDenseMatrix) {
    const LatticeGeometry g(2, 3);
    const ModelParams p{1.0, 0.7, 0.3};
    const Matrix dense = hamiltonian_mpo(g, p).to_dense();
    const Eigen::MatrixXd ref = dense_hamiltonian(g, p).to_matrix();
    EXPECT_LE((dense - ref.cast<cplx>()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Model, MpoBondDimensionIndependentOfFields) {
    const LatticeGeometry g(4, 4);
    const int chi = hamiltonian_mpo(g, {1, 1, 0.1}).max_bond();
    EXPECT_EQ(hamiltonian_mpo(g, {1, 3, -2}).max_bond(), chi);
    EXPECT_LE(chi, 2 * 4 + 2);
}

TEST(Model, SingleSiteSpectrum) {
    const Eigen::MatrixXd h = dense_hamiltonian(LatticeGeometry(1, 1), {1.0, 1.0, 0.0}).to_matrix();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    EXPECT_NEAR(es.eigenvalues()(0), -1.0, 1e-14);
    EXPECT_NEAR(es.eigenvalues()(1), 1.0, 1e-14);
}

TEST(Model, HamiltonianIsRealSymmetric) {
    const Eigen::MatrixXd h = dense_hamiltonian(LatticeGeometry(2, 3), {1.0, 0.8, -0.4}).to_matrix();
    EXPECT_LE((h - h.transpose()).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Model, QuenchProtocolValidation) {
    EXPECT_NO_THROW(QuenchProtocol::make(1, 1, 0.1, -0.2, 10, 0.02).validate());
    EXPECT_THROW(QuenchProtocol::make(1, 1, 0.1, -0.2, 0, 0.02).validate(), InputDomainError);
    EXPECT_THROW(QuenchProtocol::make(1, 1, 0.1, -0.2, 1, -0.1).validate(), InputDomainError);
    QuenchProtocol q = QuenchProtocol::make(1, 1, 0.1, -0.2, 1, 0.1);
    q.post.g = 2.0;
    EXPECT_THROW(q.validate(), InputDomainError);
}

TEST(Bubble, TwoDimensionalExamples) {
    const BubbleParams b{1.0, 1.0};
    EXPECT_DOUBLE_EQ(bubble_energy_2d(b, 0.0), 0.0);
    EXPECT_NEAR(bubble_energy_2d(b, 1.0), std::numbers::pi, 1e-15);
    EXPECT_DOUBLE_EQ(critical_radius(b), 1.0);
    EXPECT_NEAR(nucleation_barrier(b), std::numbers::pi, 1e-15);
    EXPECT_THROW((void)bubble_energy_2d(b, -1.0), InputDomainError);
}

TEST(Bubble, TwoDimensionalShape) {
    CounterRng rng(3);
    for (int i = 0; i < 50; ++i) {
        const BubbleParams b{0.1 + 2 * rng.uniform(), 0.1 + 2 * rng.uniform()};
        const double rc = critical_radius(b);
        EXPECT_NEAR(bubble_energy_2d_derivative(b, rc), 0.0, 1e-12);
        EXPECT_GT(bubble_energy_2d_derivative(b, 0.5 * rc), 0.0);
        EXPECT_LT(bubble_energy_2d_derivative(b, 1.5 * rc), 0.0);
        EXPECT_LT(bubble_energy_2d(b, 2.0 * b.sigma / b.delta_eps * 1.01), 0.0);
        // concavity
        const double r = 3 * rc * rng.uniform(), dr = 1e-3;
        EXPECT_LT(bubble_energy_2d(b, r + dr) + bubble_energy_2d(b, r + 3 * dr) - 2 * bubble_energy_2d(b, r + 2 * dr), 0.0);
    }
}

TEST(Bubble, OneDimensional) {
    const BubbleParams b{1.0, 1.0};
    EXPECT_DOUBLE_EQ(bubble_energy_1d(b, 0.0), 2.0);
    EXPECT_DOUBLE_EQ(bubble_energy_1d(b, 2.0), 0.0);
    EXPECT_DOUBLE_EQ(bubble_energy_1d_derivative(b, 5.0), -1.0);
    EXPECT_THROW((void)bubble_energy_1d(b, -0.5), InputDomainError);
    EXPECT_THROW(BubbleParams({1.0, 0.0}).validate(), InputDomainError);
}
