#include "fvd/exact.hpp"

#include "fvd/errors.hpp"
#include "fvd/rng.hpp"

#include <bit>
#include <cmath>
#include <fmt/format.h>

namespace fvd {

namespace {

void check_sites(int n, int cap) {
    if (n < 1 || n > cap) throw InputDomainError(fmt::format("dense oracle supports 1..{} sites, got {}", cap, n));
}

void check_site(const DenseState &psi, int site) {
    if (site < 0 || site >= psi.n_sites) throw InputDomainError(fmt::format("site {} out of range", site));
}

} // namespace

DenseState dense_product_state(const std::vector<std::uint8_t> &up) {
    const int n = static_cast<int>(up.size());
    check_sites(n, kDenseMaxSites);
    DenseState s{n, Vector::Zero(Eigen::Index{1} << n)};
    std::size_t idx = 0;
    for (int k = 0; k < n; ++k)
        if (up[static_cast<size_t>(k)]) idx |= std::size_t{1} << k;
    s.amp(static_cast<Eigen::Index>(idx)) = 1.0;
    return s;
}

DenseState dense_state_from_mps(const MpsState &psi) {
    const int n = psi.size();
    check_sites(n, kDenseMaxSites);
    Matrix m = Matrix::Ones(1, 1);
    for (int k = 0; k < n; ++k) {
        const Tensor3 &a = psi.tensor(k);
        Matrix next(2 * m.rows(), a.dr());
        next.topRows(m.rows()) = m * a.slice(0);
        next.bottomRows(m.rows()) = m * a.slice(1);
        m = std::move(next);
    }
    return DenseState{n, m.col(0)};
}

DenseHamiltonian::DenseHamiltonian(const CouplingList &terms) : n_(terms.n_sites), x_(terms.x) {
    check_sites(n_, kDenseMaxSites);
    const std::size_t dim = std::size_t{1} << n_;
    diag_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
    for (std::size_t s = 0; s < dim; ++s) {
        double e = 0.0;
        for (const auto &t : terms.zz) {
            const int zi = (s >> t.i & 1U) ? 1 : -1;
            const int zj = (s >> t.j & 1U) ? 1 : -1;
            e += t.weight * zi * zj;
        }
        for (const auto &t : terms.z) e += t.weight * ((s >> t.site & 1U) ? 1.0 : -1.0);
        diag_(static_cast<Eigen::Index>(s)) = e;
    }
}

Vector DenseHamiltonian::apply(const Vector &v) const {
    if (static_cast<std::size_t>(v.size()) != dim()) throw InputDomainError("dense vector has wrong dimension");
    Vector out = diag_.cast<cplx>().cwiseProduct(v);
    const auto d = static_cast<Eigen::Index>(dim());
    for (const auto &t : x_) {
        const Eigen::Index mask = Eigen::Index{1} << t.site;
        for (Eigen::Index s = 0; s < d; ++s) out(s) += t.weight * v(s ^ mask);
    }
    return out;
}

LinearOp DenseHamiltonian::as_operator() const {
    return [this](const Vector &v) { return apply(v); };
}

Eigen::MatrixXd DenseHamiltonian::to_matrix() const {
    if (n_ > 12) throw InputDomainError("explicit dense matrix limited to 12 sites");
    const auto d = static_cast<Eigen::Index>(dim());
    Eigen::MatrixXd m = diag_.asDiagonal();
    for (const auto &t : x_) {
        const Eigen::Index mask = Eigen::Index{1} << t.site;
        for (Eigen::Index s = 0; s < d; ++s) m(s ^ mask, s) += t.weight;
    }
    return m;
}

DenseHamiltonian dense_hamiltonian(const LatticeGeometry &geom, const ModelParams &p) {
    return DenseHamiltonian(hamiltonian_terms(geom, p));
}

DenseEvolver::DenseEvolver(const DenseHamiltonian &h, ExpmOptions krylov) : h_(h), krylov_(krylov) {
    if (h.n_sites() <= kDenseFullSolveMaxSites) eig_.emplace(h.to_matrix());
}

DenseState DenseEvolver::evolve(const DenseState &psi, double t) const {
    if (psi.n_sites != h_.n_sites()) throw InputDomainError("state and Hamiltonian sizes differ");
    if (eig_) {
        const Eigen::MatrixXcd u = eig_->eigenvectors().cast<cplx>();
        Vector c = u.adjoint() * psi.amp;
        for (Eigen::Index i = 0; i < c.size(); ++i) c(i) *= std::exp(cplx(0.0, -t * eig_->eigenvalues()(i)));
        return DenseState{psi.n_sites, u * c};
    }
    return DenseState{psi.n_sites, expm_krylov(h_.as_operator(), psi.amp, t, krylov_)};
}

std::vector<DenseState> dense_evolve(const DenseState &psi, const DenseHamiltonian &h, const std::vector<double> &t_grid) {
    const DenseEvolver ev(h);
    std::vector<DenseState> out;
    out.reserve(t_grid.size());
    DenseState cur = psi;
    double t_cur = 0.0;
    for (double t : t_grid) {
        cur = ev.evolve(cur, t - t_cur);
        t_cur = t;
        out.push_back(cur);
    }
    return out;
}

std::vector<DenseEigenpair> dense_eigs(const DenseHamiltonian &h, int k) {
    if (k < 1 || static_cast<std::size_t>(k) > h.dim())
        throw InputDomainError(fmt::format("requested {} eigenpairs of a {}-dimensional space", k, h.dim()));
    std::vector<DenseEigenpair> out;
    const int n = h.n_sites();
    const auto residual = [&](const Vector &v, double e) { return (h.apply(v) - e * v).norm(); };
    if (n <= kDenseFullSolveMaxSites) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h.to_matrix());
        for (int i = 0; i < k; ++i) {
            Vector v = es.eigenvectors().col(i).cast<cplx>();
            const double e = es.eigenvalues()(i);
            out.push_back({e, DenseState{n, v}, residual(v, e)});
        }
    } else {
        std::vector<Vector> found;
        CounterRng rng(0xde17a, static_cast<std::uint64_t>(n));
        const LanczosOptions opt{.max_krylov = 60, .max_restarts = 200, .tol = 1e-11};
        for (int i = 0; i < k; ++i) {
            Vector start(static_cast<Eigen::Index>(h.dim()));
            for (Eigen::Index s = 0; s < start.size(); ++s) start(s) = rng.normal();
            const EigenPair ep = lanczos_lowest(h.as_operator(), start, opt, found);
            found.push_back(ep.vector);
            out.push_back({ep.value, DenseState{n, ep.vector}, residual(ep.vector, ep.value)});
        }
        // Rayleigh-Ritz in the span of the found vectors fixes ordering and mixing.
        const auto m = static_cast<Eigen::Index>(k);
        Eigen::MatrixXcd basis(static_cast<Eigen::Index>(h.dim()), m);
        Eigen::MatrixXcd hb(static_cast<Eigen::Index>(h.dim()), m);
        for (Eigen::Index i = 0; i < m; ++i) {
            basis.col(i) = found[static_cast<size_t>(i)];
            hb.col(i) = h.apply(found[static_cast<size_t>(i)]);
        }
        const Eigen::MatrixXcd small = basis.adjoint() * hb;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (small + small.adjoint()));
        const Eigen::MatrixXcd rot = basis * es.eigenvectors();
        out.clear();
        for (Eigen::Index i = 0; i < m; ++i) {
            const Vector v = rot.col(i).normalized();
            const double e = es.eigenvalues()(i);
            out.push_back({e, DenseState{n, v}, residual(v, e)});
        }
    }
    for (const auto &p : out)
        if (!(p.residual <= 1e-10))
            throw ConvergenceError(fmt::format("dense eigenpair residual {} above 1e-10", p.residual));
    return out;
}

std::vector<double> born_probabilities(const DenseState &psi) {
    std::vector<double> p(psi.dim());
    const double nrm = psi.amp.squaredNorm();
    for (std::size_t s = 0; s < p.size(); ++s) p[s] = std::norm(psi.amp(static_cast<Eigen::Index>(s))) / nrm;
    return p;
}

cplx dense_overlap(const DenseState &a, const DenseState &b) {
    if (a.n_sites != b.n_sites) throw InputDomainError("dense_overlap: state sizes differ");
    return a.amp.dot(b.amp);
}

double dense_expect_local(const DenseState &psi, Pauli op, int site) {
    check_site(psi, site);
    const auto mask = Eigen::Index{1} << site;
    const auto d = psi.amp.size();
    cplx acc = 0.0;
    for (Eigen::Index s = 0; s < d; ++s) {
        const bool up = (s & mask) != 0;
        const cplx a = psi.amp(s);
        switch (op) {
        case Pauli::I: acc += std::norm(a); break;
        case Pauli::Z: acc += (up ? 1.0 : -1.0) * std::norm(a); break;
        case Pauli::X: acc += std::conj(a) * psi.amp(s ^ mask); break;
        case Pauli::Y: acc += std::conj(a) * (up ? cplx(0, -1) : cplx(0, 1)) * psi.amp(s ^ mask); break;
        }
    }
    return acc.real() / psi.amp.squaredNorm();
}

double dense_energy(const DenseState &psi, const DenseHamiltonian &h) {
    return psi.amp.dot(h.apply(psi.amp)).real() / psi.amp.squaredNorm();
}

ZtotMoments dense_ztot_moments(const DenseState &psi) {
    double first = 0.0, second = 0.0;
    const double nrm = psi.amp.squaredNorm();
    for (Eigen::Index s = 0; s < psi.amp.size(); ++s) {
        const int ups = std::popcount(static_cast<std::uint64_t>(s));
        const double z = 2.0 * ups - psi.n_sites;
        const double p = std::norm(psi.amp(s)) / nrm;
        first += p * z;
        second += p * z * z;
    }
    return {first, second};
}

double dense_entropy(const DenseState &psi, int cut) {
    if (cut < 1 || cut >= psi.n_sites) throw InputDomainError(fmt::format("invalid cut {}", cut));
    const Eigen::Index rows = Eigen::Index{1} << cut;
    const Eigen::Map<const Matrix> m(psi.amp.data(), rows, psi.amp.size() / rows);
    const Eigen::BDCSVD<Matrix> svd(m);
    const RealVector s = svd.singularValues() / svd.singularValues().norm();
    double e = 0.0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        const double p = s(i) * s(i);
        if (p > 0.0) e -= p * std::log(p);
    }
    return e;
}

double dense_return_probability(const DenseState &psi0, const DenseState &psit) {
    return std::norm(dense_overlap(psi0, psit)) / (psi0.amp.squaredNorm() * psit.amp.squaredNorm());
}

} // namespace fvd
