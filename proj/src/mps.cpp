#include "fvd/mps.hpp"

#include "fvd/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

namespace fvd {

namespace {

Matrix thin_q(const Eigen::HouseholderQR<Matrix> &qr, Eigen::Index rows, Eigen::Index k) {
    return qr.householderQ() * Matrix::Identity(rows, k);
}

Tensor3 apply_local(const Tensor3 &t, const Matrix &op) {
    Tensor3 out(t.dl(), t.d(), t.dr());
    for (int po = 0; po < t.d(); ++po)
        for (int pi = 0; pi < t.d(); ++pi)
            if (op(po, pi) != cplx{}) out.slice(po) += op(po, pi) * t.slice(pi);
    return out;
}

int bond_cap(int n_sites, int bond, int chi) {
    // bond b sits between sites b and b+1
    const int left = std::min(bond + 1, 30);
    const int right = std::min(n_sites - bond - 1, 30);
    const long cap = std::min(1L << left, 1L << right);
    return static_cast<int>(std::min<long>(cap, chi));
}

double entropy_of_probs(const RealVector &p) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i)
        if (p(i) > 0.0) s -= p(i) * std::log(p(i));
    return s;
}

} // namespace

MpsState::MpsState(std::vector<Tensor3> tensors, std::optional<int> center, int chi_max, double svd_min)
    : tensors_(std::move(tensors)), center_(center) {
    if (tensors_.empty()) throw InputDomainError("MPS needs at least one site");
    if (tensors_.front().dl() != 1 || tensors_.back().dr() != 1)
        throw InputDomainError("MPS boundary bonds must have dimension 1");
    for (size_t k = 0; k < tensors_.size(); ++k) {
        if (tensors_[k].d() != 2) throw InputDomainError("MPS site tensors must have physical dimension 2");
        if (k + 1 < tensors_.size() && tensors_[k].dr() != tensors_[k + 1].dl())
            throw InputDomainError(fmt::format("MPS bond mismatch at bond {}", k));
    }
    if (center_ && (*center_ < 0 || *center_ >= size())) throw InputDomainError("canonical center out of range");
    set_truncation(chi_max, svd_min);
}

void MpsState::set_truncation(int chi_max, double svd_min) {
    if (chi_max < 1) throw InputDomainError("chi_max must be >= 1");
    if (!(svd_min >= 0.0)) throw InputDomainError("svd_min must be >= 0");
    chi_max_ = chi_max;
    svd_min_ = svd_min;
}

std::vector<int> MpsState::bond_dims() const {
    std::vector<int> out;
    for (int k = 0; k + 1 < size(); ++k) out.push_back(tensors_[static_cast<size_t>(k)].dr());
    return out;
}

int MpsState::max_bond() const {
    int m = 1;
    for (const auto &t : tensors_) m = std::max(m, t.dr());
    return m;
}

void MpsState::left_orthonormalize(int k) {
    auto &t = tensors_[static_cast<size_t>(k)];
    auto &next = tensors_[static_cast<size_t>(k + 1)];
    const Matrix m = t.left_matrix();
    Eigen::HouseholderQR<Matrix> qr(m);
    const Eigen::Index kk = std::min(m.rows(), m.cols());
    const Matrix q = thin_q(qr, m.rows(), kk);
    const Matrix r = q.adjoint() * m;
    t = Tensor3::from_left_matrix(q, t.dl(), 2);
    next = Tensor3::from_right_matrix(r * next.right_matrix(), 2, next.dr());
}

void MpsState::right_orthonormalize(int k) {
    auto &t = tensors_[static_cast<size_t>(k)];
    auto &prev = tensors_[static_cast<size_t>(k - 1)];
    const Matrix m = t.right_matrix();
    const Matrix mh = m.adjoint();
    Eigen::HouseholderQR<Matrix> qr(mh);
    const Eigen::Index kk = std::min(mh.rows(), mh.cols());
    const Matrix q = thin_q(qr, mh.rows(), kk);
    const Matrix r = q.adjoint() * mh; // m = r^dagger q^dagger
    t = Tensor3::from_right_matrix(q.adjoint(), 2, t.dr());
    prev = Tensor3::from_left_matrix(prev.left_matrix() * r.adjoint(), prev.dl(), 2);
}

void MpsState::move_center(int k) {
    if (k < 0 || k >= size()) throw InputDomainError(fmt::format("center {} outside [0, {})", k, size()));
    if (!center_) {
        for (int j = 0; j < k; ++j) left_orthonormalize(j);
        for (int j = size() - 1; j > k; --j) right_orthonormalize(j);
    } else {
        for (int j = *center_; j < k; ++j) left_orthonormalize(j);
        for (int j = *center_; j > k; --j) right_orthonormalize(j);
    }
    center_ = k;
}

double MpsState::norm() const {
    if (center_) return tensors_[static_cast<size_t>(*center_)].vec().norm();
    return std::sqrt(std::max(0.0, overlap(*this, *this).real()));
}

void MpsState::normalize() {
    const double n = norm();
    if (!(n > 0.0) || !std::isfinite(n)) throw NumericalFault("cannot normalize a zero or non-finite MPS");
    const int k = center_.value_or(0);
    tensors_[static_cast<size_t>(k)].vec() /= n;
}

double MpsState::isometry_error() const {
    if (!center_) return 0.0;
    double err = 0.0;
    for (int k = 0; k < *center_; ++k) {
        const auto m = tensors_[static_cast<size_t>(k)].left_matrix();
        err = std::max(err, (m.adjoint() * m - Matrix::Identity(m.cols(), m.cols())).cwiseAbs().maxCoeff());
    }
    for (int k = *center_ + 1; k < size(); ++k) {
        const auto m = tensors_[static_cast<size_t>(k)].right_matrix();
        err = std::max(err, (m * m.adjoint() - Matrix::Identity(m.rows(), m.rows())).cwiseAbs().maxCoeff());
    }
    return err;
}

MpsState product_state(const std::vector<std::uint8_t> &up) {
    if (up.empty()) throw InputDomainError("product state needs at least one site");
    std::vector<Tensor3> ts;
    ts.reserve(up.size());
    for (auto s : up) {
        Tensor3 t(1, 2, 1);
        t(0, s ? 1 : 0, 0) = 1.0;
        ts.push_back(std::move(t));
    }
    return MpsState(std::move(ts), 0);
}

MpsState product_state(const LatticeGeometry &geom, bool all_up) {
    return product_state(std::vector<std::uint8_t>(static_cast<size_t>(geom.size()), all_up ? 1 : 0));
}

cplx overlap(const MpsState &a, const MpsState &b) {
    if (a.size() != b.size())
        throw InputDomainError(fmt::format("overlap of MPS with {} and {} sites", a.size(), b.size()));
    Matrix e = Matrix::Ones(1, 1);
    for (int k = 0; k < a.size(); ++k) e = extend_overlap_left(e, b.tensor(k), a.tensor(k));
    return e(0, 0);
}

cplx expect_string(const MpsState &psi, const std::vector<std::pair<int, Pauli>> &ops) {
    std::vector<const Matrix *> at(static_cast<size_t>(psi.size()), nullptr);
    std::vector<Matrix> mats;
    mats.reserve(ops.size());
    for (const auto &[site, p] : ops) {
        if (site < 0 || site >= psi.size())
            throw InputDomainError(fmt::format("site {} outside [0, {})", site, psi.size()));
        if (at[static_cast<size_t>(site)]) throw InputDomainError("operator string repeats a site");
        mats.push_back(pauli_matrix(p));
        at[static_cast<size_t>(site)] = &mats.back();
    }
    Matrix e = Matrix::Ones(1, 1);
    Matrix n = Matrix::Ones(1, 1);
    for (int k = 0; k < psi.size(); ++k) {
        const auto &t = psi.tensor(k);
        n = extend_overlap_left(n, t, t);
        if (at[static_cast<size_t>(k)]) e = extend_overlap_left(e, apply_local(t, *at[static_cast<size_t>(k)]), t);
        else e = extend_overlap_left(e, t, t);
    }
    return e(0, 0) / n(0, 0).real();
}

double expect_local(const MpsState &psi, Pauli op, int site) {
    if (site < 0 || site >= psi.size()) throw InputDomainError(fmt::format("site {} outside [0, {})", site, psi.size()));
    if (psi.center() && *psi.center() == site) {
        // only the center tensor matters
        const auto &t = psi.tensor(site);
        const cplx num = t.vec().dot(apply_local(t, pauli_matrix(op)).vec());
        return num.real() / t.vec().squaredNorm();
    }
    return expect_string(psi, {{site, op}}).real();
}

cplx expect_mpo(const MpsState &psi, const Mpo &w) {
    if (psi.size() != w.size()) throw InputDomainError("MPS and MPO lengths differ");
    Env env = boundary_env();
    Matrix n = Matrix::Ones(1, 1);
    for (int k = 0; k < psi.size(); ++k) {
        env = extend_left(env, psi.tensor(k), psi.tensor(k), w[k]);
        n = extend_overlap_left(n, psi.tensor(k), psi.tensor(k));
    }
    return env.front()(0, 0) / n(0, 0).real();
}

ZtotMoments expect_ztot_moments(const MpsState &psi) {
    return {expect_mpo(psi, ztot_mpo(psi.size())).real(), expect_mpo(psi, ztot_squared_mpo(psi.size())).real()};
}

RealVector schmidt_values(const MpsState &psi, int cut) {
    if (cut < 1 || cut >= psi.size())
        throw InputDomainError(fmt::format("cut {} outside [1, {})", cut, psi.size()));
    MpsState tmp = psi;
    tmp.move_center(cut - 1);
    Eigen::BDCSVD<Matrix> svd(tmp.tensor(cut - 1).left_matrix());
    RealVector s = svd.singularValues();
    const double nrm = s.norm();
    if (nrm > 0.0) s /= nrm;
    return s;
}

double half_chain_entropy(const MpsState &psi, int cut) {
    const RealVector s = schmidt_values(psi, cut);
    return entropy_of_probs(s.array().square().matrix());
}

std::pair<MpsState, TruncationReport> truncate(const MpsState &psi, int chi_max, double svd_min) {
    MpsState out = psi;
    out.set_truncation(chi_max, svd_min);
    TruncationReport rep;
    rep.discarded.assign(static_cast<size_t>(std::max(0, psi.size() - 1)), 0.0);
    const int n = out.size();
    out.move_center(n - 1);
    out.normalize();
    for (int k = n - 1; k >= 1; --k) {
        auto &t = out.tensor(k);
        auto &prev = out.tensor(k - 1);
        const SvdSplit sp = truncated_svd(t.right_matrix(), chi_max, svd_min);
        rep.discarded[static_cast<size_t>(k - 1)] = sp.discarded;
        rep.total_discarded += sp.discarded;
        t = Tensor3::from_right_matrix(sp.vh, 2, t.dr());
        const Matrix us = sp.u * (sp.s / sp.kept_norm).asDiagonal();
        prev = Tensor3::from_left_matrix(prev.left_matrix() * us, prev.dl(), 2);
    }
    out.set_center(0);
    out.normalize();
    return {std::move(out), std::move(rep)};
}

MpsState random_mps(int n_sites, int chi, CounterRng &rng) {
    if (n_sites < 1) throw InputDomainError("random MPS needs at least one site");
    if (chi < 1) throw InputDomainError("chi must be >= 1");
    std::vector<Tensor3> ts;
    int dl = 1;
    for (int k = 0; k < n_sites; ++k) {
        const int dr = (k == n_sites - 1) ? 1 : bond_cap(n_sites, k, chi);
        Tensor3 t(dl, 2, dr);
        for (Eigen::Index i = 0; i < t.numel(); ++i) t.data()[i] = cplx(rng.normal(), rng.normal());
        ts.push_back(std::move(t));
        dl = dr;
    }
    MpsState psi(std::move(ts), std::nullopt, chi);
    psi.move_center(0);
    psi.normalize();
    return psi;
}

MpsState random_mps_with_entropy(int n_sites, int chi, double target, double tol, CounterRng &rng) {
    if (!(tol > 0.0)) throw InputDomainError("entropy tolerance must be positive");
    if (!(target >= 0.0)) throw InputDomainError("target entropy must be non-negative");
    if (chi < 1) throw InputDomainError("chi must be >= 1");
    if (target > std::log(static_cast<double>(chi)))
        throw InputDomainError(fmt::format("target entropy {} exceeds ln(chi) = {}", target, std::log(chi)));
    if (n_sites < 2) {
        if (target <= tol) return random_mps(n_sites, chi, rng);
        throw InputDomainError("a single site carries no entanglement");
    }
    const int cut = central_cut(n_sites);
    const int cut_dim = bond_cap(n_sites, cut - 1, chi);
    if (target > std::log(static_cast<double>(cut_dim)) + tol)
        throw InputDomainError(fmt::format("target entropy {} exceeds ln({}) available at the central cut", target, cut_dim));

    MpsState psi = random_mps(n_sites, chi, rng);
    psi.move_center(cut - 1);
    // isolate the Schmidt decomposition at the central cut
    {
        auto &t = psi.tensor(cut - 1);
        auto &next = psi.tensor(cut);
        Eigen::BDCSVD<Matrix> svd(t.left_matrix(), Eigen::ComputeThinU | Eigen::ComputeThinV);
        t = Tensor3::from_left_matrix(svd.matrixU(), t.dl(), 2);
        next = Tensor3::from_right_matrix(svd.matrixV().adjoint() * next.right_matrix(), 2, next.dr());
        RealVector p = svd.singularValues().array().square().matrix();
        p /= p.sum();

        const Eigen::Index m = p.size();
        const RealVector flat = RealVector::Constant(m, 1.0 / static_cast<double>(m));
        RealVector delta = RealVector::Zero(m);
        delta(0) = 1.0;
        // alpha in [-1, 0]: flat -> random; alpha in [0, 1]: random -> single value.
        // Entropy is non-increasing along this path.
        auto spectrum = [&](double alpha) -> RealVector {
            if (alpha <= 0.0) return (1.0 + alpha) * p + (-alpha) * flat;
            return (1.0 - alpha) * p + alpha * delta;
        };
        auto f = [&](double alpha) { return entropy_of_probs(spectrum(alpha)) - target; };
        double lo = -1.0, hi = 1.0;
        double alpha = 0.0;
        bool found = false;
        if (std::abs(f(lo)) <= tol) alpha = lo, found = true;
        else if (std::abs(f(hi)) <= tol) alpha = hi, found = true;
        for (int it = 0; it < 200 && !found; ++it) {
            alpha = 0.5 * (lo + hi);
            const double v = f(alpha);
            if (std::abs(v) <= 0.25 * tol) found = true;
            else if (v > 0.0) lo = alpha;
            else hi = alpha;
        }
        if (!found) throw ConvergenceError(fmt::format("entropy matching did not reach {} within tolerance {}", target, tol));
        const RealVector lam = spectrum(alpha).array().sqrt().matrix();
        Tensor3 &c = psi.tensor(cut - 1);
        c = Tensor3::from_left_matrix(c.left_matrix() * lam.asDiagonal(), c.dl(), 2);
        psi.set_center(cut - 1);
    }
    auto [out, rep] = truncate(psi, chi, kDefaultSvdMin);
    (void)rep;
    const double s = half_chain_entropy(out, cut);
    if (std::abs(s - target) > tol)
        throw ConvergenceError(fmt::format("entropy {} after compression misses target {} (tol {})", s, target, tol));
    return out;
}

MpsSampler::MpsSampler(const MpsState &psi) : state_(psi) {
    state_.move_center(0);
    state_.normalize();
}

std::vector<std::uint8_t> MpsSampler::sample(CounterRng &rng) const {
    const int n = state_.size();
    std::vector<std::uint8_t> out(static_cast<size_t>(n), 0);
    Eigen::RowVectorXcd env = Eigen::RowVectorXcd::Ones(1);
    for (int k = 0; k < n; ++k) {
        const auto &t = state_.tensor(k);
        Eigen::RowVectorXcd w0 = env * t.slice(0);
        Eigen::RowVectorXcd w1 = env * t.slice(1);
        const double p0 = w0.squaredNorm();
        const double p1 = w1.squaredNorm();
        const double tot = p0 + p1;
        if (!(tot > 0.0) || !std::isfinite(tot)) throw NumericalFault("degenerate conditional in MPS sampling");
        const bool up = rng.uniform() * tot >= p0;
        out[static_cast<size_t>(k)] = up ? 1 : 0;
        env = up ? (w1 / std::sqrt(p1)).eval() : (w0 / std::sqrt(p0)).eval();
    }
    return out;
}

Snapshot sample_snapshot(const MpsState &psi, const LatticeGeometry &geom, CounterRng &rng) {
    if (psi.size() != geom.size()) throw InputDomainError("state and geometry sizes differ");
    return Snapshot{geom.rows(), geom.cols(), MpsSampler(psi).sample(rng)};
}

} // namespace fvd

namespace fvd {

MpsState apply_mpo(const Mpo &w, const MpsState &psi) {
    if (psi.size() != w.size()) throw InputDomainError("MPS and MPO lengths differ");
    std::vector<Tensor3> ts;
    ts.reserve(static_cast<size_t>(psi.size()));
    for (int k = 0; k < psi.size(); ++k) {
        const auto &a = psi.tensor(k);
        const auto &site = w[k];
        Tensor3 out(a.dl() * site.dl, 2, a.dr() * site.dr);
        // combined bond index: a + dl * w
        for (const auto &e : site.entries)
            for (int po = 0; po < 2; ++po)
                for (int pi = 0; pi < 2; ++pi) {
                    const cplx c = e.op(po, pi);
                    if (c == cplx{}) continue;
                    for (int b = 0; b < a.dr(); ++b)
                        for (int x = 0; x < a.dl(); ++x)
                            out(x + a.dl() * e.wl, po, b + a.dr() * e.wr) += c * a(x, pi, b);
                }
        ts.push_back(std::move(out));
    }
    return MpsState(std::move(ts), std::nullopt, psi.chi_max(), psi.svd_min());
}

double mpo_variance(const MpsState &psi, const Mpo &w) {
    const double n2 = overlap(psi, psi).real();
    const double e = expect_mpo(psi, w).real();
    const MpsState hpsi = apply_mpo(w, psi);
    const double h2 = overlap(hpsi, hpsi).real() / n2;
    return h2 - e * e;
}

std::vector<double> local_expectations(const MpsState &psi, Pauli op) {
    const int n = psi.size();
    const Matrix m = pauli_matrix(op);
    std::vector<Matrix> right(static_cast<size_t>(n + 1));
    right[static_cast<size_t>(n)] = Matrix::Ones(1, 1);
    for (int k = n - 1; k >= 0; --k)
        right[static_cast<size_t>(k)] = extend_overlap_right(right[static_cast<size_t>(k + 1)], psi.tensor(k), psi.tensor(k));
    const double norm2 = right[0](0, 0).real();
    std::vector<double> out(static_cast<size_t>(n));
    Matrix left = Matrix::Ones(1, 1);
    for (int k = 0; k < n; ++k) {
        const auto &t = psi.tensor(k);
        const Matrix with_op = extend_overlap_left(left, apply_local(t, m), t);
        out[static_cast<size_t>(k)] = (with_op.cwiseProduct(right[static_cast<size_t>(k + 1)])).sum().real() / norm2;
        left = extend_overlap_left(left, t, t);
    }
    return out;
}

MpsState flip_all_spins(const MpsState &psi) {
    MpsState out = psi;
    for (int k = 0; k < out.size(); ++k) {
        Tensor3 &t = out.tensor(k);
        const Matrix down = t.slice(0);
        t.slice(0) = t.slice(1);
        t.slice(1) = down;
    }
    return out;
}

} // namespace fvd
