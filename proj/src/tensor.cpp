#include "fvd/tensor.hpp"

#include "fvd/errors.hpp"

#include <fmt/format.h>

namespace fvd {

Matrix pauli_matrix(Pauli p) {
    Matrix m = Matrix::Zero(2, 2);
    switch (p) {
    case Pauli::I:
        m(0, 0) = 1.0;
        m(1, 1) = 1.0;
        break;
    case Pauli::X:
        m(0, 1) = 1.0;
        m(1, 0) = 1.0;
        break;
    case Pauli::Y:
        // Y|up> = i|down>, Y|down> = -i|up>
        m(0, 1) = cplx(0.0, 1.0);
        m(1, 0) = cplx(0.0, -1.0);
        break;
    case Pauli::Z:
        m(0, 0) = -1.0;
        m(1, 1) = 1.0;
        break;
    }
    return m;
}

char pauli_label(Pauli p) {
    switch (p) {
    case Pauli::I: return 'I';
    case Pauli::X: return 'X';
    case Pauli::Y: return 'Y';
    case Pauli::Z: return 'Z';
    }
    return '?';
}

Pauli parse_pauli(char c) {
    switch (c) {
    case 'I': case 'i': return Pauli::I;
    case 'X': case 'x': return Pauli::X;
    case 'Y': case 'y': return Pauli::Y;
    case 'Z': case 'z': return Pauli::Z;
    default: throw InputDomainError(fmt::format("unknown Pauli label '{}'", c));
    }
}

Tensor3 Tensor3::from_left_matrix(const Matrix &m, int dl, int d) {
    if (m.rows() != static_cast<Eigen::Index>(dl) * d)
        throw InputDomainError("left-grouped matrix has wrong row count");
    Tensor3 t(dl, d, static_cast<int>(m.cols()));
    t.left_matrix() = m;
    return t;
}

Tensor3 Tensor3::from_right_matrix(const Matrix &m, int d, int dr) {
    if (m.cols() != static_cast<Eigen::Index>(d) * dr)
        throw InputDomainError("right-grouped matrix has wrong column count");
    Tensor3 t(static_cast<int>(m.rows()), d, dr);
    t.right_matrix() = m;
    return t;
}

Tensor3 Tensor3::from_vector(const Vector &v, int dl, int d, int dr) {
    Tensor3 t(dl, d, dr);
    if (v.size() != t.numel()) throw InputDomainError("vector size does not match tensor shape");
    t.vec() = v;
    return t;
}

Tensor3 merge_two_sites(const Tensor3 &left, const Tensor3 &right) {
    if (left.dr() != right.dl()) throw InputDomainError("bond mismatch when merging sites");
    // (a s1) x k  times  k x (s2 b)  ->  (a s1) x (s2 b), which is exactly the
    // layout a + dl*(s1 + d1*(s2 + d2*b)).
    Matrix m = left.left_matrix() * right.right_matrix();
    Tensor3 out(left.dl(), left.d() * right.d(), right.dr());
    Eigen::Map<Matrix>(out.data(), m.rows(), m.cols()) = m;
    return out;
}

SvdSplit truncated_svd(const Matrix &m, int chi_max, double svd_min) {
    Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const RealVector &sv = svd.singularValues();
    const double total = sv.squaredNorm();
    if (!std::isfinite(total)) throw NumericalFault("non-finite singular values in truncation");
    const double scale = std::sqrt(total);
    Eigen::Index keep = 0;
    const Eigen::Index cap = std::min<Eigen::Index>(sv.size(), std::max(chi_max, 1));
    while (keep < cap && (keep == 0 || sv(keep) >= svd_min * scale)) ++keep;
    if (scale == 0.0) keep = 1;

    SvdSplit out;
    out.u = svd.matrixU().leftCols(keep);
    out.s = sv.head(keep);
    out.vh = svd.matrixV().leftCols(keep).adjoint();
    const double kept = out.s.squaredNorm();
    out.discarded = total > 0.0 ? sv.tail(sv.size() - keep).squaredNorm() / total : 0.0;
    out.kept_norm = std::sqrt(kept);
    return out;
}

MpoSite merge_mpo_sites(const MpoSite &left, const MpoSite &right) {
    if (left.dr != right.dl) throw InputDomainError("MPO bond mismatch when merging sites");
    MpoSite out;
    out.dl = left.dl;
    out.dr = right.dr;
    out.d = left.d * right.d;
    // Sum over the shared channel; entries with the same (wl, wr) are merged.
    std::vector<std::vector<int>> slot(static_cast<size_t>(out.dl), std::vector<int>(static_cast<size_t>(out.dr), -1));
    for (const auto &a : left.entries) {
        for (const auto &b : right.entries) {
            if (a.wr != b.wl) continue;
            Matrix op(out.d, out.d);
            // combined index p = s1 + d1*s2; kron(b, a) has exactly that ordering
            for (int s2o = 0; s2o < right.d; ++s2o)
                for (int s2i = 0; s2i < right.d; ++s2i)
                    op.block(s2o * left.d, s2i * left.d, left.d, left.d) = b.op(s2o, s2i) * a.op;
            int &idx = slot[static_cast<size_t>(a.wl)][static_cast<size_t>(b.wr)];
            if (idx < 0) {
                idx = static_cast<int>(out.entries.size());
                out.entries.push_back({a.wl, b.wr, std::move(op)});
            } else {
                out.entries[static_cast<size_t>(idx)].op += op;
            }
        }
    }
    return out;
}

Env boundary_env() { return Env{Matrix::Ones(1, 1)}; }

Env extend_left(const Env &left, const Tensor3 &ket, const Tensor3 &bra, const MpoSite &w) {
    const int d = ket.d();
    if (static_cast<int>(left.size()) != w.dl) throw InputDomainError("left environment / MPO channel mismatch");
    // LK[wl][p] = L[wl] * ket_p
    std::vector<std::vector<Matrix>> lk(left.size());
    std::vector<bool> used(left.size(), false);
    for (const auto &e : w.entries) used[static_cast<size_t>(e.wl)] = true;
    for (size_t wl = 0; wl < left.size(); ++wl) {
        if (!used[wl]) continue;
        lk[wl].resize(static_cast<size_t>(d));
        for (int p = 0; p < d; ++p) lk[wl][static_cast<size_t>(p)].noalias() = left[wl] * ket.slice(p);
    }
    std::vector<std::vector<Matrix>> acc(static_cast<size_t>(w.dr));
    for (const auto &e : w.entries) {
        auto &slot = acc[static_cast<size_t>(e.wr)];
        if (slot.empty()) slot.assign(static_cast<size_t>(d), Matrix::Zero(bra.dl(), ket.dr()));
        for (int po = 0; po < d; ++po)
            for (int pi = 0; pi < d; ++pi) {
                const cplx c = e.op(po, pi);
                if (c != cplx{}) slot[static_cast<size_t>(po)] += c * lk[static_cast<size_t>(e.wl)][static_cast<size_t>(pi)];
            }
    }
    Env out(static_cast<size_t>(w.dr));
    for (int wr = 0; wr < w.dr; ++wr) {
        Matrix m = Matrix::Zero(bra.dr(), ket.dr());
        const auto &slot = acc[static_cast<size_t>(wr)];
        if (!slot.empty())
            for (int p = 0; p < d; ++p) m.noalias() += bra.slice(p).adjoint() * slot[static_cast<size_t>(p)];
        out[static_cast<size_t>(wr)] = std::move(m);
    }
    return out;
}

Env extend_right(const Env &right, const Tensor3 &ket, const Tensor3 &bra, const MpoSite &w) {
    const int d = ket.d();
    if (static_cast<int>(right.size()) != w.dr) throw InputDomainError("right environment / MPO channel mismatch");
    std::vector<std::vector<Matrix>> rk(right.size());
    std::vector<bool> used(right.size(), false);
    for (const auto &e : w.entries) used[static_cast<size_t>(e.wr)] = true;
    for (size_t wr = 0; wr < right.size(); ++wr) {
        if (!used[wr]) continue;
        rk[wr].resize(static_cast<size_t>(d));
        for (int p = 0; p < d; ++p) rk[wr][static_cast<size_t>(p)].noalias() = right[wr] * ket.slice(p).transpose();
    }
    std::vector<std::vector<Matrix>> acc(static_cast<size_t>(w.dl));
    for (const auto &e : w.entries) {
        auto &slot = acc[static_cast<size_t>(e.wl)];
        if (slot.empty()) slot.assign(static_cast<size_t>(d), Matrix::Zero(bra.dr(), ket.dl()));
        for (int po = 0; po < d; ++po)
            for (int pi = 0; pi < d; ++pi) {
                const cplx c = e.op(po, pi);
                if (c != cplx{}) slot[static_cast<size_t>(po)] += c * rk[static_cast<size_t>(e.wr)][static_cast<size_t>(pi)];
            }
    }
    Env out(static_cast<size_t>(w.dl));
    for (int wl = 0; wl < w.dl; ++wl) {
        Matrix m = Matrix::Zero(bra.dl(), ket.dl());
        const auto &slot = acc[static_cast<size_t>(wl)];
        if (!slot.empty())
            for (int p = 0; p < d; ++p) m.noalias() += bra.slice(p).conjugate() * slot[static_cast<size_t>(p)];
        out[static_cast<size_t>(wl)] = std::move(m);
    }
    return out;
}

Tensor3 apply_effective(const Env &left, const MpoSite &w, const Env &right, const Tensor3 &x) {
    const int d = x.d();
    std::vector<std::vector<Matrix>> lx(left.size());
    std::vector<bool> used(left.size(), false);
    for (const auto &e : w.entries) used[static_cast<size_t>(e.wl)] = true;
    for (size_t wl = 0; wl < left.size(); ++wl) {
        if (!used[wl]) continue;
        lx[wl].resize(static_cast<size_t>(d));
        for (int p = 0; p < d; ++p) lx[wl][static_cast<size_t>(p)].noalias() = left[wl] * x.slice(p);
    }
    const int out_dl = static_cast<int>(left.empty() ? x.dl() : left.front().rows());
    const int out_dr = static_cast<int>(right.empty() ? x.dr() : right.front().rows());
    std::vector<std::vector<Matrix>> acc(right.size());
    for (const auto &e : w.entries) {
        auto &slot = acc[static_cast<size_t>(e.wr)];
        if (slot.empty()) slot.assign(static_cast<size_t>(d), Matrix::Zero(out_dl, x.dr()));
        for (int po = 0; po < d; ++po)
            for (int pi = 0; pi < d; ++pi) {
                const cplx c = e.op(po, pi);
                if (c != cplx{}) slot[static_cast<size_t>(po)] += c * lx[static_cast<size_t>(e.wl)][static_cast<size_t>(pi)];
            }
    }
    Tensor3 out(out_dl, d, out_dr);
    for (size_t wr = 0; wr < right.size(); ++wr) {
        if (acc[wr].empty()) continue;
        for (int p = 0; p < d; ++p) out.slice(p).noalias() += acc[wr][static_cast<size_t>(p)] * right[wr].transpose();
    }
    return out;
}

Matrix extend_overlap_left(const Matrix &e, const Tensor3 &ket, const Tensor3 &bra) {
    Matrix out = Matrix::Zero(bra.dr(), ket.dr());
    for (int p = 0; p < ket.d(); ++p) out.noalias() += bra.slice(p).adjoint() * (e * ket.slice(p));
    return out;
}

Matrix extend_overlap_right(const Matrix &e, const Tensor3 &ket, const Tensor3 &bra) {
    Matrix out = Matrix::Zero(bra.dl(), ket.dl());
    for (int p = 0; p < ket.d(); ++p) out.noalias() += bra.slice(p).conjugate() * (e * ket.slice(p).transpose());
    return out;
}

} // namespace fvd
