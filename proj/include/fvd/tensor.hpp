#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace fvd {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

// Local basis: index 0 = spin down, 1 = spin up.
enum class Pauli { I, X, Y, Z };

[[nodiscard]] Matrix pauli_matrix(Pauli p);
[[nodiscard]] char pauli_label(Pauli p);
[[nodiscard]] Pauli parse_pauli(char c);

/// Rank-3 tensor T(a, p, b) with left bond a, physical index p (dimension d)
/// and right bond b, stored column-major as a + dl*(p + d*b).
///
/// With this layout the left-grouped matrix (a p) x b and the right-grouped
/// matrix a x (p b) are both plain reinterpretations of the buffer, and the
/// physical slice T(:, p, :) is a strided view.
class Tensor3 {
  public:
    using SliceMap = Eigen::Map<Matrix, 0, Eigen::OuterStride<>>;
    using ConstSliceMap = Eigen::Map<const Matrix, 0, Eigen::OuterStride<>>;

    Tensor3() = default;
    Tensor3(int dl, int d, int dr) : dl_(dl), d_(d), dr_(dr), data_(static_cast<size_t>(dl) * d * dr, cplx{}) {}

    [[nodiscard]] int dl() const noexcept { return dl_; }
    [[nodiscard]] int d() const noexcept { return d_; }
    [[nodiscard]] int dr() const noexcept { return dr_; }
    [[nodiscard]] Eigen::Index numel() const noexcept { return static_cast<Eigen::Index>(data_.size()); }

    cplx &operator()(int a, int p, int b) { return data_[index(a, p, b)]; }
    const cplx &operator()(int a, int p, int b) const { return data_[index(a, p, b)]; }

    cplx *data() noexcept { return data_.data(); }
    const cplx *data() const noexcept { return data_.data(); }

    [[nodiscard]] SliceMap slice(int p) {
        return {data_.data() + static_cast<size_t>(dl_) * p, dl_, dr_, Eigen::OuterStride<>(dl_ * d_)};
    }
    [[nodiscard]] ConstSliceMap slice(int p) const {
        return {data_.data() + static_cast<size_t>(dl_) * p, dl_, dr_, Eigen::OuterStride<>(dl_ * d_)};
    }

    [[nodiscard]] Eigen::Map<Matrix> left_matrix() { return {data_.data(), dl_ * d_, dr_}; }
    [[nodiscard]] Eigen::Map<const Matrix> left_matrix() const { return {data_.data(), dl_ * d_, dr_}; }
    [[nodiscard]] Eigen::Map<Matrix> right_matrix() { return {data_.data(), dl_, d_ * dr_}; }
    [[nodiscard]] Eigen::Map<const Matrix> right_matrix() const { return {data_.data(), dl_, d_ * dr_}; }

    /// Flat view, used as the vector for Krylov solvers.
    [[nodiscard]] Eigen::Map<Vector> vec() { return {data_.data(), numel()}; }
    [[nodiscard]] Eigen::Map<const Vector> vec() const { return {data_.data(), numel()}; }

    static Tensor3 from_left_matrix(const Matrix &m, int dl, int d);
    static Tensor3 from_right_matrix(const Matrix &m, int d, int dr);
    static Tensor3 from_vector(const Vector &v, int dl, int d, int dr);

  private:
    [[nodiscard]] size_t index(int a, int p, int b) const noexcept {
        return static_cast<size_t>(a) + static_cast<size_t>(dl_) * (static_cast<size_t>(p) + static_cast<size_t>(d_) * b);
    }

    int dl_ = 0;
    int d_ = 0;
    int dr_ = 0;
    std::vector<cplx> data_;
};

/// Contract A(a, s1, k) B(k, s2, b) into a two-site tensor with physical index s1 + 2*s2.
[[nodiscard]] Tensor3 merge_two_sites(const Tensor3 &left, const Tensor3 &right);

struct SvdSplit {
    Matrix u;          // columns: left singular vectors
    RealVector s;      // retained singular values, descending
    Matrix vh;         // rows: right singular vectors (already adjoint)
    double discarded;  // sum of squared dropped singular values / total
    double kept_norm;  // sqrt of sum of squared kept singular values
};

/// SVD truncated to at most `chi_max` values, dropping any singular value
/// below svd_min * ||s||_2 (i.e. below svd_min for a normalized state). At
/// least one value is always kept.
[[nodiscard]] SvdSplit truncated_svd(const Matrix &m, int chi_max, double svd_min);

struct MpoEntry {
    int wl;
    int wr;
    Matrix op; // d x d, op(out, in)
};

/// One site of a matrix-product operator stored as a sparse list of
/// (left channel, right channel, local operator) entries.
struct MpoSite {
    int dl = 1;
    int dr = 1;
    int d = 2;
    std::vector<MpoEntry> entries;
};

/// Fuse two neighbouring MPO sites into one with physical dimension d1*d2
/// and combined index s1 + d1*s2.
[[nodiscard]] MpoSite merge_mpo_sites(const MpoSite &left, const MpoSite &right);

/// Left/right block of <bra| MPO |ket>: one (bra bond) x (ket bond) matrix per
/// MPO channel.
using Env = std::vector<Matrix>;

[[nodiscard]] Env boundary_env();

/// L'[wr] = sum op(p',p) bra_p'^dagger L[wl] ket_p
[[nodiscard]] Env extend_left(const Env &left, const Tensor3 &ket, const Tensor3 &bra, const MpoSite &w);
/// R'[wl] = sum op(p',p) conj(bra_p') R[wr] ket_p^T
[[nodiscard]] Env extend_right(const Env &right, const Tensor3 &ket, const Tensor3 &bra, const MpoSite &w);

/// Effective-Hamiltonian action on a local tensor x with environments L, R.
[[nodiscard]] Tensor3 apply_effective(const Env &left, const MpoSite &w, const Env &right, const Tensor3 &x);

/// Overlap environments without an operator: E' = sum_p bra_p^dagger E ket_p.
[[nodiscard]] Matrix extend_overlap_left(const Matrix &e, const Tensor3 &ket, const Tensor3 &bra);
[[nodiscard]] Matrix extend_overlap_right(const Matrix &e, const Tensor3 &ket, const Tensor3 &bra);

} // namespace fvd
