#include "fvd/mpo.hpp"

#include "fvd/errors.hpp"

#include <algorithm>
#include <fmt/format.h>
#include <map>

namespace fvd {

Mpo::Mpo(std::vector<MpoSite> sites) : sites_(std::move(sites)) {
    if (sites_.empty()) throw InputDomainError("MPO needs at least one site");
    if (sites_.front().dl != 1 || sites_.back().dr != 1) throw InputDomainError("MPO boundary channels must be 1");
    for (size_t k = 0; k + 1 < sites_.size(); ++k)
        if (sites_[k].dr != sites_[k + 1].dl) throw InputDomainError(fmt::format("MPO channel mismatch at bond {}", k));
}

int Mpo::max_bond() const noexcept {
    int m = 1;
    for (const auto &s : sites_) m = std::max(m, s.dr);
    return m;
}

Matrix Mpo::to_dense() const {
    const int n = size();
    if (n > 14) throw InputDomainError("dense MPO contraction limited to 14 sites");
    // block[w] is the operator on sites [0, k) ending in channel w.
    std::vector<Matrix> block{Matrix::Ones(1, 1)};
    for (int k = 0; k < n; ++k) {
        const auto &site = sites_[static_cast<size_t>(k)];
        const Eigen::Index dim = block.front().rows();
        std::vector<Matrix> next(static_cast<size_t>(site.dr), Matrix::Zero(dim * site.d, dim * site.d));
        for (const auto &e : site.entries) {
            // new site is the most significant bit
            const Matrix &b = block[static_cast<size_t>(e.wl)];
            auto &dst = next[static_cast<size_t>(e.wr)];
            for (int so = 0; so < site.d; ++so)
                for (int si = 0; si < site.d; ++si)
                    if (e.op(so, si) != cplx{}) dst.block(so * dim, si * dim, dim, dim) += e.op(so, si) * b;
        }
        block = std::move(next);
    }
    return block.front();
}

namespace {

// Channel layout per bond: 0 = nothing placed yet, 1 = complete, then open strings.
struct ChannelMap {
    std::vector<int> open_origins; // sorted
    [[nodiscard]] int dim() const { return 2 + static_cast<int>(open_origins.size()); }
    [[nodiscard]] int channel_of(int origin) const {
        auto it = std::lower_bound(open_origins.begin(), open_origins.end(), origin);
        if (it == open_origins.end() || *it != origin) return -1;
        return 2 + static_cast<int>(it - open_origins.begin());
    }
};

} // namespace

Mpo mpo_from_couplings(const CouplingList &terms) {
    const int n = terms.n_sites;
    if (n < 1) throw InputDomainError("coupling list has no sites");
    const Matrix id = pauli_matrix(Pauli::I);
    const Matrix x = pauli_matrix(Pauli::X);
    const Matrix z = pauli_matrix(Pauli::Z);

    std::vector<Matrix> onsite(static_cast<size_t>(n), Matrix::Zero(2, 2));
    for (const auto &t : terms.x) onsite[static_cast<size_t>(t.site)] += t.weight * x;
    for (const auto &t : terms.z) onsite[static_cast<size_t>(t.site)] += t.weight * z;

    // partners[i] : (j, weight) with j > i
    std::vector<std::map<int, double>> partners(static_cast<size_t>(n));
    for (const auto &t : terms.zz) {
        if (t.i == t.j || t.i < 0 || t.j < 0 || t.i >= n || t.j >= n)
            throw InputDomainError(fmt::format("invalid ZZ term ({}, {})", t.i, t.j));
        partners[static_cast<size_t>(std::min(t.i, t.j))][std::max(t.i, t.j)] += t.weight;
    }
    std::vector<int> reach(static_cast<size_t>(n), -1);
    for (int i = 0; i < n; ++i)
        if (!partners[static_cast<size_t>(i)].empty()) reach[static_cast<size_t>(i)] = partners[static_cast<size_t>(i)].rbegin()->first;

    // bonds[b] describes the channels to the right of site b.
    std::vector<ChannelMap> bonds(static_cast<size_t>(n));
    for (int b = 0; b < n; ++b)
        for (int i = 0; i <= b; ++i)
            if (reach[static_cast<size_t>(i)] > b) bonds[static_cast<size_t>(b)].open_origins.push_back(i);

    std::vector<MpoSite> sites(static_cast<size_t>(n));
    for (int k = 0; k < n; ++k) {
        auto &s = sites[static_cast<size_t>(k)];
        const bool first = (k == 0);
        const bool last = (k == n - 1);
        const ChannelMap empty_left{};
        const ChannelMap &lmap = first ? empty_left : bonds[static_cast<size_t>(k - 1)];
        const ChannelMap &rmap = bonds[static_cast<size_t>(k)];
        s.dl = first ? 1 : lmap.dim();
        s.dr = last ? 1 : rmap.dim();
        // On the boundaries only "start" (left) and "complete" (right) survive.
        auto lch = [&](int c) { return first ? (c == 0 ? 0 : -1) : c; };
        auto rch = [&](int c) { return last ? (c == 1 ? 0 : -1) : c; };
        auto add = [&](int wl, int wr, const Matrix &op) {
            if (wl < 0 || wr < 0) return;
            s.entries.push_back({wl, wr, op});
        };
        add(lch(0), rch(0), id);
        add(lch(0), rch(1), onsite[static_cast<size_t>(k)]);
        add(lch(1), rch(1), id);
        if (reach[static_cast<size_t>(k)] > k) add(lch(0), rch(rmap.channel_of(k)), z);
        if (!first) {
            for (int origin : lmap.open_origins) {
                const int wl = lmap.channel_of(origin);
                const auto &pmap = partners[static_cast<size_t>(origin)];
                if (auto it = pmap.find(k); it != pmap.end()) add(lch(wl), rch(1), it->second * z);
                if (reach[static_cast<size_t>(origin)] > k) add(lch(wl), rch(rmap.channel_of(origin)), id);
            }
        }
    }
    return Mpo(std::move(sites));
}

Mpo hamiltonian_mpo(const LatticeGeometry &geom, const ModelParams &p) {
    return mpo_from_couplings(hamiltonian_terms(geom, p));
}

Mpo ztot_mpo(int n_sites) {
    CouplingList c;
    c.n_sites = n_sites;
    for (int k = 0; k < n_sites; ++k) c.z.push_back({k, 1.0});
    return mpo_from_couplings(c);
}

Mpo ztot_squared_mpo(int n_sites) {
    if (n_sites < 1) throw InputDomainError("ztot_squared_mpo needs at least one site");
    const Matrix id = pauli_matrix(Pauli::I);
    const Matrix z = pauli_matrix(Pauli::Z);
    // channels: 0 = none, 1 = one Z placed, 2 = complete.
    // (sum Z)^2 = sum_i Z_i^2 + 2 sum_{i<j} Z_i Z_j
    std::vector<MpoSite> sites(static_cast<size_t>(n_sites));
    for (int k = 0; k < n_sites; ++k) {
        auto &s = sites[static_cast<size_t>(k)];
        const bool first = (k == 0);
        const bool last = (k == n_sites - 1);
        s.dl = first ? 1 : 3;
        s.dr = last ? 1 : 3;
        auto lch = [&](int c) { return first ? (c == 0 ? 0 : -1) : c; };
        auto rch = [&](int c) { return last ? (c == 2 ? 0 : -1) : c; };
        auto add = [&](int wl, int wr, Matrix op) {
            if (wl < 0 || wr < 0) return;
            s.entries.push_back({wl, wr, std::move(op)});
        };
        add(lch(0), rch(0), id);
        add(lch(0), rch(1), z);
        add(lch(0), rch(2), id); // Z^2 = I
        add(lch(1), rch(1), id);
        add(lch(1), rch(2), 2.0 * z);
        add(lch(2), rch(2), id);
    }
    return Mpo(std::move(sites));
}

} // namespace fvd
