#include "fvd/clusters.hpp"

#include "fvd/errors.hpp"

#include <algorithm>
#include <fmt/format.h>
#include <fstream>
#include <numeric>

namespace fvd {

namespace {

class DisjointSets {
  public:
    explicit DisjointSets(int n) : parent_(static_cast<size_t>(n)), size_(static_cast<size_t>(n), 1) {
        std::iota(parent_.begin(), parent_.end(), 0);
    }

    int find(int x) {
        int root = x;
        while (parent_[static_cast<size_t>(root)] != root) root = parent_[static_cast<size_t>(root)];
        while (parent_[static_cast<size_t>(x)] != root) {
            const int next = parent_[static_cast<size_t>(x)];
            parent_[static_cast<size_t>(x)] = root;
            x = next;
        }
        return root;
    }

    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (size_[static_cast<size_t>(a)] < size_[static_cast<size_t>(b)]) std::swap(a, b);
        parent_[static_cast<size_t>(b)] = a;
        size_[static_cast<size_t>(a)] += size_[static_cast<size_t>(b)];
    }

    [[nodiscard]] int size_of_root(int r) const { return size_[static_cast<size_t>(r)]; }

  private:
    std::vector<int> parent_;
    std::vector<int> size_;
};

bool flipped(std::uint8_t up, ClusterReference ref) { return ref == ClusterReference::Down ? up != 0 : up == 0; }

std::ofstream open_csv(const std::string &path, const char *header) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error(fmt::format("cannot open {} for writing", path));
    f << header << '\n';
    return f;
}

void write_map(const std::string &path, const char *header, const std::map<int, double> &m) {
    auto f = open_csv(path, header);
    for (const auto &[k, v] : m) f << fmt::format("{},{:.17g}\n", k, v);
    if (!f) throw std::runtime_error(fmt::format("write failed for {}", path));
}

} // namespace

ClusterReference parse_cluster_reference(const std::string &s) {
    if (s == "down") return ClusterReference::Down;
    if (s == "up") return ClusterReference::Up;
    throw InputDomainError(fmt::format("unknown cluster reference '{}' (expected down or up)", s));
}

std::vector<int> find_clusters(const Snapshot &snap, const LatticeGeometry &geom, ClusterReference ref) {
    if (!snap.matches(geom)) throw InputDomainError("snapshot does not match the lattice geometry");
    const int n = geom.size();
    DisjointSets ds(n);
    for (const Bond &b : geom.bonds())
        if (flipped(snap.up[static_cast<size_t>(b.i)], ref) && flipped(snap.up[static_cast<size_t>(b.j)], ref))
            ds.unite(b.i, b.j);
    std::vector<int> sizes;
    for (int k = 0; k < n; ++k)
        if (flipped(snap.up[static_cast<size_t>(k)], ref) && ds.find(k) == k) sizes.push_back(ds.size_of_root(k));
    std::sort(sizes.begin(), sizes.end(), std::greater<>());
    return sizes;
}

ClusterAccumulator::ClusterAccumulator(const LatticeGeometry &geom, ClusterReference ref)
    : geom_(geom), ref_(ref), cluster_count_(static_cast<size_t>(geom.size() + 1), 0),
      smax_count_(static_cast<size_t>(geom.size() + 1), 0), hamming_count_(static_cast<size_t>(geom.size() + 1), 0) {}

void ClusterAccumulator::add(const Snapshot &snap) {
    const auto sizes = find_clusters(snap, geom_, ref_);
    int mass = 0;
    for (int s : sizes) {
        ++cluster_count_[static_cast<size_t>(s)];
        mass += s;
    }
    const int n_flipped = ref_ == ClusterReference::Down ? snap.up_count() : snap.size() - snap.up_count();
    if (mass != n_flipped) throw NumericalFault("cluster mass does not match the flipped-spin count");
    ++smax_count_[static_cast<size_t>(sizes.empty() ? 0 : sizes.front())];
    ++hamming_count_[static_cast<size_t>(n_flipped)];
    ++shots_;
}

void ClusterAccumulator::merge(const ClusterAccumulator &other) {
    if (!(other.geom_ == geom_) || other.ref_ != ref_) throw InputDomainError("cannot merge accumulators of different setups");
    for (size_t i = 0; i < cluster_count_.size(); ++i) {
        cluster_count_[i] += other.cluster_count_[i];
        smax_count_[i] += other.smax_count_[i];
        hamming_count_[i] += other.hamming_count_[i];
    }
    shots_ += other.shots_;
}

ClusterStats ClusterAccumulator::stats(double time) const {
    if (shots_ == 0) throw InputDomainError("no shots accumulated");
    ClusterStats st;
    st.shots = shots_;
    st.time = time;
    const auto total = static_cast<double>(shots_);
    for (size_t s = 0; s < cluster_count_.size(); ++s) {
        const int key = static_cast<int>(s);
        if (cluster_count_[s] > 0) st.n_of_s[key] = static_cast<double>(cluster_count_[s]) / total;
        if (smax_count_[s] > 0) st.p_smax[key] = static_cast<double>(smax_count_[s]) / total;
        if (hamming_count_[s] > 0) st.hamming_hist[key] = static_cast<double>(hamming_count_[s]) / total;
    }
    return st;
}

ClusterStats accumulate_stats(const std::vector<Snapshot> &shots, const LatticeGeometry &geom, ClusterReference ref,
                              double time) {
    if (shots.empty()) throw InputDomainError("accumulate_stats: empty shot list");
    ClusterAccumulator acc(geom, ref);
    for (const auto &s : shots) acc.add(s);
    return acc.stats(time);
}

PmaxHeatmap pmax_heatmap(const std::vector<TimedShots> &slices, const LatticeGeometry &geom, ClusterReference ref) {
    PmaxHeatmap out;
    for (const auto &slice : slices) {
        const ClusterStats st = accumulate_stats(slice.shots, geom, ref, slice.time);
        std::vector<double> row(static_cast<size_t>(geom.size() + 1), 0.0);
        for (const auto &[s, p] : st.p_smax) row[static_cast<size_t>(s)] = p;
        out.times.push_back(slice.time);
        out.p.push_back(std::move(row));
    }
    return out;
}

void write_n_of_s_csv(const std::string &path, const ClusterStats &stats) { write_map(path, "s,n", stats.n_of_s); }
void write_p_smax_csv(const std::string &path, const ClusterStats &stats) { write_map(path, "s_max,p", stats.p_smax); }
void write_hamming_csv(const std::string &path, const ClusterStats &stats) { write_map(path, "d,p", stats.hamming_hist); }

void write_pmax_heatmap_csv(const std::string &path, const PmaxHeatmap &map) {
    auto f = open_csv(path, "t,s_max,p");
    for (size_t i = 0; i < map.times.size(); ++i)
        for (size_t s = 0; s < map.p[i].size(); ++s) f << fmt::format("{:.10g},{},{:.17g}\n", map.times[i], s, map.p[i][s]);
    if (!f) throw std::runtime_error(fmt::format("write failed for {}", path));
}

} // namespace fvd
