#pragma once

#include "fvd/lattice.hpp"
#include "fvd/snapshot.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace fvd {

/// Which polarization counts as unflipped. Down: up spins are flipped.
enum class ClusterReference { Down, Up };

[[nodiscard]] ClusterReference parse_cluster_reference(const std::string &s);

/// Sizes of the nearest-neighbour-connected clusters of flipped spins,
/// in descending order.
[[nodiscard]] std::vector<int> find_clusters(const Snapshot &snap, const LatticeGeometry &geom,
                                             ClusterReference ref = ClusterReference::Down);

struct ClusterStats {
    std::map<int, double> n_of_s;       // size -> mean number of clusters per shot
    std::map<int, double> p_smax;       // largest size (0 = no flips) -> probability
    std::map<int, double> hamming_hist; // distance from the reference -> probability
    std::int64_t shots = 0;
    double time = 0.0;
};

/// Integer tallies over shots. merge() is associative and commutative, so
/// per-thread partial results can be combined in any order.
class ClusterAccumulator {
  public:
    explicit ClusterAccumulator(const LatticeGeometry &geom, ClusterReference ref = ClusterReference::Down);

    void add(const Snapshot &snap);
    void merge(const ClusterAccumulator &other);
    [[nodiscard]] ClusterStats stats(double time = 0.0) const;
    [[nodiscard]] std::int64_t shots() const noexcept { return shots_; }

  private:
    LatticeGeometry geom_;
    ClusterReference ref_;
    std::vector<std::int64_t> cluster_count_; // by size 0..N
    std::vector<std::int64_t> smax_count_;
    std::vector<std::int64_t> hamming_count_;
    std::int64_t shots_ = 0;
};

[[nodiscard]] ClusterStats accumulate_stats(const std::vector<Snapshot> &shots, const LatticeGeometry &geom,
                                            ClusterReference ref = ClusterReference::Down, double time = 0.0);

struct TimedShots {
    double time;
    std::vector<Snapshot> shots;
};

/// P_max(s_max, t): row i is the largest-cluster distribution at times[i],
/// columns s_max = 0..N.
struct PmaxHeatmap {
    std::vector<double> times;
    std::vector<std::vector<double>> p;
};

[[nodiscard]] PmaxHeatmap pmax_heatmap(const std::vector<TimedShots> &slices, const LatticeGeometry &geom,
                                       ClusterReference ref = ClusterReference::Down);

void write_n_of_s_csv(const std::string &path, const ClusterStats &stats);
void write_p_smax_csv(const std::string &path, const ClusterStats &stats);
void write_hamming_csv(const std::string &path, const ClusterStats &stats);
void write_pmax_heatmap_csv(const std::string &path, const PmaxHeatmap &map);

} // namespace fvd
