#include "fvd/snapshot.hpp"

#include "fvd/errors.hpp"

#include <algorithm>
#include <fmt/format.h>
#include <fstream>
#include <sstream>

namespace fvd {

int Snapshot::up_count() const noexcept {
    return static_cast<int>(std::count_if(up.begin(), up.end(), [](std::uint8_t b) { return b != 0; }));
}

bool Snapshot::matches(const LatticeGeometry &geom) const noexcept {
    return rows == geom.rows() && cols == geom.cols() && size() == geom.size();
}

std::string Snapshot::to_bitstring(const LatticeGeometry &geom) const {
    if (!matches(geom)) throw InputDomainError("snapshot does not match geometry");
    std::string s(static_cast<size_t>(geom.size()), '0');
    for (int r = 0; r < geom.rows(); ++r)
        for (int c = 0; c < geom.cols(); ++c)
            if (up[static_cast<size_t>(geom.snake_index(r, c))]) s[static_cast<size_t>(r * geom.cols() + c)] = '1';
    return s;
}

Snapshot Snapshot::from_bitstring(const LatticeGeometry &geom, const std::string &bits) {
    if (static_cast<int>(bits.size()) != geom.size())
        throw InputDomainError(fmt::format("bit string has length {}, expected {}", bits.size(), geom.size()));
    Snapshot snap{geom.rows(), geom.cols(), std::vector<std::uint8_t>(bits.size(), 0)};
    for (int r = 0; r < geom.rows(); ++r)
        for (int c = 0; c < geom.cols(); ++c) {
            const char ch = bits[static_cast<size_t>(r * geom.cols() + c)];
            if (ch != '0' && ch != '1') throw InputDomainError(fmt::format("invalid snapshot character '{}'", ch));
            snap.up[static_cast<size_t>(geom.snake_index(r, c))] = (ch == '1') ? 1 : 0;
        }
    return snap;
}

void write_snapshot_file(const std::string &path, const SnapshotFile &file) {
    const LatticeGeometry geom(file.rows, file.cols);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(fmt::format("cannot open {} for writing", path));
    out << fmt::format("# rows={} cols={}\n", file.rows, file.cols);
    out << fmt::format("# time={:.17g}\n", file.time);
    out << fmt::format("# seed={}\n", file.seed);
    out << fmt::format("# shots={}\n", file.shots.size());
    for (const auto &s : file.shots) out << s.to_bitstring(geom) << '\n';
    if (!out) throw std::runtime_error(fmt::format("write failed for {}", path));
}

SnapshotFile read_snapshot_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(fmt::format("cannot open snapshot file {}", path));
    SnapshotFile file;
    bool have_geom = false;
    std::string line;
    std::vector<std::string> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream ss(line.substr(1));
            std::string kv;
            while (ss >> kv) {
                const auto eq = kv.find('=');
                if (eq == std::string::npos) continue;
                const std::string key = kv.substr(0, eq);
                const std::string val = kv.substr(eq + 1);
                if (key == "rows") file.rows = std::stoi(val), have_geom = true;
                else if (key == "cols") file.cols = std::stoi(val);
                else if (key == "time") file.time = std::stod(val);
                else if (key == "seed") file.seed = std::stoull(val);
            }
            continue;
        }
        rows.push_back(line);
    }
    if (!have_geom) throw InputDomainError(fmt::format("snapshot file {} lacks a geometry header", path));
    const LatticeGeometry geom(file.rows, file.cols);
    file.shots.reserve(rows.size());
    for (const auto &r : rows) file.shots.push_back(Snapshot::from_bitstring(geom, r));
    return file;
}

} // namespace fvd
