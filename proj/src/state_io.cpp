#include "fvd/state_io.hpp"

#include "fvd/errors.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fmt/format.h>
#include <fstream>

namespace fvd {

namespace {

constexpr std::array<char, 8> kMagic{'F', 'V', 'D', 'M', 'P', 'S', '0', '1'};

template <class T> void put(std::ostream &out, T value) {
    std::array<char, sizeof(T)> bytes;
    std::memcpy(bytes.data(), &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
    out.write(bytes.data(), bytes.size());
}

template <class T> T get(std::istream &in) {
    std::array<char, sizeof(T)> bytes;
    if (!in.read(bytes.data(), bytes.size())) throw ConfigError("state file is truncated");
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
    T value;
    std::memcpy(&value, bytes.data(), sizeof(T));
    return value;
}

} // namespace

void write_state_file(const std::string &path, const StateFile &file) {
    if (file.state.size() != file.geom.size()) throw InputDomainError("state does not match the geometry");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(fmt::format("cannot open {} for writing", path));
    out.write(kMagic.data(), kMagic.size());
    put<std::int32_t>(out, file.geom.rows());
    put<std::int32_t>(out, file.geom.cols());
    put<double>(out, file.params.J);
    put<double>(out, file.params.g);
    put<double>(out, file.params.h);
    put<std::int32_t>(out, file.state.chi_max());
    put<double>(out, file.state.svd_min());
    put<std::int32_t>(out, file.state.center().value_or(-1));
    put<double>(out, file.energy);
    put<std::int32_t>(out, file.state.size());
    for (const Tensor3 &t : file.state.tensors()) {
        put<std::int32_t>(out, t.dl());
        put<std::int32_t>(out, t.d());
        put<std::int32_t>(out, t.dr());
        for (Eigen::Index i = 0; i < t.numel(); ++i) {
            put<double>(out, t.data()[i].real());
            put<double>(out, t.data()[i].imag());
        }
    }
    if (!out) throw std::runtime_error(fmt::format("write failed for {}", path));
}

StateFile read_state_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(fmt::format("cannot open state file {}", path));
    std::array<char, 8> magic{};
    if (!in.read(magic.data(), magic.size()) || magic != kMagic) throw ConfigError(fmt::format("{} is not a state file", path));
    const int rows = get<std::int32_t>(in);
    const int cols = get<std::int32_t>(in);
    ModelParams p;
    p.J = get<double>(in);
    p.g = get<double>(in);
    p.h = get<double>(in);
    const int chi = get<std::int32_t>(in);
    const double svd_min = get<double>(in);
    const int center = get<std::int32_t>(in);
    const double energy = get<double>(in);
    const int n = get<std::int32_t>(in);
    LatticeGeometry geom(rows, cols);
    if (n != geom.size()) throw ConfigError("state file site count does not match its geometry");
    std::vector<Tensor3> tensors;
    tensors.reserve(static_cast<size_t>(n));
    int prev = 1;
    for (int k = 0; k < n; ++k) {
        const int dl = get<std::int32_t>(in);
        const int d = get<std::int32_t>(in);
        const int dr = get<std::int32_t>(in);
        if (dl != prev || d != 2 || dr < 1 || dr > (1 << 20) || (k == n - 1 && dr != 1))
            throw ConfigError(fmt::format("state file has inconsistent bond dimensions at site {}", k));
        Tensor3 t(dl, d, dr);
        for (Eigen::Index i = 0; i < t.numel(); ++i) {
            const double re = get<double>(in);
            const double im = get<double>(in);
            t.data()[i] = cplx(re, im);
        }
        tensors.push_back(std::move(t));
        prev = dr;
    }
    std::optional<int> c;
    if (center >= 0 && center < n) c = center;
    return StateFile{geom, p, MpsState(std::move(tensors), c, chi, svd_min), energy};
}

} // namespace fvd
