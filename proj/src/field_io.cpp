#include "spde/field_io.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>

#include <fmt/format.h>

#include "spde/error.hpp"

namespace spde::io {

namespace {

static_assert(std::endian::native == std::endian::little,
              "SPDF1 writer assumes a little-endian host");

constexpr std::array<char, 5> kMagic = {'S', 'P', 'D', 'F', '1'};

template <typename T>
void put(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
    T v{};
    if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) {
        throw InputError("SPDF1: truncated stream");
    }
    return v;
}

} // namespace

void write_field_csv(std::ostream& os, const Field& field) {
    const auto& g = field.grid();
    os << 't';
    for (std::size_t a = 0; a < g.dim(); ++a) os << ",x" << (a + 1);
    os << ",value\n";
    std::string line;
    for (std::size_t r = 0; r < field.rows(); ++r) {
        const double t = field.row_time(r);
        for (std::size_t c = 0; c < field.row_size(); ++c) {
            line = fmt::format("{:.17g}", t);
            for (std::size_t i : g.unflatten(c)) line += fmt::format(",{:.17g}", g.center(i));
            line += fmt::format(",{:.17g}\n", field.at(r, c));
            os << line;
        }
    }
}

void write_field_binary(std::ostream& os, const Field& field, const std::string& metadata) {
    const auto& g = field.grid();
    os.write(kMagic.data(), kMagic.size());
    put<std::uint8_t>(os, field.layout() == Field::Layout::cells ? 0 : 1);
    put<std::uint8_t>(os, static_cast<std::uint8_t>(g.dim()));
    put<std::uint8_t>(os, 0);
    put<double>(os, g.time().t_max());
    put<std::uint64_t>(os, g.time().n_steps());
    put<double>(os, g.half_width());
    put<std::uint64_t>(os, g.n_cells());
    put<std::uint64_t>(os, field.rows());
    for (std::size_t k : field.steps()) put<std::uint64_t>(os, k);
    put<std::uint64_t>(os, metadata.size());
    os.write(metadata.data(), static_cast<std::streamsize>(metadata.size()));
    os.write(reinterpret_cast<const char*>(field.values().data()),
             static_cast<std::streamsize>(field.values().size() * sizeof(double)));
}

LoadedField read_field_binary(std::istream& is) {
    std::array<char, 5> magic{};
    if (!is.read(magic.data(), magic.size()) || magic != kMagic) {
        throw InputError("SPDF1: bad magic bytes");
    }
    const auto layout = get<std::uint8_t>(is);
    const auto dim = get<std::uint8_t>(is);
    (void)get<std::uint8_t>(is);
    if (layout > 1) throw InputError("SPDF1: unknown layout");
    const double t_max = get<double>(is);
    const auto n_steps = get<std::uint64_t>(is);
    const double half_width = get<double>(is);
    const auto n_cells = get<std::uint64_t>(is);
    const auto n_rows = get<std::uint64_t>(is);
    if (n_rows > n_steps + 1) throw InputError("SPDF1: row count exceeds grid");

    SpaceTimeGrid grid(TimeGrid(t_max, n_steps), half_width, n_cells, dim);
    std::vector<std::size_t> steps(n_rows);
    for (auto& k : steps) k = get<std::uint64_t>(is);
    const auto meta_len = get<std::uint64_t>(is);
    if (meta_len > (std::uint64_t{1} << 30)) throw InputError("SPDF1: metadata too large");
    std::string metadata(meta_len, '\0');
    if (!is.read(metadata.data(), static_cast<std::streamsize>(meta_len))) {
        throw InputError("SPDF1: truncated metadata");
    }

    Field field = layout == 0 ? Field(grid, Field::Layout::cells) : Field(grid, steps);
    if (layout == 0 && field.steps() != steps) throw InputError("SPDF1: cell rows must cover all slabs");
    auto& v = field.values();
    if (!is.read(reinterpret_cast<char*>(v.data()),
                 static_cast<std::streamsize>(v.size() * sizeof(double)))) {
        throw InputError("SPDF1: truncated values");
    }
    return {std::move(field), std::move(metadata)};
}

} // namespace spde::io
