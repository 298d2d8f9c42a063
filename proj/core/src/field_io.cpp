#include "obslab/field_io.hpp"

#include <array>
#include <cmath>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace obslab {

namespace {

constexpr std::array<char, 8> kMagic{'O', 'B', 'S', 'G', 'R', 'I', 'D', '1'};

template <class T>
void put_le(std::ostream& out, T value) {
  static_assert(sizeof(T) == 4 || sizeof(T) == 8);
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  const U bits = std::bit_cast<U>(value);
  std::array<char, sizeof(T)> bytes{};
  for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xffu);
  out.write(bytes.data(), bytes.size());
}

template <class T>
T get_le(std::istream& in) {
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  std::array<unsigned char, sizeof(T)> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (!in) throw FormatError("grid file is truncated");
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) bits |= static_cast<U>(bytes[i]) << (8 * i);
  return std::bit_cast<T>(bits);
}

}  // namespace

void write_field(std::ostream& out, const ScalarField& field) {
  const GridSpec& g = field.grid();
  const int n = g.dimension();
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(n));
  for (int a = 0; a < n; ++a) put_le<std::uint64_t>(out, g.nodes(a));
  for (int a = 0; a < n; ++a) put_le<double>(out, g.lower(a));
  for (int a = 0; a < n; ++a) put_le<double>(out, g.upper(a));
  for (double v : field.values()) put_le<double>(out, v);
  if (!out) throw FormatError("failed to write grid file");
}

void write_field(const std::filesystem::path& path, const ScalarField& field) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  write_field(out, field);
}

ScalarField read_field(std::istream& in) {
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw FormatError("not an OBSGRID1 file");
  const auto n = get_le<std::uint32_t>(in);
  if (n < 1 || n > kMaxDimension) throw FormatError("grid file has invalid dimension");
  std::array<std::size_t, kMaxDimension> nodes{};
  std::array<double, kMaxDimension> lo{};
  std::array<double, kMaxDimension> hi{};
  for (std::uint32_t a = 0; a < n; ++a) nodes[a] = static_cast<std::size_t>(get_le<std::uint64_t>(in));
  for (std::uint32_t a = 0; a < n; ++a) lo[a] = get_le<double>(in);
  for (std::uint32_t a = 0; a < n; ++a) hi[a] = get_le<double>(in);
  std::size_t total = 1;
  for (std::uint32_t a = 0; a < n; ++a) {
    if (nodes[a] == 0 || nodes[a] > (std::size_t{1} << 24)) throw FormatError("grid file has invalid node count");
    total *= nodes[a];
  }
  GridSpec grid = [&] {
    try {
      return GridSpec(static_cast<int>(n), std::span(lo).first(n), std::span(hi).first(n),
                      std::span(nodes).first(n));
    } catch (const InvalidGridError& e) {
      throw FormatError(std::string("grid file header is invalid: ") + e.what());
    }
  }();
  std::vector<double> values(total);
  for (auto& v : values) v = get_le<double>(in);
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError("grid file has trailing bytes");
  try {
    return ScalarField(std::move(grid), std::move(values));
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("grid file holds non-finite values: ") + e.what());
  }
}

ScalarField read_field(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return read_field(in);
}

namespace {

void write_gray(const std::filesystem::path& path, std::size_t rows, std::size_t cols,
                const std::vector<unsigned char>& pixels) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out << "P5\n" << cols << ' ' << rows << "\n255\n";
  out.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
}

}  // namespace

void write_pgm(const std::filesystem::path& path, const ScalarField& field) {
  const GridSpec& g = field.grid();
  if (g.dimension() != 2) throw std::invalid_argument("graymap output needs a 2D field");
  const double lo = field.min();
  const double hi = field.max();
  const double scale = hi > lo ? 255.0 / (hi - lo) : 0.0;
  std::vector<unsigned char> px(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    px[i] = static_cast<unsigned char>(std::lround((field[i] - lo) * scale));
  }
  write_gray(path, g.nodes(0), g.nodes(1), px);
}

void write_pgm(const std::filesystem::path& path, const GridSpec& grid, const std::vector<bool>& mask) {
  if (grid.dimension() != 2) throw std::invalid_argument("graymap output needs a 2D field");
  if (mask.size() != grid.size()) throw std::invalid_argument("mask size does not match grid");
  std::vector<unsigned char> px(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) px[i] = mask[i] ? 255 : 0;
  write_gray(path, grid.nodes(0), grid.nodes(1), px);
}

}  // namespace obslab
