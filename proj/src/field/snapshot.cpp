#include "ymf/field/snapshot.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "ymf/errors.hpp"

namespace ymf::field {

namespace {

constexpr char magic[4] = {'Y', 'M', 'F', '1'};

template <typename T>
void put(std::ostream &out, T value)
{
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big)
    std::reverse(bytes, bytes + sizeof(T));
  out.write(reinterpret_cast<const char *>(bytes), sizeof(T));
}

template <typename T>
T get(std::istream &in)
{
  unsigned char bytes[sizeof(T)];
  in.read(reinterpret_cast<char *>(bytes), sizeof(T));
  if (!in)
    throw ContractError("field", "read_snapshot", "truncated snapshot");
  if constexpr (std::endian::native == std::endian::big)
    std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

void put_matrix(std::ostream &out, const lie::Matrix &m)
{
  for (int i = 0; i < m.rank(); ++i)
    for (int j = 0; j < m.rank(); ++j)
    {
      put<double>(out, m(i, j).real());
      put<double>(out, m(i, j).imag());
    }
}

lie::Matrix get_matrix(std::istream &in, int rank)
{
  lie::Matrix m(rank);
  for (int i = 0; i < rank; ++i)
    for (int j = 0; j < rank; ++j)
    {
      const double re = get<double>(in);
      const double im = get<double>(in);
      m(i, j) = lie::Complex(re, im);
    }
  return m;
}

void put_header(std::ostream &out, const Lattice &lat, int rank, SnapshotKind kind)
{
  out.write(magic, 4);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(lat.dimension()));
  for (int mu = 0; mu < lat.dimension(); ++mu)
    put<std::uint32_t>(out, static_cast<std::uint32_t>(lat.extent(mu)));
  put<double>(out, lat.spacing());
  put<std::uint32_t>(out, static_cast<std::uint32_t>(rank));
  put<std::uint8_t>(out, static_cast<std::uint8_t>(kind));
}

template <int K>
void put_form(std::ostream &out, const Form<K> &w, SnapshotKind kind)
{
  put_header(out, w.lattice(), w.rank(), kind);
  for (const auto &v : w.values())
    put_matrix(out, v.matrix());
}

template <int K>
Form<K> get_form(std::istream &in, const Lattice &lat, int rank)
{
  Form<K> w(lat, rank);
  for (auto &v : w.values())
    v = AlgebraElement::from_matrix(get_matrix(in, rank));
  return w;
}

} // namespace

SnapshotKind kind_of(const SnapshotField &f)
{
  return static_cast<SnapshotKind>(f.index());
}

void write_snapshot(std::ostream &out, const SnapshotField &f)
{
  std::visit(
    [&](const auto &w) {
      using T = std::decay_t<decltype(w)>;
      if constexpr (std::is_same_v<T, GaugeTransform>)
      {
        put_header(out, w.lattice(), w.rank(), SnapshotKind::gauge_transform);
        for (const auto &g : w.values())
          put_matrix(out, g.matrix());
      }
      else
        put_form(out, w, kind_of(f));
    },
    f);
  if (!out)
    throw ContractError("field", "write_snapshot", "stream write failed");
}

void write_snapshot(const std::filesystem::path &path, const SnapshotField &f)
{
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw ContractError("field", "write_snapshot", "cannot open " + path.string());
  write_snapshot(out, f);
}

SnapshotField read_snapshot(std::istream &in)
{
  char head[4];
  in.read(head, 4);
  if (!in || std::memcmp(head, magic, 4) != 0)
    throw ContractError("field", "read_snapshot", "bad magic, expected YMF1");
  const auto n = get<std::uint32_t>(in);
  if (n < 2 || n > static_cast<std::uint32_t>(max_dimension))
    throw ContractError("field", "read_snapshot", "unsupported dimension " + std::to_string(n));
  std::vector<int> extents(n);
  for (auto &e : extents)
    e = static_cast<int>(get<std::uint32_t>(in));
  const double h = get<double>(in);
  const auto rank = static_cast<int>(get<std::uint32_t>(in));
  if (rank != 1 && rank != 2)
    throw ContractError("field", "read_snapshot", "unsupported group rank " + std::to_string(rank));
  const auto kind = get<std::uint8_t>(in);
  const Lattice lat(static_cast<int>(n), extents, h);

  switch (static_cast<SnapshotKind>(kind))
  {
    case SnapshotKind::connection:
      return get_form<1>(in, lat, rank);
    case SnapshotKind::section:
      return get_form<0>(in, lat, rank);
    case SnapshotKind::two_form:
      return get_form<2>(in, lat, rank);
    case SnapshotKind::gauge_transform:
    {
      GaugeTransform g(lat, rank);
      for (auto &v : g.values())
        v = GroupElement::from_matrix(get_matrix(in, rank));
      return g;
    }
  }
  throw ContractError("field", "read_snapshot", "unknown field kind " + std::to_string(kind));
}

SnapshotField read_snapshot(const std::filesystem::path &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ContractError("field", "read_snapshot", "cannot open " + path.string());
  return read_snapshot(in);
}

std::string encode_snapshot(const SnapshotField &f)
{
  std::ostringstream out(std::ios::binary);
  write_snapshot(out, f);
  return out.str();
}

SnapshotField decode_snapshot(const std::string &bytes)
{
  std::istringstream in(bytes, std::ios::binary);
  return read_snapshot(in);
}

} // namespace ymf::field
