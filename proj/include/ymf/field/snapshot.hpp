#pragma once

// "YMF1" binary field snapshots.
//
//   magic  "YMF1"                          4 bytes ASCII
//   u32    dimension n
//   u32    extents[n]
//   f64    spacing h
//   u32    group rank N
//   u8     kind (0 connection, 1 section, 2 two-form, 3 gauge transform)
//   f64    (re, im) pairs: site-major (axis 1 fastest), then component,
//          then matrix entries row-major
//
// All multi-byte values are little-endian.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "ymf/field/form.hpp"

namespace ymf::field {

enum class SnapshotKind : std::uint8_t { connection = 0, section = 1, two_form = 2, gauge_transform = 3 };

using SnapshotField = std::variant<Connection, Section, TwoForm, GaugeTransform>;

SnapshotKind kind_of(const SnapshotField &f);

void write_snapshot(std::ostream &out, const SnapshotField &f);
void write_snapshot(const std::filesystem::path &path, const SnapshotField &f);

/// Throws ContractError on bad magic, truncated data or inconsistent header.
SnapshotField read_snapshot(std::istream &in);
SnapshotField read_snapshot(const std::filesystem::path &path);

/// Serializes to an in-memory byte string.
std::string encode_snapshot(const SnapshotField &f);
SnapshotField decode_snapshot(const std::string &bytes);

} // namespace ymf::field
