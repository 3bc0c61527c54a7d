#pragma once

// CPTF: a flat little-endian container for one 4D float64 tensor.
//
//   offset  size  field
//        0     4  magic "CPTF"
//        4     2  version (u16) = 1
//        6     1  dtype   (u8)  = 2 for float64; 1 (float32) is reserved
//        7     1  ndim    (u8)  = 4
//        8    32  dims    (4 x u64) in order t, x, y, var
//       40     *  payload, row-major float64
//
// Each `<name>.cpt` has a `<name>.json` sidecar carrying the GridSpec keys
// (t_out, nx, ny, nvar, variable_names, lead_hours) plus optional
// kind-specific keys.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "cpgrid/error.hpp"
#include "cpgrid/field_tensor.hpp"
#include "cpgrid/grid_spec.hpp"

namespace cpgrid {

namespace fs = std::filesystem;

inline constexpr std::array<char, 4> kContainerMagic{'C', 'P', 'T', 'F'};
inline constexpr std::uint16_t kContainerVersion = 1;
inline constexpr std::uint8_t kDtypeFloat32 = 1;
inline constexpr std::uint8_t kDtypeFloat64 = 2;
inline constexpr std::size_t kContainerHeaderBytes = 40;

/// Sidecar path for a container: `<name>.cpt` -> `<name>.json`.
inline fs::path sidecar_path(const fs::path& container) {
  fs::path p = container;
  p.replace_extension(".json");
  return p;
}

inline nlohmann::json spec_to_json(const GridSpec& s) {
  return nlohmann::json{{"t_out", s.t_out},
                        {"nx", s.nx},
                        {"ny", s.ny},
                        {"nvar", s.nvar},
                        {"variable_names", s.variable_names},
                        {"lead_hours", s.lead_hours}};
}

inline GridSpec spec_from_json(const nlohmann::json& j) {
  GridSpec s;
  try {
    s.t_out = j.at("t_out").get<std::size_t>();
    s.nx = j.at("nx").get<std::size_t>();
    s.ny = j.at("ny").get<std::size_t>();
    s.nvar = j.at("nvar").get<std::size_t>();
    s.variable_names = j.at("variable_names").get<std::vector<std::string>>();
    s.lead_hours = j.at("lead_hours").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(FormatError::Kind::BadSidecar,
                      std::string("sidecar: ") + e.what());
  }
  try {
    s.validate();
  } catch (const ValidationError& e) {
    throw FormatError(FormatError::Kind::BadSidecar, e.what());
  }
  return s;
}

inline void write_json_file(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out << j.dump(2) << '\n';
  if (!out) throw IoError(path.string(), "write failed");
}

inline nlohmann::json read_json_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open for reading");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(FormatError::Kind::BadSidecar,
                      path.string() + ": " + e.what());
  }
}

namespace detail {

template <typename U>
void put_le(std::vector<unsigned char>& buf, U value) {
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    buf.push_back(static_cast<unsigned char>(value >> (8 * i)));
  }
}

template <typename U>
U get_le(const unsigned char* p) {
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    value |= static_cast<U>(p[i]) << (8 * i);
  }
  return value;
}

inline std::vector<unsigned char> encode_header(const GridSpec& s) {
  std::vector<unsigned char> h;
  h.reserve(kContainerHeaderBytes);
  h.insert(h.end(), kContainerMagic.begin(), kContainerMagic.end());
  put_le<std::uint16_t>(h, kContainerVersion);
  h.push_back(kDtypeFloat64);
  h.push_back(4);
  for (std::uint64_t d : s.dims()) put_le<std::uint64_t>(h, d);
  return h;
}

}  // namespace detail

/// Total file size of a container for `spec`: header plus float64 payload.
inline std::uint64_t container_file_bytes(const GridSpec& spec) {
  return kContainerHeaderBytes + static_cast<std::uint64_t>(spec.cell_count()) * 8;
}

/// Payload and metadata of a container, before FieldTensor invariants apply.
struct RawContainer {
  GridSpec spec;
  std::vector<double> data;
  nlohmann::json sidecar;
};

/// Writes `path` and its sidecar (`sidecar`, or `<name>.json` when empty)
/// holding the spec keys merged over `extra`.
inline void write_raw_container(const fs::path& path, const GridSpec& spec,
                                std::span<const double> data,
                                const nlohmann::json& extra = nlohmann::json::object(),
                                const fs::path& sidecar = {}) {
  spec.validate();
  if (data.size() != spec.cell_count()) {
    throw ValidationError("write_container: data length does not match spec");
  }
  std::vector<unsigned char> bytes = detail::encode_header(spec);
  bytes.resize(kContainerHeaderBytes + data.size() * sizeof(double));
  unsigned char* payload = bytes.data() + kContainerHeaderBytes;
  if constexpr (std::endian::native == std::endian::little) {
    if (!data.empty()) std::memcpy(payload, data.data(), data.size() * sizeof(double));
  } else {
    for (std::size_t i = 0; i < data.size(); ++i) {
      const auto u = std::bit_cast<std::uint64_t>(data[i]);
      for (std::size_t b = 0; b < 8; ++b) {
        payload[i * 8 + b] = static_cast<unsigned char>(u >> (8 * b));
      }
    }
  }

  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(path.string(), "cannot open for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError(path.string(), "write failed");
  }

  nlohmann::json side = extra.is_object() ? extra : nlohmann::json::object();
  const nlohmann::json spec_keys = spec_to_json(spec);
  for (const auto& [k, v] : spec_keys.items()) side[k] = v;
  write_json_file(sidecar.empty() ? sidecar_path(path) : sidecar, side);
}

inline void write_container(const FieldTensor& t, const fs::path& path) {
  write_raw_container(path, t.spec(), t.data());
}

/// Reads and validates a container. NaN is always rejected; +-inf is rejected
/// unless `allow_infinite`.
inline RawContainer read_raw_container(const fs::path& path,
                                       bool allow_infinite = false,
                                       const fs::path& sidecar = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open for reading");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError(path.string(), "read failed");

  const std::string where = path.string() + ": ";
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kContainerMagic.data(), 4) != 0) {
    throw FormatError(FormatError::Kind::BadMagic, where + "bad magic, expected CPTF");
  }
  if (bytes.size() < kContainerHeaderBytes) {
    throw FormatError(FormatError::Kind::LengthMismatch,
                      where + "truncated header (" + std::to_string(bytes.size()) +
                          " bytes)");
  }
  const auto version = detail::get_le<std::uint16_t>(bytes.data() + 4);
  if (version != kContainerVersion) {
    throw FormatError(FormatError::Kind::BadVersion,
                      where + "unsupported version " + std::to_string(version));
  }
  const std::uint8_t dtype = bytes[6];
  if (dtype != kDtypeFloat64) {
    throw FormatError(FormatError::Kind::BadDtype,
                      where + "unsupported dtype code " + std::to_string(dtype) +
                          (dtype == kDtypeFloat32 ? " (float32 is reserved)" : ""));
  }
  if (bytes[7] != 4) {
    throw FormatError(FormatError::Kind::DimMismatch,
                      where + "ndim " + std::to_string(bytes[7]) + " != 4");
  }
  std::array<std::uint64_t, 4> dims{};
  std::uint64_t count = 1;
  for (std::size_t i = 0; i < 4; ++i) {
    dims[i] = detail::get_le<std::uint64_t>(bytes.data() + 8 + 8 * i);
    if (dims[i] == 0) {
      throw FormatError(FormatError::Kind::DimMismatch, where + "zero-sized dimension");
    }
    count *= dims[i];
  }
  const std::uint64_t payload_bytes = bytes.size() - kContainerHeaderBytes;
  if (count > payload_bytes / 8 || count * 8 != payload_bytes) {
    throw FormatError(FormatError::Kind::LengthMismatch,
                      where + "payload has " + std::to_string(payload_bytes) +
                          " bytes, header dims need " + std::to_string(count) +
                          " float64 values");
  }

  RawContainer raw;
  raw.sidecar = read_json_file(sidecar.empty() ? sidecar_path(path) : sidecar);
  raw.spec = spec_from_json(raw.sidecar);
  if (raw.spec.dims() != dims) {
    throw FormatError(FormatError::Kind::DimMismatch,
                      where + "header dims disagree with sidecar");
  }

  raw.data.resize(count);
  const unsigned char* payload = bytes.data() + kContainerHeaderBytes;
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(raw.data.data(), payload, count * sizeof(double));
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      raw.data[i] = std::bit_cast<double>(detail::get_le<std::uint64_t>(payload + 8 * i));
    }
  }
  if (auto bad = first_invalid(raw.data, allow_infinite)) {
    throw FormatError(FormatError::Kind::NonFinite,
                      where + "non-finite value at flat index " + std::to_string(*bad));
  }
  return raw;
}

inline FieldTensor read_container(const fs::path& path) {
  RawContainer raw = read_raw_container(path);
  return FieldTensor(std::move(raw.spec), std::move(raw.data));
}

}  // namespace cpgrid
