#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cpgrid/container.hpp"
#include "cpgrid/error.hpp"

namespace cpgrid {

inline constexpr const char* kToolVersion = "1.0.0";

/// 64-bit FNV-1a.
class Fnv1a {
 public:
  void update(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      h_ ^= p[i];
      h_ *= 0x100000001B3ULL;
    }
  }

  void update(const std::string& s) {
    update(s.data(), s.size());
    const unsigned char sep = 0;
    update(&sep, 1);
  }

  void update_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path.string(), "cannot open for hashing");
    char buf[1 << 16];
    while (in) {
      in.read(buf, sizeof buf);
      update(buf, static_cast<std::size_t>(in.gcount()));
    }
  }

  std::uint64_t value() const noexcept { return h_; }

  std::string hex() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h_));
    return buf;
  }

 private:
  std::uint64_t h_ = 0xCBF29CE484222325ULL;
};

/// Record of one CLI run. Timestamps stay null unless explicitly requested so
/// that reruns with identical inputs produce identical bytes.
struct RunManifest {
  std::string command;
  std::string config_hash;
  nlohmann::json flags = nlohmann::json::object();
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::optional<std::string> started;
  std::optional<std::string> finished;
  std::string tool_version = kToolVersion;

  nlohmann::json to_json() const {
    auto ts = [](const std::optional<std::string>& t) {
      return t ? nlohmann::json(*t) : nlohmann::json(nullptr);
    };
    return {{"command", command},
            {"config_hash", config_hash},
            {"flags", flags},
            {"inputs", inputs},
            {"outputs", outputs},
            {"timestamps", {{"started", ts(started)}, {"finished", ts(finished)}}},
            {"tool_version", tool_version}};
  }
};

/// Exclusive lock on an output directory, held for the lifetime of the object.
class OutputLock {
 public:
  explicit OutputLock(const fs::path& dir) : path_(dir / ".cpgrid.lock") {
    std::FILE* f = std::fopen(path_.c_str(), "wx");
    if (f == nullptr) {
      if (fs::exists(path_)) {
        throw IoError(path_.string(), "output directory is locked by another run");
      }
      throw IoError(path_.string(), "cannot create lock file");
    }
    std::fclose(f);
  }

  OutputLock(const OutputLock&) = delete;
  OutputLock& operator=(const OutputLock&) = delete;

  ~OutputLock() {
    std::error_code ec;
    fs::remove(path_, ec);
  }

 private:
  fs::path path_;
};

}  // namespace cpgrid
