#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "horizonlab/errors.hpp"

namespace horizonlab {

using Json = nlohmann::json;

/// 17 significant digits: round-trip exact and byte-stable.
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

/// Hash of the canonical (sorted keys, compact) config echo; embedded in
/// every artifact so outputs can be traced back to their inputs.
inline std::string config_hash(const Json& echo) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a(echo.dump())));
  return buf;
}

inline void write_json_file(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path,
            const std::vector<std::string>& header,
            const std::string& hash = "")
      : out_(path) {
    if (!out_) throw Error("cannot write " + path.string());
    if (!hash.empty()) out_ << "# config_hash=" << hash << "\n";
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (i) out_ << ",";
      out_ << header[i];
    }
    out_ << "\n";
  }

  void row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i) out_ << ",";
      out_ << fmt17(values[i]);
    }
    out_ << "\n";
  }

  void row_mixed(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ",";
      out_ << cells[i];
    }
    out_ << "\n";
  }

 private:
  std::ofstream out_;
};

}  // namespace horizonlab
