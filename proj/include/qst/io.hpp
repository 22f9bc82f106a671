// io.hpp — versioned binary containers for maps, recovery maps, estimator
// tables and snapshot sets; CSV (RFC 4180) and JSON manifest emission.
#pragma once

#include "qst/recovery.hpp"
#include "qst/sampling.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

namespace qst {

namespace io {

constexpr std::uint32_t kFormatVersion = 1;

inline void put_u32(std::ostream& os, std::uint32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); }
inline void put_u64(std::ostream& os, std::uint64_t v) { os.write(reinterpret_cast<const char*>(&v), 8); }
inline std::uint32_t get_u32(std::istream& is) {
  std::uint32_t v;
  is.read(reinterpret_cast<char*>(&v), 4);
  require(bool(is), "io: truncated stream");
  return v;
}
inline std::uint64_t get_u64(std::istream& is) {
  std::uint64_t v;
  is.read(reinterpret_cast<char*>(&v), 8);
  require(bool(is), "io: truncated stream");
  return v;
}

inline void put_magic(std::ostream& os, const char m[8]) { os.write(m, 8); }
inline void check_magic(std::istream& is, const char m[8]) {
  char buf[8];
  is.read(buf, 8);
  require(bool(is) && std::equal(buf, buf + 8, m), "io: bad magic / wrong container kind");
}

inline void put_matrix(std::ostream& os, const Mat& m) {
  put_u64(os, std::uint64_t(m.rows()));
  put_u64(os, std::uint64_t(m.cols()));
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) {
      double re = m(i, j).real(), im = m(i, j).imag();
      os.write(reinterpret_cast<const char*>(&re), 8);
      os.write(reinterpret_cast<const char*>(&im), 8);
    }
}

inline Mat get_matrix(std::istream& is) {
  Index r = Index(get_u64(is)), c = Index(get_u64(is));
  Mat m(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) {
      double re, im;
      is.read(reinterpret_cast<char*>(&re), 8);
      is.read(reinterpret_cast<char*>(&im), 8);
      m(i, j) = {re, im};
    }
  require(bool(is), "io: truncated matrix payload");
  return m;
}

// LEB128 varint packing for outcome ordinals
inline void put_varint(std::ostream& os, std::uint64_t v) {
  while (v >= 0x80) {
    char b = char((v & 0x7f) | 0x80);
    os.put(b);
    v >>= 7;
  }
  os.put(char(v));
}

inline std::uint64_t get_varint(std::istream& is) {
  std::uint64_t v = 0;
  int shift = 0;
  for (;;) {
    int c = is.get();
    require(c != EOF, "io: truncated varint");
    v |= std::uint64_t(c & 0x7f) << shift;
    if (!(c & 0x80)) break;
    shift += 7;
    require(shift < 64, "io: varint overflow");
  }
  return v;
}

// atomic write: temp file then rename
class AtomicFile {
 public:
  explicit AtomicFile(const std::filesystem::path& path)
      : final_(path), tmp_(path.string() + ".tmp"), os_(tmp_, std::ios::binary) {
    require(bool(os_), "io: cannot open " + tmp_.string());
  }
  std::ostream& stream() { return os_; }
  void commit() {
    os_.flush();
    require(bool(os_), "io: write failure on " + tmp_.string());
    os_.close();
    std::filesystem::rename(tmp_, final_);
  }

 private:
  std::filesystem::path final_, tmp_;
  std::ofstream os_;
};

}  // namespace io

// ---- snapshot files ------------------------------------------------------------

inline void write_snapshots(const SnapshotSet& s, const std::filesystem::path& path) {
  io::AtomicFile f(path);
  auto& os = f.stream();
  io::put_magic(os, "QSTSNAP\0");
  io::put_u32(os, io::kFormatVersion);
  io::put_u64(os, s.config_hash);
  io::put_u64(os, s.seed);
  io::put_u32(os, std::uint32_t(s.n_patches));
  io::put_u64(os, std::uint64_t(s.m()));
  io::put_u32(os, std::uint32_t(s.meta.size()));
  os.write(s.meta.data(), std::streamsize(s.meta.size()));
  for (const auto& row : s.outcomes) {
    require(int(row.size()) == s.n_patches, "write_snapshots: ragged outcomes");
    for (Index z : row) io::put_varint(os, std::uint64_t(z));
  }
  f.commit();
}

inline SnapshotSet read_snapshots(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  require(bool(is), "read_snapshots: cannot open " + path.string());
  io::check_magic(is, "QSTSNAP\0");
  std::uint32_t version = io::get_u32(is);
  require(version == io::kFormatVersion, "read_snapshots: unsupported version");
  SnapshotSet s;
  s.config_hash = io::get_u64(is);
  s.seed = io::get_u64(is);
  s.n_patches = int(io::get_u32(is));
  std::uint64_t m = io::get_u64(is);
  std::uint32_t meta_len = io::get_u32(is);
  s.meta.resize(meta_len);
  is.read(s.meta.data(), meta_len);
  s.outcomes.resize(m);
  for (auto& row : s.outcomes) {
    row.resize(s.n_patches);
    for (auto& z : row) z = Index(io::get_varint(is));
  }
  require(bool(is), "read_snapshots: truncated file");
  return s;
}

// ---- map / recovery / estimator containers --------------------------------------

inline void write_map(const ScramblingMap& map, const std::filesystem::path& path) {
  io::AtomicFile f(path);
  auto& os = f.stream();
  io::put_magic(os, "QSTMAP\0\0");
  io::put_u32(os, io::kFormatVersion);
  io::put_u64(os, map.config_hash);
  io::put_u32(os, map.noiseless() ? 1 : 0);
  io::put_matrix(os, map.noiseless() ? map.psi : map.matrix());
  f.commit();
}

// Reads payload + hash; basis handles must be supplied by the caller (maps are
// cached per config whose hash is validated here).
inline void read_map_into(ScramblingMap& map, const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  require(bool(is), "read_map: cannot open " + path.string());
  io::check_magic(is, "QSTMAP\0\0");
  require(io::get_u32(is) == io::kFormatVersion, "read_map: unsupported version");
  std::uint64_t hash = io::get_u64(is);
  require(hash == map.config_hash, "read_map: config hash mismatch");
  bool noiseless = io::get_u32(is) == 1;
  Mat payload = io::get_matrix(is);
  if (noiseless)
    map.psi = std::move(payload);
  else
    map.set_matrix(std::move(payload));
}

inline void write_recovery(const RecoveryMap& r, const std::filesystem::path& path) {
  io::AtomicFile f(path);
  auto& os = f.stream();
  io::put_magic(os, "QSTREC\0\0");
  io::put_u32(os, io::kFormatVersion);
  io::put_u64(os, r.source_hash);
  io::put_u32(os, std::uint32_t(r.flavor));
  io::put_matrix(os, r.r);
  f.commit();
}

inline RecoveryMap read_recovery(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  require(bool(is), "read_recovery: cannot open " + path.string());
  io::check_magic(is, "QSTREC\0\0");
  require(io::get_u32(is) == io::kFormatVersion, "read_recovery: unsupported version");
  RecoveryMap r;
  r.source_hash = io::get_u64(is);
  r.flavor = RecoveryFlavor(io::get_u32(is));
  r.r = io::get_matrix(is);
  return r;
}

// ---- CSV / JSON -----------------------------------------------------------------

// RFC 4180: quote fields containing commas, quotes or newlines; CRLF rows.
class CsvWriter {
 public:
  explicit CsvWriter(const std::filesystem::path& path) : os_(path) {
    require(bool(os_), "CsvWriter: cannot open " + path.string());
  }

  void row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) os_ << ',';
      os_ << escape(fields[i]);
    }
    os_ << "\r\n";
  }

  static std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
  }

 private:
  static std::string escape(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
      if (c == '"') out += '"';
      out += c;
    }
    out += '"';
    return out;
  }
  std::ofstream os_;
};

inline void write_snapshots_csv(const SnapshotSet& s, const std::filesystem::path& path) {
  CsvWriter csv(path);
  std::vector<std::string> header{"snapshot"};
  for (int p = 0; p < s.n_patches; ++p) header.push_back("outcome_patch" + std::to_string(p));
  csv.row(header);
  for (Index j = 0; j < s.m(); ++j) {
    std::vector<std::string> row{std::to_string(j)};
    for (Index z : s.outcomes[j]) row.push_back(std::to_string(z));
    csv.row(row);
  }
}

inline void write_estimator_csv(const EstimatorTable& t, const std::filesystem::path& path) {
  CsvWriter csv(path);
  csv.row({"z", "re_o", "im_o"});
  for (Index z = 0; z < t.o.size(); ++z)
    csv.row({std::to_string(z), CsvWriter::num(t.o[z].real()), CsvWriter::num(t.o[z].imag())});
}

inline void write_json(const nlohmann::json& j, const std::filesystem::path& path) {
  io::AtomicFile f(path);
  f.stream() << j.dump(2) << "\n";
  f.commit();
}

inline std::filesystem::path cache_dir() {
  if (const char* env = std::getenv("QST_CACHE_DIR")) return env;
  return std::filesystem::temp_directory_path() / "qst-cache";
}

}  // namespace qst
