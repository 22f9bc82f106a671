#include "qst/experiments.hpp"

#include <catch2/catch.hpp>

#include <chrono>
#include <fstream>

using namespace qst;

namespace {
std::filesystem::path tmp_path(const char* name) {
  auto dir = std::filesystem::temp_directory_path() / "qst-io-tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}
}  // namespace

TEST_CASE("snapshot round trip is lossless") {
  SnapshotSet s;
  s.n_patches = 2;
  s.seed = 12345;
  s.config_hash = 0xdeadbeefcafe1234ull;
  s.meta = "round trip";
  CounterRng rng(1, 0);
  for (int j = 0; j < 257; ++j)
    s.outcomes.push_back({Index(rng.next_below(1000)), Index(rng.next_below(70000))});
  auto path = tmp_path("snap.qst");
  write_snapshots(s, path);
  SnapshotSet r = read_snapshots(path);
  CHECK(r.n_patches == s.n_patches);
  CHECK(r.seed == s.seed);
  CHECK(r.config_hash == s.config_hash);
  CHECK(r.meta == s.meta);
  CHECK(r.outcomes == s.outcomes);
}

TEST_CASE("corrupted header is a typed error") {
  auto path = tmp_path("bad.qst");
  {
    std::ofstream os(path, std::ios::binary);
    os << "NOTAMAGIC and then some";
  }
  CHECK_THROWS_AS(read_snapshots(path), Error);
}

TEST_CASE("snapshot files: one million outcomes round trip under a second") {
  SnapshotSet s;
  s.n_patches = 1;
  s.seed = 7;
  CounterRng rng(2, 0);
  s.outcomes.reserve(1000000);
  for (int j = 0; j < 1000000; ++j) s.outcomes.push_back({Index(rng.next_below(5000))});
  auto path = tmp_path("big.qst");
  auto start = std::chrono::steady_clock::now();
  write_snapshots(s, path);
  SnapshotSet r = read_snapshots(path);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  CHECK(r.m() == s.m());
  CHECK(r.outcomes[999999] == s.outcomes[999999]);
  CHECK(secs < 1.0);
}

TEST_CASE("map containers round trip and reject hash mismatches") {
  QuenchConfig cfg = rydberg_partitioned_chain_config(6, {0, 1}, -1.0, 1.0);
  ScramblingMap map = build_scrambling_map(cfg);
  auto path = tmp_path("map.qst");
  write_map(map, path);
  ScramblingMap loaded;
  loaded.sys = map.sys;
  loaded.ext = map.ext;
  loaded.config_hash = map.config_hash;
  read_map_into(loaded, path);
  CHECK((loaded.psi - map.psi).cwiseAbs().maxCoeff() == 0.0);
  ScramblingMap wrong = loaded;
  wrong.config_hash ^= 7;
  CHECK_THROWS_AS(read_map_into(wrong, path), Error);

  RecoveryMap r = moore_penrose(map);
  auto rpath = tmp_path("rec.qst");
  write_recovery(r, rpath);
  RecoveryMap rr = read_recovery(rpath);
  CHECK(rr.flavor == r.flavor);
  CHECK(rr.source_hash == r.source_hash);
  CHECK((rr.r - r.r).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("CSV writer quotes per RFC 4180") {
  auto path = tmp_path("t.csv");
  {
    CsvWriter csv(path);
    csv.row({"a", "with,comma", "with\"quote"});
    csv.row({"1", "2", "3"});
  }
  std::ifstream is(path);
  std::string line;
  std::getline(is, line);
  CHECK(line == "a,\"with,comma\",\"with\"\"quote\"\r");
}

TEST_CASE("estimator tables export to CSV") {
  EstimatorTable t;
  t.o = Vec::Zero(3);
  t.o[1] = cplx(0.5, -2.0);
  auto path = tmp_path("est.csv");
  write_estimator_csv(t, path);
  std::ifstream is(path);
  std::string all((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  CHECK(all.find("z,re_o,im_o") == 0);
  CHECK(all.find("1,0.5,-2") != std::string::npos);
}
