#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "raimi/json_io.hpp"

using namespace raimi;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ColoringSpec zn_spec(uint64_t N, ColoringKind kind, uint32_t t, uint64_t seed) {
  ColoringSpec s;
  s.carrier = {CarrierKind::Zn, N, 0, {}};
  s.kind = kind;
  s.t = t;
  s.seed = seed;
  return s;
}

}  // namespace

TEST_CASE("rational text round trip") {
  REQUIRE(rational_text(Rational(3, 4)) == "3/4");
  REQUIRE(rational_text(Rational(-5, 8)) == "-5/8");
  REQUIRE(rational_text(Rational(7)) == "7/1");
  REQUIRE(rational_from_text("3/4") == Rational(3, 4));
  REQUIRE(rational_from_text("-5/8") == Rational(-5, 8));
  REQUIRE(rational_from_text("7") == Rational(7));
  REQUIRE_THROWS_AS(rational_from_text("1/0"), PreconditionViolated);
}

TEST_CASE("coloring specs serialize with stable key order") {
  Json j = to_json(zn_spec(10, ColoringKind::random, 2, 1));
  REQUIRE(j.dump() ==
          R"({"carrier":{"kind":"zn","n":10},"kind":"random","t":2,"seed":1})");

  ColoringSpec box;
  box.carrier = {CarrierKind::Box, 100, 3, {}};
  box.kind = ColoringKind::intervals;
  box.t = 4;
  Json b = to_json(box);
  REQUIRE(b["carrier"]["kind"] == "box");
  REQUIRE(b["carrier"]["box_k"] == 3);

  ColoringSpec prod;
  prod.carrier = {CarrierKind::ProductZnG, 50, 0, {2, 3}};
  prod.kind = ColoringKind::fiber_constant;
  Json p = to_json(prod);
  REQUIRE(p["carrier"]["orders"] == Json::array({2, 3}));
}

TEST_CASE("cyclic certificates serialize completely") {
  Coloring coloring(zn_spec(1000, ColoringKind::random, 2, 42));
  CyclicPartition part = build_partition(1000, 2, 2);
  auto cert = find_shift(coloring, part);

  Json j = to_json(cert);
  REQUIRE(j["m"] == cert.m);
  REQUIRE(j["h"] == cert.h);
  REQUIRE(j["h_list"].size() == 2);
  REQUIRE(j["counts"].get<std::vector<uint64_t>>() == cert.counts);
  REQUIRE(j["alpha"] == rational_text(cert.alpha_used));
  REQUIRE(j["pass"] == cert.pass);
  REQUIRE(Json::parse(j.dump()) == j);

  Json pj = to_json(part);
  REQUIRE(pj["k"] == 65);
  REQUIRE(pj["delta"] == Json::array({975, 15}));
}

TEST_CASE("group certificates serialize completely") {
  ColoringSpec s;
  s.carrier = {CarrierKind::Sl2, 17, 0, {}};
  s.kind = ColoringKind::random;
  s.t = 1;
  s.seed = 3;
  auto cert = find_shift_sl2(Coloring(s), 2, 1);

  Json j = to_json(cert);
  REQUIRE(j["q"] == 17);
  REQUIRE(j["counts"].get<std::vector<uint64_t>>() ==
          SL2Partition(17, 2).piece_sizes());
  REQUIRE(j["direction"]["v"].size() == 2);
  REQUIRE(j["h"].size() == 4);
  REQUIRE(j["alpha"] == "1/128");
  REQUIRE(j["pass"] == true);
}

TEST_CASE("scan reports serialize prefixes and predictions") {
  auto polys = parse_poly_family("x");
  auto rep = find_x_eps(RealExpr::rational(Rational(1, 3)), polys, Rational(1, 4), 99);
  Json j = to_json(rep);
  REQUIRE(j["eps"] == "1/4");
  REQUIRE(j["n"] == 99);
  REQUIRE(j["hit_count"] == rep.hits.size());
  REQUIRE(j["prefixes"].size() == rep.prefixes.size());
  REQUIRE(j["predicted_exact"] == true);
}

TEST_CASE("errors carry their kind and extra fields") {
  Json j = error_json(TooSmallN(67));
  REQUIRE(j["error"]["kind"] == "TooSmallN");
  REQUIRE(j["error"]["n0"] == 67);
  Json p = error_json(PreconditionViolated("q must be an odd prime > 8rt"));
  REQUIRE(p["error"]["kind"] == "PreconditionViolated");
  REQUIRE(p["error"]["message"] == "q must be an odd prime > 8rt");
}

TEST_CASE("atomic writes leave no temporary behind") {
  auto dir = std::filesystem::temp_directory_path() / "raimi_json_io_test";
  std::filesystem::create_directories(dir);
  auto path = dir / "artifact.json";
  atomic_write_text(path, "{\"a\":1}\n");
  REQUIRE(slurp(path) == "{\"a\":1}\n");
  REQUIRE_FALSE(std::filesystem::exists(dir / "artifact.json.tmp"));
  atomic_write_text(path, "{\"a\":2}\n");
  REQUIRE(slurp(path) == "{\"a\":2}\n");
  std::filesystem::remove_all(dir);
}

TEST_CASE("jsonl streams start with a schema header and reproduce exactly") {
  auto dir = std::filesystem::temp_directory_path() / "raimi_jsonl_test";
  std::filesystem::create_directories(dir);

  auto emit = [&](const std::filesystem::path& p) {
    JsonlWriter w(p, Json{{"subcommand", "cyclic"}, {"seed", 42}});
    w.write(Json{{"trial", 0}, {"pass", true}});
    w.write(Json{{"trial", 1}, {"pass", true}});
    w.finalize();
  };
  emit(dir / "a.jsonl");
  emit(dir / "b.jsonl");

  std::string a = slurp(dir / "a.jsonl");
  REQUIRE(a == slurp(dir / "b.jsonl"));

  std::istringstream lines(a);
  std::string first;
  std::getline(lines, first);
  Json header = Json::parse(first);
  REQUIRE(header["schema_version"] == 1);
  REQUIRE(header["tool"] == "raimi");
  REQUIRE(header["subcommand"] == "cyclic");
  std::string second;
  std::getline(lines, second);
  REQUIRE(Json::parse(second)["trial"] == 0);
  std::filesystem::remove_all(dir);
}
