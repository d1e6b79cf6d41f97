#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>

#include "cptych/io.hpp"
#include "cptych/scenario.hpp"
#include "helpers.hpp"

using namespace cptych;
using testing::random_field;

namespace fs = std::filesystem;

namespace {

DatasetContainer sample_container(bool with_truth, bool with_cs) {
  OpticalGeometry g;
  g.pitch = 2e-6;
  g.sr_ratio = 2;
  ScenarioConfig sc;
  sc.rows = sc.cols = 16;
  const auto truth = make_ground_truth(sc);
  const auto cs = make_coded_surface(16, 16, 3);
  DatasetContainer ds;
  ds.measurements = simulate_dataset(truth, cs, make_positions(3, 4e-6, PositionMode::JitteredGrid, 1), g);
  ds.object_rows = ds.object_cols = 16;
  if (with_truth) ds.ground_truth = truth;
  if (with_cs) ds.coded_surface = cs;
  ds.seed = 0xDEADBEEFCAFEULL;
  ds.config_hash = 0x0123456789ABCDEFULL;
  return ds;
}

std::string bytes_of(const DatasetContainer& ds) {
  std::ostringstream out(std::ios::binary);
  write_dataset(out, ds);
  return out.str();
}

DatasetContainer parse(const std::string& bytes) {
  std::istringstream in(bytes, std::ios::binary);
  return read_dataset(in);
}

template <typename T>
T field_at(const std::string& bytes, std::size_t offset) {
  T v;
  std::memcpy(&v, bytes.data() + offset, sizeof v);
  return v;
}

}  // namespace

TEST_CASE("fnv1a64 reference values") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("dataset container layout") {
  const auto ds = sample_container(true, true);
  const auto bytes = bytes_of(ds);
  const std::size_t K = 3, frame = 8 * 8, obj = 16 * 16;
  CHECK(bytes.size() == DatasetContainer::kHeaderBytes + K * 16 + K * frame * 8 + 2 * obj * 16);
  CHECK(bytes.substr(0, 8) == "CPTYCHDS");
  CHECK(field_at<std::uint32_t>(bytes, 8) == 1);
  CHECK(field_at<std::uint32_t>(bytes, 12) == 3);
  CHECK(field_at<double>(bytes, 16) == ds.measurements.geom.wavelength);
  CHECK(field_at<double>(bytes, 24) == ds.measurements.geom.pitch);
  CHECK(field_at<std::uint32_t>(bytes, 48) == 2);
  CHECK(field_at<std::uint32_t>(bytes, 52) == K);
  CHECK(field_at<std::uint32_t>(bytes, 56) == 16);
  CHECK(field_at<std::uint32_t>(bytes, 64) == 8);
  CHECK(field_at<std::uint64_t>(bytes, 72) == ds.seed);
  CHECK(field_at<std::uint64_t>(bytes, 80) == ds.config_hash);
  CHECK(field_at<double>(bytes, 88) == ds.measurements.positions[0].dx);
  CHECK(field_at<double>(bytes, 88 + K * 16) == ds.measurements.frames[0][0]);
}

TEST_CASE("dataset round trip is bit exact") {
  for (auto [gt, cs] : {std::pair{true, true}, {false, false}, {true, false}, {false, true}}) {
    const auto ds = sample_container(gt, cs);
    const auto bytes = bytes_of(ds);
    const auto back = parse(bytes);
    CHECK(bytes_of(back) == bytes);
    CHECK(back.measurements.frames == ds.measurements.frames);
    CHECK(back.measurements.positions == ds.measurements.positions);
    CHECK(back.measurements.geom == ds.measurements.geom);
    CHECK(back.ground_truth.has_value() == gt);
    CHECK(back.coded_surface.has_value() == cs);
    if (gt) CHECK(*back.ground_truth == *ds.ground_truth);
    if (cs) CHECK(back.coded_surface->transmittance() == ds.coded_surface->transmittance());
    CHECK(back.seed == ds.seed);
    CHECK(back.config_hash == ds.config_hash);
  }

  const auto path = fs::temp_directory_path() / "cptych_test_io.cds";
  const auto ds = sample_container(true, true);
  write_dataset(path, ds);
  std::ifstream f(path, std::ios::binary);
  const std::string on_disk((std::istreambuf_iterator<char>(f)), {});
  CHECK(on_disk == bytes_of(ds));
  CHECK(bytes_of(read_dataset(path)) == on_disk);
}

TEST_CASE("malformed containers are rejected") {
  const auto bytes = bytes_of(sample_container(true, true));
  CHECK_THROWS_AS(parse(bytes.substr(0, 40)), FormatError);
  CHECK_THROWS_AS(parse(bytes.substr(0, bytes.size() - 1)), FormatError);
  CHECK_THROWS_AS(parse(bytes + "x"), FormatError);
  std::string bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS_AS(parse(bad), FormatError);
  bad = bytes;
  bad[8] = 2;  // version
  CHECK_THROWS_AS(parse(bad), FormatError);
  bad = bytes;
  bad[12] = 4;  // unknown flag
  CHECK_THROWS_AS(parse(bad), FormatError);
  bad = bytes;
  bad[52] = 0;  // K = 0
  CHECK_THROWS_AS(parse(bad), FormatError);
  CHECK_THROWS_AS(read_dataset(fs::path("/nonexistent/x.cds")), FormatError);
}

TEST_CASE("complex array files") {
  std::mt19937_64 gen(1);
  const auto f = random_field(5, 7, gen);
  const auto path = fs::temp_directory_path() / "cptych_test_io.cca";
  write_complex_array(path, f);
  CHECK(fs::file_size(path) == 24 + 5 * 7 * 16);
  CHECK(read_complex_array(path) == f);
  std::ofstream(path, std::ios::binary) << "garbage!";
  CHECK_THROWS_AS(read_complex_array(path), FormatError);
}
