#include "cptych/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

namespace cptych {

namespace {

constexpr char kArrayMagic[8] = {'C', 'P', 'T', 'Y', 'C', 'H', 'C', 'A'};
constexpr std::uint32_t kArrayVersion = 1;

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  void bytes(const char* p, std::size_t n) { out_.write(p, static_cast<std::streamsize>(n)); }
  void u32(std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    bytes(b, 4);
  }
  void u64(std::uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    bytes(b, 8);
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void dim(std::size_t v) {
    if (v > std::numeric_limits<std::uint32_t>::max()) throw FormatError("dimension too large for container");
    u32(static_cast<std::uint32_t>(v));
  }
  void complex_block(const ComplexField& f) {
    for (const auto& v : f) {
      f64(v.real());
      f64(v.imag());
    }
  }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  void bytes(char* p, std::size_t n, const char* what) {
    in_.read(p, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) throw FormatError(std::string("truncated file while reading ") + what);
  }
  std::uint32_t u32(const char* what) {
    unsigned char b[4];
    bytes(reinterpret_cast<char*>(b), 4, what);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
    return v;
  }
  std::uint64_t u64(const char* what) {
    unsigned char b[8];
    bytes(reinterpret_cast<char*>(b), 8, what);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return v;
  }
  double f64(const char* what) { return std::bit_cast<double>(u64(what)); }
  ComplexField complex_block(std::size_t rows, std::size_t cols, const char* what) {
    ComplexField f(rows, cols);
    for (auto& v : f) {
      const double re = f64(what);
      const double im = f64(what);
      v = Complex{re, im};
    }
    return f;
  }
  void expect_end() {
    if (in_.peek() != std::char_traits<char>::eof()) throw FormatError("trailing bytes after last block");
  }

 private:
  std::istream& in_;
};

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void write_dataset(std::ostream& out, const DatasetContainer& ds) {
  const auto& m = ds.measurements;
  m.validate();
  const std::size_t fr = m.frames.front().rows(), fc = m.frames.front().cols();
  if (ds.object_rows != fr * static_cast<std::size_t>(m.geom.sr_ratio) ||
      ds.object_cols != fc * static_cast<std::size_t>(m.geom.sr_ratio))
    throw FormatError("object dimensions inconsistent with frames and sr_ratio");
  if (ds.ground_truth && (ds.ground_truth->rows() != ds.object_rows || ds.ground_truth->cols() != ds.object_cols))
    throw FormatError("ground-truth object has wrong dimensions");
  if (ds.coded_surface && (ds.coded_surface->rows() != ds.object_rows || ds.coded_surface->cols() != ds.object_cols))
    throw FormatError("coded surface has wrong dimensions");

  Writer w(out);
  w.bytes(DatasetContainer::kMagic, 8);
  w.u32(DatasetContainer::kVersion);
  w.u32((ds.ground_truth ? 1u : 0u) | (ds.coded_surface ? 2u : 0u));
  w.f64(m.geom.wavelength);
  w.f64(m.geom.pitch);
  w.f64(m.geom.d1);
  w.f64(m.geom.d2);
  w.u32(static_cast<std::uint32_t>(m.geom.sr_ratio));
  w.dim(m.size());
  w.dim(ds.object_rows);
  w.dim(ds.object_cols);
  w.dim(fr);
  w.dim(fc);
  w.u64(ds.seed);
  w.u64(ds.config_hash);
  for (const auto& p : m.positions) {
    w.f64(p.dx);
    w.f64(p.dy);
  }
  for (const auto& f : m.frames)
    for (double v : f) w.f64(v);
  if (ds.ground_truth) w.complex_block(*ds.ground_truth);
  if (ds.coded_surface) w.complex_block(ds.coded_surface->transmittance());
  if (!out) throw FormatError("write failed");
}

void write_dataset(const std::filesystem::path& path, const DatasetContainer& ds) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  write_dataset(out, ds);
}

DatasetContainer read_dataset(std::istream& in) {
  Reader r(in);
  char magic[8];
  r.bytes(magic, 8, "magic");
  if (std::memcmp(magic, DatasetContainer::kMagic, 8) != 0) throw FormatError("not a dataset container (bad magic)");
  const std::uint32_t version = r.u32("version");
  if (version != DatasetContainer::kVersion)
    throw FormatError("unsupported container version " + std::to_string(version));
  const std::uint32_t flags = r.u32("flags");
  if (flags & ~3u) throw FormatError("unknown container flags");

  DatasetContainer ds;
  auto& m = ds.measurements;
  m.geom.wavelength = r.f64("wavelength");
  m.geom.pitch = r.f64("pitch");
  m.geom.d1 = r.f64("d1");
  m.geom.d2 = r.f64("d2");
  m.geom.sr_ratio = static_cast<int>(r.u32("sr_ratio"));
  const std::size_t k = r.u32("K");
  ds.object_rows = r.u32("object rows");
  ds.object_cols = r.u32("object cols");
  const std::size_t fr = r.u32("frame rows");
  const std::size_t fc = r.u32("frame cols");
  ds.seed = r.u64("seed");
  ds.config_hash = r.u64("config hash");

  try {
    m.geom.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("invalid geometry in header: ") + e.what());
  }
  if (k == 0 || fr == 0 || fc == 0) throw FormatError("header declares empty blocks");
  if (ds.object_rows != fr * static_cast<std::size_t>(m.geom.sr_ratio) ||
      ds.object_cols != fc * static_cast<std::size_t>(m.geom.sr_ratio))
    throw FormatError("header dimensions inconsistent with sr_ratio");

  m.positions.resize(k);
  for (auto& p : m.positions) {
    p.dx = r.f64("positions");
    p.dy = r.f64("positions");
  }
  m.frames.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    RealGrid f(fr, fc);
    for (auto& v : f) v = r.f64("frames");
    m.frames.push_back(std::move(f));
  }
  if (flags & 1u) ds.ground_truth = r.complex_block(ds.object_rows, ds.object_cols, "ground-truth block");
  if (flags & 2u) {
    try {
      ds.coded_surface = CodedSurface(r.complex_block(ds.object_rows, ds.object_cols, "coded-surface block"));
    } catch (const std::invalid_argument& e) {
      throw FormatError(std::string("coded-surface block: ") + e.what());
    }
  }
  r.expect_end();
  try {
    m.validate();
  } catch (const std::exception& e) {
    throw FormatError(std::string("invalid measurements: ") + e.what());
  }
  return ds;
}

DatasetContainer read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return read_dataset(in);
}

void write_complex_array(const std::filesystem::path& path, const ComplexField& f) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  Writer w(out);
  w.bytes(kArrayMagic, 8);
  w.u32(kArrayVersion);
  w.u32(0);
  w.dim(f.rows());
  w.dim(f.cols());
  w.complex_block(f);
  if (!out) throw FormatError("write failed: " + path.string());
}

ComplexField read_complex_array(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  Reader r(in);
  char magic[8];
  r.bytes(magic, 8, "magic");
  if (std::memcmp(magic, kArrayMagic, 8) != 0) throw FormatError(path.string() + ": not a complex array file");
  if (r.u32("version") != kArrayVersion) throw FormatError(path.string() + ": unsupported version");
  r.u32("reserved");
  const std::size_t rows = r.u32("rows"), cols = r.u32("cols");
  if (rows == 0 || cols == 0) throw FormatError(path.string() + ": empty array");
  ComplexField f = r.complex_block(rows, cols, "array data");
  r.expect_end();
  return f;
}

}  // namespace cptych
