#include "cptych/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "cptych/random.hpp"

namespace cptych {

void ScenarioConfig::validate(int sr_ratio) const {
  if (rows == 0 || cols == 0) throw std::invalid_argument("scenario object size must be positive");
  if (sr_ratio < 1) throw std::invalid_argument("sr_ratio must be >= 1");
  const auto r = static_cast<std::size_t>(sr_ratio);
  if (rows % r != 0 || cols % r != 0)
    throw std::invalid_argument("object size " + std::to_string(rows) + "x" + std::to_string(cols) +
                                " is not divisible by sr_ratio " + std::to_string(sr_ratio));
  if (num_positions < 1) throw std::invalid_argument("num_positions must be >= 1");
  if (!(background >= 0.0)) throw std::invalid_argument("background must be >= 0");
  if (!(cs_min_modulus >= 0.0 && cs_min_modulus <= 1.0))
    throw std::invalid_argument("cs_min_modulus must lie in [0, 1]");
  if (!std::isfinite(position_span)) throw std::invalid_argument("position_span must be finite");
  parse_position_mode(position_mode);
}

PositionMode parse_position_mode(const std::string& name) {
  if (name == "jittered_grid") return PositionMode::JitteredGrid;
  if (name == "random_uniform") return PositionMode::RandomUniform;
  throw std::invalid_argument("unknown position mode '" + name + "' (expected jittered_grid or random_uniform)");
}

namespace {

// Drawing helpers in normalized coordinates: x across columns, y down rows,
// both in [0, 1).
struct Canvas {
  RealGrid g;

  template <typename Pred>
  void fill(double value, Pred inside) {
    for (std::size_t i = 0; i < g.rows(); ++i) {
      const double y = (static_cast<double>(i) + 0.5) / static_cast<double>(g.rows());
      for (std::size_t j = 0; j < g.cols(); ++j) {
        const double x = (static_cast<double>(j) + 0.5) / static_cast<double>(g.cols());
        if (inside(x, y)) g(i, j) = value;
      }
    }
  }

  void rect(double x0, double y0, double x1, double y1, double value) {
    fill(value, [=](double x, double y) { return x >= x0 && x < x1 && y >= y0 && y < y1; });
  }

  void segment(double ax, double ay, double bx, double by, double width, double value) {
    fill(value, [=](double x, double y) {
      const double vx = bx - ax, vy = by - ay;
      const double t = std::clamp(((x - ax) * vx + (y - ay) * vy) / (vx * vx + vy * vy), 0.0, 1.0);
      const double dx = x - (ax + t * vx), dy = y - (ay + t * vy);
      return dx * dx + dy * dy <= 0.25 * width * width;
    });
  }
};

}  // namespace

RealGrid synthetic_street(std::size_t rows, std::size_t cols) {
  Canvas c{RealGrid(rows, cols, 0.0)};
  // Sky with a vertical gradient.
  for (std::size_t i = 0; i < rows; ++i) {
    const double y = (static_cast<double>(i) + 0.5) / static_cast<double>(rows);
    for (std::size_t j = 0; j < cols; ++j) c.g(i, j) = 0.85 - 0.25 * y;
  }
  // Facades.
  struct Building {
    double x0, x1, top, shade;
  };
  const Building buildings[] = {{0.00, 0.22, 0.18, 0.35}, {0.22, 0.41, 0.32, 0.55}, {0.41, 0.58, 0.10, 0.25},
                                {0.58, 0.80, 0.26, 0.45}, {0.80, 1.00, 0.15, 0.30}};
  for (const auto& b : buildings) {
    c.rect(b.x0, b.top, b.x1, 0.72, b.shade);
    // Window grid.
    const double wx = (b.x1 - b.x0) / 4.0;
    for (int col = 0; col < 4; ++col) {
      for (double y = b.top + 0.04; y + 0.05 < 0.66; y += 0.09) {
        const double x0 = b.x0 + wx * (col + 0.25);
        c.rect(x0, y, x0 + 0.5 * wx, y + 0.05, std::min(1.0, b.shade + 0.4));
      }
    }
  }
  // Road and pavement.
  c.rect(0.0, 0.72, 1.0, 1.0, 0.15);
  c.rect(0.0, 0.72, 1.0, 0.76, 0.6);
  for (double x = 0.05; x < 1.0; x += 0.2) c.rect(x, 0.86, x + 0.1, 0.88, 0.9);
  // Shop sign with a large "M".
  c.rect(0.43, 0.44, 0.57, 0.60, 0.95);
  const double w = 0.018;
  c.segment(0.455, 0.58, 0.455, 0.46, w, 0.05);
  c.segment(0.455, 0.46, 0.50, 0.53, w, 0.05);
  c.segment(0.50, 0.53, 0.545, 0.46, w, 0.05);
  c.segment(0.545, 0.46, 0.545, 0.58, w, 0.05);
  // Lamp post.
  c.segment(0.70, 0.74, 0.70, 0.40, 0.008, 0.05);
  c.segment(0.70, 0.40, 0.74, 0.38, 0.008, 0.05);
  return c.g;
}

RealGrid synthetic_peppers(std::size_t rows, std::size_t cols) {
  Canvas c{RealGrid(rows, cols, 0.1)};
  struct Pepper {
    double cx, cy, rx, ry, level;
  };
  const Pepper peppers[] = {{0.30, 0.35, 0.24, 0.20, 0.70}, {0.70, 0.30, 0.20, 0.24, 0.45},
                            {0.45, 0.72, 0.28, 0.20, 0.90}, {0.82, 0.75, 0.15, 0.18, 0.30}};
  for (const auto& p : peppers) {
    for (std::size_t i = 0; i < rows; ++i) {
      const double y = (static_cast<double>(i) + 0.5) / static_cast<double>(rows);
      for (std::size_t j = 0; j < cols; ++j) {
        const double x = (static_cast<double>(j) + 0.5) / static_cast<double>(cols);
        const double u = (x - p.cx) / p.rx, v = (y - p.cy) / p.ry;
        const double d2 = u * u + v * v;
        // Smooth shading toward the rim, highlight toward the upper left.
        if (d2 < 1.0) c.g(i, j) = p.level * (0.75 + 0.25 * std::sqrt(1.0 - d2)) + 0.08 * std::max(0.0, -u - v) / 2.0;
      }
    }
  }
  // Stalks.
  c.segment(0.30, 0.16, 0.34, 0.06, 0.02, 0.15);
  c.segment(0.70, 0.07, 0.64, 0.01, 0.02, 0.15);
  c.segment(0.45, 0.53, 0.52, 0.45, 0.02, 0.15);
  for (auto& v : c.g) v = std::clamp(v, 0.0, 1.0);
  return c.g;
}

RealGrid load_image(const ImageSource& src, std::size_t rows, std::size_t cols) {
  const std::string prefix = "builtin:";
  if (src.ref.rfind(prefix, 0) == 0) {
    const std::string name = src.ref.substr(prefix.size());
    if (name == "street") return synthetic_street(rows, cols);
    if (name == "peppers") return synthetic_peppers(rows, cols);
    if (name == "zero") return RealGrid(rows, cols, 0.0);
    throw std::invalid_argument("unknown builtin image '" + name + "'");
  }
  const PgmImage img = read_pgm(src.ref);
  if (img.rows != rows || img.cols != cols)
    throw DimensionError("image " + src.ref + " is " + std::to_string(img.rows) + "x" + std::to_string(img.cols) +
                         ", expected " + std::to_string(rows) + "x" + std::to_string(cols));
  RealGrid g(rows, cols);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = static_cast<double>(img.pixels[i]) / img.maxval;
  return g;
}

ComplexField make_ground_truth(const RealGrid& amplitude, const RealGrid& phase, double background,
                               double phase_min, double phase_max) {
  if (!amplitude.same_shape(phase)) throw DimensionError("amplitude and phase sources differ in size");
  if (!(background >= 0.0)) throw std::invalid_argument("background must be >= 0");
  ComplexField o(amplitude.rows(), amplitude.cols());
  for (std::size_t i = 0; i < o.size(); ++i)
    o[i] = std::polar(amplitude[i] + background, phase_min + phase[i] * (phase_max - phase_min));
  return o;
}

ComplexField make_ground_truth(const ScenarioConfig& cfg) {
  return make_ground_truth(load_image(cfg.amp_source, cfg.rows, cfg.cols),
                           load_image(cfg.phase_source, cfg.rows, cfg.cols), cfg.background, cfg.phase_min,
                           cfg.phase_max);
}

CodedSurface make_coded_surface(std::size_t rows, std::size_t cols, std::uint64_t seed, double min_modulus) {
  if (!(min_modulus >= 0.0 && min_modulus <= 1.0)) throw std::invalid_argument("min_modulus must lie in [0, 1]");
  CounterRng rng(seed, 0);
  ComplexField t(rows, cols);
  for (auto& v : t) {
    const double m = min_modulus + (1.0 - min_modulus) * rng.uniform();
    const double theta = 2.0 * std::numbers::pi * rng.uniform();
    v = std::polar(m, theta);
  }
  return CodedSurface::clamped(std::move(t));
}

CodedSurface perturb_coded_surface(const CodedSurface& cs, const PerturbationConfig& p) {
  if (!(p.sigma_amp >= 0.0) || !(p.sigma_ang >= 0.0)) throw std::invalid_argument("perturbation sigmas must be >= 0");
  CounterRng rng(p.seed, 1);
  ComplexField t = cs.transmittance();
  for (auto& v : t) {
    const double na = rng.normal();
    const double np = rng.normal();
    if (p.sigma_amp == 0.0 && p.sigma_ang == 0.0) continue;
    const double amp = std::clamp(std::abs(v) + p.sigma_amp * na, 0.0, 1.0);
    v = std::polar(amp, std::arg(v) + p.sigma_ang * np);
  }
  return CodedSurface::clamped(std::move(t));
}

std::vector<ScanPosition> make_positions(std::size_t k, double span, PositionMode mode, std::uint64_t seed) {
  if (k < 1) throw std::invalid_argument("make_positions: K must be >= 1");
  if (!(span >= 0.0) || !std::isfinite(span)) throw std::invalid_argument("make_positions: span must be >= 0");
  if (k == 1) return {ScanPosition{0.0, 0.0}};

  CounterRng rng(seed, 2);
  std::vector<ScanPosition> out;
  out.reserve(k);
  if (mode == PositionMode::JitteredGrid) {
    const auto nx = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(k))));
    const std::size_t ny = (k + nx - 1) / nx;
    const double w = 2.0 * span / static_cast<double>(nx);
    const double h = 2.0 * span / static_cast<double>(ny);
    for (std::size_t c = 0; c < k; ++c) {
      const std::size_t ix = c % nx, iy = c / nx;
      const double jx = 0.5 * (rng.uniform() - 0.5);
      const double jy = 0.5 * (rng.uniform() - 0.5);
      out.push_back({-span + (static_cast<double>(ix) + 0.5 + jx) * w, -span + (static_cast<double>(iy) + 0.5 + jy) * h});
    }
    return out;
  }
  while (out.size() < k) {
    ScanPosition p{span * (2.0 * rng.uniform() - 1.0), span * (2.0 * rng.uniform() - 1.0)};
    if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(p);
  }
  return out;
}

namespace {

std::string next_token(std::istream& in) {
  std::string tok;
  char ch;
  while (in.get(ch)) {
    if (ch == '#') {
      std::string skip;
      std::getline(in, skip);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(ch);
  }
  return tok;
}

}  // namespace

PgmImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open image " + path.string());
  if (next_token(in) != "P5") throw std::runtime_error(path.string() + ": not a binary PGM (P5)");
  PgmImage img;
  try {
    img.cols = std::stoul(next_token(in));
    img.rows = std::stoul(next_token(in));
    img.maxval = static_cast<unsigned>(std::stoul(next_token(in)));
  } catch (const std::exception&) {
    throw std::runtime_error(path.string() + ": malformed PGM header");
  }
  if (img.rows == 0 || img.cols == 0 || img.maxval == 0 || img.maxval > 65535)
    throw std::runtime_error(path.string() + ": unsupported PGM header values");
  // next_token consumed exactly one whitespace byte after maxval.
  const std::size_t n = img.rows * img.cols;
  img.pixels.resize(n);
  const bool wide = img.maxval > 255;
  std::vector<unsigned char> raw(n * (wide ? 2 : 1));
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size()) throw std::runtime_error(path.string() + ": truncated PGM");
  for (std::size_t i = 0; i < n; ++i)
    img.pixels[i] = wide ? static_cast<std::uint16_t>((raw[2 * i] << 8) | raw[2 * i + 1]) : raw[i];
  return img;
}

void write_pgm(const std::filesystem::path& path, const PgmImage& img) {
  if (img.pixels.size() != img.rows * img.cols) throw DimensionError("PGM pixel count mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "P5\n" << img.cols << ' ' << img.rows << '\n' << img.maxval << '\n';
  const bool wide = img.maxval > 255;
  for (std::uint16_t v : img.pixels) {
    if (wide) out.put(static_cast<char>(v >> 8));
    out.put(static_cast<char>(v & 0xFF));
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

PgmImage to_pgm16(const RealGrid& g, double lo, double hi) {
  PgmImage img{g.rows(), g.cols(), 65535, std::vector<std::uint16_t>(g.size())};
  const double span = hi > lo ? hi - lo : 1.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double t = std::clamp((g[i] - lo) / span, 0.0, 1.0);
    img.pixels[i] = static_cast<std::uint16_t>(std::lround(t * 65535.0));
  }
  return img;
}

}  // namespace cptych
