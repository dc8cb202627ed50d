#include "depthhints/scene.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

namespace depthhints::io {

namespace {

struct Surface {
  const Structure* shape;  // null for the background
  double disparity;
  std::uint64_t id;
};

std::uint64_t hash(std::uint64_t seed, std::uint64_t a, std::int64_t b, std::int64_t c) {
  std::uint64_t h = Rng::mix(seed ^ 0x6a09e667f3bcc909ULL);
  h = Rng::mix(h ^ a);
  h = Rng::mix(h ^ static_cast<std::uint64_t>(b));
  return Rng::mix(h ^ static_cast<std::uint64_t>(c));
}

double hash_unit(std::uint64_t seed, std::uint64_t a, std::int64_t b, std::int64_t c) {
  return static_cast<double>(hash(seed, a, b, c) >> 11) * 0x1.0p-53;
}

class Renderer {
 public:
  explicit Renderer(const SceneSpec& spec) : spec_(spec) {
    surfaces_.push_back({nullptr, spec.background, 0});
    for (std::size_t i = 0; i < spec.structures.size(); ++i)
      surfaces_.push_back({&spec.structures[i], spec.structures[i].disparity, i + 1});
  }

  // Nearest surface covering surface-coordinate X on row y. Among equal
  // disparities the later structure wins.
  const Surface& surface_at(double X, int y) const {
    const Surface* best = &surfaces_.front();
    for (const Surface& s : surfaces_) {
      if (!s.shape) continue;
      const Rect& r = s.shape->region;
      if (y < r.y0 || y >= r.y1 || X < r.x0 || X >= r.x1) continue;
      if (s.disparity >= best->disparity) best = &s;
    }
    return *best;
  }

  // Surface visible in the right view at pixel x'.
  const Surface& right_surface(double xr, int y) const {
    const Surface* best = &surfaces_.front();
    for (const Surface& s : surfaces_) {
      if (!s.shape) continue;
      const Rect& r = s.shape->region;
      const double X = xr + s.disparity;
      if (y < r.y0 || y >= r.y1 || X < r.x0 || X >= r.x1) continue;
      if (s.disparity >= best->disparity) best = &s;
    }
    return *best;
  }

  double intensity(const Surface& s, double X, int y) const {
    const Texture& t = spec_.texture;
    Texture::Kind kind = t.kind;
    double period = t.period;
    if (s.shape && s.shape->kind == Structure::Kind::stripes) {
      kind = Texture::Kind::stripes;
      period = s.shape->period;
    }
    double n = 0.0;  // pattern value in [-1, 1]
    switch (kind) {
      case Texture::Kind::noise: {
        // Value noise on the integer lattice, linear along the row.
        const double fx = std::floor(X);
        const auto ix = static_cast<std::int64_t>(fx);
        const double f = X - fx;
        const double v0 = 2.0 * hash_unit(t.seed, s.id, ix, y) - 1.0;
        const double v1 = 2.0 * hash_unit(t.seed, s.id, ix + 1, y) - 1.0;
        n = (1.0 - f) * v0 + f * v1;
        break;
      }
      case Texture::Kind::gradient: {
        const double span = spec_.width + 0.5 * spec_.height;
        const double offset = hash_unit(t.seed, s.id, -1, -1);
        // Triangle wave, so the pattern stays continuous across the wrap.
        const double phase = std::fmod((X + 0.5 * y) / span + offset, 1.0);
        n = 1.0 - 4.0 * std::abs(phase - 0.5);
        break;
      }
      case Texture::Kind::stripes: {
        const double phase = 2.0 * std::numbers::pi * hash_unit(t.seed, s.id, -2, -2);
        n = std::sin(2.0 * std::numbers::pi * X / period + phase);
        break;
      }
    }
    double v = 0.5 + 0.5 * t.amplitude * n;
    if (t.grain > 0.0) {
      const double fx = std::floor(X);
      const auto ix = static_cast<std::int64_t>(fx);
      const double f = X - fx;
      const std::uint64_t key = s.id + 0x100000000ULL;
      const double g0 = 2.0 * hash_unit(t.seed, key, ix, y) - 1.0;
      const double g1 = 2.0 * hash_unit(t.seed, key, ix + 1, y) - 1.0;
      v += 0.5 * t.grain * ((1.0 - f) * g0 + f * g1);
    }
    return std::clamp(v, 0.0, 1.0);
  }

 private:
  const SceneSpec& spec_;
  std::vector<Surface> surfaces_;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_number(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != value.size()) throw ValueError("scene: bad number '" + value + "' for " + key);
  return v;
}

int to_int(const std::string& key, const std::string& value) {
  const double v = to_number(key, value);
  if (v != std::floor(v)) throw ValueError("scene: " + key + " must be an integer");
  return static_cast<int>(v);
}

// "kind a=1 b=2" -> kind, {a:1, b:2}
std::pair<std::string, std::map<std::string, std::string>> split_record(const std::string& text) {
  std::istringstream in(text);
  std::string kind, token;
  in >> kind;
  std::map<std::string, std::string> fields;
  while (in >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos || eq == 0) throw ValueError("scene: expected key=value, got '" + token + "'");
    fields[token.substr(0, eq)] = token.substr(eq + 1);
  }
  return {kind, fields};
}

const char* name(Texture::Kind k) {
  switch (k) {
    case Texture::Kind::noise: return "noise";
    case Texture::Kind::gradient: return "gradient";
    case Texture::Kind::stripes: return "stripes";
  }
  return "noise";
}

const char* name(Structure::Kind k) {
  switch (k) {
    case Structure::Kind::plane: return "plane";
    case Structure::Kind::thin_bar: return "thin_bar";
    case Structure::Kind::stripes: return "stripes";
  }
  return "plane";
}

}  // namespace

void SceneSpec::validate() const {
  if (width <= 0 || height <= 0) throw ValueError("scene: width and height must be positive");
  auto check_disparity = [&](double d, const std::string& what) {
    if (!std::isfinite(d) || d < 0.0 || d >= width) throw ValueError("scene: " + what + " disparity must lie in [0, width)");
  };
  check_disparity(background, "background");
  if (!(texture.amplitude >= 0.0 && texture.amplitude <= 1.0)) throw ValueError("scene: amplitude must lie in [0,1]");
  if (!(texture.period > 0.0)) throw ValueError("scene: texture period must be positive");
  if (!(texture.grain >= 0.0 && texture.grain <= 1.0)) throw ValueError("scene: grain must lie in [0,1]");
  for (std::size_t i = 0; i < structures.size(); ++i) {
    const Structure& s = structures[i];
    const std::string what = "structure " + std::to_string(i);
    check_disparity(s.disparity, what);
    if (!s.region.fits(width, height)) throw ValueError("scene: " + what + " region outside the image");
    if (!(s.period > 0.0)) throw ValueError("scene: " + what + " period must be positive");
  }
}

SyntheticPair render_scene(const SceneSpec& spec) {
  spec.validate();
  const Renderer renderer(spec);
  const int w = spec.width;
  const int h = spec.height;
  SyntheticPair pair{Image(w, h, 1), Image(w, h, 1), DisparityMap(w, h), DisparityMap(w, h), Mask(w, h, 0)};

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto& s = renderer.surface_at(x, y);
      pair.left(x, y) = renderer.intensity(s, x, y);
      pair.gt_disparity.disp(x, y) = s.disparity;

      // Visible in the right view when the matching position is inside the
      // image and no nearer surface covers it there.
      const double xr = x - s.disparity;
      const bool visible = xr >= 0.0 && renderer.right_surface(xr, y).id == s.id;
      pair.occlusion_mask(x, y) = visible ? 1 : 0;

      const auto& r = renderer.right_surface(x, y);
      pair.right(x, y) = renderer.intensity(r, x + r.disparity, y);
      pair.gt_disparity_right.disp(x, y) = r.disparity;
    }
  }
  return pair;
}

SceneSpec parse_scene(const std::string& text) {
  SceneSpec spec;
  bool have_w = false, have_h = false;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash_pos = line.find('#'); hash_pos != std::string::npos) line.erase(hash_pos);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ValueError("scene: expected 'key = value', got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    if (key == "width") {
      spec.width = to_int(key, value);
      have_w = true;
    } else if (key == "height") {
      spec.height = to_int(key, value);
      have_h = true;
    } else if (key == "background") {
      spec.background = to_number(key, value);
    } else if (key == "texture") {
      auto [kind, fields] = split_record(value);
      if (kind == "noise") spec.texture.kind = Texture::Kind::noise;
      else if (kind == "gradient") spec.texture.kind = Texture::Kind::gradient;
      else if (kind == "stripes") spec.texture.kind = Texture::Kind::stripes;
      else throw ValueError("scene: unknown texture kind '" + kind + "'");
      for (const auto& [k, v] : fields) {
        if (k == "seed") spec.texture.seed = static_cast<std::uint64_t>(std::stoull(v));
        else if (k == "amplitude") spec.texture.amplitude = to_number(k, v);
        else if (k == "period") spec.texture.period = to_number(k, v);
        else if (k == "grain") spec.texture.grain = to_number(k, v);
        else throw ValueError("scene: unknown texture field '" + k + "'");
      }
    } else if (key == "structure") {
      auto [kind, fields] = split_record(value);
      Structure s;
      if (kind == "plane") s.kind = Structure::Kind::plane;
      else if (kind == "thin_bar") s.kind = Structure::Kind::thin_bar;
      else if (kind == "stripes") s.kind = Structure::Kind::stripes;
      else throw ValueError("scene: unknown structure kind '" + kind + "'");
      const char* required[] = {"x0", "y0", "x1", "y1", "disparity"};
      for (const char* r : required)
        if (!fields.count(r)) throw ValueError(std::string("scene: structure missing field '") + r + "'");
      for (const auto& [k, v] : fields) {
        if (k == "x0") s.region.x0 = to_int(k, v);
        else if (k == "y0") s.region.y0 = to_int(k, v);
        else if (k == "x1") s.region.x1 = to_int(k, v);
        else if (k == "y1") s.region.y1 = to_int(k, v);
        else if (k == "disparity") s.disparity = to_number(k, v);
        else if (k == "period") s.period = to_number(k, v);
        else throw ValueError("scene: unknown structure field '" + k + "'");
      }
      spec.structures.push_back(s);
    } else {
      throw ValueError("scene: unknown key '" + key + "'");
    }
  }
  if (!have_w || !have_h) throw ValueError("scene: width and height are required");
  spec.validate();
  return spec;
}

SceneSpec read_scene(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scene file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scene(ss.str());
}

std::string format_scene(const SceneSpec& spec) {
  std::ostringstream os;
  os.precision(17);
  os << "width = " << spec.width << "\nheight = " << spec.height << "\nbackground = " << spec.background << '\n';
  os << "texture = " << name(spec.texture.kind) << " seed=" << spec.texture.seed
     << " amplitude=" << spec.texture.amplitude << " period=" << spec.texture.period
     << " grain=" << spec.texture.grain << '\n';
  for (const Structure& s : spec.structures)
    os << "structure = " << name(s.kind) << " x0=" << s.region.x0 << " y0=" << s.region.y0 << " x1=" << s.region.x1
       << " y1=" << s.region.y1 << " disparity=" << s.disparity << " period=" << s.period << '\n';
  return os.str();
}

}  // namespace depthhints::io
