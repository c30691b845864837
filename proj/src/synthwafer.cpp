#include "shcnn/synthwafer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "shcnn/chip_mapping.hpp"
#include "shcnn/error.hpp"
#include "shcnn/localization.hpp"
#include "shcnn/rng.hpp"

namespace shcnn {

void WaferLayout::validate() const {
  auto fail = [](const std::string& why) { return Error(ErrorCode::InvalidLayout, why); };
  if (image_width < 1 || image_height < 1) throw fail("image dimensions must be positive");
  if (chips_x < 1 || chips_y < 1) throw fail("chip counts must be >= 1");
  if (street_width_px < 2 || street_width_px % 2 != 0) throw fail("street_width_px must be even and >= 2");
  if (chip_pitch_px % 2 != 0) throw fail("chip_pitch_px must be even");
  if (street_width_px >= chip_pitch_px) throw fail("street_width_px must be < chip_pitch_px");
  if (cut_width_px < 2 || cut_width_px % 2 != 0 || cut_width_px > street_width_px) {
    throw fail("cut_width_px must be even, >= 2 and <= street_width_px");
  }
  if (wafer_radius_px <= chip_pitch_px) throw fail("wafer_radius_px must exceed chip_pitch_px");
  if (noise_sigma < 0.0) throw fail("noise_sigma must be >= 0");
  const std::array levels{cut_intensity, street_intensity, chip_intensity, background_intensity};
  for (const int v : levels) {
    if (v < 0 || v > 255) throw fail("intensities must lie in [0,255]");
  }
  if (std::set<int>(levels.begin(), levels.end()).size() != levels.size()) {
    throw fail("intensities must be pairwise distinct");
  }
  if (!(origin.x >= 0 && origin.y >= 0 && origin.x < image_width && origin.y < image_height)) {
    throw fail("origin lies outside the image");
  }
}

bool WaferLayout::has_chip(GridAddress a) const {
  if (!a.is_chip()) return false;
  return a.chip_i() >= min_i() && a.chip_i() <= max_i() && a.chip_j() >= min_j() && a.chip_j() <= max_j();
}

bool WaferLayout::has_street(GridAddress a) const {
  if (!a.is_street()) return false;
  // A street exists where at least one of its two neighbouring cells exists.
  if (a.x_is_half()) {
    const int j = a.twice_y / 2;
    const int left = (a.twice_x - 1) / 2;
    return has_chip(GridAddress::chip(left, j)) || has_chip(GridAddress::chip(left + 1, j));
  }
  const int i = a.twice_x / 2;
  const int up = (a.twice_y - 1) / 2;
  return has_chip(GridAddress::chip(i, up)) || has_chip(GridAddress::chip(i, up + 1));
}

std::vector<GridAddress> WaferLayout::chips() const {
  std::vector<GridAddress> out;
  for (int j = min_j(); j <= max_j(); ++j) {
    for (int i = min_i(); i <= max_i(); ++i) out.push_back(GridAddress::chip(i, j));
  }
  return out;
}

std::vector<GridAddress> WaferLayout::streets() const {
  std::vector<GridAddress> out;
  for (int tj = 2 * min_j() - 1; tj <= 2 * max_j() + 1; ++tj) {
    for (int ti = 2 * min_i() - 1; ti <= 2 * max_i() + 1; ++ti) {
      const GridAddress a{ti, tj};
      if (has_street(a)) out.push_back(a);
    }
  }
  return out;
}

double WaferLayout::street_centerline(GridAddress street) const {
  // Boundary between cells i and i+1 sits half a pixel before the first
  // pixel of cell i+1.
  if (street.x_is_half()) {
    const int i_right = (street.twice_x + 1) / 2;
    return origin.x + i_right * chip_pitch_px - chip_pitch_px / 2 - 0.5;
  }
  const int j_below = (street.twice_y + 1) / 2;
  return origin.y + j_below * chip_pitch_px - chip_pitch_px / 2 - 0.5;
}

std::string_view to_string(DefectKind k) {
  switch (k) {
    case DefectKind::Hole: return "hole";
    case DefectKind::BrokenCorner: return "broken_corner";
    case DefectKind::MisdirectedCut: return "misdirected_cut";
  }
  return "?";
}

namespace {

// Float canvas so defects can be layered before noise and quantization.
class Canvas {
 public:
  Canvas(const WaferLayout& layout) : layout_(layout), px_(static_cast<std::size_t>(layout.image_width) * layout.image_height) {}

  bool in_disc(int x, int y) const {
    const long dx = x - layout_.origin.x;
    const long dy = y - layout_.origin.y;
    const long r = layout_.wafer_radius_px;
    return dx * dx + dy * dy < r * r;
  }
  bool in_image(int x, int y) const { return x >= 0 && y >= 0 && x < layout_.image_width && y < layout_.image_height; }

  void set(int x, int y, int v) {
    if (in_image(x, y) && in_disc(x, y)) px_[idx(x, y)] = static_cast<double>(v);
  }
  void fill_all(int v) { std::fill(px_.begin(), px_.end(), static_cast<double>(v)); }
  void set_raw(int x, int y, int v) { px_[idx(x, y)] = static_cast<double>(v); }

  GrayImage quantize(Rng& noise_rng, double sigma) const {
    GrayImage img(layout_.image_width, layout_.image_height);
    auto out = img.pixels();
    for (std::size_t i = 0; i < px_.size(); ++i) {
      const double v = px_[i] + (sigma > 0.0 ? sigma * noise_rng.normal() : 0.0);
      out[i] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }
    return img;
  }

 private:
  std::size_t idx(int x, int y) const { return static_cast<std::size_t>(y) * layout_.image_width + x; }
  const WaferLayout& layout_;
  std::vector<double> px_;
};

// Along/across frame of one street segment. `across` is the centerline
// coordinate; `along_lo..along_hi` covers the street's own cell edge.
struct StreetFrame {
  bool vertical;  // street with half-integer x runs vertically in the image
  double across;
  int along_lo;
  int along_hi;
  // Part of the segment between the two crossings.
  int inner_lo;
  int inner_hi;

  PixelPoint to_pixel(int along, int across_px) const {
    return vertical ? PixelPoint{across_px, along} : PixelPoint{along, across_px};
  }
};

StreetFrame frame_of(const WaferLayout& L, GridAddress s) {
  StreetFrame f{};
  f.vertical = s.x_is_half();
  f.across = L.street_centerline(s);
  const int cell_index = f.vertical ? s.twice_y / 2 : s.twice_x / 2;
  const int cell_lo = (f.vertical ? L.origin.y : L.origin.x) + cell_index * L.chip_pitch_px - L.chip_pitch_px / 2;
  f.along_lo = cell_lo;
  f.along_hi = cell_lo + L.chip_pitch_px - 1;
  f.inner_lo = cell_lo + L.street_width_px / 2;
  f.inner_hi = cell_lo + L.chip_pitch_px - L.street_width_px / 2 - 1;
  return f;
}

// Pixels whose center lies within `half_width` of segment a-b (frame coords).
void stroke_segment(Canvas& cv, const StreetFrame& f, double a_along, double a_across, double b_along,
                    double b_across, double half_width, int value) {
  const int lo_along = static_cast<int>(std::floor(std::min(a_along, b_along) - half_width - 1));
  const int hi_along = static_cast<int>(std::ceil(std::max(a_along, b_along) + half_width + 1));
  const int lo_across = static_cast<int>(std::floor(std::min(a_across, b_across) - half_width - 1));
  const int hi_across = static_cast<int>(std::ceil(std::max(a_across, b_across) + half_width + 1));
  const double vx = b_along - a_along;
  const double vy = b_across - a_across;
  const double len2 = vx * vx + vy * vy;
  for (int u = lo_along; u <= hi_along; ++u) {
    for (int w = lo_across; w <= hi_across; ++w) {
      double t = len2 > 0 ? ((u - a_along) * vx + (w - a_across) * vy) / len2 : 0.0;
      t = std::clamp(t, 0.0, 1.0);
      const double du = u - (a_along + t * vx);
      const double dw = w - (a_across + t * vy);
      if (du * du + dw * dw < half_width * half_width) {
        const auto p = f.to_pixel(u, w);
        cv.set(p.x, p.y, value);
      }
    }
  }
}

void draw_hole(Canvas& cv, const WaferLayout& L, const StreetFrame& f, const DefectSpec& d) {
  Rng rng(d.rng_seed);
  const double radius = std::max(1.0, d.magnitude * L.street_width_px / 2.0);
  const int margin = static_cast<int>(std::ceil(radius));
  const int lo = f.inner_lo + margin;
  const int hi = std::max(lo, f.inner_hi - margin);
  const int center_along = lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(hi - lo + 1)));
  stroke_segment(cv, f, center_along, f.across, center_along, f.across, radius, L.background_intensity);
}

void draw_broken_corner(Canvas& cv, const WaferLayout& L, const StreetFrame& f, GridAddress s, const DefectSpec& d) {
  Rng rng(d.rng_seed);
  // Chip bodies on either side of the street that exist in the grid.
  std::vector<int> sides;  // -1: chip before the street, +1: chip after
  const auto before = f.vertical ? GridAddress{s.twice_x - 1, s.twice_y} : GridAddress{s.twice_x, s.twice_y - 1};
  const auto after = f.vertical ? GridAddress{s.twice_x + 1, s.twice_y} : GridAddress{s.twice_x, s.twice_y + 1};
  if (L.has_chip(before)) sides.push_back(-1);
  if (L.has_chip(after)) sides.push_back(+1);
  const int side = sides[rng.below(sides.size())];
  const bool at_lo_end = rng.bernoulli(0.5);
  const int legs = std::max(2, static_cast<int>(std::lround(d.magnitude * L.street_width_px)));

  // First body pixel across the street on the chosen side.
  const int half_street = L.street_width_px / 2;
  const int body_across = side < 0 ? static_cast<int>(std::floor(f.across)) - half_street
                                   : static_cast<int>(std::ceil(f.across)) + half_street;
  const int body_along = at_lo_end ? f.inner_lo : f.inner_hi;
  for (int p = 0; p < legs; ++p) {
    for (int q = 0; p + q < legs; ++q) {
      const int along = body_along + (at_lo_end ? p : -p);
      const int across = body_across + (side < 0 ? -q : q);
      const auto px = f.to_pixel(along, across);
      cv.set(px.x, px.y, L.street_intensity);
    }
  }
}

void draw_misdirected_cut(Canvas& cv, const WaferLayout& L, const StreetFrame& f, const DefectSpec& d) {
  Rng rng(d.rng_seed);
  const double half_cut = L.cut_width_px / 2.0;
  // Erase the straight cut between the crossings.
  for (int u = f.inner_lo; u <= f.inner_hi; ++u) {
    for (int w = static_cast<int>(std::ceil(f.across - half_cut)); w <= static_cast<int>(std::floor(f.across + half_cut)); ++w) {
      if (std::abs(w - f.across) < half_cut) {
        const auto p = f.to_pixel(u, w);
        cv.set(p.x, p.y, L.street_intensity);
      }
    }
  }
  const double offset = d.magnitude * L.street_width_px * (rng.bernoulli(0.5) ? 1.0 : -1.0);
  const int span = f.inner_hi - f.inner_lo;
  const double knee = f.inner_lo + span * rng.uniform(0.3, 0.7);
  stroke_segment(cv, f, f.inner_lo, f.across, knee, f.across + offset, half_cut, L.cut_intensity);
  stroke_segment(cv, f, knee, f.across + offset, f.inner_hi, f.across, half_cut, L.cut_intensity);
}

}  // namespace

std::vector<GridAddress> labelled_streets(const WaferLayout& layout) {
  std::set<GridAddress> out;
  for (const auto& chip : layout.chips()) {
    if (chip_position_truth(chip, layout) != ChipPosition::Inside) continue;
    for (const auto& s : adjacent_streets(chip)) out.insert(s);
  }
  return {out.begin(), out.end()};
}

WaferSample generate_wafer(const WaferLayout& layout, const std::vector<DefectSpec>& defects, std::uint64_t seed,
                           const DefectClassMap& class_map) {
  layout.validate();
  for (const auto& d : defects) {
    if (!layout.has_street(d.street)) {
      throw Error(ErrorCode::DefectOutOfGrid,
                  "no street at (" + format_half(d.street.twice_x) + "," + format_half(d.street.twice_y) + ")");
    }
    if (!(d.magnitude > 0.0 && d.magnitude <= 1.0)) {
      throw Error(ErrorCode::DefectOutOfGrid, "defect magnitude must lie in (0,1]");
    }
  }

  const WaferLayout& L = layout;
  Canvas cv(L);
  cv.fill_all(L.background_intensity);
  const int P = L.chip_pitch_px;
  const int half_street = L.street_width_px / 2;

  // Bare wafer, then chip bodies.
  for (int y = 0; y < L.image_height; ++y) {
    for (int x = 0; x < L.image_width; ++x) {
      if (cv.in_disc(x, y)) cv.set_raw(x, y, L.street_intensity);
    }
  }
  for (const auto& chip : L.chips()) {
    const auto o = L.cell_origin(chip.chip_i(), chip.chip_j());
    for (int y = o.y + half_street; y < o.y + P - half_street; ++y) {
      for (int x = o.x + half_street; x < o.x + P - half_street; ++x) cv.set(x, y, L.chip_intensity);
    }
  }
  // Straight cuts along every street, crossings included.
  for (const auto& s : L.streets()) {
    const auto f = frame_of(L, s);
    stroke_segment(cv, f, f.along_lo, f.across, f.along_hi, f.across, L.cut_width_px / 2.0, L.cut_intensity);
  }

  for (const auto& d : defects) {
    const auto f = frame_of(L, d.street);
    switch (d.kind) {
      case DefectKind::Hole: draw_hole(cv, L, f, d); break;
      case DefectKind::BrokenCorner: draw_broken_corner(cv, L, f, d.street, d); break;
      case DefectKind::MisdirectedCut: draw_misdirected_cut(cv, L, f, d); break;
    }
  }

  Rng noise(derive_seed(seed, 0));
  WaferSample out;
  out.image = cv.quantize(noise, L.noise_sigma);

  std::vector<GridAddress> inside;
  for (const auto& chip : L.chips()) {
    const auto pos = chip_position_truth(chip, L);
    out.truth.chip_positions.emplace(chip, pos);
    if (pos == ChipPosition::Inside) inside.push_back(chip);
  }
  for (const auto& s : labelled_streets(L)) out.truth.street_labels.emplace(s, Label::Flawless);
  for (const auto& d : defects) {
    if (auto it = out.truth.street_labels.find(d.street); it != out.truth.street_labels.end()) {
      it->second = worse(it->second, class_map(d.kind));
    }
  }
  out.truth.chip_labels = map_streets_to_chips(out.truth.street_labels, inside);
  return out;
}

namespace {

void check_mix(const DatasetOptions& opts) {
  double sum = 0.0;
  for (const double p : opts.class_mix) {
    if (!(p >= 0.0)) throw Error(ErrorCode::BadMix, "class probabilities must be non-negative");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-4) throw Error(ErrorCode::BadMix, "class probabilities must sum to 1");
  for (int c = 1; c < kNumLabels; ++c) {
    if (opts.class_mix[c] == 0.0) continue;
    bool producible = false;
    for (const auto l : opts.class_map.label) producible |= to_index(l) == c;
    if (!producible) {
      throw Error(ErrorCode::BadMix, "no defect kind maps to class " + std::string(to_string(label_from_index(c))));
    }
  }
  if (!(opts.magnitude_min > 0.0 && opts.magnitude_min <= opts.magnitude_max && opts.magnitude_max <= 1.0)) {
    throw Error(ErrorCode::BadMix, "magnitude range must satisfy 0 < min <= max <= 1");
  }
}

Label draw_class(Rng& rng, const std::array<double, kNumLabels>& mix) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (int c = 0; c < kNumLabels; ++c) {
    acc += mix[c];
    if (u < acc) return label_from_index(c);
  }
  for (int c = kNumLabels - 1; c >= 0; --c) {
    if (mix[c] > 0.0) return label_from_index(c);
  }
  return Label::Flawless;
}

}  // namespace

std::vector<WaferSample> synthesize_wafers(const WaferLayout& layout, const DatasetOptions& opts, int n_wafers,
                                           std::uint64_t seed) {
  layout.validate();
  check_mix(opts);
  if (n_wafers < 1) throw Error(ErrorCode::BadMix, "n_wafers must be >= 1");

  const auto streets = labelled_streets(layout);
  std::vector<WaferSample> out;
  out.reserve(static_cast<std::size_t>(n_wafers));
  for (int w = 0; w < n_wafers; ++w) {
    const std::uint64_t wafer_seed = derive_seed(seed, static_cast<std::uint64_t>(w));
    Rng rng(wafer_seed);
    std::vector<DefectSpec> defects;
    for (const auto& s : streets) {
      const Label want = draw_class(rng, opts.class_mix);
      if (want == Label::Flawless) continue;
      std::vector<DefectKind> kinds;
      for (int k = 0; k < kNumDefectKinds; ++k) {
        if (opts.class_map.label[k] == want) kinds.push_back(static_cast<DefectKind>(k));
      }
      DefectSpec d;
      d.kind = kinds[rng.below(kinds.size())];
      d.street = s;
      d.magnitude = rng.uniform(opts.magnitude_min, opts.magnitude_max);
      d.rng_seed = rng.next();
      defects.push_back(d);
    }
    out.push_back(generate_wafer(layout, defects, wafer_seed, opts.class_map));
  }
  return out;
}

std::vector<ManifestRow> generate_dataset(const WaferLayout& layout, const DatasetOptions& opts, int n_wafers,
                                          std::uint64_t seed, const std::filesystem::path& dir) {
  const auto wafers = synthesize_wafers(layout, opts, n_wafers, seed);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + dir.string() + ": " + ec.message());

  std::vector<ManifestRow> rows;
  for (std::size_t w = 0; w < wafers.size(); ++w) {
    char name[32];
    std::snprintf(name, sizeof name, "wafer_%04zu.pgm", w);
    write_pgm(dir / name, wafers[w].image);
    const auto& truth = wafers[w].truth;
    for (const auto& [chip, pos] : truth.chip_positions) {
      ManifestRow r{name, true, chip, std::nullopt, pos};
      if (auto it = truth.chip_labels.find(chip); it != truth.chip_labels.end()) r.label = it->second;
      rows.push_back(r);
    }
    for (const auto& [street, label] : truth.street_labels) {
      rows.push_back(ManifestRow{name, false, street, label, ChipPosition::Inside});
    }
  }
  std::ofstream out(dir / "manifest.csv", std::ios::binary);
  out << format_manifest(rows);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write manifest in " + dir.string());
  return rows;
}

std::string format_manifest(const std::vector<ManifestRow>& rows) {
  std::ostringstream os;
  os << "path,kind,x,y,label,position\n";
  for (const auto& r : rows) {
    os << r.path << ',' << (r.is_chip ? "chip" : "street") << ',' << format_half(r.address.twice_x) << ','
       << format_half(r.address.twice_y) << ',';
    if (r.label) os << to_index(*r.label);
    os << ',' << to_string(r.position) << '\n';
  }
  return os.str();
}

std::vector<ManifestRow> parse_manifest(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line != "path,kind,x,y,label,position") {
    throw Error(ErrorCode::IoFailure, "manifest header mismatch");
  }
  std::vector<ManifestRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (line.back() == ',') f.emplace_back();
    if (f.size() != 6) throw Error(ErrorCode::IoFailure, "malformed manifest row: " + line);
    ManifestRow r;
    r.path = f[0];
    if (f[1] != "chip" && f[1] != "street") throw Error(ErrorCode::IoFailure, "bad kind in: " + line);
    r.is_chip = f[1] == "chip";
    r.address = {parse_half(f[2]), parse_half(f[3])};
    if (!f[4].empty()) r.label = label_from_index(std::stoi(f[4]));
    if (f[5] != "inside" && f[5] != "outside") throw Error(ErrorCode::IoFailure, "bad position in: " + line);
    r.position = f[5] == "inside" ? ChipPosition::Inside : ChipPosition::Outside;
    rows.push_back(r);
  }
  return rows;
}

std::vector<WaferSample> load_dataset(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.csv", std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot read " + (dir / "manifest.csv").string());
  std::ostringstream ss;
  ss << in.rdbuf();
  std::vector<std::string> order;
  std::map<std::string, GroundTruth> truth;
  for (const auto& r : parse_manifest(ss.str())) {
    auto [it, fresh] = truth.try_emplace(r.path);
    if (fresh) order.push_back(r.path);
    GroundTruth& t = it->second;
    if (r.is_chip) {
      t.chip_positions[r.address] = r.position;
      if (r.label) t.chip_labels[r.address] = *r.label;
    } else {
      if (!r.label) throw Error(ErrorCode::IoFailure, "street row without label in " + r.path);
      t.street_labels[r.address] = *r.label;
    }
  }
  std::vector<WaferSample> out;
  out.reserve(order.size());
  for (const auto& name : order) out.push_back({read_pgm(dir / name), std::move(truth[name])});
  return out;
}

}  // namespace shcnn
