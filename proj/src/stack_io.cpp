#include "afbench/stack_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

namespace afbench {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json parse_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorKind::Io, "cannot open " + path.string());
  }
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Data, "malformed JSON in " + path.string() + ": " + e.what());
  }
}

void write_json_file(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) {
    throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  }
  out << j.dump(2) << "\n";
  if (!out) {
    throw Error(ErrorKind::Io, "failed writing " + path.string());
  }
}

// Runs a block of json field accesses, converting library exceptions into
// data errors that name the offending file.
template <typename Fn>
auto json_fields(const fs::path& path, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Data, "bad fields in " + path.string() + ": " + e.what());
  }
}

std::string next_pgm_token(std::istream& in, const fs::path& path) {
  std::string tok;
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') {
        c = in.get();
      }
    } else if (std::isspace(c)) {
      c = in.get();
    } else {
      break;
    }
  }
  while (c != EOF && !std::isspace(c) && c != '#') {
    tok.push_back(static_cast<char>(c));
    c = in.get();
  }
  if (c == '#') {
    in.unget();
  }
  if (tok.empty()) {
    throw Error(ErrorKind::Data, "truncated PGM header in " + path.string());
  }
  return tok;
}

int parse_pgm_int(std::istream& in, const fs::path& path) {
  const std::string tok = next_pgm_token(in, path);
  try {
    size_t pos = 0;
    const int v = std::stoi(tok, &pos);
    if (pos != tok.size()) {
      throw std::invalid_argument(tok);
    }
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorKind::Data, "bad PGM header field in " + path.string());
  }
}

CalibrationGrid grid_from_json(const json& j, const fs::path& path) {
  return json_fields(path, [&] {
    CalibrationGrid grid;
    grid.grid_w = j.at("grid_w").get<int>();
    grid.grid_h = j.at("grid_h").get<int>();
    grid.values = j.at("values").get<std::vector<double>>();
    if (grid.grid_w < 2 || grid.grid_h < 2 ||
        grid.values.size() !=
            static_cast<size_t>(grid.grid_w) * static_cast<size_t>(grid.grid_h)) {
      throw Error(ErrorKind::Data, "malformed calibration grid in " + path.string());
    }
    for (double v : grid.values) {
      if (!std::isfinite(v) || v <= 0.0) {
        throw Error(ErrorKind::Data,
                    "calibration values must be positive in " + path.string());
      }
    }
    return grid;
  });
}

json grid_to_json(const CalibrationGrid& grid) {
  json j;
  j["grid_w"] = grid.grid_w;
  j["grid_h"] = grid.grid_h;
  j["values"] = grid.values;
  return j;
}

fs::path slice_path(const fs::path& dir, int k, const char* suffix) {
  return dir / ("slice_" + std::to_string(k) + suffix);
}

}  // namespace

void write_pgm16(const fs::path& path, const Patch& patch) {
  patch.validate("pgm write");
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  }
  out << "P5\n" << patch.width << " " << patch.height << "\n65535\n";
  std::vector<unsigned char> row(static_cast<size_t>(patch.width) * 2);
  for (int y = 0; y < patch.height; ++y) {
    for (int x = 0; x < patch.width; ++x) {
      const double v = std::clamp(patch.at(x, y), 0.0, 1.0);
      const auto q = static_cast<uint16_t>(std::lround(v * 65535.0));
      row[static_cast<size_t>(x) * 2] = static_cast<unsigned char>(q >> 8);
      row[static_cast<size_t>(x) * 2 + 1] = static_cast<unsigned char>(q & 0xFF);
    }
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size()));
  }
  if (!out) {
    throw Error(ErrorKind::Io, "failed writing " + path.string());
  }
}

Patch read_pgm16(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorKind::Io, "cannot open " + path.string());
  }
  if (next_pgm_token(in, path) != "P5") {
    throw Error(ErrorKind::Data, "not a binary PGM: " + path.string());
  }
  const int w = parse_pgm_int(in, path);
  const int h = parse_pgm_int(in, path);
  const int maxval = parse_pgm_int(in, path);
  if (w <= 0 || h <= 0) {
    throw Error(ErrorKind::Data, "bad PGM dimensions in " + path.string());
  }
  if (maxval != 65535) {
    throw Error(ErrorKind::Data, "unsupported PGM maxval in " + path.string());
  }
  // next_pgm_token consumed the single whitespace byte after maxval, so the
  // sample data starts here.
  std::vector<unsigned char> raw(static_cast<size_t>(w) * static_cast<size_t>(h) * 2);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size())) {
    throw Error(ErrorKind::Data, "truncated PGM data in " + path.string());
  }
  Patch p(w, h);
  for (size_t i = 0; i < p.data.size(); ++i) {
    const unsigned hi = raw[i * 2];
    const unsigned lo = raw[i * 2 + 1];
    p.data[i] = static_cast<double>((hi << 8) | lo) / 65535.0;
  }
  return p;
}

void save_stack(const fs::path& dir, const FocalStack& stack) {
  stack.validate();
  fs::create_directories(dir);
  json manifest;
  manifest["n"] = stack.slice_count();
  manifest["width"] = stack.slices[0].left.width;
  manifest["height"] = stack.slices[0].left.height;
  manifest["focus_distances_m"] = stack.focus_distances_m;
  manifest["dual_pixel"] = stack.dual_pixel;
  if (stack.ground_truth_index) {
    manifest["ground_truth_index"] = *stack.ground_truth_index;
  }
  write_json_file(dir / "manifest.json", manifest);
  for (int k = 0; k < stack.slice_count(); ++k) {
    if (stack.dual_pixel) {
      write_pgm16(slice_path(dir, k, "_L.pgm"), stack.slices[static_cast<size_t>(k)].left);
      write_pgm16(slice_path(dir, k, "_R.pgm"), stack.slices[static_cast<size_t>(k)].right);
    } else {
      write_pgm16(slice_path(dir, k, ".pgm"), stack.slices[static_cast<size_t>(k)].left);
    }
  }
}

FocalStack load_stack(const fs::path& dir) {
  const fs::path manifest_path = dir / "manifest.json";
  const json manifest = parse_json_file(manifest_path);
  FocalStack stack;
  int n = 0;
  int w = 0;
  int h = 0;
  json_fields(manifest_path, [&] {
    n = manifest.at("n").get<int>();
    w = manifest.at("width").get<int>();
    h = manifest.at("height").get<int>();
    stack.focus_distances_m = manifest.at("focus_distances_m").get<std::vector<double>>();
    stack.dual_pixel = manifest.at("dual_pixel").get<bool>();
    if (manifest.contains("ground_truth_index")) {
      stack.ground_truth_index = manifest.at("ground_truth_index").get<int>();
    }
    return 0;
  });
  if (n <= 0 || static_cast<size_t>(n) != stack.focus_distances_m.size()) {
    throw Error(ErrorKind::Data, "inconsistent manifest in " + dir.string());
  }
  stack.slices.resize(static_cast<size_t>(n));
  for (int k = 0; k < n; ++k) {
    DualPixelPatch& s = stack.slices[static_cast<size_t>(k)];
    if (stack.dual_pixel) {
      s.left = read_pgm16(slice_path(dir, k, "_L.pgm"));
      s.right = read_pgm16(slice_path(dir, k, "_R.pgm"));
    } else {
      s.left = read_pgm16(slice_path(dir, k, ".pgm"));
    }
    if (s.left.width != w || s.left.height != h) {
      throw Error(ErrorKind::Data, "slice dimensions do not match manifest in " + dir.string());
    }
  }
  try {
    stack.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::Data, dir.string() + ": " + e.what());
  }
  return stack;
}

void save_camera_json(const fs::path& path, const CameraConfig& cam) {
  cam.validate();
  json j;
  j["focal_length_f"] = cam.focal_length_f;
  j["aperture_L"] = cam.aperture_radius_l;
  j["pixel_pitch"] = cam.pixel_pitch_m;
  j["alpha"] = cam.alpha;
  j["focus_distances_m"] = cam.focus_distances_m;
  if (!cam.calibration_grid.empty()) {
    j["calibration_grid"] = grid_to_json(cam.calibration_grid);
  }
  write_json_file(path, j);
}

CameraConfig load_camera_json(const fs::path& path) {
  const json j = parse_json_file(path);
  CameraConfig cam = CameraConfig::defaults();
  json_fields(path, [&] {
    if (j.contains("focal_length_f")) {
      cam.focal_length_f = j.at("focal_length_f").get<double>();
    }
    if (j.contains("aperture_L")) {
      cam.aperture_radius_l = j.at("aperture_L").get<double>();
    }
    if (j.contains("pixel_pitch")) {
      cam.pixel_pitch_m = j.at("pixel_pitch").get<double>();
    }
    if (j.contains("alpha")) {
      cam.alpha = j.at("alpha").get<double>();
    }
    if (j.contains("focus_distances_m")) {
      cam.focus_distances_m = j.at("focus_distances_m").get<std::vector<double>>();
    }
    if (j.contains("calibration_grid")) {
      cam.calibration_grid = grid_from_json(j.at("calibration_grid"), path);
    }
    return 0;
  });
  try {
    cam.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::Data, path.string() + ": " + e.what());
  }
  return cam;
}

CalibrationGrid load_calibration_json(const fs::path& path) {
  return grid_from_json(parse_json_file(path), path);
}

DatasetReader::DatasetReader(const fs::path& dir) {
  const fs::path index_path = dir / "dataset.json";
  const fs::path manifest_path = dir / "manifest.json";
  camera_ = CameraConfig::defaults();
  if (fs::exists(index_path)) {
    const json index = parse_json_file(index_path);
    std::vector<std::string> names;
    std::string camera_file;
    json_fields(index_path, [&] {
      names = index.at("stacks").get<std::vector<std::string>>();
      if (index.contains("count") &&
          index.at("count").get<size_t>() != names.size()) {
        throw Error(ErrorKind::Data, "stack count mismatch in " + index_path.string());
      }
      if (index.contains("camera")) {
        camera_file = index.at("camera").get<std::string>();
      }
      return 0;
    });
    if (names.empty()) {
      throw Error(ErrorKind::Data, "dataset lists no stacks: " + index_path.string());
    }
    for (const std::string& name : names) {
      stack_dirs_.push_back(dir / name);
    }
    if (!camera_file.empty()) {
      camera_ = load_camera_json(dir / camera_file);
    } else if (fs::exists(dir / "camera.json")) {
      camera_ = load_camera_json(dir / "camera.json");
    }
  } else if (fs::exists(manifest_path)) {
    stack_dirs_.push_back(dir);
    if (fs::exists(dir / "camera.json")) {
      camera_ = load_camera_json(dir / "camera.json");
    }
  } else {
    throw Error(ErrorKind::Io, "not a dataset directory: " + dir.string());
  }
}

FocalStack DatasetReader::get(size_t index) const {
  return load_stack(stack_dirs_.at(index));
}

void save_dataset_index(const fs::path& dir, const std::vector<std::string>& stack_names,
                        const CameraConfig& cam) {
  fs::create_directories(dir);
  json index;
  index["count"] = stack_names.size();
  index["stacks"] = stack_names;
  index["camera"] = "camera.json";
  write_json_file(dir / "dataset.json", index);
  save_camera_json(dir / "camera.json", cam);
}

}  // namespace afbench
