#include "situ/frame_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>

#include "situ/error.hpp"

namespace situ {

using nlohmann::json;

void write_depth_pgm(const std::filesystem::path& path, int width, int height,
                     const std::vector<double>& meters) {
  if (meters.size() != static_cast<std::size_t>(width) * height) {
    throw DimensionMismatch("depth buffer does not match width x height");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error("cannot write " + path.string());
  }
  out << "P5\n" << width << ' ' << height << "\n65535\n";
  std::vector<unsigned char> bytes;
  bytes.reserve(meters.size() * 2);
  for (double m : meters) {
    const double mm = std::round(m * 1000.0);
    const auto v = static_cast<std::uint16_t>(std::clamp(mm, 0.0, 65535.0));
    bytes.push_back(static_cast<unsigned char>(v >> 8));
    bytes.push_back(static_cast<unsigned char>(v & 0xff));
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw Error("failed writing " + path.string());
  }
}

namespace {

// Next header token, skipping whitespace and '#' comments.
std::string pgm_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) {
        break;
      }
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

}  // namespace

DepthImage read_depth_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error("cannot open depth map " + path.string());
  }
  if (pgm_token(in) != "P5") {
    throw ParseError(path.string() + ": not a binary PGM");
  }
  DepthImage img;
  int maxval = 0;
  try {
    img.width = std::stoi(pgm_token(in));
    img.height = std::stoi(pgm_token(in));
    maxval = std::stoi(pgm_token(in));
  } catch (const std::exception&) {
    throw ParseError(path.string() + ": bad PGM header");
  }
  if (img.width <= 0 || img.height <= 0 || maxval <= 0 || maxval > 65535) {
    throw ParseError(path.string() + ": bad PGM header");
  }
  const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
  const std::size_t bps = maxval > 255 ? 2 : 1;
  std::vector<unsigned char> bytes(n * bps);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (static_cast<std::size_t>(in.gcount()) != bytes.size()) {
    throw ParseError(path.string() + ": truncated PGM data");
  }
  img.meters.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const unsigned v = bps == 2 ? (unsigned{bytes[2 * i]} << 8) | bytes[2 * i + 1] : bytes[i];
    img.meters[i] = v / 1000.0;
  }
  return img;
}

json trajectory_entry_to_json(const TrajectoryEntry& e) {
  json j = e.extra;
  json ext = json::array();
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      ext.push_back(e.extrinsic(r, c));
    }
  }
  j["frame_id"] = e.frame_id;
  j["extrinsic"] = std::move(ext);
  j["intrinsic"] = {{"fx", e.intrinsic.fx}, {"fy", e.intrinsic.fy},
                    {"cx", e.intrinsic.cx}, {"cy", e.intrinsic.cy}};
  j["width"] = e.width;
  j["height"] = e.height;
  j["depth_path"] = e.depth_path;
  return j;
}

TrajectoryEntry trajectory_entry_from_json(const json& j) {
  if (!j.is_object()) {
    throw ParseError("trajectory entry is not an object");
  }
  TrajectoryEntry e;
  try {
    e.frame_id = j.at("frame_id").get<std::string>();
    const auto& ext = j.at("extrinsic");
    if (!ext.is_array() || ext.size() != 16) {
      throw ParseError("extrinsic must have 16 numbers");
    }
    for (int i = 0; i < 16; ++i) {
      e.extrinsic(i / 4, i % 4) = ext[i].get<double>();
    }
    const auto& in = j.at("intrinsic");
    e.intrinsic = {in.at("fx").get<double>(), in.at("fy").get<double>(),
                   in.at("cx").get<double>(), in.at("cy").get<double>()};
    e.width = j.at("width").get<int>();
    e.height = j.at("height").get<int>();
    e.depth_path = j.at("depth_path").get<std::string>();
  } catch (const json::exception& ex) {
    throw ParseError(ex.what());
  }
  for (auto it = j.begin(); it != j.end(); ++it) {
    static const char* known[] = {"frame_id", "extrinsic", "intrinsic", "width", "height", "depth_path"};
    if (std::find(std::begin(known), std::end(known), it.key()) == std::end(known)) {
      e.extra[it.key()] = it.value();
    }
  }
  return e;
}

std::vector<TrajectoryEntry> load_trajectory(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error("cannot open trajectory " + path.string());
  }
  std::vector<TrajectoryEntry> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    try {
      out.push_back(trajectory_entry_from_json(json::parse(line)));
    } catch (const ParseError& e) {
      throw ParseError(path.string() + ": " + e.what(), lineno);
    } catch (const json::exception& e) {
      throw ParseError(path.string() + ": " + e.what(), lineno);
    }
  }
  return out;
}

void write_trajectory(const std::filesystem::path& path, const std::vector<TrajectoryEntry>& entries) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error("cannot write trajectory " + path.string());
  }
  for (const auto& e : entries) {
    out << trajectory_entry_to_json(e).dump() << '\n';
  }
  if (!out) {
    throw Error("failed writing " + path.string());
  }
}

CameraFrame load_frame(const TrajectoryEntry& entry, const std::filesystem::path& base_dir) {
  const DepthImage img = read_depth_pgm(base_dir / entry.depth_path);
  if (img.width != entry.width || img.height != entry.height) {
    throw InvalidFrame("frame " + entry.frame_id + ": depth map is " + std::to_string(img.width) +
                       "x" + std::to_string(img.height) + ", trajectory says " +
                       std::to_string(entry.width) + "x" + std::to_string(entry.height));
  }
  CameraFrame frame{entry.frame_id, entry.extrinsic, entry.intrinsic, entry.width, entry.height, img.meters};
  validate_frame(frame);
  return frame;
}

}  // namespace situ
