#include "slc/frame_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "slc/error.hpp"
#include "slc/kernels.hpp"

namespace fs = std::filesystem;

namespace slc {
namespace {

std::string read_all(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::data, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

void write_all(const fs::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::data, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::data, "short write to " + path.string());
}

// Netpbm header token reader: skips whitespace and '#' comments.
struct PnmCursor {
  const std::string& buf;
  std::size_t pos = 0;

  long next_int(const fs::path& path) {
    for (;;) {
      while (pos < buf.size() && std::isspace(static_cast<unsigned char>(buf[pos]))) ++pos;
      if (pos < buf.size() && buf[pos] == '#') {
        while (pos < buf.size() && buf[pos] != '\n') ++pos;
        continue;
      }
      break;
    }
    const std::size_t begin = pos;
    while (pos < buf.size() && std::isdigit(static_cast<unsigned char>(buf[pos]))) ++pos;
    if (begin == pos) throw Error(ErrorKind::data, "bad image header in " + path.string());
    return std::stol(buf.substr(begin, pos - begin));
  }
};

}  // namespace

GrayImage to_gray_image(std::span<const float> plane, int width, int height) {
  GrayImage img{width, height, std::vector<std::uint8_t>(plane.size())};
  for (std::size_t i = 0; i < plane.size(); ++i) {
    const float v = std::clamp(plane[i], 0.0f, 1.0f);
    img.pixels[i] = static_cast<std::uint8_t>(std::lround(v * 255.0f));
  }
  return img;
}

ScoreStream read_score_stream(const fs::path& path, std::string episode_id) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::data, "missing score file " + path.string());
  ScoreStream out;
  out.episode_id = std::move(episode_id);
  std::string line;
  if (!std::getline(in, line) || line.rfind("fps=", 0) != 0)
    throw Error(ErrorKind::data, path.string() + ": expected 'fps=<float>' header");
  try {
    out.fps = std::stod(line.substr(4));
  } catch (const std::exception&) {
    throw Error(ErrorKind::data, path.string() + ": bad fps value");
  }
  if (!(out.fps > 0.0)) throw Error(ErrorKind::data, path.string() + ": fps must be > 0");
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    float v;
    try {
      v = std::stof(line);
    } catch (const std::exception&) {
      throw Error(ErrorKind::data,
                  path.string() + ":" + std::to_string(lineno) + ": bad score");
    }
    if (!(v >= 0.0f && v <= 1.0f))
      throw Error(ErrorKind::data, path.string() + ":" + std::to_string(lineno) +
                                       ": score outside [0,1]");
    out.scores.push_back(v);
  }
  return out;
}

void write_score_stream(const fs::path& path, const ScoreStream& scores) {
  std::ostringstream ss;
  ss << "fps=" << scores.fps << '\n';
  ss.precision(9);
  for (float v : scores.scores) ss << v << '\n';
  write_all(path, ss.str());
}

FrameStream read_raw_planar(const fs::path& path, std::string episode_id,
                            double fps) {
  const std::string buf = read_all(path);
  const std::size_t nl = buf.find('\n');
  if (nl == std::string::npos)
    throw Error(ErrorKind::data, path.string() + ": missing raw planar header");
  std::istringstream header(buf.substr(0, nl));
  long w = 0, h = 0, n = 0;
  if (!(header >> w >> h >> n) || w <= 0 || h <= 0 || n < 0)
    throw Error(ErrorKind::data, path.string() + ": bad raw planar header");
  const std::size_t count = static_cast<std::size_t>(w) * h * n;
  if (buf.size() - nl - 1 != count)
    throw Error(ErrorKind::data, path.string() + ": expected " +
                                     std::to_string(count) + " pixel bytes");
  std::vector<float> pixels(count);
  const auto* bytes = reinterpret_cast<const unsigned char*>(buf.data() + nl + 1);
  for (std::size_t i = 0; i < count; ++i) pixels[i] = bytes[i] / 255.0f;
  return FrameStream(std::move(episode_id), fps, static_cast<int>(w),
                     static_cast<int>(h), std::move(pixels));
}

void write_raw_planar(const fs::path& path, const FrameStream& stream) {
  std::string out = std::to_string(stream.width()) + " " +
                    std::to_string(stream.height()) + " " +
                    std::to_string(stream.frame_count()) + "\n";
  const GrayImage img = to_gray_image(stream.pixels(), stream.width(),
                                      stream.height());
  out.append(reinterpret_cast<const char*>(img.pixels.data()), img.pixels.size());
  write_all(path, out);
}

GrayImage read_pnm(const fs::path& path) {
  const std::string buf = read_all(path);
  if (buf.size() < 2 || buf[0] != 'P' || (buf[1] != '5' && buf[1] != '6'))
    throw Error(ErrorKind::data, path.string() + ": not a binary PGM/PPM file");
  const bool rgb = buf[1] == '6';
  PnmCursor cur{buf, 2};
  const long w = cur.next_int(path), h = cur.next_int(path),
             maxval = cur.next_int(path);
  if (w <= 0 || h <= 0 || maxval != 255)
    throw Error(ErrorKind::data, path.string() + ": only 8-bit images supported");
  ++cur.pos;  // single whitespace after maxval
  const std::size_t px = static_cast<std::size_t>(w) * h;
  const std::size_t need = px * (rgb ? 3 : 1);
  if (buf.size() - cur.pos < need)
    throw Error(ErrorKind::data, path.string() + ": truncated pixel data");
  const auto* bytes = reinterpret_cast<const std::uint8_t*>(buf.data() + cur.pos);
  GrayImage img{static_cast<int>(w), static_cast<int>(h), {}};
  if (!rgb) {
    img.pixels.assign(bytes, bytes + px);
  } else {
    std::vector<float> luma(px);
    kernels::active().luma_from_rgb(bytes, luma.data(), px);
    img = to_gray_image(luma, img.width, img.height);
  }
  return img;
}

std::string encode_pgm(const GrayImage& image) {
  std::string out = "P5\n" + std::to_string(image.width) + " " +
                    std::to_string(image.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(image.pixels.data()),
             image.pixels.size());
  return out;
}

void write_pgm(const fs::path& path, const GrayImage& image) {
  write_all(path, encode_pgm(image));
}

FrameStream read_image_dir(const fs::path& dir, std::string episode_id,
                           double fps) {
  if (!fs::is_directory(dir))
    throw Error(ErrorKind::data, "missing frame directory " + dir.string());
  std::vector<std::pair<long long, fs::path>> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto ext = entry.path().extension().string();
    if (ext != ".pgm" && ext != ".ppm") continue;
    const std::string stem = entry.path().stem().string();
    std::string digits;
    for (char c : stem)
      if (std::isdigit(static_cast<unsigned char>(c))) digits.push_back(c);
    if (digits.empty())
      throw Error(ErrorKind::data, "frame file without index: " + entry.path().string());
    files.emplace_back(std::stoll(digits), entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw Error(ErrorKind::data, "no frames in " + dir.string());
  std::vector<float> pixels;
  int w = 0, h = 0;
  for (const auto& [index, path] : files) {
    const GrayImage img = read_pnm(path);
    if (w == 0) {
      w = img.width;
      h = img.height;
    } else if (img.width != w || img.height != h) {
      throw Error(ErrorKind::data, path.string() + ": frame size differs from first frame");
    }
    for (std::uint8_t b : img.pixels) pixels.push_back(b / 255.0f);
  }
  return FrameStream(std::move(episode_id), fps, w, h, std::move(pixels));
}

FrameStream read_frames(const fs::path& path, std::string episode_id,
                        double fps) {
  if (fs::is_directory(path)) return read_image_dir(path, std::move(episode_id), fps);
  if (!fs::exists(path))
    throw Error(ErrorKind::data, "missing frame input " + path.string());
  return read_raw_planar(path, std::move(episode_id), fps);
}

}  // namespace slc
