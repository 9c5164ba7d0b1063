#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "slc/signal.hpp"

namespace slc {

// 8-bit single channel image, row-major.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;
};

// Quantises a [0,1] intensity plane to bytes (round to nearest, clamped).
GrayImage to_gray_image(std::span<const float> plane, int width, int height);

// Score stream text file: `fps=<float>` then one score per line.
ScoreStream read_score_stream(const std::filesystem::path& path,
                              std::string episode_id);
void write_score_stream(const std::filesystem::path& path,
                        const ScoreStream& scores);

// Raw planar frames: ASCII header "W H N\n" followed by W*H*N bytes,
// frame-major, each frame row-major; intensity = byte / 255.
FrameStream read_raw_planar(const std::filesystem::path& path,
                            std::string episode_id, double fps);
void write_raw_planar(const std::filesystem::path& path,
                      const FrameStream& stream);

// Binary PGM (P5) / PPM (P6), 8-bit. RGB input is converted to BT.601 luma.
GrayImage read_pnm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const GrayImage& image);
std::string encode_pgm(const GrayImage& image);

// Directory of numbered .pgm/.ppm files, ordered by the number in the name.
FrameStream read_image_dir(const std::filesystem::path& dir,
                           std::string episode_id, double fps);

// Reads frames from either a raw planar file or an image directory.
FrameStream read_frames(const std::filesystem::path& path,
                        std::string episode_id, double fps);

}  // namespace slc
