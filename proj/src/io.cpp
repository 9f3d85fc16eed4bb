#include "flowfill/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "flowfill/errors.hpp"

namespace fs = std::filesystem;

namespace flowfill {

namespace {
constexpr float kFloMagic = 202021.25f;
}

FlowField read_flo(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open flow file: " + path);
  float magic = 0.f;
  int32_t w = 0, h = 0;
  in.read(reinterpret_cast<char*>(&magic), 4);
  in.read(reinterpret_cast<char*>(&w), 4);
  in.read(reinterpret_cast<char*>(&h), 4);
  if (!in || magic != kFloMagic) throw DataError("invalid .flo magic in " + path);
  if (w <= 0 || h <= 0 || w > 1 << 16 || h > 1 << 16)
    throw DataError("implausible .flo dimensions in " + path);
  FlowField f(w, h);
  in.read(reinterpret_cast<char*>(f.data.data()), static_cast<std::streamsize>(f.data.size() * 4));
  if (!in) throw DataError("truncated .flo file: " + path);
  return f;
}

void write_flo(const std::string& path, const FlowField& flow) {
  for (float v : flow.data)
    if (!std::isfinite(v)) throw DataError("refusing to write non-finite flow to " + path);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write flow file: " + path);
  float magic = kFloMagic;
  int32_t w = flow.width, h = flow.height;
  out.write(reinterpret_cast<const char*>(&magic), 4);
  out.write(reinterpret_cast<const char*>(&w), 4);
  out.write(reinterpret_cast<const char*>(&h), 4);
  out.write(reinterpret_cast<const char*>(flow.data.data()),
            static_cast<std::streamsize>(flow.data.size() * 4));
  if (!out) throw DataError("failed writing flow file: " + path);
}

std::string flow_pair_path(const std::string& directory, int source, int target) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%05d_%05d.flo", source, target);
  return (fs::path(directory) / buf).string();
}

std::string frame_name(int index, int pad) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%0*d.png", pad, index);
  return buf;
}

Frame read_frame_png(const std::string& path) {
  cv::Mat img = cv::imread(path, cv::IMREAD_COLOR);
  if (img.empty()) throw DataError("cannot read image: " + path);
  Frame f(img.cols, img.rows);
  for (int y = 0; y < img.rows; ++y)
    for (int x = 0; x < img.cols; ++x) {
      cv::Vec3b bgr = img.at<cv::Vec3b>(y, x);
      f.at(x, y, 0) = bgr[2] / 255.f;
      f.at(x, y, 1) = bgr[1] / 255.f;
      f.at(x, y, 2) = bgr[0] / 255.f;
    }
  return f;
}

void write_frame_png(const std::string& path, const Frame& frame) {
  cv::Mat img(frame.height, frame.width, CV_8UC3);
  for (int y = 0; y < frame.height; ++y)
    for (int x = 0; x < frame.width; ++x) {
      auto q = [&](int c) {
        return static_cast<uint8_t>(std::clamp(std::lround(frame.at(x, y, c) * 255.f), 0l, 255l));
      };
      img.at<cv::Vec3b>(y, x) = cv::Vec3b(q(2), q(1), q(0));
    }
  if (!cv::imwrite(path, img)) throw DataError("cannot write image: " + path);
}

MaskFrame read_mask_png(const std::string& path) {
  cv::Mat img = cv::imread(path, cv::IMREAD_GRAYSCALE);
  if (img.empty()) throw DataError("cannot read mask: " + path);
  MaskFrame m(img.cols, img.rows);
  for (int y = 0; y < img.rows; ++y)
    for (int x = 0; x < img.cols; ++x) m.at(x, y) = img.at<uint8_t>(y, x) != 0;
  return m;
}

void write_mask_png(const std::string& path, const MaskFrame& mask) {
  cv::Mat img(mask.height, mask.width, CV_8UC1);
  for (int y = 0; y < mask.height; ++y)
    for (int x = 0; x < mask.width; ++x) img.at<uint8_t>(y, x) = mask.at(x, y) ? 255 : 0;
  if (!cv::imwrite(path, img)) throw DataError("cannot write mask: " + path);
}

EdgeMap read_edge_png(const std::string& path, double binarize_threshold) {
  cv::Mat img = cv::imread(path, cv::IMREAD_GRAYSCALE);
  if (img.empty()) throw DataError("cannot read edge map: " + path);
  EdgeMap e(img.cols, img.rows);
  const int thresh = static_cast<int>(std::lround(binarize_threshold * 255.0));
  for (int y = 0; y < img.rows; ++y)
    for (int x = 0; x < img.cols; ++x) e.at(x, y) = img.at<uint8_t>(y, x) >= thresh;
  return e;
}

void write_edge_png(const std::string& path, const EdgeMap& edges) {
  cv::Mat img(edges.height, edges.width, CV_8UC1);
  for (int y = 0; y < edges.height; ++y)
    for (int x = 0; x < edges.width; ++x) img.at<uint8_t>(y, x) = edges.at(x, y) ? 255 : 0;
  if (!cv::imwrite(path, img)) throw DataError("cannot write edge map: " + path);
}

void write_gray_png(const std::string& path, const ScalarImage& img) {
  cv::Mat m(img.height, img.width, CV_8UC1);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      m.at<uint8_t>(y, x) = static_cast<uint8_t>(std::clamp(std::lround(img.at(x, y) * 255.f), 0l, 255l));
  if (!cv::imwrite(path, m)) throw DataError("cannot write image: " + path);
}

namespace {

std::vector<int> list_indices(const std::string& dir, int pad) {
  if (!fs::is_directory(dir)) throw DataError("not a directory: " + dir);
  std::vector<int> indices;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string name = entry.path().filename().string();
    if (name.size() != static_cast<size_t>(pad) + 4 || name.substr(pad) != ".png") continue;
    bool digits = std::all_of(name.begin(), name.begin() + pad, [](char c) { return std::isdigit(c); });
    if (!digits) continue;
    indices.push_back(std::stoi(name.substr(0, pad)));
  }
  std::sort(indices.begin(), indices.end());
  if (indices.empty()) throw DataError("no zero-padded .png frames found in " + dir);
  for (size_t k = 1; k < indices.size(); ++k)
    if (indices[k] != indices[0] + static_cast<int>(k))
      throw DataError("non-contiguous frame indices in " + dir + " near index " +
                      std::to_string(indices[k]));
  return indices;
}

}  // namespace

std::vector<Frame> read_frames_dir(const std::string& dir, int pad) {
  std::vector<Frame> frames;
  for (int idx : list_indices(dir, pad))
    frames.push_back(read_frame_png((fs::path(dir) / frame_name(idx, pad)).string()));
  return frames;
}

std::pair<std::vector<Frame>, std::vector<MaskFrame>> read_sequence(const SequenceSpec& spec) {
  std::vector<int> frame_idx = list_indices(spec.frames_dir, spec.pad);
  std::vector<int> mask_idx = list_indices(spec.masks_dir, spec.pad);
  if (frame_idx != mask_idx)
    throw DataError("frame and mask indices differ between " + spec.frames_dir + " and " +
                    spec.masks_dir);
  std::vector<Frame> frames;
  std::vector<MaskFrame> masks;
  for (int idx : frame_idx) {
    std::string fpath = (fs::path(spec.frames_dir) / frame_name(idx, spec.pad)).string();
    std::string mpath = (fs::path(spec.masks_dir) / frame_name(idx, spec.pad)).string();
    frames.push_back(read_frame_png(fpath));
    masks.push_back(read_mask_png(mpath));
    if (masks.back().width != frames.back().width || masks.back().height != frames.back().height)
      throw DataError("mask dimensions do not match frame for " + mpath);
    if (frames.size() > 1 && (frames.back().width != frames.front().width ||
                              frames.back().height != frames.front().height))
      throw DataError("frame dimensions are not constant across the sequence at " + fpath);
  }
  return {std::move(frames), std::move(masks)};
}

void write_frames_dir(const std::string& dir, const std::vector<Frame>& frames, int pad) {
  fs::create_directories(dir);
  for (size_t i = 0; i < frames.size(); ++i)
    write_frame_png((fs::path(dir) / frame_name(static_cast<int>(i), pad)).string(), frames[i]);
}

void write_masks_dir(const std::string& dir, const std::vector<MaskFrame>& masks, int pad) {
  fs::create_directories(dir);
  for (size_t i = 0; i < masks.size(); ++i)
    write_mask_png((fs::path(dir) / frame_name(static_cast<int>(i), pad)).string(), masks[i]);
}

}  // namespace flowfill
