#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "edgesr/sample.hpp"
#include "oracles.hpp"

using namespace edgesr;

namespace {

TrainConfig toy_config(int hr_size, int scale) {
  TrainConfig cfg;
  cfg.hr_size = hr_size;
  cfg.scale = scale;
  return cfg;
}

// Blocky checkerboard with strong steps so Canny finds edges at both scales.
ImageTensor checker(int h, int w, int cell) {
  ImageTensor img(h, w, 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const float v = ((y / cell + x / cell) % 2 == 0) ? 0.9f : 0.1f;
      for (int c = 0; c < 3; ++c) img.at(y, x, c) = v;
    }
  return img;
}

}  // namespace

TEST_CASE("sample fields have consistent shapes at scale 4") {
  SamplePair s = make_sample(checker(512, 512, 64), toy_config(512, 4));
  CHECK(s.hr.height == 512);
  CHECK(s.hr.channels == 3);
  CHECK(s.lr.height == 128);
  CHECK(s.lr.width == 128);
  CHECK(s.hr_gray.channels == 1);
  CHECK(s.lr_gray.height == 128);
  CHECK(s.c_gt.height == 512);
  CHECK(s.c_lr.height == 128);
  CHECK(s.c_lr.width == 128);
  CHECK(s.lr_gray_up.height == 512);
  CHECK(s.lr_gray_up.channels == 1);
  CHECK(s.c_lr_up.height == 512);
  CHECK(s.hr.height == s.lr.height * 4);
  CHECK(edge_map_is_binary(s.c_gt));
  CHECK(edge_map_is_binary(s.c_lr));

  // The checkerboard has real structure, so edges exist at both resolutions.
  int gt_edges = 0, lr_edges = 0;
  for (float v : s.c_gt.data) gt_edges += v > 0.5f;
  for (float v : s.c_lr.data) lr_edges += v > 0.5f;
  CHECK(gt_edges > 0);
  CHECK(lr_edges > 0);
}

TEST_CASE("constant images produce empty edge maps") {
  ImageTensor flat(64, 64, 3);
  std::fill(flat.data.begin(), flat.data.end(), 0.5f);
  SamplePair s = make_sample(flat, toy_config(64, 2));
  for (float v : s.c_gt.data) CHECK(v == 0.0f);
  for (float v : s.c_lr.data) CHECK(v == 0.0f);
}

TEST_CASE("center crop takes the middle of a larger image") {
  // 96x96 image, dark except for a bright 64x64 center block: a 64 center
  // crop sees only the bright block.
  ImageTensor img(96, 96, 3);
  for (int y = 0; y < 96; ++y)
    for (int x = 0; x < 96; ++x) {
      const bool inside = y >= 16 && y < 80 && x >= 16 && x < 80;
      for (int c = 0; c < 3; ++c) img.at(y, x, c) = inside ? 1.0f : 0.0f;
    }
  SamplePair s = make_sample(img, toy_config(64, 2));
  for (float v : s.hr.data) CHECK(v == 1.0f);
}

TEST_CASE("random crops are deterministic under a fixed seed") {
  std::mt19937 rng_img(501);
  ImageTensor img = oracle::random_image(rng_img, 100, 100, 3);
  TrainConfig cfg = toy_config(64, 2);

  std::mt19937 rng_a(7), rng_b(7), rng_c(8);
  SamplePair a = make_sample(img, cfg, rng_a);
  SamplePair b = make_sample(img, cfg, rng_b);
  CHECK(a.hr.data == b.hr.data);
  CHECK(a.lr.data == b.lr.data);
  CHECK(a.c_gt.data == b.c_gt.data);
  CHECK(a.c_lr_up.data == b.c_lr_up.data);

  // A different seed picks a different window on a 100x100 source.
  SamplePair c = make_sample(img, cfg, rng_c);
  CHECK(a.hr.data != c.hr.data);

  // With random cropping disabled the rng overload degrades to center crop.
  cfg.random_crop = false;
  std::mt19937 rng_d(9);
  SamplePair d = make_sample(img, cfg, rng_d);
  SamplePair e = make_sample(img, cfg);
  CHECK(d.hr.data == e.hr.data);
}

TEST_CASE("images smaller than the crop are rejected") {
  std::mt19937 rng(503);
  ImageTensor img = oracle::random_image(rng, 60, 100, 3);
  CHECK_THROWS_AS(make_sample(img, toy_config(64, 2)), std::invalid_argument);
}
