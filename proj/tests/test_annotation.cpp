#include "doctest.h"
#include "scoopsim/annotation.hpp"

using namespace scoopsim;
using namespace scoopsim::annotation;

namespace {

TorqueTrace make_trace(double dt, int n, double gate_time, double spike_time,
                       double spike_tau) {
  // theta1 steps through the putting gate at gate_time; tau2 spikes on
  // [spike_time, spike_time + 0.2).
  TorqueTrace tr;
  for (int i = 0; i < n; ++i) {
    const double t = i * dt;
    TraceSample s;
    s.t = t;
    s.theta1 = t >= gate_time ? 1.0 : 0.0;
    s.tau2 = (t >= spike_time && t < spike_time + 0.2) ? spike_tau : 0.0;
    tr.push_back(s);
  }
  return tr;
}

Mask mask_with(int w, int h, int count) {
  Mask m;
  m.width = w;
  m.height = h;
  m.on.assign(static_cast<std::size_t>(w) * h, 0);
  for (int i = 0; i < count; ++i) m.on[i] = 1;
  return m;
}

}  // namespace

TEST_SUITE("annotation") {

TEST_CASE("completion time picks the gated crossing") {
  const TorqueTrace tr = make_trace(0.002, 5000, 3.0, 4.0, 2.0);
  const auto t = detect_completion_time(tr, 1.2, 0.5);
  REQUIRE(t.has_value());
  CHECK(*t == doctest::Approx(4.0).epsilon(1e-6));
}

TEST_CASE("crossing at the exact threshold counts") {
  TorqueTrace tr;
  tr.push_back({4.0, 1.2, 1.0});
  const auto t = detect_completion_time(tr, 1.2, 0.5);
  REQUIRE(t.has_value());
  CHECK(*t == 4.0);
}

TEST_CASE("below-threshold trace yields none") {
  const TorqueTrace tr = make_trace(0.002, 5000, 3.0, 4.0, 1.1);
  CHECK(!detect_completion_time(tr, 1.2, 0.5).has_value());
}

TEST_CASE("sliding-phase spike is gated out") {
  // Spike at 2.0 s before the gate opens (gate at 6.0 s), second at 7.5 s.
  TorqueTrace tr;
  for (int i = 0; i < 5000; ++i) {
    const double t = i * 0.002;
    TraceSample s;
    s.t = t;
    s.theta1 = t >= 6.0 ? 1.0 : 0.0;
    s.tau2 = ((t >= 2.0 && t < 2.1) || (t >= 7.5 && t < 7.6)) ? 3.0 : 0.0;
    tr.push_back(s);
  }
  const auto t = detect_completion_time(tr, 1.2, 0.5);
  REQUIRE(t.has_value());
  CHECK(*t == doctest::Approx(7.5).epsilon(1e-6));
}

TEST_CASE("empty trace yields none") {
  CHECK(!detect_completion_time({}, 1.2, 0.5).has_value());
}

TEST_CASE("detection is equivariant under time shift") {
  const TorqueTrace tr = make_trace(0.002, 5000, 3.0, 4.0, 2.0);
  TorqueTrace shifted = tr;
  for (auto& s : shifted) s.t += 1.75;
  const auto a = detect_completion_time(tr, 1.2, 0.5);
  const auto b = detect_completion_time(shifted, 1.2, 0.5);
  REQUIRE(a.has_value());
  REQUIRE(b.has_value());
  CHECK(*b == doctest::Approx(*a + 1.75).epsilon(1e-12));
}

TEST_CASE("hsv window bounds") {
  // (150,125,30): h = 23.75 half-degrees, s = 204, v = 150 -> inside.
  img::Image im = img::Image::filled(4, 1, 150, 125, 30);
  // (200,167,40): same hue region but v = 200 -> outside on v.
  im.set(1, 0, 200, 167, 40);
  // Pure black: s undefined-zero -> outside.
  im.set(2, 0, 0, 0, 0);
  // Gray: zero saturation -> outside.
  im.set(3, 0, 128, 128, 128);
  const Mask m = hsv_binarize(im);
  CHECK(m.on[0] == 1);
  CHECK(m.on[1] == 0);
  CHECK(m.on[2] == 0);
  CHECK(m.on[3] == 0);
}

TEST_CASE("hsv conversion reference values") {
  const img::Hsv a = img::rgb_to_hsv(150, 125, 30);
  CHECK(a.h == doctest::Approx(23.75).epsilon(1e-12));
  CHECK(a.s == doctest::Approx(204.0).epsilon(1e-12));
  CHECK(a.v == 150.0);
  const img::Hsv black = img::rgb_to_hsv(0, 0, 0);
  CHECK(black.s == 0.0);
  CHECK(black.v == 0.0);
}

TEST_CASE("binarization is a pure per-pixel function") {
  img::Image im = img::Image::filled(8, 8, 40, 40, 40);
  const Mask before = hsv_binarize(im);
  im.set(3, 5, 150, 125, 30);
  const Mask after = hsv_binarize(im);
  int diffs = 0;
  for (std::size_t i = 0; i < before.on.size(); ++i) {
    diffs += before.on[i] != after.on[i] ? 1 : 0;
  }
  CHECK(diffs == 1);
  CHECK(after.on[5 * 8 + 3] == 1);
}

TEST_CASE("500 pixels succeed, 499 fail") {
  CHECK(judge_success(mask_with(30, 30, 500)));
  CHECK(!judge_success(mask_with(30, 30, 499)));
  CHECK(!judge_success(mask_with(30, 30, 0)));
}

TEST_CASE("adding pixels never flips success off") {
  Mask m = mask_with(40, 40, 480);
  bool was = judge_success(m);
  for (int i = 480; i < 600; ++i) {
    m.on[i] = 1;
    const bool now = judge_success(m);
    CHECK(now >= was);
    was = now;
  }
}

TEST_CASE("centroid of simple masks") {
  Mask m;
  m.width = 32;
  m.height = 32;
  m.on.assign(32 * 32, 0);
  CHECK(!centroid_px(m).has_value());

  m.on[20 * 32 + 10] = 1;  // (x=10, y=20)
  auto c = centroid_px(m);
  REQUIRE(c.has_value());
  CHECK(c->first == 10.0);
  CHECK(c->second == 20.0);

  m.on[20 * 32 + 10] = 0;
  m.on[0] = 1;        // (0,0)
  m.on[10] = 1;       // (10,0)
  c = centroid_px(m);
  REQUIRE(c.has_value());
  CHECK(c->first == 5.0);
  CHECK(c->second == 0.0);
}

TEST_CASE("centroid of a symmetric disc is its center") {
  Mask m;
  m.width = 64;
  m.height = 64;
  m.on.assign(64 * 64, 0);
  const double cx = 31.0, cy = 22.0, r = 9.3;
  for (int y = 0; y < 64; ++y) {
    for (int x = 0; x < 64; ++x) {
      const double dx = x - cx, dy = y - cy;
      if (dx * dx + dy * dy <= r * r) m.on[y * 64 + x] = 1;
    }
  }
  const auto c = centroid_px(m);
  REQUIRE(c.has_value());
  CHECK(c->first == doctest::Approx(cx).epsilon(1e-12));
  CHECK(c->second == doctest::Approx(cy).epsilon(1e-12));
}

}  // TEST_SUITE
