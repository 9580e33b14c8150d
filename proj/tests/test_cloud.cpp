#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "stereorig/cloud.hpp"
#include "stereorig/random.hpp"

using namespace stereorig;
using namespace stereorig::cloud;

namespace {

PointCloud random_cloud(std::size_t n, std::uint64_t seed, std::size_t heading) {
  Xorshift64Star rng(seed);
  PointCloud c;
  for (std::size_t i = 0; i < n; ++i)
    c.push_back({rng.uniform() * 4000 - 2000, rng.uniform() * 3000 - 1500,
                 rng.uniform() * 4000 - 2000, rng.uniform(), heading});
  return c;
}

auto sorted_points(const PointCloud &c) {
  auto v = c.points();
  std::sort(v.begin(), v.end(), [](const CloudPoint &a, const CloudPoint &b) {
    return std::tie(a.x_mm, a.y_mm, a.z_mm, a.intensity, a.heading_index) <
           std::tie(b.x_mm, b.y_mm, b.z_mm, b.intensity, b.heading_index);
  });
  return v;
}

} // namespace

TEST(Merge, Basics) {
  const auto a = random_cloud(100, 1, 0);
  const auto b = random_cloud(150, 2, 1);
  EXPECT_EQ(merge(std::vector<PointCloud>{a}), a);
  EXPECT_TRUE(merge(std::vector<PointCloud>{}).empty());
  EXPECT_TRUE(merge(std::vector<PointCloud>{PointCloud{}, PointCloud{}}).empty());

  const auto m = merge(std::vector<PointCloud>{a, b});
  ASSERT_EQ(m.size(), 250u);
  for (std::size_t i = 0; i < 100; ++i)
    EXPECT_EQ(m.points()[i], a.points()[i]);
  for (std::size_t i = 0; i < 150; ++i)
    EXPECT_EQ(m.points()[100 + i], b.points()[i]);
}

TEST(Merge, AnyGroupingGivesTheSameSet) {
  const auto a = random_cloud(40, 3, 0);
  const auto b = random_cloud(30, 4, 1);
  const auto c = random_cloud(20, 5, 2);
  const auto left = merge(std::vector<PointCloud>{merge(std::vector<PointCloud>{a, b}), c});
  const auto right = merge(std::vector<PointCloud>{a, merge(std::vector<PointCloud>{b, c})});
  const auto swapped = merge(std::vector<PointCloud>{c, a, b});
  EXPECT_EQ(left, right);
  EXPECT_EQ(sorted_points(left), sorted_points(swapped));
}

TEST(Merge, VoxelThinning) {
  PointCloud a;
  a.push_back({1, 1, 1, 0.1, 0});
  a.push_back({9, 9, 9, 0.2, 0});   // same 10 mm voxel, dropped
  a.push_back({11, 1, 1, 0.3, 0});  // neighbour voxel
  a.push_back({-1, 1, 1, 0.4, 0});  // negative side of zero
  const auto m = merge(std::vector<PointCloud>{a}, 10.0);
  ASSERT_EQ(m.size(), 3u);
  EXPECT_DOUBLE_EQ(m.points()[0].intensity, 0.1);
  EXPECT_DOUBLE_EQ(m.points()[1].intensity, 0.3);
  EXPECT_DOUBLE_EQ(m.points()[2].intensity, 0.4);
  EXPECT_THROW(merge(std::vector<PointCloud>{a}, -1.0), DomainError);
}

TEST(Merge, BoundsTrackPoints) {
  const auto c = random_cloud(50, 9, 0);
  EXPECT_TRUE(PointCloud{}.bounds().empty());
  for (const auto &p : c.points()) {
    EXPECT_LE(c.bounds().min[0], p.x_mm);
    EXPECT_GE(c.bounds().max[2], p.z_mm);
  }
}

TEST(Accuracy, Examples) {
  const auto scene = scene::load_scene("p 0 0 2000 0.8\np 500 -100 1500 0.5\n"
                                       "p -300 200 2500 0.3\n");
  PointCloud exact, shifted;
  for (const auto &p : scene.points) {
    exact.push_back({p.x_mm, p.y_mm, p.z_mm, p.intensity, 0});
    shifted.push_back({p.x_mm + 6, p.y_mm - 8, p.z_mm, p.intensity, 0});
  }
  auto r = accuracy_report(exact, scene, 50.0);
  EXPECT_DOUBLE_EQ(r.recall, 1.0);
  EXPECT_DOUBLE_EQ(*r.rmse_mm, 0.0);

  r = accuracy_report(shifted, scene, 50.0);
  EXPECT_DOUBLE_EQ(r.recall, 1.0);
  EXPECT_NEAR(*r.rmse_mm, 10.0, 1e-12);
  EXPECT_NEAR(*r.median_error_mm, 10.0, 1e-12);

  r = accuracy_report(shifted, scene, 5.0);
  EXPECT_DOUBLE_EQ(r.recall, 0.0);
  EXPECT_FALSE(r.rmse_mm);

  r = accuracy_report(PointCloud{}, scene, 50.0);
  EXPECT_DOUBLE_EQ(r.recall, 0.0);
  EXPECT_FALSE(r.rmse_mm);
  EXPECT_FALSE(r.median_error_mm);
  EXPECT_NE(format_report(r).find("rmse_mm none"), std::string::npos);

  EXPECT_THROW(accuracy_report(exact, scene, 0.0), DomainError);
}

TEST(Accuracy, VisibilityMask) {
  const auto scene = scene::load_scene("p 0 0 2000 0.8\np 500 -100 1500 0.5\n");
  PointCloud c;
  c.push_back({0, 0, 2003, 0.8, 0});
  const std::vector<std::uint8_t> only_first{1, 0};
  auto r = accuracy_report(c, scene, 50.0, only_first);
  EXPECT_EQ(r.visible, 1u);
  EXPECT_DOUBLE_EQ(r.recall, 1.0);
  EXPECT_NEAR(*r.rmse_mm, 3.0, 1e-12);
  r = accuracy_report(c, scene, 50.0);
  EXPECT_DOUBLE_EQ(r.recall, 0.5);
  const std::vector<std::uint8_t> wrong{1};
  EXPECT_THROW(accuracy_report(c, scene, 50.0, wrong), DomainError);
}

TEST(Ply, Examples) {
  EXPECT_EQ(export_ply(PointCloud{}),
            "ply\nformat ascii 1.0\nelement vertex 0\nproperty float x\n"
            "property float y\nproperty float z\nproperty float intensity\n"
            "end_header\n");
  PointCloud one;
  one.push_back({0, 0, 2000, 0.8, 3});
  const auto text = export_ply(one);
  EXPECT_TRUE(text.ends_with("end_header\n0 0 2 0.8\n"));

  PointCloud neg;
  neg.push_back({-0.0, -1e-12, 1234.5678, 0.25, 0});
  EXPECT_TRUE(export_ply(neg).ends_with("\n0 -1e-15 1.23457 0.25\n"));
}

TEST(Ply, RoundTripIsByteExact) {
  const auto c = random_cloud(500, 11, 4);
  const auto text = export_ply(c);
  const auto back = import_ply(text);
  ASSERT_EQ(back.size(), c.size());
  EXPECT_EQ(export_ply(back), text);
  for (std::size_t i = 0; i < c.size(); ++i) {
    EXPECT_EQ(back.points()[i].heading_index, 0u);
    EXPECT_NEAR(back.points()[i].x_mm, c.points()[i].x_mm,
                1e-5 * std::abs(c.points()[i].x_mm) + 1e-9);
  }
}

TEST(Ply, DistinctCloudsExportDistinctly) {
  // Clouds that differ at 6 significant digits never share an export.
  PointCloud a, b;
  a.push_back({1234.56, 0, 2000, 0.5, 0});
  b.push_back({1234.57, 0, 2000, 0.5, 0});
  EXPECT_NE(export_ply(a), export_ply(b));
  Xorshift64Star rng(5);
  for (int i = 0; i < 2000; ++i) {
    const double x = (rng.uniform() - 0.5) * 1e4;
    const double y = x * (1.0 + 2e-5) + (x == 0 ? 1e-3 : 0.0);
    PointCloud p, q;
    p.push_back({x, 1, 1, 0.5, 0});
    q.push_back({y, 1, 1, 0.5, 0});
    EXPECT_NE(export_ply(p), export_ply(q)) << x;
  }
}

TEST(Ply, MalformedInput) {
  EXPECT_THROW(import_ply("plx\n"), ParseError);
  const auto good = export_ply(random_cloud(3, 1, 0));
  EXPECT_THROW(import_ply(good.substr(0, good.size() - 10)), ParseError);
  try {
    import_ply("ply\nformat binary_little_endian 1.0\n");
    FAIL();
  } catch (const ParseError &e) {
    EXPECT_EQ(e.line(), 2u);
  }
}
