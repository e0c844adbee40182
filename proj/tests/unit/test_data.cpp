#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <set>

#include "gait/data.hpp"
#include "gait/error.hpp"
#include "test_support.hpp"

using namespace gait;

namespace {

void be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

// Three 2x2 images and their labels, written byte by byte.
struct Fixture {
  std::vector<std::uint8_t> images;
  std::vector<std::uint8_t> labels;
};

Fixture fixture() {
  Fixture f;
  be32(f.images, 0x803);
  be32(f.images, 3);
  be32(f.images, 2);
  be32(f.images, 2);
  for (std::uint8_t px : {0, 255, 51, 102, 255, 255, 0, 0, 1, 2, 3, 4}) f.images.push_back(px);
  be32(f.labels, 0x801);
  be32(f.labels, 3);
  for (std::uint8_t l : {7, 0, 9}) f.labels.push_back(l);
  return f;
}

IdxErrorKind kind_of(const Fixture& f, std::size_t classes = 10) {
  try {
    parse_idx(f.images, f.labels, classes);
  } catch (const IdxError& e) {
    return e.idx_kind();
  }
  ADD_FAILURE() << "no IdxError";
  return IdxErrorKind::Io;
}

}  // namespace

TEST(Idx, ParsesHandBuiltFixture) {
  const Fixture f = fixture();
  const Dataset ds = parse_idx(f.images, f.labels);
  EXPECT_EQ(ds.size(), 3u);
  EXPECT_EQ(ds.features, 4u);
  EXPECT_EQ(ds.image_rows, 2u);
  EXPECT_EQ(ds.labels, (std::vector<std::size_t>{7, 0, 9}));
  EXPECT_EQ(ds.input(0)[1], 1.0);
  EXPECT_DOUBLE_EQ(ds.input(0)[2], 0.2);
  EXPECT_DOUBLE_EQ(ds.input(2)[3], 4.0 / 255.0);
}

TEST(Idx, EncodeReproducesBytes) {
  const Fixture f = fixture();
  const IdxBytes b = encode_idx(parse_idx(f.images, f.labels));
  EXPECT_EQ(b.images, f.images);
  EXPECT_EQ(b.labels, f.labels);
}

TEST(Idx, ErrorKinds) {
  Fixture f = fixture();
  f.images[3] = 0x01;
  EXPECT_EQ(kind_of(f), IdxErrorKind::BadMagic);
  f = fixture();
  f.labels[3] = 0x03;
  EXPECT_EQ(kind_of(f), IdxErrorKind::BadMagic);
  f = fixture();
  f.images.pop_back();
  EXPECT_EQ(kind_of(f), IdxErrorKind::Truncated);
  f = fixture();
  f.images.push_back(0);
  EXPECT_EQ(kind_of(f), IdxErrorKind::Truncated);
  f = fixture();
  f.images.resize(10);
  EXPECT_EQ(kind_of(f), IdxErrorKind::Truncated);
  f = fixture();
  f.labels[7] = 2;
  f.labels.pop_back();
  EXPECT_EQ(kind_of(f), IdxErrorKind::CountMismatch);
  EXPECT_EQ(kind_of(fixture(), 8), IdxErrorKind::CountMismatch);
}

TEST(Idx, ErrorKindNames) {
  Fixture f = fixture();
  f.images[3] = 0;
  try {
    parse_idx(f.images, f.labels);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), "IdxBadMagic");
  }
  EXPECT_THROW(load_idx("/nonexistent/a", "/nonexistent/b"), IdxError);
}

TEST(Idx, FileRoundTripOfQuantizedTeacherIsExact) {
  const Dataset ds = synthetic_teacher(16, 2, 4, 50, Rng(3), {true});
  const auto dir = std::filesystem::temp_directory_path() / "gait_idx_test";
  std::filesystem::create_directories(dir);
  write_idx(ds, dir / "img", dir / "lbl");
  const Dataset back = load_idx(dir / "img", dir / "lbl", 4);
  EXPECT_EQ(back.values, ds.values);
  EXPECT_EQ(back.labels, ds.labels);
  EXPECT_EQ(back.image_rows, 4u);
  std::filesystem::remove_all(dir);
}

TEST(Idx, EncodeRejectsOutOfRangePixels) {
  Dataset ds;
  ds.features = 2;
  ds.classes = 2;
  ds.values = {0.5, 1.5};
  ds.labels = {1};
  EXPECT_THROW(encode_idx(ds), InvalidArgument);
  EXPECT_THROW(encode_idx(ds, 3), InvalidArgument);
}

TEST(Teacher, DeterministicAndLabelsMatchArgmax) {
  const Dataset a = synthetic_teacher(8, 2, 3, 200, Rng(5));
  const Dataset b = synthetic_teacher(8, 2, 3, 200, Rng(5));
  EXPECT_EQ(a.values, b.values);
  EXPECT_EQ(a.labels, b.labels);
  a.validate();
  for (double v : a.values) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
  const Network teacher = make_network(Architecture::fixed_width(8, 2, 3), InitScheme::Orthogonal, Rng(5).split(0));
  for (std::size_t i = 0; i < 20; ++i) {
    const Vector x(a.input(i).begin(), a.input(i).end());
    const Vector y = gait::testing::naive_forward(teacher, x).back();
    const auto best = static_cast<std::size_t>(std::max_element(y.begin(), y.begin() + 3) - y.begin());
    EXPECT_EQ(a.labels[i], best);
  }
  std::set<std::size_t> seen(a.labels.begin(), a.labels.end());
  EXPECT_GE(seen.size(), 2u);
  EXPECT_THROW(synthetic_teacher(4, 1, 5, 10, Rng(0)), InvalidArgument);
}

TEST(Batches, PartitionEverySampleOnce) {
  Rng rng(6);
  const auto idx = batch_indices(10, 4, true, rng);
  ASSERT_EQ(idx.size(), 3u);
  EXPECT_EQ(idx[2].size(), 2u);
  std::vector<std::size_t> all;
  for (const auto& b : idx) all.insert(all.end(), b.begin(), b.end());
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(all[i], i);
  Rng r2(0);
  EXPECT_EQ(batch_indices(5, 2, false, r2)[1], (std::vector<std::size_t>{2, 3}));
  EXPECT_THROW(batch_indices(5, 0, false, r2), InvalidArgument);
}

TEST(Batches, ColumnsAndOneHotTargets) {
  const Fixture f = fixture();
  const Dataset ds = parse_idx(f.images, f.labels);
  const std::vector<std::size_t> pick{2, 0};
  const Batch b = make_batch(ds, pick);
  EXPECT_EQ(b.inputs.rows(), 4u);
  EXPECT_EQ(b.inputs.cols(), 2u);
  EXPECT_EQ(b.inputs.col(1), Vector(ds.input(0).begin(), ds.input(0).end()));
  EXPECT_EQ(b.targets(9, 0), 1.0);
  EXPECT_EQ(b.targets(7, 1), 1.0);
  EXPECT_EQ(b.labels, (std::vector<std::size_t>{9, 7}));
  EXPECT_EQ(one_hot(2, 4), (Vector{0, 0, 1, 0}));
  EXPECT_THROW(one_hot(4, 4), InvalidArgument);
  EXPECT_EQ(ds.head(2).size(), 2u);
}
