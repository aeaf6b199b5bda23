/**
 * Copyright 2026 The thzfl Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <numeric>
#include <string>
#include <vector>

#include "doctest.h"
#include "thzfl/data_io.hpp"
#include "thzfl/fl_core.hpp"

using namespace thzfl;
using namespace thzfl::data;

namespace {

void PutBe32(std::vector<unsigned char> &out, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<unsigned char>(v >> s));
}

// Hand-rolled IDX writer, independent of the library's.
void WriteRaw(const std::string &path, std::uint32_t magic, std::vector<std::uint32_t> dims,
              const std::vector<unsigned char> &payload) {
  std::vector<unsigned char> bytes;
  PutBe32(bytes, magic);
  for (auto d : dims) PutBe32(bytes, d);
  bytes.insert(bytes.end(), payload.begin(), payload.end());
  std::ofstream(path, std::ios::binary).write(reinterpret_cast<const char *>(bytes.data()),
                                              static_cast<std::streamsize>(bytes.size()));
}

std::vector<char> Slurp(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

ErrorCode CodeOf(const std::string &img, const std::string &lab) {
  try {
    (void)LoadIdx(img, lab);
  } catch (const Error &e) {
    return e.code();
  }
  return static_cast<ErrorCode>(0);
}

double TrainAndScore(const Dataset &ds, std::uint64_t seed) {
  fl::ModelSpec spec{fl::Architecture::kLogistic, ds.input_dim, 1, ds.n_classes};
  fl::ClassifierObjective obj(spec, ds);
  Rng rng(seed);
  auto w = fl::InitWeights(spec, rng);
  auto d = fl::LocalSgd(obj, w, {600, 0.5, 20}, rng);
  for (std::size_t j = 0; j < w.size(); ++j) w[j] += d[j];
  return fl::Evaluate(spec, w, ds).accuracy;
}

}  // namespace

TEST_SUITE("data_io") {

TEST_CASE("idx reading against a hand-written fixture") {
  const std::string img = "data_io_fixture_images.idx", lab = "data_io_fixture_labels.idx";
  std::vector<unsigned char> pixels{0, 255, 128, 7, 200, 1, 2, 3};  // two 2x2 images
  WriteRaw(img, kIdxImageMagic, {2, 2, 2}, pixels);
  WriteRaw(lab, kIdxLabelMagic, {2}, {3, 9});
  auto ds = LoadIdx(img, lab);
  REQUIRE(ds.size() == 2);
  CHECK(ds.input_dim == 4);
  CHECK(ds.labels == std::vector<std::uint32_t>{3, 9});
  for (std::size_t i = 0; i < pixels.size(); ++i) CHECK(ds.features[i] == pixels[i] / 255.0);

  SUBCASE("write/read round trip is byte exact") {
    const std::string img2 = "data_io_rt_images.idx", lab2 = "data_io_rt_labels.idx";
    WriteIdx(ds, 2, 2, img2, lab2);
    CHECK(Slurp(img2) == Slurp(img));
    CHECK(Slurp(lab2) == Slurp(lab));
    auto back = LoadIdx(img2, lab2);
    CHECK(back.features == ds.features);
    CHECK(back.labels == ds.labels);
    std::remove(img2.c_str());
    std::remove(lab2.c_str());
  }
  SUBCASE("distinct error codes") {
    const std::string bad = "data_io_bad.idx";
    WriteRaw(bad, kIdxImageMagic, {2}, {3, 9});  // label file carrying the image magic
    CHECK(CodeOf(img, bad) == ErrorCode::kBadMagic);
    WriteRaw(bad, kIdxLabelMagic, {3}, {3, 9, 1});
    CHECK(CodeOf(img, bad) == ErrorCode::kCountMismatch);
    WriteRaw(bad, kIdxLabelMagic, {2}, {3});
    CHECK(CodeOf(img, bad) == ErrorCode::kTruncatedFile);
    WriteRaw(bad, kIdxImageMagic, {2, 2, 2}, {1, 2, 3});
    CHECK(CodeOf(bad, lab) == ErrorCode::kTruncatedFile);
    WriteRaw(bad, kIdxImageMagic, {}, {});
    CHECK(CodeOf(bad, lab) == ErrorCode::kTruncatedFile);
    CHECK(CodeOf("no/such/file", lab) == ErrorCode::kIo);
    std::remove(bad.c_str());
  }
  std::remove(img.c_str());
  std::remove(lab.c_str());
}

TEST_CASE("full MNIST when available") {
  const char *dir = std::getenv("THZFL_MNIST_DIR");
  if (!dir) {
    MESSAGE("THZFL_MNIST_DIR not set; skipping the 60000-sample load check");
    return;
  }
  auto ds = LoadIdx(std::string(dir) + "/train-images-idx3-ubyte", std::string(dir) + "/train-labels-idx1-ubyte");
  CHECK(ds.size() == 60000);
  CHECK(ds.input_dim == 28 * 28);
}

TEST_CASE("synthetic data") {
  Rng a(1), b(1);
  auto x = SyntheticDataset(300, 16, 3, 10.0, a);
  auto y = SyntheticDataset(300, 16, 3, 10.0, b);
  CHECK(x.features == y.features);
  CHECK(x.labels == y.labels);
  x.Validate();
  for (double v : x.features) CHECK((v >= 0.0 && v <= 1.0));

  Rng r1(2);
  auto sep = SyntheticDataset(200, 20, 4, 10.0, r1);
  CHECK(TrainAndScore(sep, 3) >= 0.99);

  // No separation: a fresh sample from the same blobs scores at chance.
  Rng r2(4);
  auto all = SyntheticDataset(4000, 20, 4, 0.0, r2);
  std::vector<std::size_t> tr(2000), te(2000);
  std::iota(tr.begin(), tr.end(), 0);
  std::iota(te.begin(), te.end(), 2000);
  auto train = all.Subset(tr), test = all.Subset(te);
  fl::ModelSpec spec{fl::Architecture::kLogistic, 20, 1, 4};
  fl::ClassifierObjective obj(spec, train);
  Rng r3(5);
  auto w = fl::InitWeights(spec, r3);
  auto d = fl::LocalSgd(obj, w, {300, 0.2, 32}, r3);
  for (std::size_t j = 0; j < w.size(); ++j) w[j] += d[j];
  CHECK(fl::Evaluate(spec, w, test).accuracy == doctest::Approx(0.25).epsilon(0.2));

  Rng r4(6);
  CHECK_THROWS_AS(SyntheticDataset(10, 4, 1, 1.0, r4), Error);
}

TEST_CASE("subsample keeps order and is deterministic") {
  Rng g(7);
  auto ds = SyntheticDataset(100, 3, 5, 2.0, g);
  Rng a(8), b(8);
  auto s1 = Subsample(ds, 30, a), s2 = Subsample(ds, 30, b);
  CHECK(s1.size() == 30);
  CHECK(s1.features == s2.features);
  // Each kept row exists in the source, in increasing source order.
  std::size_t cursor = 0;
  for (std::size_t i = 0; i < s1.size(); ++i) {
    while (cursor < ds.size() && !std::equal(s1.sample(i).begin(), s1.sample(i).end(), ds.sample(cursor).begin()))
      ++cursor;
    CHECK(cursor < ds.size());
    ++cursor;
  }
}

TEST_CASE("sharding") {
  Rng g(9);
  auto ds = SyntheticDataset(1000, 4, 10, 2.0, g);

  SUBCASE("iid partition") {
    Rng r(10);
    auto plan = Shard(ds, 10, {}, r);
    auto members = plan.Members();
    REQUIRE(members.size() == 10);
    std::vector<int> seen(ds.size(), 0);
    for (const auto &m : members) {
      CHECK(m.size() >= 100 - 3 * 10);  // binomial(1000, 0.1): sd ~ 9.5
      CHECK(m.size() <= 100 + 3 * 10);
      for (auto i : m) ++seen[i];
    }
    for (int s : seen) CHECK(s == 1);
    Rng r2(10);
    CHECK(Shard(ds, 10, {}, r2).assignment == plan.assignment);
  }
  SUBCASE("one client holds everything") {
    Rng r(11);
    auto plan = Shard(ds, 1, {}, r);
    CHECK(plan.Members()[0].size() == ds.size());
  }
  SUBCASE("dirichlet shards are more heterogeneous") {
    fl::ModelSpec spec{fl::Architecture::kLogistic, 4, 1, 10};
    Rng wr(12);
    auto w = fl::InitWeights(spec, wr);
    auto heterogeneity = [&](ShardSpec s) {
      Rng r(13);
      auto plan = Shard(ds, 10, s, r);
      std::vector<Dataset> shards;
      for (const auto &m : plan.Members()) shards.push_back(ds.Subset(m));
      std::vector<fl::ClassifierObjective> objs;
      for (const auto &sh : shards) objs.emplace_back(spec, sh);
      std::vector<const fl::Objective *> ptrs;
      for (const auto &o : objs) ptrs.push_back(&o);
      return fl::EstimateHeterogeneity(ptrs, w);
    };
    CHECK(heterogeneity({ShardStrategy::kDirichlet, 0.1}) > heterogeneity({ShardStrategy::kIid, 0.5}));
  }
  SUBCASE("invalid requests") {
    Rng r(14);
    auto tiny = ds.Subset(std::vector<std::size_t>{0, 1, 2});
    CHECK_THROWS_AS(Shard(tiny, 4, {}, r), Error);
    CHECK_THROWS_AS(Shard(ds, 0, {}, r), Error);
    CHECK_THROWS_AS(Shard(ds, 3, {ShardStrategy::kDirichlet, 0.0}, r), Error);
  }
  SUBCASE("csv export") {
    Rng r(15);
    auto plan = Shard(ds, 4, {}, r);
    const std::string path = "data_io_shards.csv";
    WriteShardCsv(plan, path);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "sample_index,client_id");
    std::size_t rows = 0;
    while (std::getline(in, line)) {
      const auto comma = line.find(',');
      CHECK(std::stoul(line.substr(comma + 1)) == plan.assignment[std::stoul(line.substr(0, comma))]);
      ++rows;
    }
    CHECK(rows == ds.size());
    std::remove(path.c_str());
  }
}

}  // TEST_SUITE
