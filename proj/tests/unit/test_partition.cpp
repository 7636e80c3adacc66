#include <doctest.h>

#include <cmath>

#include "../support/oracles.hpp"
#include "airgraph/partition_model.hpp"
#include "airgraph/transport.hpp"

using namespace airgraph;

TEST_CASE("partition_rows block layout") {
  auto a = partition_rows(10, 2);
  for (index_t i = 0; i < 5; ++i) CHECK(a[i] == 0);
  for (index_t i = 5; i < 10; ++i) CHECK(a[i] == 1);

  auto single = partition_rows(6, 1);
  for (int r : single) CHECK(r == 0);

  auto uneven = partition_rows(7, 3);
  std::vector<int> sizes(3, 0);
  for (int r : uneven) ++sizes[r];
  CHECK(sizes == std::vector<int>{3, 2, 2});

  auto clamped = partition_rows(3, 8);  // more ranks than rows
  CHECK(clamped == std::vector<int>{0, 1, 2});
}

TEST_CASE("locality ratio rules") {
  // Block-diagonal matrix split exactly at the block boundary: all local.
  std::vector<Triplet> t;
  for (index_t i = 0; i < 4; ++i) t.push_back({i, i < 2 ? 1 - i : 5 - i, 1.0});
  auto block_diag = SparseMatrix::from_triplets(4, 4, t);
  auto halves = partition_rows(4, 2);
  CHECK(std::isinf(locality_ratio(block_diag, halves)));
  CHECK(local_share(block_diag, halves) == 1.0);

  // Dense 4x4 over 4 ranks: one local and three nonlocal entries per rank.
  auto dense = test::from_dense_full(Eigen::MatrixXd::Ones(4, 4));
  auto each = partition_rows(4, 4);
  CHECK(locality_ratio(dense, each) == doctest::Approx(1.0 / 3.0));
  CHECK(local_share(dense, each) == doctest::Approx(0.25));

  // Single rank: sentinel again.
  CHECK(std::isinf(locality_ratio(dense, partition_rows(4, 1))));
}

TEST_CASE("merging adjacent blocks never decreases the local share") {
  for (std::uint64_t s = 0; s < 8; ++s) {
    auto a = test::random_sparse(40, 0.15, 600 + s);
    for (int ranks : {8, 6, 4}) {
      auto before = partition_rows(40, ranks);
      auto after = before;
      for (int& r : after) r /= 2;
      CHECK(local_share(a, after) >= local_share(a, before));
    }
  }
}

TEST_CASE("replay_triggers threshold extremes") {
  auto mesh = generate_mesh(10, 2, 0.3);
  auto p = assemble_streaming(mesh);
  SetupConfig cfg;
  cfg.poly_order = 3;
  cfg.coarse_poly_order = 3;
  cfg.coarse_size_target = 40;
  cfg.drop_coarse = 0.0075;
  cfg.drop_restrict = 0.025;
  auto h = setup(p.a, cfg);

  auto never = replay_triggers(h, 16, 0.0);
  for (const auto& lp : never.levels) {
    CHECK_FALSE(lp.triggered);
    CHECK(lp.active_ranks == 16);
  }

  auto always = replay_triggers(h, 16, 1e30);
  // Halves on every level until one rank is left, then the all-local
  // sentinel stops the cascade.
  int expected = 16;
  for (const auto& lp : always.levels) {
    if (expected > 1) {
      CHECK(lp.triggered);
      expected = (expected + 1) / 2;
    }
    CHECK(lp.active_ranks == expected);
  }
  CHECK(always.levels.back().active_ranks == 1);
}

TEST_CASE("replay_triggers is pure and deterministic") {
  auto mesh = generate_mesh(8, 6, 0.3);
  auto p = assemble_streaming(mesh);
  SetupConfig cfg;
  cfg.poly_order = 3;
  cfg.coarse_poly_order = 3;
  cfg.coarse_size_target = 30;
  auto h = setup(p.a, cfg);
  auto s1 = replay_triggers(h, 32, 2.0);
  auto s2 = replay_triggers(h, 32, 2.0);
  REQUIRE(s1.levels.size() == s2.levels.size());
  for (std::size_t l = 0; l < s1.levels.size(); ++l) {
    CHECK(s1.levels[l].active_ranks == s2.levels[l].active_ranks);
    CHECK(s1.levels[l].ratio_before == s2.levels[l].ratio_before);
    CHECK(s1.levels[l].triggered == s2.levels[l].triggered);
  }

  // Rank counts never increase down the hierarchy; triggers never hurt the
  // local share.
  int prev = 32;
  for (const auto& lp : s1.levels) {
    CHECK(lp.active_ranks <= prev);
    prev = lp.active_ranks;
    if (lp.triggered) CHECK(lp.share_after >= lp.share_before);
  }
}
