#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "../support/oracles.hpp"
#include "airgraph/matrix_market.hpp"
#include "airgraph/sparse.hpp"

using namespace airgraph;

TEST_CASE("spmv identity and diagonal") {
  auto eye = SparseMatrix::identity(3);
  std::vector<double> x{1, 2, 3};
  CHECK(spmv(eye, x) == std::vector<double>{1, 2, 3});

  std::vector<double> d{2, 3};
  auto diag = SparseMatrix::diagonal(d);
  std::vector<double> ones{1, 1};
  CHECK(spmv(diag, ones) == std::vector<double>{2, 3});
}

TEST_CASE("spmv matches the dense oracle") {
  auto a = test::random_sparse(5, 0.6, 11);
  auto x = test::random_vector(5, 7);
  auto y = spmv(a, x);
  Eigen::VectorXd xd(5);
  for (int i = 0; i < 5; ++i) xd(i) = x[i];
  Eigen::VectorXd yd = test::to_dense(a) * xd;
  for (int i = 0; i < 5; ++i) CHECK(y[i] == doctest::Approx(yd(i)).epsilon(1e-14));
}

TEST_CASE("spmv flop accounting and dimension check") {
  auto a = test::random_sparse(8, 0.4, 3);
  FlopCounter fc;
  spmv(a, std::vector<double>(8, 1.0), &fc);
  CHECK(fc.flops == 2 * static_cast<std::uint64_t>(a.nnz()));
  CHECK_THROWS_AS(spmv(a, std::vector<double>(7, 1.0)), std::invalid_argument);
}

TEST_CASE("spgemm small cases") {
  auto a = SparseMatrix::from_triplets(2, 2, {{0, 0, 1}, {0, 1, 1}, {1, 1, 1}});
  CHECK(spgemm(a, SparseMatrix::identity(2)) == a);

  auto b = SparseMatrix::from_triplets(2, 2, {{0, 0, 1}, {1, 0, 1}, {1, 1, 1}});
  auto c = spgemm(a, b);
  CHECK(c.entry(0, 0) == 2);
  CHECK(c.entry(0, 1) == 1);
  CHECK(c.entry(1, 0) == 1);
  CHECK(c.entry(1, 1) == 1);
}

TEST_CASE("spgemm rectangular matches dense") {
  auto a = test::random_sparse(20, 0.3, 21);
  auto b = test::random_sparse(20, 0.3, 22);
  // Carve rectangular slices out of square generators.
  std::vector<Triplet> ta, tb;
  for (index_t i = 0; i < 20; ++i) {
    for (index_t j = 0; j < 8; ++j) {
      if (a.has_entry(i, j)) ta.push_back({i, j, a.entry(i, j)});
      if (b.has_entry(j, i)) tb.push_back({j, i, b.entry(j, i)});
    }
  }
  auto ar = SparseMatrix::from_triplets(20, 8, ta);
  auto br = SparseMatrix::from_triplets(8, 20, tb);
  auto prod = spgemm(ar, br);
  Eigen::MatrixXd oracle = test::to_dense(ar) * test::to_dense(br);
  CHECK(test::max_abs_diff(prod, oracle) < 1e-13);
  CHECK_THROWS_AS(spgemm(br, br), std::invalid_argument);
}

TEST_CASE("spgemm keeps cancellation zeros") {
  // (1)(1) + (1)(-1) = 0 must stay stored.
  auto a = SparseMatrix::from_triplets(1, 2, {{0, 0, 1}, {0, 1, 1}});
  auto b = SparseMatrix::from_triplets(2, 1, {{0, 0, 1}, {1, 0, -1}});
  auto c = spgemm(a, b);
  CHECK(c.nnz() == 1);
  CHECK(c.entry(0, 0) == 0.0);
}

TEST_CASE("spgemm associativity on random triples") {
  for (std::uint64_t s = 0; s < 6; ++s) {
    auto r = test::random_sparse(9, 0.3, 100 + s);
    auto a = test::random_sparse(9, 0.3, 200 + s);
    auto p = test::random_sparse(9, 0.3, 300 + s);
    auto left = spgemm(spgemm(r, a), p);
    auto right = spgemm(r, spgemm(a, p));
    CHECK(test::max_abs_diff(left, test::to_dense(right)) < 1e-12);
  }
}

TEST_CASE("extract_blocks degenerate splits") {
  auto a = test::random_sparse(6, 0.5, 31);
  std::vector<CfLabel> all_c(6, CfLabel::C);
  auto sc = extract_blocks(a, all_c);
  CHECK(sc.a_cc == a);
  CHECK(sc.a_ff.nrows() == 0);
  CHECK(sc.a_fc.nnz() == 0);

  std::vector<CfLabel> all_f(6, CfLabel::F);
  auto sf = extract_blocks(a, all_f);
  CHECK(sf.a_ff == a);
}

TEST_CASE("extract_blocks matches the dense permutation oracle") {
  auto a = test::random_sparse(4, 0.9, 5);
  std::vector<CfLabel> labels{CfLabel::F, CfLabel::C, CfLabel::F, CfLabel::C};
  auto split = extract_blocks(a, labels);

  Eigen::MatrixXd dense = test::to_dense(a);
  Eigen::MatrixXd perm = Eigen::MatrixXd::Zero(4, 4);
  std::vector<index_t> order{0, 2, 1, 3};  // F rows then C rows
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) perm(i, j) = dense(order[i], order[j]);

  CHECK(test::max_abs_diff(split.a_ff, perm.block(0, 0, 2, 2)) == 0.0);
  CHECK(test::max_abs_diff(split.a_fc, perm.block(0, 2, 2, 2)) == 0.0);
  CHECK(test::max_abs_diff(split.a_cf, perm.block(2, 0, 2, 2)) == 0.0);
  CHECK(test::max_abs_diff(split.a_cc, perm.block(2, 2, 2, 2)) == 0.0);
}

TEST_CASE("extract_blocks round trip is exact") {
  for (std::uint64_t s = 0; s < 4; ++s) {
    auto a = test::random_sparse(12, 0.4, 50 + s);
    std::vector<CfLabel> labels(12);
    for (index_t i = 0; i < 12; ++i)
      labels[i] = rng::uniform01(s, i) < 0.5 ? CfLabel::F : CfLabel::C;
    auto split = extract_blocks(a, labels);

    std::vector<Triplet> trips;
    auto emit = [&](const SparseMatrix& blk, const std::vector<index_t>& rmap,
                    const std::vector<index_t>& cmap) {
      for (index_t i = 0; i < blk.nrows(); ++i) {
        auto cols = blk.row_cols(i);
        auto vals = blk.row_vals(i);
        for (std::size_t k = 0; k < cols.size(); ++k)
          trips.push_back({rmap[i], cmap[cols[k]], vals[k]});
      }
    };
    emit(split.a_ff, split.map.f_to_fine, split.map.f_to_fine);
    emit(split.a_fc, split.map.f_to_fine, split.map.c_to_fine);
    emit(split.a_cf, split.map.c_to_fine, split.map.f_to_fine);
    emit(split.a_cc, split.map.c_to_fine, split.map.c_to_fine);
    CHECK(SparseMatrix::from_triplets(12, 12, trips) == a);
  }
}

TEST_CASE("extract_blocks rejects unassigned labels") {
  auto a = SparseMatrix::identity(2);
  std::vector<CfLabel> labels{CfLabel::F, CfLabel::Unassigned};
  CHECK_THROWS_AS(extract_blocks(a, labels), std::invalid_argument);
}

TEST_CASE("drop_entries rules") {
  auto a = test::random_sparse(7, 0.5, 9);
  CHECK(drop_entries(a, 0.0) == a);

  auto row = SparseMatrix::from_triplets(
      1, 3, {{0, 0, 4.0}, {0, 1, 0.01}, {0, 2, 1.0}});
  auto dropped = drop_entries(row, 0.1);  // threshold 0.4
  CHECK(dropped.has_entry(0, 0));
  CHECK_FALSE(dropped.has_entry(0, 1));
  CHECK(dropped.has_entry(0, 2));

  auto tiny_diag = SparseMatrix::from_triplets(
      2, 2, {{0, 0, 1e-20}, {0, 1, 5.0}, {1, 1, 1.0}});
  auto kept = drop_entries(tiny_diag, 0.9);
  CHECK(kept.has_entry(0, 0));  // diagonal always survives
}

TEST_CASE("drop_entries keeps the row maximum at tol > 1") {
  // Rectangular input: no diagonal rule, only the row maxima survive.
  auto z = SparseMatrix::from_triplets(
      2, 3, {{0, 0, 0.5}, {0, 2, -2.0}, {1, 1, 0.1}, {1, 2, 0.099}});
  auto d = drop_entries(z, 1.1);
  CHECK(d.nnz() == 2);
  CHECK(d.entry(0, 2) == -2.0);
  CHECK(d.entry(1, 1) == 0.1);
}

TEST_CASE("drop_entries is idempotent") {
  for (double tol : {0.05, 0.3, 1.5}) {
    auto a = test::random_sparse(10, 0.5, 77);
    auto once = drop_entries(a, tol);
    CHECK(drop_entries(once, tol) == once);
  }
}

TEST_CASE("with_full_diagonal inserts explicit zeros") {
  auto a = SparseMatrix::from_triplets(3, 3, {{0, 1, 2.0}, {2, 2, 1.0}});
  auto full = a.with_full_diagonal();
  CHECK(full.nnz() == 4);
  for (index_t i = 0; i < 3; ++i) CHECK(full.has_entry(i, i));
  CHECK(full.entry(0, 0) == 0.0);
  CHECK(full.entry(0, 1) == 2.0);
  // Already-full diagonals are untouched.
  CHECK(full.with_full_diagonal() == full);
}

TEST_CASE("pruned drops stored zeros off the diagonal only") {
  auto a = SparseMatrix::from_triplets(
      2, 2, {{0, 0, 0.0}, {0, 1, 0.0}, {1, 0, 3.0}, {1, 1, 1.0}});
  auto p = a.pruned();
  CHECK(p.nnz() == 3);
  CHECK(p.has_entry(0, 0));
  CHECK_FALSE(p.has_entry(0, 1));
}

TEST_CASE("invalid CSR construction is rejected") {
  CHECK_THROWS_AS(SparseMatrix(2, 2, {0, 1}, {0}, {1.0}),
                  std::invalid_argument);  // offsets too short
  CHECK_THROWS_AS(SparseMatrix(1, 2, {0, 2}, {1, 0}, {1.0, 1.0}),
                  std::invalid_argument);  // unsorted columns
  CHECK_THROWS_AS(SparseMatrix(1, 1, {0, 1}, {0}, {std::nan("")}),
                  std::invalid_argument);
}

TEST_CASE("matrix market round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "airgraph_mm_test";
  std::filesystem::create_directories(dir);
  auto a = test::random_sparse(10, 0.45, 123);
  const auto path = dir / "a.mtx";
  write_matrix_market(a, path);
  CHECK(read_matrix_market(path) == a);
}

TEST_CASE("matrix market is 1-based on disk and sums duplicates") {
  const auto dir = std::filesystem::temp_directory_path() / "airgraph_mm_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "dup.mtx";
  {
    std::ofstream out(path);
    out << "%%MatrixMarket matrix coordinate real general\n"
        << "% comment line\n"
        << "2 2 3\n"
        << "1 1 1.0\n"
        << "2 2 1.0\n"
        << "2 2 2.0\n";
  }
  auto a = read_matrix_market(path);
  CHECK(a.entry(0, 0) == 1.0);
  CHECK(a.entry(1, 1) == 3.0);
  CHECK(a.nnz() == 2);
}

TEST_CASE("matrix market rejects bad input") {
  const auto dir = std::filesystem::temp_directory_path() / "airgraph_mm_test";
  std::filesystem::create_directories(dir);
  const auto bad_header = dir / "bad1.mtx";
  {
    std::ofstream out(bad_header);
    out << "%%NotMatrixMarket nonsense\n1 1 0\n";
  }
  CHECK_THROWS_AS(read_matrix_market(bad_header), std::runtime_error);

  const auto oob = dir / "bad2.mtx";
  {
    std::ofstream out(oob);
    out << "%%MatrixMarket matrix coordinate real general\n"
        << "2 2 1\n"
        << "3 1 1.0\n";
  }
  CHECK_THROWS_AS(read_matrix_market(oob), std::runtime_error);

  const auto pattern = dir / "bad3.mtx";
  {
    std::ofstream out(pattern);
    out << "%%MatrixMarket matrix coordinate pattern general\n"
        << "1 1 1\n1 1\n";
  }
  CHECK_THROWS_AS(read_matrix_market(pattern), std::runtime_error);
}
