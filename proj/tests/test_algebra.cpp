#include "cbf/algebra.hpp"

#include <gtest/gtest.h>

using namespace cbf;
using Q = rational;

TEST(Scalar, ParseAndPrintRationals) {
  EXPECT_EQ(scalar_traits<Q>::parse("6/4"), Q(3, 2));
  EXPECT_EQ(scalar_traits<Q>::str(scalar_traits<Q>::parse("-2/6")), "-1/3");
  EXPECT_THROW(scalar_traits<Q>::parse("1/x"), std::invalid_argument);
  EXPECT_DOUBLE_EQ(scalar_traits<double>::parse("1/4"), 0.25);
}

TEST(Matrix, InverseAndRankExact) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 20; ++t) {
    auto m = random_matrix<Q>(rng, 4, 4);
    if (rank(m) < 4) {
      EXPECT_THROW(inverse(m), std::domain_error);
      continue;
    }
    EXPECT_EQ(m * inverse(m), Matrix<Q>::identity(4));
    EXPECT_EQ(inverse(m) * m, Matrix<Q>::identity(4));
  }
  Matrix<Q> sing(2, 2);
  sing(0, 0) = 1;
  sing(0, 1) = 2;
  sing(1, 0) = 2;
  sing(1, 1) = 4;
  EXPECT_EQ(rank(sing), 1u);
}

TEST(Matrix, NullspaceVectorsAreKilled) {
  std::mt19937_64 rng(5);
  auto m = random_matrix<Q>(rng, 3, 6);
  auto ker = nullspace(m);
  EXPECT_EQ(ker.size() + rank(m), 6u);
  for (const auto& v : ker)
    for (int r = 0; r < 3; ++r) {
      Q acc = 0;
      for (int c = 0; c < 6; ++c) acc += m(r, c) * v[c];
      EXPECT_EQ(acc, 0);
    }
}

TEST(Matrix, JsonRoundTrip) {
  std::mt19937_64 rng(7);
  auto m = random_matrix<Q>(rng, 3, 2);
  auto j = to_json(m);
  EXPECT_TRUE(j[0][0].is_string());
  EXPECT_EQ(matrix_from_json<Q>(j), m);
  auto f = random_matrix<double>(rng, 2, 2);
  EXPECT_EQ(matrix_from_json<double>(to_json(f)), f);
}

TEST(Context, BlockDiagonalEmbeddingIsUnitalHomomorphism) {
  auto ctx = make_context<Q>(2, 6);
  std::mt19937_64 rng(11);
  EXPECT_EQ(ctx->b_to_d(ctx->one_B()), ctx->one_D());
  for (int t = 0; t < 10; ++t) {
    auto a = ctx->random_b(rng), b = ctx->random_b(rng);
    EXPECT_EQ(ctx->b_to_d(a * b), ctx->b_to_d(a) * ctx->b_to_d(b));
    EXPECT_EQ(ctx->b_to_d(a + b), ctx->b_to_d(a) + ctx->b_to_d(b));
  }
}

TEST(Context, CentralizerCommutesWithB) {
  auto ctx = make_context<Q>(2, 4);
  // commutant of diag(b, b) in M_4 is M_2 (x) 1: dimension 4
  EXPECT_EQ(ctx->centralizer().size(), 4u);
  std::mt19937_64 rng(13);
  for (const auto& x : ctx->centralizer())
    for (int t = 0; t < 5; ++t) {
      auto b = ctx->b_to_d(ctx->random_b(rng));
      EXPECT_EQ(x * b, b * x);
    }
}

TEST(Context, DimensionChecks) {
  EXPECT_THROW(make_context<Q>(2, 3), validation_error);
  EXPECT_THROW(make_context<Q>(3, 2), validation_error);
  EXPECT_THROW(make_context<Q>(0, 2), validation_error);
  auto ctx = make_context<Q>(2, 4);
  EXPECT_THROW(ctx->b_to_d(Matrix<Q>::identity(3)), dimension_error);
  // a non-multiplicative family of images is rejected
  std::vector<Matrix<Q>> bad(4, Matrix<Q>::identity(4));
  EXPECT_THROW(make_context<Q>(2, 4, bad), validation_error);
}

TEST(Context, DescriptorRoundTrip) {
  auto ctx = context_from_json<Q>(nlohmann::json{{"dim_B", 2}, {"dim_D", 4}, {"embedding", "block-diagonal"}});
  EXPECT_EQ(ctx->dim_B(), 2);
  EXPECT_EQ(ctx->dim_D(), 4);
  EXPECT_EQ(ctx->descriptor()["mode"], "exact");
  EXPECT_EQ(make_context<double>(1, 1)->descriptor()["mode"], "float");
}

TEST(Context, FloatModeAgreesWithExact) {
  auto cq = make_context<Q>(2, 4);
  auto cd = make_context<double>(2, 4);
  std::mt19937_64 rng(17);
  auto b = cq->random_b(rng);
  Matrix<double> bd(2, 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) bd(i, j) = b(i, j).get_d();
  auto eq = cq->b_to_d(b);
  auto ed = cd->b_to_d(bd);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) EXPECT_NEAR(eq(i, j).get_d(), ed(i, j), 1e-12);
}
