#include "cbf/series.hpp"
#include "cbf/suite.hpp"

#include <gtest/gtest.h>

using namespace cbf;
using Q = rational;
using S = TruncatedSeries<Q>;

namespace {

S random_series(std::mt19937_64& rng, int N, int dim, bool unit) {
  S s = S::constant(N, unit ? Matrix<Q>::identity(dim) + random_matrix<Q>(rng, dim, dim) : random_matrix<Q>(rng, dim, dim));
  for (int b = 0; b <= N; ++b)
    for (int c = 0; c <= 1; ++c)
      for (int d = 0; b + c + d <= N; ++d)
        if (b + c + d > 0 && rng() % 2) s.add({b, c, d}, random_matrix<Q>(rng, dim, dim));
  return s;
}

bool same(const S& a, const S& b) { return compare_series("", a, b).pass(); }

}  // namespace

TEST(Series, RingLaws) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 5; ++t) {
    auto a = random_series(rng, 3, 2, true), b = random_series(rng, 3, 2, false), c = random_series(rng, 3, 2, false);
    EXPECT_TRUE(same((a * b) * c, a * (b * c)));
    EXPECT_TRUE(same(a * (b + c), a * b + a * c));
    EXPECT_TRUE(same((b - c) + c, b));
    auto one = S::constant(3, Matrix<Q>::identity(2));
    if (rank(a.coeff({0, 0, 0})) == 2) {
      EXPECT_TRUE(same(a * a.inverse(), one));
      EXPECT_TRUE(same(a.inverse() * a, one));
    }
  }
}

TEST(Series, TruncationRules) {
  S s(2, 1);
  s.add({1, 1, 1}, Matrix<Q>::identity(1));  // beyond degree 2: dropped
  EXPECT_TRUE(s.terms().empty());
  EXPECT_THROW(s.add({0, 2, 0}, Matrix<Q>::identity(1)), validation_error);
  EXPECT_THROW(s.add({1, 0, 0}, Matrix<Q>::identity(2)), dimension_error);
  EXPECT_THROW(S(2, 1) + S(3, 1), dimension_error);
  // t_c twice in a product vanishes
  auto c = S::monomial(2, {0, 1, 0}, Matrix<Q>::identity(1));
  EXPECT_TRUE((c * c).terms().empty());
  EXPECT_THROW(S(-1, 1), validation_error);
}

TEST(Series, JsonLayout) {
  auto s = S::monomial(2, {1, 0, 1}, Matrix<Q>::identity(1));
  auto j = s.to_json();
  ASSERT_EQ(j.size(), 1u);
  EXPECT_EQ(j[0]["degree"], nlohmann::json({1, 0, 1}));
  EXPECT_EQ(j[0]["matrix"][0][0], "1");
}

TEST(Series, ScalarCumulantSeriesHoldsFreeCumulants) {
  auto ctx = make_context<Q>(1, 1);
  auto sp = free_product<Q>({vacuum_factor(ctx, 2)}, 4);
  Engine<Q> eng(sp);
  std::mt19937_64 rng(2);
  Entry<Q> z(random_face_op(sp->factors()[0], 0, Face::l, rng));
  auto one = ctx->one_B();
  auto ms = one_sided_moment_series(eng, z, Face::l, one, 3);
  Q m1 = ms.M.coeff({1, 0, 0})(0, 0), m2 = ms.M.coeff({2, 0, 0})(0, 0), m3 = ms.M.coeff({3, 0, 0})(0, 0);
  EXPECT_EQ(m2, sp->E({z, z})(0, 0));
  auto C = one_sided_cumulant_series(eng, z, Face::l, one, 3);
  EXPECT_EQ(C.coeff({1, 0, 0})(0, 0), m1);
  EXPECT_EQ(C.coeff({2, 0, 0})(0, 0), m2 - m1 * m1);
  EXPECT_EQ(C.coeff({3, 0, 0})(0, 0), m3 - 3 * m1 * m2 + 2 * m1 * m1 * m1);
}

TEST(Series, CumulantTransformsAndPartialR) {
  auto inst = detail::TwoFactorInstance<Q>::make(5);
  auto sp = free_product(inst.fs, 4);
  Engine<Q> eng(sp);
  std::mt19937_64 rng(6);
  Entry<Q> zl(random_face_op(inst.fs[0], 0, Face::l, rng)), zr(random_face_op(inst.fs[0], 0, Face::r, rng));
  auto b = inst.ctx->random_b(rng), c = inst.ctx->random_b(rng), d = inst.ctx->random_b(rng);
  EXPECT_TRUE(check_cumulant_transform(eng, zl, Face::l, b, 3).pass());
  EXPECT_TRUE(check_cumulant_transform(eng, zr, Face::r, d, 3).pass());
  auto pr = check_partial_R(eng, zl, zr, b, c, d, 3);
  EXPECT_TRUE(pr.pass()) << pr.to_json(3).dump();
  EXPECT_GT(pr.checks.size(), 3u);
  // dropping a term of the right side is detected
  auto s = partial_R_sides(eng, zl, zr, b, c, d, 3);
  auto cc = S::monomial(3, {0, 1, 0}, inst.ctx->b_to_d(c));
  EXPECT_FALSE(compare_series("", s.lhs, s.rhs + s.left.M.map([&](const Matrix<Q>& x) { return inst.ctx->b_to_d(x); },
                                                                 4) * cc * s.right.MM)
                   .pass());
}

TEST(Series, AdditivityForDifferentFamilies) {
  auto inst = detail::TwoFactorInstance<Q>::make(7);
  Engine<Q> eng(free_product(inst.fs, 3));
  std::mt19937_64 rng(8);
  Entry<Q> a(random_face_op(inst.fs[0], 0, Face::l, rng)), ar(random_face_op(inst.fs[0], 0, Face::r, rng));
  Entry<Q> b(random_face_op(inst.fs[1], 1, Face::l, rng)), br(random_face_op(inst.fs[1], 1, Face::r, rng));
  auto x = inst.ctx->random_b(rng), y = inst.ctx->random_b(rng), z = inst.ctx->random_b(rng);
  EXPECT_TRUE(check_additivity(eng, a, ar, b, br, x, y, z, 3).pass());
  // the same family twice is not additive
  Entry<Q> a2(random_face_op(inst.fs[0], 0, Face::l, rng)), a2r(random_face_op(inst.fs[0], 0, Face::r, rng));
  EXPECT_FALSE(check_additivity(eng, a, ar, a2, a2r, x, y, z, 3).pass());
}

TEST(Series, BifreeDegeneration) {
  auto ctx = make_context<Q>(2, 2);
  auto sp = free_product<Q>({vacuum_factor(ctx, 2)}, 4);
  Engine<Q> eng(sp);
  std::mt19937_64 rng(9);
  Entry<Q> zl(random_face_op(sp->factors()[0], 0, Face::l, rng)), zr(random_face_op(sp->factors()[0], 0, Face::r, rng));
  auto b = ctx->random_b(rng), c = ctx->random_b(rng), d = ctx->random_b(rng);
  EXPECT_TRUE(check_bifree_degeneration(eng, zl, zr, b, c, d, 3).pass());
  auto big = make_context<Q>(2, 4);
  Engine<Q> e2(free_product<Q>({random_factor(big, 1, rng)}, 2));
  EXPECT_THROW(check_bifree_degeneration(e2, zl, zr, b, c, d, 2), validation_error);
}

TEST(Series, WordPlacementFollowsFacePattern) {
  auto inst = detail::TwoFactorInstance<Q>::make(10);
  auto sp = free_product(inst.fs, 4);
  std::mt19937_64 rng(11);
  Entry<Q> x(random_face_op(inst.fs[0], 0, Face::l, rng)), y(random_face_op(inst.fs[1], 1, Face::r, rng));
  TwoFacedFamily<Q> fam{{{0, x}, {1, y}}, {0}};
  std::vector<BElem<Q>> bs{inst.ctx->random_b(rng), inst.ctx->random_b(rng), inst.ctx->random_b(rng)};
  auto [chi, w] = series_word(fam, {0, 1, 0, 1}, bs);
  EXPECT_EQ(chi.str(), "lrlr");
  // slot 2 is the first right slot: no prefix; slots 3, 4 prefixed; the last slot closed by b_3
  OpWord<Q> want{x, y, x.prepend(Atom<Q>::LB(bs[0])), y.prepend(Atom<Q>::RB(bs[1])).append(Atom<Q>::RB(bs[2]))};
  EXPECT_EQ(sp->E(w), sp->E(want));
  EXPECT_EQ(sp->F(w), sp->F(want));
  auto [chi2, w2] = series_word(fam, {0, 0, 0}, {bs[0], bs[1]});
  OpWord<Q> want2{x, x.prepend(Atom<Q>::LB(bs[0])), x.prepend(Atom<Q>::LB(bs[1]))};
  EXPECT_EQ(sp->E(w2), sp->E(want2));
  EXPECT_THROW(series_word(fam, {0, 2}, {bs[0]}), validation_error);
  EXPECT_THROW(series_word(fam, {0, 1}, bs), validation_error);
  EXPECT_THROW(parse_series_kind("kappa"), validation_error);
}
