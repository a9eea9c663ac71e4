#include "cbf/fock.hpp"

#include <gtest/gtest.h>

using namespace cbf;
using Q = rational;

namespace {

struct Fixture {
  std::shared_ptr<const AlgebraContext<Q>> ctx = make_context<Q>(2, 4);
  std::mt19937_64 rng{21};
  std::vector<Factor<Q>> fs;
  std::shared_ptr<const RepSpace<Q>> sp;

  explicit Fixture(int du = 2, int L = 4) {
    fs = {random_factor(ctx, du, rng), random_factor(ctx, du, rng)};
    sp = free_product(fs, L);
  }
  Entry<Q> op(int fam, Face f) { return Entry<Q>(random_face_op(fs[fam], fam, f, rng)); }
  Entry<Q> lb() { return Entry<Q>(Atom<Q>::LB(ctx->random_b(rng))); }
  Entry<Q> rb() { return Entry<Q>(Atom<Q>::RB(ctx->random_b(rng))); }
};

bool same(const RepSpace<Q>::Vec& a, const RepSpace<Q>::Vec& b, const RepSpace<Q>& sp) {
  return sp.dense(a) == sp.dense(b);
}

}  // namespace

TEST(Fock, BasisSizeOfAlternatingWords) {
  for (int d = 1; d <= 3; ++d)
    for (int L = 0; L <= 4; ++L) {
      auto ctx = make_context<Q>(1, 1);
      std::mt19937_64 rng(1);
      auto sp = free_product<Q>({random_factor(ctx, d, rng), random_factor(ctx, d, rng)}, L);
      long long want = 1, pw = 1;
      for (int m = 1; m <= L; ++m) {
        pw *= d;
        want += 2 * pw;
      }
      EXPECT_EQ(sp->basis_words(), want) << "d=" << d << " L=" << L;
    }
}

TEST(Fock, ExpectationsAreBimoduleMaps) {
  Fixture f;
  for (int t = 0; t < 10; ++t) {
    OpWord<Q> w{f.op(t % 2, Face::l), f.op((t + 1) % 2, Face::r), f.op(t % 2, Face::r)};
    auto b1 = f.ctx->random_b(f.rng), b2 = f.ctx->random_b(f.rng), b = f.ctx->random_b(f.rng);
    auto [e, F] = f.sp->EF(w);
    OpWord<Q> wl = w;
    wl[0] = wl[0].prepend(Atom<Q>::RB(b2)).prepend(Atom<Q>::LB(b1));
    auto [e1, F1] = f.sp->EF(wl);
    EXPECT_EQ(e1, b1 * e * b2);
    EXPECT_EQ(F1, f.ctx->b_to_d(b1) * F * f.ctx->b_to_d(b2));
    OpWord<Q> wL = w, wR = w;
    wL.back() = wL.back().append(Atom<Q>::LB(b));
    wR.back() = wR.back().append(Atom<Q>::RB(b));
    auto [eL, FL] = f.sp->EF(wL);
    auto [eR, FR] = f.sp->EF(wR);
    EXPECT_EQ(eL, eR);
    EXPECT_EQ(FL, FR);
  }
}

TEST(Fock, LeftAndRightBOperatorsCommute) {
  Fixture f(2, 3);
  auto x = f.sp->apply(OpWord<Q>{f.op(0, Face::l), f.op(1, Face::r)}, f.sp->vacuum());
  auto L = f.lb(), R = f.rb();
  EXPECT_TRUE(same(f.sp->apply(L, f.sp->apply(R, x)), f.sp->apply(R, f.sp->apply(L, x)), *f.sp));
  // lifted left operators commute with right B-operators, lifted right with left B-operators
  auto X = f.op(0, Face::l), Y = f.op(1, Face::r);
  EXPECT_TRUE(same(f.sp->apply(X, f.sp->apply(R, x)), f.sp->apply(R, f.sp->apply(X, x)), *f.sp));
  EXPECT_TRUE(same(f.sp->apply(Y, f.sp->apply(L, x)), f.sp->apply(L, f.sp->apply(Y, x)), *f.sp));
}

TEST(Fock, LeftAndRightFromDifferentFactorsCommute) {
  Fixture f(2, 4);
  // start from vectors of word length <= 2 so two more letters stay inside the truncation
  std::vector<RepSpace<Q>::Vec> starts{f.sp->vacuum(), f.sp->apply(f.op(0, Face::l), f.sp->vacuum()),
                                       f.sp->apply(OpWord<Q>{f.op(1, Face::r), f.op(0, Face::l)}, f.sp->vacuum())};
  for (const auto& x : starts) {
    auto X = f.op(0, Face::l), Y = f.op(1, Face::r);
    EXPECT_TRUE(same(f.sp->apply(X, f.sp->apply(Y, x)), f.sp->apply(Y, f.sp->apply(X, x)), *f.sp));
  }
}

TEST(Fock, VacuumBlockGivesSingleFactorMoments) {
  // one operator from one factor: E is the reduced vacuum entry, unaffected by the other factor
  Fixture f(2, 2);
  auto sp1 = free_product<Q>({f.fs[0]}, 2);
  for (int t = 0; t < 5; ++t) {
    OpWord<Q> w{f.op(0, Face::l), f.op(0, Face::r)};
    EXPECT_EQ(f.sp->E(w), sp1->E(w));
    EXPECT_EQ(f.sp->F(w), sp1->F(w));
  }
}

TEST(Fock, TruncationOverflowRaises) {
  Fixture f(1, 2);
  OpWord<Q> w{f.op(0, Face::l), f.op(1, Face::l), f.op(0, Face::l)};
  EXPECT_THROW(f.sp->E(w), truncation_error);
}

TEST(Fock, MomentsStableWhenTruncationGrows) {
  Fixture f(2, 4);
  auto big = free_product(f.fs, 5);
  for (int t = 0; t < 20; ++t) {
    OpWord<Q> w;
    for (int k = 0; k < 4; ++k) w.push_back(f.op(static_cast<int>(f.rng() % 2), f.rng() % 2 ? Face::l : Face::r));
    auto [e4, F4] = f.sp->EF(w);
    auto [e5, F5] = big->EF(w);
    EXPECT_EQ(e4, e5);
    EXPECT_EQ(F4, F5);
  }
}

TEST(Fock, VacuumFactorHasFEqualE) {
  auto ctx = make_context<Q>(2, 2);
  auto sp = free_product<Q>({vacuum_factor(ctx, 2), vacuum_factor(ctx, 1)}, 3);
  std::mt19937_64 rng(4);
  for (int t = 0; t < 10; ++t) {
    OpWord<Q> w{Entry<Q>(random_face_op(sp->factors()[0], 0, Face::l, rng)),
                Entry<Q>(random_face_op(sp->factors()[1], 1, Face::r, rng)),
                Entry<Q>(random_face_op(sp->factors()[0], 0, Face::r, rng))};
    EXPECT_EQ(sp->E(w), sp->F(w));
  }
}

TEST(Fock, FactorValidation) {
  auto ctx = make_context<Q>(2, 4);
  Factor<Q> f{ctx, 1, {Matrix<Q>::unit(4, 0, 1)}, "bad"};
  EXPECT_THROW(f.validate(), validation_error);  // q-value does not commute with B
  Factor<Q> g{ctx, 2, {ctx->one_D()}, "short"};
  EXPECT_THROW(g.validate(), validation_error);
  std::mt19937_64 rng(2);
  auto h = random_factor(ctx, 2, rng);
  auto back = factor_from_json(ctx, h.descriptor());
  EXPECT_EQ(back.theta.size(), 2u);
  EXPECT_EQ(back.theta[1], h.theta[1]);
}

TEST(Fock, CenteredOperatorsHaveZeroMoments) {
  auto ctx = make_context<Q>(2, 4);
  std::mt19937_64 rng(8);
  auto sp = free_product<Q>({paired_factor(ctx, 1, rng)}, 1);
  auto p = random_pair(*sp, 0, 99, 0.7, 2, true);
  for (const auto& a : p.left) {
    EXPECT_TRUE(sp->E({Entry<Q>(a)}).is_zero());
    EXPECT_TRUE(sp->F({Entry<Q>(a)}).is_zero());
  }
  for (const auto& a : p.right) {
    EXPECT_TRUE(sp->E({Entry<Q>(a)}).is_zero());
    EXPECT_TRUE(sp->F({Entry<Q>(a)}).is_zero());
  }
  // generic q-values leave no room for centering with this few generators
  auto sp2 = free_product<Q>({random_factor(ctx, 1, rng)}, 1);
  EXPECT_THROW(random_pair(*sp2, 0, 1, 0.7, 1, true), centering_error);
}

TEST(Fock, FamilyMapSharesOneFactor) {
  auto ctx = make_context<Q>(2, 4);
  std::mt19937_64 rng(3);
  auto f = random_factor(ctx, 2, rng);
  auto shared = free_product<Q>({f}, 2, {{0, 0}, {1, 0}});
  auto z = random_matrix<Q>(rng, 6, 6);
  // the same reduced matrix under two labels acts identically
  OpWord<Q> a{Entry<Q>(Atom<Q>::left(0, z)), Entry<Q>(Atom<Q>::left(0, z))};
  OpWord<Q> b{Entry<Q>(Atom<Q>::left(0, z)), Entry<Q>(Atom<Q>::left(1, z))};
  EXPECT_EQ(shared->E(a), shared->E(b));
  EXPECT_THROW(shared->E({Entry<Q>(Atom<Q>::left(2, z))}), validation_error);
}
