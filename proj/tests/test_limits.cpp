#include "cbf/limits.hpp"

#include <gtest/gtest.h>

using namespace cbf;
using Q = rational;

namespace {

IidModel<Q> centered_model(std::uint64_t seed) {
  auto ctx = make_context<Q>(2, 4);
  std::mt19937_64 rng(seed);
  return IidModel<Q>::random(paired_factor(ctx, 1, rng), {Face::l, Face::r}, seed + 1, true);
}

}  // namespace

TEST(Limits, ScaleFactors) {
  EXPECT_EQ(sum_scale<Q>(16, Normalization::sqrt_n), Q(1, 4));
  EXPECT_EQ(sum_scale<Q>(5, Normalization::mean), Q(1, 5));
  EXPECT_EQ(sum_cumulant_factor<Q>(16, Normalization::sqrt_n, 3), Q(1, 4));
  EXPECT_EQ(sum_cumulant_factor<Q>(16, Normalization::sqrt_n, 2), Q(1));
  EXPECT_THROW(sum_scale<Q>(8, Normalization::sqrt_n), validation_error);
  EXPECT_NEAR(sum_scale<double>(8, Normalization::sqrt_n), 1 / std::sqrt(8.0), 1e-15);
  EXPECT_THROW(sum_scale<Q>(0, Normalization::none), validation_error);
  EXPECT_THROW(parse_normalization("cube"), validation_error);
}

TEST(Limits, SumCumulantsMatchDirectFreeProduct) {
  auto model = centered_model(3);
  auto sp = free_product<Q>({model.factor}, 3);
  Engine<Q> eng(sp);
  auto fam = model.copy(0);
  std::mt19937_64 rng(4);
  for (int N : {1, 2, 3})
    for (SeriesKind k : {SeriesKind::rho, SeriesKind::eta})
      for (const auto& om : all_omegas(2, 3)) {
        std::vector<BElem<Q>> bs{model.factor.ctx->random_b(rng), model.factor.ctx->random_b(rng)};
        EXPECT_EQ(sum_cumulants(eng, fam, N, Normalization::none, k, om, bs),
                  direct_sum_cumulant(model, N, Normalization::none, k, om, bs))
            << "N=" << N << " omega=" << omega_str(om);
      }
  EXPECT_THROW(sum_cumulants(eng, fam, 2, Normalization::none, SeriesKind::nu, {0}, {}), validation_error);
}

TEST(Limits, CentralLimitExact) {
  CltOptions co;
  co.direct_N = {2, 3};
  auto res = clt_check(centered_model(5), co);
  EXPECT_TRUE(res.report.pass()) << res.report.to_json(3).dump();
  EXPECT_FALSE(res.rows.empty());
}

TEST(Limits, CentralLimitNeedsCentering) {
  auto ctx = make_context<Q>(2, 4);
  std::mt19937_64 rng(6);
  auto model = IidModel<Q>::random(paired_factor(ctx, 1, rng), {Face::l, Face::r}, 7, false);
  CltOptions co;
  co.max_order = 2;
  co.direct_N = {2};
  EXPECT_FALSE(clt_check(model, co).report.pass());
}

TEST(Limits, CentralLimitFloat) {
  auto ctx = make_context<double>(2, 4);
  std::mt19937_64 rng(8);
  auto model = IidModel<double>::random(paired_factor(ctx, 1, rng), {Face::l, Face::r}, 9, true);
  CltOptions co;
  co.ladder = {1, 2, 8, 32};
  co.max_order = 3;
  co.direct_N = {2, 3};
  auto res = clt_check(model, co);
  EXPECT_TRUE(res.report.pass()) << res.report.to_json(3).dump();
}

TEST(Limits, InterpolationIsExact) {
  // p(s) = A + B s + C s^3 through five nodes
  std::mt19937_64 rng(10);
  auto A = random_matrix<Q>(rng, 2, 2), B = random_matrix<Q>(rng, 2, 2), C = random_matrix<Q>(rng, 2, 2);
  std::vector<Q> xs;
  std::vector<Matrix<Q>> ys;
  for (int i = 0; i < 5; ++i) {
    Q s(i);
    xs.push_back(s);
    ys.push_back(A + B * s + C * (s * s * s));
  }
  auto c = interpolate(xs, ys);
  ASSERT_EQ(c.size(), 5u);
  EXPECT_EQ(c[0], A);
  EXPECT_EQ(c[1], B);
  EXPECT_TRUE(c[2].is_zero());
  EXPECT_EQ(c[3], C);
  EXPECT_TRUE(c[4].is_zero());
  EXPECT_EQ(poly_eval(c, Q(7, 3)), A + B * Q(7, 3) + C * Q(343, 27));
}

TEST(Limits, LogLogSlope) {
  EXPECT_NEAR(loglog_slope({8, 16, 32, 64}, {1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64}), -1.0, 1e-12);
  EXPECT_NEAR(loglog_slope({1, 2, 4}, {3, 12, 48}), 2.0, 1e-12);
}

TEST(Limits, OmegaEnumeration) {
  EXPECT_EQ(all_omegas(2, 3).size(), 8u);
  EXPECT_EQ(all_omegas(3, 2).size(), 9u);
  EXPECT_EQ(omega_str({0, 1, 1}), "0,1,1");
}

TEST(Limits, PoissonLimitAndDefectRate) {
  auto ctx = make_context<Q>(2, 4);
  std::mt19937_64 rng(11);
  auto f = random_factor(ctx, 2, rng);
  auto sp = free_product<Q>({f}, 3);
  auto model = IidModel<Q>::random(f, {Face::l, Face::r}, 12, false);
  LadderOptions lo;
  lo.max_order = 2;
  auto res = poisson_check<Q>(sp, model.copy(0), Q(1, 2), lo);
  EXPECT_TRUE(res.report.pass()) << res.report.to_json(3).dump();
  auto csv = res.to_csv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "test,kind,n,omega,N,value_norm,defect,fitted_rate");
  bool rated = false;
  for (const auto& r : res.rows) rated |= !std::isnan(r.rate);
  EXPECT_TRUE(rated);
  EXPECT_TRUE(res.to_json().contains("rows"));
}
