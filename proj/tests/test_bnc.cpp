#include "cbf/bnc.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <numeric>
#include <random>
#include <set>

using namespace cbf;

namespace {

std::vector<ChiWord> all_chis(int n) {
  std::vector<ChiWord> out;
  for (int m = 0; m < (1 << n); ++m) {
    std::vector<Face> f;
    for (int k = 0; k < n; ++k) f.push_back(m >> k & 1 ? Face::r : Face::l);
    out.emplace_back(f);
  }
  return out;
}

// all set partitions of {0..n-1} as label vectors (restricted growth strings)
std::vector<std::vector<int>> set_partitions(int n) {
  std::vector<std::vector<int>> out;
  std::vector<int> a(n, 0);
  std::function<void(int, int)> rec = [&](int i, int mx) {
    if (i == n) {
      out.push_back(a);
      return;
    }
    for (int v = 0; v <= mx + 1; ++v) {
      a[i] = v;
      rec(i + 1, std::max(mx, v));
    }
  };
  if (n > 0) rec(1, 0);
  return out;
}

// crossing test directly on the order lefts ascending, rights descending
bool brute_bnc(const ChiWord& chi, const std::vector<int>& lab) {
  std::vector<int> order;
  for (int k = 0; k < chi.size(); ++k)
    if (chi.left(k)) order.push_back(k);
  for (int k = chi.size() - 1; k >= 0; --k)
    if (!chi.left(k)) order.push_back(k);
  int n = chi.size();
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      for (int c = b + 1; c < n; ++c)
        for (int d = c + 1; d < n; ++d) {
          int la = lab[order[a]], lb = lab[order[b]], lc = lab[order[c]], ld = lab[order[d]];
          if (la == lc && lb == ld && la != lb) return false;
        }
  return true;
}

bool refines(const Partition& s, const Partition& p) {
  auto ls = s.labels(), lp = p.labels();
  for (std::size_t i = 0; i < ls.size(); ++i)
    for (std::size_t j = 0; j < ls.size(); ++j)
      if (ls[i] == ls[j] && lp[i] != lp[j]) return false;
  return true;
}

}  // namespace

TEST(Bnc, CountsAreCatalanForEveryPattern) {
  for (int n = 1; n <= 7; ++n)
    for (const auto& chi : all_chis(n)) EXPECT_EQ(enumerate_bnc(chi).size(), catalan(n)) << chi.str();
}

TEST(Bnc, EnumerationMatchesBruteForceFilter) {
  for (int n = 1; n <= 6; ++n)
    for (const auto& chi : all_chis(n)) {
      std::set<std::string> brute, fast;
      for (const auto& lab : set_partitions(n))
        if (brute_bnc(chi, lab)) brute.insert(Partition::from_labels(chi, lab).str());
      for (const auto& p : enumerate_bnc(chi)) fast.insert(p.str());
      EXPECT_EQ(brute, fast) << chi.str();
    }
}

TEST(Bnc, EnumerationOrderIsDeterministic) {
  auto chi = ChiWord::parse("lrrl");
  auto a = enumerate_bnc(chi), b = enumerate_bnc(chi);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].str(), b[i].str());
}

TEST(Bnc, TwelvePointFixture) {
  // lefts at 1,2,4,6,7,9; rights at 3,5,8,10,11,12
  auto chi = ChiWord::parse("llrlrllrlrrr");
  auto order = chi_total_order(chi);
  std::vector<int> expect{0, 1, 3, 5, 6, 8, 11, 10, 9, 7, 4, 2};
  EXPECT_EQ(order, expect);
  auto rank = chi_ranks(chi);
  // among positions 3, 8, 10 the minimum in the order is 10
  int best = 2;
  for (int p : {7, 9})
    if (rank[p] < rank[best]) best = p;
  EXPECT_EQ(best + 1, 10);
  auto pi = Partition::from_json(chi, nlohmann::json::parse("[[1,2,4,6],[7,9,11,12],[3,5,8,10]]"));
  EXPECT_TRUE(is_bnc(pi));
  auto kinds = classify_blocks(pi);
  for (auto k : kinds) EXPECT_EQ(k, BlockKind::exterior);
  EXPECT_EQ(chi_intervals(pi).size(), 3u);
}

TEST(Bnc, CanonicalSerialization) {
  auto chi = ChiWord::parse("llll");
  auto p = Partition::from_labels(chi, {1, 0, 0, 1});
  EXPECT_EQ(p.str(), "[[1,4],[2,3]]");
  EXPECT_THROW(Partition::from_json(chi, nlohmann::json::parse("[[1,2],[2,3,4]]")), validation_error);
  EXPECT_THROW(ChiWord::parse("lxr"), validation_error);
}

TEST(Bnc, ClassicalMobiusValues) {
  const auto& L = lattice(ChiWord::parse("llll"));
  EXPECT_EQ(L.mobius(L.bottom(), L.top()), -5);
  const auto& L3 = lattice(ChiWord::parse("rrr"));
  EXPECT_EQ(L3.mobius(L3.bottom(), L3.top()), 2);
  // a pattern with a different order but the same lattice shape
  const auto& Lm = lattice(ChiWord::parse("lrlr"));
  EXPECT_EQ(Lm.mobius(Lm.bottom(), Lm.top()), -5);
}

TEST(Bnc, ZetaTimesMobiusIsDelta) {
  for (int n = 1; n <= 5; ++n)
    for (const auto& chi : all_chis(n)) {
      const auto& L = lattice(chi);
      for (int s = 0; s < L.size(); ++s)
        for (int p = 0; p < L.size(); ++p) {
          if (!L.leq_idx(s, p)) continue;
          long long acc = 0;
          for (int t = 0; t < L.size(); ++t)
            if (L.leq_idx(s, t) && L.leq_idx(t, p)) acc += L.mobius(t, p);
          EXPECT_EQ(acc, s == p ? 1 : 0);
        }
    }
}

TEST(Bnc, MobiusMatchesRecursiveDefinition) {
  for (const auto& chi : all_chis(5)) {
    const auto& L = lattice(chi);
    int top = L.top();
    // mu(p, top) by the downward recursion using only refinement
    std::vector<long long> mu(L.size(), 0);
    std::vector<int> idx(L.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return L.at(a).size() < L.at(b).size(); });
    for (int p : idx) {
      if (p == top) {
        mu[p] = 1;
        continue;
      }
      long long acc = 0;
      for (int q = 0; q < L.size(); ++q)
        if (q != p && refines(L.at(p), L.at(q))) acc += mu[q];
      mu[p] = -acc;
    }
    for (int p = 0; p < L.size(); ++p) EXPECT_EQ(L.mobius(p, top), mu[p]) << chi.str() << ' ' << L.at(p).str();
  }
}

TEST(Bnc, LeqIsRefinement) {
  for (const auto& chi : all_chis(4)) {
    auto ps = enumerate_bnc(chi);
    for (const auto& a : ps)
      for (const auto& b : ps) EXPECT_EQ(leq(a, b), refines(a, b));
  }
}

TEST(Bnc, JoinIsLeastUpperBound) {
  for (int n = 2; n <= 6; ++n) {
    std::mt19937_64 rng(n);
    auto chis = all_chis(n);
    for (int t = 0; t < 12; ++t) {
      const auto& chi = chis[rng() % chis.size()];
      auto ps = enumerate_bnc(chi);
      const auto& a = ps[rng() % ps.size()];
      const auto& b = ps[rng() % ps.size()];
      std::vector<Partition> ub;
      for (const auto& p : ps)
        if (refines(a, p) && refines(b, p)) ub.push_back(p);
      const Partition* least = nullptr;
      for (const auto& p : ub)
        if (std::all_of(ub.begin(), ub.end(), [&](const Partition& q) { return refines(p, q); })) least = &p;
      ASSERT_NE(least, nullptr);
      EXPECT_EQ(join(a, b).str(), least->str()) << chi.str();
    }
  }
}

TEST(Bnc, ExteriorBlocksAreTheIntervalEndpoints) {
  for (int n = 1; n <= 6; ++n)
    for (const auto& chi : all_chis(n)) {
      auto rank = chi_ranks(chi);
      for (const auto& p : enumerate_bnc(chi)) {
        auto kinds = classify_blocks(p);
        std::set<int> ext;
        auto lab = p.labels();
        for (const auto& I : chi_intervals(p)) {
          auto lo = *std::min_element(I.begin(), I.end(), [&](int x, int y) { return rank[x] < rank[y]; });
          auto hi = *std::max_element(I.begin(), I.end(), [&](int x, int y) { return rank[x] < rank[y]; });
          ext.insert(lab[lo]);
          ext.insert(lab[hi]);
        }
        for (int v = 0; v < p.size(); ++v)
          EXPECT_EQ(kinds[v] == BlockKind::exterior, ext.count(v) > 0) << chi.str() << ' ' << p.str();
      }
    }
}

TEST(Bnc, MergeAdjacentIsOnto) {
  for (int n = 2; n <= 6; ++n)
    for (const auto& chi : all_chis(n))
      for (int q = 0; q + 1 < n; ++q) {
        if (chi[q] != chi[q + 1]) continue;
        std::vector<int> keep;
        for (int k = 0; k < n; ++k)
          if (k != q + 1) keep.push_back(k);
        auto small = chi.restrict_to(keep);
        std::set<std::string> hit;
        for (const auto& s : enumerate_bnc(chi)) hit.insert(merge_adjacent(s, q).str());
        EXPECT_EQ(hit.size(), catalan(n - 1)) << chi.str() << " q=" << q;
        for (const auto& p : enumerate_bnc(small)) EXPECT_TRUE(hit.count(p.str())) << p.str();
      }
}

TEST(Bnc, SizeCapFromEnvironment) {
  setenv("CBF_MAX_N", "3", 1);
  EXPECT_THROW(enumerate_bnc(ChiWord::parse("llll")), size_limit_error);
  unsetenv("CBF_MAX_N");
  EXPECT_EQ(enumerate_bnc(ChiWord::parse("llll")).size(), 14u);
}
