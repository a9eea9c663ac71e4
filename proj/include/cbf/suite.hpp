#pragma once

// The acceptance list as callable checks; shared by the acceptance binary and `cbf suite acceptance`.

#include "cbf/limits.hpp"
#include "cbf/properties.hpp"

#include <chrono>
#include <future>
#include <thread>

namespace cbf {

struct CriterionResult {
  int id = 0;
  std::string title;
  Report report;
  nlohmann::json info;
  double seconds = 0;
  double budget = 0;  // seconds

  bool pass() const { return report.pass() && (budget <= 0 || seconds <= budget); }

  std::string line() const {
    std::ostringstream o;
    o << (pass() ? "PASS" : "FAIL") << "  criterion " << id << ": " << title << "  [" << report.checks.size()
      << " checks, " << report.failures() << " failed, " << std::fixed << std::setprecision(2) << seconds << " s / "
      << budget << " s]";
    if (!info.empty()) o << "  " << info.dump();
    return o.str();
  }
  nlohmann::json to_json() const {
    return {{"id", id},           {"title", title}, {"pass", pass()},     {"seconds", seconds},
            {"budget", budget}, {"info", info},   {"report", report.to_json(5)}};
  }
};

struct SuiteOptions {
  std::uint64_t seed = 20240601;
  int seeds = 25;         // criteria 3, 4 and 10
  int seeds_n5 = 5;       // criterion 4 at n = 5
  int instances = 50;     // criterion 7
  int words = 100;        // criterion 5
  int threads = 0;        // 0: hardware concurrency
  double tol = 1e-9;      // float mode only
  double lambda_num = 1, lambda_den = 2;
};

namespace detail {

// runs fn(i) for i in [0, n) across threads; results stay in index order
template <class R, class Fn>
std::vector<R> parallel_map(int n, int threads, Fn&& fn) {
  int t = threads > 0 ? threads : std::max(1u, std::thread::hardware_concurrency());
  std::vector<R> out(n);
  std::atomic<int> next{0};
  std::vector<std::future<void>> jobs;
  std::mutex err_m;
  std::exception_ptr err;
  for (int k = 0; k < std::min(t, std::max(n, 1)); ++k)
    jobs.push_back(std::async(std::launch::async, [&] {
      for (int i; (i = next++) < n;) {
        try {
          out[i] = fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> g(err_m);
          if (!err) err = std::current_exception();
        }
      }
    }));
  for (auto& j : jobs) j.get();
  if (err) std::rethrow_exception(err);
  return out;
}

inline std::vector<ChiWord> all_chis(int n) {
  std::vector<ChiWord> out;
  for (int m = 0; m < (1 << n); ++m) {
    std::vector<Face> f;
    for (int k = 0; k < n; ++k) f.push_back(m >> k & 1 ? Face::r : Face::l);
    out.emplace_back(f);
  }
  return out;
}

inline ChiWord random_chi(int n, std::mt19937_64& rng) {
  std::vector<Face> f;
  for (int k = 0; k < n; ++k) f.push_back(rng() & 1 ? Face::r : Face::l);
  return ChiWord(f);
}

template <class T>
OperatorWord<T> random_word(const std::vector<Factor<T>>& fs, const ChiWord& chi, const OmegaWord& om,
                            std::mt19937_64& rng, const std::map<int, int>& family_map = {}) {
  OperatorWord<T> w{chi, om, {}};
  for (int k = 0; k < chi.size(); ++k) {
    int f = family_map.empty() ? om[k] : family_map.at(om[k]);
    w.entries.push_back(Entry<T>(random_face_op(fs[f], om[k], chi[k], rng)));
  }
  return w;
}

// the 2-factor setup shared by criteria 3, 4 and 10
template <class T>
struct TwoFactorInstance {
  std::shared_ptr<const AlgebraContext<T>> ctx;
  std::vector<Factor<T>> fs;

  static TwoFactorInstance make(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto ctx = make_context<T>(2, 4);
    std::vector<Factor<T>> fs;
    for (int k = 0; k < 2; ++k) fs.push_back(random_factor(ctx, 1 + static_cast<int>(rng() % 2), rng));
    return {ctx, fs};
  }

  // each family evaluated in its own one-factor space
  std::shared_ptr<const ExpectationPair<T>> separate(int L) const {
    std::map<int, std::shared_ptr<const ExpectationPair<T>>> m;
    for (int k = 0; k < 2; ++k) m[k] = free_product<T>({fs[k]}, L, {{k, 0}});
    return std::make_shared<RoutedPair<T>>(m);
  }
};

template <class Fn>
CriterionResult timed(int id, std::string title, double budget, Fn&& fn) {
  CriterionResult r{id, std::move(title), {}, {}, 0, budget};
  auto t0 = std::chrono::steady_clock::now();
  try {
    fn(r);
  } catch (const std::exception& e) {
    Check c{"criterion raised an exception", {}, {}, 0, {{"error", e.what()}}, false};
    r.report.add(c);
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

template <class T>
Report oracle_seed(std::uint64_t seed, int L, double tol, std::vector<std::pair<Matrix<T>, Matrix<T>>>* values = nullptr) {
  Report r{"oracle", {}, {}};
  auto inst = TwoFactorInstance<T>::make(seed);
  auto sp = free_product(inst.fs, L);
  Engine<T> per(inst.separate(L));
  std::mt19937_64 rng(seed * 31 + 7);
  for (int n = 1; n <= 4; ++n)
    for (const auto& chi : all_chis(n))
      for (const auto& om : all_omegas(2, n)) {
        auto w = random_word(inst.fs, chi, om, rng);
        auto [e, f] = sp->EF(w.entries);
        auto ce = compare("universal E formula equals the free product expectation", cbifree_moment_E(per, w), e, tol);
        auto cf = compare("universal F formula equals the free product expectation", cbifree_moment_F(per, w), f, tol);
        ce.witness = cf.witness = {{"seed", seed}, {"chi", chi.str()}, {"omega", om}};
        r.add(ce);
        r.add(cf);
        if (values) values->push_back({e, f});
      }
  return r;
}

}  // namespace detail

// 1. |BNC(chi)| = Catalan(n)
inline CriterionResult criterion_lattice_counts(const SuiteOptions& o) {
  return detail::timed(1, "lattice counts |BNC(chi)| = Catalan(n), n <= 8", 30, [&](CriterionResult& r) {
    std::mt19937_64 rng(o.seed);
    int count = 0;
    for (int n = 1; n <= 8; ++n) {
      std::vector<ChiWord> chis;
      if (n <= 5)
        chis = detail::all_chis(n);
      else
        for (int i = 0; i < 50; ++i) chis.push_back(detail::random_chi(n, rng));
      for (const auto& chi : chis) {
        auto sz = enumerate_bnc(chi).size();
        Check c{"|BNC(chi)| = Catalan(n)", std::to_string(sz), std::to_string(catalan(n)), 0, {{"chi", chi.str()}},
                sz == catalan(n)};
        r.report.add(c);
        ++count;
      }
    }
    r.info = {{"patterns", count}};
  });
}

// 2. zeta * mu = delta on full lattices
inline CriterionResult criterion_mobius(const SuiteOptions&) {
  return detail::timed(2, "Moebius inversion zeta * mu = delta, n <= 6, all chi", 60, [&](CriterionResult& r) {
    long long pairs = 0;
    for (int n = 1; n <= 6; ++n)
      for (const auto& chi : detail::all_chis(n)) {
        const auto& L = lattice(chi);
        int sz = L.size(), bad = 0;
        for (int s = 0; s < sz; ++s)
          for (int p = 0; p < sz; ++p) {
            if (!L.leq_idx(s, p)) continue;
            long long acc = 0;
            for (int t = 0; t < sz; ++t)
              if (L.leq_idx(s, t) && L.leq_idx(t, p)) acc += L.mobius(t, p);
            bad += acc != (s == p ? 1 : 0);
            ++pairs;
          }
        Check c{"sum_{sigma <= tau <= pi} mu(tau, pi) = delta(sigma, pi)", {}, {}, static_cast<double>(bad),
                {{"chi", chi.str()}, {"lattice", sz}}, bad == 0};
        r.report.add(c);
      }
    r.info = {{"interval_pairs", pairs}};
  });
}

// 3. universal moment formulas against the free product
inline CriterionResult criterion_oracle(const SuiteOptions& o) {
  return detail::timed(3, "oracle equivalence E and F, 2-factor products, n <= 4", 600, [&](CriterionResult& r) {
    auto ex = detail::parallel_map<Report>(o.seeds, o.threads, [&](int i) {
      return detail::oracle_seed<rational>(o.seed + i, 4, 0);
    });
    auto fl = detail::parallel_map<Report>(o.seeds, o.threads, [&](int i) {
      return detail::oracle_seed<double>(o.seed + i, 4, o.tol);
    });
    for (auto& x : ex) r.report.merge(x);
    Report fr{"float", {}, {}};
    for (auto& x : fl) fr.merge(x);
    r.report.merge(fr);
    r.info = {{"seeds", o.seeds}, {"exact_checks", r.report.checks.size() - fr.checks.size()},
              {"float_checks", fr.checks.size()}, {"float_worst", fr.worst()}};
  });
}

// 4. mixed cumulants vanish; a non-free control does not
inline CriterionResult criterion_vanishing(const SuiteOptions& o) {
  return detail::timed(4, "mixed cumulants vanish for non-constant omega, n <= 5", 300, [&](CriterionResult& r) {
    using Q = rational;
    auto rep = detail::parallel_map<Report>(o.seeds, o.threads, [&](int i) {
      Report out{"vanishing", {}, {}};
      auto inst = detail::TwoFactorInstance<Q>::make(o.seed + i);
      int nmax = i < o.seeds_n5 ? 5 : 4;
      auto sp = free_product(inst.fs, nmax);
      Engine<Q> eng(sp);
      std::mt19937_64 rng((o.seed + i) * 131 + 1);
      for (int n = 2; n <= nmax; ++n)
        for (const auto& chi : detail::all_chis(n))
          for (const auto& om : all_omegas(2, n)) {
            if (omega_constant(om)) continue;
            auto w = detail::random_word(inst.fs, chi, om, rng);
            auto m = mixed_cumulant_test(eng, w);
            for (auto& c : m.checks) c.witness["seed"] = o.seed + i;
            out.merge(m);
          }
      return out;
    });
    for (auto& x : rep) r.report.merge(x);
    // negative control: one factor carrying both family labels
    auto inst = detail::TwoFactorInstance<Q>::make(o.seed);
    auto sp = free_product<Q>({inst.fs[0]}, 4, {{0, 0}, {1, 0}});
    Engine<Q> eng(sp);
    std::mt19937_64 rng(o.seed + 99);
    int nonzero = 0, tried = 0;
    nlohmann::json witness;
    for (int n = 2; n <= 3; ++n)
      for (const auto& chi : detail::all_chis(n))
        for (const auto& om : all_omegas(2, n)) {
          if (omega_constant(om)) continue;
          auto w = detail::random_word<Q>({inst.fs[0]}, chi, om, rng, {{0, 0}, {1, 0}});
          auto m = mixed_cumulant_test(eng, w);
          ++tried;
          if (!m.pass()) {
            if (!nonzero) witness = {{"chi", chi.str()}, {"omega", om}, {"worst", m.worst()}};
            ++nonzero;
          }
        }
    Check c{"negative control: non-free inputs give a nonzero mixed cumulant", std::to_string(nonzero), ">0", 0,
            witness, nonzero > 0};
    r.report.add(c);
    r.info = {{"seeds", o.seeds}, {"seeds_n5", o.seeds_n5}, {"control_nonzero", nonzero}, {"control_words", tried}};
  });
}

// 5. moment <-> cumulant round trip
inline CriterionResult criterion_round_trip(const SuiteOptions& o) {
  return detail::timed(5, "moment-cumulant round trip on random words, n <= 5", 120, [&](CriterionResult& r) {
    using Q = rational;
    int per = 10, jobs = (o.words + per - 1) / per;
    auto rep = detail::parallel_map<Report>(jobs, o.threads, [&](int j) {
      Report out{"round-trip", {}, {}};
      auto inst = detail::TwoFactorInstance<Q>::make(o.seed + 1000 + j);
      auto sp = free_product(inst.fs, 5);
      Engine<Q> eng(sp);
      Engine<Q> fresh(sp, false);
      std::mt19937_64 rng(o.seed + 5000 + j);
      for (int k = 0; k < per && j * per + k < o.words; ++k) {
        int n = 1 + static_cast<int>(rng() % 5);
        auto chi = detail::random_chi(n, rng);
        OmegaWord om;
        for (int x = 0; x < n; ++x) om.push_back(static_cast<int>(rng() % 2));
        auto w = detail::random_word(inst.fs, chi, om, rng);
        nlohmann::json wit{{"chi", chi.str()}, {"omega", om}};
        const auto& L = lattice(chi);
        auto [e, f] = sp->EF(w.entries);
        BElem<Q> se = inst.ctx->zero_B(), kinv = inst.ctx->zero_B();
        DElem<Q> sf = inst.ctx->zero_D();
        int top = L.top();
        for (int p = 0; p < L.size(); ++p) {
          se += eng.kappa_pi(chi, w.entries, L.at(p));
          sf += eng.K_pi(chi, w.entries, L.at(p));
          kinv += eng.E_pi(chi, w.entries, L.at(p)) * scalar_traits<Q>::from_int(L.mobius(p, top));
        }
        std::vector<Check> cs{compare("E = sum_pi kappa_pi", se, e), compare("F = sum_pi K_pi", sf, f),
                              compare("kappa_1 = sum_pi mu(pi, 1) E_pi", kinv, eng.kappa1(chi, w.entries))};
        CumulantTables<Q> tab{[&](const ChiWord& c, const OpWord<Q>& x) { return fresh.kappa1(c, x); },
                              [&](const ChiWord& c, const OpWord<Q>& x) { return fresh.K1(c, x); }};
        auto [e2, f2] = moments_from_cumulants(eng, tab, chi, w.entries);
        cs.push_back(compare("moments rebuilt from cumulant tables (E)", e2, e));
        cs.push_back(compare("moments rebuilt from cumulant tables (F)", f2, f));
        for (auto& c : cs) {
          c.witness = wit;
          out.add(c);
        }
      }
      return out;
    });
    for (auto& x : rep) r.report.merge(x);
    r.info = {{"words", o.words}};
  });
}

// 6. structural property suite
inline CriterionResult criterion_properties(const SuiteOptions& o) {
  return detail::timed(6, "B-operator vanishing, product cumulants, pair axioms, swap/tail lemmas", 300,
                       [&](CriterionResult& r) {
    using Q = rational;
    std::mt19937_64 rng(o.seed + 6);
    auto ctx = make_context<Q>(2, 4);
    std::vector<Factor<Q>> fs{random_factor(ctx, 2, rng), random_factor(ctx, 2, rng)};
    auto sp = free_product(fs, 6);
    Engine<Q> eng(sp);
    std::vector<OperatorWord<Q>> words;
    for (std::string cs : {"l", "r", "lr", "rl", "llr", "rlr", "lrl", "lrrl", "rrll", "lrlr"}) {
      auto chi = ChiWord::parse(cs);
      OmegaWord om;
      for (int k = 0; k < chi.size(); ++k) om.push_back(static_cast<int>(rng() % 2));
      words.push_back(detail::random_word(fs, chi, om, rng));
    }
    // B-operator vanishing
    for (const auto& w : words) {
      if (w.n() < 2) continue;
      for (int q = 0; q < w.n(); ++q) {
        auto w2 = w;
        auto b = ctx->random_b(rng);
        w2.entries[q] = Entry<Q>(w.chi.left(q) ? Atom<Q>::LB(b) : Atom<Q>::RB(b));
        r.report.merge(b_operator_vanishing_check(eng, w2, q));
      }
    }
    // product formula over every grouping and face assignment
    int groupings = 0;
    for (int n = 2; n <= 4; ++n)
      for (int mask = 0; mask < (1 << (n - 1)); ++mask) {
        std::vector<int> k{0};
        for (int x = 1; x < n; ++x)
          if (mask >> (x - 1) & 1) k.push_back(x);
        k.push_back(n);
        int m = static_cast<int>(k.size()) - 1;
        for (int cm = 0; cm < (1 << m); ++cm) {
          std::vector<Face> f;
          for (int p = 0; p < m; ++p)
            for (int x = k[p]; x < k[p + 1]; ++x) f.push_back(cm >> p & 1 ? Face::r : Face::l);
          ChiWord ch(f);
          OmegaWord om;
          for (int x = 0; x < n; ++x) om.push_back(static_cast<int>(rng() % 2));
          auto w = detail::random_word(fs, ch, om, rng);
          r.report.merge(product_cumulant_check(eng, ch, w.entries, k));
          r.report.merge(merge_lemma_check(eng, ch, w.entries));
          ++groupings;
        }
      }
    // pair characterizations
    auto mp = moment_pair(eng);
    auto cp = cumulant_pair(eng);
    r.report.merge(pair_axiom_checks(mp, *ctx, words, rng, PairKind::moment));
    r.report.merge(pair_axiom_checks(cp, *ctx, words, rng, PairKind::cumulant));
    auto bad = pair_axiom_checks(corrupted(mp, ctx, o.seed), *ctx, words, rng, PairKind::none);
    Check neg{"negative control: perturbed F breaks the pair axioms", std::to_string(bad.failures()), ">0", 0, {},
              bad.failures() > 0};
    r.report.add(neg);
    for (const auto& w : words) r.report.merge(reduction_soundness_check(eng, w.chi, w.entries));
    // swap and tail lemmas on constructed witnesses
    std::vector<Factor<Q>> fs2{random_factor(ctx, 3, rng), random_factor(ctx, 1, rng)};
    auto sp2 = free_product(fs2, 6);
    Engine<Q> e2(sp2);
    std::vector<Entry<Q>> gens;
    for (int f = 0; f < 2; ++f)
      for (Face fc : {Face::l, Face::r}) gens.push_back(Entry<Q>(random_face_op(fs2[f], f, fc, rng)));
    gens.push_back(Entry<Q>(Atom<Q>::LB(ctx->random_b(rng))));
    gens.push_back(Entry<Q>(Atom<Q>::RB(ctx->random_b(rng))));
    int applicable = 0;
    auto lemma = [&](Report rep) {
      bool app = rep.extra.value("applicable", false);
      applicable += app;
      Check c{rep.name + " witness satisfies the hypotheses", {}, {}, 0, rep.extra, app};
      r.report.add(c);
      r.report.merge(rep);
    };
    auto [X, Y] = tensor_split_ops<Q>(2, 2, 2, 0, rng);
    lemma(swap_check(e2, ChiWord::parse("llrr"), {gens[0], Entry<Q>(X), Entry<Q>(Y), gens[3]}, 1, gens));
    auto b = ctx->random_b(rng);
    lemma(swap_check(e2, ChiWord::parse("llrr"),
                     {gens[0], Entry<Q>(Atom<Q>::LB(b)), Entry<Q>(Atom<Q>::RB(ctx->random_b(rng))), gens[3]}, 1, gens));
    auto X2 = random_face_op(fs2[0], 0, Face::l, rng);
    auto Ym = matched_right(X2, 2, rng);
    lemma(tail_check(e2, ChiWord::parse("rll"), {gens[1], gens[2], Entry<Q>(X2)}, Entry<Q>(Ym), gens));
    lemma(tail_check(e2, ChiWord::parse("rll"), {gens[1], gens[2], Entry<Q>(Atom<Q>::LB(b))}, Entry<Q>(Atom<Q>::RB(b)),
                     gens));
    r.info = {{"groupings", groupings}, {"control_failures", bad.failures()}, {"lemma_witnesses", applicable}};
  });
}

// 7. cumulant transforms and the partial R-transform identity
inline CriterionResult criterion_rtransform(const SuiteOptions& o) {
  return detail::timed(7, "cumulant transforms and partial R-transform to degree 4, B = M_2 in D = M_4", 600,
                       [&](CriterionResult& r) {
    using Q = rational;
    const int N = 4;
    auto rep = detail::parallel_map<Report>(o.instances, o.threads, [&](int i) {
      Report out{"instance", {}, {}};
      std::mt19937_64 rng(o.seed + 7000 + i);
      auto ctx = make_context<Q>(2, 4);
      std::vector<Factor<Q>> fs{random_factor(ctx, 1 + static_cast<int>(rng() % 2), rng),
                                random_factor(ctx, 1 + static_cast<int>(rng() % 2), rng)};
      auto sp = free_product(fs, N + 1);
      Engine<Q> eng(sp);
      auto p0 = random_pair(*sp, 0, rng()), p1 = random_pair(*sp, 1, rng());
      Entry<Q> Zl(p0.left[0]), Zr(p0.right[0]);
      auto b = ctx->random_b(rng), c = ctx->random_b(rng), d = ctx->random_b(rng);
      out.merge(check_cumulant_transform(eng, Zl, Face::l, b, N));
      out.merge(check_cumulant_transform(eng, Zr, Face::r, d, N));
      out.merge(check_partial_R(eng, Zl, Zr, b, c, d, N));
      if (i % 5 == 0)
        out.merge(check_additivity(eng, Zl, Zr, Entry<Q>(p1.left[0]), Entry<Q>(p1.right[0]), b, c, d, N));
      for (auto& ch : out.checks) ch.witness["instance"] = i;
      return out;
    });
    for (auto& x : rep) r.report.merge(x);
    // scalar degeneration
    std::mt19937_64 rng(o.seed + 77);
    auto c1 = make_context<Q>(1, 1);
    std::vector<Factor<Q>> f1{random_factor(c1, 2, rng)};
    auto s1 = free_product(f1, N + 1);
    Engine<Q> e1(s1);
    auto q = random_pair(*s1, 0, rng());
    auto one = Matrix<Q>::identity(1);
    auto sc = check_partial_R(e1, Entry<Q>(q.left[0]), Entry<Q>(q.right[0]), one, one, one, N);
    sc.name = "scalar-degeneration";
    r.report.merge(sc);
    r.report.merge(check_cumulant_transform(e1, Entry<Q>(q.left[0]), Face::l, one, N));
    // B = D with F = E
    auto c2 = make_context<Q>(2, 2);
    std::vector<Factor<Q>> f2{vacuum_factor(c2, 2)};
    auto s2 = free_product(f2, N + 1);
    Engine<Q> e2(s2);
    auto q2 = random_pair(*s2, 0, rng());
    r.report.merge(check_bifree_degeneration(e2, Entry<Q>(q2.left[0]), Entry<Q>(q2.right[0]), c2->random_b(rng),
                                             c2->random_b(rng), c2->random_b(rng), N));
    r.info = {{"instances", o.instances}, {"degree", N}};
  });
}

// 8. central limit scaling
inline CriterionResult criterion_clt(const SuiteOptions& o) {
  return detail::timed(8, "central limit: order-2 cumulants equal covariance, 2^-(n-2) scaling for n = 3..5", 120,
                       [&](CriterionResult& r) {
    using Q = rational;
    std::mt19937_64 rng(o.seed + 8);
    auto ctx = make_context<Q>(2, 4);
    auto f = paired_factor(ctx, 1, rng);
    auto model = IidModel<Q>::random(f, {Face::l, Face::r}, o.seed + 88, true);
    CltOptions co;
    co.max_order = 5;
    co.seed = o.seed + 888;
    auto res = clt_check(model, co);
    r.report = res.report;
    r.info = {{"ladder", co.ladder}, {"max_order", co.max_order}};
  });
}

// 9. Poisson-type limit and the 1/N defect
inline CriterionResult criterion_poisson(const SuiteOptions& o) {
  return detail::timed(9, "compound Poisson limit and 1/N moment-cumulant defect, N in {8,16,32,64}", 120,
                       [&](CriterionResult& r) {
    using Q = rational;
    std::mt19937_64 rng(o.seed + 9);
    auto ctx = make_context<Q>(2, 4);
    auto f = random_factor(ctx, 2, rng);
    auto sp = free_product<Q>({f}, 3);
    auto model = IidModel<Q>::random(f, {Face::l, Face::r}, o.seed + 99, false);
    LadderOptions lo;
    lo.seed = o.seed + 999;
    Q lambda = Q(static_cast<long>(o.lambda_num)) / Q(static_cast<long>(o.lambda_den));
    auto res = poisson_check<Q>(sp, model.copy(0), lambda, lo);
    r.report = res.report;
    double lo_s = 0, hi_s = -2;
    for (const auto& c : res.report.checks)
      if (c.witness.contains("slope") && c.witness["slope"].is_number()) {
        double s = c.witness["slope"];
        lo_s = std::min(lo_s, s), hi_s = std::max(hi_s, s);
      }
    r.info = {{"lambda", lambda.get_str()}, {"slope_range", {lo_s, hi_s}}};
  });
}

// 10. oracle values do not move when the truncation grows
inline CriterionResult criterion_truncation(const SuiteOptions& o) {
  return detail::timed(10, "truncation soundness: oracle results unchanged at max_word_len + 1", 300,
                       [&](CriterionResult& r) {
    using Q = rational;
    auto rep = detail::parallel_map<Report>(o.seeds, o.threads, [&](int i) {
      std::vector<std::pair<Matrix<Q>, Matrix<Q>>> a, b;
      Report out = detail::oracle_seed<Q>(o.seed + i, 4, 0, &a);
      out.merge(detail::oracle_seed<Q>(o.seed + i, 5, 0, &b));
      Report same{"same", {}, {}};
      for (std::size_t k = 0; k < a.size(); ++k) {
        auto ce = compare("E unchanged at max_word_len + 1", a[k].first, b[k].first, 0);
        auto cf = compare("F unchanged at max_word_len + 1", a[k].second, b[k].second, 0);
        ce.witness = cf.witness = {{"seed", o.seed + i}, {"word", k}};
        same.add(ce);
        same.add(cf);
      }
      out.merge(same);
      return out;
    });
    for (auto& x : rep) r.report.merge(x);
    r.info = {{"seeds", o.seeds}, {"max_word_len", {4, 5}}};
  });
}

inline std::vector<CriterionResult> run_acceptance(const SuiteOptions& o, const std::set<int>& only = {}) {
  using Fn = CriterionResult (*)(const SuiteOptions&);
  std::vector<Fn> all{criterion_lattice_counts, criterion_mobius,     criterion_oracle,
                      criterion_vanishing,      criterion_round_trip, criterion_properties,
                      criterion_rtransform,     criterion_clt,        criterion_poisson,
                      criterion_truncation};
  std::vector<CriterionResult> out;
  for (std::size_t i = 0; i < all.size(); ++i)
    if (only.empty() || only.count(static_cast<int>(i) + 1)) out.push_back(all[i](o));
  return out;
}

}  // namespace cbf
