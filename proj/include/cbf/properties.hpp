#pragma once

// Structural checks on moment/cumulant pairs: B-operator vanishing, cumulants
// of products, the pair axioms, and the swap/tail lemmas.

#include "cbf/cumulants.hpp"

namespace cbf {

// a partition-indexed pair (psi, Phi) given as black boxes
template <class T>
struct PairFunctions {
  std::string name;
  std::function<BElem<T>(const ChiWord&, const OpWord<T>&, const Partition&)> psi;
  std::function<DElem<T>(const ChiWord&, const OpWord<T>&, const Partition&)> Phi;
};

template <class T>
PairFunctions<T> moment_pair(Engine<T>& eng) {
  return {"(E,F)", [&eng](const ChiWord& c, const OpWord<T>& w, const Partition& p) { return eng.E_pi(c, w, p); },
          [&eng](const ChiWord& c, const OpWord<T>& w, const Partition& p) { return eng.F_pi(c, w, p); }};
}

template <class T>
PairFunctions<T> cumulant_pair(Engine<T>& eng) {
  return {"(kappa,K)",
          [&eng](const ChiWord& c, const OpWord<T>& w, const Partition& p) { return eng.kappa_pi(c, w, p); },
          [&eng](const ChiWord& c, const OpWord<T>& w, const Partition& p) { return eng.K_pi(c, w, p); }};
}

// Phi_pi + delta(pi) for pi != 1, delta a fixed random D-element per partition
template <class T>
PairFunctions<T> corrupted(PairFunctions<T> base, std::shared_ptr<const AlgebraContext<T>> ctx, std::uint64_t seed) {
  auto phi = base.Phi;
  base.name += "+noise";
  base.Phi = [phi, ctx, seed](const ChiWord& c, const OpWord<T>& w, const Partition& p) {
    auto v = phi(c, w, p);
    if (p.is_one()) return v;
    std::mt19937_64 rng(seed ^ std::hash<std::string>{}(p.key()));
    return v + random_matrix<T>(rng, ctx->dim_D(), ctx->dim_D());
  };
  return base;
}

enum class PairKind { none, moment, cumulant };

namespace detail {

// (chi without q, word with Z_q Z_{q+1} as one entry); 0-based q
template <class T>
std::pair<ChiWord, OpWord<T>> merge_entries(const ChiWord& chi, const OpWord<T>& w, int q) {
  if (chi[q] != chi[q + 1]) throw face_error("merged entries must share a face");
  OpWord<T> out;
  for (int k = 0; k < static_cast<int>(w.size()); ++k) {
    if (k == q) {
      out.push_back(w[q] * w[q + 1]);
      ++k;
    } else {
      out.push_back(w[k]);
    }
  }
  std::vector<int> keep;
  for (int k = 0; k < chi.size(); ++k)
    if (k != q) keep.push_back(k);
  return {chi.restrict_to(keep), out};
}

template <class T>
nlohmann::json word_witness(const ChiWord& chi, const Partition* pi = nullptr, int pos = -1) {
  nlohmann::json j{{"chi", chi.str()}};
  if (pi) j["pi"] = pi->to_json();
  if (pos >= 0) j["position"] = pos + 1;
  return j;
}

}  // namespace detail

// kappa_1 and K_1 vanish when some entry is L_b (left slot) or R_b (right slot)
template <class T>
Report b_operator_vanishing_check(Engine<T>& eng, const OperatorWord<T>& w, int q, double tol = 1e-9) {
  w.validate();
  if (w.n() < 2) throw validation_error("B-operator vanishing needs n >= 2");
  const auto& e = w.entries.at(q);
  bool ok = e.terms.size() == 1 && e.terms[0].atoms.size() == 1 && e.terms[0].atoms[0].is_b();
  if (!ok) throw validation_error("entry is not a single B-operator");
  if (e.terms[0].atoms[0].face() != w.chi[q]) throw face_error("B-operator face differs from chi at that slot");
  Report r{"b-operator-vanishing", {}, {}};
  auto c1 = expect_zero("kappa_1 with B-operator entry = 0", eng.kappa1(w.chi, w.entries), tol);
  auto c2 = expect_zero("K_1 with B-operator entry = 0", eng.K1(w.chi, w.entries), tol);
  c1.witness = c2.witness = detail::word_witness<T>(w.chi, nullptr, q);
  r.add(c1);
  r.add(c2);
  return r;
}

// grouping 0 = k(0) < ... < k(m) = n; chi_hat must be constant on each group
template <class T>
Report product_cumulant_check(Engine<T>& eng, const ChiWord& chi_hat, const OpWord<T>& w, const std::vector<int>& k,
                              double tol = 1e-9) {
  int n = chi_hat.size();
  if (k.size() < 2 || k.front() != 0 || k.back() != n) throw validation_error("grouping must run from 0 to n");
  for (std::size_t p = 1; p < k.size(); ++p)
    if (k[p] <= k[p - 1]) throw validation_error("grouping must be strictly increasing");
  int m = static_cast<int>(k.size()) - 1;
  std::vector<Face> fm;
  std::vector<int> lab(n);
  OpWord<T> grouped;
  for (int p = 0; p < m; ++p) {
    for (int x = k[p]; x < k[p + 1]; ++x) {
      if (chi_hat[x] != chi_hat[k[p]]) throw face_error("group mixes faces");
      lab[x] = p;
    }
    Entry<T> prod = w[k[p]];
    for (int x = k[p] + 1; x < k[p + 1]; ++x) prod = prod * w[x];
    grouped.push_back(std::move(prod));
    fm.push_back(chi_hat[k[p]]);
  }
  ChiWord chi(fm);
  auto zero_hat = Partition::from_labels(chi_hat, lab);
  auto one_hat = Partition::one(chi_hat);
  DElem<T> rhs = eng.ctx().zero_D();
  int terms = 0;
  for (const auto& s : lattice(chi_hat).elements())
    if (join(s, zero_hat) == one_hat) rhs += eng.K_pi(chi_hat, w, s), ++terms;
  Report r{"product-cumulants", {}, {}};
  auto c = compare("K_1(grouped) = sum over sigma v 0hat = 1 of K_sigma", eng.K1(chi, grouped), rhs, tol);
  c.witness = {{"chi", chi.str()}, {"chi_hat", chi_hat.str()}, {"grouping", k}, {"terms", terms}};
  r.add(c);
  return r;
}

// K_pi(.., Z_q Z_{q+1}, ..) = sum over sigma|_{q=q+1} = pi of K_sigma, for every pi and every eligible q
template <class T>
Report merge_lemma_check(Engine<T>& eng, const ChiWord& chi, const OpWord<T>& w, double tol = 1e-9) {
  Report r{"merge-lemma", {}, {}};
  const auto& L = lattice(chi);
  for (int q = 0; q + 1 < chi.size(); ++q) {
    if (chi[q] != chi[q + 1]) continue;
    auto [mchi, mw] = detail::merge_entries(chi, w, q);
    std::map<std::string, std::pair<Partition, DElem<T>>> sums;
    for (const auto& s : L.elements()) {
      auto p = merge_adjacent(s, q);
      auto it = sums.find(p.str());
      if (it == sums.end()) it = sums.emplace(p.str(), std::make_pair(p, eng.ctx().zero_D())).first;
      it->second.second += eng.K_pi(chi, w, s);
    }
    for (auto& [key, pv] : sums) {
      auto c = compare("K_pi(merged) = sum over preimages", eng.K_pi(mchi, mw, pv.first), pv.second, tol);
      c.witness = detail::word_witness<T>(chi, &pv.first, q);
      r.add(c);
    }
  }
  return r;
}

namespace detail {

template <class T>
OpWord<T> with_b(const OpWord<T>& w, int pos, bool append, bool left, const BElem<T>& b) {
  return apply_insertion(w, Insertion{pos, append, left}, b);
}

}  // namespace detail

// the four bi-multiplicativity conditions (the last one in its Phi form) on each word,
// then the moment-pair or cumulant-pair characterization if asked
template <class T>
Report pair_axiom_checks(const PairFunctions<T>& pf, const AlgebraContext<T>& ctx,
                         const std::vector<OperatorWord<T>>& words, std::mt19937_64& rng, PairKind kind,
                         double tol = 1e-9) {
  Report r{"pair-axioms " + pf.name, {}, {}};
  auto D = [&](const BElem<T>& b) { return ctx.b_to_d(b); };
  auto both = [&](const std::string& what, const BElem<T>& a, const BElem<T>& b, const DElem<T>& A,
                  const DElem<T>& B, nlohmann::json wit) {
    auto c1 = compare("psi " + what, a, b, tol);
    auto c2 = compare("Phi " + what, A, B, tol);
    c1.witness = c2.witness = std::move(wit);
    r.add(c1);
    r.add(c2);
  };
  for (const auto& ow : words) {
    const auto& chi = ow.chi;
    const auto& w = ow.entries;
    int n = chi.size();
    auto one = Partition::one(chi);
    auto psi1 = [&](const OpWord<T>& x) { return pf.psi(chi, x, one); };
    auto Phi1 = [&](const OpWord<T>& x) { return pf.Phi(chi, x, one); };

    // (1) trailing B-operator
    {
      auto b = ctx.random_b(rng);
      bool l = chi.left(n - 1);
      int q = -1;
      for (int k = 0; k < n; ++k)
        if (chi[k] != chi[n - 1]) q = k;
      auto lw = detail::with_b(w, n - 1, true, l, b);
      BElem<T> rb;
      DElem<T> rB;
      if (q >= 0) {
        auto rw = detail::with_b(w, q, true, !l, b);
        rb = psi1(rw);
        rB = Phi1(rw);
      } else if (l) {
        rb = psi1(w) * b;
        rB = Phi1(w) * D(b);
      } else {
        rb = b * psi1(w);
        rB = D(b) * Phi1(w);
      }
      both("condition (1)", psi1(lw), rb, Phi1(lw), rB, detail::word_witness<T>(chi, nullptr, n - 1));
    }

    // (2) leading B-operator on each slot
    for (int p = 0; p < n; ++p) {
      auto b = ctx.random_b(rng);
      bool l = chi.left(p);
      int q = -1;
      for (int k = 0; k < p; ++k)
        if (chi[k] == chi[p]) q = k;
      auto lw = detail::with_b(w, p, false, l, b);
      BElem<T> rb;
      DElem<T> rB;
      if (q >= 0) {
        auto rw = detail::with_b(w, q, true, l, b);
        rb = psi1(rw);
        rB = Phi1(rw);
      } else if (l) {
        rb = b * psi1(w);
        rB = D(b) * Phi1(w);
      } else {
        rb = psi1(w) * b;
        rB = Phi1(w) * D(b);
      }
      both("condition (2)", psi1(lw), rb, Phi1(lw), rB, detail::word_witness<T>(chi, nullptr, p));
    }

    auto rk = chi_ranks(chi);
    auto ord = chi_total_order(chi);
    for (const auto& pi : lattice(chi).elements()) {
      // (3) interval factorization
      auto iv = chi_intervals(pi);
      if (iv.size() > 1) {
        BElem<T> pb = ctx.one_B();
        DElem<T> pB = ctx.one_D();
        for (const auto& I : iv) {
          auto sc = chi.restrict_to(I);
          auto sw = detail::restrict_word(w, I);
          auto sp = restrict(pi, I);
          pb = pb * pf.psi(sc, sw, sp);
          pB = pB * pf.Phi(sc, sw, sp);
        }
        both("condition (3)", pf.psi(chi, w, pi), pb, pf.Phi(chi, w, pi), pB, detail::word_witness<T>(chi, &pi));
      }

      // (4) absorb an inner chi-interval V that is a union of blocks
      auto lab = pi.labels();
      bool ends_joined = lab[ord.front()] == lab[ord.back()];
      for (int a = 1; a + 1 < n; ++a)
        for (int e = a; e + 1 < n; ++e) {
          std::vector<int> V(ord.begin() + a, ord.begin() + e + 1);
          std::sort(V.begin(), V.end());
          std::set<int> blocks;
          for (int x : V) blocks.insert(lab[x]);
          std::size_t cover = 0;
          for (int bl : blocks) cover += pi.block(bl).size();
          if (cover != V.size()) continue;
          auto W = detail::complement(n, V);
          int p = ord[a - 1], q = ord[e + 1];
          auto Vchi = chi.restrict_to(V);
          auto Vw = detail::restrict_word(w, V);
          auto Vpi = restrict(pi, V);
          BElem<T> bv = pf.psi(Vchi, Vw, Vpi);
          auto Wchi = chi.restrict_to(W);
          auto Wpi = restrict(pi, W);
          auto pw = detail::restrict_word(detail::with_b(w, p, chi.left(p), chi.left(p), bv), W);
          auto qw = detail::restrict_word(detail::with_b(w, q, !chi.left(q), chi.left(q), bv), W);
          auto lhs = pf.psi(chi, w, pi);
          auto wit = detail::word_witness<T>(chi, &pi);
          wit["V"] = V;
          auto c1 = compare("psi condition (4) via p", lhs, pf.psi(Wchi, pw, Wpi), tol);
          auto c2 = compare("psi condition (4) via q", lhs, pf.psi(Wchi, qw, Wpi), tol);
          c1.witness = c2.witness = wit;
          r.add(c1);
          r.add(c2);
          if (!ends_joined) continue;
          auto L = pf.Phi(chi, w, pi);
          auto c3 = compare("Phi modified condition (4) via p", L, pf.Phi(Wchi, pw, Wpi), tol);
          auto c4 = compare("Phi modified condition (4) via q", L, pf.Phi(Wchi, qw, Wpi), tol);
          c3.witness = c4.witness = wit;
          r.add(c3);
          r.add(c4);
        }
    }

    if (kind == PairKind::none) continue;
    for (int q = 0; q + 1 < n; ++q) {
      if (chi[q] != chi[q + 1]) continue;
      auto [mchi, mw] = detail::merge_entries(chi, w, q);
      auto mone = Partition::one(mchi);
      BElem<T> rb = psi1(w);
      DElem<T> rB = Phi1(w);
      if (kind == PairKind::cumulant)
        for (const auto& pi : lattice(chi).elements()) {
          if (pi.size() != 2 || pi.block_of(q) == pi.block_of(q + 1)) continue;
          rb += pf.psi(chi, w, pi);
          rB += pf.Phi(chi, w, pi);
        }
      both(kind == PairKind::moment ? "moment pair: merge q,q+1" : "cumulant pair: merge q,q+1",
           pf.psi(mchi, mw, mone), rb, pf.Phi(mchi, mw, mone), rB, detail::word_witness<T>(chi, nullptr, q));
    }
  }
  return r;
}

// E_pi, F_pi by the placement recursion agree with the generic p-rule reduction
template <class T>
Report reduction_soundness_check(Engine<T>& eng, const ChiWord& chi, const OpWord<T>& w, double tol = 1e-9) {
  Report r{"reduction-soundness", {}, {}};
  for (const auto& pi : lattice(chi).elements()) {
    auto c1 = compare("E_pi recursion = reduction", eng.E_pi(chi, w, pi), eng.E_pi_reduced(chi, w, pi), tol);
    auto c2 = compare("F_pi recursion = reduction", eng.F_pi(chi, w, pi), eng.F_pi_reduced(chi, w, pi), tol);
    auto c3 = compare("kappa_pi Möbius sum = reduction", eng.kappa_pi(chi, w, pi), eng.kappa_pi_reduced(chi, w, pi),
                      tol);
    c1.witness = c2.witness = c3.witness = detail::word_witness<T>(chi, &pi);
    r.add(c1);
    r.add(c2);
    r.add(c3);
  }
  return r;
}

// ---- swap and tail lemmas -------------------------------------------------

struct LemmaStatus {
  bool applicable = false;
  std::string reason;
};

// E(Z X Y Z') = E(Z Y X Z') and the same for F, over probe products Z, Z' of length <= 1 in the generators
template <class T>
LemmaStatus swap_hypotheses(const ExpectationPair<T>& pair, const Entry<T>& X, const Entry<T>& Y,
                            const std::vector<Entry<T>>& gens, double tol = 1e-9) {
  std::vector<Entry<T>> probes{Entry<T>::identity()};
  probes.insert(probes.end(), gens.begin(), gens.end());
  for (const auto& z : probes)
    for (const auto& z2 : probes) {
      auto [e1, f1] = pair.EF({z, X, Y, z2});
      auto [e2, f2] = pair.EF({z, Y, X, z2});
      if (!compare("", e1, e2, tol).pass || !compare("", f1, f2, tol).pass)
        return {false, "hypotheses not met: X and Y do not commute inside E/F"};
    }
  return {true, "hypotheses hold on probe words"};
}

// E(Z X) = E(Z Y) and F(Z X) = F(Z Y) over probe products Z of length <= 2
template <class T>
LemmaStatus tail_hypotheses(const ExpectationPair<T>& pair, const Entry<T>& X, const Entry<T>& Y,
                            const std::vector<Entry<T>>& gens, double tol = 1e-9) {
  std::vector<OpWord<T>> probes{{}};
  for (const auto& g : gens) probes.push_back({g});
  for (const auto& g : gens)
    for (const auto& h : gens) probes.push_back({g, h});
  for (auto z : probes) {
    auto zy = z;
    z.push_back(X);
    zy.push_back(Y);
    auto [e1, f1] = pair.EF(z);
    auto [e2, f2] = pair.EF(zy);
    if (!compare("", e1, e2, tol).pass || !compare("", f1, f2, tol).pass)
      return {false, "hypotheses not met: E(ZX) or F(ZX) differs from the Y version"};
  }
  return {true, "hypotheses hold on probe words"};
}

// K_{1_chi}(.., X, Y, ..) = K_{1_chi'}(.., Y, X, ..) with X at k0 (left) and Y at k0+1 (right)
template <class T>
Report swap_check(Engine<T>& eng, const ChiWord& chi, const OpWord<T>& w, int k0, const std::vector<Entry<T>>& gens,
                  double tol = 1e-9) {
  if (k0 + 1 >= chi.size() || !chi.left(k0) || chi.left(k0 + 1))
    throw face_error("swap needs a left slot followed by a right slot");
  Report r{"swap-lemma", {}, {}};
  auto st = swap_hypotheses(eng.pair(), w[k0], w[k0 + 1], gens, tol);
  r.extra = {{"applicable", st.applicable}, {"status", st.reason}};
  if (!st.applicable) return r;
  auto f = chi.faces();
  std::swap(f[k0], f[k0 + 1]);
  ChiWord chi2(f);
  auto w2 = w;
  std::swap(w2[k0], w2[k0 + 1]);
  auto c = compare("K_1(.., X, Y, ..) = K_1'(.., Y, X, ..)", eng.K1(chi, w), eng.K1(chi2, w2), tol);
  auto c2 = compare("kappa_1(.., X, Y, ..) = kappa_1'(.., Y, X, ..)", eng.kappa1(chi, w), eng.kappa1(chi2, w2), tol);
  c.witness = c2.witness = detail::word_witness<T>(chi, nullptr, k0);
  r.add(c);
  r.add(c2);
  return r;
}

// K_{1_chi}(Z_1..Z_{n-1}, X) = K_{1_chi'}(Z_1..Z_{n-1}, Y) with chi(n) = l, chi'(n) = r
template <class T>
Report tail_check(Engine<T>& eng, const ChiWord& chi, const OpWord<T>& w, const Entry<T>& Y,
                  const std::vector<Entry<T>>& gens, double tol = 1e-9) {
  int n = chi.size();
  if (!chi.left(n - 1)) throw face_error("tail lemma needs a left last slot");
  Report r{"tail-lemma", {}, {}};
  auto st = tail_hypotheses(eng.pair(), w[n - 1], Y, gens, tol);
  r.extra = {{"applicable", st.applicable}, {"status", st.reason}};
  if (!st.applicable) return r;
  auto f = chi.faces();
  f[n - 1] = Face::r;
  ChiWord chi2(f);
  auto w2 = w;
  w2[n - 1] = Y;
  auto c = compare("K_1(.., X) = K_1'(.., Y)", eng.K1(chi, w), eng.K1(chi2, w2), tol);
  auto c2 = compare("kappa_1(.., X) = kappa_1'(.., Y)", eng.kappa1(chi, w), eng.kappa1(chi2, w2), tol);
  c.witness = c2.witness = detail::word_witness<T>(chi, nullptr, n - 1);
  r.add(c);
  r.add(c2);
  return r;
}

// letters split as P x Q (index p*|Q| + q, vacuum (0,0)); X acts on (p, i), Y on (q, j), so they commute
template <class T>
std::pair<Atom<T>, Atom<T>> tensor_split_ops(int s, int P, int Q, int family, std::mt19937_64& rng) {
  auto A = random_matrix<T>(rng, P * s, P * s, 0.7);
  auto C = random_matrix<T>(rng, Q * s, Q * s, 0.7);
  int w = P * Q;
  Matrix<T> X(w * s, w * s), Y(w * s, w * s);
  for (int p = 0; p < P; ++p)
    for (int q = 0; q < Q; ++q)
      for (int i = 0; i < s; ++i)
        for (int p2 = 0; p2 < P; ++p2)
          for (int i2 = 0; i2 < s; ++i2) X(((p * Q + q) * s) + i, ((p2 * Q + q) * s) + i2) = A(p * s + i, p2 * s + i2);
  for (int p = 0; p < P; ++p)
    for (int q = 0; q < Q; ++q)
      for (int j = 0; j < s; ++j)
        for (int q2 = 0; q2 < Q; ++q2)
          for (int j2 = 0; j2 < s; ++j2) Y(((p * Q + q) * s) + j, ((p * Q + q2) * s) + j2) = C(q * s + j, q2 * s + j2);
  return {Atom<T>::left(family, std::move(X)), Atom<T>::right(family, std::move(Y))};
}

// a right operator whose vacuum column matches the given left operator, so E(ZX) = E(ZY) and F(ZX) = F(ZY)
template <class T>
Atom<T> matched_right(const Atom<T>& X, int s, std::mt19937_64& rng) {
  const auto& z = *X.m;
  auto y = random_matrix<T>(rng, z.rows(), z.cols(), 0.7);
  int w = static_cast<int>(z.rows()) / s;
  for (int a = 0; a < w; ++a)
    for (int i = 0; i < s; ++i)
      for (int j = 0; j < s; ++j) y(a * s + j, i) = z(a * s + i, j);
  return Atom<T>::right(X.family, std::move(y));
}

}  // namespace cbf
