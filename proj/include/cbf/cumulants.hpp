#pragma once

// Moment pair (E_pi, F_pi), cumulant pair (kappa_pi, K_pi) and the universal
// moment formulas for families coming from separate pairs.

#include "cbf/fock.hpp"
#include "cbf/report.hpp"

#include <functional>
#include <sstream>

namespace cbf {

template <class T>
struct OperatorWord {
  ChiWord chi;
  OmegaWord omega;  // may be empty
  OpWord<T> entries;

  int n() const { return chi.size(); }

  void validate() const {
    if (static_cast<int>(entries.size()) != chi.size()) throw validation_error("word length differs from chi length");
    if (!omega.empty() && static_cast<int>(omega.size()) != chi.size())
      throw validation_error("omega length differs from chi length");
    for (int k = 0; k < n(); ++k)
      for (const auto& t : entries[k].terms)
        for (const auto& a : t.atoms)
          if (!a.is_b() && a.face() != chi[k])
            throw face_error("entry " + std::to_string(k + 1) + " holds an operator of the wrong face");
  }
};

namespace detail {

template <class T>
std::string word_key(const ChiWord& chi, const OpWord<T>& w) {
  std::ostringstream os;
  os << chi.str() << '#';
  for (const auto& e : w) {
    os << '[';
    for (const auto& t : e.terms) {
      os << scalar_traits<T>::str(t.coeff) << ':';
      for (const auto& a : t.atoms) {
        os << static_cast<int>(a.kind);
        if (a.is_b())
          os << a.m->str();
        else
          os << '#' << a.id;
        os << ';';
      }
      os << '+';
    }
    os << ']';
  }
  return os.str();
}

template <class T>
OpWord<T> restrict_word(const OpWord<T>& w, const std::vector<int>& pos) {
  OpWord<T> out;
  out.reserve(pos.size());
  for (int p : pos) out.push_back(w[p]);
  return out;
}

inline std::vector<int> complement(int n, const std::vector<int>& v) {
  std::vector<int> out;
  for (int k = 0; k < n; ++k)
    if (!std::binary_search(v.begin(), v.end(), k)) out.push_back(k);
  return out;
}

inline int index_in(const std::vector<int>& v, int x) {
  return static_cast<int>(std::lower_bound(v.begin(), v.end(), x) - v.begin());
}

}  // namespace detail

// where a reduced block's value goes: entry index in the remaining word, side, and L/R
struct Insertion {
  int pos;        // in the original numbering
  bool append;    // Z_pos C vs C Z_pos
  bool left_mul;  // L_b vs R_b
};

// p = max_≺ {k outside V : k ≺ min_≺ V}; Z_p L_b if p is left, R_b Z_p if right
inline Insertion p_rule(const ChiWord& chi, const std::vector<int>& rest, const std::vector<int>& V) {
  auto rk = chi_ranks(chi);
  int vmin = rk[V.front()];
  for (int x : V) vmin = std::min(vmin, rk[x]);
  int best = -1;
  for (int x : rest)
    if (rk[x] < vmin && (best < 0 || rk[x] > rk[best])) best = x;
  if (best < 0) throw validation_error("reduced block has no predecessor in the remaining word");
  return chi.left(best) ? Insertion{best, true, true} : Insertion{best, false, false};
}

// Definition-style placement.  A trailing block goes onto the entry before it.
// Otherwise C_b goes in front of the next element of the spine met first when
// moving inward from min V: the block of the next remaining entry of the same
// face, or failing that the block that reaches furthest down.
inline Insertion spine_rule(const Partition& pi, int v) {
  const auto& V = pi.block(v);
  const auto& chi = pi.chi();
  int n = pi.n(), minv = V.front();
  bool lm = chi.left(minv);
  if (static_cast<int>(V.size()) == n - minv) return {minv - 1, true, lm};
  auto in_v = [&](int k) { return std::binary_search(V.begin(), V.end(), k); };
  int y = -1;
  for (int k = minv + 1; k < n && y < 0; ++k)
    if (!in_v(k) && chi[k] == chi[minv]) y = k;
  if (y < 0)
    for (int k = n - 1; k > minv && y < 0; --k)
      if (!in_v(k)) y = k;
  const auto& W = pi.block(pi.block_of(y));
  int k = *std::upper_bound(W.begin(), W.end(), minv);
  return {k, false, lm};
}

template <class T>
OpWord<T> apply_insertion(const OpWord<T>& w, const Insertion& ins, const BElem<T>& b) {
  OpWord<T> out = w;
  auto a = ins.left_mul ? Atom<T>::LB(b) : Atom<T>::RB(b);
  out[ins.pos] = ins.append ? w[ins.pos].append(a) : w[ins.pos].prepend(a);
  return out;
}

template <class T>
class Engine {
 public:
  using BFun = std::function<BElem<T>(const ChiWord&, const OpWord<T>&)>;
  using DFun = std::function<DElem<T>(const ChiWord&, const OpWord<T>&)>;

  explicit Engine(std::shared_ptr<const ExpectationPair<T>> pair, bool memo = true) : pair_(std::move(pair)), memo_(memo) {}

  const ExpectationPair<T>& pair() const { return *pair_; }
  const AlgebraContext<T>& ctx() const { return pair_->ctx(); }

  BElem<T> E(const ChiWord& chi, const OpWord<T>& w) { return moments(chi, w).first; }
  DElem<T> F(const ChiWord& chi, const OpWord<T>& w) { return moments(chi, w).second; }

  std::pair<BElem<T>, DElem<T>> moments(const ChiWord& chi, const OpWord<T>& w) {
    if (!memo_) return pair_->EF(w);
    auto key = detail::word_key(chi, w);
    auto it = ef_cache_.find(key);
    if (it != ef_cache_.end()) return it->second;
    return ef_cache_.emplace(std::move(key), pair_->EF(w)).first->second;
  }

  // recursive moment function
  BElem<T> E_pi(const ChiWord& chi, const OpWord<T>& w, const Partition& pi) {
    check(chi, w, pi);
    if (pi.is_one()) return E(chi, w);
    int v = pi.size() - 1;  // largest min
    const auto& V = pi.block(v);
    BElem<T> b = E(chi.restrict_to(V), detail::restrict_word(w, V));
    auto ins = spine_rule(pi, v);
    auto rest = detail::complement(pi.n(), V);
    auto w2 = detail::restrict_word(apply_insertion(w, ins, b), rest);
    return E_pi(chi.restrict_to(rest), w2, restrict(pi, rest));
  }

  // interior blocks reduced with E, exterior intervals evaluated with F
  DElem<T> F_pi(const ChiWord& chi, const OpWord<T>& w, const Partition& pi) {
    check(chi, w, pi);
    if (pi.is_one()) return F(chi, w);
    auto iv = chi_intervals(pi);
    if (iv.size() > 1) {
      DElem<T> acc = ctx().one_D();
      for (const auto& I : iv) acc = acc * F_pi(chi.restrict_to(I), detail::restrict_word(w, I), restrict(pi, I));
      return acc;
    }
    int v = pi.size() - 1;
    const auto& V = pi.block(v);
    BElem<T> b = E(chi.restrict_to(V), detail::restrict_word(w, V));
    auto ins = spine_rule(pi, v);
    auto rest = detail::complement(pi.n(), V);
    auto w2 = detail::restrict_word(apply_insertion(w, ins, b), rest);
    return F_pi(chi.restrict_to(rest), w2, restrict(pi, rest));
  }

  // Möbius sum over the sublattice below pi
  BElem<T> kappa_pi(const ChiWord& chi, const OpWord<T>& w, const Partition& pi) {
    check(chi, w, pi);
    if (pi.is_one()) return kappa1(chi, w);
    return kappa_sum(chi, w, pi);
  }

  BElem<T> kappa1(const ChiWord& chi, const OpWord<T>& w) {
    return cached(k_cache_, chi, w, [&] { return kappa_sum(chi, w, Partition::one(chi)); });
  }

  DElem<T> K_pi(const ChiWord& chi, const OpWord<T>& w, const Partition& pi) {
    check(chi, w, pi);
    if (pi.is_one()) return K1(chi, w);
    BFun psi = [this](const ChiWord& c, const OpWord<T>& x) { return kappa1(c, x); };
    DFun phi = [this](const ChiWord& c, const OpWord<T>& x) { return K1(c, x); };
    return reduce_pair(chi, w, pi, psi, phi);
  }

  DElem<T> K1(const ChiWord& chi, const OpWord<T>& w) {
    return cached(kk_cache_, chi, w, [&] {
      DElem<T> acc = F(chi, w);
      if (chi.size() == 1) return acc;
      const auto& L = lattice(chi);
      int top = L.top();
      for (int s = 0; s < L.size(); ++s)
        if (s != top) acc -= K_pi(chi, w, L.at(s));
      return acc;
    });
  }

  // any bi-multiplicative function from its values on full partitions (p-rule reductions)
  BElem<T> reduce_single(const ChiWord& chi, const OpWord<T>& w, const Partition& pi, const BFun& psi1) {
    if (pi.is_one()) return psi1(chi, w);
    auto iv = chi_intervals(pi);
    if (iv.size() > 1) {
      BElem<T> acc = ctx().one_B();
      for (const auto& I : iv)
        acc = acc * reduce_single(chi.restrict_to(I), detail::restrict_word(w, I), restrict(pi, I), psi1);
      return acc;
    }
    const auto& V = pi.block(pi.size() - 1);
    auto rest = detail::complement(pi.n(), V);
    BElem<T> b = psi1(chi.restrict_to(V), detail::restrict_word(w, V));
    auto w2 = detail::restrict_word(apply_insertion(w, p_rule(chi, rest, V), b), rest);
    return reduce_single(chi.restrict_to(rest), w2, restrict(pi, rest), psi1);
  }

  // conditionally bi-multiplicative pair from (psi_1, phi_1): interior blocks via psi, exterior via phi
  DElem<T> reduce_pair(const ChiWord& chi, const OpWord<T>& w, const Partition& pi, const BFun& psi1,
                       const DFun& phi1) {
    if (pi.is_one()) return phi1(chi, w);
    auto iv = chi_intervals(pi);
    if (iv.size() > 1) {
      DElem<T> acc = ctx().one_D();
      for (const auto& I : iv)
        acc = acc * reduce_pair(chi.restrict_to(I), detail::restrict_word(w, I), restrict(pi, I), psi1, phi1);
      return acc;
    }
    const auto& V = pi.block(pi.size() - 1);
    auto rest = detail::complement(pi.n(), V);
    BElem<T> b = psi1(chi.restrict_to(V), detail::restrict_word(w, V));
    auto w2 = detail::restrict_word(apply_insertion(w, p_rule(chi, rest, V), b), rest);
    return reduce_pair(chi.restrict_to(rest), w2, restrict(pi, rest), psi1, phi1);
  }

  BElem<T> E_pi_reduced(const ChiWord& chi, const OpWord<T>& w, const Partition& pi) {
    return reduce_single(chi, w, pi, [this](const ChiWord& c, const OpWord<T>& x) { return E(c, x); });
  }
  DElem<T> F_pi_reduced(const ChiWord& chi, const OpWord<T>& w, const Partition& pi) {
    return reduce_pair(
        chi, w, pi, [this](const ChiWord& c, const OpWord<T>& x) { return E(c, x); },
        [this](const ChiWord& c, const OpWord<T>& x) { return F(c, x); });
  }
  BElem<T> kappa_pi_reduced(const ChiWord& chi, const OpWord<T>& w, const Partition& pi) {
    return reduce_single(chi, w, pi, [this](const ChiWord& c, const OpWord<T>& x) { return kappa1(c, x); });
  }

  void clear() {
    ef_cache_.clear();
    k_cache_.clear();
    kk_cache_.clear();
  }

 private:
  template <class M, class Fn>
  Matrix<T> cached(M& cache, const ChiWord& chi, const OpWord<T>& w, Fn&& fn) {
    if (!memo_) return fn();
    auto key = detail::word_key(chi, w);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    auto v = fn();
    cache.emplace(std::move(key), v);
    return v;
  }

  BElem<T> kappa_sum(const ChiWord& chi, const OpWord<T>& w, const Partition& pi) {
    const auto& L = lattice(chi);
    const auto& col = L.mobius_column(L.index_of(pi));
    BElem<T> acc = ctx().zero_B();
    for (const auto& [s, m] : col) {
      if (m == 0) continue;
      acc += E_pi(chi, w, L.at(s)) * scalar_traits<T>::from_int(m);
    }
    return acc;
  }

  static void check(const ChiWord& chi, const OpWord<T>& w, const Partition& pi) {
    if (!(pi.chi() == chi)) throw validation_error("partition chi differs from word chi");
    if (static_cast<int>(w.size()) != chi.size()) throw validation_error("word length differs from chi length");
  }

  std::shared_ptr<const ExpectationPair<T>> pair_;
  bool memo_;
  std::unordered_map<std::string, std::pair<BElem<T>, DElem<T>>> ef_cache_;
  std::unordered_map<std::string, Matrix<T>> k_cache_, kk_cache_;
};

// per-family pairs; a word is routed to the pair of the (single) family it uses
template <class T>
class RoutedPair : public ExpectationPair<T> {
 public:
  explicit RoutedPair(std::map<int, std::shared_ptr<const ExpectationPair<T>>> pairs) : pairs_(std::move(pairs)) {
    if (pairs_.empty()) throw validation_error("routed pair needs at least one family");
  }
  const AlgebraContext<T>& ctx() const override { return pairs_.begin()->second->ctx(); }
  BElem<T> E(const OpWord<T>& w) const override { return route(w).E(w); }
  DElem<T> F(const OpWord<T>& w) const override { return route(w).F(w); }
  std::pair<BElem<T>, DElem<T>> EF(const OpWord<T>& w) const override { return route(w).EF(w); }

 private:
  const ExpectationPair<T>& route(const OpWord<T>& w) const {
    std::set<int> fams;
    for (const auto& e : w) {
      auto f = e.families();
      fams.insert(f.begin(), f.end());
    }
    if (fams.empty()) return *pairs_.begin()->second;
    if (fams.size() > 1) throw validation_error("word mixes families; no single pair can evaluate it");
    auto it = pairs_.find(*fams.begin());
    if (it == pairs_.end()) throw validation_error("no pair registered for family " + std::to_string(*fams.begin()));
    return *it->second;
  }
  std::map<int, std::shared_ptr<const ExpectationPair<T>>> pairs_;
};

// (E, F) scaled by a constant; the mixture (1 - t) delta + t (E, F) on words with at least one family operator
template <class T>
class ScaledPair : public ExpectationPair<T> {
 public:
  ScaledPair(std::shared_ptr<const ExpectationPair<T>> base, T t) : base_(std::move(base)), t_(std::move(t)) {}
  const AlgebraContext<T>& ctx() const override { return base_->ctx(); }
  BElem<T> E(const OpWord<T>& w) const override { return base_->E(w) * t_; }
  DElem<T> F(const OpWord<T>& w) const override { return base_->F(w) * t_; }
  std::pair<BElem<T>, DElem<T>> EF(const OpWord<T>& w) const override {
    auto [e, f] = base_->EF(w);
    return {e * t_, f * t_};
  }

 private:
  std::shared_ptr<const ExpectationPair<T>> base_;
  T t_;
};

// E(Z_1...Z_n) through the Möbius-weighted sum over pi <= omega
template <class T>
BElem<T> cbifree_moment_E(Engine<T>& per_pair, const OperatorWord<T>& w) {
  w.validate();
  const auto& L = lattice(w.chi);
  std::vector<int> below;  // sigma <= omega
  for (int s = 0; s < L.size(); ++s)
    if (leq_omega(L.at(s), w.omega)) below.push_back(s);
  BElem<T> acc = per_pair.ctx().zero_B();
  for (int p : below) {
    long long c = 0;
    for (int s : below)
      if (L.leq_idx(p, s)) c += L.mobius(p, s);
    if (c == 0) continue;
    acc += per_pair.E_pi(w.chi, w.entries, L.at(p)) * scalar_traits<T>::from_int(c);
  }
  return acc;
}

// F(Z_1...Z_n) = sum over pi <= omega of K_pi, with each pair's own cumulants
template <class T>
DElem<T> cbifree_moment_F(Engine<T>& per_pair, const OperatorWord<T>& w) {
  w.validate();
  const auto& L = lattice(w.chi);
  DElem<T> acc = per_pair.ctx().zero_D();
  for (int s = 0; s < L.size(); ++s)
    if (leq_omega(L.at(s), w.omega)) acc += per_pair.K_pi(w.chi, w.entries, L.at(s));
  return acc;
}

// cumulant evaluators supplied as black boxes
template <class T>
struct CumulantTables {
  typename Engine<T>::BFun kappa1;
  typename Engine<T>::DFun K1;
};

template <class T>
std::pair<BElem<T>, DElem<T>> moments_from_cumulants(Engine<T>& eng, const CumulantTables<T>& tab,
                                                      const ChiWord& chi, const OpWord<T>& w) {
  const auto& L = lattice(chi);
  BElem<T> e = eng.ctx().zero_B();
  DElem<T> f = eng.ctx().zero_D();
  for (const auto& pi : L.elements()) {
    e += eng.reduce_single(chi, w, pi, tab.kappa1);
    f += eng.reduce_pair(chi, w, pi, tab.kappa1, tab.K1);
  }
  return {e, f};
}

template <class T>
Report mixed_cumulant_test(Engine<T>& eng, const OperatorWord<T>& w, double tol = 1e-9) {
  w.validate();
  if (w.n() < 2) throw validation_error("mixed cumulant test needs n >= 2");
  if (w.omega.empty() || omega_constant(w.omega)) throw validation_error("mixed cumulant test needs non-constant omega");
  Report r{"mixed-cumulants", {}, {}};
  nlohmann::json wit{{"chi", w.chi.str()}, {"omega", w.omega}};
  auto k = eng.kappa1(w.chi, w.entries);
  auto K = eng.K1(w.chi, w.entries);
  auto c1 = expect_zero("kappa_1 = 0", k, tol);
  auto c2 = expect_zero("K_1 = 0", K, tol);
  c1.witness = c2.witness = wit;
  r.add(c1);
  r.add(c2);
  return r;
}

// ---- (pi, iota) expansion of F --------------------------------------------

// a term: partition labels on the full index set and a bitmask of blocks labelled e
struct IotaTerm {
  std::vector<std::vector<int>> blocks;  // sorted by min, 0-based
  std::vector<bool> ext;                 // per block: true = e, false = i
  bool operator<(const IotaTerm& o) const { return std::tie(blocks, ext) < std::tie(o.blocks, o.ext); }
};

using IotaSum = std::map<IotaTerm, long long>;

namespace detail {

inline IotaTerm canon(std::vector<std::pair<std::vector<int>, bool>> bl) {
  for (auto& b : bl) std::sort(b.first.begin(), b.first.end());
  std::sort(bl.begin(), bl.end(), [](const auto& a, const auto& b) { return a.first.front() < b.first.front(); });
  IotaTerm t;
  for (auto& [b, e] : bl) t.blocks.push_back(b), t.ext.push_back(e);
  return t;
}

inline IotaSum product(const IotaSum& a, const IotaSum& b) {
  IotaSum out;
  for (const auto& [ta, ca] : a)
    for (const auto& [tb, cb] : b) {
      std::vector<std::pair<std::vector<int>, bool>> bl;
      for (std::size_t i = 0; i < ta.blocks.size(); ++i) bl.push_back({ta.blocks[i], ta.ext[i]});
      for (std::size_t i = 0; i < tb.blocks.size(); ++i) bl.push_back({tb.blocks[i], tb.ext[i]});
      out[canon(std::move(bl))] += ca * cb;
    }
  return out;
}

inline void add_into(IotaSum& a, const IotaSum& b, long long sign) {
  for (const auto& [t, c] : b) a[t] += sign * c;
}

}  // namespace detail

// symbolic unrolling of the K recursion into (pi, iota) terms over a fixed chi
class IotaExpander {
 public:
  explicit IotaExpander(ChiWord chi) : chi_(std::move(chi)) {}

  // sum_{pi <= omega} K_pi expanded
  IotaSum expand_F(const OmegaWord& omega) {
    std::vector<int> all(chi_.size());
    std::iota(all.begin(), all.end(), 0);
    IotaSum out;
    for (const auto& pi : lattice(chi_).elements())
      if (leq_omega(pi, omega)) detail::add_into(out, K_sigma(all, pi), 1);
    clean(out);
    return out;
  }

  const ChiWord& chi() const { return chi_; }

 private:
  static void clean(IotaSum& s) {
    for (auto it = s.begin(); it != s.end();) it = it->second == 0 ? s.erase(it) : std::next(it);
  }

  // sigma given on the subset S (positions renumbered 0..|S|-1)
  IotaSum K_sigma(const std::vector<int>& S, const Partition& sigma) {
    if (sigma.is_one()) return K1(S);
    IotaSum acc{{IotaTerm{}, 1}};
    for (const auto& I : chi_intervals(sigma)) {
      auto part = restrict(sigma, I);
      std::vector<int> sub;
      for (int x : I) sub.push_back(S[x]);
      // exterior block has the smallest min; the rest are absorbed as kappa
      IotaSum piece = K1(map_block(sub, part.block(0)));
      for (int b = 1; b < part.size(); ++b) piece = detail::product(piece, kappa(map_block(sub, part.block(b))));
      acc = detail::product(acc, piece);
    }
    return acc;
  }

  static std::vector<int> map_block(const std::vector<int>& sub, const std::vector<int>& blk) {
    std::vector<int> out;
    for (int x : blk) out.push_back(sub[x]);
    return out;
  }

  IotaSum K1(const std::vector<int>& S) {
    auto it = k1_.find(S);
    if (it != k1_.end()) return it->second;
    IotaSum out{{detail::canon({{S, true}}), 1}};
    if (S.size() > 1) {
      auto sub = chi_.restrict_to(S);
      for (const auto& sigma : lattice(sub).elements())
        if (!sigma.is_one()) detail::add_into(out, K_sigma(S, sigma), -1);
    }
    clean(out);
    return k1_.emplace(S, out).first->second;
  }

  IotaSum kappa(const std::vector<int>& S) {
    auto it = kap_.find(S);
    if (it != kap_.end()) return it->second;
    auto sub = chi_.restrict_to(S);
    const auto& L = lattice(sub);
    IotaSum out;
    for (const auto& [s, m] : L.mobius_column(L.top())) {
      std::vector<std::pair<std::vector<int>, bool>> bl;
      for (const auto& b : L.at(s).blocks()) bl.push_back({map_block(S, b), false});
      out[detail::canon(std::move(bl))] += m;
    }
    clean(out);
    return kap_.emplace(S, out).first->second;
  }

  ChiWord chi_;
  std::map<std::vector<int>, IotaSum> k1_, kap_;
};

// Theta_(pi, iota): interior blocks reduced with E, then interval factors with E (i) or F (e)
template <class T>
DElem<T> theta_value(Engine<T>& eng, const ChiWord& chi, const OpWord<T>& w, const Partition& pi,
                     const std::vector<bool>& ext) {
  DElem<T> acc = eng.ctx().one_D();
  auto lab = pi.labels();
  for (const auto& I : chi_intervals(pi)) {
    auto part = restrict(pi, I);
    auto sub_chi = chi.restrict_to(I);
    auto sub_w = detail::restrict_word(w, I);
    // the exterior block of this interval is the one holding its smallest position
    bool e = ext[lab[I.front()]];
    if (e)
      acc = acc * eng.F_pi(sub_chi, sub_w, part);
    else
      acc = acc * eng.ctx().b_to_d(eng.E_pi(sub_chi, sub_w, part));
  }
  return acc;
}

template <class T>
struct ThetaResult {
  DElem<T> theta;
  long long c = 0;
};

template <class T>
ThetaResult<T> theta_expansion(Engine<T>& eng, const OperatorWord<T>& w, const Partition& pi,
                               const std::vector<bool>& ext) {
  if (static_cast<int>(ext.size()) != pi.size()) throw validation_error("iota must label every block");
  IotaExpander ex(w.chi);
  auto sum = ex.expand_F(w.omega);
  IotaTerm key{pi.blocks(), ext};
  auto it = sum.find(key);
  return {theta_value(eng, w.chi, w.entries, pi, ext), it == sum.end() ? 0 : it->second};
}

}  // namespace cbf
