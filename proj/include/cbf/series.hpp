#pragma once

// Moment/cumulant series of two-faced families and truncated formal series in
// (t_b, t_c, t_d) for the one- and two-sided transform identities.

#include "cbf/cumulants.hpp"

#include <array>

namespace cbf {

using Deg = std::array<int, 3>;  // powers of t_b, t_c, t_d

inline int total(const Deg& d) { return d[0] + d[1] + d[2]; }
inline Deg operator+(const Deg& a, const Deg& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }

// polynomial in t_b, t_c, t_d with square matrix coefficients, total degree <= N, t_c degree <= 1
// (products drop t_c^2; adding such a coefficient directly is an error)
template <class T>
class TruncatedSeries {
 public:
  TruncatedSeries(int N, int dim) : N_(N), dim_(dim) {
    if (N < 0) throw validation_error("truncation degree must be non-negative");
  }

  static TruncatedSeries constant(int N, const Matrix<T>& m) {
    TruncatedSeries s(N, static_cast<int>(m.rows()));
    s.add({0, 0, 0}, m);
    return s;
  }
  static TruncatedSeries monomial(int N, const Deg& d, const Matrix<T>& m) {
    TruncatedSeries s(N, static_cast<int>(m.rows()));
    s.add(d, m);
    return s;
  }

  int degree() const { return N_; }
  int dim() const { return dim_; }
  const std::map<Deg, Matrix<T>>& terms() const { return c_; }

  Matrix<T> coeff(const Deg& d) const {
    auto it = c_.find(d);
    return it == c_.end() ? Matrix<T>(dim_, dim_) : it->second;
  }

  // drops anything beyond the truncation
  void add(const Deg& d, const Matrix<T>& m) {
    if (d[1] > 1) throw validation_error("t_c degree above 1");
    if (total(d) > N_) return;
    if (static_cast<int>(m.rows()) != dim_ || !m.square()) throw dimension_error("series coefficient has wrong size");
    auto it = c_.find(d);
    if (it == c_.end())
      c_.emplace(d, m);
    else
      it->second += m;
  }

  template <class Fn>
  TruncatedSeries map(Fn&& fn, int new_dim) const {
    TruncatedSeries out(N_, new_dim);
    for (const auto& [d, m] : c_) out.add(d, fn(m));
    return out;
  }

  friend TruncatedSeries operator+(TruncatedSeries a, const TruncatedSeries& b) {
    a.same(b);
    for (const auto& [d, m] : b.c_) a.add(d, m);
    return a;
  }
  friend TruncatedSeries operator-(TruncatedSeries a, const TruncatedSeries& b) {
    a.same(b);
    for (const auto& [d, m] : b.c_) a.add(d, m * T(-1));
    return a;
  }
  friend TruncatedSeries operator*(const TruncatedSeries& a, const TruncatedSeries& b) {
    a.same(b);
    TruncatedSeries out(a.N_, a.dim_);
    for (const auto& [da, ma] : a.c_)
      for (const auto& [db, mb] : b.c_) {
        auto d = da + db;
        if (total(d) > a.N_ || d[1] > 1) continue;  // t_c^2 = 0
        out.add(d, ma * mb);
      }
    return out;
  }
  friend TruncatedSeries operator*(const T& s, TruncatedSeries a) {
    for (auto& [d, m] : a.c_) m *= s;
    return a;
  }

  // needs an invertible constant term
  TruncatedSeries inverse() const {
    auto c0 = coeff({0, 0, 0});
    auto inv0 = cbf::inverse(c0);
    TruncatedSeries rest = *this;
    rest.c_.erase({0, 0, 0});
    auto step = constant(N_, inv0 * T(-1)) * rest;  // -c0^{-1} R
    auto term = constant(N_, inv0);
    TruncatedSeries out = term;
    for (int k = 1; k <= N_; ++k) {
      term = step * term;
      out = out + term;
    }
    return out;
  }

  nlohmann::json to_json() const {
    auto a = nlohmann::json::array();
    for (const auto& [d, m] : c_) a.push_back({{"degree", d}, {"matrix", cbf::to_json(m)}});
    return a;
  }

 private:
  void same(const TruncatedSeries& o) const {
    if (o.N_ != N_ || o.dim_ != dim_) throw dimension_error("series with different truncation or size");
  }
  int N_, dim_;
  std::map<Deg, Matrix<T>> c_;
};

// coefficient-wise comparison
template <class T>
Report compare_series(const std::string& what, const TruncatedSeries<T>& a, const TruncatedSeries<T>& b,
                      double tol = 1e-9) {
  Report r{what, {}, {}};
  std::set<Deg> degs;
  for (const auto& [d, m] : a.terms()) degs.insert(d);
  for (const auto& [d, m] : b.terms()) degs.insert(d);
  for (const auto& d : degs) {
    auto c = compare(what, a.coeff(d), b.coeff(d), tol);
    c.witness = {{"degree", d}};
    r.add(c);
  }
  return r;
}

// ---- two-faced families and their nu, mu, rho, eta series -----------------

template <class T>
struct TwoFacedFamily {
  std::map<int, Entry<T>> ops;
  std::set<int> left;  // the index set I; everything else is in J

  Face face(int i) const { return left.count(i) ? Face::l : Face::r; }
};

enum class SeriesKind { nu, mu, rho, eta };

inline SeriesKind parse_series_kind(const std::string& s) {
  if (s == "nu") return SeriesKind::nu;
  if (s == "mu") return SeriesKind::mu;
  if (s == "rho") return SeriesKind::rho;
  if (s == "eta") return SeriesKind::eta;
  throw validation_error("series kind must be nu, mu, rho or eta");
}

// entries of the word behind nu_omega(b_1..b_{n-1}), with the B-insertions placed per face pattern
template <class T>
std::pair<ChiWord, OpWord<T>> series_word(const TwoFacedFamily<T>& fam, const OmegaWord& omega,
                                          const std::vector<BElem<T>>& bs) {
  int n = static_cast<int>(omega.size());
  if (n < 1) throw validation_error("omega must be non-empty");
  if (static_cast<int>(bs.size()) != n - 1) throw validation_error("need n - 1 B-arguments");
  std::vector<Face> f;
  OpWord<T> w;
  for (int k = 0; k < n; ++k) {
    auto it = fam.ops.find(omega[k]);
    if (it == fam.ops.end()) throw validation_error("omega uses an index outside the family");
    f.push_back(fam.face(omega[k]));
    w.push_back(it->second);
  }
  ChiWord chi(f);
  auto C = [&](int k, const BElem<T>& b) { return chi.left(k) ? Atom<T>::LB(b) : Atom<T>::RB(b); };
  bool all_l = std::all_of(f.begin(), f.end(), [](Face x) { return x == Face::l; });
  bool all_r = std::all_of(f.begin(), f.end(), [](Face x) { return x == Face::r; });
  if (all_l || all_r) {
    for (int k = 1; k < n; ++k) w[k] = w[k].prepend(C(k, bs[k - 1]));
    return {chi, w};
  }
  // the first slot of the face opposite to slot 1 gets no prefix; the last slot also carries b_{n-1} behind it
  int k0 = 1;
  while (chi[k0] == chi[0]) ++k0;
  int b = 0;
  for (int k = 1; k < n; ++k) {
    if (k == k0) continue;
    w[k] = w[k].prepend(C(k, bs[b++]));
  }
  w[n - 1] = w[n - 1].append(C(n - 1, bs[b++]));
  return {chi, w};
}

// nu, mu, rho, eta at 1 (or at pi) for the given omega and B-arguments; B-valued kinds embedded when asked
template <class T>
Matrix<T> family_series_eval(Engine<T>& eng, const TwoFacedFamily<T>& fam, SeriesKind kind, const OmegaWord& omega,
                             const std::vector<BElem<T>>& bs, const Partition* pi = nullptr) {
  auto [chi, w] = series_word(fam, omega, bs);
  auto p = pi ? *pi : Partition::one(chi);
  if (!(p.chi() == chi)) throw validation_error("partition chi differs from the omega faces");
  switch (kind) {
    case SeriesKind::nu:
      return eng.E_pi(chi, w, p);
    case SeriesKind::mu:
      return eng.F_pi(chi, w, p);
    case SeriesKind::rho:
      return eng.kappa_pi(chi, w, p);
    case SeriesKind::eta:
      return eng.K_pi(chi, w, p);
  }
  return {};
}

// ---- moment and cumulant series -------------------------------------------

template <class T>
struct MomentSeries {
  TruncatedSeries<T> M;   // B-valued
  TruncatedSeries<T> MM;  // D-valued, the F version
};

namespace detail {

template <class T>
OpWord<T> repeat(const Entry<T>& e, int m) {
  return OpWord<T>(m, e);
}

// every way to pick one coefficient per slot with total degree <= N and t_c degree <= 1
template <class T, class Fn>
void for_each_choice(const std::vector<const TruncatedSeries<T>*>& slots, int N, Fn&& fn) {
  std::vector<const Matrix<T>*> pick(slots.size());
  std::function<void(std::size_t, Deg)> rec = [&](std::size_t i, Deg d) {
    if (i == slots.size()) {
      fn(pick, d);
      return;
    }
    for (const auto& [e, m] : slots[i]->terms()) {
      auto nd = d + e;
      if (total(nd) > N || nd[1] > 1) continue;
      pick[i] = &m;
      rec(i + 1, nd);
    }
  };
  rec(0, {0, 0, 0});
}

template <class T>
int min_degree(const TruncatedSeries<T>& s) {
  int best = std::numeric_limits<int>::max();
  for (const auto& [d, m] : s.terms())
    if (!m.is_zero()) best = std::min(best, total(d));
  return best;
}

}  // namespace detail

// M(b) = 1 + sum E((C_b Z)^m) and the F version, b = t b0 with t = t_b (left) or t_d (right)
template <class T>
MomentSeries<T> one_sided_moment_series(Engine<T>& eng, const Entry<T>& Z, Face side, const BElem<T>& b0, int N) {
  const auto& ctx = eng.ctx();
  MomentSeries<T> out{TruncatedSeries<T>::constant(N, ctx.one_B()), TruncatedSeries<T>::constant(N, ctx.one_D())};
  bool l = side == Face::l;
  auto step = Z.prepend(l ? Atom<T>::LB(b0) : Atom<T>::RB(b0));
  for (int m = 1; m <= N; ++m) {
    auto w = detail::repeat(step, m);
    auto ch = ChiWord(std::vector<Face>(m, side));
    auto [e, f] = eng.moments(ch, w);
    Deg d = l ? Deg{m, 0, 0} : Deg{0, 0, m};
    out.M.add(d, e);
    out.MM.add(d, f);
  }
  return out;
}

// M(b, c, d) = sum_{m,n >= 0} E((L_b Z_l)^m (R_d Z_r)^n R_c) and the F version
template <class T>
MomentSeries<T> two_sided_moment_series(Engine<T>& eng, const Entry<T>& Zl, const Entry<T>& Zr, const BElem<T>& b0,
                                        const BElem<T>& c0, const BElem<T>& d0, int N) {
  const auto& ctx = eng.ctx();
  MomentSeries<T> out{TruncatedSeries<T>(N, ctx.dim_B()), TruncatedSeries<T>(N, ctx.dim_D())};
  auto lb = Zl.prepend(Atom<T>::LB(b0));
  auto rd = Zr.prepend(Atom<T>::RB(d0));
  for (int m = 0; m + 1 <= N; ++m)
    for (int n = 0; m + n + 1 <= N; ++n) {
      if (m + n == 0) {
        // E(R_c) = c and F(R_c) = c
        out.M.add({0, 1, 0}, c0);
        out.MM.add({0, 1, 0}, ctx.b_to_d(c0));
        continue;
      }
      OpWord<T> w = detail::repeat(lb, m);
      for (int k = 0; k < n; ++k) w.push_back(rd);
      w.back() = w.back().append(Atom<T>::RB(c0));
      auto [e, f] = eng.moments(ChiWord::lr(m, n), w);
      out.M.add({m, 1, n}, e);
      out.MM.add({m, 1, n}, f);
    }
  return out;
}

// C(beta) = 1 + sum_m K_{1_{m,0}}(C_beta Z, ..., C_beta Z) with beta a B-valued series
template <class T>
TruncatedSeries<T> one_sided_cumulant_series(Engine<T>& eng, const Entry<T>& Z, Face side,
                                             const TruncatedSeries<T>& beta) {
  const auto& ctx = eng.ctx();
  int N = beta.degree();
  auto out = TruncatedSeries<T>::constant(N, ctx.one_D());
  int md = detail::min_degree(beta);
  if (md == std::numeric_limits<int>::max()) return out;
  if (md < 1) throw validation_error("substituted series needs zero constant term");
  bool l = side == Face::l;
  for (int m = 1; m * md <= N; ++m) {
    std::vector<const TruncatedSeries<T>*> slots(m, &beta);
    auto ch = ChiWord(std::vector<Face>(m, side));
    detail::for_each_choice<T>(slots, N, [&](const std::vector<const Matrix<T>*>& pick, const Deg& d) {
      OpWord<T> w;
      for (int k = 0; k < m; ++k) w.push_back(Z.prepend(l ? Atom<T>::LB(*pick[k]) : Atom<T>::RB(*pick[k])));
      out.add(d, eng.K1(ch, w));
    });
  }
  return out;
}

// C(b, c, d) = c + sum_m K(L_b Z_l, .., L_b Z_l L_c) + sum_{m, n >= 1} K(L_b Z_l x m, R_d Z_r x (n-1), R_d Z_r R_c)
template <class T>
TruncatedSeries<T> two_sided_cumulant_series(Engine<T>& eng, const Entry<T>& Zl, const Entry<T>& Zr,
                                             const TruncatedSeries<T>& bb, const TruncatedSeries<T>& cc,
                                             const TruncatedSeries<T>& dd) {
  const auto& ctx = eng.ctx();
  int N = bb.degree();
  auto emb = [&](const Matrix<T>& x) { return ctx.b_to_d(x); };
  auto out = cc.map(emb, ctx.dim_D());
  int mb = detail::min_degree(bb), md = detail::min_degree(dd), mc = detail::min_degree(cc);
  if (mc == std::numeric_limits<int>::max()) return out;
  if (mb < 1 || md < 1) throw validation_error("substituted b and d series need zero constant term");
  auto fits = [&](long long m, long long n) { return m * mb + n * md + mc <= N; };
  for (int m = 0; fits(m, 0) || fits(m, 1); ++m)
    for (int n = 0; fits(m, n); ++n) {
      if (m + n == 0) continue;
      std::vector<const TruncatedSeries<T>*> slots;
      for (int k = 0; k < m; ++k) slots.push_back(&bb);
      for (int k = 0; k < n; ++k) slots.push_back(&dd);
      slots.push_back(&cc);
      auto ch = ChiWord::lr(m, n);
      detail::for_each_choice<T>(slots, N, [&](const std::vector<const Matrix<T>*>& pick, const Deg& d) {
        OpWord<T> w;
        for (int k = 0; k < m; ++k) w.push_back(Zl.prepend(Atom<T>::LB(*pick[k])));
        for (int k = 0; k < n; ++k) w.push_back(Zr.prepend(Atom<T>::RB(*pick[m + k])));
        const auto& c = *pick.back();
        w.back() = w.back().append(n == 0 ? Atom<T>::LB(c) : Atom<T>::RB(c));
        out.add(d, eng.K1(ch, w));
      });
    }
  return out;
}

// plain cumulant series: b = t_b b0, c = t_c c0, d = t_d d0
template <class T>
TruncatedSeries<T> two_sided_cumulant_series(Engine<T>& eng, const Entry<T>& Zl, const Entry<T>& Zr,
                                             const BElem<T>& b0, const BElem<T>& c0, const BElem<T>& d0, int N) {
  using S = TruncatedSeries<T>;
  return two_sided_cumulant_series(eng, Zl, Zr, S::monomial(N, {1, 0, 0}, b0), S::monomial(N, {0, 1, 0}, c0),
                                   S::monomial(N, {0, 0, 1}, d0));
}

template <class T>
TruncatedSeries<T> one_sided_cumulant_series(Engine<T>& eng, const Entry<T>& Z, Face side, const BElem<T>& b0,
                                             int N) {
  Deg d = side == Face::l ? Deg{1, 0, 0} : Deg{0, 0, 1};
  return one_sided_cumulant_series(eng, Z, side, TruncatedSeries<T>::monomial(N, d, b0));
}

// left:  C(M(b) b) = 1 + M(b) - M(b) MM(b)^{-1}
// right: C(d M(d)) = 1 + M(d) - MM(d)^{-1} M(d)
template <class T>
Report check_cumulant_transform(Engine<T>& eng, const Entry<T>& Z, Face side, const BElem<T>& b0, int N,
                                double tol = 1e-9) {
  using S = TruncatedSeries<T>;
  const auto& ctx = eng.ctx();
  bool l = side == Face::l;
  auto ms = one_sided_moment_series(eng, Z, side, b0, N);
  auto b = S::monomial(N, l ? Deg{1, 0, 0} : Deg{0, 0, 1}, b0);
  auto arg = l ? ms.M * b : b * ms.M;
  auto lhs = one_sided_cumulant_series(eng, Z, side, arg);
  auto emb = [&](const Matrix<T>& x) { return ctx.b_to_d(x); };
  auto M = ms.M.map(emb, ctx.dim_D());
  auto one = S::constant(N, ctx.one_D());
  auto rhs = one + M - (l ? M * ms.MM.inverse() : ms.MM.inverse() * M);
  auto r = compare_series(l ? "left cumulant transform" : "right cumulant transform", lhs, rhs, tol);
  r.name = l ? "cumulant-transform-left" : "cumulant-transform-right";
  return r;
}

template <class T>
struct PartialRSides {
  TruncatedSeries<T> lhs, rhs;
  MomentSeries<T> left, right, both;
};

template <class T>
PartialRSides<T> partial_R_sides(Engine<T>& eng, const Entry<T>& Zl, const Entry<T>& Zr, const BElem<T>& b0,
                                 const BElem<T>& c0, const BElem<T>& d0, int N) {
  using S = TruncatedSeries<T>;
  const auto& ctx = eng.ctx();
  auto L = one_sided_moment_series(eng, Zl, Face::l, b0, N);
  auto R = one_sided_moment_series(eng, Zr, Face::r, d0, N);
  auto M2 = two_sided_moment_series(eng, Zl, Zr, b0, c0, d0, N);
  auto bb = L.M * S::monomial(N, {1, 0, 0}, b0);
  auto dd = S::monomial(N, {0, 0, 1}, d0) * R.M;
  auto lhs = two_sided_cumulant_series(eng, Zl, Zr, bb, M2.M, dd);
  auto emb = [&](const Matrix<T>& x) { return ctx.b_to_d(x); };
  auto Ml = L.M.map(emb, ctx.dim_D()), Mr = R.M.map(emb, ctx.dim_D()), M = M2.M.map(emb, ctx.dim_D());
  auto c = S::monomial(N, {0, 1, 0}, ctx.b_to_d(c0));
  auto one = S::constant(N, ctx.one_D());
  auto Il = L.MM.inverse(), Ir = R.MM.inverse();
  auto rhs = Ml * Il * M2.MM * Ir * Mr + M + Ml * (one - Il) * M + M * (one - Ir) * Mr - Ml * c * Mr;
  return {lhs, rhs, L, R, M2};
}

// C(M^l(b) b, M(b,c,d), d M^r(d)) against the five-term right side
template <class T>
Report check_partial_R(Engine<T>& eng, const Entry<T>& Zl, const Entry<T>& Zr, const BElem<T>& b0, const BElem<T>& c0,
                       const BElem<T>& d0, int N, double tol = 1e-9) {
  auto s = partial_R_sides(eng, Zl, Zr, b0, c0, d0, N);
  auto r = compare_series("partial R-transform identity", s.lhs, s.rhs, tol);
  r.name = "partial-R";
  return r;
}

// with F = E the right side collapses to M^l M + M M^r - M^l c M^r
template <class T>
Report check_bifree_degeneration(Engine<T>& eng, const Entry<T>& Zl, const Entry<T>& Zr, const BElem<T>& b0,
                                 const BElem<T>& c0, const BElem<T>& d0, int N, double tol = 1e-9) {
  using S = TruncatedSeries<T>;
  const auto& ctx = eng.ctx();
  if (ctx.dim_B() != ctx.dim_D()) throw validation_error("bi-free degeneration needs B = D");
  auto s = partial_R_sides(eng, Zl, Zr, b0, c0, d0, N);
  Report r{"bifree-degeneration", {}, {}};
  r.merge(compare_series("F moments equal E moments (left)", s.left.MM, s.left.M, tol));
  r.merge(compare_series("F moments equal E moments (right)", s.right.MM, s.right.M, tol));
  r.merge(compare_series("F moments equal E moments (two-sided)", s.both.MM, s.both.M, tol));
  auto c = S::monomial(N, {0, 1, 0}, c0);
  auto bifree = s.left.M * s.both.M + s.both.M * s.right.M - s.left.M * c * s.right.M;
  r.merge(compare_series("bi-free partial R identity", s.lhs, bifree, tol));
  return r;
}

// C_{(Z1+Z2)} - c = (C_{Z1} - c) + (C_{Z2} - c) for pairs from different families
template <class T>
Report check_additivity(Engine<T>& eng, const Entry<T>& Z1l, const Entry<T>& Z1r, const Entry<T>& Z2l,
                        const Entry<T>& Z2r, const BElem<T>& b0, const BElem<T>& c0, const BElem<T>& d0, int N,
                        double tol = 1e-9) {
  using S = TruncatedSeries<T>;
  auto c = S::monomial(N, {0, 1, 0}, eng.ctx().b_to_d(c0));
  auto sum = two_sided_cumulant_series(eng, Z1l + Z2l, Z1r + Z2r, b0, c0, d0, N) - c;
  auto a = two_sided_cumulant_series(eng, Z1l, Z1r, b0, c0, d0, N) - c;
  auto b = two_sided_cumulant_series(eng, Z2l, Z2r, b0, c0, d0, N) - c;
  auto r = compare_series("partial R-transform additivity", sum, a + b, tol);
  r.name = "additivity";
  return r;
}

}  // namespace cbf
