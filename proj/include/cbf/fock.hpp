#pragma once

// Truncated amalgamated free products of pointed bimodules over B = M_s.
//
// Every B-B-bimodule over a full matrix algebra is M_s (x) U, so a factor is
// X = M_s (x) (Q e0 + U) with B = M_s (x) e0 and the reduced part M_s (x) U.
// The free product is then M_s (x) T where T is spanned by the empty word and
// alternating words of generator letters (k, a).  A vector stores one s x s
// coefficient block per word of T.

#include "cbf/algebra.hpp"

#include <atomic>
#include <map>
#include <set>
#include <unordered_map>

namespace cbf {

struct truncation_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// pointed bimodule M_s (x) (Q e0 + U) with q(m (x) u_a) = embed(m) theta_a
template <class T>
struct Factor {
  std::shared_ptr<const AlgebraContext<T>> ctx;
  int reduced_dim = 0;
  std::vector<DElem<T>> theta;
  std::string name = "factor";

  void validate() const {
    if (!ctx) throw validation_error("factor without algebra context");
    if (reduced_dim < 0 || static_cast<int>(theta.size()) != reduced_dim)
      throw validation_error("factor needs one q-value per reduced generator");
    for (const auto& t : theta) {
      if (t.rows() != static_cast<std::size_t>(ctx->dim_D()) || !t.square())
        throw validation_error("q-value has wrong size");
      for (int i = 0; i < ctx->dim_B(); ++i)
        for (int j = 0; j < ctx->dim_B(); ++j) {
          const auto& e = ctx->unit_image(i, j);
          if (max_abs_diff(t * e, e * t) > (scalar_traits<T>::exact ? 0.0 : 1e-12))
            throw validation_error("q-map is not a bimodule map: q-value does not commute with B");
        }
    }
  }

  nlohmann::json descriptor() const {
    auto th = nlohmann::json::array();
    for (const auto& t : theta) th.push_back(to_json(t));
    return {{"name", name}, {"reduced_dim", reduced_dim}, {"theta", th}, {"context", ctx->descriptor()}};
  }
};

template <class T>
Factor<T> factor_from_json(std::shared_ptr<const AlgebraContext<T>> ctx, const nlohmann::json& j) {
  Factor<T> f;
  f.ctx = std::move(ctx);
  f.reduced_dim = j.at("reduced_dim").get<int>();
  for (const auto& m : j.at("theta")) f.theta.push_back(matrix_from_json<T>(m));
  if (j.contains("name")) f.name = j["name"].get<std::string>();
  f.validate();
  return f;
}

// random combination of the centralizer basis
template <class T>
DElem<T> random_central(const AlgebraContext<T>& ctx, std::mt19937_64& rng) {
  DElem<T> x = ctx.zero_D();
  for (const auto& c : ctx.centralizer()) x += c * random_scalar<T>(rng);
  return x;
}

// stock factors
template <class T>
Factor<T> random_factor(std::shared_ptr<const AlgebraContext<T>> ctx, int dim_u, std::mt19937_64& rng) {
  Factor<T> f{ctx, dim_u, {}, "random"};
  for (int a = 0; a < dim_u; ++a) f.theta.push_back(random_central(*ctx, rng));
  f.validate();
  return f;
}

template <class T>
Factor<T> scalar_factor(std::shared_ptr<const AlgebraContext<T>> ctx, int dim_u, const std::vector<T>& q) {
  Factor<T> f{ctx, dim_u, {}, "scalar"};
  for (int a = 0; a < dim_u; ++a) f.theta.push_back(ctx->one_D() * q.at(a));
  f.validate();
  return f;
}

// q-values c_a N with N a nilpotent central element (zero when D = B)
template <class T>
Factor<T> nilpotent_factor(std::shared_ptr<const AlgebraContext<T>> ctx, int dim_u, std::mt19937_64& rng) {
  int r = ctx->dim_D() / ctx->dim_B();
  DElem<T> n = ctx->zero_D();
  if (r >= 2) n = kron(Matrix<T>::unit(r, 0, r - 1), Matrix<T>::identity(ctx->dim_B()));
  Factor<T> f{ctx, dim_u, {}, "nilpotent"};
  for (int a = 0; a < dim_u; ++a) f.theta.push_back(n * random_scalar<T>(rng));
  f.validate();
  return f;
}

// q = 0 on the reduced part, so F agrees with E on every moment
template <class T>
Factor<T> vacuum_factor(std::shared_ptr<const AlgebraContext<T>> ctx, int dim_u) {
  Factor<T> f{ctx, dim_u, std::vector<DElem<T>>(dim_u, ctx->zero_D()), "vacuum"};
  f.validate();
  return f;
}

// q-values come in equal pairs, so operators can be centered for both E and F
template <class T>
Factor<T> paired_factor(std::shared_ptr<const AlgebraContext<T>> ctx, int pairs, std::mt19937_64& rng) {
  Factor<T> f{ctx, 2 * pairs, {}, "paired"};
  for (int a = 0; a < pairs; ++a) {
    auto t = random_central(*ctx, rng);
    f.theta.push_back(t);
    f.theta.push_back(t);
  }
  f.validate();
  return f;
}

enum class AtomKind { LB, RB, Left, Right };

// one operator: L_b, R_b, or a lifted left/right factor operator given by its
// reduced matrix (index a*s + i on U' (x) Q^s for both sides)
namespace detail {
inline std::uint64_t next_atom_id() {
  static std::atomic<std::uint64_t> counter{0};
  return ++counter;
}
}  // namespace detail

template <class T>
struct Atom {
  AtomKind kind;
  int family = -1;
  std::shared_ptr<const Matrix<T>> m;
  std::uint64_t id = 0;  // lifted operators only; never reused

  static Atom LB(BElem<T> b) { return {AtomKind::LB, -1, std::make_shared<const Matrix<T>>(std::move(b))}; }
  static Atom RB(BElem<T> b) { return {AtomKind::RB, -1, std::make_shared<const Matrix<T>>(std::move(b))}; }
  static Atom left(int fam, Matrix<T> z) {
    return {AtomKind::Left, fam, std::make_shared<const Matrix<T>>(std::move(z)), detail::next_atom_id()};
  }
  static Atom right(int fam, Matrix<T> z) {
    return {AtomKind::Right, fam, std::make_shared<const Matrix<T>>(std::move(z)), detail::next_atom_id()};
  }
  bool is_b() const { return kind == AtomKind::LB || kind == AtomKind::RB; }
  Face face() const { return kind == AtomKind::LB || kind == AtomKind::Left ? Face::l : Face::r; }
};

// linear combination of atom products; atoms[0] is leftmost
template <class T>
struct Entry {
  struct Term {
    T coeff;
    std::vector<Atom<T>> atoms;
  };
  std::vector<Term> terms;

  Entry() = default;
  explicit Entry(Atom<T> a) { terms.push_back({T(1), {std::move(a)}}); }
  static Entry identity() {
    Entry e;
    e.terms.push_back({T(1), {}});
    return e;
  }

  // C * this
  Entry prepend(const Atom<T>& a) const {
    Entry e = *this;
    for (auto& t : e.terms) t.atoms.insert(t.atoms.begin(), a);
    return e;
  }
  // this * C
  Entry append(const Atom<T>& a) const {
    Entry e = *this;
    for (auto& t : e.terms) t.atoms.push_back(a);
    return e;
  }
  friend Entry operator*(const Entry& x, const Entry& y) {
    Entry e;
    for (const auto& s : x.terms)
      for (const auto& t : y.terms) {
        typename Entry::Term u{s.coeff * t.coeff, s.atoms};
        u.atoms.insert(u.atoms.end(), t.atoms.begin(), t.atoms.end());
        e.terms.push_back(std::move(u));
      }
    return e;
  }
  friend Entry operator+(Entry x, const Entry& y) {
    x.terms.insert(x.terms.end(), y.terms.begin(), y.terms.end());
    return x;
  }
  friend Entry operator*(const T& c, Entry x) {
    for (auto& t : x.terms) t.coeff *= c;
    return x;
  }

  std::set<int> families() const {
    std::set<int> f;
    for (const auto& t : terms)
      for (const auto& a : t.atoms)
        if (!a.is_b()) f.insert(a.family);
    return f;
  }
  int lifted_count() const {
    int best = 0;
    for (const auto& t : terms) {
      int c = 0;
      for (const auto& a : t.atoms) c += !a.is_b();
      best = std::max(best, c);
    }
    return best;
  }
};

template <class T>
using OpWord = std::vector<Entry<T>>;

// black-box (E, F) on products Z_1 ... Z_n
template <class T>
class ExpectationPair {
 public:
  virtual ~ExpectationPair() = default;
  virtual BElem<T> E(const OpWord<T>& w) const = 0;
  virtual DElem<T> F(const OpWord<T>& w) const = 0;
  virtual const AlgebraContext<T>& ctx() const = 0;
  // both values at once; representations override to share the work
  virtual std::pair<BElem<T>, DElem<T>> EF(const OpWord<T>& w) const { return {E(w), F(w)}; }
};

template <class T>
class RepSpace : public ExpectationPair<T> {
 public:
  using Letter = std::pair<int, int>;  // (local factor, generator 1..dU)
  using Vec = std::map<int, Matrix<T>>;

  // family_map[f] = local factor index serving family f; default: factor k serves family k
  RepSpace(std::vector<Factor<T>> factors, int max_word_len, std::map<int, int> family_map = {})
      : factors_(std::move(factors)), L_(max_word_len), fam_(std::move(family_map)) {
    if (factors_.empty()) throw validation_error("free product needs at least one factor");
    ctx_ = factors_.front().ctx;
    for (const auto& f : factors_) {
      f.validate();
      if (f.ctx->dim_B() != ctx_->dim_B() || f.ctx->dim_D() != ctx_->dim_D())
        throw validation_error("incompatible factor contexts");
    }
    if (L_ < 0) throw validation_error("max_word_len must be non-negative");
    if (fam_.empty())
      for (int k = 0; k < static_cast<int>(factors_.size()); ++k) fam_[k] = k;
    for (auto& [f, k] : fam_)
      if (k < 0 || k >= static_cast<int>(factors_.size())) throw validation_error("family mapped to missing factor");
    s_ = ctx_->dim_B();
    build_words();
  }

  const AlgebraContext<T>& ctx() const override { return *ctx_; }
  std::shared_ptr<const AlgebraContext<T>> ctx_ptr() const { return ctx_; }
  int max_word_len() const { return L_; }
  int basis_words() const { return static_cast<int>(words_.size()); }
  int dim() const { return basis_words() * s_ * s_; }
  const std::vector<std::vector<Letter>>& words() const { return words_; }
  const std::vector<Factor<T>>& factors() const { return factors_; }
  bool serves(int family) const { return fam_.count(family) > 0; }
  const std::map<int, int>& family_map() const { return fam_; }

  // sparse vector: one s x s coefficient block per basis word, zero blocks omitted
  Vec vacuum() const { return Vec{{0, ctx_->one_B()}}; }

  // flat layout x[(t*s + i)*s + j]
  std::vector<T> dense(const Vec& x) const {
    std::vector<T> out(dim(), T(0));
    for (const auto& [t, m] : x)
      for (int i = 0; i < s_; ++i)
        for (int j = 0; j < s_; ++j) out[(t * s_ + i) * s_ + j] = m(i, j);
    return out;
  }
  Vec sparse(const std::vector<T>& flat) const {
    if (static_cast<int>(flat.size()) != dim()) throw dimension_error("vector has wrong size");
    Vec x;
    for (int t = 0; t < basis_words(); ++t) {
      Matrix<T> m(s_, s_);
      for (int i = 0; i < s_; ++i)
        for (int j = 0; j < s_; ++j) m(i, j) = flat[(t * s_ + i) * s_ + j];
      if (!m.is_zero()) x.emplace(t, std::move(m));
    }
    return x;
  }

  Vec apply(const Atom<T>& a, const Vec& x) const {
    switch (a.kind) {
      case AtomKind::LB:
        return mult_b(*a.m, x, true);
      case AtomKind::RB:
        return mult_b(*a.m, x, false);
      case AtomKind::Left:
        return lift_apply(local(a.family), *a.m, x, true);
      case AtomKind::Right:
        return lift_apply(local(a.family), *a.m, x, false);
    }
    return x;
  }

  Vec apply(const Entry<T>& e, const Vec& x) const {
    Vec out;
    for (const auto& t : e.terms) {
      Vec y = x;
      for (auto it = t.atoms.rbegin(); it != t.atoms.rend(); ++it) y = apply(*it, y);
      for (auto& [w, m] : y) add_block(out, w, m * t.coeff);
    }
    prune(out);
    return out;
  }

  Vec apply(const OpWord<T>& w, Vec x) const {
    for (auto it = w.rbegin(); it != w.rend(); ++it) x = apply(*it, x);
    return x;
  }

  BElem<T> p(const Vec& x) const {
    auto it = x.find(0);
    return it == x.end() ? ctx_->zero_B() : it->second;
  }

  DElem<T> q(const Vec& x) const {
    DElem<T> d = ctx_->zero_D();
    for (const auto& [t, m] : x) d += ctx_->b_to_d(m) * theta_[t];
    return d;
  }

  BElem<T> E(const OpWord<T>& w) const override { return p(apply(w, vacuum())); }
  DElem<T> F(const OpWord<T>& w) const override { return q(apply(w, vacuum())); }
  std::pair<BElem<T>, DElem<T>> EF(const OpWord<T>& w) const override {
    auto x = apply(w, vacuum());
    return {p(x), q(x)};
  }

  // matrix of an atom on the whole truncated space (columns = images of basis vectors)
  Matrix<T> materialize(const Atom<T>& a) const {
    Matrix<T> m(dim(), dim());
    for (int c = 0; c < dim(); ++c) {
      std::vector<T> e(dim(), T(0));
      e[c] = T(1);
      auto y = dense(apply(a, sparse(e)));
      for (int r = 0; r < dim(); ++r) m(r, c) = y[r];
    }
    return m;
  }

  nlohmann::json manifest() const {
    auto fs = nlohmann::json::array();
    for (const auto& f : factors_) fs.push_back(f.descriptor());
    auto fm = nlohmann::json::object();
    for (auto& [f, k] : fam_) fm[std::to_string(f)] = k;
    return {{"factors", fs}, {"max_word_len", L_}, {"basis_words", basis_words()}, {"family_map", fm}};
  }

 private:
  struct Group {
    std::vector<int> child;  // child[0] = base word, child[a] = word with letter (k,a) attached, -1 if too long
  };

  int local(int family) const {
    auto it = fam_.find(family);
    if (it == fam_.end()) throw validation_error("operator family " + std::to_string(family) + " not in this space");
    return it->second;
  }

  static void add_block(Vec& out, int t, Matrix<T> m) {
    auto it = out.find(t);
    if (it == out.end())
      out.emplace(t, std::move(m));
    else
      it->second += m;
  }
  static void prune(Vec& x) {
    for (auto it = x.begin(); it != x.end();) it = it->second.is_zero() ? x.erase(it) : std::next(it);
  }

  Vec mult_b(const Matrix<T>& b, const Vec& x, bool from_left) const {
    if (b.rows() != static_cast<std::size_t>(s_) || !b.square()) throw dimension_error("B element has wrong size");
    Vec y;
    for (const auto& [t, m] : x) {
      auto v = from_left ? b * m : m * b;
      if (!v.is_zero()) y.emplace(t, std::move(v));
    }
    return y;
  }

  // left ops act on the (letter, i) leg with j fixed, right ops on (letter, j) with i fixed
  Vec lift_apply(int k, const Matrix<T>& z, const Vec& x, bool left) const {
    int du = factors_[k].reduced_dim, w = 1 + du;
    if (z.rows() != static_cast<std::size_t>(w * s_) || !z.square())
      throw dimension_error("lifted operator has wrong reduced size");
    const auto& groups = left ? left_groups_[k] : right_groups_[k];
    const auto& member = left ? left_member_[k] : right_member_[k];
    std::vector<int> active;
    for (const auto& [t, m] : x) active.push_back(member[t]);
    std::sort(active.begin(), active.end());
    active.erase(std::unique(active.begin(), active.end()), active.end());
    Vec y;
    for (int gi : active) {
      const auto& g = groups[gi];
      Matrix<T> v(w * s_, s_);
      for (int a = 0; a < w; ++a) {
        if (g.child[a] < 0) continue;
        auto it = x.find(g.child[a]);
        if (it == x.end()) continue;
        for (int c = 0; c < s_; ++c)
          for (int o = 0; o < s_; ++o) v(a * s_ + c, o) = left ? it->second(c, o) : it->second(o, c);
      }
      auto out = z * v;
      for (int a = 0; a < w; ++a) {
        Matrix<T> blk(s_, s_);
        for (int c = 0; c < s_; ++c)
          for (int o = 0; o < s_; ++o) (left ? blk(c, o) : blk(o, c)) = out(a * s_ + c, o);
        if (blk.is_zero()) continue;
        if (g.child[a] < 0)
          throw truncation_error("tensor word longer than max_word_len = " + std::to_string(L_) +
                                 "; raise the truncation length");
        add_block(y, g.child[a], std::move(blk));
      }
    }
    prune(y);
    return y;
  }

  void build_words() {
    std::map<std::vector<Letter>, int> idx;
    words_.push_back({});
    idx[{}] = 0;
    for (std::size_t cur = 0; cur < words_.size(); ++cur) {
      auto base = words_[cur];
      if (static_cast<int>(base.size()) >= L_) continue;
      for (int k = 0; k < static_cast<int>(factors_.size()); ++k) {
        if (!base.empty() && base.back().first == k) continue;
        for (int a = 1; a <= factors_[k].reduced_dim; ++a) {
          auto wd = base;
          wd.push_back({k, a});
          idx[wd] = static_cast<int>(words_.size());
          words_.push_back(wd);
        }
      }
    }
    auto find = [&](const std::vector<Letter>& wd) {
      auto it = idx.find(wd);
      return it == idx.end() ? -1 : it->second;
    };
    int nf = static_cast<int>(factors_.size());
    left_groups_.assign(nf, {});
    right_groups_.assign(nf, {});
    for (int t = 0; t < basis_words(); ++t) {
      const auto& wd = words_[t];
      for (int k = 0; k < nf; ++k) {
        int du = factors_[k].reduced_dim;
        if (wd.empty() || wd.front().first != k) {
          Group g{{t}};
          for (int a = 1; a <= du; ++a) {
            std::vector<Letter> c{{k, a}};
            c.insert(c.end(), wd.begin(), wd.end());
            g.child.push_back(static_cast<int>(c.size()) > L_ ? -1 : find(c));
          }
          left_groups_[k].push_back(std::move(g));
        }
        if (wd.empty() || wd.back().first != k) {
          Group g{{t}};
          for (int a = 1; a <= du; ++a) {
            auto c = wd;
            c.push_back({k, a});
            g.child.push_back(static_cast<int>(c.size()) > L_ ? -1 : find(c));
          }
          right_groups_[k].push_back(std::move(g));
        }
      }
    }
    left_member_.assign(nf, std::vector<int>(basis_words(), -1));
    right_member_.assign(nf, std::vector<int>(basis_words(), -1));
    for (int k = 0; k < nf; ++k)
      for (int side = 0; side < 2; ++side) {
        auto& gs = side == 0 ? left_groups_[k] : right_groups_[k];
        auto& mem = side == 0 ? left_member_[k] : right_member_[k];
        for (int gi = 0; gi < static_cast<int>(gs.size()); ++gi)
          for (int t : gs[gi].child)
            if (t >= 0) mem[t] = gi;
      }
    for (const auto& wd : words_) {
      DElem<T> th = ctx_->one_D();
      for (auto [k, a] : wd) th = th * factors_[k].theta[a - 1];
      theta_.push_back(std::move(th));
    }
  }

  std::vector<Factor<T>> factors_;
  int L_;
  std::map<int, int> fam_;
  std::shared_ptr<const AlgebraContext<T>> ctx_;
  int s_ = 1;
  std::vector<std::vector<Letter>> words_;
  std::vector<std::vector<Group>> left_groups_, right_groups_;
  std::vector<std::vector<int>> left_member_, right_member_;  // word -> group holding it
  std::vector<DElem<T>> theta_;
};

template <class T>
std::shared_ptr<const RepSpace<T>> free_product(std::vector<Factor<T>> factors, int max_word_len,
                                                std::map<int, int> family_map = {}) {
  return std::make_shared<const RepSpace<T>>(std::move(factors), max_word_len, std::move(family_map));
}

// reduced form of L_b, R_b on a factor with reduced dimension du
template <class T>
Matrix<T> reduced_of_b(const BElem<T>& b, int du, bool left) {
  return left ? kron(Matrix<T>::identity(du + 1), b) : kron(Matrix<T>::identity(du + 1), b.transpose());
}

namespace detail {
// z == kron(A, I_s) (left) or kron-like split on the other leg; returns the reduced part or throws
template <class T>
Matrix<T> split_full(const Matrix<T>& full, int s, int du, bool left) {
  int w = du + 1;
  if (full.rows() != static_cast<std::size_t>(w * s * s) || !full.square())
    throw dimension_error("factor operator has wrong size");
  // full index: (a, i, j) -> (a*s + i)*s + j
  Matrix<T> red(w * s, w * s);
  for (int a = 0; a < w; ++a)
    for (int i = 0; i < s; ++i)
      for (int b = 0; b < w; ++b)
        for (int k = 0; k < s; ++k) {
          // left: acts on (a,i) with j fixed; right: acts on (a,j) with i fixed
          red(a * s + i, b * s + k) = left ? full((a * s + i) * s + 0, (b * s + k) * s + 0)
                                           : full((a * s + 0) * s + i, (b * s + 0) * s + k);
        }
  for (int a = 0; a < w; ++a)
    for (int i = 0; i < s; ++i)
      for (int j = 0; j < s; ++j)
        for (int b = 0; b < w; ++b)
          for (int k = 0; k < s; ++k)
            for (int l = 0; l < s; ++l) {
              T want = T(0);
              if (left && j == l) want = red(a * s + i, b * s + k);
              if (!left && i == k) want = red(a * s + j, b * s + l);
              if (full((a * s + i) * s + j, (b * s + k) * s + l) != want)
                throw face_error(left ? "operator does not commute with the right B-action"
                                      : "operator does not commute with the left B-action");
            }
  return red;
}
}  // namespace detail

// lift an operator given on the whole factor X_k = M_s (x) U' (index (a,i,j))
template <class T>
Atom<T> lift_left(const RepSpace<T>& sp, int family, const Matrix<T>& full_on_factor) {
  int k = sp.family_map().at(family);
  return Atom<T>::left(family, detail::split_full(full_on_factor, sp.ctx().dim_B(), sp.factors()[k].reduced_dim, true));
}

template <class T>
Atom<T> lift_right(const RepSpace<T>& sp, int family, const Matrix<T>& full_on_factor) {
  int k = sp.family_map().at(family);
  return Atom<T>::right(family,
                        detail::split_full(full_on_factor, sp.ctx().dim_B(), sp.factors()[k].reduced_dim, false));
}

template <class T>
Matrix<T> full_of_reduced(const Matrix<T>& red, int s, int du, bool left) {
  int w = du + 1;
  Matrix<T> full(w * s * s, w * s * s);
  for (int a = 0; a < w; ++a)
    for (int i = 0; i < s; ++i)
      for (int j = 0; j < s; ++j)
        for (int b = 0; b < w; ++b)
          for (int k = 0; k < s; ++k)
            for (int l = 0; l < s; ++l) {
              if (left && j == l) full((a * s + i) * s + j, (b * s + k) * s + l) = red(a * s + i, b * s + k);
              if (!left && i == k) full((a * s + i) * s + j, (b * s + k) * s + l) = red(a * s + j, b * s + l);
            }
  return full;
}

// vacuum column block: M_a[i][j] = <a,i| Z |0,j> (left) or <a,j| Z |0,i> (right)
template <class T>
Matrix<T> vacuum_image(const Matrix<T>& red, int s, int a, bool left) {
  Matrix<T> m(s, s);
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < s; ++j) m(i, j) = left ? red(a * s + i, j) : red(a * s + j, i);
  return m;
}

struct centering_error : std::domain_error {
  using std::domain_error::domain_error;
};

// rewrite the vacuum column so that E(Z) = 0 and F(Z) = 0 while keeping it generic
template <class T>
void center_reduced(Matrix<T>& z, const Factor<T>& f, std::mt19937_64& rng, bool left) {
  const auto& ctx = *f.ctx;
  int s = ctx.dim_B(), du = f.reduced_dim, d = ctx.dim_D();
  // E part: the (a=0) rows of the vacuum column
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < s; ++j) (left ? z(i, j) : z(j, i)) = T(0);
  if (du == 0) return;
  // F part: sum_a embed(M_a) theta_a = 0, linear in the s*s*du unknowns
  int nu = s * s * du;
  Matrix<T> sys(d * d, nu);
  for (int a = 1; a <= du; ++a)
    for (int i = 0; i < s; ++i)
      for (int j = 0; j < s; ++j) {
        auto img = ctx.unit_image(i, j) * f.theta[a - 1];
        int col = ((a - 1) * s + i) * s + j;
        for (int r = 0; r < d * d; ++r) sys(r, col) = img.data()[r];
      }
  auto ker = nullspace(sys);
  if (ker.empty()) throw centering_error("q-map leaves no centered vacuum image for this factor");
  std::vector<T> v(nu, T(0));
  for (const auto& kv : ker) {
    T c = random_scalar<T>(rng);
    for (int u = 0; u < nu; ++u) v[u] += c * kv[u];
  }
  for (int a = 1; a <= du; ++a)
    for (int i = 0; i < s; ++i)
      for (int j = 0; j < s; ++j) {
        const T& val = v[((a - 1) * s + i) * s + j];
        (left ? z(a * s + i, j) : z(a * s + j, i)) = val;
      }
}

template <class T>
struct FacePair {
  std::vector<Atom<T>> left, right;
  std::uint64_t seed;
};

// deterministic random generators of L_l / L_r for factor family k
template <class T>
FacePair<T> random_pair(const RepSpace<T>& sp, int family, std::uint64_t seed, double density = 0.7, int count = 1,
                        bool centered = false) {
  std::mt19937_64 rng(seed);
  int k = sp.family_map().at(family);
  const auto& f = sp.factors()[k];
  int s = sp.ctx().dim_B(), w = f.reduced_dim + 1;
  FacePair<T> out{{}, {}, seed};
  for (int c = 0; c < count; ++c) {
    for (int side = 0; side < 2; ++side) {
      auto z = random_matrix<T>(rng, w * s, w * s, density);
      if (centered) center_reduced(z, f, rng, side == 0);
      (side == 0 ? out.left : out.right)
          .push_back(side == 0 ? Atom<T>::left(family, std::move(z)) : Atom<T>::right(family, std::move(z)));
    }
  }
  return out;
}

// a single random reduced operator of the given face
template <class T>
Atom<T> random_face_op(const Factor<T>& f, int family, Face face, std::mt19937_64& rng, double density = 0.7) {
  int s = f.ctx->dim_B(), w = f.reduced_dim + 1;
  auto z = random_matrix<T>(rng, w * s, w * s, density);
  return face == Face::l ? Atom<T>::left(family, std::move(z)) : Atom<T>::right(family, std::move(z));
}

}  // namespace cbf
