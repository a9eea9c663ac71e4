#pragma once

// Bi-non-crossing partitions over a left/right word.

#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace cbf {

enum class Face : char { l = 'l', r = 'r' };

struct validation_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct size_limit_error : std::length_error {
  using std::length_error::length_error;
};
struct order_error : std::domain_error {
  using std::domain_error::domain_error;
};
struct face_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

class ChiWord {
 public:
  ChiWord() = default;
  explicit ChiWord(std::vector<Face> f) : f_(std::move(f)) {
    if (f_.empty()) throw validation_error("chi word must have length >= 1");
  }
  static ChiWord parse(const std::string& s) {
    std::vector<Face> f;
    for (char c : s) {
      if (c == 'l' || c == 'L')
        f.push_back(Face::l);
      else if (c == 'r' || c == 'R')
        f.push_back(Face::r);
      else
        throw validation_error(std::string("chi letter must be l or r, got '") + c + "'");
    }
    return ChiWord(std::move(f));
  }
  // m lefts followed by n rights
  static ChiWord lr(int m, int n) {
    std::vector<Face> f(m, Face::l);
    f.insert(f.end(), n, Face::r);
    return ChiWord(std::move(f));
  }

  int size() const { return static_cast<int>(f_.size()); }
  Face operator[](int k) const { return f_[k]; }
  bool left(int k) const { return f_[k] == Face::l; }
  const std::vector<Face>& faces() const { return f_; }
  std::string str() const {
    std::string s;
    for (auto c : f_) s.push_back(static_cast<char>(c));
    return s;
  }
  ChiWord restrict_to(const std::vector<int>& pos) const {
    std::vector<Face> f;
    for (int p : pos) f.push_back(f_[p]);
    return ChiWord(std::move(f));
  }
  friend bool operator==(const ChiWord& a, const ChiWord& b) { return a.f_ == b.f_; }

 private:
  std::vector<Face> f_;
};

using OmegaWord = std::vector<int>;

inline OmegaWord parse_omega(const std::string& s) {
  OmegaWord w;
  if (!s.empty() && s.front() == '[') {
    auto j = nlohmann::json::parse(s);
    std::map<std::string, int> ids;
    for (const auto& e : j) {
      std::string key = e.is_string() ? e.get<std::string>() : e.dump();
      auto it = ids.find(key);
      if (it == ids.end()) it = ids.emplace(key, static_cast<int>(ids.size())).first;
      w.push_back(it->second);
    }
    return w;
  }
  if (s.find(',') != std::string::npos) {
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos)
        throw validation_error("omega entries must be non-negative integers");
      w.push_back(std::stoi(tok));
    }
    return w;
  }
  for (char c : s) {
    if (c < '0' || c > '9') throw validation_error("omega as a plain string must be digits");
    w.push_back(c - '0');
  }
  return w;
}

inline bool omega_constant(const OmegaWord& w) {
  return std::all_of(w.begin(), w.end(), [&](int x) { return x == w.front(); });
}

inline int configured_max_n() {
  if (const char* e = std::getenv("CBF_MAX_N")) {
    int v = std::atoi(e);
    if (v > 0) return v;
  }
  return 10;
}

// ≺_χ: lefts ascending then rights descending
inline std::vector<int> chi_total_order(const ChiWord& chi) {
  std::vector<int> ord;
  for (int k = 0; k < chi.size(); ++k)
    if (chi.left(k)) ord.push_back(k);
  for (int k = chi.size() - 1; k >= 0; --k)
    if (!chi.left(k)) ord.push_back(k);
  return ord;
}

inline std::vector<int> chi_ranks(const ChiWord& chi) {
  auto ord = chi_total_order(chi);
  std::vector<int> rk(ord.size());
  for (int i = 0; i < static_cast<int>(ord.size()); ++i) rk[ord[i]] = i;
  return rk;
}

class Partition {
 public:
  Partition() = default;
  // blocks of 0-based positions; validated and canonicalized, not checked for bnc
  Partition(ChiWord chi, std::vector<std::vector<int>> blocks) : chi_(std::move(chi)), b_(std::move(blocks)) {
    int n = chi_.size();
    std::vector<int> seen(n, 0);
    for (auto& v : b_) {
      if (v.empty()) throw validation_error("empty block");
      for (int x : v) {
        if (x < 0 || x >= n) throw validation_error("block element out of range");
        if (seen[x]++) throw validation_error("element appears in two blocks");
      }
      std::sort(v.begin(), v.end());
    }
    for (int x = 0; x < n; ++x)
      if (!seen[x]) throw validation_error("blocks do not cover all positions");
    std::sort(b_.begin(), b_.end(), [](const auto& a, const auto& c) { return a.front() < c.front(); });
  }
  static Partition from_labels(const ChiWord& chi, const std::vector<int>& lab) {
    std::map<int, std::vector<int>> m;
    for (int k = 0; k < static_cast<int>(lab.size()); ++k) m[lab[k]].push_back(k);
    std::vector<std::vector<int>> b;
    for (auto& [_, v] : m) b.push_back(std::move(v));
    return Partition(chi, std::move(b));
  }
  static Partition one(const ChiWord& chi) {
    std::vector<int> all(chi.size());
    std::iota(all.begin(), all.end(), 0);
    return Partition(chi, {all});
  }
  static Partition zero(const ChiWord& chi) {
    std::vector<std::vector<int>> b;
    for (int k = 0; k < chi.size(); ++k) b.push_back({k});
    return Partition(chi, std::move(b));
  }
  // 1-based JSON arrays, e.g. [[1,6],[2,4]]
  static Partition from_json(const ChiWord& chi, const nlohmann::json& j) {
    std::vector<std::vector<int>> b;
    for (const auto& blk : j) {
      std::vector<int> v;
      for (const auto& x : blk) v.push_back(x.get<int>() - 1);
      b.push_back(std::move(v));
    }
    return Partition(chi, std::move(b));
  }

  const ChiWord& chi() const { return chi_; }
  int n() const { return chi_.size(); }
  int size() const { return static_cast<int>(b_.size()); }
  const std::vector<std::vector<int>>& blocks() const { return b_; }
  const std::vector<int>& block(int i) const { return b_[i]; }
  bool is_one() const { return b_.size() == 1; }

  std::vector<int> labels() const {
    std::vector<int> lab(n());
    for (int i = 0; i < size(); ++i)
      for (int x : b_[i]) lab[x] = i;
    return lab;
  }
  int block_of(int pos) const {
    for (int i = 0; i < size(); ++i)
      if (std::binary_search(b_[i].begin(), b_[i].end(), pos)) return i;
    throw validation_error("position not in partition");
  }

  nlohmann::json to_json() const {
    auto j = nlohmann::json::array();
    for (const auto& v : b_) {
      auto a = nlohmann::json::array();
      for (int x : v) a.push_back(x + 1);
      j.push_back(a);
    }
    return j;
  }
  std::string str() const { return to_json().dump(); }
  std::string key() const { return chi_.str() + '|' + str(); }

  friend bool operator==(const Partition& a, const Partition& b) { return a.chi_ == b.chi_ && a.b_ == b.b_; }
  friend bool operator<(const Partition& a, const Partition& b) { return a.b_ < b.b_; }

 private:
  ChiWord chi_;
  std::vector<std::vector<int>> b_;
};

namespace detail {

// labels indexed by ≺-rank; crossing check in that order
inline bool labels_noncrossing(const std::vector<int>& lab_by_rank) {
  int n = static_cast<int>(lab_by_rank.size());
  // a<b<c<d with lab[a]==lab[c] != lab[b]==lab[d]
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      if (lab_by_rank[b] == lab_by_rank[a]) continue;
      for (int c = b + 1; c < n; ++c) {
        if (lab_by_rank[c] != lab_by_rank[a]) continue;
        for (int d = c + 1; d < n; ++d)
          if (lab_by_rank[d] == lab_by_rank[b]) return false;
      }
    }
  return true;
}

inline std::vector<int> labels_by_rank(const Partition& p) {
  auto ord = chi_total_order(p.chi());
  auto lab = p.labels();
  std::vector<int> out(ord.size());
  for (std::size_t i = 0; i < ord.size(); ++i) out[i] = lab[ord[i]];
  return out;
}

}  // namespace detail

inline bool is_bnc(const Partition& p) { return detail::labels_noncrossing(detail::labels_by_rank(p)); }

inline bool is_bnc(const std::vector<std::vector<int>>& blocks, const ChiWord& chi) {
  return is_bnc(Partition(chi, blocks));
}

// Catalan-bounded generation in ≺ order, relabeled to positions and sorted
inline std::vector<Partition> enumerate_bnc(const ChiWord& chi) {
  int n = chi.size();
  if (n > configured_max_n())
    throw size_limit_error("n = " + std::to_string(n) + " exceeds lattice size limit " +
                           std::to_string(configured_max_n()));
  auto ord = chi_total_order(chi);
  std::vector<std::vector<int>> results;  // label by rank
  std::vector<int> lab(n, -1);
  // segments to fill, processed as a stack of [lo,hi) ranges
  std::function<void(std::vector<std::pair<int, int>>, int)> rec = [&](std::vector<std::pair<int, int>> todo,
                                                                       int next) {
    while (!todo.empty() && todo.back().first >= todo.back().second) todo.pop_back();
    if (todo.empty()) {
      results.push_back(lab);
      return;
    }
    auto [lo, hi] = todo.back();
    todo.pop_back();
    // block containing lo: lo < a1 < ... ; choose subsets of (lo, hi) greedily by recursion on next element
    std::vector<int> blk{lo};
    std::function<void(int)> choose = [&](int from) {
      // finalize current block: gaps between chosen elements and after the last become new segments
      {
        auto t2 = todo;
        for (std::size_t i = 0; i + 1 < blk.size(); ++i) t2.push_back({blk[i] + 1, blk[i + 1]});
        t2.push_back({blk.back() + 1, hi});
        for (int x : blk) lab[x] = next;
        rec(t2, next + 1);
      }
      for (int x = from; x < hi; ++x) {
        blk.push_back(x);
        choose(x + 1);
        blk.pop_back();
      }
    };
    choose(lo + 1);
  };
  rec({{0, n}}, 0);
  std::vector<Partition> out;
  out.reserve(results.size());
  for (const auto& lr : results) {
    std::vector<int> lab_pos(n);
    for (int i = 0; i < n; ++i) lab_pos[ord[i]] = lr[i];
    out.push_back(Partition::from_labels(chi, lab_pos));
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline void require_same_chi(const Partition& a, const Partition& b) {
  if (!(a.chi() == b.chi())) throw validation_error("partitions over different chi words");
}

// refinement order
inline bool leq(const Partition& sigma, const Partition& pi) {
  require_same_chi(sigma, pi);
  auto lp = pi.labels();
  for (const auto& v : sigma.blocks())
    for (int x : v)
      if (lp[x] != lp[v.front()]) return false;
  return true;
}

inline bool leq_omega(const Partition& pi, const OmegaWord& omega) {
  if (static_cast<int>(omega.size()) != pi.n()) throw validation_error("omega length differs from chi length");
  for (const auto& v : pi.blocks())
    for (int x : v)
      if (omega[x] != omega[v.front()]) return false;
  return true;
}

// least upper bound inside BNC(χ): union, then merge blocks that cross in ≺ order
inline Partition join(const Partition& sigma, const Partition& pi) {
  require_same_chi(sigma, pi);
  int n = sigma.n();
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
  auto unite = [&](int a, int b) { parent[find(a)] = find(b); };
  for (const auto* p : {&sigma, &pi})
    for (const auto& v : p->blocks())
      for (int x : v) unite(x, v.front());
  auto ord = chi_total_order(sigma.chi());
  bool changed = true;
  while (changed) {
    changed = false;
    for (int a = 0; a < n && !changed; ++a)
      for (int b = a + 1; b < n && !changed; ++b) {
        if (find(ord[a]) == find(ord[b])) continue;
        for (int c = b + 1; c < n && !changed; ++c) {
          if (find(ord[c]) != find(ord[a])) continue;
          for (int d = c + 1; d < n; ++d)
            if (find(ord[d]) == find(ord[b])) {
              unite(ord[a], ord[b]);
              changed = true;
              break;
            }
        }
      }
  }
  std::vector<int> lab(n);
  for (int k = 0; k < n; ++k) lab[k] = find(k);
  return Partition::from_labels(sigma.chi(), lab);
}

// lattice of BNC(χ) with lazily built Möbius columns
class BncLattice {
 public:
  explicit BncLattice(const ChiWord& chi) : chi_(chi), elems_(enumerate_bnc(chi)) {
    for (int i = 0; i < size(); ++i) index_[elems_[i].str()] = i;
    labels_.reserve(elems_.size());
    for (const auto& p : elems_) labels_.push_back(p.labels());
  }

  const ChiWord& chi() const { return chi_; }
  int size() const { return static_cast<int>(elems_.size()); }
  const std::vector<Partition>& elements() const { return elems_; }
  const Partition& at(int i) const { return elems_[i]; }
  int index_of(const Partition& p) const {
    auto it = index_.find(p.str());
    if (it == index_.end()) throw validation_error("partition is not bi-non-crossing for this chi: " + p.str());
    return it->second;
  }
  int top() const { return index_of(Partition::one(chi_)); }
  int bottom() const { return index_of(Partition::zero(chi_)); }

  bool leq_idx(int s, int p) const {
    const auto& ls = labels_[s];
    const auto& lp = labels_[p];
    for (std::size_t k = 0; k < ls.size(); ++k)
      for (std::size_t j = k + 1; j < ls.size(); ++j)
        if (ls[k] == ls[j] && lp[k] != lp[j]) return false;
    return true;
  }

  // μ(σ, π) for all σ ≤ π, keyed by σ index (absent entries are not ≤ π)
  const std::map<int, long long>& mobius_column(int p) const {
    std::lock_guard<std::mutex> g(mu_);
    auto it = cols_.find(p);
    if (it != cols_.end()) return it->second;
    std::vector<int> below;
    for (int s = 0; s < size(); ++s)
      if (leq_idx(s, p)) below.push_back(s);
    // coarser first: fewer blocks
    std::sort(below.begin(), below.end(), [&](int a, int b) { return elems_[a].size() < elems_[b].size(); });
    std::map<int, long long> col;
    for (int t : below) {
      if (t == p) {
        col[t] = 1;
        continue;
      }
      long long acc = 0;
      for (auto& [r, m] : col)
        if (r != t && leq_idx(t, r)) acc += m;
      col[t] = -acc;
    }
    return cols_.emplace(p, std::move(col)).first->second;
  }

  long long mobius(int s, int p) const {
    if (!leq_idx(s, p)) throw order_error("mobius of non-comparable partitions");
    return mobius_column(p).at(s);
  }

 private:
  ChiWord chi_;
  std::vector<Partition> elems_;
  std::vector<std::vector<int>> labels_;
  std::unordered_map<std::string, int> index_;
  mutable std::mutex mu_;
  mutable std::map<int, std::map<int, long long>> cols_;
};

// shared per-chi lattices
inline const BncLattice& lattice(const ChiWord& chi) {
  static std::mutex m;
  static std::unordered_map<std::string, std::unique_ptr<BncLattice>> cache;
  std::lock_guard<std::mutex> g(m);
  auto& slot = cache[chi.str()];
  if (!slot) slot = std::make_unique<BncLattice>(chi);
  return *slot;
}

inline long long mobius_bnc(const Partition& sigma, const Partition& pi) {
  require_same_chi(sigma, pi);
  if (!leq(sigma, pi)) throw order_error("mobius_bnc requires sigma <= pi");
  const auto& L = lattice(pi.chi());
  return L.mobius(L.index_of(sigma), L.index_of(pi));
}

enum class BlockKind { interior, exterior };

// V interior iff some other W has min_≺W ≺ min_≺V and max_≺V ≺ max_≺W
inline std::vector<BlockKind> classify_blocks(const Partition& p) {
  auto rk = chi_ranks(p.chi());
  int m = p.size();
  std::vector<int> lo(m), hi(m);
  for (int i = 0; i < m; ++i) {
    lo[i] = hi[i] = rk[p.block(i).front()];
    for (int x : p.block(i)) lo[i] = std::min(lo[i], rk[x]), hi[i] = std::max(hi[i], rk[x]);
  }
  std::vector<BlockKind> out(m, BlockKind::exterior);
  for (int v = 0; v < m; ++v)
    for (int w = 0; w < m; ++w)
      if (w != v && lo[w] < lo[v] && hi[v] < hi[w]) out[v] = BlockKind::interior;
  return out;
}

// coarsest split into χ-intervals, each a union of blocks, in ≺ order
inline std::vector<std::vector<int>> chi_intervals(const Partition& p) {
  auto ord = chi_total_order(p.chi());
  auto rk = chi_ranks(p.chi());
  auto lab = p.labels();
  std::vector<int> hi(p.size(), 0);
  for (int k = 0; k < p.n(); ++k) hi[lab[k]] = std::max(hi[lab[k]], rk[k]);
  std::vector<std::vector<int>> out;
  int n = p.n();
  for (int start = 0; start < n;) {
    int end = hi[lab[ord[start]]];
    for (int r = start; r <= end; ++r) end = std::max(end, hi[lab[ord[r]]]);
    std::vector<int> iv;
    for (int r = start; r <= end; ++r) iv.push_back(ord[r]);
    std::sort(iv.begin(), iv.end());
    out.push_back(std::move(iv));
    start = end + 1;
  }
  return out;
}

// induced partition on a sorted subset, positions renumbered in natural order
inline Partition restrict(const Partition& p, const std::vector<int>& subset) {
  std::vector<int> s = subset;
  std::sort(s.begin(), s.end());
  auto lab = p.labels();
  std::vector<int> nl;
  for (int x : s) nl.push_back(lab[x]);
  return Partition::from_labels(p.chi().restrict_to(s), nl);
}

// identify q and q+1 (0-based), then drop q
inline Partition merge_adjacent(const Partition& p, int q) {
  if (q < 0 || q + 1 >= p.n()) throw validation_error("merge_adjacent needs q < n");
  if (p.chi()[q] != p.chi()[q + 1]) throw face_error("merge_adjacent needs chi(q) = chi(q+1)");
  auto lab = p.labels();
  int a = lab[q], b = lab[q + 1];
  for (auto& x : lab)
    if (x == a) x = b;
  lab.erase(lab.begin() + q);
  std::vector<Face> f = p.chi().faces();
  f.erase(f.begin() + q);
  return Partition::from_labels(ChiWord(f), lab);
}

inline unsigned long long catalan(int n) {
  unsigned long long c = 1;
  for (int k = 0; k < n; ++k) c = c * 2 * (2 * k + 1) / (k + 2);
  return c;
}

}  // namespace cbf
