#pragma once

// Cumulants of sums of identically distributed c-bi-free copies, central and
// Poisson-type limits, and the moment/cumulant equivalence along a ladder.

#include "cbf/series.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace cbf {

enum class Normalization { none, sqrt_n, mean };

inline Normalization parse_normalization(const std::string& s) {
  if (s == "none") return Normalization::none;
  if (s == "sqrt") return Normalization::sqrt_n;
  if (s == "mean") return Normalization::mean;
  throw validation_error("normalization must be none, sqrt or mean");
}

namespace detail {

inline long long isqrt_exact(long long N) {
  auto r = static_cast<long long>(std::llround(std::sqrt(static_cast<double>(N))));
  for (long long c = std::max(0LL, r - 1); c <= r + 1; ++c)
    if (c * c == N) return c;
  return -1;
}

// N^k for integer k (possibly negative)
template <class T>
T int_power(long long N, int k) {
  T out(1), base(static_cast<double>(N));
  if constexpr (scalar_traits<T>::exact) base = T(static_cast<long>(N));
  for (int i = 0; i < std::abs(k); ++i) out *= base;
  return k < 0 ? T(1) / out : out;
}

}  // namespace detail

// the scale c with S_N = c * (Z_1 + ... + Z_N)
template <class T>
T sum_scale(long long N, Normalization norm) {
  if (N < 1) throw validation_error("N must be positive");
  switch (norm) {
    case Normalization::none:
      return T(1);
    case Normalization::mean:
      return detail::int_power<T>(N, -1);
    case Normalization::sqrt_n:
      if constexpr (scalar_traits<T>::exact) {
        auto r = detail::isqrt_exact(N);
        if (r < 0) throw validation_error("N^(-1/2) is irrational for N = " + std::to_string(N) + "; use a square N or float mode");
        return T(1) / T(static_cast<long>(r));
      } else {
        return T(1.0 / std::sqrt(static_cast<double>(N)));
      }
  }
  return T(1);
}

// N * c^n: order-n cumulants of S_N relative to those of one copy
template <class T>
T sum_cumulant_factor(long long N, Normalization norm, int n) {
  T c = sum_scale<T>(N, norm), out(static_cast<double>(N));
  if constexpr (scalar_traits<T>::exact) out = T(static_cast<long>(N));
  for (int i = 0; i < n; ++i) out *= c;
  return out;
}

// rho or eta of S_N from the single-copy value by additivity and homogeneity
template <class T>
Matrix<T> sum_cumulants(Engine<T>& eng, const TwoFacedFamily<T>& fam, long long N, Normalization norm, SeriesKind kind,
                        const OmegaWord& omega, const std::vector<BElem<T>>& bs) {
  if (kind != SeriesKind::rho && kind != SeriesKind::eta) throw validation_error("sum_cumulants takes rho or eta");
  return family_series_eval(eng, fam, kind, omega, bs) * sum_cumulant_factor<T>(N, norm, static_cast<int>(omega.size()));
}

// one family: a factor plus reduced matrices for each index, used to build iid copies
template <class T>
struct IidModel {
  Factor<T> factor;
  std::vector<std::pair<Face, Matrix<T>>> ops;  // index -> (face, reduced matrix)

  static IidModel random(const Factor<T>& f, const std::vector<Face>& faces, std::uint64_t seed, bool centered) {
    auto sp = free_product<T>({f}, 1);
    IidModel m{f, {}};
    for (std::size_t k = 0; k < faces.size(); ++k) {
      auto p = random_pair(*sp, 0, seed + 7919 * k, 0.7, 1, centered);
      const auto& a = faces[k] == Face::l ? p.left[0] : p.right[0];
      m.ops.push_back({faces[k], *a.m});
    }
    return m;
  }

  TwoFacedFamily<T> copy(int family) const {
    TwoFacedFamily<T> fam;
    for (std::size_t k = 0; k < ops.size(); ++k) {
      const auto& [face, z] = ops[k];
      int i = static_cast<int>(k);
      fam.ops.emplace(i, Entry<T>(face == Face::l ? Atom<T>::left(family, z) : Atom<T>::right(family, z)));
      if (face == Face::l) fam.left.insert(i);
    }
    return fam;
  }

  // c * (Z^(0) + ... + Z^(N-1)) in the space of N copies
  TwoFacedFamily<T> sum(int N, const T& c) const {
    auto fam = copy(0);
    for (int m = 1; m < N; ++m) {
      auto other = copy(m);
      for (auto& [i, e] : fam.ops) e = e + other.ops.at(i);
    }
    for (auto& [i, e] : fam.ops) e = c * e;
    return fam;
  }
};

// rho or eta of S_N computed on the N-fold free product itself
template <class T>
Matrix<T> direct_sum_cumulant(const IidModel<T>& model, int N, Normalization norm, SeriesKind kind,
                              const OmegaWord& omega, const std::vector<BElem<T>>& bs) {
  std::vector<Factor<T>> fs(N, model.factor);
  auto sp = free_product(fs, static_cast<int>(omega.size()));
  Engine<T> eng(sp);
  return family_series_eval(eng, model.sum(N, sum_scale<T>(N, norm)), kind, omega, bs);
}

// ---- reporting ------------------------------------------------------------

struct LimitRow {
  std::string test, kind, omega;
  int n = 0;
  long long N = 0;
  double value = 0, defect = 0;
  double rate = std::numeric_limits<double>::quiet_NaN();  // fitted log-log slope of the defect
};

struct LimitResult {
  Report report;
  std::vector<LimitRow> rows;

  std::string to_csv() const {
    std::ostringstream o;
    o << "test,kind,n,omega,N,value_norm,defect,fitted_rate\n";
    for (const auto& r : rows) {
      o << r.test << ',' << r.kind << ',' << r.n << ",\"" << r.omega << "\"," << r.N << ',' << r.value << ',' << r.defect
        << ',';
      if (!std::isnan(r.rate)) o << r.rate;
      o << '\n';
    }
    return o.str();
  }
  nlohmann::json to_json() const {
    auto j = report.to_json();
    auto a = nlohmann::json::array();
    for (const auto& r : rows)
      a.push_back({{"test", r.test}, {"kind", r.kind}, {"n", r.n}, {"omega", r.omega}, {"N", r.N},
                   {"value_norm", r.value}, {"defect", r.defect},
                   {"fitted_rate", std::isnan(r.rate) ? nlohmann::json() : nlohmann::json(r.rate)}});
    j["rows"] = a;
    return j;
  }
};

inline std::string omega_str(const OmegaWord& w) {
  std::string s;
  for (std::size_t k = 0; k < w.size(); ++k) s += (k ? "," : "") + std::to_string(w[k]);
  return s;
}

inline const char* kind_name(SeriesKind k) {
  switch (k) {
    case SeriesKind::nu:
      return "nu";
    case SeriesKind::mu:
      return "mu";
    case SeriesKind::rho:
      return "rho";
    case SeriesKind::eta:
      return "eta";
  }
  return "?";
}

// all omega of length n over {0..k-1}
inline std::vector<OmegaWord> all_omegas(int k, int n) {
  std::vector<OmegaWord> out;
  OmegaWord w(n, 0);
  while (true) {
    out.push_back(w);
    int i = n - 1;
    while (i >= 0 && ++w[i] == k) w[i--] = 0;
    if (i < 0) break;
  }
  return out;
}

// least-squares slope of log y against log x
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double n = static_cast<double>(x.size()), sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double a = std::log(x[i]), b = std::log(y[i]);
    sx += a, sy += b, sxx += a * a, sxy += a * b;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// ---- central limit --------------------------------------------------------

struct CltOptions {
  std::vector<long long> ladder{1, 4, 16, 64};
  int max_order = 4;
  int direct_max_order = 3;  // direct evaluation on the N-fold product up to this order
  std::vector<int> direct_N{2, 3, 4};
  std::uint64_t seed = 1;
  double tol = 1e-9;
};

// the model's operators must be centered (E = F = 0 on single operators)
template <class T>
LimitResult clt_check(const IidModel<T>& model, const CltOptions& opt) {
  LimitResult out{{"clt", {}, {}}, {}};
  const auto& ctx = *model.factor.ctx;
  auto sp = free_product<T>({model.factor}, opt.max_order);
  Engine<T> eng(sp);
  auto fam = model.copy(0);
  int k = static_cast<int>(model.ops.size());
  std::mt19937_64 rng(opt.seed);
  for (int i = 0; i < k; ++i) {
    auto c = expect_zero("centered: E(Z_i)", family_series_eval(eng, fam, SeriesKind::nu, {i}, {}), opt.tol);
    c.witness = {{"index", i}};
    out.report.add(c);
    auto d = expect_zero("centered: F(Z_i)", family_series_eval(eng, fam, SeriesKind::mu, {i}, {}), opt.tol);
    d.witness = {{"index", i}};
    out.report.add(d);
  }
  for (int n = 1; n <= opt.max_order; ++n)
    for (const auto& om : all_omegas(k, n)) {
      std::vector<BElem<T>> bs;
      for (int j = 0; j + 1 < n; ++j) bs.push_back(ctx.random_b(rng));
      for (auto kind : {SeriesKind::rho, SeriesKind::eta}) {
        auto single = family_series_eval(eng, fam, kind, om, bs);
        auto wit = nlohmann::json{{"omega", om}, {"kind", kind_name(kind)}};
        std::vector<Matrix<T>> vals;
        for (auto N : opt.ladder) {
          vals.push_back(single * sum_cumulant_factor<T>(N, Normalization::sqrt_n, n));
          out.rows.push_back({"clt", kind_name(kind), omega_str(om), n, N, vals.back().max_abs(), 0.0});
        }
        if (n == 1) {
          for (std::size_t i = 0; i < vals.size(); ++i) {
            auto c = expect_zero("first-order cumulant of S_N vanishes", vals[i], opt.tol);
            c.witness = wit;
            out.report.add(c);
          }
        } else if (n == 2) {
          // variance part: order 2 equals the covariance of one copy at every N
          auto cov = family_series_eval(eng, fam, kind == SeriesKind::rho ? SeriesKind::nu : SeriesKind::mu, om, bs);
          for (std::size_t i = 0; i < vals.size(); ++i) {
            auto c = compare("order-2 cumulant of S_N equals the covariance", vals[i], cov, opt.tol);
            c.witness = wit;
            c.witness["N"] = opt.ladder[i];
            out.report.add(c);
          }
        } else {
          for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
            if (opt.ladder[i + 1] != 4 * opt.ladder[i]) continue;
            T f = detail::int_power<T>(2, -(n - 2));
            auto c = compare("cumulant ratio across N -> 4N is 2^-(n-2)", vals[i + 1], vals[i] * f, opt.tol);
            c.witness = wit;
            c.witness["N"] = opt.ladder[i];
            out.report.add(c);
          }
        }
        if (n <= opt.direct_max_order)
          for (int N : opt.direct_N) {
            auto norm = detail::isqrt_exact(N) > 0 ? Normalization::sqrt_n : Normalization::none;
            if constexpr (!scalar_traits<T>::exact) norm = Normalization::sqrt_n;
            auto direct = direct_sum_cumulant(model, N, norm, kind, om, bs);
            auto c = compare("S_N cumulant by additivity equals direct evaluation", direct,
                             single * sum_cumulant_factor<T>(N, norm, n), opt.tol);
            c.witness = wit;
            c.witness["N"] = N;
            c.witness["normalization"] = norm == Normalization::none ? "none" : "sqrt";
            out.report.add(c);
          }
      }
    }
  return out;
}

// ---- polynomial dependence on the mixture weight --------------------------

// coefficients c_0..c_deg of the polynomial through (x_i, y_i), exact Lagrange/Newton
template <class T>
std::vector<Matrix<T>> interpolate(const std::vector<T>& x, const std::vector<Matrix<T>>& y) {
  std::size_t n = x.size();
  // Newton divided differences then expansion into the monomial basis
  std::vector<Matrix<T>> dd = y;
  for (std::size_t j = 1; j < n; ++j)
    for (std::size_t i = n - 1; i >= j; --i) {
      dd[i] = (dd[i] - dd[i - 1]) * (T(1) / (x[i] - x[i - j]));
      if (i == j) break;
    }
  std::vector<Matrix<T>> c(n, Matrix<T>(y[0].rows(), y[0].cols()));
  for (std::size_t i = n; i-- > 0;) {
    // c <- c * (s - x_i) + dd_i
    std::vector<Matrix<T>> nc(n, Matrix<T>(y[0].rows(), y[0].cols()));
    for (std::size_t p = 0; p < n; ++p) {
      if (p + 1 < n) nc[p + 1] += c[p];
      nc[p] -= c[p] * x[i];
    }
    nc[0] += dd[i];
    c = std::move(nc);
  }
  return c;
}

template <class T>
Matrix<T> poly_eval(const std::vector<Matrix<T>>& c, const T& s) {
  Matrix<T> out = c.back();
  for (std::size_t i = c.size() - 1; i-- > 0;) out = out * s + c[i];
  return out;
}

// cumulant of the (1 - s) delta + s (nu, mu) mixture at weight s
template <class T>
Matrix<T> mixture_cumulant(std::shared_ptr<const ExpectationPair<T>> base, const TwoFacedFamily<T>& fam, const T& s,
                           SeriesKind kind, const OmegaWord& om, const std::vector<BElem<T>>& bs) {
  Engine<T> eng(std::make_shared<ScaledPair<T>>(base, s));
  return family_series_eval(eng, fam, kind, om, bs);
}

// ---- Poisson-type limit and the moment/cumulant ladder equivalence ---------

struct LadderOptions {
  std::vector<long long> ladder{8, 16, 32, 64};
  int max_order = 3;
  double slope_tol = 0.1;
  std::uint64_t seed = 1;
  double tol = 1e-9;
};

// Z_N ~ mixture of delta_0 and (nu, mu) with weight lambda / N; checks N nu_N - N rho_N = O(1/N),
// and that the cumulants of S_N converge to lambda (nu, mu) exactly through the s-polynomial
template <class T>
LimitResult poisson_check(std::shared_ptr<const ExpectationPair<T>> base, const TwoFacedFamily<T>& fam,
                          const T& lambda, const LadderOptions& opt) {
  LimitResult out{{"poisson", {}, {}}, {}};
  const auto& ctx = base->ctx();
  Engine<T> beng(base);
  std::mt19937_64 rng(opt.seed);
  int k = static_cast<int>(fam.ops.size());
  std::vector<int> idx;
  for (const auto& [i, e] : fam.ops) idx.push_back(i);
  for (int n = 1; n <= opt.max_order; ++n)
    for (auto om0 : all_omegas(k, n)) {
      OmegaWord om;
      for (int x : om0) om.push_back(idx[x]);
      std::vector<BElem<T>> bs;
      for (int j = 0; j + 1 < n; ++j) bs.push_back(ctx.random_b(rng));
      for (auto [kind, mom] : {std::pair{SeriesKind::rho, SeriesKind::nu}, std::pair{SeriesKind::eta, SeriesKind::mu}}) {
        auto wit = nlohmann::json{{"omega", om}, {"kind", kind_name(kind)}};
        auto jump = family_series_eval(beng, fam, mom, om, bs);
        // polynomial of degree <= n in s with zero constant term
        std::vector<T> xs;
        std::vector<Matrix<T>> ys;
        for (int i = 0; i <= n; ++i) {
          xs.push_back(T(i));
          ys.push_back(i == 0 ? Matrix<T>(jump.rows(), jump.cols()) : mixture_cumulant(base, fam, T(i), kind, om, bs));
        }
        auto poly = interpolate(xs, ys);
        auto extra = mixture_cumulant(base, fam, T(n + 1), kind, om, bs);
        auto c0 = compare("cumulant is a polynomial of degree <= n in the weight", poly_eval(poly, T(n + 1)), extra,
                          opt.tol);
        c0.witness = wit;
        out.report.add(c0);
        auto c1 = compare("limit cumulant of S_N equals lambda times the jump moment", poly.size() > 1 ? poly[1] * lambda
                                                                                                         : jump * T(0),
                          jump * lambda, opt.tol);
        c1.witness = wit;
        out.report.add(c1);

        std::vector<double> Ns, defects;
        for (auto N : opt.ladder) {
          T s = lambda * detail::int_power<T>(N, -1), NN = detail::int_power<T>(N, 1);
          auto rhoN = mixture_cumulant(base, fam, s, kind, om, bs);
          auto c2 = compare("ladder value equals the weight polynomial", rhoN, poly_eval(poly, s), opt.tol);
          c2.witness = wit;
          c2.witness["N"] = N;
          out.report.add(c2);
          // N nu_N - N rho_N with nu_N = s * jump
          auto defect = jump * (s * NN) - rhoN * NN;
          if (n == 2) {
            // the only subordinate partition is the one with two singletons
            Engine<T> seng(std::make_shared<ScaledPair<T>>(base, s));
            auto [chi, w] = series_word(fam, om, bs);
            auto pz = Partition::zero(chi);
            auto tail = kind == SeriesKind::rho ? seng.kappa_pi(chi, w, pz) : seng.K_pi(chi, w, pz);
            auto c3 = compare("order-2 defect is the two-singleton term", defect, tail * NN, opt.tol);
            c3.witness = wit;
            c3.witness["N"] = N;
            out.report.add(c3);
          }
          if (kind == SeriesKind::rho) {
            // rho_N - s nu = sum_{pi != 1} mu(pi, 1) s^|pi| E_pi of the jump pair
            auto [chi, w] = series_word(fam, om, bs);
            const auto& L = lattice(chi);
            Matrix<T> tail(jump.rows(), jump.cols());
            for (int p = 0; p < L.size(); ++p) {
              if (p == L.top()) continue;
              T sk = T(1);
              for (int q = 0; q < L.at(p).size(); ++q) sk *= s;
              tail += beng.E_pi(chi, w, L.at(p)) * (sk * scalar_traits<T>::from_int(L.mobius(p, L.top())));
            }
            auto c4 = compare("rho_N - (lambda/N) nu equals the Moebius tail", rhoN - jump * s, tail, opt.tol);
            c4.witness = wit;
            c4.witness["N"] = N;
            out.report.add(c4);
          }
          double dv = defect.max_abs();
          out.rows.push_back({"poisson", kind_name(kind), omega_str(om), n, N, (rhoN * NN).max_abs(), dv});
          Ns.push_back(static_cast<double>(N));
          defects.push_back(dv);
        }
        bool all_zero = std::all_of(defects.begin(), defects.end(), [&](double d) { return d <= opt.tol; });
        bool any_zero = std::any_of(defects.begin(), defects.end(), [&](double d) { return d <= opt.tol; });
        Check c{"defect N nu_N - N rho_N decays like 1/N", {}, {}, 0.0, wit, true};
        if (all_zero) {
          c.witness["slope"] = "exact zero";
        } else if (any_zero) {
          c.pass = false;
          c.witness["slope"] = "defect vanishes on part of the ladder";
        } else {
          double sl = loglog_slope(Ns, defects);
          c.witness["slope"] = sl;
          c.max_abs_diff = std::abs(sl + 1.0);
          c.pass = c.max_abs_diff <= opt.slope_tol;
          for (std::size_t i = out.rows.size() - Ns.size(); i < out.rows.size(); ++i) out.rows[i].rate = sl;
        }
        out.report.add(c);
      }
    }
  return out;
}

}  // namespace cbf
