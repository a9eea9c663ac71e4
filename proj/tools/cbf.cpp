// cbf: batch front end for the lattice, representation, cumulant, series and limit checks.
//
// Every command writes report.json (plus report.csv for limits) and manifest.json into --out,
// prints a one-line summary, and exits 0 only when every check passed.

#include "cbf/suite.hpp"

#include <CLI11.hpp>

#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

namespace fs = std::filesystem;
using namespace cbf;
using json = nlohmann::json;

namespace {

struct Options {
  std::string chi, omega, pi, mode = "exact", out = "cbf-out", config;
  int n = 4, degree = 4, dimB = 2, dimD = 4, factors = 2, du = 2, max_len = 0, threads = 0;
  std::uint64_t seed = 1;
  double tol = 1e-9;
  std::string lambda = "1/2";
  std::vector<int> only;
  bool seed_given = false;
};

json options_json(const Options& o) {
  return {{"chi", o.chi},       {"omega", o.omega}, {"pi", o.pi},           {"mode", o.mode},
          {"n", o.n},           {"degree", o.degree}, {"dimB", o.dimB},     {"dimD", o.dimD},
          {"factors", o.factors}, {"du", o.du},     {"max-len", o.max_len}, {"seed", o.seed},
          {"tol", o.tol},       {"lambda", o.lambda}, {"only", o.only}};
}

std::string fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) h = (h ^ c) * 1099511628211ULL;
  std::ostringstream o;
  o << std::hex << std::setw(16) << std::setfill('0') << h;
  return o.str();
}

std::string now_utc() {
  auto t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream o;
  o << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return o.str();
}

// flags > config file > defaults; a manifest works as a config through its "config" key
void apply_config(CLI::App& app, Options& o) {
  if (o.config.empty()) return;
  std::ifstream in(o.config);
  if (!in) throw validation_error("cannot read config file " + o.config);
  json j = json::parse(in);
  if (j.contains("config")) j = j["config"];
  auto set = [&](const char* key, auto& field) {
    if (!j.contains(key)) return;
    if (app.get_option("--" + std::string(key))->count() > 0) return;
    j.at(key).get_to(field);
  };
  set("chi", o.chi);
  set("omega", o.omega);
  set("pi", o.pi);
  set("mode", o.mode);
  set("n", o.n);
  set("degree", o.degree);
  set("dimB", o.dimB);
  set("dimD", o.dimD);
  set("factors", o.factors);
  set("du", o.du);
  set("max-len", o.max_len);
  if (j.contains("seed") && app.get_option("--seed")->count() == 0) o.seed_given = true;
  set("seed", o.seed);
  set("tol", o.tol);
  set("lambda", o.lambda);
  set("only", o.only);
}

struct Outcome {
  bool pass = true;
  json report;
  std::string summary;
  std::string csv;
};

template <class T>
double tol_for(const Options& o) {
  return scalar_traits<T>::exact ? 0.0 : o.tol;
}

template <class T>
std::vector<Factor<T>> make_factors(const Options& o, std::shared_ptr<const AlgebraContext<T>> ctx, std::mt19937_64& rng) {
  if (o.factors < 1) throw validation_error("--factors must be positive");
  std::vector<Factor<T>> fs;
  for (int k = 0; k < o.factors; ++k) fs.push_back(random_factor(ctx, o.du, rng));
  return fs;
}

ChiWord need_chi(const Options& o) {
  if (o.chi.empty()) throw validation_error("--chi is required");
  return ChiWord::parse(o.chi);
}

template <class T>
OperatorWord<T> word_from(const Options& o, const std::vector<Factor<T>>& fs, std::mt19937_64& rng) {
  auto chi = need_chi(o);
  OmegaWord om = o.omega.empty() ? OmegaWord(chi.size(), 0) : parse_omega(o.omega);
  if (static_cast<int>(om.size()) != chi.size()) throw validation_error("--omega and --chi differ in length");
  for (int x : om)
    if (x < 0 || x >= static_cast<int>(fs.size())) throw validation_error("--omega uses a family outside --factors");
  return detail::random_word(fs, chi, om, rng);
}

std::string num(double x) {
  std::ostringstream o;
  o << x;
  return o.str();
}

Outcome from_report(const Report& r, const std::string& summary) {
  return {r.pass(), r.to_json(), summary, {}};
}

// ---- bnc -------------------------------------------------------------------

Outcome bnc_cmd(const std::string& sub, const Options& o) {
  auto chi = need_chi(o);
  Outcome out;
  if (sub == "enumerate") {
    auto ps = enumerate_bnc(chi);
    json a = json::array();
    for (const auto& p : ps) a.push_back(p.to_json());
    out.report = {{"chi", chi.str()}, {"count", ps.size()}, {"catalan", catalan(chi.size())}, {"partitions", a}};
    out.pass = ps.size() == catalan(chi.size());
    out.summary = std::to_string(ps.size()) + " partitions";
  } else if (sub == "mobius") {
    const auto& L = lattice(chi);
    json a = json::array();
    int top = L.top();
    for (int p = 0; p < L.size(); ++p) a.push_back({{"pi", L.at(p).to_json()}, {"mu_to_one", L.mobius(p, top)}});
    auto m01 = L.mobius(L.bottom(), top);
    out.report = {{"chi", chi.str()}, {"mu_zero_one", m01}, {"mobius", a}};
    if (!o.pi.empty()) {
      auto p = Partition::from_json(chi, json::parse(o.pi));
      out.report["pi"] = p.to_json();
      out.report["mu_pi_one"] = mobius_bnc(p, Partition::one(chi));
    }
    out.summary = "mu(0, 1) = " + std::to_string(m01);
  } else if (sub == "intervals") {
    if (o.pi.empty()) throw validation_error("--pi is required");
    auto p = Partition::from_json(chi, json::parse(o.pi));
    if (!is_bnc(p)) throw validation_error("--pi is not bi-non-crossing for this chi");
    auto iv = chi_intervals(p);
    for (auto& I : iv)
      for (auto& x : I) ++x;
    auto kinds = classify_blocks(p);
    json k = json::array();
    for (auto b : kinds) k.push_back(b == BlockKind::interior ? "interior" : "exterior");
    out.report = {{"chi", chi.str()}, {"pi", p.to_json()}, {"intervals", iv}, {"blocks", k}};
    out.summary = std::to_string(iv.size()) + " chi-intervals";
  } else {
    throw validation_error("unknown bnc command " + sub);
  }
  return out;
}

// ---- rep, cumulants, moments -----------------------------------------------

template <class T>
Outcome rep_cmd(const std::string& sub, const Options& o) {
  std::mt19937_64 rng(o.seed);
  auto ctx = make_context<T>(o.dimB, o.dimD);
  auto fs = make_factors(o, ctx, rng);
  int L = o.max_len > 0 ? o.max_len : (o.chi.empty() ? o.n : static_cast<int>(o.chi.size()));
  auto sp = free_product(fs, L);
  Outcome out;
  if (sub == "build") {
    out.report = sp->manifest();
    out.summary = std::to_string(sp->basis_words()) + " basis words";
  } else if (sub == "moments") {
    auto w = word_from(o, fs, rng);
    auto [e, f] = sp->EF(w.entries);
    out.report = {{"chi", w.chi.str()}, {"omega", w.omega}, {"E", to_json(e)}, {"F", to_json(f)}, {"space", sp->manifest()}};
    out.summary = "E and F evaluated";
  } else {
    throw validation_error("unknown rep command " + sub);
  }
  return out;
}

template <class T>
Outcome cumulants_cmd(const std::string& sub, const Options& o) {
  std::mt19937_64 rng(o.seed);
  auto ctx = make_context<T>(o.dimB, o.dimD);
  auto fs = make_factors(o, ctx, rng);
  double tol = tol_for<T>(o);
  if (sub == "eval") {
    auto L = o.max_len > 0 ? o.max_len : static_cast<int>(need_chi(o).size());
    auto sp = free_product(fs, L);
    Engine<T> eng(sp);
    auto w = word_from(o, fs, rng);
    std::vector<Partition> ps;
    if (o.pi.empty())
      ps = lattice(w.chi).elements();
    else
      ps.push_back(Partition::from_json(w.chi, json::parse(o.pi)));
    json a = json::array();
    for (const auto& p : ps)
      a.push_back({{"pi", p.to_json()},
                   {"E_pi", to_json(eng.E_pi(w.chi, w.entries, p))},
                   {"F_pi", to_json(eng.F_pi(w.chi, w.entries, p))},
                   {"kappa_pi", to_json(eng.kappa_pi(w.chi, w.entries, p))},
                   {"K_pi", to_json(eng.K_pi(w.chi, w.entries, p))}});
    Outcome out;
    out.report = {{"chi", w.chi.str()}, {"omega", w.omega}, {"values", a}};
    out.summary = std::to_string(ps.size()) + " partitions evaluated";
    return out;
  }
  if (sub == "mixed-test") {
    if (o.factors < 2) throw validation_error("mixed-test needs --factors >= 2");
    auto sp = free_product(fs, o.n);
    Engine<T> eng(sp);
    Report r{"mixed-cumulants", {}, {}};
    for (const auto& chi : detail::all_chis(o.n))
      for (const auto& om : all_omegas(o.factors, o.n)) {
        if (omega_constant(om)) continue;
        r.merge(mixed_cumulant_test(eng, detail::random_word(fs, chi, om, rng), tol));
      }
    return from_report(r, std::string("all mixed cumulants zero: ") + (r.pass() ? "true" : "false"));
  }
  if (sub == "product-test") {
    auto sp = free_product(fs, o.n);
    Engine<T> eng(sp);
    Report r{"product-cumulants", {}, {}};
    int n = o.n;
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
        for (int x = 0; x < n; ++x) om.push_back(static_cast<int>(rng() % fs.size()));
        r.merge(product_cumulant_check(eng, ch, detail::random_word(fs, ch, om, rng).entries, k, tol));
      }
    }
    return from_report(r, std::string("product formula holds for every grouping: ") + (r.pass() ? "true" : "false"));
  }
  throw validation_error("unknown cumulants command " + sub);
}

template <class T>
Outcome moments_cmd(const std::string& sub, const Options& o) {
  if (sub != "universal-E" && sub != "universal-F") throw validation_error("unknown moments command " + sub);
  bool isE = sub == "universal-E";
  std::mt19937_64 rng(o.seed);
  auto ctx = make_context<T>(o.dimB, o.dimD);
  auto fs = make_factors(o, ctx, rng);
  int n = o.chi.empty() ? o.n : static_cast<int>(o.chi.size());
  int L = o.max_len > 0 ? o.max_len : n;
  auto sp = free_product(fs, L);
  std::map<int, std::shared_ptr<const ExpectationPair<T>>> m;
  for (int k = 0; k < o.factors; ++k) m[k] = free_product<T>({fs[k]}, L, {{k, 0}});
  Engine<T> per(std::make_shared<RoutedPair<T>>(m));
  Report r{sub, {}, {}};
  auto one = [&](const OperatorWord<T>& w) {
    auto c = isE ? compare("universal E formula", cbifree_moment_E(per, w), sp->E(w.entries), tol_for<T>(o))
                 : compare("universal F formula", cbifree_moment_F(per, w), sp->F(w.entries), tol_for<T>(o));
    c.witness = {{"chi", w.chi.str()}, {"omega", w.omega}};
    r.add(c);
  };
  if (!o.chi.empty())
    one(word_from(o, fs, rng));
  else
    for (const auto& chi : detail::all_chis(n))
      for (const auto& om : all_omegas(o.factors, n)) one(detail::random_word(fs, chi, om, rng));
  return from_report(r, std::to_string(r.checks.size()) + " words, max diff " + num(r.worst()));
}

// ---- series and limits -----------------------------------------------------

template <class T>
Outcome rtransform_cmd(const std::string& sub, const Options& o) {
  std::mt19937_64 rng(o.seed);
  auto ctx = make_context<T>(o.dimB, o.dimD);
  auto fs = make_factors(o, ctx, rng);
  auto sp = free_product(fs, o.degree + 1);
  Engine<T> eng(sp);
  auto p = random_pair(*sp, 0, rng());
  Entry<T> Zl(p.left[0]), Zr(p.right[0]);
  auto b = ctx->random_b(rng), c = ctx->random_b(rng), d = ctx->random_b(rng);
  double tol = tol_for<T>(o);
  Report r{"rtransform-" + sub, {}, {}};
  json extra;
  if (sub == "lemma") {
    r.merge(check_cumulant_transform(eng, Zl, Face::l, b, o.degree, tol));
    r.merge(check_cumulant_transform(eng, Zr, Face::r, d, o.degree, tol));
  } else if (sub == "theorem") {
    auto s = partial_R_sides(eng, Zl, Zr, b, c, d, o.degree);
    r.merge(compare_series("partial R-transform identity", s.lhs, s.rhs, tol));
    extra = {{"lhs", s.lhs.to_json()}, {"rhs", s.rhs.to_json()}};
    if (o.factors >= 2) {
      auto q = random_pair(*sp, 1, rng());
      r.merge(check_additivity(eng, Zl, Zr, Entry<T>(q.left[0]), Entry<T>(q.right[0]), b, c, d, o.degree, tol));
    }
  } else {
    throw validation_error("unknown rtransform command " + sub);
  }
  auto out = from_report(r, "coefficient-diff " + num(r.worst()));
  if (!extra.is_null()) out.report["series"] = extra;
  return out;
}

template <class T>
Outcome limits_cmd(const std::string& sub, const Options& o) {
  std::mt19937_64 rng(o.seed);
  auto ctx = make_context<T>(o.dimB, o.dimD);
  LimitResult res;
  if (sub == "clt") {
    auto f = paired_factor(ctx, std::max(1, o.du / 2), rng);
    auto model = IidModel<T>::random(f, {Face::l, Face::r}, rng(), true);
    CltOptions co;
    co.max_order = o.n;
    co.seed = rng();
    co.tol = tol_for<T>(o);
    res = clt_check(model, co);
  } else if (sub == "poisson" || sub == "general") {
    auto f = random_factor(ctx, o.du, rng);
    auto sp = free_product<T>({f}, o.n);
    auto model = IidModel<T>::random(f, {Face::l, Face::r}, rng(), false);
    LadderOptions lo;
    lo.max_order = o.n;
    lo.seed = rng();
    lo.tol = tol_for<T>(o);
    res = poisson_check<T>(sp, model.copy(0), scalar_traits<T>::parse(o.lambda), lo);
    if (sub == "general") {
      // keep the ladder-defect view: decay checks and the explicit order-2 term
      Report r{"general-limit", {}, {}};
      for (const auto& c : res.report.checks)
        if (c.identity.find("defect") != std::string::npos) r.add(c);
      res.report = r;
    }
  } else {
    throw validation_error("unknown limits command " + sub);
  }
  Outcome out{res.report.pass(), res.to_json(), "", res.to_csv()};
  out.summary = std::to_string(res.report.checks.size()) + " checks, " + std::to_string(res.report.failures()) + " failed";
  return out;
}

Outcome suite_cmd(const std::string& sub, const Options& o, json& timing) {
  if (sub != "acceptance") throw validation_error("unknown suite command " + sub);
  SuiteOptions so;
  if (o.seed_given) so.seed = o.seed;
  so.threads = o.threads;
  so.tol = o.tol;
  std::set<int> only(o.only.begin(), o.only.end());
  auto res = run_acceptance(so, only);
  Outcome out;
  json a = json::array();
  std::ostringstream lines;
  for (const auto& r : res) {
    auto j = r.to_json();
    timing[std::to_string(r.id)] = j["seconds"];
    j.erase("seconds");
    a.push_back(j);
    out.pass = out.pass && r.pass();
    lines << r.line() << '\n';
  }
  out.report = {{"criteria", a}};
  out.summary = lines.str() + (out.pass ? "acceptance: all criteria pass" : "acceptance: FAILED");
  return out;
}

template <class T>
Outcome dispatch(const std::string& group, const std::string& sub, const Options& o) {
  if (group == "rep") return rep_cmd<T>(sub, o);
  if (group == "cumulants") return cumulants_cmd<T>(sub, o);
  if (group == "moments") return moments_cmd<T>(sub, o);
  if (group == "rtransform") return rtransform_cmd<T>(sub, o);
  if (group == "limits") return limits_cmd<T>(sub, o);
  throw validation_error("unknown command " + group);
}

void write_file(const fs::path& p, const std::string& s) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cbf: c-bi-free cumulant and moment checks over (B, D)"};
  app.require_subcommand(1);
  Options o;
  auto common = [&](CLI::App* c) {
    c->add_option("--chi", o.chi, "left/right pattern, e.g. llrr");
    c->add_option("--omega", o.omega, "family labels, e.g. 0,1,0,1 or 0101");
    c->add_option("--pi", o.pi, "partition as JSON blocks, 1-based, e.g. [[1,4],[2,3]]");
    c->add_option("--n", o.n, "word length / order");
    c->add_option("--seed", o.seed, "random seed");
    c->add_option("--degree", o.degree, "series truncation degree");
    c->add_option("--dimB", o.dimB, "B = M_dimB");
    c->add_option("--dimD", o.dimD, "D = M_dimD, a multiple of dimB");
    c->add_option("--factors", o.factors, "number of free factors / families");
    c->add_option("--du", o.du, "reduced dimension of each factor");
    c->add_option("--max-len", o.max_len, "truncation: maximal tensor word length");
    c->add_option("--mode", o.mode, "exact or float")->check(CLI::IsMember({"exact", "float"}));
    c->add_option("--tol", o.tol, "float mode tolerance");
    c->add_option("--lambda", o.lambda, "Poisson rate, e.g. 1/2");
    c->add_option("--only", o.only, "acceptance criteria to run");
    c->add_option("--threads", o.threads, "worker threads (0: all cores)");
    c->add_option("--out", o.out, "output directory");
    c->add_option("--config", o.config, "JSON config or manifest to replay");
  };
  std::map<std::string, std::vector<std::string>> groups{
      {"bnc", {"enumerate", "mobius", "intervals"}},
      {"rep", {"build", "moments"}},
      {"cumulants", {"eval", "mixed-test", "product-test"}},
      {"moments", {"universal-E", "universal-F"}},
      {"rtransform", {"lemma", "theorem"}},
      {"limits", {"clt", "poisson", "general"}},
      {"suite", {"acceptance"}}};
  std::string group, sub;
  CLI::App* chosen = nullptr;
  for (const auto& [g, subs] : groups) {
    auto* ga = app.add_subcommand(g);
    ga->require_subcommand(1);
    for (const auto& s : subs) {
      auto* sa = ga->add_subcommand(s);
      common(sa);
      sa->callback([&, g = g, s = s, sa] {
        group = g;
        sub = s;
        chosen = sa;
      });
    }
  }
  CLI11_PARSE(app, argc, argv);

  json manifest;
  fs::path dir;
  try {
    o.seed_given = chosen->get_option("--seed")->count() > 0;
    apply_config(*chosen, o);
    dir = o.out;
    fs::create_directories(dir);
    std::string started = now_utc();
    json timing = json::object();
    Outcome out;
    if (group == "bnc")
      out = bnc_cmd(sub, o);
    else if (group == "suite")
      out = suite_cmd(sub, o, timing);
    else if (o.mode == "exact")
      out = dispatch<rational>(group, sub, o);
    else
      out = dispatch<double>(group, sub, o);
    out.report["pass"] = out.pass;
    std::string rep = out.report.dump(1) + "\n";
    write_file(dir / "report.json", rep);
    if (!out.csv.empty()) write_file(dir / "report.csv", out.csv);
    auto cfg = options_json(o);
    manifest = {{"command", group + " " + sub},
                {"config", cfg},
                {"config_hash", fnv1a(cfg.dump())},
                {"seeds", {o.seed}},
                {"truncation", {{"degree", o.degree}, {"max_word_len", o.max_len}}},
                {"mode", o.mode},
                {"timestamps", {{"start", started}, {"end", now_utc()}}},
                {"result_digest", fnv1a(rep)},
                {"pass", out.pass}};
    if (!timing.empty()) manifest["seconds"] = timing;
    write_file(dir / "manifest.json", manifest.dump(1) + "\n");
    std::cout << out.summary << std::endl;
    return out.pass ? 0 : 1;
  } catch (const std::exception& e) {
    json err{{"pass", false}, {"error", e.what()}, {"command", group + " " + sub}};
    std::cerr << err.dump() << std::endl;
    try {
      if (!dir.empty()) write_file(dir / "report.json", err.dump(1) + "\n");
    } catch (...) {
    }
    return 2;
  }
}
