#pragma once

#include "cbf/matrix.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace cbf {

// one checked identity
struct Check {
  std::string identity;
  std::string lhs, rhs;
  double max_abs_diff = 0;
  nlohmann::json witness;
  bool pass = true;

  nlohmann::json to_json() const {
    nlohmann::json j{{"identity", identity}, {"max_abs_diff", max_abs_diff}, {"pass", pass}};
    if (!lhs.empty()) j["lhs"] = lhs;
    if (!rhs.empty()) j["rhs"] = rhs;
    if (!witness.is_null()) j["witness"] = witness;
    return j;
  }
};

struct Report {
  std::string name;
  std::vector<Check> checks;
  nlohmann::json extra;

  bool pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
  std::size_t failures() const {
    std::size_t f = 0;
    for (const auto& c : checks) f += !c.pass;
    return f;
  }
  double worst() const {
    double w = 0;
    for (const auto& c : checks) w = std::max(w, c.max_abs_diff);
    return w;
  }
  void add(Check c) { checks.push_back(std::move(c)); }
  void merge(const Report& o) { checks.insert(checks.end(), o.checks.begin(), o.checks.end()); }

  // full detail only for failures; passing checks are counted
  nlohmann::json to_json(std::size_t max_listed = 20) const {
    auto fails = nlohmann::json::array();
    for (const auto& c : checks)
      if (!c.pass && fails.size() < max_listed) fails.push_back(c.to_json());
    nlohmann::json j{{"name", name},        {"pass", pass()},    {"checks", checks.size()},
                     {"failures", failures()}, {"max_abs_diff", worst()}, {"failed", fails}};
    if (!extra.is_null()) j["extra"] = extra;
    return j;
  }
};

// equality of two matrices: exact in rational mode, tolerance otherwise
template <class T>
Check compare(std::string identity, const Matrix<T>& lhs, const Matrix<T>& rhs, double tol = 1e-9) {
  Check c;
  c.identity = std::move(identity);
  if (lhs.rows() != rhs.rows() || lhs.cols() != rhs.cols()) {
    c.pass = false;
    c.max_abs_diff = std::numeric_limits<double>::infinity();
    c.lhs = lhs.str();
    c.rhs = rhs.str();
    return c;
  }
  c.max_abs_diff = max_abs_diff(lhs, rhs);
  if constexpr (scalar_traits<T>::exact)
    c.pass = lhs == rhs;
  else
    c.pass = c.max_abs_diff <= tol;
  if (!c.pass) {
    c.lhs = lhs.str();
    c.rhs = rhs.str();
  }
  return c;
}

template <class T>
Check expect_zero(std::string identity, const Matrix<T>& v, double tol = 1e-9) {
  return compare(std::move(identity), v, Matrix<T>(v.rows(), v.cols()), tol);
}

}  // namespace cbf
