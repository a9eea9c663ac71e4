#pragma once

// B = M_s inside D = M_{s r}; B is the matrix algebra, D carries a designated copy.

#include "cbf/bnc.hpp"
#include "cbf/matrix.hpp"

#include <memory>
#include <optional>

namespace cbf {

template <class T>
using BElem = Matrix<T>;
template <class T>
using DElem = Matrix<T>;

template <class T>
class AlgebraContext {
 public:
  AlgebraContext(int dim_b, int dim_d, std::vector<Matrix<T>> images)
      : s_(dim_b), d_(dim_d), img_(std::move(images)) {
    validate();
    cent_ = compute_centralizer();
  }

  int dim_B() const { return s_; }
  int dim_D() const { return d_; }
  scalar_mode mode() const { return scalar_traits<T>::exact ? scalar_mode::exact : scalar_mode::float64; }

  BElem<T> one_B() const { return Matrix<T>::identity(s_); }
  DElem<T> one_D() const { return Matrix<T>::identity(d_); }
  BElem<T> zero_B() const { return Matrix<T>(s_, s_); }
  DElem<T> zero_D() const { return Matrix<T>(d_, d_); }

  // image of E_ij
  const DElem<T>& unit_image(int i, int j) const { return img_[i * s_ + j]; }

  DElem<T> b_to_d(const BElem<T>& b) const {
    if (b.rows() != static_cast<std::size_t>(s_) || b.cols() != static_cast<std::size_t>(s_))
      throw dimension_error("B element has wrong size");
    DElem<T> out(d_, d_);
    for (int i = 0; i < s_; ++i)
      for (int j = 0; j < s_; ++j)
        if (!scalar_traits<T>::is_zero(b(i, j))) out += unit_image(i, j) * b(i, j);
    return out;
  }

  // basis of {x in D : x commutes with every embedded b}
  const std::vector<DElem<T>>& centralizer() const { return cent_; }

  BElem<T> random_b(std::mt19937_64& rng) const { return random_matrix<T>(rng, s_, s_); }

  nlohmann::json descriptor() const {
    return {{"dim_B", s_}, {"dim_D", d_}, {"mode", to_string(mode())}};
  }

 private:
  void validate() const {
    if (s_ < 1 || d_ < 1) throw validation_error("algebra dimensions must be positive");
    if (d_ < s_) throw validation_error("dim_B must not exceed dim_D");
    if (static_cast<int>(img_.size()) != s_ * s_) throw validation_error("embedding needs one image per matrix unit");
    for (const auto& m : img_)
      if (m.rows() != static_cast<std::size_t>(d_) || m.cols() != static_cast<std::size_t>(d_))
        throw validation_error("embedding image has wrong size");
    DElem<T> sum(d_, d_);
    for (int i = 0; i < s_; ++i) sum += unit_image(i, i);
    if (!(sum == Matrix<T>::identity(d_))) throw validation_error("embedding is not unital");
    for (int i = 0; i < s_; ++i)
      for (int j = 0; j < s_; ++j)
        for (int k = 0; k < s_; ++k)
          for (int l = 0; l < s_; ++l) {
            auto prod = unit_image(i, j) * unit_image(k, l);
            auto want = j == k ? unit_image(i, l) : Matrix<T>(d_, d_);
            if constexpr (scalar_traits<T>::exact) {
              if (!(prod == want)) throw validation_error("embedding is not multiplicative");
            } else if (max_abs_diff(prod, want) > 1e-12) {
              throw validation_error("embedding is not multiplicative");
            }
          }
    if (unit_image(0, 0).is_zero()) throw validation_error("embedding is not injective");
  }

  std::vector<DElem<T>> compute_centralizer() const {
    int n2 = d_ * d_;
    Matrix<T> sys(static_cast<std::size_t>(s_ * s_ * n2), n2);
    int row = 0;
    for (const auto& e : img_) {
      // (x e - e x)_{ab} = sum_c x_ac e_cb - e_ac x_cb
      for (int a = 0; a < d_; ++a)
        for (int b = 0; b < d_; ++b, ++row)
          for (int c = 0; c < d_; ++c) {
            sys(row, a * d_ + c) += e(c, b);
            sys(row, c * d_ + b) -= e(a, c);
          }
    }
    std::vector<DElem<T>> out;
    for (auto& v : nullspace(sys)) {
      DElem<T> x(d_, d_);
      for (int k = 0; k < n2; ++k) x.data()[k] = v[k];
      out.push_back(std::move(x));
    }
    return out;
  }

  int s_, d_;
  std::vector<Matrix<T>> img_;
  std::vector<DElem<T>> cent_;
};

// default: b -> diag(b, ..., b); dim_D must be a multiple of dim_B
template <class T>
std::vector<Matrix<T>> block_diagonal_images(int dim_b, int dim_d) {
  if (dim_b < 1 || dim_d % dim_b != 0)
    throw validation_error("block-diagonal embedding needs dim_D to be a multiple of dim_B");
  int r = dim_d / dim_b;
  std::vector<Matrix<T>> img;
  for (int i = 0; i < dim_b; ++i)
    for (int j = 0; j < dim_b; ++j) img.push_back(kron(Matrix<T>::identity(r), Matrix<T>::unit(dim_b, i, j)));
  return img;
}

template <class T>
std::shared_ptr<const AlgebraContext<T>> make_context(int dim_b, int dim_d,
                                                      std::optional<std::vector<Matrix<T>>> images = std::nullopt) {
  if (dim_b > dim_d) throw validation_error("dim_B must not exceed dim_D");
  auto img = images ? std::move(*images) : block_diagonal_images<T>(dim_b, dim_d);
  return std::make_shared<const AlgebraContext<T>>(dim_b, dim_d, std::move(img));
}

// {"dim_B":2,"dim_D":4,"embedding":"block-diagonal"} or {"embedding":[[matrix],...]}
template <class T>
std::shared_ptr<const AlgebraContext<T>> context_from_json(const nlohmann::json& j) {
  int b = j.at("dim_B").get<int>(), d = j.at("dim_D").get<int>();
  if (!j.contains("embedding") || j["embedding"].is_string()) {
    if (j.contains("embedding") && j["embedding"].get<std::string>() != "block-diagonal")
      throw validation_error("unknown embedding kind");
    return make_context<T>(b, d);
  }
  std::vector<Matrix<T>> img;
  for (const auto& m : j["embedding"]) img.push_back(matrix_from_json<T>(m));
  return make_context<T>(b, d, std::move(img));
}

}  // namespace cbf
