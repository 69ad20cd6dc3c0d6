#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ptmaml::ad {

using Shape = std::vector<std::size_t>;

std::size_t element_count(const Shape& shape);
std::string shape_string(const Shape& shape);

/// Dense row-major array of doubles. A rank-0 tensor holds one value.
class Tensor {
public:
  Tensor() : values_(1, 0.0) {}
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> values);

  static Tensor scalar(double v) { return Tensor(Shape{}, std::vector<double>{v}); }
  static Tensor vector(std::vector<double> v) {
    auto n = v.size();
    return Tensor(Shape{n}, std::move(v));
  }
  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> v) {
    return Tensor(Shape{rows, cols}, std::move(v));
  }

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return values_.size(); }
  std::size_t rows() const { return shape_.size() == 2 ? shape_[0] : 1; }
  std::size_t cols() const { return shape_.empty() ? 1 : shape_.back(); }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }

  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& at(std::size_t r, std::size_t c) { return values_[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return values_[r * cols() + c]; }

  void fill(double v);
  bool all_finite() const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

private:
  Shape shape_;
  std::vector<double> values_;
};

/// Ordered name -> tensor mapping. Holds both parameter sets and the
/// gradient stores produced against them; insertion order is the canonical
/// reduction order.
class TensorMap {
public:
  std::size_t add(std::string name, Tensor tensor);

  std::size_t size() const { return tensors_.size(); }
  bool empty() const { return tensors_.empty(); }
  std::size_t element_count() const;

  std::optional<std::size_t> find(std::string_view name) const;
  std::size_t index_of(std::string_view name) const;

  const std::string& name(std::size_t i) const { return names_[i]; }
  const std::vector<std::string>& names() const { return names_; }

  Tensor& operator[](std::size_t i) { return tensors_[i]; }
  const Tensor& operator[](std::size_t i) const { return tensors_[i]; }
  Tensor& at(std::string_view name) { return tensors_[index_of(name)]; }
  const Tensor& at(std::string_view name) const { return tensors_[index_of(name)]; }

  /// Same names and shapes, all values zero.
  TensorMap zeros_like() const;
  bool same_layout(const TensorMap& other) const;
  void fill(double v);

  friend bool operator==(const TensorMap& a, const TensorMap& b) {
    return a.names_ == b.names_ && a.tensors_ == b.tensors_;
  }

private:
  std::vector<std::string> names_;
  std::vector<Tensor> tensors_;
  std::unordered_map<std::string, std::size_t> index_;
};

using ParamSet = TensorMap;
using GradStore = TensorMap;

/// L2 norm over every element of every tensor.
double global_norm(const TensorMap& m);
/// y += a * x; layouts must match.
void axpy(double a, const TensorMap& x, TensorMap& y);
void scale(TensorMap& m, double factor);
/// FNV-1a over names, shapes and raw bytes. Used for mutation checks.
std::uint64_t fingerprint(const TensorMap& m);

class ShapeError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace ptmaml::ad
