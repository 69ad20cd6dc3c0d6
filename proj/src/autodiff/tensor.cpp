#include "ptmaml/autodiff/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <numeric>

namespace ptmaml::ad {

std::size_t element_count(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

Tensor::Tensor(Shape shape, double fill)
    : shape_(std::move(shape)), values_(element_count(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  if (element_count(shape_) != values_.size()) {
    throw ShapeError("tensor shape " + shape_string(shape_) + " does not match " +
                     std::to_string(values_.size()) + " values");
  }
}

void Tensor::fill(double v) { std::fill(values_.begin(), values_.end(), v); }

bool Tensor::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

std::size_t TensorMap::add(std::string name, Tensor tensor) {
  if (index_.contains(name)) throw std::invalid_argument("duplicate tensor name: " + name);
  std::size_t i = tensors_.size();
  index_.emplace(name, i);
  names_.push_back(std::move(name));
  tensors_.push_back(std::move(tensor));
  return i;
}

std::size_t TensorMap::element_count() const {
  std::size_t n = 0;
  for (const auto& t : tensors_) n += t.size();
  return n;
}

std::optional<std::size_t> TensorMap::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t TensorMap::index_of(std::string_view name) const {
  auto i = find(name);
  if (!i) throw std::out_of_range("no tensor named " + std::string(name));
  return *i;
}

TensorMap TensorMap::zeros_like() const {
  TensorMap out;
  out.names_ = names_;
  out.index_ = index_;
  out.tensors_.reserve(tensors_.size());
  for (const auto& t : tensors_) out.tensors_.emplace_back(t.shape(), 0.0);
  return out;
}

bool TensorMap::same_layout(const TensorMap& other) const {
  if (names_ != other.names_) return false;
  for (std::size_t i = 0; i < tensors_.size(); ++i) {
    if (tensors_[i].shape() != other.tensors_[i].shape()) return false;
  }
  return true;
}

void TensorMap::fill(double v) {
  for (auto& t : tensors_) t.fill(v);
}

double global_norm(const TensorMap& m) {
  double sq = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (double v : m[i].values()) sq += v * v;
  }
  return std::sqrt(sq);
}

void axpy(double a, const TensorMap& x, TensorMap& y) {
  if (!x.same_layout(y)) throw ShapeError("axpy: tensor maps differ in layout");
  for (std::size_t i = 0; i < x.size(); ++i) {
    auto xs = x[i].values();
    auto ys = y[i].values();
    for (std::size_t k = 0; k < xs.size(); ++k) ys[k] += a * xs[k];
  }
}

void scale(TensorMap& m, double factor) {
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (double& v : m[i].values()) v *= factor;
  }
}

std::uint64_t fingerprint(const TensorMap& m) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ull;
    }
  };
  for (std::size_t i = 0; i < m.size(); ++i) {
    mix(m.name(i).data(), m.name(i).size());
    for (auto d : m[i].shape()) mix(&d, sizeof d);
    mix(m[i].data(), m[i].size() * sizeof(double));
  }
  return h;
}

} // namespace ptmaml::ad
