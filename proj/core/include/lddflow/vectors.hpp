#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <vector>

namespace lddflow {

using NodeId = std::uint32_t;
using EdgeId = std::uint32_t;

inline constexpr EdgeId kNoEdge = static_cast<EdgeId>(-1);
inline constexpr NodeId kNoNode = static_cast<NodeId>(-1);

struct NodeTag {};
struct EdgeTag {};

/// Dense real vector indexed either by node id or by edge id. The tag keeps
/// node and edge vectors from being mixed up at compile time.
template <typename Tag> class Vector {
public:
  Vector() = default;
  explicit Vector(std::size_t size, double fill = 0.0) : values_(size, fill) {}
  explicit Vector(std::vector<double> values) : values_(std::move(values)) {}
  Vector(std::initializer_list<double> values) : values_(values) {}

  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  double &operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  std::span<double> span() { return values_; }
  std::span<const double> span() const { return values_; }
  const std::vector<double> &values() const { return values_; }
  std::vector<double> &values() { return values_; }

  auto begin() { return values_.begin(); }
  auto end() { return values_.end(); }
  auto begin() const { return values_.begin(); }
  auto end() const { return values_.end(); }

  Vector &operator+=(const Vector &other) {
    check_same_size(other);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
    return *this;
  }
  Vector &operator-=(const Vector &other) {
    check_same_size(other);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
    return *this;
  }
  Vector &operator*=(double s) {
    for (double &v : values_) v *= s;
    return *this;
  }

  friend Vector operator+(Vector a, const Vector &b) { return a += b; }
  friend Vector operator-(Vector a, const Vector &b) { return a -= b; }
  friend Vector operator*(double s, Vector a) { return a *= s; }
  friend Vector operator*(Vector a, double s) { return a *= s; }
  friend Vector operator-(Vector a) { return a *= -1.0; }
  friend bool operator==(const Vector &, const Vector &) = default;

  double sum() const {
    double s = 0.0;
    for (double v : values_) s += v;
    return s;
  }
  double norm1() const {
    double s = 0.0;
    for (double v : values_) s += std::abs(v);
    return s;
  }
  double norm_inf() const {
    double s = 0.0;
    for (double v : values_) s = std::max(s, std::abs(v));
    return s;
  }
  double dot(const Vector &other) const {
    check_same_size(other);
    double s = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i) s += values_[i] * other.values_[i];
    return s;
  }
  bool all_finite() const {
    for (double v : values_)
      if (!std::isfinite(v)) return false;
    return true;
  }

private:
  void check_same_size(const Vector &other) const {
    if (other.size() != size()) throw std::invalid_argument("vector dimension mismatch");
  }

  std::vector<double> values_;
};

using NodeVector = Vector<NodeTag>;
using EdgeVector = Vector<EdgeTag>;

/// A demand is a node vector; it is proper when its entries sum to zero.
using Demand = NodeVector;

inline bool is_proper(const Demand &d, double rel_tol = 1e-9) {
  return std::abs(d.sum()) <= rel_tol * std::max(1.0, d.norm1());
}

} // namespace lddflow
