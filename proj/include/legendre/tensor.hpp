#pragma once

#include <cstddef>
#include <initializer_list>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace legendre {

// An N-tuple of 1-based indices. operator< is the lexicographic order used to
// lay out every vector and matrix; the partial order lives in poset.hpp.
class IndexVector {
 public:
  IndexVector() = default;
  IndexVector(std::initializer_list<int> components) : c_(components) {}
  explicit IndexVector(std::vector<int> components) : c_(std::move(components)) {}

  static IndexVector least(std::size_t order) { return IndexVector(std::vector<int>(order, 1)); }

  std::size_t size() const noexcept { return c_.size(); }
  int operator[](std::size_t k) const { return c_[k]; }
  int& operator[](std::size_t k) { return c_[k]; }
  const std::vector<int>& components() const noexcept { return c_; }
  auto begin() const noexcept { return c_.begin(); }
  auto end() const noexcept { return c_.end(); }

  bool is_least() const noexcept;
  std::string to_string() const;  // "(1,2,1)"

  friend bool operator==(const IndexVector&, const IndexVector&) = default;
  friend bool operator<(const IndexVector& a, const IndexVector& b) { return a.c_ < b.c_; }

 private:
  std::vector<int> c_;
};

std::ostream& operator<<(std::ostream& os, const IndexVector& v);

// Tensor dimensions (I_1, ..., I_N), row-major with the last index fastest.
class Shape {
 public:
  Shape() = default;
  explicit Shape(std::vector<int> dims);
  Shape(std::initializer_list<int> dims) : Shape(std::vector<int>(dims)) {}

  std::size_t order() const noexcept { return dims_.size(); }
  int dim(std::size_t k) const { return dims_[k]; }
  const std::vector<int>& dims() const noexcept { return dims_; }
  std::size_t cell_count() const noexcept { return cells_; }
  std::size_t stride(std::size_t k) const { return strides_[k]; }

  bool contains(const IndexVector& v) const noexcept;
  // Throws DomainError when v is outside the grid or has the wrong arity.
  std::size_t offset(const IndexVector& v) const;
  IndexVector unravel(std::size_t offset) const;
  IndexVector top() const { return IndexVector(dims_); }

  std::string to_string() const;  // "20x20x20"
  static Shape parse(const std::string& text);  // accepts "20x20x20" or "20,20,20"

  friend bool operator==(const Shape& a, const Shape& b) { return a.dims_ == b.dims_; }

 private:
  std::vector<int> dims_;
  std::vector<std::size_t> strides_;
  std::size_t cells_ = 0;
};

// Nonnegative tensor stored densely. Cells may be zero; normalize() rejects
// a tensor whose mass over the sample space is zero.
class RawTensor {
 public:
  RawTensor() = default;
  RawTensor(Shape shape, std::vector<double> values);
  explicit RawTensor(Shape shape);  // all zeros

  const Shape& shape() const noexcept { return shape_; }
  std::span<const double> values() const noexcept { return values_; }
  double at(const IndexVector& v) const { return values_[shape_.offset(v)]; }
  void set(const IndexVector& v, double value);
  double sum() const;

 private:
  Shape shape_;
  std::vector<double> values_;
};

// The retained index vectors Omega, in lexicographic order. Members are stored
// as row-major grid offsets; for that layout offset order equals lex order.
class SampleSpace {
 public:
  explicit SampleSpace(Shape shape);  // full grid
  SampleSpace(Shape shape, std::vector<std::size_t> sorted_offsets);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t size() const noexcept { return offsets_.size(); }
  bool is_full() const noexcept { return offsets_.size() == shape_.cell_count(); }

  IndexVector member(std::size_t ordinal) const { return shape_.unravel(offsets_[ordinal]); }
  std::vector<IndexVector> members() const;
  std::span<const std::size_t> offsets() const noexcept { return offsets_; }

  std::optional<std::size_t> ordinal(const IndexVector& v) const;
  std::optional<std::size_t> ordinal_of_offset(std::size_t offset) const;
  bool contains(const IndexVector& v) const { return ordinal(v).has_value(); }

  friend bool operator==(const SampleSpace& a, const SampleSpace& b) {
    return a.shape_ == b.shape_ && a.offsets_ == b.offsets_;
  }

 private:
  Shape shape_;
  std::vector<std::size_t> offsets_;
};

using SpacePtr = std::shared_ptr<const SampleSpace>;

// A probability mass function over a sample space, plus the mass it was
// normalized by.
struct NormalizedTensor {
  SpacePtr space;
  std::vector<double> probs;  // indexed by sample-space ordinal
  double total_mass = 1.0;

  double prob(const IndexVector& v) const;
};

enum class TensorFormat { DenseText, SparseCoo };

TensorFormat parse_tensor_format(const std::string& name);  // "dense" | "coo"

RawTensor load_tensor(std::istream& in, TensorFormat format);
RawTensor load_tensor_file(const std::string& path, TensorFormat format);

// Dense-text writer: shape line, then one line per run of the last mode.
void write_dense_text(std::ostream& out, const RawTensor& x);

// Omega = full grid minus `exclude`. The least element cannot be excluded.
SampleSpace build_sample_space(const Shape& shape, std::span<const IndexVector> exclude);

// Omega = cells with x_v > 0, always keeping the least element.
SampleSpace nonzero_sample_space(const RawTensor& x);

NormalizedTensor normalize(const RawTensor& x, SpacePtr space);
NormalizedTensor normalize(const RawTensor& x);  // over the full grid

// Excluded cells are emitted as 0.
RawTensor denormalize(const NormalizedTensor& q);

}  // namespace legendre
