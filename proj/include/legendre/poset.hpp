#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "legendre/tensor.hpp"

namespace legendre {

// Componentwise partial order: u <= v iff u_k <= v_k for every mode k.
// Throws DomainError on arity mismatch.
bool leq(const IndexVector& u, const IndexVector& v);

// Componentwise maximum; the least upper bound of u and v in the grid.
IndexVector join(const IndexVector& u, const IndexVector& v);

// Decomposition basis B, a subset of Omega+ kept in lexicographic order.
class Basis {
 public:
  explicit Basis(SpacePtr space) : space_(std::move(space)) {}
  // Deduplicates and sorts. Throws DomainError for members outside Omega+.
  Basis(SpacePtr space, std::vector<IndexVector> members);

  const SpacePtr& space() const noexcept { return space_; }
  std::size_t size() const noexcept { return members_.size(); }
  bool empty() const noexcept { return members_.empty(); }
  const IndexVector& operator[](std::size_t i) const { return members_[i]; }
  const std::vector<IndexVector>& members() const noexcept { return members_; }
  // Row-major grid offsets of the members, ascending.
  std::span<const std::size_t> offsets() const noexcept { return offsets_; }

  std::optional<std::size_t> ordinal(const IndexVector& v) const;
  bool contains(const IndexVector& v) const { return ordinal(v).has_value(); }

  friend bool operator==(const Basis& a, const Basis& b) {
    return a.space_->shape() == b.space_->shape() && a.offsets_ == b.offsets_;
  }

 private:
  SpacePtr space_;
  std::vector<IndexVector> members_;
  std::vector<std::size_t> offsets_;
};

using BasisPtr = std::shared_ptr<const Basis>;

Basis basis_union(const Basis& a, const Basis& b);

// Bit-packed zeta function restricted to B x Omega: bit (i, j) is set iff
// basis member i <= sample-space member j.
class ZetaIncidence {
 public:
  explicit ZetaIncidence(BasisPtr basis);

  const Basis& basis() const noexcept { return *basis_; }
  std::size_t rows() const noexcept { return basis_->size(); }
  std::size_t cols() const noexcept { return cols_; }
  bool bit(std::size_t row, std::size_t col) const {
    return (words_[row * words_per_row_ + col / 64] >> (col % 64)) & 1U;
  }
  std::span<const std::uint64_t> row_words(std::size_t row) const {
    return {words_.data() + row * words_per_row_, words_per_row_};
  }
  std::size_t row_count(std::size_t row) const;  // |up(u) & Omega|

 private:
  BasisPtr basis_;
  std::size_t cols_ = 0;
  std::size_t words_per_row_ = 0;
  std::vector<std::uint64_t> words_;
};

ZetaIncidence build_incidence(BasisPtr basis);

// {u in B : u <= v}
std::vector<IndexVector> down_set(const IndexVector& v, const Basis& basis);
// {u in Omega : u >= v}, respecting exclusions.
std::vector<IndexVector> up_set(const IndexVector& v, const SampleSpace& space);

// Per-mode axes: union over k of {v in Omega+ : v_j = 1 for all j != k}.
Basis build_basis_b1(SpacePtr space);

// Row/column normalizers on every slice of the first two modes, with the
// selected positions C_k(l) = { c * floor(I_k / l) : c = 1..l }.
Basis build_basis_b2(SpacePtr space, int l);

// Top-l cells of every frontal slice (third-order only). Ties go to the
// lexicographically smaller (i1, i2); the least element and cells outside
// Omega are skipped in favour of the next-ranked cell.
Basis build_basis_b3(SpacePtr space, int l, const NormalizedTensor& p);

// Omega+ itself: every tensor is representable.
Basis build_basis_full(SpacePtr space);

// One index vector per line, 1-based, '#' comments.
Basis load_basis(std::istream& in, SpacePtr space);
Basis load_basis_file(const std::string& path, SpacePtr space);

// Parses "b1", "b2:<l>", "b3:<l>", "file:<path>", "full", "none" and unions
// joined by '+'. `p` is required only when the spec contains b3.
Basis parse_basis_spec(const std::string& spec, SpacePtr space, const NormalizedTensor* p = nullptr);

}  // namespace legendre
