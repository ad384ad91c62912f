#include "legendre/poset.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>

#include "legendre/error.hpp"

namespace legendre {

bool leq(const IndexVector& u, const IndexVector& v) {
  if (u.size() != v.size())
    throw DomainError("cannot compare " + u.to_string() + " and " + v.to_string() + ": arity mismatch");
  for (std::size_t k = 0; k < u.size(); ++k)
    if (u[k] > v[k]) return false;
  return true;
}

IndexVector join(const IndexVector& u, const IndexVector& v) {
  if (u.size() != v.size()) throw DomainError("join: arity mismatch");
  std::vector<int> c(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) c[k] = std::max(u[k], v[k]);
  return IndexVector(std::move(c));
}

// ---------------------------------------------------------------------------
// Basis

Basis::Basis(SpacePtr space, std::vector<IndexVector> members) : space_(std::move(space)) {
  const Shape& shape = space_->shape();
  std::vector<std::size_t> offs;
  offs.reserve(members.size());
  for (const auto& v : members) {
    if (!shape.contains(v)) throw DomainError("basis member " + v.to_string() + " is outside the grid");
    if (v.is_least()) throw DomainError("basis cannot contain the least element " + v.to_string());
    const std::size_t off = shape.offset(v);
    if (!space_->ordinal_of_offset(off))
      throw DomainError("basis member " + v.to_string() + " is not in the sample space");
    offs.push_back(off);
  }
  std::sort(offs.begin(), offs.end());
  offs.erase(std::unique(offs.begin(), offs.end()), offs.end());
  offsets_ = std::move(offs);
  members_.reserve(offsets_.size());
  for (std::size_t off : offsets_) members_.push_back(shape.unravel(off));
}

std::optional<std::size_t> Basis::ordinal(const IndexVector& v) const {
  if (!space_->shape().contains(v)) return std::nullopt;
  const std::size_t off = space_->shape().offset(v);
  auto it = std::lower_bound(offsets_.begin(), offsets_.end(), off);
  if (it == offsets_.end() || *it != off) return std::nullopt;
  return static_cast<std::size_t>(it - offsets_.begin());
}

Basis basis_union(const Basis& a, const Basis& b) {
  if (!(*a.space() == *b.space())) throw DomainError("basis union over different sample spaces");
  std::vector<IndexVector> all = a.members();
  all.insert(all.end(), b.members().begin(), b.members().end());
  return Basis(a.space(), std::move(all));
}

// ---------------------------------------------------------------------------
// Incidence

ZetaIncidence::ZetaIncidence(BasisPtr basis) : basis_(std::move(basis)) {
  const SampleSpace& space = *basis_->space();
  cols_ = space.size();
  words_per_row_ = (cols_ + 63) / 64;
  words_.assign(basis_->size() * words_per_row_, 0);
  const auto omega = space.members();
  for (std::size_t r = 0; r < basis_->size(); ++r) {
    const IndexVector& u = (*basis_)[r];
    std::uint64_t* row = words_.data() + r * words_per_row_;
    for (std::size_t c = 0; c < cols_; ++c)
      if (leq(u, omega[c])) row[c / 64] |= std::uint64_t{1} << (c % 64);
  }
}

std::size_t ZetaIncidence::row_count(std::size_t row) const {
  std::size_t n = 0;
  for (auto w : row_words(row)) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

ZetaIncidence build_incidence(BasisPtr basis) { return ZetaIncidence(std::move(basis)); }

std::vector<IndexVector> down_set(const IndexVector& v, const Basis& basis) {
  std::vector<IndexVector> out;
  for (const auto& u : basis.members())
    if (leq(u, v)) out.push_back(u);
  return out;
}

std::vector<IndexVector> up_set(const IndexVector& v, const SampleSpace& space) {
  if (v.size() != space.shape().order()) throw DomainError("up_set: arity mismatch");
  std::vector<IndexVector> out;
  for (std::size_t i = 0; i < space.size(); ++i) {
    IndexVector w = space.member(i);
    if (leq(v, w)) out.push_back(std::move(w));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Basis families

Basis build_basis_b1(SpacePtr space) {
  std::vector<IndexVector> members;
  for (std::size_t i = 1; i < space->size(); ++i) {
    IndexVector v = space->member(i);
    int free_modes = 0;
    for (int c : v) free_modes += (c != 1);
    if (free_modes == 1) members.push_back(std::move(v));
  }
  return Basis(std::move(space), std::move(members));
}

namespace {

std::vector<int> selected_positions(int dim, int l) {
  std::vector<int> c;
  const int step = dim / l;
  for (int i = 1; i <= l; ++i) c.push_back(i * step);
  return c;
}

}  // namespace

Basis build_basis_b2(SpacePtr space, int l) {
  const Shape& shape = space->shape();
  if (shape.order() < 2) throw DomainError("b2 needs a tensor of order >= 2");
  const int limit = std::min(shape.dim(0), shape.dim(1));
  if (l < 1 || l > limit)
    throw DomainError("b2: l must be in [1, " + std::to_string(limit) + "], got " + std::to_string(l));
  const auto c1 = selected_positions(shape.dim(0), l);
  const auto c2 = selected_positions(shape.dim(1), l);
  auto in = [](const std::vector<int>& c, int x) { return std::find(c.begin(), c.end(), x) != c.end(); };
  std::vector<IndexVector> members;
  for (std::size_t i = 1; i < space->size(); ++i) {
    IndexVector v = space->member(i);
    if ((v[0] == 1 && in(c2, v[1])) || (in(c1, v[0]) && v[1] == 1)) members.push_back(std::move(v));
  }
  return Basis(std::move(space), std::move(members));
}

Basis build_basis_b3(SpacePtr space, int l, const NormalizedTensor& p) {
  const Shape& shape = space->shape();
  if (shape.order() != 3) throw DomainError("b3 is defined for third-order tensors only");
  if (!(*p.space == *space)) throw DomainError("b3: probabilities are over a different sample space");
  const int slice_size = shape.dim(0) * shape.dim(1);
  if (l < 1 || l > slice_size)
    throw DomainError("b3: l must be in [1, " + std::to_string(slice_size) + "], got " + std::to_string(l));

  // Ordinals grouped by frontal slice; within a group they stay in lex order.
  std::vector<std::vector<std::size_t>> slices(static_cast<std::size_t>(shape.dim(2)));
  for (std::size_t i = 1; i < space->size(); ++i) {
    const std::size_t i3 = space->offsets()[i] % static_cast<std::size_t>(shape.dim(2));
    slices[i3].push_back(i);
  }
  std::vector<IndexVector> members;
  for (auto& slice : slices) {
    std::stable_sort(slice.begin(), slice.end(),
                     [&](std::size_t a, std::size_t b) { return p.probs[a] > p.probs[b]; });
    const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(l), slice.size());
    for (std::size_t j = 0; j < take; ++j) members.push_back(space->member(slice[j]));
  }
  return Basis(std::move(space), std::move(members));
}

Basis build_basis_full(SpacePtr space) {
  auto members = space->members();
  members.erase(members.begin());
  return Basis(std::move(space), std::move(members));
}

// ---------------------------------------------------------------------------
// Basis files and spec strings

Basis load_basis(std::istream& in, SpacePtr space) {
  const Shape& shape = space->shape();
  std::vector<IndexVector> members;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ss(line);
    std::vector<int> c;
    std::string tok;
    while (ss >> tok) {
      int x = 0;
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), x);
      if (ec != std::errc() || ptr != tok.data() + tok.size())
        throw ParseError("expected an integer, got '" + tok + "'", lineno);
      c.push_back(x);
    }
    if (c.empty()) continue;
    IndexVector v(std::move(c));
    if (v.size() != shape.order())
      throw ParseError("index " + v.to_string() + " has arity " + std::to_string(v.size()) + ", expected " +
                           std::to_string(shape.order()),
                       lineno);
    if (v.is_least()) throw ParseError("least element " + v.to_string() + " cannot be a basis member", lineno);
    if (!space->contains(v)) throw ParseError("index " + v.to_string() + " is not in the sample space", lineno);
    members.push_back(std::move(v));
  }
  return Basis(std::move(space), std::move(members));
}

Basis load_basis_file(const std::string& path, SpacePtr space) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open basis file '" + path + "'", 0);
  return load_basis(in, std::move(space));
}

namespace {

int parse_level(const std::string& term, const std::string& arg) {
  int l = 0;
  auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), l);
  if (arg.empty() || ec != std::errc() || ptr != arg.data() + arg.size())
    throw DomainError("basis term '" + term + "' needs an integer level");
  return l;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

}  // namespace

Basis parse_basis_spec(const std::string& spec, SpacePtr space, const NormalizedTensor* p) {
  Basis out(space);
  std::size_t pos = 0;
  while (pos <= spec.size()) {
    std::size_t next = spec.find('+', pos);
    if (next == std::string::npos) next = spec.size();
    const std::string term = trim(spec.substr(pos, next - pos));
    pos = next + 1;
    if (term.empty() || term == "none") continue;
    const auto colon = term.find(':');
    const std::string head = term.substr(0, colon);
    const std::string arg = colon == std::string::npos ? std::string() : term.substr(colon + 1);
    Basis part(space);
    if (head == "b1" && colon == std::string::npos) {
      part = build_basis_b1(space);
    } else if (head == "b2") {
      part = build_basis_b2(space, parse_level(term, arg));
    } else if (head == "b3") {
      if (!p) throw DomainError("basis term '" + term + "' needs the input tensor");
      part = build_basis_b3(space, parse_level(term, arg), *p);
    } else if (head == "file" && !arg.empty()) {
      part = load_basis_file(arg, space);
    } else if (head == "full" && colon == std::string::npos) {
      part = build_basis_full(space);
    } else {
      throw DomainError("unknown basis term '" + term + "'");
    }
    out = basis_union(out, part);
  }
  return out;
}

}  // namespace legendre
