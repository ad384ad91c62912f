#include "legendre/tensor.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "legendre/error.hpp"
#include "legendre/numeric.hpp"

namespace legendre {

// ---------------------------------------------------------------------------
// IndexVector

bool IndexVector::is_least() const noexcept {
  return std::all_of(c_.begin(), c_.end(), [](int i) { return i == 1; });
}

std::string IndexVector::to_string() const {
  std::string s = "(";
  for (std::size_t k = 0; k < c_.size(); ++k) {
    if (k) s += ',';
    s += std::to_string(c_[k]);
  }
  return s + ")";
}

std::ostream& operator<<(std::ostream& os, const IndexVector& v) { return os << v.to_string(); }

// ---------------------------------------------------------------------------
// Shape

Shape::Shape(std::vector<int> dims) : dims_(std::move(dims)) {
  if (dims_.empty()) throw DomainError("shape must have at least one mode");
  strides_.assign(dims_.size(), 1);
  cells_ = 1;
  for (std::size_t k = dims_.size(); k-- > 0;) {
    if (dims_[k] < 1) throw DomainError("shape dimensions must be >= 1");
    strides_[k] = cells_;
    const auto d = static_cast<std::size_t>(dims_[k]);
    if (cells_ > std::numeric_limits<std::size_t>::max() / d)
      throw DomainError("shape cell count overflows");
    cells_ *= d;
  }
}

bool Shape::contains(const IndexVector& v) const noexcept {
  if (v.size() != dims_.size()) return false;
  for (std::size_t k = 0; k < dims_.size(); ++k)
    if (v[k] < 1 || v[k] > dims_[k]) return false;
  return true;
}

std::size_t Shape::offset(const IndexVector& v) const {
  if (v.size() != dims_.size())
    throw DomainError("index " + v.to_string() + " has arity " + std::to_string(v.size()) +
                      ", shape has " + std::to_string(dims_.size()));
  std::size_t off = 0;
  for (std::size_t k = 0; k < dims_.size(); ++k) {
    if (v[k] < 1 || v[k] > dims_[k])
      throw DomainError("index " + v.to_string() + " out of range for shape " + to_string());
    off += static_cast<std::size_t>(v[k] - 1) * strides_[k];
  }
  return off;
}

IndexVector Shape::unravel(std::size_t offset) const {
  std::vector<int> c(dims_.size());
  for (std::size_t k = 0; k < dims_.size(); ++k) {
    c[k] = static_cast<int>(offset / strides_[k]) + 1;
    offset %= strides_[k];
  }
  return IndexVector(std::move(c));
}

std::string Shape::to_string() const {
  std::string s;
  for (std::size_t k = 0; k < dims_.size(); ++k) {
    if (k) s += 'x';
    s += std::to_string(dims_[k]);
  }
  return s;
}

Shape Shape::parse(const std::string& text) {
  std::vector<int> dims;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t next = text.find_first_of("x,", pos);
    if (next == std::string::npos) next = text.size();
    const std::string part = text.substr(pos, next - pos);
    int d = 0;
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), d);
    if (ec != std::errc() || ptr != part.data() + part.size() || part.empty())
      throw DomainError("bad shape '" + text + "'");
    dims.push_back(d);
    pos = next + 1;
  }
  return Shape(std::move(dims));
}

// ---------------------------------------------------------------------------
// RawTensor

RawTensor::RawTensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  if (values_.size() != shape_.cell_count())
    throw DomainError("tensor has " + std::to_string(values_.size()) + " values, shape " +
                      shape_.to_string() + " needs " + std::to_string(shape_.cell_count()));
  for (double x : values_)
    if (!(x >= 0.0) || !std::isfinite(x)) throw DomainError("tensor entries must be finite and >= 0");
}

RawTensor::RawTensor(Shape shape) : shape_(std::move(shape)), values_(shape_.cell_count(), 0.0) {}

void RawTensor::set(const IndexVector& v, double value) {
  if (!(value >= 0.0) || !std::isfinite(value)) throw DomainError("tensor entries must be finite and >= 0");
  values_[shape_.offset(v)] = value;
}

double RawTensor::sum() const { return numeric::pairwise_sum(values_); }

// ---------------------------------------------------------------------------
// SampleSpace

SampleSpace::SampleSpace(Shape shape) : shape_(std::move(shape)) {
  offsets_.resize(shape_.cell_count());
  for (std::size_t i = 0; i < offsets_.size(); ++i) offsets_[i] = i;
}

SampleSpace::SampleSpace(Shape shape, std::vector<std::size_t> sorted_offsets)
    : shape_(std::move(shape)), offsets_(std::move(sorted_offsets)) {
  if (offsets_.empty() || offsets_.front() != 0)
    throw DomainError("sample space must contain the least element (1,...,1)");
  for (std::size_t i = 1; i < offsets_.size(); ++i)
    if (offsets_[i] <= offsets_[i - 1]) throw DomainError("sample space offsets must be strictly increasing");
  if (offsets_.back() >= shape_.cell_count()) throw DomainError("sample space offset outside the grid");
}

std::vector<IndexVector> SampleSpace::members() const {
  std::vector<IndexVector> out;
  out.reserve(offsets_.size());
  for (std::size_t off : offsets_) out.push_back(shape_.unravel(off));
  return out;
}

std::optional<std::size_t> SampleSpace::ordinal_of_offset(std::size_t offset) const {
  if (is_full()) {
    if (offset < offsets_.size()) return offset;
    return std::nullopt;
  }
  auto it = std::lower_bound(offsets_.begin(), offsets_.end(), offset);
  if (it == offsets_.end() || *it != offset) return std::nullopt;
  return static_cast<std::size_t>(it - offsets_.begin());
}

std::optional<std::size_t> SampleSpace::ordinal(const IndexVector& v) const {
  if (!shape_.contains(v)) return std::nullopt;
  return ordinal_of_offset(shape_.offset(v));
}

double NormalizedTensor::prob(const IndexVector& v) const {
  auto ord = space->ordinal(v);
  if (!ord) throw DomainError("index " + v.to_string() + " is not in the sample space");
  return probs[*ord];
}

// ---------------------------------------------------------------------------
// Text formats

TensorFormat parse_tensor_format(const std::string& name) {
  if (name == "dense" || name == "dense-text") return TensorFormat::DenseText;
  if (name == "coo" || name == "sparse" || name == "sparse-coo") return TensorFormat::SparseCoo;
  throw DomainError("unknown tensor format '" + name + "' (expected dense or coo)");
}

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

bool is_blank_or_comment(std::string_view line) {
  for (char c : line) {
    if (c == '#') return true;
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

int parse_int(std::string_view tok, std::size_t line) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw ParseError("expected an integer, got '" + std::string(tok) + "'", line);
  return v;
}

double parse_value(std::string_view tok, std::size_t line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw ParseError("expected a number, got '" + std::string(tok) + "'", line);
  if (!std::isfinite(v)) throw ParseError("non-finite value", line);
  if (v < 0.0) throw ParseError("negative value " + std::string(tok), line);
  return v;
}

Shape parse_shape_tokens(const std::vector<std::string_view>& toks, std::size_t line) {
  if (toks.empty()) throw ParseError("malformed header: empty shape", line);
  std::vector<int> dims;
  for (auto t : toks) {
    const int d = parse_int(t, line);
    if (d < 1) throw ParseError("malformed header: dimension must be >= 1", line);
    dims.push_back(d);
  }
  try {
    return Shape(std::move(dims));
  } catch (const DomainError& e) {
    throw ParseError(std::string("malformed header: ") + e.what(), line);
  }
}

RawTensor load_dense(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  std::optional<Shape> shape;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++lineno;
    if (is_blank_or_comment(line)) continue;
    auto toks = split_ws(line);
    if (!shape) {
      shape = parse_shape_tokens(toks, lineno);
      values.reserve(shape->cell_count());
      continue;
    }
    for (auto t : toks) {
      if (values.size() == shape->cell_count())
        throw ParseError("too many values for shape " + shape->to_string(), lineno);
      values.push_back(parse_value(t, lineno));
    }
  }
  if (!shape) throw ParseError("malformed header: missing shape line", lineno == 0 ? 1 : lineno);
  if (values.size() != shape->cell_count())
    throw ParseError("expected " + std::to_string(shape->cell_count()) + " values, got " +
                         std::to_string(values.size()),
                     lineno);
  return RawTensor(std::move(*shape), std::move(values));
}

RawTensor load_coo(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  std::optional<Shape> shape;
  std::vector<double> values;
  std::vector<bool> seen;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view sv(line);
    const auto first = sv.find_first_not_of(" \t\r");
    if (!shape && first != std::string_view::npos && sv[first] == '#') {
      auto body = sv.substr(first + 1);
      const auto colon = body.find(':');
      if (colon != std::string_view::npos) {
        auto key = split_ws(body.substr(0, colon));
        if (key.size() == 1 && key[0] == "shape") {
          shape = parse_shape_tokens(split_ws(body.substr(colon + 1)), lineno);
          values.assign(shape->cell_count(), 0.0);
          seen.assign(shape->cell_count(), false);
        }
      }
      continue;
    }
    if (is_blank_or_comment(line)) continue;
    if (!shape) throw ParseError("malformed header: expected '# shape: I1 ... IN' before entries", lineno);
    auto toks = split_ws(line);
    if (toks.size() != shape->order() + 1)
      throw ParseError("expected " + std::to_string(shape->order()) + " indices and a value", lineno);
    std::vector<int> idx(shape->order());
    for (std::size_t k = 0; k < shape->order(); ++k) idx[k] = parse_int(toks[k], lineno);
    IndexVector v(std::move(idx));
    if (!shape->contains(v)) throw ParseError("index " + v.to_string() + " out of range", lineno);
    const double x = parse_value(toks.back(), lineno);
    const std::size_t off = shape->offset(v);
    if (seen[off]) throw ParseError("duplicate index " + v.to_string(), lineno);
    seen[off] = true;
    values[off] = x;
  }
  if (!shape) throw ParseError("malformed header: missing '# shape:' line", lineno == 0 ? 1 : lineno);
  return RawTensor(std::move(*shape), std::move(values));
}

}  // namespace

RawTensor load_tensor(std::istream& in, TensorFormat format) {
  return format == TensorFormat::DenseText ? load_dense(in) : load_coo(in);
}

RawTensor load_tensor_file(const std::string& path, TensorFormat format) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'", 0);
  return load_tensor(in, format);
}

void write_dense_text(std::ostream& out, const RawTensor& x) {
  const auto& dims = x.shape().dims();
  for (std::size_t k = 0; k < dims.size(); ++k) out << (k ? " " : "") << dims[k];
  out << '\n';
  const auto run = static_cast<std::size_t>(dims.back());
  char buf[32];
  auto vals = x.values();
  for (std::size_t i = 0; i < vals.size(); ++i) {
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, vals[i]);
    out.write(buf, ptr - buf);
    out << ((i + 1) % run == 0 ? '\n' : ' ');
  }
}

// ---------------------------------------------------------------------------
// Sample spaces and normalization

SampleSpace build_sample_space(const Shape& shape, std::span<const IndexVector> exclude) {
  std::vector<bool> drop(shape.cell_count(), false);
  for (const auto& v : exclude) {
    if (!shape.contains(v)) throw DomainError("excluded index " + v.to_string() + " is outside the grid");
    if (v.is_least()) throw DomainError("cannot exclude the least element " + v.to_string());
    drop[shape.offset(v)] = true;
  }
  std::vector<std::size_t> offsets;
  offsets.reserve(shape.cell_count());
  for (std::size_t i = 0; i < drop.size(); ++i)
    if (!drop[i]) offsets.push_back(i);
  return SampleSpace(shape, std::move(offsets));
}

SampleSpace nonzero_sample_space(const RawTensor& x) {
  std::vector<std::size_t> offsets{0};
  auto vals = x.values();
  for (std::size_t i = 1; i < vals.size(); ++i)
    if (vals[i] > 0.0) offsets.push_back(i);
  return SampleSpace(x.shape(), std::move(offsets));
}

NormalizedTensor normalize(const RawTensor& x, SpacePtr space) {
  if (!(space->shape() == x.shape()))
    throw DomainError("sample space shape " + space->shape().to_string() + " does not match tensor shape " +
                      x.shape().to_string());
  std::vector<double> probs(space->size());
  auto vals = x.values();
  auto offs = space->offsets();
  for (std::size_t i = 0; i < probs.size(); ++i) probs[i] = vals[offs[i]];
  const double total = numeric::pairwise_sum(probs);
  if (!(total > 0.0)) throw DomainError("tensor has zero total mass over the sample space");
  for (double& p : probs) p /= total;
  return NormalizedTensor{std::move(space), std::move(probs), total};
}

NormalizedTensor normalize(const RawTensor& x) {
  return normalize(x, std::make_shared<const SampleSpace>(x.shape()));
}

RawTensor denormalize(const NormalizedTensor& q) {
  std::vector<double> vals(q.space->shape().cell_count(), 0.0);
  auto offs = q.space->offsets();
  for (std::size_t i = 0; i < offs.size(); ++i) vals[offs[i]] = q.probs[i] * q.total_mass;
  return RawTensor(q.space->shape(), std::move(vals));
}

}  // namespace legendre
