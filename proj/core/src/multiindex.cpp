#include "polyfilt/multiindex.hpp"

#include <limits>
#include <numeric>
#include <stdexcept>

namespace polyfilt {

namespace {

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r = 0;
  if (__builtin_mul_overflow(a, b, &r)) throw std::overflow_error("integer overflow in combinatorial coefficient");
  return r;
}

void compositions_rec(int pos, int remaining, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  const int len = static_cast<int>(cur.size());
  if (pos == len - 1) {
    cur[static_cast<std::size_t>(pos)] = remaining;
    out.push_back(cur);
    return;
  }
  for (int k = remaining; k >= 0; --k) {
    cur[static_cast<std::size_t>(pos)] = k;
    compositions_rec(pos + 1, remaining - k, cur, out);
  }
}

}  // namespace

MultiIndex::MultiIndex(std::vector<int> exponents) : exps_(std::move(exponents)) {
  for (int e : exps_) {
    if (e < 0) throw std::invalid_argument("multi-index entries must be non-negative");
    degree_ += e;
  }
}

MultiIndex::MultiIndex(std::initializer_list<int> exponents) : MultiIndex(std::vector<int>(exponents)) {}

MultiIndex MultiIndex::zero(int d) {
  if (d < 1) throw std::invalid_argument("dimension must be positive");
  return MultiIndex(std::vector<int>(static_cast<std::size_t>(d), 0));
}

MultiIndex MultiIndex::unit(int d, int j) {
  if (j < 0 || j >= d) throw std::out_of_range("unit multi-index position out of range");
  std::vector<int> e(static_cast<std::size_t>(d), 0);
  e[static_cast<std::size_t>(j)] = 1;
  return MultiIndex(std::move(e));
}

bool MultiIndex::is_below(const MultiIndex& other) const {
  if (dim() != other.dim()) throw std::invalid_argument("multi-index length mismatch");
  for (std::size_t j = 0; j < exps_.size(); ++j)
    if (exps_[j] > other.exps_[j]) return false;
  return true;
}

MultiIndex MultiIndex::operator+(const MultiIndex& other) const {
  if (dim() != other.dim()) throw std::invalid_argument("multi-index length mismatch");
  std::vector<int> e(exps_);
  for (std::size_t j = 0; j < e.size(); ++j) e[j] += other.exps_[j];
  return MultiIndex(std::move(e));
}

MultiIndex MultiIndex::operator-(const MultiIndex& other) const {
  if (dim() != other.dim()) throw std::invalid_argument("multi-index length mismatch");
  std::vector<int> e(exps_);
  for (std::size_t j = 0; j < e.size(); ++j) e[j] -= other.exps_[j];
  return MultiIndex(std::move(e));
}

double MultiIndex::monomial(std::span<const double> x) const {
  if (x.size() != exps_.size()) throw std::invalid_argument("monomial: point dimension mismatch");
  double r = 1.0;
  for (std::size_t j = 0; j < exps_.size(); ++j)
    for (int k = 0; k < exps_[j]; ++k) r *= x[j];
  return r;
}

std::string MultiIndex::to_string() const {
  std::string s = "(";
  for (std::size_t j = 0; j < exps_.size(); ++j) {
    if (j) s += ',';
    s += std::to_string(exps_[j]);
  }
  return s + ")";
}

std::size_t MultiIndexHash::operator()(const MultiIndex& m) const noexcept {
  std::size_t h = 1469598103934665603ULL;
  for (int e : m.exponents()) {
    h ^= static_cast<std::size_t>(e) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return h;
}

std::uint64_t binomial(int n, int k) {
  if (n < 0) throw std::invalid_argument("binomial: negative n");
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) {
    // r * (n-k+i) / i stays integral; divide by gcd first to delay overflow.
    std::uint64_t num = static_cast<std::uint64_t>(n - k + i);
    std::uint64_t den = static_cast<std::uint64_t>(i);
    const std::uint64_t g = std::gcd(r, den);
    r /= g;
    den /= g;
    num /= den;  // den divides num now
    r = checked_mul(r, num);
  }
  return r;
}

std::uint64_t multi_binomial(const MultiIndex& lambda, const MultiIndex& mu) {
  if (lambda.dim() != mu.dim()) throw std::invalid_argument("multi_binomial: length mismatch");
  std::uint64_t r = 1;
  for (int j = 0; j < lambda.dim(); ++j) {
    if (mu[j] > lambda[j]) return 0;
    r = checked_mul(r, binomial(lambda[j], mu[j]));
  }
  return r;
}

std::uint64_t multinomial(std::span<const int> parts) {
  std::uint64_t r = 1;
  int total = 0;
  for (int p : parts) {
    if (p < 0) throw std::invalid_argument("multinomial: negative part");
    total += p;
    r = checked_mul(r, binomial(total, p));
  }
  return r;
}

std::vector<std::vector<int>> compositions(int len, int total) {
  if (len < 1 || total < 0) throw std::invalid_argument("compositions: bad arguments");
  std::vector<std::vector<int>> out;
  std::vector<int> cur(static_cast<std::size_t>(len), 0);
  compositions_rec(0, total, cur, out);
  return out;
}

std::size_t basis_size(int d, int n, bool include_zero) {
  if (d < 1 || n < 0) throw std::invalid_argument("basis_size: need d >= 1 and n >= 0");
  const std::uint64_t c = binomial(d + n, d);
  return static_cast<std::size_t>(include_zero ? c : c - 1);
}

IndexBasis IndexBasis::enumerate(int d, int n, bool include_zero) {
  if (d < 1) throw std::invalid_argument("IndexBasis: d must be >= 1");
  if (n < 0) throw std::invalid_argument("IndexBasis: n must be >= 0");
  IndexBasis b;
  b.d_ = d;
  b.n_ = n;
  b.include_zero_ = include_zero;
  b.items_.reserve(basis_size(d, n, include_zero));
  for (int k = include_zero ? 0 : 1; k <= n; ++k)
    for (auto& e : compositions(d, k)) b.items_.emplace_back(std::move(e));
  for (std::size_t i = 0; i < b.items_.size(); ++i) b.ranks_.emplace(b.items_[i], i);
  return b;
}

const MultiIndex& IndexBasis::unrank(std::size_t i) const {
  if (i >= items_.size()) throw std::out_of_range("IndexBasis::unrank: index out of range");
  return items_[i];
}

std::optional<std::size_t> IndexBasis::find(const MultiIndex& lambda) const {
  if (lambda.dim() != d_) return std::nullopt;
  auto it = ranks_.find(lambda);
  if (it == ranks_.end()) return std::nullopt;
  return it->second;
}

std::size_t IndexBasis::rank(const MultiIndex& lambda) const {
  if (lambda.dim() != d_) throw std::invalid_argument("IndexBasis::rank: dimension mismatch");
  auto r = find(lambda);
  if (!r) throw std::out_of_range("IndexBasis::rank: " + lambda.to_string() + " not in basis");
  return *r;
}

std::size_t IndexBasis::degree_begin(int k) const {
  if (k > n_) return items_.size();
  if (k <= 0) return 0;
  std::size_t before = basis_size(d_, k - 1, true);
  return include_zero_ ? before : before - 1;
}

}  // namespace polyfilt
