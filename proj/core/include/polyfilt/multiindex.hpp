#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace polyfilt {

// Exponent vector lambda in N^d.
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> exponents);
  MultiIndex(std::initializer_list<int> exponents);

  static MultiIndex zero(int d);
  // unit(d, j) is 1_j (0-based j).
  static MultiIndex unit(int d, int j);

  int dim() const { return static_cast<int>(exps_.size()); }
  int degree() const { return degree_; }
  int operator[](int j) const { return exps_[static_cast<std::size_t>(j)]; }
  const std::vector<int>& exponents() const { return exps_; }

  // Componentwise partial order: *this <= other.
  bool is_below(const MultiIndex& other) const;

  MultiIndex operator+(const MultiIndex& other) const;
  // Throws std::invalid_argument if the result would have a negative entry.
  MultiIndex operator-(const MultiIndex& other) const;

  bool operator==(const MultiIndex& other) const { return exps_ == other.exps_; }

  // x^lambda.
  double monomial(std::span<const double> x) const;

  std::string to_string() const;

 private:
  std::vector<int> exps_;
  int degree_ = 0;
};

struct MultiIndexHash {
  std::size_t operator()(const MultiIndex& m) const noexcept;
};

// Exact binomial coefficient; throws std::overflow_error if it does not fit.
std::uint64_t binomial(int n, int k);

// prod_j C(lambda_j, mu_j); zero when mu is not below lambda.
std::uint64_t multi_binomial(const MultiIndex& lambda, const MultiIndex& mu);

// Multinomial |a|! / prod a_j!.
std::uint64_t multinomial(std::span<const int> parts);

// All lambda in N^d with |lambda| <= n, graded: zero first, then degree 1,
// 2, ...; inside one degree lexicographically descending, so for d = 2 the
// order is (0,0), (1,0), (0,1), (2,0), (1,1), (0,2).
class IndexBasis {
 public:
  IndexBasis() = default;
  static IndexBasis enumerate(int d, int n, bool include_zero = true);

  int dim() const { return d_; }
  int order() const { return n_; }
  bool includes_zero() const { return include_zero_; }
  std::size_t size() const { return items_.size(); }

  const MultiIndex& unrank(std::size_t i) const;
  // Throws std::out_of_range if lambda is not in the basis.
  std::size_t rank(const MultiIndex& lambda) const;
  std::optional<std::size_t> find(const MultiIndex& lambda) const;

  // Index of the first element of degree k (size() if k > n).
  std::size_t degree_begin(int k) const;

  auto begin() const { return items_.begin(); }
  auto end() const { return items_.end(); }

  bool operator==(const IndexBasis& other) const {
    return d_ == other.d_ && n_ == other.n_ && include_zero_ == other.include_zero_;
  }

 private:
  int d_ = 0;
  int n_ = 0;
  bool include_zero_ = true;
  std::vector<MultiIndex> items_;
  std::unordered_map<MultiIndex, std::size_t, MultiIndexHash> ranks_;
};

// C(d+n, d) (with zero) computed exactly.
std::size_t basis_size(int d, int n, bool include_zero = true);

// All exponent vectors of length len with entries summing to total,
// lexicographically descending.
std::vector<std::vector<int>> compositions(int len, int total);

}  // namespace polyfilt
