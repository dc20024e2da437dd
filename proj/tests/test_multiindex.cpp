#include <polyfilt/multiindex.hpp>

#include <gtest/gtest.h>

#include <functional>
#include <set>

using namespace polyfilt;

namespace {

// Brute-force list of exponent vectors with |lambda| <= n.
std::vector<std::vector<int>> all_below(int d, int n) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(static_cast<std::size_t>(d), 0);
  std::function<void(int, int)> rec = [&](int j, int left) {
    if (j == d) {
      out.push_back(cur);
      return;
    }
    for (int e = 0; e <= left; ++e) {
      cur[static_cast<std::size_t>(j)] = e;
      rec(j + 1, left - e);
    }
    cur[static_cast<std::size_t>(j)] = 0;
  };
  rec(0, n);
  return out;
}

std::uint64_t scalar_binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
  return r;
}

}  // namespace

TEST(MultiIndex, EnumerateSmallBases) {
  const IndexBasis b = IndexBasis::enumerate(2, 1);
  ASSERT_EQ(b.size(), 3u);
  EXPECT_EQ(b.unrank(0), MultiIndex({0, 0}));
  EXPECT_EQ(b.unrank(1), MultiIndex({1, 0}));
  EXPECT_EQ(b.unrank(2), MultiIndex({0, 1}));
  EXPECT_EQ(IndexBasis::enumerate(2, 2).size(), 6u);
  EXPECT_EQ(IndexBasis::enumerate(3, 2, false).size(), 9u);
}

TEST(MultiIndex, GradedOrderAndRanks) {
  const IndexBasis b = IndexBasis::enumerate(2, 2);
  EXPECT_EQ(b.rank(MultiIndex({0, 0})), 0u);
  EXPECT_EQ(b.rank(MultiIndex({1, 0})), 1u);
  const std::vector<MultiIndex> expect{{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}};
  for (std::size_t i = 0; i < expect.size(); ++i) EXPECT_EQ(b.unrank(i), expect[i]);
  for (std::size_t i = 1; i < b.size(); ++i) EXPECT_LE(b.unrank(i - 1).degree(), b.unrank(i).degree());
  EXPECT_EQ(b.degree_begin(2), 3u);
  EXPECT_EQ(b.degree_begin(3), b.size());
}

TEST(MultiIndex, RankOutOfRange) {
  const IndexBasis b = IndexBasis::enumerate(2, 2);
  EXPECT_THROW(b.rank(MultiIndex({3, 0})), std::out_of_range);
  EXPECT_THROW(IndexBasis::enumerate(2, 2, false).rank(MultiIndex({0, 0})), std::out_of_range);
  EXPECT_FALSE(b.find(MultiIndex({1, 2})).has_value());
}

TEST(MultiIndex, RankUnrankBijection) {
  for (int d = 1; d <= 4; ++d)
    for (int n = 0; n <= 4; ++n)
      for (bool z : {true, false}) {
        const IndexBasis b = IndexBasis::enumerate(d, n, z);
        for (std::size_t i = 0; i < b.size(); ++i) ASSERT_EQ(b.rank(b.unrank(i)), i);
        std::set<std::vector<int>> seen;
        for (const auto& m : b) seen.insert(m.exponents());
        EXPECT_EQ(seen.size(), b.size());
      }
}

TEST(MultiIndex, SizeMatchesBruteForceCount) {
  for (int d = 1; d <= 5; ++d)
    for (int n = 0; n <= 5; ++n) {
      const auto brute = all_below(d, n).size();
      EXPECT_EQ(IndexBasis::enumerate(d, n).size(), brute);
      EXPECT_EQ(IndexBasis::enumerate(d, n, false).size(), brute - 1);
      EXPECT_EQ(basis_size(d, n), brute);
      EXPECT_EQ(basis_size(d, n, false), brute - 1);
    }
}

TEST(MultiIndex, MultiBinomialExamples) {
  EXPECT_EQ(multi_binomial(MultiIndex({2, 1}), MultiIndex({1, 1})), 2u);
  EXPECT_EQ(multi_binomial(MultiIndex({3, 0}), MultiIndex({0, 0})), 1u);
  EXPECT_EQ(multi_binomial(MultiIndex({1, 2}), MultiIndex({2, 0})), 0u);
  EXPECT_THROW(multi_binomial(MultiIndex({1, 2}), MultiIndex({1})), std::invalid_argument);
}

TEST(MultiIndex, ProductRuleAgainstScalarBinomials) {
  // C(l, m) C(m, v) = C(l, v) C(l - v, m - v), coordinatewise.
  for (int d = 1; d <= 3; ++d) {
    const auto all = all_below(d, 4);
    for (const auto& l : all)
      for (const auto& m : all)
        for (const auto& v : all) {
          const MultiIndex L(l), M(m), V(v);
          std::uint64_t lhs_scalar = 1, mb = 1;
          for (int j = 0; j < d; ++j) {
            const auto js = static_cast<std::size_t>(j);
            lhs_scalar *= scalar_binomial(l[js], m[js]) * scalar_binomial(m[js], v[js]);
            mb *= scalar_binomial(l[js], m[js]);
          }
          EXPECT_EQ(multi_binomial(L, M), mb);
          const std::uint64_t lhs = multi_binomial(L, M) * multi_binomial(M, V);
          EXPECT_EQ(lhs, lhs_scalar);
          if (V.is_below(M) && M.is_below(L)) {
            EXPECT_EQ(lhs, multi_binomial(L, V) * multi_binomial(L - V, M - V));
          }
        }
  }
}

TEST(MultiIndex, BinomialOverflowIsAnError) {
  EXPECT_EQ(binomial(10, 3), 120u);
  EXPECT_EQ(binomial(62, 31), 465428353255261088ull);
  EXPECT_THROW(binomial(200, 100), std::overflow_error);
}

TEST(MultiIndex, ArithmeticAndMonomials) {
  const MultiIndex a{2, 1}, b{1, 1};
  EXPECT_EQ(a + b, MultiIndex({3, 2}));
  EXPECT_EQ(a - b, MultiIndex({1, 0}));
  EXPECT_THROW(b - a, std::invalid_argument);
  EXPECT_TRUE(b.is_below(a));
  EXPECT_FALSE(a.is_below(b));
  const std::vector<double> x{2.0, 3.0};
  EXPECT_DOUBLE_EQ(a.monomial(x), 12.0);
  EXPECT_EQ(MultiIndex::unit(3, 1), MultiIndex({0, 1, 0}));
  EXPECT_THROW(MultiIndex({-1, 0}), std::invalid_argument);
}

TEST(MultiIndex, MultinomialAndCompositions) {
  const std::vector<int> parts{2, 1, 1};
  EXPECT_EQ(multinomial(parts), 12u);
  const auto c = compositions(2, 2);
  ASSERT_EQ(c.size(), 3u);
  EXPECT_EQ(c[0], (std::vector<int>{2, 0}));
  EXPECT_EQ(c[2], (std::vector<int>{0, 2}));
}
