#include "povmgeo/combinatorics.hpp"

#include <stdexcept>

namespace povmgeo {
namespace {

// Row-growable Pascal / Stirling triangles guarded by one mutex each.
// Row i holds entries j = 0..i.
class Triangle {
 public:
  using Rule = BigInt (*)(const std::vector<std::vector<BigInt>>&, int, int);

  explicit Triangle(Rule rule) : rule_(rule) { rows_.push_back({BigInt(1)}); }

  BigInt at(int i, int j) {
    if (i < 0 || j < 0) throw std::invalid_argument("negative index");
    if (j > i) return BigInt(0);
    std::lock_guard<std::mutex> lock(mutex_);
    while (static_cast<int>(rows_.size()) <= i) {
      const int n = static_cast<int>(rows_.size());
      std::vector<BigInt> row(n + 1);
      for (int m = 0; m <= n; ++m) row[m] = rule_(rows_, n, m);
      rows_.push_back(std::move(row));
    }
    return rows_[i][j];
  }

 private:
  Rule rule_;
  std::mutex mutex_;
  std::vector<std::vector<BigInt>> rows_;
};

BigInt pascal_rule(const std::vector<std::vector<BigInt>>& rows, int n, int m) {
  const auto& prev = rows[n - 1];
  BigInt v = (m > 0) ? prev[m - 1] : BigInt(0);
  if (m < n) v += prev[m];
  return v;
}

// S(m,n): S(m,n) = n S(m-1,n) + S(m-1,n-1)
BigInt stirling2_rule(const std::vector<std::vector<BigInt>>& rows, int m, int n) {
  const auto& prev = rows[m - 1];
  BigInt v = (n > 0) ? prev[n - 1] : BigInt(0);
  if (n < m) v += n * prev[n];
  return v;
}

// unsigned c(n,m): c(n,m) = (n-1) c(n-1,m) + c(n-1,m-1)
BigInt stirling1_rule(const std::vector<std::vector<BigInt>>& rows, int n, int m) {
  const auto& prev = rows[n - 1];
  BigInt v = (m > 0) ? prev[m - 1] : BigInt(0);
  if (m < n) v += (n - 1) * prev[m];
  return v;
}

Triangle& pascal() {
  static Triangle t(pascal_rule);
  return t;
}
Triangle& stirling2_table() {
  static Triangle t(stirling2_rule);
  return t;
}
Triangle& stirling1_table() {
  static Triangle t(stirling1_rule);
  return t;
}

}  // namespace

BigInt Combinatorics::binomial(int n, int k) {
  if (k < 0 || k > n) return BigInt(0);
  return pascal().at(n, k);
}

BigInt Combinatorics::stirling2(int m, int n) {
  if (n < 0 || m < 0) return BigInt(0);
  return stirling2_table().at(m, n);
}

BigInt Combinatorics::stirling1_unsigned(int n, int m) {
  if (n < 0 || m < 0) return BigInt(0);
  return stirling1_table().at(n, m);
}

BigInt Combinatorics::stirling1_signed(int n, int m) {
  BigInt c = stirling1_unsigned(n, m);
  return ((n - m) % 2 != 0) ? -c : c;
}

BigInt Combinatorics::factorial(int n) {
  if (n < 0) throw std::invalid_argument("factorial of negative");
  BigInt f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

BigInt Combinatorics::falling_factorial(int n, int m) {
  if (m < 0) throw std::invalid_argument("falling factorial of negative order");
  if (m > n) return BigInt(0);
  BigInt f = 1;
  for (int i = 0; i < m; ++i) f *= (n - i);
  return f;
}

}  // namespace povmgeo
