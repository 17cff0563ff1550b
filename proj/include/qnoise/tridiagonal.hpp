#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "qnoise/error.hpp"

namespace qnoise {

namespace detail {
template <class T>
inline T reciprocal(const T& z) {
  return T(1) / z;
}

template <class R>
inline std::complex<R> reciprocal(const std::complex<R>& z) {
  const R n = z.real() * z.real() + z.imag() * z.imag();
  return {z.real() / n, -z.imag() / n};
}

// Plain products without the C99 Annex G inf/nan recovery path.
template <class T>
inline T mul(const T& a, const T& b) {
  return a * b;
}

template <class R>
inline std::complex<R> mul(const std::complex<R>& a, const std::complex<R>& b) {
  return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

template <class T>
inline bool is_zero(const T& z) {
  return z == T(0);
}
}  // namespace detail

/// Thomas algorithm for a_i x_{i-1} + b_i x_i + c_i x_{i+1} = d_i.
/// sub[0] and sup[n-1] are ignored. No pivoting.
template <class T>
std::vector<T> solve_tridiagonal(std::span<const T> sub, std::span<const T> diag,
                                 std::span<const T> sup, std::span<const T> rhs) {
  const std::size_t n = diag.size();
  require(n > 0 && sub.size() == n && sup.size() == n && rhs.size() == n,
          ErrorKind::invalid_argument, "tridiagonal bands must have equal length");
  std::vector<T> c_prime(n);
  std::vector<T> x(n);
  T den = diag[0];
  require(!detail::is_zero(den), ErrorKind::solver_failure, "zero pivot");
  c_prime[0] = sup[0] / den;
  x[0] = rhs[0] / den;
  for (std::size_t i = 1; i < n; ++i) {
    den = diag[i] - sub[i] * c_prime[i - 1];
    require(!detail::is_zero(den), ErrorKind::solver_failure, "zero pivot");
    c_prime[i] = sup[i] / den;
    x[i] = (rhs[i] - sub[i] * x[i - 1]) / den;
  }
  for (std::size_t i = n - 1; i > 0; --i) x[i - 1] -= c_prime[i - 1] * x[i];
  return x;
}

/// Tridiagonal solver for systems whose diagonal only changes inside a fixed
/// index window [lo, hi]. Rows left of the window are eliminated top-down and
/// rows right of it bottom-up once; each solve refactors only the window and
/// joins the two sweeps at rows hi, hi + 1.
///
/// Requires 0 <= lo <= hi <= n - 2.
template <class T>
class PartitionedTridiagonal {
 public:
  PartitionedTridiagonal(std::vector<T> sub, std::vector<T> diag, std::vector<T> sup,
                         std::size_t lo, std::size_t hi)
      : a_(std::move(sub)), b_(std::move(diag)), c_(std::move(sup)), lo_(lo), hi_(hi) {
    n_ = b_.size();
    require(n_ >= 2 && a_.size() == n_ && c_.size() == n_, ErrorKind::invalid_argument,
            "tridiagonal bands must have equal length >= 2");
    require(lo_ <= hi_ && hi_ + 2 <= n_, ErrorKind::invalid_argument,
            "dynamic window must satisfy lo <= hi <= n - 2");
    cp_.resize(n_);
    inv_fwd_.resize(n_);
    m_fwd_.resize(n_);
    ap_.resize(n_);
    inv_bwd_.resize(n_);
    m_bwd_.resize(n_);
    T prev{};
    for (std::size_t i = 0; i < lo_; ++i) {
      const T den = b_[i] - a_[i] * prev;
      require(!detail::is_zero(den), ErrorKind::solver_failure, "zero pivot");
      inv_fwd_[i] = detail::reciprocal(den);
      cp_[i] = c_[i] * inv_fwd_[i];
      m_fwd_[i] = a_[i] * inv_fwd_[i];
      prev = cp_[i];
    }
    prev = T{};
    for (std::size_t i = n_ - 1; i > hi_; --i) {
      const T den = b_[i] - c_[i] * prev;
      require(!detail::is_zero(den), ErrorKind::solver_failure, "zero pivot");
      inv_bwd_[i] = detail::reciprocal(den);
      ap_[i] = a_[i] * inv_bwd_[i];
      m_bwd_[i] = c_[i] * inv_bwd_[i];
      prev = ap_[i];
    }
    refactor_window();
  }

  std::size_t size() const { return n_; }
  std::size_t window_begin() const { return lo_; }
  std::size_t window_end() const { return hi_ + 1; }

  /// Replaces diag[lo..hi]; `values` has hi - lo + 1 entries.
  void set_window_diagonal(std::span<const T> values) {
    require(values.size() == hi_ - lo_ + 1, ErrorKind::invalid_argument,
            "window diagonal has the wrong length");
    for (std::size_t j = 0; j < values.size(); ++j) b_[lo_ + j] = values[j];
    refactor_window();
  }

  void solve(std::span<const T> rhs, std::span<T> x) {
    solve_batch<1>({rhs}, {x});
  }

  /// Solves K right-hand sides against the same matrix in one pass; the
  /// independent recurrences are interleaved.
  template <std::size_t K>
  void solve_batch(const std::array<std::span<const T>, K>& rhs, const std::array<std::span<T>, K>& x) {
    using detail::mul;
    const std::size_t n = n_;
    const std::size_t q = hi_;
    if (dp_.size() < K * n) {
      dp_.resize(K * n);
      dpp_.resize(K * n);
    }
    std::array<T, K> prev{};
    for (std::size_t i = 0; i <= q; ++i) {
      for (std::size_t k = 0; k < K; ++k) {
        prev[k] = mul(rhs[k][i], inv_fwd_[i]) - mul(m_fwd_[i], prev[k]);
        dp_[k * n + i] = prev[k];
      }
    }
    prev = {};
    for (std::size_t i = n - 1; i > q; --i) {
      for (std::size_t k = 0; k < K; ++k) {
        prev[k] = mul(rhs[k][i], inv_bwd_[i]) - mul(m_bwd_[i], prev[k]);
        dpp_[k * n + i] = prev[k];
      }
    }
    for (std::size_t k = 0; k < K; ++k)
      x[k][q] = mul(dp_[k * n + q] - mul(cp_[q], dpp_[k * n + q + 1]), join_inv_);
    for (std::size_t i = q + 1; i < n; ++i)
      for (std::size_t k = 0; k < K; ++k) x[k][i] = dpp_[k * n + i] - mul(ap_[i], x[k][i - 1]);
    for (std::size_t i = q; i > 0; --i)
      for (std::size_t k = 0; k < K; ++k) x[k][i - 1] = dp_[k * n + i - 1] - mul(cp_[i - 1], x[k][i]);
  }

 private:
  void refactor_window() {
    T prev = lo_ == 0 ? T{} : cp_[lo_ - 1];
    for (std::size_t i = lo_; i <= hi_; ++i) {
      const T den = b_[i] - a_[i] * prev;
      require(!detail::is_zero(den), ErrorKind::solver_failure, "zero pivot");
      inv_fwd_[i] = detail::reciprocal(den);
      cp_[i] = c_[i] * inv_fwd_[i];
      m_fwd_[i] = a_[i] * inv_fwd_[i];
      prev = cp_[i];
    }
    const T join = T(1) - cp_[hi_] * ap_[hi_ + 1];
    require(!detail::is_zero(join), ErrorKind::solver_failure, "singular join");
    join_inv_ = detail::reciprocal(join);
  }

  std::vector<T> a_, b_, c_;
  std::size_t n_ = 0, lo_ = 0, hi_ = 0;
  std::vector<T> cp_, inv_fwd_, m_fwd_, ap_, inv_bwd_, m_bwd_;
  std::vector<T> dp_, dpp_;
  T join_inv_{};
};

}  // namespace qnoise
