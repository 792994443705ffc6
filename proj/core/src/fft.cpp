// Copyright 2026 The bandlimit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "bandlimit/fft.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <mutex>
#include <numbers>
#include <unordered_map>

#include "bandlimit/errors.hpp"

namespace bandlimit {
namespace {

// Plain complex product; std::complex's operator* adds NaN recovery that is
// several times slower in the inner loops.
inline Complex cmul(Complex a, Complex b) {
  return {a.real() * b.real() - a.imag() * b.imag(),
          a.real() * b.imag() + a.imag() * b.real()};
}

// Largest prime handled by the generic butterfly; lengths with a larger
// prime factor go through Bluestein.
constexpr std::size_t kMaxDirectPrime = 13;

std::vector<std::pair<std::size_t, std::size_t>> factorize(std::size_t n) {
  // (radix, remaining length) pairs, radix 4 first.
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::size_t p = 4;
  while (n > 1) {
    while (n % p != 0) {
      if (p == 4) {
        p = 2;
      } else if (p == 2) {
        p = 3;
      } else {
        p += 2;
      }
      if (p * p > n) p = n;
    }
    n /= p;
    out.emplace_back(p, n);
  }
  return out;
}

bool is_small_smooth(std::size_t n) {
  for (const auto& [p, m] : factorize(n)) {
    if (p > kMaxDirectPrime) return false;
  }
  return true;
}

// Primes above kMaxDirectPrime are handled by Rader's algorithm when p - 1
// factors into small primes; anything else needs Bluestein.
bool mixed_radix_supported(std::size_t n) {
  for (const auto& [p, m] : factorize(n)) {
    if (p > kMaxDirectPrime && !is_small_smooth(p - 1)) return false;
  }
  return true;
}

std::size_t pow_mod(std::size_t base, std::size_t exp, std::size_t mod) {
  std::uint64_t result = 1;
  std::uint64_t b = base % mod;
  while (exp > 0) {
    if (exp & 1u) result = result * b % mod;
    b = b * b % mod;
    exp >>= 1;
  }
  return static_cast<std::size_t>(result);
}

std::size_t primitive_root(std::size_t p) {
  std::vector<std::size_t> factors;
  for (const auto& [q, m] : factorize(p - 1)) {
    const std::size_t prime = q == 4 ? 2 : q;
    if (std::find(factors.begin(), factors.end(), prime) == factors.end()) factors.push_back(prime);
  }
  for (std::size_t g = 2;; ++g) {
    bool ok = true;
    for (std::size_t q : factors) ok = ok && pow_mod(g, (p - 1) / q, p) != 1;
    if (ok) return g;
  }
}

std::size_t next_5_smooth(std::size_t n) {
  for (std::size_t m = n;; ++m) {
    std::size_t r = m;
    for (std::size_t p : {2u, 3u, 5u}) {
      while (r % p == 0) r /= p;
    }
    if (r == 1) return m;
  }
}

// Mixed-radix decimation in time (recursive, out of place) with specialised
// radix-2 and radix-4 butterflies and a generic butterfly for odd primes.
class MixedRadixPlan {
 public:
  explicit MixedRadixPlan(std::size_t n) : n_(n), factors_(factorize(n)), twiddles_(n) {
    for (std::size_t k = 0; k < n; ++k) {
      const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) /
                           static_cast<double>(n);
      twiddles_[k] = Complex(std::cos(angle), std::sin(angle));
    }
    std::size_t largest = 1;
    for (const auto& f : factors_) {
      largest = std::max(largest, f.first);
      if (f.first > kMaxDirectPrime &&
          std::none_of(rader_.begin(), rader_.end(),
                       [&](const auto& r) { return r->p == f.first; })) {
        rader_.push_back(std::make_unique<Rader>(f.first));
      }
    }
    max_radix_ = largest;
  }

  // out must not alias in.
  void transform(const Complex* in, Complex* out) const {
    std::vector<Complex> scratch(max_radix_);
    work(out, in, 1, 0, scratch.data());
  }

 private:
  void work(Complex* out, const Complex* in, std::size_t stride, std::size_t level,
            Complex* scratch) const {
    const auto [p, m] = factors_[level];
    Complex* const begin = out;
    Complex* const end = out + p * m;
    if (m == 1) {
      for (; out != end; ++out, in += stride) *out = *in;
    } else {
      for (; out != end; out += m, in += stride) work(out, in, stride * p, level + 1, scratch);
    }
    switch (p) {
      case 2: butterfly2(begin, stride, m); break;
      case 3: butterfly3(begin, stride, m); break;
      case 4: butterfly4(begin, stride, m); break;
      case 5: butterfly5(begin, stride, m); break;
      default:
        if (p > kMaxDirectPrime) {
          butterfly_rader(begin, stride, m, rader_for(p), scratch);
        } else {
          butterfly_generic(begin, stride, m, p, scratch);
        }
        break;
    }
  }

  void butterfly2(Complex* f, std::size_t stride, std::size_t m) const {
    Complex* g = f + m;
    for (std::size_t k = 0; k < m; ++k) {
      const Complex t = cmul(g[k], twiddles_[k * stride]);
      g[k] = f[k] - t;
      f[k] += t;
    }
  }

  void butterfly4(Complex* f, std::size_t stride, std::size_t m) const {
    for (std::size_t k = 0; k < m; ++k) {
      const Complex s0 = cmul(f[k + m], twiddles_[k * stride]);
      const Complex s1 = cmul(f[k + 2 * m], twiddles_[2 * k * stride]);
      const Complex s2 = cmul(f[k + 3 * m], twiddles_[3 * k * stride]);
      const Complex s5 = f[k] - s1;
      const Complex a = f[k] + s1;
      const Complex s3 = s0 + s2;
      const Complex s4 = s0 - s2;
      f[k + 2 * m] = a - s3;
      f[k] = a + s3;
      f[k + m] = Complex(s5.real() + s4.imag(), s5.imag() - s4.real());
      f[k + 3 * m] = Complex(s5.real() - s4.imag(), s5.imag() + s4.real());
    }
  }

  void butterfly3(Complex* f, std::size_t stride, std::size_t m) const {
    const double s60 = twiddles_[stride * m].imag();  // sin(-2 pi / 3)
    for (std::size_t k = 0; k < m; ++k) {
      const Complex s1 = cmul(f[k + m], twiddles_[k * stride]);
      const Complex s2 = cmul(f[k + 2 * m], twiddles_[2 * k * stride]);
      const Complex s3 = s1 + s2;
      const Complex s0 = (s1 - s2) * s60;
      const Complex mid = f[k] - 0.5 * s3;
      f[k] += s3;
      f[k + m] = Complex(mid.real() - s0.imag(), mid.imag() + s0.real());
      f[k + 2 * m] = Complex(mid.real() + s0.imag(), mid.imag() - s0.real());
    }
  }

  void butterfly5(Complex* f, std::size_t stride, std::size_t m) const {
    const Complex ya = twiddles_[stride * m];
    const Complex yb = twiddles_[2 * stride * m];
    for (std::size_t u = 0; u < m; ++u) {
      const Complex s0 = f[u];
      const Complex s1 = cmul(f[u + m], twiddles_[u * stride]);
      const Complex s2 = cmul(f[u + 2 * m], twiddles_[2 * u * stride]);
      const Complex s3 = cmul(f[u + 3 * m], twiddles_[3 * u * stride]);
      const Complex s4 = cmul(f[u + 4 * m], twiddles_[4 * u * stride]);
      const Complex s7 = s1 + s4;
      const Complex s10 = s1 - s4;
      const Complex s8 = s2 + s3;
      const Complex s9 = s2 - s3;
      f[u] = s0 + s7 + s8;
      const Complex s5(s0.real() + s7.real() * ya.real() + s8.real() * yb.real(),
                       s0.imag() + s7.imag() * ya.real() + s8.imag() * yb.real());
      const Complex s6(s10.imag() * ya.imag() + s9.imag() * yb.imag(),
                       -(s10.real() * ya.imag() + s9.real() * yb.imag()));
      f[u + m] = s5 - s6;
      f[u + 4 * m] = s5 + s6;
      const Complex s11(s0.real() + s7.real() * yb.real() + s8.real() * ya.real(),
                        s0.imag() + s7.imag() * yb.real() + s8.imag() * ya.real());
      const Complex s12(-s10.imag() * yb.imag() + s9.imag() * ya.imag(),
                        s10.real() * yb.imag() - s9.real() * ya.imag());
      f[u + 2 * m] = s11 + s12;
      f[u + 3 * m] = s11 - s12;
    }
  }

  // p-point DFT as a cyclic convolution of length p - 1 over the
  // multiplicative group mod p.
  struct Rader {
    explicit Rader(std::size_t prime) : p(prime), input_order(prime - 1), output_order(prime - 1),
                                        kernel(prime - 1), plan(std::make_unique<MixedRadixPlan>(prime - 1)) {
      const std::size_t g = primitive_root(p);
      const std::size_t g_inv = pow_mod(g, p - 2, p);
      std::vector<Complex> b(p - 1);
      for (std::size_t j = 0; j < p - 1; ++j) {
        input_order[j] = pow_mod(g, j, p);
        output_order[j] = pow_mod(g_inv, j, p);
        const double angle = -2.0 * std::numbers::pi * static_cast<double>(output_order[j]) /
                             static_cast<double>(p);
        b[j] = Complex(std::cos(angle), std::sin(angle));
      }
      plan->transform(b.data(), kernel.data());
      for (auto& v : kernel) v /= static_cast<double>(p - 1);
    }
    std::size_t p;
    std::vector<std::size_t> input_order;   // g^j mod p
    std::vector<std::size_t> output_order;  // g^-j mod p
    std::vector<Complex> kernel;            // FFT of the chirp, scaled by 1/(p-1)
    std::unique_ptr<MixedRadixPlan> plan;
  };

  const Rader& rader_for(std::size_t p) const {
    for (const auto& r : rader_) {
      if (r->p == p) return *r;
    }
    throw DimensionError("missing Rader plan");
  }

  void butterfly_rader(Complex* f, std::size_t stride, std::size_t m, const Rader& rd,
                       Complex* scratch) const {
    const std::size_t p = rd.p;
    std::vector<Complex> a(p - 1);
    std::vector<Complex> b(p - 1);
    for (std::size_t u = 0; u < m; ++u) {
      std::size_t tw = 0;
      Complex sum{};
      for (std::size_t q = 0, k = u; q < p; ++q, k += m) {
        scratch[q] = q == 0 ? f[k] : cmul(f[k], twiddles_[tw]);
        sum += scratch[q];
        tw += u * stride;
        if (tw >= n_) tw -= n_;
      }
      for (std::size_t j = 0; j < p - 1; ++j) a[j] = scratch[rd.input_order[j]];
      rd.plan->transform(a.data(), b.data());
      // Inverse transform as conj(fft(conj(.))).
      for (std::size_t j = 0; j < p - 1; ++j) b[j] = std::conj(cmul(b[j], rd.kernel[j]));
      rd.plan->transform(b.data(), a.data());
      f[u] = sum;
      for (std::size_t j = 0; j < p - 1; ++j) {
        f[u + rd.output_order[j] * m] = scratch[0] + std::conj(a[j]);
      }
    }
  }

  void butterfly_generic(Complex* f, std::size_t stride, std::size_t m, std::size_t p,
                         Complex* scratch) const {
    // m * stride * p == n, so every index below stays under n without a
    // modulo except for the running sums.
    const std::size_t column_step = m * stride;
    for (std::size_t u = 0; u < m; ++u) {
      std::size_t tw = 0;
      for (std::size_t q = 0, k = u; q < p; ++q, k += m) {
        scratch[q] = q == 0 ? f[k] : cmul(f[k], twiddles_[tw]);
        tw += u * stride;
        if (tw >= n_) tw -= n_;
      }
      for (std::size_t q = 0, k = u; q < p; ++q, k += m) {
        Complex acc = scratch[0];
        const std::size_t step = q * column_step;
        std::size_t idx = 0;
        for (std::size_t j = 1; j < p; ++j) {
          idx += step;
          if (idx >= n_) idx -= n_;
          acc += cmul(scratch[j], twiddles_[idx]);
        }
        f[k] = acc;
      }
    }
  }

  std::size_t n_;
  std::vector<std::pair<std::size_t, std::size_t>> factors_;
  std::vector<Complex> twiddles_;
  std::size_t max_radix_ = 1;
  std::vector<std::unique_ptr<Rader>> rader_;
};

// Bluestein: X_j = w_j * sum_k (x_k w_k) conj(w_{j-k}), w_k = e^{-i pi k^2/n};
// the convolution runs on a 5-smooth length m >= 2n - 1. Used for lengths
// the mixed-radix plan cannot factor.
class BluesteinPlan {
 public:
  explicit BluesteinPlan(std::size_t n)
      : n_(n), m_(next_5_smooth(2 * n - 1)), inner_(m_), chirp_(n), kernel_(m_) {
    const std::size_t period = 2 * n;
    for (std::size_t k = 0; k < n; ++k) {
      // k^2 mod 2n keeps the angle small for long transforms. Lengths are far
      // below 2^32, so k * k cannot overflow.
      const std::uint64_t k2 = (static_cast<std::uint64_t>(k) * k) % period;
      const double angle =
          -std::numbers::pi * static_cast<double>(k2) / static_cast<double>(n);
      chirp_[k] = Complex(std::cos(angle), std::sin(angle));
    }
    std::vector<Complex> kernel(m_);
    kernel[0] = std::conj(chirp_[0]);
    for (std::size_t k = 1; k < n; ++k) {
      kernel[k] = std::conj(chirp_[k]);
      kernel[m_ - k] = std::conj(chirp_[k]);
    }
    inner_.transform(kernel.data(), kernel_.data());
    // Fold the 1/m of the inner inverse into the kernel.
    for (auto& v : kernel_) v /= static_cast<double>(m_);
  }

  void transform(const Complex* in, Complex* out) const {
    std::vector<Complex> a(m_);
    std::vector<Complex> b(m_);
    for (std::size_t k = 0; k < n_; ++k) a[k] = cmul(in[k], chirp_[k]);
    inner_.transform(a.data(), b.data());
    // Inverse transform as conj(fft(conj(.))).
    for (std::size_t k = 0; k < m_; ++k) b[k] = std::conj(cmul(b[k], kernel_[k]));
    inner_.transform(b.data(), a.data());
    for (std::size_t k = 0; k < n_; ++k) out[k] = cmul(std::conj(a[k]), chirp_[k]);
  }

 private:
  std::size_t n_;
  std::size_t m_;
  MixedRadixPlan inner_;
  std::vector<Complex> chirp_;
  std::vector<Complex> kernel_;
};

class FftPlan {
 public:
  explicit FftPlan(std::size_t n) : n_(n) {
    if (n <= 1) return;
    if (mixed_radix_supported(n)) {
      mixed_ = std::make_unique<MixedRadixPlan>(n);
    } else {
      bluestein_ = std::make_unique<BluesteinPlan>(n);
    }
  }

  void forward(std::span<Complex> a) const {
    if (n_ <= 1) return;
    std::vector<Complex> in(a.begin(), a.end());
    transform(in.data(), a.data());
  }

  void transform(const Complex* in, Complex* out) const {
    if (n_ <= 1) {
      if (n_ == 1) out[0] = in[0];
      return;
    }
    if (mixed_) {
      mixed_->transform(in, out);
    } else {
      bluestein_->transform(in, out);
    }
  }

 private:
  std::size_t n_;
  std::unique_ptr<MixedRadixPlan> mixed_;
  std::unique_ptr<BluesteinPlan> bluestein_;
};

// Real transform of length n: a complex plan of n/2 plus split twiddles for
// even n, a complex plan of n for odd n.
class RealPlan {
 public:
  explicit RealPlan(std::size_t n);

  void forward(std::span<const double> x, std::span<Complex> out) const;
  void inverse(std::span<const Complex> in, std::span<double> x) const;
  // Two signals through one complex transform; odd lengths only.
  void forward_pair(std::span<const double> x, std::span<const double> y,
                    std::span<Complex> out_x, std::span<Complex> out_y) const;
  void inverse_pair(std::span<const Complex> in_x, std::span<const Complex> in_y,
                    std::span<double> x, std::span<double> y) const;

 private:
  std::size_t n_;
  std::shared_ptr<const FftPlan> complex_;
  std::vector<Complex> split_;  // e^{-2 pi i k / n}, k <= n/2
};

template <typename Plan>
std::shared_ptr<const Plan> cached_plan(std::size_t n) {
  thread_local std::unordered_map<std::size_t, std::shared_ptr<const Plan>> local;
  if (auto it = local.find(n); it != local.end()) return it->second;

  static std::mutex mutex;
  static std::unordered_map<std::size_t, std::shared_ptr<const Plan>> shared;
  std::shared_ptr<const Plan> plan;
  {
    std::lock_guard<std::mutex> lock(mutex);
    auto& slot = shared[n];
    if (!slot) slot = std::make_shared<const Plan>(n);
    plan = slot;
  }
  local.emplace(n, plan);
  return plan;
}

RealPlan::RealPlan(std::size_t n) : n_(n) {
  if (n <= 1) return;
  if (n % 2 != 0) {
    complex_ = cached_plan<FftPlan>(n);
    return;
  }
  complex_ = cached_plan<FftPlan>(n / 2);
  split_.resize(n / 2 + 1);
  for (std::size_t k = 0; k <= n / 2; ++k) {
    const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) /
                         static_cast<double>(n);
    split_[k] = Complex(std::cos(angle), std::sin(angle));
  }
}

// Half spectrum of a real sequence of length n, written to out[0..n/2].
// Even lengths pack pairs of samples into one complex transform of n/2.
void RealPlan::forward(std::span<const double> x, std::span<Complex> out) const {
  const std::size_t n = n_;
  if (n == 1) {
    out[0] = Complex(x[0], 0.0);
    return;
  }
  if (n % 2 != 0) {
    std::vector<Complex> in(x.begin(), x.end());
    std::vector<Complex> work(n);
    complex_->transform(in.data(), work.data());
    std::copy_n(work.begin(), half_extent(n), out.begin());
    out[0].imag(0.0);
    return;
  }
  const std::size_t h = n / 2;
  std::vector<Complex> in(h);
  std::vector<Complex> z(h);
  for (std::size_t k = 0; k < h; ++k) in[k] = Complex(x[2 * k], x[2 * k + 1]);
  complex_->transform(in.data(), z.data());
  for (std::size_t k = 0; k <= h; ++k) {
    const Complex zk = z[k % h];
    const Complex zr = std::conj(z[(h - k) % h]);
    const Complex even = 0.5 * (zk + zr);
    const Complex diff = zk - zr;
    const Complex odd(0.5 * diff.imag(), -0.5 * diff.real());
    out[k] = even + cmul(split_[k], odd);
  }
  out[0].imag(0.0);
  out[h].imag(0.0);
}

// Inverse of forward including the 1/n factor. Imaginary parts of the DC and
// (even n) Nyquist bins are ignored.
void RealPlan::inverse(std::span<const Complex> in, std::span<double> x) const {
  const std::size_t n = n_;
  if (n == 1) {
    x[0] = in[0].real();
    return;
  }
  const std::size_t bins = half_extent(n);
  if (n % 2 != 0) {
    // Inverse via conj(fft(conj(X))) on the Hermitian extension.
    std::vector<Complex> full(n);
    std::vector<Complex> work(n);
    full[0] = Complex(in[0].real(), 0.0);
    for (std::size_t k = 1; k < bins; ++k) {
      full[k] = std::conj(in[k]);
      full[n - k] = in[k];
    }
    complex_->transform(full.data(), work.data());
    const double scale = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = work[i].real() * scale;
    return;
  }
  const std::size_t h = n / 2;
  std::vector<Complex> z(h);
  std::vector<Complex> w(h);
  for (std::size_t k = 0; k < h; ++k) {
    Complex xk = in[k];
    Complex xr = std::conj(in[h - k]);
    if (k == 0) {
      xk.imag(0.0);
      xr = Complex(in[h].real(), 0.0);
    }
    const Complex even = 0.5 * (xk + xr);
    const Complex odd = cmul(0.5 * (xk - xr), std::conj(split_[k]));
    // z = even + i * odd, conjugated for the forward-plan inverse.
    z[k] = std::conj(Complex(even.real() - odd.imag(), even.imag() + odd.real()));
  }
  complex_->transform(z.data(), w.data());
  const double scale = 1.0 / static_cast<double>(h);
  for (std::size_t k = 0; k < h; ++k) {
    x[2 * k] = w[k].real() * scale;
    x[2 * k + 1] = -w[k].imag() * scale;
  }
}

void RealPlan::forward_pair(std::span<const double> x, std::span<const double> y,
                            std::span<Complex> out_x, std::span<Complex> out_y) const {
  const std::size_t n = n_;
  std::vector<Complex> z(n);
  std::vector<Complex> w(n);
  for (std::size_t t = 0; t < n; ++t) z[t] = Complex(x[t], y[t]);
  complex_->transform(z.data(), w.data());
  for (std::size_t k = 0; k < half_extent(n); ++k) {
    const Complex a = w[k];
    const Complex b = std::conj(w[(n - k) % n]);
    const Complex sum = a + b;
    const Complex diff = a - b;
    out_x[k] = 0.5 * sum;
    out_y[k] = Complex(0.5 * diff.imag(), -0.5 * diff.real());
  }
  out_x[0].imag(0.0);
  out_y[0].imag(0.0);
}

void RealPlan::inverse_pair(std::span<const Complex> in_x, std::span<const Complex> in_y,
                            std::span<double> x, std::span<double> y) const {
  const std::size_t n = n_;
  std::vector<Complex> f(n);
  std::vector<Complex> w(n);
  // conj of the Hermitian extension of X + iY.
  f[0] = std::conj(Complex(in_x[0].real(), in_y[0].real()));
  for (std::size_t k = 1; k < half_extent(n); ++k) {
    const Complex a = in_x[k];
    const Complex b = in_y[k];
    f[k] = std::conj(a + Complex(-b.imag(), b.real()));
    f[n - k] = std::conj(std::conj(a) + Complex(b.imag(), b.real()));
  }
  complex_->transform(f.data(), w.data());
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t t = 0; t < n; ++t) {
    x[t] = w[t].real() * scale;
    y[t] = -w[t].imag() * scale;
  }
}

void require_finite_length(std::size_t n, const char* what) {
  if (n == 0) throw DimensionError(std::string(what) + ": empty input");
}

void real_forward(std::span<const double> x, std::span<Complex> out) {
  cached_plan<RealPlan>(x.size())->forward(x, out);
}

void real_inverse(std::span<const Complex> in, std::span<double> x) {
  cached_plan<RealPlan>(x.size())->inverse(in, x);
}

}  // namespace

HalfSpectrum::HalfSpectrum(std::vector<std::size_t> full_dims,
                           std::shared_ptr<MemoryLedger> ledger)
    : full_dims_(std::move(full_dims)) {
  if (full_dims_.empty() || full_dims_.size() > 2) {
    throw DimensionError("half spectra are 1D or 2D");
  }
  for (std::size_t d : full_dims_) {
    if (d == 0) throw DimensionError("spectrum extents must be >= 1");
  }
  coeffs_.assign(rows() * cols(), Complex{});
  charge_ = LedgerCharge(std::move(ledger), "spectrum",
                         coeffs_.size() * 2 * element_size(DType::f64));
}

std::vector<std::size_t> HalfSpectrum::coeff_dims() const {
  if (rank() == 1) return {cols()};
  return {rows(), cols()};
}

void fft_inplace(std::span<Complex> data) {
  cached_plan<FftPlan>(data.size())->forward(data);
}

void ifft_inplace(std::span<Complex> data) {
  for (auto& v : data) v = std::conj(v);
  fft_inplace(data);
  for (auto& v : data) v = std::conj(v);
}

HalfSpectrum rfft_1d(std::span<const double> x) {
  require_finite_length(x.size(), "rfft_1d");
  HalfSpectrum s({x.size()});
  real_forward(x, s.coeffs());
  return s;
}

std::vector<double> irfft_1d(const HalfSpectrum& s, std::size_t length) {
  if (s.rank() != 1 || s.full_dims()[0] != length ||
      s.size() != half_extent(length)) {
    throw DimensionError("irfft_1d: spectrum does not describe a signal of length " +
                         std::to_string(length));
  }
  std::vector<double> x(length);
  real_inverse(s.coeffs(), x);
  return x;
}

HalfSpectrum rfft_2d(std::span<const double> x, std::size_t rows,
                     std::size_t cols) {
  if (rows == 0 || cols == 0 || x.size() != rows * cols) {
    throw DimensionError("rfft_2d: input size does not match " +
                         std::to_string(rows) + "x" + std::to_string(cols));
  }
  HalfSpectrum s({rows, cols});
  const std::size_t h = s.cols();
  auto coeffs = s.coeffs();
  for (std::size_t r = 0; r < rows; ++r) {
    real_forward(x.subspan(r * cols, cols), coeffs.subspan(r * h, h));
  }
  if (rows > 1) {
    std::vector<Complex> column(rows);
    for (std::size_t c = 0; c < h; ++c) {
      for (std::size_t r = 0; r < rows; ++r) column[r] = coeffs[r * h + c];
      fft_inplace(column);
      for (std::size_t r = 0; r < rows; ++r) coeffs[r * h + c] = column[r];
    }
  }
  return s;
}

HalfSpectrum rfft_2d(const Tensor& x) {
  if (x.rank() != 2) throw DimensionError("rfft_2d expects a rank-2 tensor");
  return rfft_2d(x.data(), x.extent(0), x.extent(1));
}

namespace {

void inverse_2d_into(const HalfSpectrum& s, std::span<double> out) {
  const std::size_t rows = s.full_dims()[0];
  const std::size_t cols = s.full_dims()[1];
  const std::size_t h = s.cols();
  std::vector<Complex> work(s.coeffs().begin(), s.coeffs().end());
  if (rows > 1) {
    std::vector<Complex> column(rows);
    for (std::size_t c = 0; c < h; ++c) {
      for (std::size_t r = 0; r < rows; ++r) column[r] = work[r * h + c];
      ifft_inplace(column);
      for (std::size_t r = 0; r < rows; ++r) work[r * h + c] = column[r];
    }
  }
  const double scale = 1.0 / static_cast<double>(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    auto row = std::span<const Complex>(work).subspan(r * h, h);
    auto dst = out.subspan(r * cols, cols);
    real_inverse(row, dst);
    for (double& v : dst) v *= scale;
  }
}

}  // namespace

std::vector<double> irfft_2d(const HalfSpectrum& s, std::size_t rows,
                             std::size_t cols) {
  if (s.rank() != 2 || s.full_dims()[0] != rows || s.full_dims()[1] != cols ||
      s.size() != rows * half_extent(cols)) {
    throw DimensionError("irfft_2d: spectrum does not describe a " +
                         std::to_string(rows) + "x" + std::to_string(cols) +
                         " matrix");
  }
  std::vector<double> x(rows * cols);
  inverse_2d_into(s, x);
  return x;
}

HalfSpectrum rfft_plane(std::span<const double> x,
                        const std::vector<std::size_t>& dims) {
  if (dims.size() == 1) {
    if (x.size() != dims[0]) throw DimensionError("rfft_plane: size mismatch");
    return rfft_1d(x);
  }
  if (dims.size() == 2) return rfft_2d(x, dims[0], dims[1]);
  throw DimensionError("rfft_plane: rank must be 1 or 2");
}

std::vector<double> irfft_plane(const HalfSpectrum& s) {
  if (s.rank() == 1) return irfft_1d(s, s.full_dims()[0]);
  return irfft_2d(s, s.full_dims()[0], s.full_dims()[1]);
}

void irfft_plane_into(const HalfSpectrum& s, std::span<double> out) {
  const std::size_t total =
      s.rank() == 1 ? s.full_dims()[0] : s.full_dims()[0] * s.full_dims()[1];
  if (out.size() != total) throw DimensionError("irfft_plane_into: size mismatch");
  if (s.rank() == 1) {
    real_inverse(s.coeffs(), out);
  } else {
    inverse_2d_into(s, out);
  }
}

void rfft_plane_into(std::span<const double> x, HalfSpectrum& out) {
  const auto& dims = out.full_dims();
  const std::size_t total = dims.size() == 1 ? dims[0] : dims[0] * dims[1];
  if (x.size() != total) throw DimensionError("rfft_plane_into: size mismatch");
  if (dims.size() == 1) {
    real_forward(x, out.coeffs());
    return;
  }
  HalfSpectrum s = rfft_2d(x, dims[0], dims[1]);
  std::copy(s.coeffs().begin(), s.coeffs().end(), out.coeffs().begin());
}

void rfft_plane_pair(std::span<const double> x, std::span<const double> y,
                     HalfSpectrum& out_x, HalfSpectrum& out_y) {
  const auto& dims = out_x.full_dims();
  if (out_y.full_dims() != dims || x.size() != y.size()) {
    throw DimensionError("rfft_plane_pair: extents differ");
  }
  if (dims.size() == 1 && dims[0] % 2 == 1 && dims[0] > 1) {
    if (x.size() != dims[0]) throw DimensionError("rfft_plane_pair: size mismatch");
    cached_plan<RealPlan>(dims[0])->forward_pair(x, y, out_x.coeffs(), out_y.coeffs());
    return;
  }
  rfft_plane_into(x, out_x);
  rfft_plane_into(y, out_y);
}

void irfft_plane_pair_into(const HalfSpectrum& sx, const HalfSpectrum& sy,
                           std::span<double> x, std::span<double> y) {
  const auto& dims = sx.full_dims();
  if (sy.full_dims() != dims || x.size() != y.size()) {
    throw DimensionError("irfft_plane_pair_into: extents differ");
  }
  if (dims.size() == 1 && dims[0] % 2 == 1 && dims[0] > 1) {
    if (x.size() != dims[0]) throw DimensionError("irfft_plane_pair_into: size mismatch");
    cached_plan<RealPlan>(dims[0])->inverse_pair(sx.coeffs(), sy.coeffs(), x, y);
    return;
  }
  irfft_plane_into(sx, x);
  irfft_plane_into(sy, y);
}

double conjugate_weight(std::size_t col, std::size_t full_last_extent) {
  if (col == 0) return 1.0;
  if (full_last_extent % 2 == 0 && col == full_last_extent / 2) return 1.0;
  return 2.0;
}

double spectral_energy(const HalfSpectrum& s) {
  const std::size_t last = s.full_dims().back();
  const std::size_t h = s.cols();
  double total = 0.0;
  for (std::size_t r = 0; r < s.rows(); ++r) {
    for (std::size_t c = 0; c < h; ++c) {
      total += conjugate_weight(c, last) * std::norm(s.at(r, c));
    }
  }
  double count = 1.0;
  for (std::size_t d : s.full_dims()) count *= static_cast<double>(d);
  return total / count;
}

std::vector<std::pair<std::size_t, std::size_t>> real_constrained_bins(
    const std::vector<std::size_t>& full_dims) {
  std::vector<std::size_t> rows{0};
  std::vector<std::size_t> cols{0};
  const std::size_t last = full_dims.back();
  if (last % 2 == 0 && last > 1) cols.push_back(last / 2);
  if (full_dims.size() == 2 && full_dims[0] % 2 == 0 && full_dims[0] > 1) {
    rows.push_back(full_dims[0] / 2);
  }
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t r : rows) {
    for (std::size_t c : cols) out.emplace_back(r, c);
  }
  return out;
}

std::vector<Complex> expand_full(const HalfSpectrum& s) {
  const std::size_t rows = s.rows();
  const std::size_t n = s.full_dims().back();
  const std::size_t h = s.cols();
  std::vector<Complex> full(rows * n);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      if (c < h) {
        full[r * n + c] = s.at(r, c);
      } else {
        const std::size_t mr = (rows - r) % rows;
        full[r * n + c] = std::conj(s.at(mr, n - c));
      }
    }
  }
  return full;
}

std::vector<Complex> dc_shift(std::span<const Complex> full, std::size_t rows,
                              std::size_t cols) {
  if (full.size() != rows * cols) throw DimensionError("dc_shift: size mismatch");
  if (rows % 2 != 0 || cols % 2 != 0) {
    throw UnsupportedShapeError("dc_shift: quadrant permutation needs even extents, got " +
                                std::to_string(rows) + "x" + std::to_string(cols));
  }
  std::vector<Complex> out(full.size());
  const std::size_t hr = rows / 2;
  const std::size_t hc = cols / 2;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      out[((r + hr) % rows) * cols + (c + hc) % cols] = full[r * cols + c];
    }
  }
  return out;
}

}  // namespace bandlimit
