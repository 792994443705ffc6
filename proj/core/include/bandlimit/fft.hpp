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

#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "bandlimit/memory_ledger.hpp"
#include "bandlimit/tensor.hpp"

namespace bandlimit {

using Complex = std::complex<double>;

// Number of stored bins along the last axis of a real transform of length n.
constexpr std::size_t half_extent(std::size_t n) { return n / 2 + 1; }

// Conjugate-symmetric reduced spectrum of a real 1D signal (L/2+1 bins) or a
// real M x N matrix (M x (N/2+1) bins, row-major). Full spatial extents are
// carried alongside so the inverse transform is unambiguous.
class HalfSpectrum {
 public:
  HalfSpectrum() = default;
  explicit HalfSpectrum(std::vector<std::size_t> full_dims,
                        std::shared_ptr<MemoryLedger> ledger = LedgerScope::current());

  const std::vector<std::size_t>& full_dims() const { return full_dims_; }
  std::size_t rank() const { return full_dims_.size(); }
  // 1 for 1D spectra.
  std::size_t rows() const { return rank() == 2 ? full_dims_[0] : 1; }
  std::size_t cols() const { return half_extent(full_dims_.back()); }
  std::vector<std::size_t> coeff_dims() const;
  std::size_t size() const { return coeffs_.size(); }

  std::span<Complex> coeffs() { return coeffs_; }
  std::span<const Complex> coeffs() const { return coeffs_; }

  Complex& at(std::size_t i) { return coeffs_[i]; }
  const Complex& at(std::size_t i) const { return coeffs_[i]; }
  Complex& at(std::size_t r, std::size_t c) { return coeffs_[r * cols() + c]; }
  const Complex& at(std::size_t r, std::size_t c) const {
    return coeffs_[r * cols() + c];
  }

 private:
  std::vector<std::size_t> full_dims_;
  std::vector<Complex> coeffs_;
  LedgerCharge charge_;
};

// Unnormalized in-place complex DFT (forward uses e^{-2 pi i jk/n}).
// Mixed-radix Cooley-Tukey over factors 2, 3, 4, 5, 7, 11 and 13, Rader's
// algorithm for larger primes p with 13-smooth p - 1, Bluestein chirp-z for
// every other length. Plans are cached per length and shared between threads.
void fft_inplace(std::span<Complex> data);
// Unnormalized inverse (no 1/n factor).
void ifft_inplace(std::span<Complex> data);

HalfSpectrum rfft_1d(std::span<const double> x);
// Inverse with 1/L normalization. Imaginary parts of self-conjugate bins are
// ignored, which is the standard c2r contract.
std::vector<double> irfft_1d(const HalfSpectrum& s, std::size_t length);

// x is M x N row-major.
HalfSpectrum rfft_2d(std::span<const double> x, std::size_t rows, std::size_t cols);
HalfSpectrum rfft_2d(const Tensor& x);
std::vector<double> irfft_2d(const HalfSpectrum& s, std::size_t rows, std::size_t cols);

// Transform of a single spatial plane of extents dims (rank 1 or 2).
HalfSpectrum rfft_plane(std::span<const double> x, const std::vector<std::size_t>& dims);
std::vector<double> irfft_plane(const HalfSpectrum& s);
// Writes the inverse into out (size = product of full dims).
void irfft_plane_into(const HalfSpectrum& s, std::span<double> out);

// Forward transform into an existing spectrum of matching extents.
void rfft_plane_into(std::span<const double> x, HalfSpectrum& out);
// Two planes of equal extents at once. For odd 1D lengths both ride on one
// complex transform; other shapes fall back to two single transforms.
void rfft_plane_pair(std::span<const double> x, std::span<const double> y,
                     HalfSpectrum& out_x, HalfSpectrum& out_y);
void irfft_plane_pair_into(const HalfSpectrum& sx, const HalfSpectrum& sy,
                           std::span<double> x, std::span<double> y);

// Weight of a half-spectrum bin in the full spectrum: 1 for self-conjugate
// columns (0 and the even-length Nyquist column), 2 otherwise.
double conjugate_weight(std::size_t col, std::size_t full_last_extent);

// (1/L_total) * sum over the full spectrum of |F|^2, i.e. the spatial energy
// sum |x|^2 by Parseval.
double spectral_energy(const HalfSpectrum& s);

// Positions (row, col) of the half-spectrum bins that are constrained to be
// real for a real input.
std::vector<std::pair<std::size_t, std::size_t>> real_constrained_bins(
    const std::vector<std::size_t>& full_dims);

// Full complex spectrum (L, or M x N row-major) rebuilt through
// F[-w] = conj(F[w]).
std::vector<Complex> expand_full(const HalfSpectrum& s);

// Quadrant permutation I->III, II->IV, III->I, IV->II on a full M x N
// spectrum. Moves DC between the top-left corner and the centre; requires
// even M and N.
std::vector<Complex> dc_shift(std::span<const Complex> full, std::size_t rows,
                              std::size_t cols);

}  // namespace bandlimit
