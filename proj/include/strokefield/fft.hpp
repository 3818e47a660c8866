#pragma once

// Iterative radix-2 complex FFT, sized for zero-padded linear convolution
// on power-of-two grids.

#include <algorithm>
#include <complex>
#include <stdexcept>
#include <vector>

namespace strokefield::fft {

using cdouble = std::complex<double>;

inline int next_pow2(int n) {
    int p = 1;
    while (p < n) p <<= 1;
    return p;
}

inline bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

/// In-place transform of a length-n power-of-two signal.
inline void transform(cdouble* a, int n, bool inverse) {
    if (!is_pow2(n)) throw std::invalid_argument("fft: length must be a power of two");
    for (int i = 1, j = 0; i < n; ++i) {
        int bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    constexpr double kTau = 6.283185307179586476925286766559;
    for (int len = 2; len <= n; len <<= 1) {
        const double ang = (inverse ? kTau : -kTau) / len;
        const cdouble wlen(std::cos(ang), std::sin(ang));
        for (int i = 0; i < n; i += len) {
            cdouble w(1.0, 0.0);
            for (int j = 0; j < len / 2; ++j) {
                cdouble u = a[i + j];
                cdouble v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
    if (inverse) {
        const double scale = 1.0 / n;
        for (int i = 0; i < n; ++i) a[i] *= scale;
    }
}

inline void transform(std::vector<cdouble>& a, bool inverse) {
    transform(a.data(), static_cast<int>(a.size()), inverse);
}

namespace detail {

// blocked out-of-place transpose, cache friendly on large grids
inline void transpose(const std::vector<cdouble>& src, std::vector<cdouble>& dst, int width, int height) {
    constexpr int kBlock = 32;
    dst.resize(src.size());
    for (int by = 0; by < height; by += kBlock)
        for (int bx = 0; bx < width; bx += kBlock) {
            const int ymax = std::min(by + kBlock, height);
            const int xmax = std::min(bx + kBlock, width);
            for (int y = by; y < ymax; ++y)
                for (int x = bx; x < xmax; ++x)
                    dst[static_cast<std::size_t>(x) * height + y] = src[static_cast<std::size_t>(y) * width + x];
        }
}

}  // namespace detail

/// Row-column transform of a width x height row-major buffer; both
/// dimensions must be powers of two. Columns are handled by transposing so
/// every 1D pass runs on contiguous memory.
inline void transform_2d(std::vector<cdouble>& a, int width, int height, bool inverse) {
    if (static_cast<std::size_t>(width) * height != a.size())
        throw std::invalid_argument("fft: buffer size mismatch");
    for (int y = 0; y < height; ++y) transform(a.data() + static_cast<std::size_t>(y) * width, width, inverse);
    std::vector<cdouble> t;
    detail::transpose(a, t, width, height);
    for (int x = 0; x < width; ++x) transform(t.data() + static_cast<std::size_t>(x) * height, height, inverse);
    detail::transpose(t, a, height, width);
}

}  // namespace strokefield::fft
