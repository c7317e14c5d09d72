#pragma once

#include "sprom/common.hpp"

namespace sprom::fft {

/// DFT along the column index of each row: out(i,k) = sum_j in(i,j) e^{-2pi i jk/N}.
/// Matches the unnormalized forward convention used throughout.
Mat forward(const Mat& samples);

/// Inverse DFT along rows, includes the 1/N factor.
Mat inverse(const Mat& spectrum);

Vec forward(const Vec& samples);
Vec inverse(const Vec& spectrum);

}  // namespace sprom::fft
