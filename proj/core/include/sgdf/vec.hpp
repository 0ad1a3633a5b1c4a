#pragma once

#include <cstddef>
#include <vector>

#include "sgdf/rng.hpp"

namespace sgdf {

/// Flat dense parameter/gradient vector. All optimizer arithmetic is
/// element-wise over this carrier; entries are 64-bit floats throughout.
using ParamVector = std::vector<double>;

enum class ElementwiseOp { add, sub, mul, div, square, scale };

// Checked element-wise arithmetic. Two-vector forms throw DimensionMismatch
// on length disagreement; every result is scanned and NonFiniteResult is
// thrown if any entry is NaN or infinite (division by zero, overflow).
ParamVector add(const ParamVector& a, const ParamVector& b);
ParamVector sub(const ParamVector& a, const ParamVector& b);
ParamVector mul(const ParamVector& a, const ParamVector& b);
ParamVector div(const ParamVector& a, const ParamVector& b);
ParamVector add(const ParamVector& a, double b);
ParamVector sub(const ParamVector& a, double b);
ParamVector mul(const ParamVector& a, double b);
ParamVector div(const ParamVector& a, double b);
ParamVector square(const ParamVector& a);
ParamVector scale(const ParamVector& a, double s);

ParamVector elementwise(ElementwiseOp op, const ParamVector& a,
                        const ParamVector& b);
ParamVector elementwise(ElementwiseOp op, const ParamVector& a, double b);

ParamVector zeros(std::size_t dim);
double dot(const ParamVector& a, const ParamVector& b);
double norm2(const ParamVector& a);
double norm2_sq(const ParamVector& a);
double sum(const ParamVector& a);
double mean(const ParamVector& a);

bool all_finite(const ParamVector& a);
void ensure_finite(const ParamVector& a, const char* context);
void ensure_same_dim(const ParamVector& a, const ParamVector& b,
                     const char* context);

/// dim i.i.d. draws from N(mean, std^2); std == 0 returns the constant
/// vector without consuming randomness. Throws InvalidStd for std < 0.
ParamVector gaussian_vector(RngStream& rng, std::size_t dim, double mean,
                            double std);

/// dim i.i.d. draws from U[lo, hi).
ParamVector uniform_vector(RngStream& rng, std::size_t dim, double lo,
                           double hi);

}  // namespace sgdf
