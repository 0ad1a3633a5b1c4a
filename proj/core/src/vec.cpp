#include "sgdf/vec.hpp"

#include <cmath>
#include <string>

#include "sgdf/errors.hpp"

namespace sgdf {

namespace {

template <typename F>
ParamVector zip(const ParamVector& a, const ParamVector& b, F f,
                const char* context) {
  ensure_same_dim(a, b, context);
  ParamVector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i], b[i]);
  ensure_finite(out, context);
  return out;
}

template <typename F>
ParamVector map(const ParamVector& a, F f, const char* context) {
  ParamVector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i]);
  ensure_finite(out, context);
  return out;
}

}  // namespace

void ensure_same_dim(const ParamVector& a, const ParamVector& b,
                     const char* context) {
  if (a.size() != b.size()) {
    throw DimensionMismatch(std::string(context) + ": dims " +
                            std::to_string(a.size()) + " vs " +
                            std::to_string(b.size()));
  }
}

bool all_finite(const ParamVector& a) {
  for (double x : a) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

void ensure_finite(const ParamVector& a, const char* context) {
  if (!all_finite(a)) {
    throw NonFiniteResult(std::string(context) + ": non-finite entry");
  }
}

ParamVector add(const ParamVector& a, const ParamVector& b) {
  return zip(a, b, [](double x, double y) { return x + y; }, "add");
}

ParamVector sub(const ParamVector& a, const ParamVector& b) {
  return zip(a, b, [](double x, double y) { return x - y; }, "sub");
}

ParamVector mul(const ParamVector& a, const ParamVector& b) {
  return zip(a, b, [](double x, double y) { return x * y; }, "mul");
}

ParamVector div(const ParamVector& a, const ParamVector& b) {
  return zip(a, b, [](double x, double y) { return x / y; }, "div");
}

ParamVector add(const ParamVector& a, double b) {
  return map(a, [b](double x) { return x + b; }, "add");
}

ParamVector sub(const ParamVector& a, double b) {
  return map(a, [b](double x) { return x - b; }, "sub");
}

ParamVector mul(const ParamVector& a, double b) {
  return map(a, [b](double x) { return x * b; }, "mul");
}

ParamVector div(const ParamVector& a, double b) {
  return map(a, [b](double x) { return x / b; }, "div");
}

ParamVector square(const ParamVector& a) {
  return map(a, [](double x) { return x * x; }, "square");
}

ParamVector scale(const ParamVector& a, double s) {
  return map(a, [s](double x) { return x * s; }, "scale");
}

ParamVector elementwise(ElementwiseOp op, const ParamVector& a,
                        const ParamVector& b) {
  switch (op) {
    case ElementwiseOp::add:
      return add(a, b);
    case ElementwiseOp::sub:
      return sub(a, b);
    case ElementwiseOp::mul:
      return mul(a, b);
    case ElementwiseOp::div:
      return div(a, b);
    default:
      throw InvalidConfig("elementwise: op takes no second vector");
  }
}

ParamVector elementwise(ElementwiseOp op, const ParamVector& a, double b) {
  switch (op) {
    case ElementwiseOp::add:
      return add(a, b);
    case ElementwiseOp::sub:
      return sub(a, b);
    case ElementwiseOp::mul:
    case ElementwiseOp::scale:
      return mul(a, b);
    case ElementwiseOp::div:
      return div(a, b);
    case ElementwiseOp::square:
      return square(a);
  }
  throw InvalidConfig("elementwise: unknown op");
}

ParamVector zeros(std::size_t dim) { return ParamVector(dim, 0.0); }

double dot(const ParamVector& a, const ParamVector& b) {
  ensure_same_dim(a, b, "dot");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double norm2_sq(const ParamVector& a) { return dot(a, a); }

double norm2(const ParamVector& a) { return std::sqrt(norm2_sq(a)); }

double sum(const ParamVector& a) {
  double acc = 0.0;
  for (double x : a) acc += x;
  return acc;
}

double mean(const ParamVector& a) {
  return a.empty() ? 0.0 : sum(a) / static_cast<double>(a.size());
}

ParamVector gaussian_vector(RngStream& rng, std::size_t dim, double mean,
                            double std) {
  if (std < 0.0) throw InvalidStd("gaussian_vector: std < 0");
  if (std == 0.0) return ParamVector(dim, mean);
  ParamVector out(dim);
  for (std::size_t i = 0; i < dim; ++i) out[i] = mean + std * rng.normal();
  return out;
}

ParamVector uniform_vector(RngStream& rng, std::size_t dim, double lo,
                           double hi) {
  ParamVector out(dim);
  for (std::size_t i = 0; i < dim; ++i) out[i] = rng.uniform(lo, hi);
  return out;
}

}  // namespace sgdf
