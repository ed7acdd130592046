#pragma once

// Differentiable operations over Graph values. Every op validates shapes
// eagerly and throws ShapeError naming the offending shapes.

#include <cstddef>
#include <string_view>

#include "latsteer/autodiff.hpp"

namespace latsteer {

enum class Activation { relu, leaky_relu, tanh, sigmoid, softplus };

inline constexpr double kLeakySlope = 0.2;

// Names: "relu", "leaky_relu_0.2", "tanh", "sigmoid", "softplus".
std::string_view activation_name(Activation kind);
// Throws ConfigError on an unknown name.
Activation parse_activation(std::string_view name);

// [m,k] x [k,n] -> [m,n]. A rank-1 left operand is a row vector, a rank-1
// right operand a column vector; the corresponding output axis is dropped.
Var matmul(Var a, Var b);

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var x, double factor);
// x[m,n] + b[n] broadcast over rows.
Var add_bias(Var x, Var bias);
Var activation(Activation kind, Var x);
// Elementwise natural log; every entry must be > 0 (DomainError otherwise).
Var log(Var x);
Var sum(Var x);
Var mean(Var x);
Var reshape(Var x, Shape shape);

// Fused softmax + categorical cross-entropy, log-sum-exp stabilized.
// logits and target are [K] or [B,K]; each target row must be one-hot.
// Returns the mean over rows of -sum_k target_k * log softmax(logits)_k.
Var softmax_cce(Var logits, const Tensor& target);

// out[i,j] = img[i/f, j/f] for [H,W] or [B,H,W] input. The backward pass
// sums the f*f replica gradients into each source pixel.
Var nearest_upsample(Var img, std::size_t factor);

// Value-only helpers.
double activate(Activation kind, double x);
// Row-wise softmax of a [K] or [B,K] tensor.
Tensor softmax(const Tensor& logits);
Tensor nearest_upsample(const Tensor& img, std::size_t factor);
// Throws ValidationError unless every row of t is a one-hot vector.
void require_one_hot(const Tensor& t, std::string_view what);
// argmax of each row (first maximal index).
std::vector<std::size_t> argmax_rows(const Tensor& t);

}  // namespace latsteer
