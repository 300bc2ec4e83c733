#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "simnet/tensor.hpp"

namespace simnet {

// Below this |xi| the operator is evaluated as its xi->0 limit: the
// arithmetic mean forward, uniform input weights and Var/2 for d_xi backward.
inline constexpr double kMexMeanThreshold = 1e-8;

// (1/xi) * log( (1/n) * sum_i exp(xi * c_i) ), computed with max subtraction
// and expm1/log1p so the small-|xi| regime keeps full precision.
double mex(std::span<const double> values, double xi);

// Writes softmax(xi * c) into d_values and the xi-derivative into *d_xi
// (either may be skipped by passing empty/nullptr). Returns the forward value.
double mex_with_grad(std::span<const double> values, double xi, std::span<double> d_values,
                     double* d_xi);

struct MexScalarGrad {
    std::vector<double> d_values;
    double d_xi = 0.0;
};

MexScalarGrad mex_grad(std::span<const double> values, double xi);

// soft: the smooth operator at the stored xi.
// hard_max / hard_min: exact max/min with argmax subgradients (first-index
// tie-break); realizes the xi -> +/-inf limits without large exponents.
// mean: exact arithmetic mean (the xi -> 0 limit, used by the sum-variant
// aggregation layer).
enum class MexMode { soft, hard_max, hard_min, mean };

// One MEX layer: each output t takes the multiset
// { inp(s) + b_{ts} : s in block(t) } plus the optional constant c_t.
// Offsets may be shared between outputs through offset_row (outputs mapped to
// the same row accumulate their offset gradients together).
struct MexLayerParams {
    double xi = 1.0;
    MexMode mode = MexMode::soft;
    std::vector<std::int64_t> out_shape;
    std::vector<std::vector<std::int64_t>> blocks;
    Tensor offsets;                        // [rows, block size]; empty = no offsets
    std::vector<std::int64_t> offset_row;  // per output; empty = identity
    Tensor constants;                      // [outputs]; empty = none

    bool has_offsets() const { return !offsets.empty(); }
    bool has_constants() const { return !constants.empty(); }
    std::int64_t num_outputs() const { return static_cast<std::int64_t>(blocks.size()); }
    std::int64_t offset_row_of(std::int64_t t) const {
        return offset_row.empty() ? t : offset_row[static_cast<std::size_t>(t)];
    }
    void validate(std::int64_t input_size) const;
};

Tensor mex_layer_forward(const Tensor& input, const MexLayerParams& params);

struct MexLayerGrad {
    Tensor d_input;
    Tensor d_offsets;  // same shape as params.offsets (empty when absent)
    double d_xi = 0.0;
};

MexLayerGrad mex_layer_backward(const Tensor& input, const MexLayerParams& params,
                                const Tensor& upstream);

}  // namespace simnet
