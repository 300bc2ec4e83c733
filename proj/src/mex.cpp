#include "simnet/mex.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace simnet {

namespace {

double mean_of(std::span<const double> values) {
    double s = 0.0;
    for (double v : values) s += v;
    return s / static_cast<double>(values.size());
}

double population_variance(std::span<const double> values) {
    const double m = mean_of(values);
    double s = 0.0;
    for (double v : values) s += (v - m) * (v - m);
    return s / static_cast<double>(values.size());
}

void require_nonempty(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("mex: empty value list");
}

}  // namespace

double mex(std::span<const double> values, double xi) {
    require_nonempty(values);
    if (!std::isfinite(xi)) throw std::invalid_argument("mex: xi must be finite");
    if (values.size() == 1) return values[0];
    if (std::abs(xi) < kMexMeanThreshold) return mean_of(values);

    // t_i = xi*c_i, shifted so every exponent is <= 0. Accumulating
    // expm1(t_i - M) instead of exp keeps ~1e-16 absolute accuracy in the
    // log even when xi*c is tiny, which the collapsing identity needs.
    double m = xi * values[0];
    for (std::size_t i = 1; i < values.size(); ++i) m = std::max(m, xi * values[i]);
    double s = 0.0;
    for (double v : values) s += std::expm1(xi * v - m);
    s /= static_cast<double>(values.size());
    return (m + std::log1p(s)) / xi;
}

double mex_with_grad(std::span<const double> values, double xi, std::span<double> d_values,
                     double* d_xi) {
    require_nonempty(values);
    if (!std::isfinite(xi)) throw std::invalid_argument("mex: xi must be finite");
    const std::size_t n = values.size();
    if (!d_values.empty() && d_values.size() != n) {
        throw shape_error("mex_with_grad: d_values size " + std::to_string(d_values.size()) +
                          " does not match value count " + std::to_string(n));
    }

    if (std::abs(xi) < kMexMeanThreshold) {
        const double inv_n = 1.0 / static_cast<double>(n);
        if (!d_values.empty()) {
            for (std::size_t i = 0; i < n; ++i) d_values[i] = inv_n;
        }
        if (d_xi) *d_xi = 0.5 * population_variance(values);
        return mean_of(values);
    }

    double m = xi * values[0];
    for (std::size_t i = 1; i < n; ++i) m = std::max(m, xi * values[i]);

    double sum_exp = 0.0;      // sum of exp(t_i - m)
    double sum_expm1 = 0.0;    // sum of expm1(t_i - m), for the precise forward value
    double weighted_c = 0.0;   // sum of exp(t_i - m) * c_i
    for (double v : values) {
        const double e = std::exp(xi * v - m);
        sum_exp += e;
        sum_expm1 += std::expm1(xi * v - m);
        weighted_c += e * v;
    }
    const double fwd = (m + std::log1p(sum_expm1 / static_cast<double>(n))) / xi;

    if (!d_values.empty()) {
        for (std::size_t i = 0; i < n; ++i) {
            d_values[i] = std::exp(xi * values[i] - m) / sum_exp;
        }
    }
    if (d_xi) *d_xi = (weighted_c / sum_exp - fwd) / xi;
    return fwd;
}

MexScalarGrad mex_grad(std::span<const double> values, double xi) {
    MexScalarGrad g;
    g.d_values.resize(values.size());
    mex_with_grad(values, xi, g.d_values, &g.d_xi);
    return g;
}

void MexLayerParams::validate(std::int64_t input_size) const {
    if (blocks.empty()) throw std::invalid_argument("mex layer: no output blocks");
    std::int64_t shape_product = 1;
    for (std::int64_t e : out_shape) shape_product *= e;
    if (out_shape.empty() || shape_product != num_outputs()) {
        throw shape_error("mex layer: out_shape " + shape_to_string(out_shape) +
                          " does not cover " + std::to_string(num_outputs()) + " outputs");
    }
    if (has_constants() && constants.size() != num_outputs()) {
        throw shape_error("mex layer: constants size " + std::to_string(constants.size()) +
                          " != outputs " + std::to_string(num_outputs()));
    }
    if (!offset_row.empty() && static_cast<std::int64_t>(offset_row.size()) != num_outputs()) {
        throw shape_error("mex layer: offset_row size mismatch");
    }
    for (std::int64_t t = 0; t < num_outputs(); ++t) {
        const auto& block = blocks[static_cast<std::size_t>(t)];
        if (block.empty()) {
            throw std::invalid_argument("mex layer: empty block for output " + std::to_string(t));
        }
        for (std::int64_t s : block) {
            if (s < 0 || s >= input_size) {
                throw index_error("mex layer: output " + std::to_string(t) +
                                  " references input coordinate " + std::to_string(s) +
                                  " outside [0, " + std::to_string(input_size) + ")");
            }
        }
        if (has_offsets()) {
            const std::int64_t row = offset_row_of(t);
            if (row < 0 || row >= offsets.dim(0)) {
                throw index_error("mex layer: offset row " + std::to_string(row) +
                                  " out of range for output " + std::to_string(t));
            }
            if (offsets.dim(1) != static_cast<std::int64_t>(block.size())) {
                throw shape_error("mex layer: offset row length " + std::to_string(offsets.dim(1)) +
                                  " != block size " + std::to_string(block.size()) + " at output " +
                                  std::to_string(t));
            }
        }
    }
}

namespace {

// Gathers the operands of output t: block entries plus the optional constant.
void gather_operands(const Tensor& input, const MexLayerParams& p, std::int64_t t,
                     std::vector<double>& operands) {
    const auto& block = p.blocks[static_cast<std::size_t>(t)];
    operands.clear();
    const double* b = nullptr;
    if (p.has_offsets()) b = p.offsets.data() + p.offset_row_of(t) * p.offsets.dim(1);
    for (std::size_t s = 0; s < block.size(); ++s) {
        double v = input[block[s]];
        if (b) v += b[s];
        operands.push_back(v);
    }
    if (p.has_constants()) operands.push_back(p.constants[t]);
}

std::size_t hard_pick(std::span<const double> operands, bool want_max) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < operands.size(); ++i) {
        if (want_max ? operands[i] > operands[best] : operands[i] < operands[best]) best = i;
    }
    return best;
}

}  // namespace

Tensor mex_layer_forward(const Tensor& input, const MexLayerParams& params) {
    params.validate(input.size());
    Tensor out(params.out_shape);
    std::vector<double> operands;
    for (std::int64_t t = 0; t < params.num_outputs(); ++t) {
        gather_operands(input, params, t, operands);
        double v = 0.0;
        switch (params.mode) {
            case MexMode::soft: v = mex(operands, params.xi); break;
            case MexMode::mean: {
                double s = 0.0;
                for (double c : operands) s += c;
                v = s / static_cast<double>(operands.size());
                break;
            }
            case MexMode::hard_max: v = operands[hard_pick(operands, true)]; break;
            case MexMode::hard_min: v = operands[hard_pick(operands, false)]; break;
        }
        out[t] = v;
    }
    return out;
}

MexLayerGrad mex_layer_backward(const Tensor& input, const MexLayerParams& params,
                                const Tensor& upstream) {
    params.validate(input.size());
    if (upstream.size() != params.num_outputs()) {
        throw shape_error("mex layer backward: upstream size " + std::to_string(upstream.size()) +
                          " != outputs " + std::to_string(params.num_outputs()));
    }

    MexLayerGrad grad;
    grad.d_input = Tensor(input.shape());
    if (params.has_offsets()) grad.d_offsets = Tensor(params.offsets.shape());

    std::vector<double> operands;
    std::vector<double> weights;
    for (std::int64_t t = 0; t < params.num_outputs(); ++t) {
        const double up = upstream[t];
        const auto& block = params.blocks[static_cast<std::size_t>(t)];
        gather_operands(input, params, t, operands);
        weights.assign(operands.size(), 0.0);

        double d_xi_t = 0.0;
        switch (params.mode) {
            case MexMode::soft:
                mex_with_grad(operands, params.xi, weights, &d_xi_t);
                break;
            case MexMode::mean: {
                const double w = 1.0 / static_cast<double>(operands.size());
                std::fill(weights.begin(), weights.end(), w);
                break;
            }
            case MexMode::hard_max:
                weights[hard_pick(operands, true)] = 1.0;
                break;
            case MexMode::hard_min:
                weights[hard_pick(operands, false)] = 1.0;
                break;
        }

        double* b_grad = nullptr;
        if (params.has_offsets()) {
            b_grad = grad.d_offsets.data() + params.offset_row_of(t) * params.offsets.dim(1);
        }
        for (std::size_t s = 0; s < block.size(); ++s) {
            const double w = up * weights[s];
            grad.d_input[block[s]] += w;
            if (b_grad) b_grad[s] += w;
        }
        grad.d_xi += up * d_xi_t;
    }
    return grad;
}

}  // namespace simnet
