#pragma once

#include <cstdint>
#include <span>

#include "simnet/tensor.hpp"

namespace simnet {

enum class SimilarityForm { linear, lp };

// Templates z [n, d] with optional positive weights u = exp(v) stored as
// log-weights v [n, d]. One order p shared by all channels.
struct SimilarityParams {
    SimilarityForm form = SimilarityForm::lp;
    Tensor templates;
    Tensor log_weights;
    double order_p = 2.0;
    bool weighted = false;

    std::int64_t num_templates() const { return templates.empty() ? 0 : templates.dim(0); }
    std::int64_t dim() const { return templates.empty() ? 0 : templates.dim(1); }
    Tensor weights() const;  // exp(v), or ones when unweighted
    void validate() const;
};

SimilarityParams make_similarity(SimilarityForm form, Tensor templates, double order_p,
                                 bool weighted);

// Single-vector similarity u_l^T phi(x, z_l); the building block shared by the
// grid form below and the kernel oracle's MEX route.
double similarity_value(std::span<const double> x, const SimilarityParams& params, std::int64_t l);

// Output (i, j, l) = u_l^T phi(x_ij, z_l).
Tensor similarity_forward(const PatchGrid& patches, const SimilarityParams& params);

struct SimilarityGrad {
    Tensor d_templates;    // [n, d]
    Tensor d_log_weights;  // [n, d]; empty when unweighted
    double d_order_p = 0.0;
    Tensor d_patches;      // [rows, cols, d]; empty unless requested
};

SimilarityGrad similarity_backward(const PatchGrid& patches, const SimilarityParams& params,
                                   const Tensor& upstream, bool want_patch_grad = false);

}  // namespace simnet
