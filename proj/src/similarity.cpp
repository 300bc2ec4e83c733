#include "simnet/similarity.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace simnet {

Tensor SimilarityParams::weights() const {
    if (!weighted) return Tensor::full(templates.shape(), 1.0);
    Tensor u(log_weights.shape());
    for (std::int64_t i = 0; i < log_weights.size(); ++i) u[i] = std::exp(log_weights[i]);
    return u;
}

void SimilarityParams::validate() const {
    if (templates.rank() != 2) {
        throw shape_error("similarity templates must be [n, d], got " +
                          shape_to_string(templates.shape()));
    }
    if (weighted) {
        if (log_weights.shape() != templates.shape()) {
            throw shape_error("similarity log-weights " + shape_to_string(log_weights.shape()) +
                              " must match templates " + shape_to_string(templates.shape()));
        }
        if (!log_weights.all_finite()) {
            throw std::invalid_argument("similarity log-weights contain non-finite values");
        }
    }
    if (!templates.all_finite()) {
        throw std::invalid_argument("similarity templates contain non-finite values");
    }
    if (form == SimilarityForm::lp && !(order_p > 0.0 && std::isfinite(order_p))) {
        throw std::invalid_argument("similarity order p must be positive and finite, got " +
                                    std::to_string(order_p));
    }
}

SimilarityParams make_similarity(SimilarityForm form, Tensor templates, double order_p,
                                 bool weighted) {
    SimilarityParams p;
    p.form = form;
    p.order_p = order_p;
    p.weighted = weighted;
    if (weighted) p.log_weights = Tensor(templates.shape());  // v = 0, u = 1
    p.templates = std::move(templates);
    p.validate();
    return p;
}

namespace {

// -sum_k u_k |x_k - z_k|^p with fast paths for the orders the experiments use.
double lp_similarity(std::span<const double> x, std::span<const double> z,
                     const double* u, double p) {
    double acc = 0.0;
    const std::size_t d = x.size();
    if (p == 2.0) {
        for (std::size_t k = 0; k < d; ++k) {
            const double t = x[k] - z[k];
            acc += (u ? u[k] : 1.0) * t * t;
        }
    } else if (p == 1.0) {
        for (std::size_t k = 0; k < d; ++k) {
            acc += (u ? u[k] : 1.0) * std::abs(x[k] - z[k]);
        }
    } else {
        for (std::size_t k = 0; k < d; ++k) {
            acc += (u ? u[k] : 1.0) * std::pow(std::abs(x[k] - z[k]), p);
        }
    }
    return -acc;
}

double linear_similarity(std::span<const double> x, std::span<const double> z, const double* u) {
    double acc = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        acc += (u ? u[k] : 1.0) * x[k] * z[k];
    }
    return acc;
}

}  // namespace

double similarity_value(std::span<const double> x, const SimilarityParams& params, std::int64_t l) {
    if (static_cast<std::int64_t>(x.size()) != params.dim()) {
        throw shape_error("similarity input dim " + std::to_string(x.size()) +
                          " != template dim " + std::to_string(params.dim()));
    }
    if (l < 0 || l >= params.num_templates()) {
        throw index_error("similarity template index " + std::to_string(l) + " out of range");
    }
    const double* z = params.templates.data() + l * params.dim();
    const double* u = nullptr;
    std::vector<double> u_row;
    if (params.weighted) {
        const double* v = params.log_weights.data() + l * params.dim();
        u_row.resize(static_cast<std::size_t>(params.dim()));
        for (std::int64_t k = 0; k < params.dim(); ++k) u_row[static_cast<std::size_t>(k)] = std::exp(v[k]);
        u = u_row.data();
    }
    std::span<const double> zs{z, x.size()};
    return params.form == SimilarityForm::linear ? linear_similarity(x, zs, u)
                                                 : lp_similarity(x, zs, u, params.order_p);
}

Tensor similarity_forward(const PatchGrid& patches, const SimilarityParams& params) {
    params.validate();
    const std::int64_t d = params.dim();
    if (patches.patch_dim() != d) {
        throw shape_error("patch dim " + std::to_string(patches.patch_dim()) +
                          " != template dim " + std::to_string(d));
    }
    const std::int64_t n = params.num_templates();
    const Tensor u = params.weights();
    const double p = params.order_p;

    Tensor out({patches.rows(), patches.cols(), n});
    double* o = out.data();
    for (std::int64_t i = 0; i < patches.rows(); ++i) {
        for (std::int64_t j = 0; j < patches.cols(); ++j) {
            const std::span<const double> x = patches.patch(i, j);
            for (std::int64_t l = 0; l < n; ++l) {
                const double* z = params.templates.data() + l * d;
                const double* w = params.weighted ? u.data() + l * d : nullptr;
                std::span<const double> zs{z, static_cast<std::size_t>(d)};
                *o++ = params.form == SimilarityForm::linear ? linear_similarity(x, zs, w)
                                                             : lp_similarity(x, zs, w, p);
            }
        }
    }
    return out;
}

SimilarityGrad similarity_backward(const PatchGrid& patches, const SimilarityParams& params,
                                   const Tensor& upstream, bool want_patch_grad) {
    params.validate();
    const std::int64_t d = params.dim();
    const std::int64_t n = params.num_templates();
    if (upstream.rank() != 3 || upstream.dim(0) != patches.rows() ||
        upstream.dim(1) != patches.cols() || upstream.dim(2) != n) {
        throw shape_error("similarity upstream must be [" + std::to_string(patches.rows()) + ", " +
                          std::to_string(patches.cols()) + ", " + std::to_string(n) + "], got " +
                          shape_to_string(upstream.shape()));
    }

    SimilarityGrad grad;
    grad.d_templates = Tensor({n, d});
    if (params.weighted) grad.d_log_weights = Tensor({n, d});
    if (want_patch_grad) grad.d_patches = Tensor({patches.rows(), patches.cols(), d});

    const Tensor u = params.weights();
    const double p = params.order_p;
    const double* up = upstream.data();

    for (std::int64_t i = 0; i < patches.rows(); ++i) {
        for (std::int64_t j = 0; j < patches.cols(); ++j) {
            const std::span<const double> x = patches.patch(i, j);
            double* dx = want_patch_grad
                             ? grad.d_patches.data() + (i * patches.cols() + j) * d
                             : nullptr;
            for (std::int64_t l = 0; l < n; ++l) {
                const double g = *up++;
                if (g == 0.0) continue;
                const double* z = params.templates.data() + l * d;
                const double* w = u.data() + l * d;
                double* dz = grad.d_templates.data() + l * d;
                double* dv = params.weighted ? grad.d_log_weights.data() + l * d : nullptr;

                if (params.form == SimilarityForm::linear) {
                    for (std::int64_t k = 0; k < d; ++k) {
                        dz[k] += g * w[k] * x[k];
                        if (dv) dv[k] += g * w[k] * x[k] * z[k];
                        if (dx) dx[k] += g * w[k] * z[k];
                    }
                    continue;
                }

                for (std::int64_t k = 0; k < d; ++k) {
                    const double t = x[k] - z[k];
                    const double a = std::abs(t);
                    double pow_p, pow_p1;  // a^p and a^(p-1)
                    if (p == 2.0) {
                        pow_p = a * a;
                        pow_p1 = a;
                    } else if (p == 1.0) {
                        pow_p = a;
                        pow_p1 = 1.0;
                    } else {
                        pow_p = std::pow(a, p);
                        pow_p1 = std::pow(a, p - 1.0);
                    }
                    const double sgn = t > 0.0 ? 1.0 : (t < 0.0 ? -1.0 : 0.0);
                    // Subgradient 0 at x_k == z_k (covers the p <= 1 kink and
                    // keeps a^(p-1) from producing inf * 0 for p < 1).
                    const double dz_k = a > 0.0 ? w[k] * p * pow_p1 * sgn : 0.0;
                    dz[k] += g * dz_k;
                    if (dv) dv[k] += g * (-pow_p) * w[k];
                    if (dx) dx[k] += g * (-dz_k);
                    if (a > 0.0) grad.d_order_p += g * (-w[k] * pow_p * std::log(a));
                }
            }
        }
    }
    if (params.form == SimilarityForm::linear) grad.d_order_p = 0.0;
    return grad;
}

}  // namespace simnet
