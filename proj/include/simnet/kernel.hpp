#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "simnet/similarity.hpp"
#include "simnet/tensor.hpp"

namespace simnet {

// Exponential kernel exp(xi * x.z) and Generalized Gaussian kernel
// exp(-xi * ||x - z||_p^p). The latter is positive semidefinite only for
// 0 < p <= 2, which validate() enforces; the raw expression for p > 2 is
// available through generalized_gaussian_expression for the witness search.
enum class KernelKind { exponential, generalized_gaussian };

struct KernelSpec {
    KernelKind kind = KernelKind::generalized_gaussian;
    double xi = 1.0;
    double p = 2.0;
    void validate() const;
};

double kernel_eval(const KernelSpec& spec, std::span<const double> x, std::span<const double> z);

// exp(-xi * sum |x_i - z_i|^p) for any p > 0; not a kernel when p > 2.
double generalized_gaussian_expression(std::span<const double> x, std::span<const double> z,
                                       double xi, double p);

std::int64_t argmax_lowest(std::span<const double> scores);

// Derives the kernel matching a similarity configuration
// (linear -> Exponential, unweighted l_p with p <= 2 -> Generalized Gaussian).
// Throws for weighted similarity: no kernel realizes it.
KernelSpec kernel_for_similarity(const SimilarityParams& sim, double xi);

// Kernel-machine route for the MLP: h_r(x) = sigma(sum_l alpha_rl K(x, z_l))
// with alpha_rl = exp(xi * b_rl) and sigma(t) = (1/xi) log(t / n).
// Evaluated with plain exp/sum/log, independent of the MEX implementation.
std::vector<double> mlp_kernel_scores(const SimilarityParams& sim, const Tensor& offsets,
                                      double xi, std::span<const double> x);

// Network route for the same MLP: h_r(x) = MEX_xi { u_l.phi(x, z_l) + b_rl }.
std::vector<double> mlp_mex_scores(const SimilarityParams& sim, const Tensor& offsets, double xi,
                                   std::span<const double> x);

// --- patch-based kernel machinery (null-extended) ---

// A slot value: a d-vector or the null character.
using NullableVec = std::optional<std::vector<double>>;

double patch_kernel_KV(const NullableVec& a, const NullableVec& b, const KernelSpec& base);

// Sum of slotwise K_V values over two length-D slot sequences.
double patch_kernel_big(std::span<const NullableVec> a, std::span<const NullableVec> b,
                        const KernelSpec& base);

// Support element Z_lp: null outside pool p, copies of template z_l inside.
struct PatchSupportElement {
    std::vector<NullableVec> slots;
    std::int64_t template_index = 0;
    std::int64_t pool_index = 0;
};

struct PatchSvmModel {
    std::vector<PatchSupportElement> elements;  // n * P, ordered (l, p)
    Tensor coefficients;                        // [k, n, P]
    KernelSpec kernel;
    std::vector<std::int64_t> pool_of_slot;     // q: slot -> pool
    std::int64_t num_classes = 0;
    std::int64_t num_templates = 0;
    std::int64_t num_pools = 0;
    void validate() const;
};

PatchSvmModel make_patch_svm_model(const Tensor& templates, const Tensor& coefficients,
                                   std::vector<std::int64_t> pool_of_slot, KernelSpec kernel);

std::vector<double> patch_svm_scores(std::span<const std::vector<double>> instance,
                                     const PatchSvmModel& model);
std::int64_t patch_svm_classify(std::span<const std::vector<double>> instance,
                                const PatchSvmModel& model);

// --- Gram analysis ---

using KernelFn = std::function<double(std::span<const double>, std::span<const double>)>;

// Smallest eigenvalue of the symmetrized Gram matrix (dense solve, <= 64 points).
double gram_min_eigenvalue(std::span<const std::vector<double>> points, const KernelFn& kernel);

struct GramReport {
    std::int64_t points = 0;
    double min_eigenvalue = 0.0;
    double max_eigenvalue = 0.0;
    double trace = 0.0;
};

GramReport gram_report(std::span<const std::vector<double>> points, const KernelFn& kernel);
void print_gram_report(std::ostream& out, const GramReport& report);

// Random search for a point set whose Gram under the (non-)kernel
// exp(-xi ||x-z||_p^p) has an eigenvalue below -1e-6. Point sets are 1-D,
// sizes 3..8, coordinates in [-3, 3].
std::optional<std::vector<std::vector<double>>> find_non_psd_witness(double p, int trials,
                                                                     std::uint64_t seed,
                                                                     double xi = 1.0);

// --- 2-D decision-region rasterizer ---

struct RasterBounds {
    double x_min = -3.0, x_max = 3.0;
    double y_min = -3.0, y_max = 3.0;
};

struct RasterResult {
    std::int64_t resolution = 0;  // grid is resolution x resolution
    RasterBounds bounds;
    std::vector<int> labels;  // row-major over (iy, ix)
    int label_at(std::int64_t iy, std::int64_t ix) const {
        return labels[static_cast<std::size_t>(iy * resolution + ix)];
    }
    bool label_touches_border(int label) const;
};

using PlaneScorer = std::function<std::vector<double>(double, double)>;

RasterResult decision_region_raster(const PlaneScorer& classifier, const RasterBounds& bounds,
                                    std::int64_t resolution);
void write_raster_csv(std::ostream& out, const RasterResult& raster);

}  // namespace simnet
