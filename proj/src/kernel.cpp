#include "simnet/kernel.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

#include "simnet/mex.hpp"
#include "simnet/rng.hpp"

namespace simnet {

void KernelSpec::validate() const {
    if (!(xi > 0.0) || !std::isfinite(xi)) {
        throw std::invalid_argument("kernel xi must be positive and finite, got " +
                                    std::to_string(xi));
    }
    if (kind == KernelKind::generalized_gaussian && !(p > 0.0 && p <= 2.0)) {
        throw std::invalid_argument("generalized Gaussian kernel requires 0 < p <= 2, got " +
                                    std::to_string(p));
    }
}

double generalized_gaussian_expression(std::span<const double> x, std::span<const double> z,
                                       double xi, double p) {
    if (x.size() != z.size()) {
        throw shape_error("kernel arguments differ in dimension: " + std::to_string(x.size()) +
                          " vs " + std::to_string(z.size()));
    }
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double a = std::abs(x[i] - z[i]);
        s += p == 2.0 ? a * a : (p == 1.0 ? a : std::pow(a, p));
    }
    return std::exp(-xi * s);
}

double kernel_eval(const KernelSpec& spec, std::span<const double> x, std::span<const double> z) {
    spec.validate();
    if (x.size() != z.size()) {
        throw shape_error("kernel arguments differ in dimension: " + std::to_string(x.size()) +
                          " vs " + std::to_string(z.size()));
    }
    if (spec.kind == KernelKind::exponential) {
        double dot = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) dot += x[i] * z[i];
        return std::exp(spec.xi * dot);
    }
    return generalized_gaussian_expression(x, z, spec.xi, spec.p);
}

std::int64_t argmax_lowest(std::span<const double> scores) {
    if (scores.empty()) throw std::invalid_argument("argmax of empty score list");
    std::int64_t best = 0;
    for (std::int64_t i = 1; i < static_cast<std::int64_t>(scores.size()); ++i) {
        if (scores[static_cast<std::size_t>(i)] > scores[static_cast<std::size_t>(best)]) best = i;
    }
    return best;
}

KernelSpec kernel_for_similarity(const SimilarityParams& sim, double xi) {
    if (sim.weighted) {
        throw std::invalid_argument(
            "weighted similarity has no kernel representation; the oracle refuses to approximate");
    }
    KernelSpec spec;
    spec.xi = xi;
    if (sim.form == SimilarityForm::linear) {
        spec.kind = KernelKind::exponential;
    } else {
        spec.kind = KernelKind::generalized_gaussian;
        spec.p = sim.order_p;
    }
    spec.validate();
    return spec;
}

std::vector<double> mlp_kernel_scores(const SimilarityParams& sim, const Tensor& offsets,
                                      double xi, std::span<const double> x) {
    const KernelSpec spec = kernel_for_similarity(sim, xi);
    const std::int64_t n = sim.num_templates();
    if (offsets.rank() != 2 || offsets.dim(1) != n) {
        throw shape_error("MLP offsets must be [k, n], got " + shape_to_string(offsets.shape()));
    }
    const std::int64_t k = offsets.dim(0);

    std::vector<double> kvals(static_cast<std::size_t>(n));
    for (std::int64_t l = 0; l < n; ++l) {
        kvals[static_cast<std::size_t>(l)] =
            kernel_eval(spec, x, sim.templates.row(l));
    }
    std::vector<double> scores(static_cast<std::size_t>(k));
    for (std::int64_t r = 0; r < k; ++r) {
        double acc = 0.0;
        for (std::int64_t l = 0; l < n; ++l) {
            const double alpha = std::exp(xi * offsets.at({r, l}));
            acc += alpha * kvals[static_cast<std::size_t>(l)];
        }
        if (!(acc > 0.0) || !std::isfinite(acc)) {
            throw numeric_error("kernel-form score sum is not positive finite");
        }
        scores[static_cast<std::size_t>(r)] = std::log(acc / static_cast<double>(n)) / xi;
    }
    return scores;
}

std::vector<double> mlp_mex_scores(const SimilarityParams& sim, const Tensor& offsets, double xi,
                                   std::span<const double> x) {
    const std::int64_t n = sim.num_templates();
    if (offsets.rank() != 2 || offsets.dim(1) != n) {
        throw shape_error("MLP offsets must be [k, n], got " + shape_to_string(offsets.shape()));
    }
    const std::int64_t k = offsets.dim(0);
    std::vector<double> scores(static_cast<std::size_t>(k));
    std::vector<double> operands(static_cast<std::size_t>(n));
    for (std::int64_t r = 0; r < k; ++r) {
        for (std::int64_t l = 0; l < n; ++l) {
            operands[static_cast<std::size_t>(l)] =
                similarity_value(x, sim, l) + offsets.at({r, l});
        }
        scores[static_cast<std::size_t>(r)] = mex(operands, xi);
    }
    return scores;
}

double patch_kernel_KV(const NullableVec& a, const NullableVec& b, const KernelSpec& base) {
    if (!a.has_value() || !b.has_value()) return 0.0;
    return kernel_eval(base, *a, *b);
}

double patch_kernel_big(std::span<const NullableVec> a, std::span<const NullableVec> b,
                        const KernelSpec& base) {
    if (a.size() != b.size()) {
        throw shape_error("block kernel slot counts differ: " + std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()));
    }
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += patch_kernel_KV(a[i], b[i], base);
    return s;
}

void PatchSvmModel::validate() const {
    kernel.validate();
    if (coefficients.rank() != 3 || coefficients.dim(0) != num_classes ||
        coefficients.dim(1) != num_templates || coefficients.dim(2) != num_pools) {
        throw shape_error("patch SVM coefficients must be [k, n, P], got " +
                          shape_to_string(coefficients.shape()));
    }
    if (!coefficients.all_finite()) {
        throw std::invalid_argument("patch SVM coefficients contain non-finite values");
    }
    if (static_cast<std::int64_t>(elements.size()) != num_templates * num_pools) {
        throw shape_error("patch SVM expects n*P support elements");
    }
    for (std::int64_t q : pool_of_slot) {
        if (q < 0 || q >= num_pools) throw index_error("pool map entry out of range");
    }
}

PatchSvmModel make_patch_svm_model(const Tensor& templates, const Tensor& coefficients,
                                   std::vector<std::int64_t> pool_of_slot, KernelSpec kernel) {
    if (templates.rank() != 2) {
        throw shape_error("templates must be [n, d], got " + shape_to_string(templates.shape()));
    }
    PatchSvmModel model;
    model.kernel = kernel;
    model.num_templates = templates.dim(0);
    model.num_classes = coefficients.dim(0);
    model.num_pools = coefficients.dim(2);
    model.pool_of_slot = std::move(pool_of_slot);
    model.coefficients = coefficients;

    const std::int64_t D = static_cast<std::int64_t>(model.pool_of_slot.size());
    for (std::int64_t l = 0; l < model.num_templates; ++l) {
        const auto z = templates.row(l);
        for (std::int64_t p = 0; p < model.num_pools; ++p) {
            PatchSupportElement el;
            el.template_index = l;
            el.pool_index = p;
            el.slots.resize(static_cast<std::size_t>(D));
            for (std::int64_t i = 0; i < D; ++i) {
                if (model.pool_of_slot[static_cast<std::size_t>(i)] == p) {
                    el.slots[static_cast<std::size_t>(i)] =
                        std::vector<double>(z.begin(), z.end());
                }
            }
            model.elements.push_back(std::move(el));
        }
    }
    model.validate();
    return model;
}

std::vector<double> patch_svm_scores(std::span<const std::vector<double>> instance,
                                     const PatchSvmModel& model) {
    model.validate();
    const std::int64_t D = static_cast<std::int64_t>(model.pool_of_slot.size());
    if (static_cast<std::int64_t>(instance.size()) != D) {
        throw shape_error("instance has " + std::to_string(instance.size()) + " patches, model expects " +
                          std::to_string(D));
    }
    std::vector<NullableVec> x(instance.size());
    for (std::size_t i = 0; i < instance.size(); ++i) x[i] = instance[i];

    std::vector<double> scores(static_cast<std::size_t>(model.num_classes), 0.0);
    for (const PatchSupportElement& el : model.elements) {
        const double kv = patch_kernel_big(x, el.slots, model.kernel);
        for (std::int64_t r = 0; r < model.num_classes; ++r) {
            scores[static_cast<std::size_t>(r)] +=
                model.coefficients.at({r, el.template_index, el.pool_index}) * kv;
        }
    }
    return scores;
}

std::int64_t patch_svm_classify(std::span<const std::vector<double>> instance,
                                const PatchSvmModel& model) {
    const std::vector<double> scores = patch_svm_scores(instance, model);
    return argmax_lowest(scores);
}

GramReport gram_report(std::span<const std::vector<double>> points, const KernelFn& kernel) {
    const std::int64_t n = static_cast<std::int64_t>(points.size());
    if (n < 1) throw std::invalid_argument("gram analysis needs at least one point");
    if (n > 64) {
        throw std::invalid_argument("gram analysis limited to 64 points, got " + std::to_string(n));
    }
    Eigen::MatrixXd g(n, n);
    for (std::int64_t i = 0; i < n; ++i) {
        for (std::int64_t j = 0; j < n; ++j) {
            g(i, j) = kernel(points[static_cast<std::size_t>(i)], points[static_cast<std::size_t>(j)]);
        }
    }
    // Roundoff can leave the Gram slightly asymmetric; symmetrize before solving.
    Eigen::MatrixXd sym = 0.5 * (g + g.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw numeric_error("gram eigensolve failed");

    GramReport report;
    report.points = n;
    report.min_eigenvalue = solver.eigenvalues().minCoeff();
    report.max_eigenvalue = solver.eigenvalues().maxCoeff();
    report.trace = sym.trace();
    return report;
}

double gram_min_eigenvalue(std::span<const std::vector<double>> points, const KernelFn& kernel) {
    return gram_report(points, kernel).min_eigenvalue;
}

void print_gram_report(std::ostream& out, const GramReport& report) {
    out << "gram points=" << report.points << " min_eigenvalue=" << report.min_eigenvalue
        << " max_eigenvalue=" << report.max_eigenvalue << " trace=" << report.trace << "\n";
}

std::optional<std::vector<std::vector<double>>> find_non_psd_witness(double p, int trials,
                                                                     std::uint64_t seed,
                                                                     double xi) {
    if (!(p > 2.0)) {
        throw std::invalid_argument("witness search applies to p > 2, got " + std::to_string(p));
    }
    Rng rng(seed);
    std::uniform_real_distribution<double> coord(-3.0, 3.0);
    const KernelFn fn = [xi, p](std::span<const double> a, std::span<const double> b) {
        return generalized_gaussian_expression(a, b, xi, p);
    };
    for (int t = 0; t < trials; ++t) {
        const std::size_t count = 3 + static_cast<std::size_t>(rng() % 6);  // 3..8 points
        std::vector<std::vector<double>> pts(count);
        for (auto& pt : pts) pt = {coord(rng)};
        if (gram_min_eigenvalue(pts, fn) < -1e-6) return pts;
    }
    return std::nullopt;
}

bool RasterResult::label_touches_border(int label) const {
    const std::int64_t r = resolution;
    for (std::int64_t i = 0; i < r; ++i) {
        if (label_at(0, i) == label || label_at(r - 1, i) == label || label_at(i, 0) == label ||
            label_at(i, r - 1) == label) {
            return true;
        }
    }
    return false;
}

RasterResult decision_region_raster(const PlaneScorer& classifier, const RasterBounds& bounds,
                                    std::int64_t resolution) {
    if (resolution < 2) throw std::invalid_argument("raster resolution must be >= 2");
    RasterResult raster;
    raster.resolution = resolution;
    raster.bounds = bounds;
    raster.labels.resize(static_cast<std::size_t>(resolution * resolution));
    for (std::int64_t iy = 0; iy < resolution; ++iy) {
        const double y = bounds.y_min + (bounds.y_max - bounds.y_min) *
                                            static_cast<double>(iy) / static_cast<double>(resolution - 1);
        for (std::int64_t ix = 0; ix < resolution; ++ix) {
            const double x = bounds.x_min + (bounds.x_max - bounds.x_min) *
                                                static_cast<double>(ix) / static_cast<double>(resolution - 1);
            const std::vector<double> scores = classifier(x, y);
            for (double s : scores) {
                if (!std::isfinite(s)) {
                    throw numeric_error("non-finite score at lattice point (" + std::to_string(x) +
                                        ", " + std::to_string(y) + ")");
                }
            }
            raster.labels[static_cast<std::size_t>(iy * resolution + ix)] =
                static_cast<int>(argmax_lowest(scores));
        }
    }
    return raster;
}

void write_raster_csv(std::ostream& out, const RasterResult& raster) {
    out << "x,y,label\n";
    const std::int64_t r = raster.resolution;
    for (std::int64_t iy = 0; iy < r; ++iy) {
        const double y = raster.bounds.y_min + (raster.bounds.y_max - raster.bounds.y_min) *
                                                   static_cast<double>(iy) / static_cast<double>(r - 1);
        for (std::int64_t ix = 0; ix < r; ++ix) {
            const double x = raster.bounds.x_min + (raster.bounds.x_max - raster.bounds.x_min) *
                                                       static_cast<double>(ix) / static_cast<double>(r - 1);
            out << x << ',' << y << ',' << raster.label_at(iy, ix) << '\n';
        }
    }
}

}  // namespace simnet
