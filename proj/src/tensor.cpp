#include "simnet/tensor.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

namespace simnet {

static_assert(std::endian::native == std::endian::little,
              "tensor files are little-endian; big-endian hosts are unsupported");

namespace {

std::int64_t checked_product(std::span<const std::int64_t> shape) {
    std::int64_t n = 1;
    for (std::int64_t e : shape) {
        if (e < 1) {
            throw shape_error("tensor extent must be >= 1, got " + shape_to_string(shape));
        }
        n *= e;
    }
    return n;
}

}  // namespace

std::string shape_to_string(std::span<const std::int64_t> shape) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ", ";
        os << shape[i];
    }
    os << "]";
    return os.str();
}

Tensor::Tensor(std::vector<std::int64_t> shape) : shape_(std::move(shape)) {
    data_.assign(static_cast<std::size_t>(checked_product(shape_)), 0.0);
}

Tensor::Tensor(std::vector<std::int64_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (checked_product(shape_) != static_cast<std::int64_t>(data_.size())) {
        throw shape_error("data length " + std::to_string(data_.size()) +
                          " does not match shape " + shape_to_string(shape_));
    }
}

Tensor Tensor::full(std::vector<std::int64_t> shape, double value) {
    Tensor t(std::move(shape));
    t.fill(value);
    return t;
}

std::int64_t Tensor::dim(int axis) const {
    if (axis < 0 || axis >= rank()) {
        throw index_error("axis " + std::to_string(axis) + " out of range for rank " +
                          std::to_string(rank()));
    }
    return shape_[static_cast<std::size_t>(axis)];
}

std::int64_t Tensor::offset(std::initializer_list<std::int64_t> idx) const {
    if (static_cast<int>(idx.size()) != rank()) {
        throw index_error("index rank " + std::to_string(idx.size()) +
                          " does not match tensor rank " + std::to_string(rank()));
    }
    std::int64_t off = 0;
    int axis = 0;
    for (std::int64_t i : idx) {
        const std::int64_t extent = shape_[static_cast<std::size_t>(axis)];
        if (i < 0 || i >= extent) {
            throw index_error("index " + std::to_string(i) + " out of range for axis " +
                              std::to_string(axis) + " with extent " + std::to_string(extent));
        }
        off = off * extent + i;
        ++axis;
    }
    return off;
}

std::span<double> Tensor::row(std::int64_t i) {
    if (rank() < 1) throw index_error("row() on rank-0 tensor");
    const std::int64_t stride = size() / shape_[0];
    if (i < 0 || i >= shape_[0]) {
        throw index_error("row " + std::to_string(i) + " out of range for extent " +
                          std::to_string(shape_[0]));
    }
    return {data_.data() + i * stride, static_cast<std::size_t>(stride)};
}

std::span<const double> Tensor::row(std::int64_t i) const {
    return const_cast<Tensor*>(this)->row(i);
}

void Tensor::fill(double value) {
    std::fill(data_.begin(), data_.end(), value);
}

bool Tensor::all_finite() const {
    for (double v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
    if (a.shape() != b.shape()) {
        throw shape_error(std::string(what) + ": shape mismatch " + shape_to_string(a.shape()) +
                          " vs " + shape_to_string(b.shape()));
    }
}

Tensor& Tensor::operator+=(const Tensor& other) {
    require_same_shape(*this, other, "tensor add");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

Tensor& Tensor::operator-=(const Tensor& other) {
    require_same_shape(*this, other, "tensor sub");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
    return *this;
}

Tensor& Tensor::operator*=(double scalar) {
    for (double& v : data_) v *= scalar;
    return *this;
}

std::span<const double> PatchGrid::patch(std::int64_t i, std::int64_t j) const {
    return const_cast<PatchGrid*>(this)->patch(i, j);
}

std::span<double> PatchGrid::patch(std::int64_t i, std::int64_t j) {
    const std::int64_t d = geom.patch_dim();
    const std::int64_t off = (i * geom.cols + j) * d;
    if (i < 0 || i >= geom.rows || j < 0 || j >= geom.cols) {
        throw index_error("patch (" + std::to_string(i) + ", " + std::to_string(j) +
                          ") out of range for grid " + std::to_string(geom.rows) + "x" +
                          std::to_string(geom.cols));
    }
    return {patches.data() + off, static_cast<std::size_t>(d)};
}

PatchGrid extract_patches(std::span<const double> image, std::int64_t image_h, std::int64_t image_w,
                          std::int64_t image_d, std::int64_t patch_h, std::int64_t patch_w,
                          std::int64_t stride) {
    if (image_h < 1 || image_w < 1 || image_d < 1) {
        throw shape_error("image extents must be >= 1, got [" + std::to_string(image_h) + ", " +
                          std::to_string(image_w) + ", " + std::to_string(image_d) + "]");
    }
    if (static_cast<std::int64_t>(image.size()) != image_h * image_w * image_d) {
        throw shape_error("image buffer length " + std::to_string(image.size()) +
                          " does not match extents [" + std::to_string(image_h) + ", " +
                          std::to_string(image_w) + ", " + std::to_string(image_d) + "]");
    }
    if (patch_h < 1 || patch_w < 1 || stride < 1 || patch_h > image_h || patch_w > image_w) {
        throw shape_error("invalid patch geometry: patch " + std::to_string(patch_h) + "x" +
                          std::to_string(patch_w) + " stride " + std::to_string(stride) +
                          " on image " + std::to_string(image_h) + "x" + std::to_string(image_w));
    }

    PatchGeometry geom;
    geom.image_h = image_h;
    geom.image_w = image_w;
    geom.image_d = image_d;
    geom.patch_h = patch_h;
    geom.patch_w = patch_w;
    geom.stride = stride;
    geom.rows = (image_h - patch_h) / stride + 1;
    geom.cols = (image_w - patch_w) / stride + 1;

    PatchGrid grid;
    grid.geom = geom;
    grid.patches = Tensor({geom.rows, geom.cols, geom.patch_dim()});

    double* out = grid.patches.data();
    for (std::int64_t pi = 0; pi < geom.rows; ++pi) {
        for (std::int64_t pj = 0; pj < geom.cols; ++pj) {
            const std::int64_t r0 = pi * stride;
            const std::int64_t c0 = pj * stride;
            for (std::int64_t r = 0; r < patch_h; ++r) {
                const double* src = image.data() + ((r0 + r) * image_w + c0) * image_d;
                std::memcpy(out, src, static_cast<std::size_t>(patch_w * image_d) * sizeof(double));
                out += patch_w * image_d;
            }
        }
    }
    return grid;
}

PatchGrid extract_patches(const Tensor& input, std::int64_t patch_h, std::int64_t patch_w,
                          std::int64_t stride) {
    if (input.rank() != 3) {
        throw shape_error("extract_patches expects a rank-3 [H, W, D] tensor, got " +
                          shape_to_string(input.shape()));
    }
    return extract_patches(input.values(), input.dim(0), input.dim(1), input.dim(2), patch_h,
                           patch_w, stride);
}

void save_tensor(std::ostream& out, const Tensor& t) {
    out << "shape:";
    for (std::int64_t e : t.shape()) out << ' ' << e;
    out << '\n';
    out.write(reinterpret_cast<const char*>(t.data()),
              static_cast<std::streamsize>(t.size() * sizeof(double)));
    if (!out) throw format_error("tensor write failed");
}

Tensor load_tensor(std::istream& in) {
    std::string header;
    if (!std::getline(in, header)) throw format_error("tensor header missing");
    std::istringstream hs(header);
    std::string tag;
    hs >> tag;
    if (tag != "shape:") throw format_error("tensor header must start with 'shape:', got '" + header + "'");
    std::vector<std::int64_t> shape;
    std::int64_t e;
    while (hs >> e) shape.push_back(e);
    if (shape.empty()) throw format_error("tensor header lists no extents");
    std::int64_t n = 1;
    for (std::int64_t x : shape) {
        if (x < 1) throw format_error("tensor header has extent " + std::to_string(x));
        n *= x;
    }
    std::vector<double> data(static_cast<std::size_t>(n));
    in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(n * sizeof(double)));
    if (in.gcount() != static_cast<std::streamsize>(n * sizeof(double))) {
        throw format_error("tensor payload truncated: expected " + std::to_string(n) + " values");
    }
    return Tensor(std::move(shape), std::move(data));
}

void save_tensor_file(const std::string& path, const Tensor& t) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw format_error("cannot open '" + path + "' for writing");
    save_tensor(out, t);
}

Tensor load_tensor_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw format_error("cannot open '" + path + "' for reading");
    return load_tensor(in);
}

}  // namespace simnet
