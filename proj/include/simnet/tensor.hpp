#pragma once

#include <cstdint>
#include <initializer_list>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "simnet/errors.hpp"

namespace simnet {

// Dense array of 64-bit reals, row-major (last axis fastest).
// Shapes are validated on construction: every extent >= 1 and the data
// length must equal the shape product.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<std::int64_t> shape);
    Tensor(std::vector<std::int64_t> shape, std::vector<double> data);

    static Tensor full(std::vector<std::int64_t> shape, double value);

    const std::vector<std::int64_t>& shape() const { return shape_; }
    std::int64_t dim(int axis) const;
    int rank() const { return static_cast<int>(shape_.size()); }
    std::int64_t size() const { return static_cast<std::int64_t>(data_.size()); }
    bool empty() const { return data_.empty(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::span<double> values() { return {data_.data(), data_.size()}; }
    std::span<const double> values() const { return {data_.data(), data_.size()}; }

    double& operator[](std::int64_t i) { return data_[static_cast<std::size_t>(i)]; }
    double operator[](std::int64_t i) const { return data_[static_cast<std::size_t>(i)]; }

    std::int64_t offset(std::initializer_list<std::int64_t> idx) const;
    double& at(std::initializer_list<std::int64_t> idx) { return data_[static_cast<std::size_t>(offset(idx))]; }
    double at(std::initializer_list<std::int64_t> idx) const { return data_[static_cast<std::size_t>(offset(idx))]; }

    // Contiguous slice along the leading axes: row(i) of a [n, d] tensor, etc.
    std::span<double> row(std::int64_t i);
    std::span<const double> row(std::int64_t i) const;

    void fill(double value);
    bool all_finite() const;

    Tensor& operator+=(const Tensor& other);
    Tensor& operator-=(const Tensor& other);
    Tensor& operator*=(double scalar);

    friend Tensor operator+(Tensor lhs, const Tensor& rhs) { lhs += rhs; return lhs; }
    friend Tensor operator-(Tensor lhs, const Tensor& rhs) { lhs -= rhs; return lhs; }
    friend Tensor operator*(Tensor lhs, double s) { lhs *= s; return lhs; }
    friend Tensor operator*(double s, Tensor rhs) { rhs *= s; return rhs; }

private:
    std::vector<std::int64_t> shape_;
    std::vector<double> data_;
};

std::string shape_to_string(std::span<const std::int64_t> shape);
void require_same_shape(const Tensor& a, const Tensor& b, const char* what);

// Patch extraction geometry. rows/cols follow floor((H-h)/stride)+1.
struct PatchGeometry {
    std::int64_t image_h = 0, image_w = 0, image_d = 0;
    std::int64_t patch_h = 0, patch_w = 0;
    std::int64_t stride = 1;
    std::int64_t rows = 0, cols = 0;
    std::int64_t patch_dim() const { return patch_h * patch_w * image_d; }
    std::int64_t patch_count() const { return rows * cols; }
};

// Stack of flattened patches: patches has shape [rows, cols, h*w*D] where the
// flattening runs over patch height, then width, then depth.
struct PatchGrid {
    Tensor patches;
    PatchGeometry geom;

    std::int64_t rows() const { return geom.rows; }
    std::int64_t cols() const { return geom.cols; }
    std::int64_t patch_dim() const { return geom.patch_dim(); }
    std::span<const double> patch(std::int64_t i, std::int64_t j) const;
    std::span<double> patch(std::int64_t i, std::int64_t j);
};

PatchGrid extract_patches(const Tensor& input, std::int64_t patch_h, std::int64_t patch_w,
                          std::int64_t stride);
PatchGrid extract_patches(std::span<const double> image, std::int64_t image_h, std::int64_t image_w,
                          std::int64_t image_d, std::int64_t patch_h, std::int64_t patch_w,
                          std::int64_t stride);

// Serialization: one text header line "shape: d1 d2 ... dk\n" followed by the
// raw little-endian 64-bit floats in row-major order.
void save_tensor(std::ostream& out, const Tensor& t);
Tensor load_tensor(std::istream& in);
void save_tensor_file(const std::string& path, const Tensor& t);
Tensor load_tensor_file(const std::string& path);

}  // namespace simnet
