#pragma once

#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace mddr {

/// Dense row-major float tensor. Images use NCHW / CHW layout, feature
/// batches use [N, D]. This is a plain value type; all math lives in the
/// autograd ops and in free functions.
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<int> dims) : dims_(std::move(dims)) {
        data_.assign(static_cast<size_t>(count(dims_)), 0.0f);
    }

    Tensor(std::vector<int> dims, float fill) : dims_(std::move(dims)) {
        data_.assign(static_cast<size_t>(count(dims_)), fill);
    }

    Tensor(std::vector<int> dims, std::vector<float> data)
        : dims_(std::move(dims)), data_(std::move(data)) {
        if (static_cast<int64_t>(data_.size()) != count(dims_)) {
            throw std::invalid_argument("Tensor: data size does not match dims");
        }
    }

    static Tensor zeros(std::vector<int> dims) { return Tensor(std::move(dims)); }
    static Tensor full(std::vector<int> dims, float v) { return Tensor(std::move(dims), v); }
    static Tensor scalar(float v) { return Tensor({1}, std::vector<float>{v}); }

    const std::vector<int>& dims() const { return dims_; }
    int ndim() const { return static_cast<int>(dims_.size()); }
    int dim(int i) const { return dims_.at(static_cast<size_t>(i)); }
    int64_t numel() const { return static_cast<int64_t>(data_.size()); }
    bool defined() const { return !dims_.empty(); }

    float* data() { return data_.data(); }
    const float* data() const { return data_.data(); }
    std::vector<float>& vec() { return data_; }
    const std::vector<float>& vec() const { return data_; }

    float& operator[](int64_t i) { return data_[static_cast<size_t>(i)]; }
    float operator[](int64_t i) const { return data_[static_cast<size_t>(i)]; }

    /// Flat offset for a NCHW tensor.
    int64_t offset4(int n, int c, int h, int w) const {
        return ((static_cast<int64_t>(n) * dims_[1] + c) * dims_[2] + h) * dims_[3] + w;
    }

    /// Flat offset for a CHW tensor.
    int64_t offset3(int c, int h, int w) const {
        return (static_cast<int64_t>(c) * dims_[1] + h) * dims_[2] + w;
    }

    float& at4(int n, int c, int h, int w) { return data_[static_cast<size_t>(offset4(n, c, h, w))]; }
    float at4(int n, int c, int h, int w) const { return data_[static_cast<size_t>(offset4(n, c, h, w))]; }
    float& at3(int c, int h, int w) { return data_[static_cast<size_t>(offset3(c, h, w))]; }
    float at3(int c, int h, int w) const { return data_[static_cast<size_t>(offset3(c, h, w))]; }

    /// Same data, new dims. Element count must match.
    Tensor reshaped(std::vector<int> dims) const {
        if (count(dims) != numel()) {
            throw std::invalid_argument("Tensor::reshaped: element count mismatch");
        }
        return Tensor(std::move(dims), data_);
    }

    bool same_dims(const Tensor& o) const { return dims_ == o.dims_; }

    std::string dims_str() const {
        std::string s = "[";
        for (size_t i = 0; i < dims_.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(dims_[i]);
        }
        return s + "]";
    }

private:
    static int64_t count(const std::vector<int>& dims) {
        int64_t n = 1;
        for (int d : dims) {
            if (d < 0) throw std::invalid_argument("Tensor: negative dimension");
            n *= d;
        }
        return dims.empty() ? 0 : n;
    }

    std::vector<int> dims_;
    std::vector<float> data_;
};

}  // namespace mddr
