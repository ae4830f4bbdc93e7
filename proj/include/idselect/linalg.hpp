#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace idselect {

using Vec = std::vector<double>;

// Row-major matrix view over external storage. Parameter blocks live in one
// flat vector (see AgentParams), so views keep flattening canonical.
struct MatView {
    double* data = nullptr;
    int rows = 0;
    int cols = 0;
    double& at(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }
};

struct ConstMatView {
    const double* data = nullptr;
    int rows = 0;
    int cols = 0;
    ConstMatView() = default;
    ConstMatView(const double* d, int r, int c) : data(d), rows(r), cols(c) {}
    ConstMatView(const MatView& m) : data(m.data), rows(m.rows), cols(m.cols) {}
    double at(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }
};

// y = W x
inline void gemv(ConstMatView w, std::span<const double> x, std::span<double> y) {
    for (int r = 0; r < w.rows; ++r) {
        double acc = 0.0;
        const double* row = w.data + static_cast<size_t>(r) * w.cols;
        for (int c = 0; c < w.cols; ++c) acc += row[c] * x[c];
        y[r] = acc;
    }
}

// y += W^T x
inline void gemv_t_add(ConstMatView w, std::span<const double> x, std::span<double> y) {
    for (int r = 0; r < w.rows; ++r) {
        const double* row = w.data + static_cast<size_t>(r) * w.cols;
        double xr = x[r];
        for (int c = 0; c < w.cols; ++c) y[c] += row[c] * xr;
    }
}

// W += a b^T
inline void outer_add(MatView w, std::span<const double> a, std::span<const double> b) {
    for (int r = 0; r < w.rows; ++r) {
        double* row = w.data + static_cast<size_t>(r) * w.cols;
        double ar = a[r];
        for (int c = 0; c < w.cols; ++c) row[c] += ar * b[c];
    }
}

inline void add_inplace(std::span<double> y, std::span<const double> x) {
    for (size_t i = 0; i < y.size(); ++i) y[i] += x[i];
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

inline double norm2(std::span<const double> v) { return std::sqrt(dot(v, v)); }

inline void tanh_inplace(std::span<double> v) {
    for (auto& x : v) x = std::tanh(x);
}

// Numerically stable softmax (max subtraction) and log-softmax.
inline void softmax(std::span<const double> z, std::span<double> p) {
    double m = z[0];
    for (double v : z) m = std::max(m, v);
    double sum = 0.0;
    for (size_t i = 0; i < z.size(); ++i) {
        p[i] = std::exp(z[i] - m);
        sum += p[i];
    }
    for (auto& v : p) v /= sum;
}

inline void log_softmax(std::span<const double> z, std::span<double> lp) {
    double m = z[0];
    for (double v : z) m = std::max(m, v);
    double sum = 0.0;
    for (double v : z) sum += std::exp(v - m);
    double lse = m + std::log(sum);
    for (size_t i = 0; i < z.size(); ++i) lp[i] = z[i] - lse;
}

inline double logsumexp(std::span<const double> z) {
    double m = z[0];
    for (double v : z) m = std::max(m, v);
    double sum = 0.0;
    for (double v : z) sum += std::exp(v - m);
    return m + std::log(sum);
}

// log(1 + e^x) without overflow.
inline double softplus(double x) {
    if (x > 0.0) return x + std::log1p(std::exp(-x));
    return std::log1p(std::exp(x));
}

inline double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    double e = std::exp(x);
    return e / (1.0 + e);
}

} // namespace idselect
