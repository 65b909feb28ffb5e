#include "wavelab/tensors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <tuple>

namespace wavelab {

namespace {

void require(bool cond, const std::string& what) {
    if (!cond) throw std::invalid_argument(what);
}

std::string entry_prefix(const char* tensor, std::size_t ordinal) {
    return std::string(tensor) + " entry #" + std::to_string(ordinal + 1) + ": ";
}

void check_component(int idx, int n, const char* name, const std::string& prefix) {
    require(idx >= 0 && idx < n, prefix + "component index " + name + "=" + std::to_string(idx + 1) +
                                     " out of range [1," + std::to_string(n) + "]");
}

void check_derivative(int idx, const char* name, const std::string& prefix) {
    require(idx >= 0 && idx <= 2, prefix + "derivative index " + name + "=" + std::to_string(idx) +
                                      " out of range [0,2]");
}

} // namespace

Direction::Direction(double theta) : theta_(theta), hat_{-1.0, std::cos(theta), std::sin(theta)} {}

GradientVector::GradientVector(int n_components) : n_(n_components), p_(3 * n_components, 0.0) {
    require(n_components > 0, "GradientVector: n_components must be positive");
}

GradientVector GradientVector::outer(const Direction& omega, std::span<const double> y) {
    GradientVector p(static_cast<int>(y.size()));
    for (int a = 0; a < 3; ++a)
        for (int j = 0; j < p.n_; ++j) p.at(a, j) = omega.omega_hat()[a] * y[j];
    return p;
}

QuadraticTensor::QuadraticTensor(int n_components, std::vector<QuadEntry> entries)
    : n_(n_components), entries_(std::move(entries)) {
    require(n_ > 0, "QuadraticTensor: n_components must be positive");
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        const auto& e = entries_[i];
        const std::string prefix = entry_prefix("quadratic", i);
        check_component(e.j, n_, "j", prefix);
        check_component(e.k, n_, "k", prefix);
        check_component(e.l, n_, "l", prefix);
        check_derivative(e.a, "a", prefix);
        check_derivative(e.b, "b", prefix);
        require(std::isfinite(e.value), prefix + "non-finite coefficient");
    }
    auto key = [](const QuadEntry& e) { return std::tie(e.j, e.k, e.l, e.a, e.b); };
    std::sort(entries_.begin(), entries_.end(),
              [&](const QuadEntry& x, const QuadEntry& y) { return key(x) < key(y); });
    std::vector<QuadEntry> merged;
    for (const auto& e : entries_) {
        if (!merged.empty() && key(merged.back()) == key(e))
            merged.back().value += e.value;
        else
            merged.push_back(e);
    }
    std::erase_if(merged, [](const QuadEntry& e) { return e.value == 0.0; });
    entries_ = std::move(merged);
    for (const auto& e : entries_) magnitude_ += std::abs(e.value);
}

CubicTensor::CubicTensor(int n_components, std::vector<CubicEntry> entries)
    : n_(n_components), entries_(std::move(entries)) {
    require(n_ > 0, "CubicTensor: n_components must be positive");
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        const auto& e = entries_[i];
        const std::string prefix = entry_prefix("cubic", i);
        check_component(e.j, n_, "j", prefix);
        check_component(e.k, n_, "k", prefix);
        check_component(e.l, n_, "l", prefix);
        check_component(e.m, n_, "m", prefix);
        check_derivative(e.a, "a", prefix);
        check_derivative(e.b, "b", prefix);
        check_derivative(e.c, "c", prefix);
        require(std::isfinite(e.value), prefix + "non-finite coefficient");
    }
    auto key = [](const CubicEntry& e) { return std::tie(e.j, e.k, e.l, e.m, e.a, e.b, e.c); };
    std::sort(entries_.begin(), entries_.end(),
              [&](const CubicEntry& x, const CubicEntry& y) { return key(x) < key(y); });
    std::vector<CubicEntry> merged;
    for (const auto& e : entries_) {
        if (!merged.empty() && key(merged.back()) == key(e))
            merged.back().value += e.value;
        else
            merged.push_back(e);
    }
    std::erase_if(merged, [](const CubicEntry& e) { return e.value == 0.0; });
    entries_ = std::move(merged);
    for (const auto& e : entries_) magnitude_ += std::abs(e.value);
}

SystemSpec::SystemSpec(int n, QuadraticTensor q, CubicTensor c)
    : n_components(n), quadratic(std::move(q)), cubic(std::move(c)) {
    require(n > 0, "SystemSpec: n_components must be positive");
    require(quadratic.empty() || quadratic.n_components() == n,
            "SystemSpec: quadratic tensor dimension mismatch");
    require(cubic.empty() || cubic.n_components() == n,
            "SystemSpec: cubic tensor dimension mismatch");
}

std::vector<double> eval_quadratic(const QuadraticTensor& b, const GradientVector& p) {
    std::vector<double> out(static_cast<std::size_t>(std::max(b.n_components(), p.n_components())), 0.0);
    const int n = p.n_components();
    const double* pd = p.data();
    for (const auto& e : b.entries())
        out[e.j] += e.value * pd[e.a * n + e.k] * pd[e.b * n + e.l];
    return out;
}

std::vector<double> eval_cubic(const CubicTensor& c, const GradientVector& p) {
    std::vector<double> out(static_cast<std::size_t>(std::max(c.n_components(), p.n_components())), 0.0);
    const int n = p.n_components();
    const double* pd = p.data();
    for (const auto& e : c.entries())
        out[e.j] += e.value * pd[e.a * n + e.k] * pd[e.b * n + e.l] * pd[e.c * n + e.m];
    return out;
}

void eval_reduced_quadratic_into(const QuadraticTensor& b, const std::array<double, 3>& w,
                                 const double* y, double* out) {
    for (int j = 0; j < b.n_components(); ++j) out[j] = 0.0;
    for (const auto& e : b.entries())
        out[e.j] += e.value * w[e.a] * w[e.b] * y[e.k] * y[e.l];
}

void eval_reduced_cubic_into(const CubicTensor& c, const std::array<double, 3>& w,
                             const double* y, double* out) {
    for (int j = 0; j < c.n_components(); ++j) out[j] = 0.0;
    for (const auto& e : c.entries())
        out[e.j] += e.value * w[e.a] * w[e.b] * w[e.c] * y[e.k] * y[e.l] * y[e.m];
}

void grad_reduced_cubic_into(const CubicTensor& c, const std::array<double, 3>& w,
                             const double* y, double* out) {
    const int n = c.n_components();
    for (int i = 0; i < n * n; ++i) out[i] = 0.0;
    for (const auto& e : c.entries()) {
        const double v = e.value * w[e.a] * w[e.b] * w[e.c];
        out[e.j * n + e.k] += v * y[e.l] * y[e.m];
        out[e.j * n + e.l] += v * y[e.k] * y[e.m];
        out[e.j * n + e.m] += v * y[e.k] * y[e.l];
    }
}

std::vector<double> eval_reduced_quadratic(const QuadraticTensor& b, const Direction& omega,
                                           std::span<const double> y) {
    std::vector<double> out(static_cast<std::size_t>(b.n_components()), 0.0);
    eval_reduced_quadratic_into(b, omega.omega_hat(), y.data(), out.data());
    return out;
}

std::vector<double> eval_reduced_cubic(const CubicTensor& c, const Direction& omega,
                                       std::span<const double> y) {
    std::vector<double> out(static_cast<std::size_t>(c.n_components()), 0.0);
    eval_reduced_cubic_into(c, omega.omega_hat(), y.data(), out.data());
    return out;
}

std::vector<double> grad_reduced_cubic(const CubicTensor& c, const Direction& omega,
                                       std::span<const double> y) {
    std::vector<double> out(static_cast<std::size_t>(c.n_components()) * c.n_components(), 0.0);
    grad_reduced_cubic_into(c, omega.omega_hat(), y.data(), out.data());
    return out;
}

} // namespace wavelab
