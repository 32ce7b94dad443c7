#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ibstokes/errors.hpp"
#include "ibstokes/geometry.hpp"
#include "ibstokes/quadrature.hpp"

namespace ibstokes {

/// One-dimensional profile used to build product-form regularized deltas.
/// Built-ins are continuous, vanish outside [-support_halfwidth,
/// support_halfwidth] and integrate to 1 over the line.
struct Profile1D {
    std::string name;
    std::function<double(double)> evaluate;
    double support_halfwidth = 1.0;

    double operator()(double s) const { return evaluate(s); }
};

inline Profile1D cosine_profile() {
    return {"cosine",
            [](double s) {
                if (std::abs(s) >= 1.0) return 0.0;
                return 0.5 * (1.0 + std::cos(M_PI * s));
            },
            1.0};
}

inline Profile1D hat_profile() {
    return {"hat",
            [](double s) {
                const double a = std::abs(s);
                return a >= 1.0 ? 0.0 : 1.0 - a;
            },
            1.0};
}

inline Profile1D profile_by_name(std::string_view name) {
    if (name == "cosine") return cosine_profile();
    if (name == "hat") return hat_profile();
    throw ConfigError("unknown kernel profile '" + std::string(name) +
                      "' (expected cosine or hat)");
}

/// Product-form regularized delta delta_eps(y) = eps^{-n} prod_i phi(y_i/eps)
/// in n = 2 or 3 dimensions.
class DeltaKernel {
public:
    DeltaKernel(Profile1D profile, double epsilon, int dim = 2)
        : profile_(std::move(profile)), epsilon_(epsilon), dim_(dim) {
        if (!(epsilon > 0.0)) throw Error("kernel width must be positive");
        if (dim != 2 && dim != 3) throw Error("kernel dimension must be 2 or 3");
    }

    const Profile1D& profile() const { return profile_; }
    double epsilon() const { return epsilon_; }
    int dim() const { return dim_; }

    /// Half-width of the axis-aligned support box.
    double box_halfwidth() const { return epsilon_ * profile_.support_halfwidth; }

    /// Radius of the enclosing ball: sqrt(n) * support_halfwidth * eps.
    double support_radius() const {
        return std::sqrt(static_cast<double>(dim_)) * box_halfwidth();
    }

    /// Per-axis factor phi(s/eps)/eps, exactly 0 outside the support.
    double axis_factor(double s) const {
        if (std::abs(s) >= box_halfwidth()) return 0.0;
        return profile_.evaluate(s / epsilon_) / epsilon_;
    }

    double evaluate(const double* y) const {
        const double bw = box_halfwidth();
        double prod = 1.0;
        for (int i = 0; i < dim_; ++i) {
            if (std::abs(y[i]) >= bw) return 0.0;
            prod *= profile_.evaluate(y[i] / epsilon_);
        }
        double scale = epsilon_;
        for (int i = 1; i < dim_; ++i) scale *= epsilon_;
        return prod / scale;
    }

    double evaluate(const Vec2& y) const {
        const double v[2] = {y.x, y.y};
        return evaluate(v);
    }

    double operator()(const Vec2& y) const { return evaluate(y); }

private:
    Profile1D profile_;
    double epsilon_;
    int dim_;
};

namespace detail {

/// Tensor-product integral of g over the kernel's support box using a
/// per-axis 64-point composite Gauss rule (8 panels x 8 points).
template <class G>
double box_integral(const DeltaKernel& kernel, G&& g) {
    const double a = kernel.box_halfwidth();
    const GaussRule axis = composite_gauss(-a, a, 8, 8);
    const std::size_t m = axis.nodes.size();
    double sum = 0.0;
    if (kernel.dim() == 2) {
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < m; ++j) {
                const double y[2] = {axis.nodes[i], axis.nodes[j]};
                sum += axis.weights[i] * axis.weights[j] * g(y);
            }
        }
    } else {
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < m; ++j) {
                for (std::size_t k = 0; k < m; ++k) {
                    const double y[3] = {axis.nodes[i], axis.nodes[j], axis.nodes[k]};
                    sum += axis.weights[i] * axis.weights[j] * axis.weights[k] * g(y);
                }
            }
        }
    }
    return sum;
}

}  // namespace detail

/// Numerical zeroth moment of the kernel; 1 for any normalized profile.
inline double moment_zero(const DeltaKernel& kernel) {
    return detail::box_integral(kernel,
                                [&kernel](const double* y) { return kernel.evaluate(y); });
}

struct ScalingPoint {
    double epsilon = 0.0;
    double value = 0.0;
};

/// value(eps) = (int |y|^{p*weight_power} |delta_eps(y)|^p dy)^{1/p} for each
/// width in `epsilons`.  The log-log slope between consecutive widths tends
/// to weight_power - n + n/p.
inline std::vector<ScalingPoint> weighted_lp_scaling(const Profile1D& profile,
                                                     const std::vector<double>& epsilons,
                                                     double p, int weight_power,
                                                     int dim = 2) {
    if (!(p >= 1.0)) throw Error("scaling exponent p must be >= 1");
    for (std::size_t k = 1; k < epsilons.size(); ++k) {
        if (!(epsilons[k] < epsilons[k - 1]))
            throw Error("kernel widths must be strictly decreasing");
    }
    std::vector<ScalingPoint> out;
    out.reserve(epsilons.size());
    for (double eps : epsilons) {
        const DeltaKernel kernel(profile, eps, dim);
        const double integral = detail::box_integral(kernel, [&](const double* y) {
            double r2 = 0.0;
            for (int i = 0; i < dim; ++i) r2 += y[i] * y[i];
            const double d = kernel.evaluate(y);
            double v = std::pow(std::abs(d), p);
            if (weight_power != 0) v *= std::pow(std::sqrt(r2), p * weight_power);
            return v;
        });
        out.push_back({eps, std::pow(integral, 1.0 / p)});
    }
    return out;
}

/// Slopes of log(value) against log(eps) between consecutive points.
inline std::vector<double> log_log_slopes(const std::vector<ScalingPoint>& points) {
    std::vector<double> slopes;
    for (std::size_t k = 1; k < points.size(); ++k) {
        slopes.push_back(std::log(points[k].value / points[k - 1].value) /
                         std::log(points[k].epsilon / points[k - 1].epsilon));
    }
    return slopes;
}

}  // namespace ibstokes
