#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace pns {

/// Adaptive-moment descent on one flat parameter block. Weight decay is
/// added to the gradient (L2 form).
class Adam {
public:
    explicit Adam(std::size_t size, double lr, double weight_decay = 0.0, double beta1 = 0.9, double beta2 = 0.999,
                  double eps = 1e-8)
        : m_(size, 0.0), v_(size, 0.0), lr_(lr), weight_decay_(weight_decay), beta1_(beta1), beta2_(beta2), eps_(eps) {}

    void step(std::span<double> params, std::span<const double> grad) {
        if (params.size() != m_.size() || grad.size() != m_.size()) {
            throw std::invalid_argument("Adam: parameter block size changed");
        }
        ++t_;
        const double c1 = 1.0 - std::pow(beta1_, t_);
        const double c2 = 1.0 - std::pow(beta2_, t_);
        for (std::size_t i = 0; i < params.size(); ++i) {
            const double g = grad[i] + weight_decay_ * params[i];
            m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * g;
            v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * g * g;
            params[i] -= lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps_);
        }
    }

    int steps() const { return t_; }

private:
    std::vector<double> m_, v_;
    double lr_, weight_decay_, beta1_, beta2_, eps_;
    int t_ = 0;
};

}  // namespace pns
