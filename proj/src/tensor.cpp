#include "scmppi/tensor.hpp"

#include <cmath>

namespace scmppi {

std::size_t ParamStore::add(const std::string& name, Tensor init, bool trainable) {
    if (index_.count(name) > 0) throw DataError("param store: duplicate parameter " + name);
    Param p;
    p.name = name;
    p.trainable = trainable;
    if (trainable) {
        p.m = Tensor::zeros(init.shape);
        p.v = Tensor::zeros(init.shape);
    }
    p.value = std::move(init);
    params_.push_back(std::move(p));
    index_[name] = params_.size() - 1;
    return params_.size() - 1;
}

std::size_t ParamStore::at(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw DataError("param store: unknown parameter " + name);
    return it->second;
}

void ParamStore::adamw_step(const std::vector<std::vector<float>>& grads, const AdamWConfig& cfg) {
    if (cfg.lr <= 0.0) throw DataError("adamw: learning rate must be positive");
    if (grads.size() != params_.size()) {
        throw DataError("adamw: gradient count " + std::to_string(grads.size()) +
                        " does not match parameter count " + std::to_string(params_.size()));
    }
    for (std::size_t i = 0; i < params_.size(); ++i) {
        if (params_[i].trainable && grads[i].size() != params_[i].value.data.size()) {
            throw DataError("adamw: gradient shape mismatch for " + params_[i].name);
        }
    }
    step_ += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step_));
    for (std::size_t i = 0; i < params_.size(); ++i) {
        Param& p = params_[i];
        if (!p.trainable) continue;
        const std::vector<float>& g = grads[i];
        for (std::size_t j = 0; j < p.value.data.size(); ++j) {
            const double gj = static_cast<double>(g[j]);
            const double m = cfg.beta1 * static_cast<double>(p.m.data[j]) + (1.0 - cfg.beta1) * gj;
            const double v =
                cfg.beta2 * static_cast<double>(p.v.data[j]) + (1.0 - cfg.beta2) * gj * gj;
            p.m.data[j] = static_cast<float>(m);
            p.v.data[j] = static_cast<float>(v);
            const double mhat = m / bc1;
            const double vhat = v / bc2;
            double w = static_cast<double>(p.value.data[j]);
            w -= cfg.lr * cfg.weight_decay * w;
            w -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
            p.value.data[j] = static_cast<float>(w);
        }
    }
}

void ParamStore::zero_all() {
    for (Param& p : params_) {
        std::fill(p.value.data.begin(), p.value.data.end(), 0.0f);
        std::fill(p.m.data.begin(), p.m.data.end(), 0.0f);
        std::fill(p.v.data.begin(), p.v.data.end(), 0.0f);
    }
}

}  // namespace scmppi
