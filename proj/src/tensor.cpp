#include "stf/tensor.hpp"

#include <sstream>
#include <utility>

namespace stf {

namespace {

long long shape_product(const std::vector<int>& shape) {
    long long n = 1;
    for (int d : shape) {
        if (d <= 0) {
            throw DimensionError("tensor shape entries must be positive");
        }
        n *= d;
    }
    return n;
}

}  // namespace

Tensor::Tensor(std::vector<int> shape)
    : shape_(std::move(shape)),
      data_(std::make_shared<std::vector<double>>(static_cast<std::size_t>(shape_product(shape_)),
                                                  0.0)) {}

Tensor::Tensor(std::vector<int> shape, std::vector<double> data) : shape_(std::move(shape)) {
    const long long n = shape_product(shape_);
    if (static_cast<long long>(data.size()) != n) {
        std::ostringstream os;
        os << "tensor data length " << data.size() << " does not match shape " << shape_str();
        throw DimensionError(os.str());
    }
    data_ = std::make_shared<std::vector<double>>(std::move(data));
}

Tensor Tensor::full(std::vector<int> shape, double v) {
    Tensor t(std::move(shape));
    for (double& x : *t.data_) {
        x = v;
    }
    return t;
}

long long Tensor::size() const {
    return data_ ? static_cast<long long>(data_->size()) : 0;
}

double Tensor::value() const {
    if (size() != 1) {
        throw ContractError("value() requires a single-element tensor, got shape " + shape_str());
    }
    return (*data_)[0];
}

double Tensor::at(const std::vector<int>& index) const {
    if (static_cast<int>(index.size()) != rank()) {
        throw DimensionError("index rank mismatch for shape " + shape_str());
    }
    long long flat = 0;
    for (std::size_t i = 0; i < index.size(); ++i) {
        if (index[i] < 0 || index[i] >= shape_[i]) {
            throw DimensionError("index out of range for shape " + shape_str());
        }
        flat = flat * shape_[i] + index[i];
    }
    return (*data_)[static_cast<std::size_t>(flat)];
}

std::string Tensor::shape_str() const {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < shape_.size(); ++i) {
        os << (i ? "," : "") << shape_[i];
    }
    os << "]";
    return os.str();
}

Tensor GradTape::parameter(const std::string& name, std::vector<int> shape,
                           std::vector<double> init) {
    if (!records_.empty() || slot_sizes_.size() != param_slots_) {
        throw ContractError("parameters must be registered before any operation is recorded");
    }
    if (params_.count(name)) {
        throw ContractError("parameter '" + name + "' registered twice");
    }
    Tensor t(std::move(shape), std::move(init));
    t.node_ = static_cast<int>(slot_sizes_.size());
    t.tape_ = this;
    slot_sizes_.push_back(t.size());
    param_slots_ = slot_sizes_.size();
    names_.push_back(name);
    params_.emplace(name, t);
    return t;
}

Tensor& GradTape::param(const std::string& name) {
    auto it = params_.find(name);
    if (it == params_.end()) {
        throw ContractError("unknown parameter '" + name + "'");
    }
    return it->second;
}

const Tensor& GradTape::param(const std::string& name) const {
    auto it = params_.find(name);
    if (it == params_.end()) {
        throw ContractError("unknown parameter '" + name + "'");
    }
    return it->second;
}

void GradTape::reset() {
    records_.clear();
    slot_sizes_.resize(param_slots_);
    grads_.clear();
}

Tensor GradTape::make_recorded(std::vector<int> shape, std::vector<double> data) {
    Tensor t(std::move(shape), std::move(data));
    t.node_ = static_cast<int>(slot_sizes_.size());
    t.tape_ = this;
    slot_sizes_.push_back(t.size());
    return t;
}

void GradTape::record(std::function<void()> backward_fn) {
    records_.push_back(std::move(backward_fn));
}

std::vector<double>& GradTape::grad(int node) {
    if (node < 0 || node >= static_cast<int>(slot_sizes_.size())) {
        throw ContractError("gradient requested for a slot not on this tape");
    }
    if (grads_.size() != slot_sizes_.size()) {
        grads_.resize(slot_sizes_.size());
    }
    auto& g = grads_[static_cast<std::size_t>(node)];
    if (g.empty()) {
        g.assign(static_cast<std::size_t>(slot_sizes_[static_cast<std::size_t>(node)]), 0.0);
    }
    return g;
}

GradMap GradTape::backward(const Tensor& loss) {
    if (loss.size() != 1) {
        throw ContractError("backward() requires a scalar loss, got shape " + loss.shape_str());
    }
    if (loss.tape() != this || loss.node() < 0) {
        throw ContractError("loss tensor is not recorded on this tape");
    }
    grads_.clear();
    grad(loss.node())[0] = 1.0;
    for (auto it = records_.rbegin(); it != records_.rend(); ++it) {
        (*it)();
    }
    GradMap out;
    for (const auto& name : names_) {
        const Tensor& p = params_.at(name);
        out.emplace(name, Tensor(p.shape(), grad(p.node())));
    }
    return out;
}

GradTape* common_tape(std::initializer_list<const Tensor*> xs) {
    GradTape* tape = nullptr;
    for (const Tensor* x : xs) {
        if (x->tape() == nullptr) {
            continue;
        }
        if (tape != nullptr && tape != x->tape()) {
            throw ContractError("operands belong to different gradient tapes");
        }
        tape = x->tape();
    }
    return tape;
}

}  // namespace stf
