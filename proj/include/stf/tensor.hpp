#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "stf/errors.hpp"

namespace stf {

class GradTape;

/// Dense row-major 64-bit float tensor. Handles are cheap to copy: the
/// payload is shared. A tensor is either plain data (requires_grad() false)
/// or bound to a GradTape slot, in which case operations consuming it are
/// recorded for reverse-mode differentiation.
class Tensor {
  public:
    Tensor() = default;
    explicit Tensor(std::vector<int> shape);  // zero-filled
    Tensor(std::vector<int> shape, std::vector<double> data);

    static Tensor scalar(double v) { return Tensor({1}, {v}); }
    static Tensor zeros(std::vector<int> shape) { return Tensor(std::move(shape)); }
    static Tensor full(std::vector<int> shape, double v);

    const std::vector<int>& shape() const { return shape_; }
    int rank() const { return static_cast<int>(shape_.size()); }
    long long size() const;
    bool empty() const { return !data_; }

    double* data() { return data_->data(); }
    const double* data() const { return data_->data(); }
    const std::shared_ptr<std::vector<double>>& storage() const { return data_; }

    /// Value of a single-element tensor.
    double value() const;
    double at(const std::vector<int>& index) const;

    bool requires_grad() const { return node_ >= 0; }
    int node() const { return node_; }
    GradTape* tape() const { return tape_; }

    std::string shape_str() const;

  private:
    std::vector<int> shape_;
    std::shared_ptr<std::vector<double>> data_;
    int node_ = -1;
    GradTape* tape_ = nullptr;

    friend class GradTape;
    friend Tensor reshape(const Tensor& x, std::vector<int> shape);
};

using GradMap = std::map<std::string, Tensor>;

/// Reverse-mode tape. Parameters are registered up front and keep their
/// slots across reset(); recorded operations and intermediate slots are
/// dropped by reset() so one tape serves many training steps. backward()
/// replays the record list exactly once, in reverse order; parameters that
/// the loss never touched come back with exactly-zero gradients.
///
/// Single-threaded by contract.
class GradTape {
  public:
    GradTape() = default;
    GradTape(const GradTape&) = delete;
    GradTape& operator=(const GradTape&) = delete;

    Tensor parameter(const std::string& name, std::vector<int> shape, std::vector<double> init);
    Tensor& param(const std::string& name);
    const Tensor& param(const std::string& name) const;
    bool has_param(const std::string& name) const { return params_.count(name) != 0; }
    /// Registration order; checkpoints and optimizers iterate this.
    const std::vector<std::string>& param_names() const { return names_; }

    /// Drop recorded operations and intermediate slots, keep parameters.
    void reset();

    GradMap backward(const Tensor& loss);

    std::size_t op_count() const { return records_.size(); }

    // -- plumbing for operation implementations -----------------------------
    Tensor make_recorded(std::vector<int> shape, std::vector<double> data);
    void record(std::function<void()> backward_fn);
    /// Gradient buffer for a slot, allocated to zeros on first touch.
    std::vector<double>& grad(int node);

  private:
    std::vector<long long> slot_sizes_;
    std::vector<std::vector<double>> grads_;
    std::vector<std::function<void()>> records_;
    std::vector<std::string> names_;
    std::map<std::string, Tensor> params_;
    std::size_t param_slots_ = 0;
};

/// The tape shared by the given tensors (nullptr when none is recorded).
/// Mixing tensors from two different tapes is a contract violation.
GradTape* common_tape(std::initializer_list<const Tensor*> xs);

}  // namespace stf
