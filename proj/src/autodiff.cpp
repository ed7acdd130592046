#include "latsteer/autodiff.hpp"

#include <string>

#include "latsteer/error.hpp"

namespace latsteer {

const Tensor& Var::value() const { return graph_->value(id_); }
const Tensor& Var::grad() const { return graph_->grad(id_); }
bool Var::requires_grad() const { return graph_->requires_grad(id_); }

Var Graph::parameter(Tensor value) {
    nodes_.push_back(Node{std::move(value), {}, true, {}, {}});
    return Var(this, nodes_.size() - 1);
}

Var Graph::constant(Tensor value) {
    nodes_.push_back(Node{std::move(value), {}, false, {}, {}});
    return Var(this, nodes_.size() - 1);
}

Var Graph::record(Tensor value, std::vector<std::size_t> parents, BackwardFn backward) {
    if (!value.all_finite()) throw NumericalError("operation produced a non-finite value");
    bool needs = false;
    for (std::size_t p : parents) {
        if (p >= nodes_.size()) throw Error("node references a parent that does not exist yet");
        needs = needs || nodes_[p].requires_grad;
    }
    Node node{std::move(value), {}, needs, std::move(parents), needs ? std::move(backward) : BackwardFn{}};
    nodes_.push_back(std::move(node));
    return Var(this, nodes_.size() - 1);
}

const Tensor& Graph::grad(std::size_t id) {
    Node& n = nodes_.at(id);
    if (n.grad.empty()) n.grad = Tensor::zeros(n.value.shape());
    return n.grad;
}

Tensor* Graph::grad_buffer(std::size_t id) {
    Node& n = nodes_.at(id);
    if (!n.requires_grad) return nullptr;
    if (n.grad.empty()) n.grad = Tensor::zeros(n.value.shape());
    return &n.grad;
}

void Graph::backward(Var root) {
    if (&root.graph() != this) throw ValidationError("backward root belongs to another graph");
    if (root.value().size() != 1) {
        throw ValidationError("backward requires a scalar root, got shape " + to_string(root.shape()));
    }
    if (backward_done_) throw ValidationError("backward called twice without zero_grad()");
    backward_done_ = true;
    if (!nodes_[root.id()].requires_grad) return;
    grad_buffer(root.id())->fill(1.0);
    for (std::size_t i = root.id() + 1; i-- > 0;) {
        Node& n = nodes_[i];
        if (n.backward && !n.grad.empty()) n.backward(*this, i);
    }
}

void Graph::zero_grad() {
    for (Node& n : nodes_) {
        if (!n.grad.empty()) n.grad.fill(0.0);
    }
    backward_done_ = false;
}

std::vector<Var> bind_parameters(Graph& g, std::span<const Tensor> tensors) {
    std::vector<Var> out;
    out.reserve(tensors.size());
    for (const Tensor& t : tensors) out.push_back(g.parameter(t));
    return out;
}

std::vector<Var> bind_constants(Graph& g, std::span<const Tensor> tensors) {
    std::vector<Var> out;
    out.reserve(tensors.size());
    for (const Tensor& t : tensors) out.push_back(g.constant(t));
    return out;
}

}  // namespace latsteer
