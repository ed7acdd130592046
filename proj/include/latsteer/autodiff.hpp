#pragma once

// Tape-based reverse-mode differentiation.
//
// A Graph owns every Node created while building an expression. Nodes are
// appended after their predecessors, so tape order is a topological order
// and the graph is acyclic by construction. backward() walks the tape in
// reverse and accumulates into grad buffers, which are zero until first
// touched. Frozen values (constants) never receive gradient.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "latsteer/tensor.hpp"

namespace latsteer {

class Graph;

// Handle to a node of a Graph. Cheap to copy; valid while the Graph lives.
class Var {
public:
    Var() = default;
    Var(Graph* graph, std::size_t id) : graph_(graph), id_(id) {}

    Graph& graph() const { return *graph_; }
    std::size_t id() const noexcept { return id_; }
    const Tensor& value() const;
    const Shape& shape() const { return value().shape(); }
    // Gradient of the last backward() root with respect to this node.
    const Tensor& grad() const;
    bool requires_grad() const;

private:
    Graph* graph_ = nullptr;
    std::size_t id_ = 0;
};

class Graph {
public:
    // Backward rule of a node: reads grad(self) and accumulates into its
    // predecessors through accumulate_grad().
    using BackwardFn = std::function<void(Graph&, std::size_t self)>;

    Graph() = default;
    Graph(const Graph&) = delete;
    Graph& operator=(const Graph&) = delete;

    // Leaf that receives gradient.
    Var parameter(Tensor value);
    // Leaf that never receives gradient (inputs, frozen weights).
    Var constant(Tensor value);
    // Copy of x cut off from the tape.
    Var detach(Var x) { return constant(x.value()); }

    // Appends an op result. requires_grad is inherited from the parents; when
    // no parent requires grad the backward rule is dropped.
    Var record(Tensor value, std::vector<std::size_t> parents, BackwardFn backward);

    const Tensor& value(std::size_t id) const { return nodes_.at(id).value; }
    const Tensor& grad(std::size_t id);
    bool requires_grad(std::size_t id) const { return nodes_.at(id).requires_grad; }

    // Mutable grad buffer of a node, materialized as zeros on first use.
    // Returns nullptr for nodes that do not require grad.
    Tensor* grad_buffer(std::size_t id);

    // Populates gradients of every node reachable from a scalar root.
    // Calling it twice without zero_grad() in between is an error.
    void backward(Var root);
    void zero_grad();

    std::size_t size() const noexcept { return nodes_.size(); }

private:
    struct Node {
        Tensor value;
        Tensor grad;
        bool requires_grad = false;
        std::vector<std::size_t> parents;
        BackwardFn backward;
    };

    std::vector<Node> nodes_;
    bool backward_done_ = false;
};

// Binds each tensor of a list as a leaf, trainable or frozen.
std::vector<Var> bind_parameters(Graph& g, std::span<const Tensor> tensors);
std::vector<Var> bind_constants(Graph& g, std::span<const Tensor> tensors);

}  // namespace latsteer
