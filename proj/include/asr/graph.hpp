#pragma once

#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "asr/tensor.hpp"

namespace asr {

/// Append-only operation tape for reverse-mode differentiation. Node order is
/// execution order, so the reverse sweep is just a backwards loop. A graph and
/// its tensors belong to one thread for the duration of a forward/backward
/// pass; distinct graphs are independent.
class Graph {
public:
    struct Node {
        std::string op;
        std::vector<std::size_t> inputs;  // ids of earlier nodes
        TensorPtr out;
        std::function<void()> backward;  // reads out->grad, accumulates into inputs
    };

    /// Id of the node producing `t`, registering a leaf node if unseen.
    std::size_t node_id(const TensorPtr& t);

    /// Record an op. Output requires_grad is inferred from the inputs.
    TensorPtr append(std::string op, const std::vector<TensorPtr>& inputs, TensorPtr out,
                     std::function<void()> backward);

    /// Reverse sweep from a scalar loss; gradients accumulate (+=) into the
    /// grad slots of every tensor on the path. Repeated calls keep
    /// accumulating until tensors are zeroed.
    void backward(const TensorPtr& loss);

    const std::vector<Node>& nodes() const { return nodes_; }
    std::size_t size() const { return nodes_.size(); }

    /// Op names in the order the last backward() visited them (test hook).
    const std::vector<std::string>& last_backward_order() const { return backward_order_; }

private:
    std::vector<Node> nodes_;
    std::unordered_map<const Tensor*, std::size_t> id_of_;
    std::vector<std::string> backward_order_;
};

}  // namespace asr
