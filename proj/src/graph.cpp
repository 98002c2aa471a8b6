#include "asr/graph.hpp"

#include "asr/errors.hpp"

namespace asr {

std::size_t Graph::node_id(const TensorPtr& t) {
    auto it = id_of_.find(t.get());
    if (it != id_of_.end()) return it->second;
    nodes_.push_back(Node{"leaf", {}, t, nullptr});
    const std::size_t id = nodes_.size() - 1;
    id_of_.emplace(t.get(), id);
    return id;
}

TensorPtr Graph::append(std::string op, const std::vector<TensorPtr>& inputs, TensorPtr out,
                        std::function<void()> backward) {
    std::vector<std::size_t> input_ids;
    input_ids.reserve(inputs.size());
    bool rg = false;
    for (const auto& in : inputs) {
        input_ids.push_back(node_id(in));
        rg = rg || in->requires_grad;
    }
    out->requires_grad = rg;
#ifndef NDEBUG
    if (!out->all_finite()) {
        throw DomainError("non-finite value produced by op '" + op + "'");
    }
#endif
    nodes_.push_back(Node{std::move(op), std::move(input_ids), out, std::move(backward)});
    id_of_.emplace(out.get(), nodes_.size() - 1);
    return out;
}

void Graph::backward(const TensorPtr& loss) {
    if (loss->size() != 1) throw ContractError("backward requires a scalar loss");
    auto it = id_of_.find(loss.get());
    if (it == id_of_.end()) throw ContractError("loss tensor is not part of this graph");

    // Intermediate grads are per-sweep scratch; only leaf tensors (params,
    // inputs) accumulate across repeated backward calls.
    for (auto& node : nodes_) {
        if (node.backward) node.out->zero_grad();
    }
    loss->ensure_grad();
    loss->grad[0] += 1.0;

    backward_order_.clear();
    for (std::size_t i = nodes_.size(); i-- > 0;) {
        Node& node = nodes_[i];
        backward_order_.push_back(node.op);
        if (!node.backward) continue;
        if (node.out->grad.empty()) continue;  // nothing flowed into this node
        node.backward();
    }
}

}  // namespace asr
