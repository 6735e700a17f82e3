#pragma once

// Minimal reverse-mode autodiff over dense CHW arrays. Nodes are built
// eagerly during the forward pass; creation order is a valid topological
// order but backward() re-derives one by DFS so subgraphs can be reused.
// All state is single-threaded by design.

#include <cstddef>
#include <functional>
#include <memory>
#include <stdexcept>
#include <unordered_set>
#include <vector>

namespace edgesr::nn {

inline bool& grad_mode() {
  thread_local bool enabled = true;
  return enabled;
}

// RAII switch for inference: ops built under the guard record no parents and
// no backward closures, so intermediates free as soon as callers drop them.
struct NoGradGuard {
  bool prev;
  NoGradGuard() : prev(grad_mode()) { grad_mode() = false; }
  ~NoGradGuard() { grad_mode() = prev; }
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;
};

template <typename T>
struct Node {
  std::vector<int> shape;
  std::vector<T> v;
  std::vector<T> g;  // allocated on first use
  std::vector<std::shared_ptr<Node<T>>> parents;
  std::function<void(Node<T>&)> backprop;
  bool needs_grad = false;

  size_t numel() const { return v.size(); }
  void ensure_grad() {
    if (g.size() != v.size()) g.assign(v.size(), T(0));
  }
  void zero_grad() { g.assign(v.size(), T(0)); }
};

template <typename T>
using NodePtr = std::shared_ptr<Node<T>>;

template <typename T>
NodePtr<T> make_node(std::vector<int> shape) {
  auto n = std::make_shared<Node<T>>();
  size_t count = 1;
  for (int d : shape) {
    if (d < 1) throw std::invalid_argument("make_node: non-positive dimension");
    count *= static_cast<size_t>(d);
  }
  n->shape = std::move(shape);
  n->v.assign(count, T(0));
  return n;
}

// A trainable leaf: persists across steps, accumulates gradient.
template <typename T>
NodePtr<T> make_leaf(std::vector<int> shape) {
  NodePtr<T> n = make_node<T>(std::move(shape));
  n->needs_grad = true;
  return n;
}

template <typename T>
bool wants_grad(const std::vector<NodePtr<T>>& inputs) {
  if (!grad_mode()) return false;
  for (const NodePtr<T>& p : inputs)
    if (p && p->needs_grad) return true;
  return false;
}

// Builds the result node for an op: wires parents and the closure only when
// gradients are live, otherwise leaves the node detached.
template <typename T>
NodePtr<T> make_op_node(std::vector<int> shape, std::vector<NodePtr<T>> inputs,
                        std::function<void(Node<T>&)> backprop) {
  NodePtr<T> n = make_node<T>(std::move(shape));
  if (wants_grad(inputs)) {
    n->needs_grad = true;
    n->parents = std::move(inputs);
    n->backprop = std::move(backprop);
  }
  return n;
}

// Reverse-mode sweep from a scalar root. Gradients accumulate into every
// reachable leaf with needs_grad set.
template <typename T>
void backward(const NodePtr<T>& root) {
  if (!root) throw std::invalid_argument("backward: null root");
  if (root->numel() != 1) throw std::invalid_argument("backward: root must be scalar");
  if (!root->needs_grad) return;

  std::vector<Node<T>*> order;
  std::unordered_set<Node<T>*> seen;
  std::vector<std::pair<Node<T>*, size_t>> stack;
  stack.emplace_back(root.get(), 0);
  seen.insert(root.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node<T>* p = node->parents[next++].get();
      if (p && p->needs_grad && seen.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  root->ensure_grad();
  root->g[0] += T(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it)
    if ((*it)->backprop) {
      (*it)->ensure_grad();
      (*it)->backprop(**it);
    }
}

}  // namespace edgesr::nn
