#pragma once

// Finite-difference gradient checking shared by the tests. Works in double
// precision; the engine's float instantiation is validated separately against
// the same forward values.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "doctest.h"
#include "edgesr/nn/ops.hpp"

namespace gradtest {

using edgesr::nn::NodePtr;

inline NodePtr<double> rand_leaf(std::vector<int> shape, std::mt19937& rng, double lo = -1.0,
                                 double hi = 1.0) {
  NodePtr<double> n = edgesr::nn::make_leaf<double>(std::move(shape));
  std::uniform_real_distribution<double> dist(lo, hi);
  for (double& v : n->v) v = dist(rng);
  return n;
}

// Keeps values away from the kinks of relu/abs so finite differences stay
// two-sided smooth.
inline NodePtr<double> rand_leaf_away_from_zero(std::vector<int> shape, std::mt19937& rng) {
  NodePtr<double> n = edgesr::nn::make_leaf<double>(std::move(shape));
  std::uniform_real_distribution<double> dist(0.1, 1.0);
  std::bernoulli_distribution sign(0.5);
  for (double& v : n->v) v = (sign(rng) ? 1.0 : -1.0) * dist(rng);
  return n;
}

struct GradcheckReport {
  double max_rel_err = 0.0;
  int checked = 0;
};

// Central finite differences against one reverse sweep. max_per_leaf == 0
// checks every element; a positive value samples that many indices so
// expensive losses stay testable.
inline GradcheckReport gradcheck_report(const std::vector<NodePtr<double>>& leaves,
                                        const std::function<NodePtr<double>()>& build,
                                        double h = 1e-5, int max_per_leaf = 0,
                                        unsigned sample_seed = 0) {
  for (const NodePtr<double>& l : leaves) l->zero_grad();
  NodePtr<double> loss = build();
  REQUIRE(loss->numel() == 1);
  edgesr::nn::backward(loss);
  GradcheckReport rep;
  std::mt19937 pick(sample_seed);
  for (const NodePtr<double>& leaf : leaves) {
    leaf->ensure_grad();
    std::vector<size_t> idx(leaf->v.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    if (max_per_leaf > 0 && idx.size() > static_cast<size_t>(max_per_leaf)) {
      std::shuffle(idx.begin(), idx.end(), pick);
      idx.resize(max_per_leaf);
    }
    for (size_t i : idx) {
      const double keep = leaf->v[i];
      leaf->v[i] = keep + h;
      const double fp = build()->v[0];
      leaf->v[i] = keep - h;
      const double fm = build()->v[0];
      leaf->v[i] = keep;
      const double fd = (fp - fm) / (2.0 * h);
      const double an = leaf->g[i];
      const double err = std::fabs(fd - an) / std::max({1.0, std::fabs(fd), std::fabs(an)});
      rep.max_rel_err = std::max(rep.max_rel_err, err);
      ++rep.checked;
    }
  }
  return rep;
}

inline void gradcheck(const std::vector<NodePtr<double>>& leaves,
                      const std::function<NodePtr<double>()>& build, double h = 1e-5,
                      double tol = 1e-6, int max_per_leaf = 0) {
  GradcheckReport rep = gradcheck_report(leaves, build, h, max_per_leaf);
  CHECK(rep.max_rel_err < tol);
}

// Projects a tensor node to a scalar through a fixed random direction so the
// whole output participates in the loss.
inline NodePtr<double> project(NodePtr<double> x, std::mt19937& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> dir(x->numel());
  for (double& v : dir) v = dist(rng);
  return edgesr::nn::mean_all(
      edgesr::nn::mul(x, edgesr::nn::constant<double>(x->shape, dir)));
}

}  // namespace gradtest
