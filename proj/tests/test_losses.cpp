#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "edgesr/losses.hpp"
#include "gradcheck.hpp"
#include "oracles.hpp"

using namespace edgesr;
using namespace edgesr::nn;
using gradtest::gradcheck;
using gradtest::rand_leaf;
using gradtest::rand_leaf_away_from_zero;

namespace {

NodePtr<double> filled(std::vector<int> shape, double value) {
  NodePtr<double> n = make_node<double>(std::move(shape));
  std::fill(n->v.begin(), n->v.end(), value);
  return n;
}

}  // namespace

TEST_CASE("hinge discriminator loss saturates and penalizes as designed") {
  CHECK(losses::hinge_d(filled({1, 3, 3}, 1.0), filled({1, 3, 3}, -1.0))->v[0] ==
        doctest::Approx(0.0));
  CHECK(losses::hinge_d(filled({1, 3, 3}, 0.0), filled({1, 3, 3}, 0.0))->v[0] ==
        doctest::Approx(2.0));
  CHECK(losses::hinge_d(filled({1, 3, 3}, 2.0), filled({1, 3, 3}, -3.0))->v[0] ==
        doctest::Approx(0.0));
  CHECK_THROWS_AS(losses::hinge_d(filled({1, 3, 3}, 0.0), filled({1, 2, 3}, 0.0)),
                  std::invalid_argument);
}

TEST_CASE("hinge generator loss is the negated score mean") {
  CHECK(losses::hinge_g(filled({1, 4, 4}, 0.7))->v[0] == doctest::Approx(-0.7));
  CHECK(losses::hinge_g(filled({1, 4, 4}, 0.0))->v[0] == doctest::Approx(0.0));

  std::mt19937 rng(301);
  NodePtr<double> scores = rand_leaf({1, 5, 5}, rng);
  double mean = 0.0;
  for (double v : scores->v) mean += v;
  mean /= scores->numel();
  CHECK(losses::hinge_g(scores)->v[0] == doctest::Approx(-mean).epsilon(1e-12));
}

TEST_CASE("l1 loss is the elementwise mean distance") {
  NodePtr<double> zero = filled({3, 4, 4}, 0.0);
  CHECK(losses::l1(zero, zero)->v[0] == 0.0);
  CHECK(losses::l1(zero, filled({3, 4, 4}, -0.3))->v[0] == doctest::Approx(0.3));
}

TEST_CASE("feature matching normalizes each layer by its element count") {
  std::vector<NodePtr<double>> same = {filled({2, 3, 3}, 0.5), filled({4, 2, 2}, -1.0)};
  CHECK(losses::feature_matching(same, same)->v[0] == 0.0);

  std::vector<NodePtr<double>> zeros = {filled({3, 5, 7}, 0.0)};
  std::vector<NodePtr<double>> consts = {filled({3, 5, 7}, -2.5)};
  CHECK(losses::feature_matching(zeros, consts)->v[0] == doctest::Approx(2.5));

  // Two layers with small hand-evaluated arrays.
  NodePtr<double> a1 = constant<double>({1, 1, 2}, {1.0, -1.0});
  NodePtr<double> b1 = constant<double>({1, 1, 2}, {0.0, 1.0});
  NodePtr<double> a2 = constant<double>({1, 1, 1}, {2.0});
  NodePtr<double> b2 = constant<double>({1, 1, 1}, {0.5});
  // (|1-0| + |-1-1|)/2 + |2-0.5| = 1.5 + 1.5
  const std::vector<NodePtr<double>> lhs = {a1, a2}, rhs = {b1, b2};
  CHECK(losses::feature_matching(lhs, rhs)->v[0] == doctest::Approx(3.0));
  CHECK(oracle::feature_matching({{1.0, -1.0}, {2.0}}, {{0.0, 1.0}, {0.5}}) ==
        doctest::Approx(3.0));

  const std::vector<NodePtr<double>> just_a1 = {a1}, just_a2 = {a2}, none = {};
  CHECK_THROWS_AS(losses::feature_matching(just_a1, rhs), std::invalid_argument);
  CHECK_THROWS_AS(losses::feature_matching(just_a1, just_a2), std::invalid_argument);
  CHECK_THROWS_AS(losses::feature_matching(none, none), std::invalid_argument);
}

TEST_CASE("feature matching agrees with the brute-force loop on random stacks") {
  std::mt19937 rng(307);
  std::vector<NodePtr<double>> real, fake;
  std::vector<std::vector<double>> oreal, ofake;
  for (std::vector<int> shape : {std::vector<int>{3, 4, 5}, {6, 2, 2}, {1, 8, 8}}) {
    real.push_back(rand_leaf(shape, rng));
    fake.push_back(rand_leaf(shape, rng));
    oreal.push_back(real.back()->v);
    ofake.push_back(fake.back()->v);
  }
  const double got = losses::feature_matching(real, fake)->v[0];
  CHECK(std::fabs(got - oracle::feature_matching(oreal, ofake)) < 1e-6);
}

TEST_CASE("feature matching scales linearly in the perturbation") {
  std::mt19937 rng(311);
  NodePtr<double> base = rand_leaf({2, 4, 4}, rng);
  NodePtr<double> delta = rand_leaf_away_from_zero({2, 4, 4}, rng);
  auto loss_at = [&](double eps) {
    const std::vector<NodePtr<double>> lhs = {base};
    const std::vector<NodePtr<double>> rhs = {add(base, scale(delta, eps))};
    return losses::feature_matching(lhs, rhs)->v[0] / eps;
  };
  const double r1 = loss_at(0.5), r2 = loss_at(0.25), r3 = loss_at(0.125);
  CHECK(r1 == doctest::Approx(r2).epsilon(1e-9));
  CHECK(r2 == doctest::Approx(r3).epsilon(1e-9));
}

TEST_CASE("perceptual loss vanishes on identical images and matches brute force") {
  std::mt19937 rng(313);
  FeatureExtractor<double> fx = FeatureExtractor<double>::random(rng);
  NodePtr<double> img = rand_leaf({3, 16, 16}, rng, 0.0, 1.0);
  CHECK(losses::perceptual(img, img, fx)->v[0] == doctest::Approx(0.0));

  NodePtr<double> other = rand_leaf({3, 16, 16}, rng, 0.0, 1.0);
  const double loss = losses::perceptual(img, other, fx)->v[0];
  CHECK(loss >= 0.0);

  std::vector<std::vector<double>> fa, fb;
  for (const NodePtr<double>& t : fx.features(img)) fa.push_back(t->v);
  for (const NodePtr<double>& t : fx.features(other)) fb.push_back(t->v);
  REQUIRE(fa.size() == 5);
  CHECK(std::fabs(loss - oracle::feature_matching(fa, fb)) < 1e-9);

  CHECK_THROWS_AS(losses::perceptual(img, rand_leaf({3, 32, 32}, rng), fx),
                  std::invalid_argument);
}

TEST_CASE("style loss vanishes on identical images and matches the gram oracle") {
  std::mt19937 rng(317);
  FeatureExtractor<double> fx = FeatureExtractor<double>::random(rng);
  NodePtr<double> img = rand_leaf({3, 16, 16}, rng, 0.0, 1.0);
  CHECK(losses::style(img, img, fx)->v[0] == doctest::Approx(0.0));

  NodePtr<double> other = rand_leaf({3, 16, 16}, rng, 0.0, 1.0);
  const double loss = losses::style(img, other, fx)->v[0];
  CHECK(loss >= 0.0);

  double ref = 0.0;
  std::vector<NodePtr<double>> fa = fx.features(img);
  std::vector<NodePtr<double>> fb = fx.features(other);
  for (size_t l = 0; l < fa.size(); ++l) {
    const int c = fa[l]->shape[0];
    const int hw = fa[l]->shape[1] * fa[l]->shape[2];
    std::vector<double> ga = oracle::gram(fa[l]->v, c, hw);
    std::vector<double> gb = oracle::gram(fb[l]->v, c, hw);
    for (size_t i = 0; i < ga.size(); ++i) ref += std::fabs(ga[i] - gb[i]);
  }
  CHECK(std::fabs(loss - ref) < 1e-9);
}

TEST_CASE("a pixel shuffle changes perceptual loss but not a 1x1-conv style loss") {
  // With a single 1x1-convolution "extractor" the Gram matrix sums over
  // spatial positions, so shuffling pixels identically across channels moves
  // the perceptual distance but leaves the style distance untouched.
  std::mt19937 rng(331);
  NodePtr<double> w = rand_leaf({4, 3, 1, 1}, rng);
  NodePtr<double> b = rand_leaf({4}, rng);
  auto tap = [&](NodePtr<double> x) {
    return relu(conv2d(x, w, b, ConvOpts{1, 0, 1, PadMode::zero}));
  };
  auto style_of = [&](NodePtr<double> a, NodePtr<double> bb) {
    return sum_all(abs_val(sub(gram(tap(a)), gram(tap(bb)))))->v[0];
  };
  auto perc_of = [&](NodePtr<double> a, NodePtr<double> bb) {
    return mean_all(abs_val(sub(tap(a), tap(bb))))->v[0];
  };

  NodePtr<double> gt = rand_leaf({3, 4, 5}, rng, 0.0, 1.0);
  NodePtr<double> pred = rand_leaf({3, 4, 5}, rng, 0.0, 1.0);
  std::vector<int> perm(20);
  for (int i = 0; i < 20; ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  NodePtr<double> shuffled = make_node<double>({3, 4, 5});
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < 20; ++i) shuffled->v[c * 20 + i] = pred->v[c * 20 + perm[i]];

  CHECK(style_of(gt, pred) == doctest::Approx(style_of(gt, shuffled)).epsilon(1e-9));
  CHECK(std::fabs(perc_of(gt, pred) - perc_of(gt, shuffled)) > 1e-6);
}

TEST_CASE("joint objectives apply the default weights") {
  LossWeights w;
  CHECK(w.lambda_g1 == 1.0);
  CHECK(w.lambda_fm == 10.0);
  CHECK(w.lambda_l1 == 1.0);
  CHECK(w.lambda_g2 == 0.1);
  CHECK(w.lambda_p == 0.1);
  CHECK(w.lambda_s == 250.0);
  CHECK_NOTHROW(w.validate());

  CHECK(losses::joint_g1(-0.5, 0.2, w) == doctest::Approx(1.5));
  CHECK(losses::joint_g1(0.0, 0.0, w) == doctest::Approx(0.0));
  LossWeights no_fm = w;
  no_fm.lambda_fm = 0.0;
  CHECK(losses::joint_g1(-0.37, 5.0, no_fm) == doctest::Approx(-0.37));

  CHECK(losses::joint_g2(1.0, 1.0, 1.0, 1.0, w) == doctest::Approx(251.2));
  CHECK(losses::joint_g2(0.0, 0.0, 0.0, 0.0, w) == doctest::Approx(0.0));
  CHECK(losses::joint_g2(0.0, 0.0, 0.0, 0.004, w) == doctest::Approx(1.0));

  LossWeights bad = w;
  bad.lambda_s = -1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("joint objectives combine loss nodes the same way") {
  LossWeights w;
  NodePtr<double> adv = filled({1}, -0.5);
  NodePtr<double> fm = filled({1}, 0.2);
  CHECK(losses::joint_g1(adv, fm, w)->v[0] == doctest::Approx(1.5));

  NodePtr<double> one = filled({1}, 1.0);
  CHECK(losses::joint_g2(one, one, one, one, w)->v[0] == doctest::Approx(251.2));
}

TEST_CASE("loss gradients pass finite differences") {
  std::mt19937 rng(337);
  NodePtr<double> real = rand_leaf_away_from_zero({1, 3, 3}, rng);
  NodePtr<double> fake = rand_leaf_away_from_zero({1, 3, 3}, rng);
  gradcheck({real, fake}, [&]() { return losses::hinge_d(real, fake); });
  gradcheck({fake}, [&]() { return losses::hinge_g(fake); });

  NodePtr<double> a = rand_leaf({2, 4, 4}, rng);
  NodePtr<double> b = rand_leaf({2, 4, 4}, rng);
  const std::vector<NodePtr<double>> fa = {a}, fb = {b};
  gradcheck({a, b}, [&]() { return losses::l1(a, b); });
  gradcheck({a, b}, [&]() { return losses::feature_matching(fa, fb); });

  LossWeights w;
  gradcheck({a, b, fake}, [&]() {
    return losses::joint_g1(losses::hinge_g(fake), losses::feature_matching(fa, fb), w);
  });
}

TEST_CASE("perceptual and style gradients pass sampled finite differences") {
  std::mt19937 rng(347);
  FeatureExtractor<double> fx = FeatureExtractor<double>::random(rng);
  NodePtr<double> gt = rand_leaf({3, 16, 16}, rng, 0.0, 1.0);
  NodePtr<double> pred = rand_leaf({3, 16, 16}, rng, 0.0, 1.0);
  // The extractor is piecewise linear, so the probe step must stay inside one
  // relu region, yet large enough that subtractive cancellation stays below
  // the tolerance for a loss of this magnitude.
  gradcheck({pred}, [&]() { return losses::perceptual(gt, pred, fx); }, 1e-6, 1e-4, 24);
  gradcheck({pred}, [&]() { return losses::style(gt, pred, fx); }, 1e-6, 1e-4, 24);
}
