#include <gtest/gtest.h>

#include <cmath>

#include "gge/error.hpp"
#include "gge/losses/losses.hpp"
#include "gge/nn/rng.hpp"
#include "support.hpp"

using namespace gge;
using namespace gge::losses;

TEST(BceLoss, Examples) {
  EXPECT_NEAR(bce_loss(nn::Vector{0}, nn::Vector{1}), std::log(2.0), 1e-15);
  EXPECT_NEAR(bce_loss(nn::Vector{30}, nn::Vector{1}), 0.0, 1e-12);
  EXPECT_NEAR(bce_loss(nn::Vector{1, -1}, nn::Vector{1, 0}), 0.6265233750364456, 1e-12);
  EXPECT_THROW(bce_loss(nn::Vector{1, 2}, nn::Vector{1}), ShapeError);
}

TEST(CeLoss, Examples) {
  EXPECT_NEAR(ce_loss(nn::Vector{0, 0, 0, 0}, nn::Vector{1, 0, 0, 0}), std::log(4.0), 1e-15);
  EXPECT_NEAR(ce_loss(nn::Vector{30, 0, 0}, nn::Vector{1, 0, 0}), 0.0, 1e-12);
  EXPECT_NEAR(ce_loss(nn::Vector{1, 0, 0}, nn::Vector{1, 0, 0}), 0.5514447139320511, 1e-12);
}

TEST(Losses, MatchHighPrecisionOracle) {
  for (const auto& c : test::fixture("scalars.json")["loss_cases"]) {
    const auto z = test::vec(c["logits"]);
    const auto y = test::vec(c["label"]);
    EXPECT_NEAR(bce_loss(z, y), c["bce"].get<double>(), 1e-12 * (1 + std::abs(c["bce"].get<double>())));
    EXPECT_NEAR(ce_loss(z, y), c["ce"].get<double>(), 1e-12 * (1 + std::abs(c["ce"].get<double>())));
    const auto gb = loss_grad_wrt_logits(LossFamily::Bce, z, y);
    const auto gc = loss_grad_wrt_logits(LossFamily::SoftmaxCe, z, y);
    for (std::size_t i = 0; i < z.size(); ++i) {
      EXPECT_NEAR(gb[i], c["bce_grad"][i].get<double>(), 1e-14);
      EXPECT_NEAR(gc[i], c["ce_grad"][i].get<double>(), 1e-14);
    }
  }
}

TEST(LossGrad, Examples) {
  EXPECT_EQ(loss_grad_wrt_logits(LossFamily::Bce, nn::Vector{0}, nn::Vector{1}), (nn::Vector{-0.5}));
  EXPECT_EQ(loss_grad_wrt_logits(LossFamily::SoftmaxCe, nn::Vector{0, 0}, nn::Vector{1, 0}),
            (nn::Vector{-0.5, 0.5}));
}

TEST(LossGrad, MatchesCentralDifferences) {
  nn::Rng r(4);
  for (int trial = 0; trial < 50; ++trial) {
    nn::Vector z(5), y(5);
    for (double& v : z) v = r.uniform(-3, 3);
    for (double& v : y) v = r.uniform() < 0.5 ? 0.0 : r.uniform();
    for (auto fam : {LossFamily::Bce, LossFamily::SoftmaxCe}) {
      const auto g = loss_grad_wrt_logits(fam, z, y);
      for (std::size_t i = 0; i < z.size(); ++i) {
        auto up = z, down = z;
        up[i] += 1e-6;
        down[i] -= 1e-6;
        const double num = (loss(fam, up, y) - loss(fam, down, y)) / 2e-6;
        EXPECT_LE(std::abs(g[i] - num) / std::max({std::abs(g[i]), std::abs(num), 1e-3}), 1e-6);
      }
    }
  }
}

TEST(PseudoLabelBce, Examples) {
  EXPECT_EQ(pseudo_label_bce(nn::Vector{1}, nn::Vector{0})[0], 1.0);
  EXPECT_EQ(pseudo_label_bce(nn::Vector{0}, nn::Vector{3})[0], 0.0);
  EXPECT_NEAR(pseudo_label_bce(nn::Vector{1}, nn::Vector{2})[0], 0.035972419924183116, 1e-15);
  EXPECT_EQ(pseudo_label_bce(nn::Vector{1}, nn::Vector{-1})[0], 1.0);
}

TEST(PseudoLabelBce, MatchesGridOracle) {
  for (const auto& row : test::fixture("scalars.json")["bce_grid"]) {
    const double y = row["y"], h = row["h"];
    EXPECT_NEAR(pseudo_label_bce(nn::Vector{y}, nn::Vector{h})[0], row["pl"].get<double>(), 1e-15)
        << "y=" << y << " H=" << h;
  }
}

TEST(PseudoLabelBce, MonotoneSaturatingInH) {
  for (int k = -50; k < 50; ++k) {
    const double a = pseudo_label_bce(nn::Vector{1}, nn::Vector{k / 10.0})[0];
    const double b = pseudo_label_bce(nn::Vector{1}, nn::Vector{(k + 1) / 10.0})[0];
    EXPECT_LE(b, a + 1e-12);
    if (k <= 0) { EXPECT_EQ(a, 1.0); }
  }
  EXPECT_LT(pseudo_label_bce(nn::Vector{1}, nn::Vector{20})[0], 1e-16);
}

TEST(PseudoLabelCe, Examples) {
  EXPECT_EQ(pseudo_label_ce(nn::Vector{1, 0}, nn::Vector{0.7, 0.3}), (nn::Vector{1 - 0.7, 0}));
  EXPECT_EQ(pseudo_label_ce(nn::Vector{0, 1, 0}, nn::Vector{0, 1, 0}), (nn::Vector{0, 0, 0}));
  const auto s = pseudo_label_ce(nn::Vector{0.9, 0.3, 0}, nn::Vector{0.5, 0.4, 0.1});
  EXPECT_NEAR(s[0], 0.4, 1e-15);
  EXPECT_EQ(s[1], 0.0);
  EXPECT_EQ(s[2], 0.0);
}

TEST(PseudoLabelCe, MatchesOracle) {
  for (const auto& c : test::fixture("scalars.json")["ce_cases"]) {
    const auto pl = pseudo_label_ce(test::vec(c["label"]), test::vec(c["probs"]));
    for (std::size_t i = 0; i < pl.size(); ++i) EXPECT_NEAR(pl[i], c["pl"][i].get<double>(), 1e-15);
  }
}

TEST(PseudoLabel, RangeAndSupportProperties) {
  nn::Rng r(8);
  for (int trial = 0; trial < 500; ++trial) {
    nn::Vector y(6), h(6);
    for (double& v : y) v = r.uniform() < 0.5 ? 0.0 : r.uniform();
    for (double& v : h) v = r.uniform(-6, 6);
    for (auto fam : {LossFamily::Bce, LossFamily::SoftmaxCe}) {
      const auto pl = pseudo_label(fam, y, fam == LossFamily::Bce ? h : nn::softmax(h));
      for (std::size_t i = 0; i < y.size(); ++i) {
        EXPECT_GE(pl[i], 0.0);
        EXPECT_LE(pl[i], 1.0);
        if (y[i] == 0.0) { EXPECT_EQ(pl[i], 0.0); }
      }
    }
  }
}

TEST(PseudoLabelCe, IsClampedNegativeCeGradient) {
  // For a normalized label, -dL/dz = y - softmax(z).
  nn::Rng r(2);
  for (int trial = 0; trial < 100; ++trial) {
    nn::Vector z(4), y{0.5, 0.5, 0, 0};
    for (double& v : z) v = r.uniform(-3, 3);
    const auto g = loss_grad_wrt_logits(LossFamily::SoftmaxCe, z, y);
    const auto pl = pseudo_label_ce(y, nn::softmax(z));
    for (std::size_t i = 0; i < 4; ++i) {
      const double expect = y[i] > 0 ? std::clamp(-g[i], 0.0, 1.0) : 0.0;
      EXPECT_NEAR(pl[i], expect, 1e-15);
    }
  }
}
