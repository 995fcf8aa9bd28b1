// Copyright 2026 The Shuffle SCO Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <memory>
#include <vector>

#include <gtest/gtest.h>

#include "shuffle_sco/losses.h"
#include "shuffle_sco/synth.h"

namespace shuffle_sco {
namespace {

struct Case {
  std::unique_ptr<LossModel> loss;
  bool classification;
};

std::vector<Case> AllModels() {
  std::vector<Case> out;
  out.push_back({std::make_unique<QuadraticLoss>(3.0), false});
  out.push_back({std::make_unique<LogisticLoss>(), true});
  out.push_back({std::make_unique<HingeLoss>(), true});
  out.push_back({std::make_unique<AbsoluteLoss>(), false});
  return out;
}

Datum RandomDatum(bool classification, std::size_t d, SeededRng& rng) {
  Datum x;
  x.x = UniformInBall(d, 1.0, rng);
  x.y = classification ? (rng.Bernoulli(0.5) ? 1.0 : -1.0) : 0.0;
  return x;
}

double ProxObjective(const LossModel& loss, const Vec& u, const Vec& theta,
                     const Datum& x, double step) {
  return loss.Value(u, x) + (u - theta).squaredNorm() / (2 * step);
}

// Projected subgradient with averaging; slow but independent.
Vec ReferenceProx(const LossModel& loss, const Ball& space, const Vec& theta,
                  const Datum& x, double step) {
  Vec u = ProjectToBall(theta, space);
  Vec best = u;
  double best_value = ProxObjective(loss, u, theta, x, step);
  for (int k = 1; k <= 20000; ++k) {
    const Vec g = loss.Gradient(u, x) + (u - theta) / step;
    u = ProjectToBall(Vec(u - (step / k) * g), space);
    const double v = ProxObjective(loss, u, theta, x, step);
    if (v < best_value) {
      best_value = v;
      best = u;
    }
  }
  return best;
}

// Envelope by brute force over the ball, for d = 1.
double BruteEnvelope1D(const LossModel& loss, double radius, double theta,
                       const Datum& x, double beta) {
  double lo = -radius;
  double hi = radius;
  auto f = [&](double u) {
    return loss.Value(Vec::Constant(1, u), x) +
           0.5 * beta * (theta - u) * (theta - u);
  };
  for (int i = 0; i < 300; ++i) {
    const double a = lo + (hi - lo) / 3;
    const double b = hi - (hi - lo) / 3;
    if (f(a) <= f(b)) {
      hi = b;
    } else {
      lo = a;
    }
  }
  return f(0.5 * (lo + hi));
}

TEST(Losses, GradientsMatchFiniteDifferences) {
  SeededRng rng(1);
  for (const Case& c : AllModels()) {
    for (int i = 0; i < 200; ++i) {
      const Vec theta = UniformInBall(4, 1.0, rng);
      const Datum x = RandomDatum(c.classification, 4, rng);
      const Vec g = c.loss->Gradient(theta, x);
      for (int j = 0; j < 4; ++j) {
        Vec e = Vec::Zero(4);
        e[j] = 1e-6;
        const double fd =
            (c.loss->Value(theta + e, x) - c.loss->Value(theta - e, x)) / 2e-6;
        // Kinks of hinge and absolute are hit with probability zero.
        EXPECT_NEAR(g[j], fd, 1e-5) << c.loss->name();
      }
    }
  }
}

TEST(Losses, GradientsRespectLipschitzBound) {
  SeededRng rng(2);
  for (const Case& c : AllModels()) {
    for (int i = 0; i < 1000; ++i) {
      const Vec theta = UniformInBall(3, 1.0, rng);
      const Datum x = RandomDatum(c.classification, 3, rng);
      ASSERT_LE(c.loss->Gradient(theta, x).norm(), c.loss->lipschitz() + 1e-12);
    }
  }
}

TEST(Losses, DeclaredConstants) {
  EXPECT_EQ(*QuadraticLoss(2.0).smoothness(), 1.0);
  EXPECT_EQ(*QuadraticLoss(2.0).strong_convexity(), 1.0);
  EXPECT_EQ(*LogisticLoss().smoothness(), 0.25);
  EXPECT_FALSE(HingeLoss().smoothness());
  EXPECT_FALSE(AbsoluteLoss().smoothness());
  EXPECT_THROW(QuadraticLoss(0.0), std::invalid_argument);
}

TEST(Prox, SoftThresholdClosedForm) {
  const AbsoluteLoss abs;
  Datum x;
  x.x = Vec::Zero(2);
  Vec theta(2);
  theta << 3.0, 4.0;  // norm 5
  const Vec u = *abs.UnconstrainedProx(theta, x, 2.0);
  EXPECT_NEAR(u[0], 3.0 * 0.6, 1e-15);
  EXPECT_NEAR(u[1], 4.0 * 0.6, 1e-15);
  EXPECT_EQ(*abs.UnconstrainedProx(theta, x, 5.0), x.x);
  EXPECT_EQ(*abs.UnconstrainedProx(theta, x, 7.0), x.x);
  // Scalar case: sign(t) max(|t| - s, 0).
  Datum z;
  z.x = Vec::Zero(1);
  for (double t : {-2.0, -0.3, 0.0, 0.4, 1.7}) {
    const double expect = (t > 0 ? 1 : -1) * std::max(std::abs(t) - 0.5, 0.0);
    EXPECT_NEAR((*abs.UnconstrainedProx(Vec::Constant(1, t), z, 0.5))[0],
                expect, 1e-15);
  }
}

TEST(Prox, ClosedFormsMatchReferenceSolver) {
  SeededRng rng(3);
  const Ball big = Ball::Centered(3, 100.0);
  for (const Case& c : AllModels()) {
    for (int i = 0; i < 30; ++i) {
      const Vec theta = UniformInBall(3, 2.0, rng);
      const Datum x = RandomDatum(c.classification, 3, rng);
      const double step = 0.05 + 2 * rng.Uniform();
      const Vec u = Prox(*c.loss, big, theta, x, step);
      const Vec ref = ReferenceProx(*c.loss, big, theta, x, step);
      EXPECT_LE(ProxObjective(*c.loss, u, theta, x, step),
                ProxObjective(*c.loss, ref, theta, x, step) + 1e-7)
          << c.loss->name();
    }
  }
}

TEST(Prox, ConstrainedSolutionsAreFeasibleAndOptimal) {
  SeededRng rng(4);
  const Ball ball = Ball::Centered(3, 0.5);
  for (const Case& c : AllModels()) {
    for (int i = 0; i < 30; ++i) {
      const Vec theta = UniformInBall(3, 3.0, rng);
      const Datum x = RandomDatum(c.classification, 3, rng);
      const double step = 0.05 + 2 * rng.Uniform();
      const Vec u = Prox(*c.loss, ball, theta, x, step);
      ASSERT_TRUE(ball.Contains(u));
      const double value = ProxObjective(*c.loss, u, theta, x, step);
      const Vec ref = ReferenceProx(*c.loss, ball, theta, x, step);
      EXPECT_LE(value, ProxObjective(*c.loss, ref, theta, x, step) + 1e-7)
          << c.loss->name();
      for (int k = 0; k < 50; ++k) {
        const Vec p = ProjectToBall(Vec(u + UniformInBall(3, 1e-3, rng)), ball);
        ASSERT_LE(value, ProxObjective(*c.loss, p, theta, x, step) + 1e-9);
      }
    }
  }
}

// |theta - x|_1 with no closed-form prox, so the iterative solver runs.
class L1Loss final : public LossModel {
 public:
  std::string name() const override { return "l1"; }
  double Value(const Vec& theta, const Datum& x) const override {
    return (theta - x.x).lpNorm<1>();
  }
  Vec Gradient(const Vec& theta, const Datum& x) const override {
    return (theta - x.x).array().sign().matrix();
  }
  double lipschitz() const override { return 2.0; }
};

TEST(Prox, IterationCapRaisesWithBestIterate) {
  const L1Loss l1;
  const Ball ball = Ball::Centered(4, 1.0);
  Datum x;
  x.x = Vec::Constant(4, 0.1);
  try {
    Prox(l1, ball, Vec::Constant(4, 0.45), x, 1.0);
    FAIL() << "expected ProxError";
  } catch (const ProxError& e) {
    EXPECT_TRUE(ball.Contains(e.best()));
    EXPECT_LE((e.best() - x.x).norm(), 0.05);
  }
  EXPECT_THROW(Prox(l1, ball, Vec::Zero(4), x, 0.0), std::invalid_argument);
}

TEST(MoreauEnvelope, RejectsNonPositiveBeta) {
  const AbsoluteLoss abs;
  EXPECT_THROW(MoreauEnvelope(abs, Ball::Centered(1, 1.0), 0.0),
               std::invalid_argument);
  EXPECT_THROW(MoreauEnvelope(abs, Ball::Centered(1, 1.0), -1.0),
               std::invalid_argument);
}

TEST(MoreauEnvelope, SandwichInequality) {
  SeededRng rng(5);
  const Ball ball = Ball::Centered(3, 1.0);
  for (const Case& c : AllModels()) {
    for (double beta : {0.5, 4.0, 50.0}) {
      const MoreauEnvelope env(*c.loss, ball, beta);
      const double slack = c.loss->lipschitz() * c.loss->lipschitz() / (2 * beta);
      for (int i = 0; i < 1000 / 3 + 1; ++i) {
        const Vec theta = UniformInBall(3, 1.0, rng);
        const Datum x = RandomDatum(c.classification, 3, rng);
        const double f = c.loss->Value(theta, x);
        const double fb = env.Value(theta, x);
        ASSERT_LE(fb, f + 1e-10) << c.loss->name();
        ASSERT_GE(fb, f - slack - 1e-10) << c.loss->name();
      }
    }
  }
}

TEST(MoreauEnvelope, ValueMatchesBruteForceInOneDimension) {
  SeededRng rng(6);
  for (const Case& c : AllModels()) {
    const MoreauEnvelope env(*c.loss, Ball::Centered(1, 1.0), 3.0);
    for (int i = 0; i < 50; ++i) {
      const double t = 2 * rng.Uniform() - 1;
      const Datum x = RandomDatum(c.classification, 1, rng);
      EXPECT_NEAR(env.Value(Vec::Constant(1, t), x),
                  BruteEnvelope1D(*c.loss, 1.0, t, x, 3.0), 1e-9)
          << c.loss->name();
    }
  }
}

TEST(MoreauEnvelope, GradientMatchesFiniteDifferences) {
  SeededRng rng(7);
  const Ball ball = Ball::Centered(3, 1.0);
  for (const Case& c : AllModels()) {
    const MoreauEnvelope env(*c.loss, ball, 5.0);
    for (int i = 0; i < 100; ++i) {
      const Vec theta = UniformInBall(3, 0.9, rng);
      const Datum x = RandomDatum(c.classification, 3, rng);
      const Vec g = env.Gradient(theta, x);
      Vec fd(3);
      for (int j = 0; j < 3; ++j) {
        Vec e = Vec::Zero(3);
        e[j] = 1e-5;
        fd[j] = (env.Value(theta + e, x) - env.Value(theta - e, x)) / 2e-5;
      }
      EXPECT_LE((g - fd).norm(), 1e-4 * std::max(1.0, g.norm()))
          << c.loss->name();
    }
  }
}

TEST(MoreauEnvelope, GradientIsBetaLipschitz) {
  SeededRng rng(8);
  const Ball ball = Ball::Centered(2, 1.0);
  for (const Case& c : AllModels()) {
    const double beta = 7.0;
    const MoreauEnvelope env(*c.loss, ball, beta);
    for (int i = 0; i < 300; ++i) {
      const Datum x = RandomDatum(c.classification, 2, rng);
      const Vec a = UniformInBall(2, 1.0, rng);
      const Vec b = UniformInBall(2, 1.0, rng);
      ASSERT_LE((env.Gradient(a, x) - env.Gradient(b, x)).norm(),
                (beta + 1e-6) * (a - b).norm() + 1e-9);
      ASSERT_LE(env.Gradient(a, x).norm(), 2 * c.loss->lipschitz() + 1e-9);
    }
  }
}

TEST(EnvelopeLoss, Constants) {
  const QuadraticLoss q(2.0);
  const EnvelopeLoss e(MoreauEnvelope(q, Ball::Centered(2, 1.0), 3.0));
  EXPECT_EQ(e.lipschitz(), 4.0);
  EXPECT_EQ(*e.smoothness(), 3.0);
  EXPECT_DOUBLE_EQ(*e.strong_convexity(), 0.75);
  const AbsoluteLoss a;
  EXPECT_FALSE(
      EnvelopeLoss(MoreauEnvelope(a, Ball::Centered(2, 1.0), 3.0))
          .strong_convexity());
}

}  // namespace
}  // namespace shuffle_sco
