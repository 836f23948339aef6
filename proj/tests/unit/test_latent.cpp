#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "steerbandit/errors.hpp"
#include "steerbandit/latent.hpp"

using namespace steerbandit;
using namespace steerbandit::latent;
using doctest::Approx;

namespace {

LatentPolicy two_arm_identity() {
  // Zero encoder (h = 0 everywhere) and identity unembedding.
  return LatentPolicy::from_params(2, 2, std::vector<double>(6, 0.0), {1.0, 0.0, 0.0, 1.0});
}

double relative_gradient_error(const LatentParams& params, const LatentParams& old,
                               const LatentParams& ref, std::span<const LatentSample> group,
                               std::span<const double> adv, const TrainConfig& cfg) {
  const auto analytic = surrogate_loss_and_grad(params, old, ref, group, adv, cfg);
  double diff = 0.0, norm_a = 0.0, norm_f = 0.0;
  LatentParams probe = params;
  for (std::size_t p = 0; p < params.parameter_count(); ++p) {
    const double h = 1e-6;
    const double keep = probe.parameter(p);
    probe.parameter(p) = keep + h;
    const double up = surrogate_loss_and_grad(probe, old, ref, group, adv, cfg).loss;
    probe.parameter(p) = keep - h;
    const double down = surrogate_loss_and_grad(probe, old, ref, group, adv, cfg).loss;
    probe.parameter(p) = keep;
    const double fd = (up - down) / (2 * h);
    const double a = analytic.grad.parameter(p);
    diff += (a - fd) * (a - fd);
    norm_a += a * a;
    norm_f += fd * fd;
  }
  const double scale = std::max({std::sqrt(norm_a), std::sqrt(norm_f), 1e-8});
  return std::sqrt(diff) / scale;
}

}  // namespace

TEST_CASE("activations") {
  const auto zero = two_arm_identity();
  for (std::size_t t = 0; t < 3; ++t) {
    for (double h : activation(zero.params, t)) CHECK(h == 0.0);
  }
  auto p = LatentPolicy::from_params(2, 3, {0.2, 0.0, 0.0, 0.0, 0.7, 0.0, -0.4, 0.0, 0.0},
                                     std::vector<double>(6, 0.0));
  const auto h = activation(p.params, 0);
  CHECK(h[0] == Approx(std::tanh(0.2)));
  CHECK(h[1] == 0.0);
  CHECK(h[2] == Approx(std::tanh(-0.4)));
  CHECK_THROWS_AS(activation(p.params, 3), InvalidArgument);
}

TEST_CASE("steering vector construction") {
  const double a9 = std::atanh(0.9), a1 = std::atanh(0.1);
  // Columns: arm 1, arm 2, start.
  auto p = LatentPolicy::from_params(2, 2, {a9, a1, 0.0, a1, a9, 0.0}, std::vector<double>(4, 0.0));
  const std::vector<std::size_t> pos{0}, neg{1};
  const auto raw = build_vector(p.params, pos, neg, false);
  CHECK(raw.v[0] == Approx(0.8).epsilon(1e-12));
  CHECK(raw.v[1] == Approx(-0.8).epsilon(1e-12));
  const auto unit = build_vector(p.params, pos, neg, true);
  CHECK(unit.normalized);
  CHECK(unit.v[0] == Approx(0.707107).epsilon(1e-6));
  CHECK(unit.v[1] == Approx(-0.707107).epsilon(1e-6));
  const auto same = build_vector(p.params, pos, pos, true);
  CHECK_FALSE(same.normalized);
  for (double e : same.v) CHECK(e == 0.0);
}

TEST_CASE("steered distribution") {
  const auto p = two_arm_identity();
  const SteeringVector v{{0.8, -0.8}, false};
  const auto s = steered_distribution(p.params, v, 1.0);
  CHECK(s[0] == Approx(0.832018).epsilon(1e-6));
  CHECK(s[1] == Approx(0.167982).epsilon(1e-6));

  const auto q = separable_policy(3);
  const std::vector<std::size_t> pos{1, 3}, neg{0, 2};
  const auto dir = build_vector(q.params, pos, neg, true);
  const auto base = base_distribution(q.params);
  const auto zero = steered_distribution(q.params, dir, 0.0);
  for (std::size_t i = 0; i < base.size(); ++i) CHECK(std::abs(base[i] - zero[i]) <= 1e-15);
}

TEST_CASE("mixture deviation shrinks quadratically") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto q = separable_policy(seed);
    const std::vector<std::size_t> pos{1, 3}, neg{0, 2};
    const auto dir = build_vector(q.params, pos, neg, true);
    const double big = mixture_deviation(q.params, dir, 0.1);
    const double small = mixture_deviation(q.params, dir, 0.05);
    CHECK(big / small >= 3.0);
    CHECK(mixture_deviation(q.params, dir, 0.0) == 0.0);
  }
}

TEST_CASE("steering raises behavior monotonically on the separable instance") {
  const auto rewards = separable_rewards();
  const std::vector<std::size_t> pos{1, 3}, neg{0, 2};
  int positive = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto q = separable_policy(seed);
    const auto dir = build_vector(q.params, pos, neg, true);
    std::vector<double> betas{-0.3, -0.15, 0.0, 0.15, 0.3}, ey;
    for (double b : betas) {
      const auto p = steered_distribution(q.params, dir, b);
      ey.push_back(std::inner_product(p.begin(), p.end(), rewards.behavior().begin(), 0.0));
    }
    if (spearman(betas, ey) > 0.0) ++positive;
  }
  CHECK(positive >= 15);
}

TEST_CASE("rollout groups") {
  const auto rewards = separable_rewards();
  const auto q = separable_policy(4);
  const std::vector<std::size_t> pos{1, 3}, neg{0, 2};
  const auto dir = build_vector(q.params, pos, neg, true);
  IntensitySchedule sched;
  RandomStream a(8), b(8);
  const auto ga = rollout_group(q.params, dir, sched, rewards, a);
  const auto gb = rollout_group(q.params, dir, sched, rewards, b);
  REQUIRE(ga.size() == 5);
  for (std::size_t g = 0; g < ga.size(); ++g) {
    CHECK(ga[g].arm == gb[g].arm);
    CHECK(ga[g].beta == sched.intensities[g]);
    CHECK(ga[g].reward == Approx(rewards.primary()[ga[g].arm] + ga[g].beta).epsilon(1e-15));
  }
  IntensitySchedule plain{{0.0, 0.0, 0.0, 0.0}, 1.0};
  for (const auto& s : rollout_group(q.params, dir, plain, rewards, a)) {
    CHECK(s.reward == rewards.primary()[s.arm]);
  }
}

TEST_CASE("group advantages") {
  const std::vector<double> r{1.0, 0.0};
  const auto a = group_advantages(r);
  CHECK(a[0] == Approx(0.707107).epsilon(1e-6));
  CHECK(a[1] == Approx(-0.707107).epsilon(1e-6));
  const std::vector<double> same{0.4, 0.4, 0.4};
  for (double v : group_advantages(same)) CHECK(v == 0.0);
}

TEST_CASE("surrogate at theta_old") {
  const auto q = separable_policy(2);
  const std::vector<LatentSample> group{{0, 0.0, 1.0}, {1, 0.0, 0.0}, {2, 0.0, 0.5}};
  const std::vector<double> adv{1.0, -1.0, 0.0};
  TrainConfig cfg;
  const auto out = surrogate_loss_and_grad(q.params, q.params, q.reference, group, adv, cfg);
  CHECK(std::abs(out.loss) < 1e-15);
}

TEST_CASE("analytic gradient matches finite differences") {
  RandomStream rng(31);
  double worst = 0.0;
  for (int n = 0; n < 20; ++n) {
    InitOptions init;
    init.hidden_dim = 3 + rng.next_u64() % 4;
    const std::size_t k = 3 + rng.next_u64() % 3;
    const auto policy = random_policy(k, init, rng);
    LatentParams old = policy.params;
    LatentParams params = policy.params;
    for (std::size_t p = 0; p < params.parameter_count(); ++p) params.parameter(p) += rng.uniform(-0.05, 0.05);
    std::vector<LatentSample> group;
    std::vector<double> adv;
    for (int g = 0; g < 5; ++g) {
      group.push_back({rng.next_u64() % k, rng.uniform(-0.3, 0.3), 0.0});
      adv.push_back(rng.uniform(-1.5, 1.5));
    }
    TrainConfig cfg;
    cfg.kl_weight = n % 2 == 0 ? 0.0 : rng.uniform(0.01, 0.5);
    worst = std::max(worst, relative_gradient_error(params, old, policy.reference, group, adv, cfg));
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("training") {
  const auto rewards = separable_rewards();
  const std::vector<std::size_t> pos{1, 3}, neg{0, 2};
  SUBCASE("zero learning rate keeps the policy fixed") {
    const auto q = separable_policy(5);
    const auto dir = build_vector(q.params, pos, neg, true);
    TrainConfig cfg;
    cfg.learning_rate = 0.0;
    cfg.iterations = 20;
    const auto res = train(q, rewards, dir, IntensitySchedule{}, cfg);
    for (const auto& rec : res.trajectory) CHECK(rec.probs == res.trajectory.front().probs);
  }
  SUBCASE("plain GRPO on x does not lose primary reward") {
    std::vector<double> dx;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const auto q = separable_policy(seed);
      const auto dir = build_vector(q.params, pos, neg, true);
      TrainConfig cfg;
      cfg.iterations = 200;
      cfg.seed = seed;
      const auto res = train(q, rewards, dir, IntensitySchedule{{-0.3, -0.15, 0.0, 0.15, 0.3}, 0.0}, cfg);
      dx.push_back(res.trajectory.back().mean_x - res.trajectory.front().mean_x);
    }
    std::nth_element(dx.begin(), dx.begin() + 10, dx.end());
    CHECK(dx[10] >= 0.0);
  }
  SUBCASE("invalid configuration") {
    TrainConfig cfg;
    cfg.iterations = -1;
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
    cfg = TrainConfig{};
    cfg.clip_ratio = -0.1;
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  }
}

TEST_CASE("rank correlations") {
  const std::vector<double> a{1, 2, 3, 4}, b{10, 20, 30, 40}, c{4, 3, 2, 1}, t{1, 1, 2, 2};
  CHECK(spearman(a, b) == Approx(1.0));
  CHECK(spearman(a, c) == Approx(-1.0));
  CHECK(pearson(a, b) == Approx(1.0));
  CHECK(spearman(a, t) == Approx(pearson(std::vector<double>{1, 2, 3, 4}, std::vector<double>{1.5, 1.5, 3.5, 3.5})));
}
