#include <cmath>
#include <filesystem>
#include <limits>

#include "doctest.h"
#include "pcgswarm/mappo.hpp"
#include "support/gradcheck.hpp"
#include "support/oracles.hpp"

using namespace pcgswarm;

namespace {

PPOConfig tiny_ppo() {
  PPOConfig p;
  p.hidden = 16;
  p.num_envs = 4;
  p.rollout_len = 16;
  p.total_steps = 2048;
  p.minibatches = 2;
  p.epochs = 2;
  return p;
}

EnvConfig tiny_env(int agents = 1) {
  EnvConfig e;
  e.max_width = 5;
  e.n_agents = agents;
  return e;
}

}  // namespace

TEST_SUITE("mappo") {
  TEST_CASE("feature size") {
    CHECK(feature_size(Domain::Binary, 3, 1) == 9 * 4);
    CHECK(feature_size(Domain::Dungeon, 5, 3) == 25 * 10);
  }

  TEST_CASE("encoding is one-hot per cell plus masks") {
    EnvConfig e = tiny_env(2);
    const auto s = reset_state(e, 3);
    const auto obs = observe(s, 0, e);
    const auto x = encode_observation(obs, e.domain);
    REQUIRE(x.size() == feature_size(e.domain, 3, 2));
    for (int cell = 0; cell < 9; ++cell) {
      const auto block = x.segment(cell * 5, 5);
      CHECK(block.head(3).sum() == 1.0);
      CHECK(block(3) == obs.mask(cell / 3, cell % 3, 0));
      CHECK(block(4) == obs.mask(cell / 3, cell % 3, 1));
    }
  }

  TEST_CASE("forward pass is a distribution with bounded entropy") {
    RngStream rng(2);
    const auto p = PolicyParams::init(20, 8, 6, rng);
    for (int t = 0; t < 20; ++t) {
      Eigen::VectorXd x = Eigen::VectorXd::NullaryExpr(20, [&] { return rng.uniform01(); });
      const auto out = policy_forward(p, x);
      CHECK(out.probs.sum() == doctest::Approx(1.0).epsilon(1e-12));
      const double h = -(out.probs.array() * out.log_probs.array()).sum();
      CHECK(h <= std::log(6.0) + 1e-12);
    }
    PolicyParams zero(20, 8, 6);
    const auto u = policy_forward(zero, Eigen::VectorXd::Ones(20));
    const double h = -(u.probs.array() * u.log_probs.array()).sum();
    CHECK(h == doctest::Approx(std::log(6.0)).epsilon(1e-12));
    CHECK_THROWS_AS(policy_forward(zero, Eigen::VectorXd::Ones(19)), std::invalid_argument);
  }

  TEST_CASE("batch forward agrees with single forward") {
    RngStream rng(6);
    const auto p = PolicyParams::init(12, 5, 4, rng);
    Eigen::MatrixXd x = Eigen::MatrixXd::NullaryExpr(12, 7, [&] { return rng.uniform01() - 0.5; });
    const auto b = policy_forward_batch(p, x);
    for (int i = 0; i < 7; ++i) {
      const auto s = policy_forward(p, x.col(i));
      CHECK((b.log_probs.col(i) - s.log_probs).cwiseAbs().maxCoeff() < 1e-12);
      CHECK(std::abs(b.values(i) - s.value) < 1e-12);
    }
  }

  TEST_CASE("sample_action follows the distribution") {
    RngStream rng(8);
    Eigen::VectorXd probs(3);
    probs << 0.2, 0.5, 0.3;
    std::array<int, 3> h{};
    for (int i = 0; i < 20000; ++i) ++h[static_cast<std::size_t>(sample_action(probs, rng))];
    CHECK(h[0] / 20000.0 == doctest::Approx(0.2).epsilon(0.05));
    CHECK(h[1] / 20000.0 == doctest::Approx(0.5).epsilon(0.05));
  }

  TEST_CASE("gae matches the double-loop oracle") {
    RngStream rng(10);
    for (int trial = 0; trial < 50; ++trial) {
      const std::size_t n = 1 + rng.uniform_below(64);
      std::vector<double> r(n), v(n + 1);
      std::vector<std::uint8_t> d(n);
      for (auto& x : r) x = rng.uniform01() * 4 - 2;
      for (auto& x : v) x = rng.uniform01() * 4 - 2;
      for (auto& x : d) x = rng.bernoulli(0.1);
      const auto a = gae(r, v, d, 0.99, 0.95);
      const auto o = oracle::gae_double_loop(r, v, d, 0.99, 0.95);
      for (std::size_t t = 0; t < n; ++t) REQUIRE(std::abs(a[t] - o[t]) < 1e-10);
    }
  }

  TEST_CASE("analytic gradient matches finite differences") {
    RngStream rng(12);
    PPOConfig cfg;
    int regenerated = 0;
    for (int trial = 0; trial < 5; ++trial) {
      const auto problem = gradcheck::make_problem(rng, cfg, 12, 6, regenerated);
      const auto rep = gradcheck::check(problem, cfg);
      INFO("worst block " << rep.worst_block);
      CHECK(rep.max_rel_error < 1e-5);
      CHECK(rep.per_block.size() == 8);
    }
  }

  TEST_CASE("gradient check also holds with entropy and value terms off") {
    RngStream rng(13);
    PPOConfig cfg;
    cfg.entropy_coef = 0.0;
    int regenerated = 0;
    const auto problem = gradcheck::make_problem(rng, cfg, 10, 5, regenerated);
    CHECK(gradcheck::check(problem, cfg).max_rel_error < 1e-5);
  }

  TEST_CASE("advantage scale does not change the update direction") {
    RngStream rng(14);
    PPOConfig cfg;
    cfg.entropy_coef = 0.0;
    cfg.value_coef = 0.0;
    int regenerated = 0;
    auto problem = gradcheck::make_problem(rng, cfg, 16, 6, regenerated);
    Eigen::VectorXd g1, g2;
    ppo_objective(problem.params, problem.features, problem.actions, problem.old_log_probs, problem.advantages,
                  problem.returns, cfg, &g1);
    for (auto& a : problem.advantages) a *= 3.0;
    ppo_objective(problem.params, problem.features, problem.actions, problem.old_log_probs, problem.advantages,
                  problem.returns, cfg, &g2);
    Eigen::Index i1 = 0, i2 = 0;
    g1.cwiseAbs().maxCoeff(&i1);
    g2.cwiseAbs().maxCoeff(&i2);
    CHECK(i1 == i2);
    CHECK((g2 - 3.0 * g1).norm() < 1e-10 * g2.norm());
  }

  TEST_CASE("softmax is shift invariant") {
    RngStream rng(21);
    auto p = PolicyParams::init(10, 6, 5, rng);
    const Eigen::VectorXd x = Eigen::VectorXd::NullaryExpr(10, [&] { return rng.uniform01(); });
    const auto before = policy_forward(p, x);
    p.actor_b2().array() += 3.25;
    const auto after = policy_forward(p, x);
    CHECK((before.probs - after.probs).cwiseAbs().maxCoeff() < 1e-12);
  }

  TEST_CASE("gae special cases") {
    const std::vector<double> r{1.0, -2.0, 0.5, 3.0};
    const std::vector<double> v{0.3, 0.1, -0.4, 0.9, 1.7};
    const std::vector<std::uint8_t> none(4, 0);
    const auto a0 = gae(r, v, none, 0.9, 0.0);
    for (std::size_t t = 0; t < 4; ++t) CHECK(a0[t] == doctest::Approx(r[t] + 0.9 * v[t + 1] - v[t]).epsilon(1e-14));
    std::vector<std::uint8_t> last(4, 0);
    last[3] = 1;
    const auto a1 = gae(r, v, last, 1.0, 1.0);
    double tail = 0.0;
    for (std::size_t t = 4; t-- > 0;) {
      tail += r[t];
      CHECK(a1[t] == doctest::Approx(tail - v[t]).epsilon(1e-14));
    }
    CHECK_THROWS_AS(gae(r, std::vector<double>(4, 0.0), none, 0.9, 0.9), std::invalid_argument);
  }

  TEST_CASE("on-policy batch with zero learning rate") {
    EnvConfig e = tiny_env(2);
    RngStream rng(31);
    const int input = feature_size(e.domain, 3, 2);
    auto params = PolicyParams::init(input, 8, 6, rng);
    Batch batch{e.domain, 3, 2, {}, {}, {}, {}, {}, {}};
    auto s = reset_state(e, 4);
    for (int t = 0; t < 32; ++t) {
      const auto obs = observe_all(s, e);
      for (const auto& o : obs) {
        const auto out = policy_forward(params, encode_observation(o, e.domain));
        const int a = sample_action(out.probs, rng);
        batch.observations.push_back(o);
        batch.actions.push_back(a);
        batch.log_probs.push_back(out.log_probs(a));
        batch.values.push_back(out.value);
        batch.advantages.push_back(rng.uniform01() - 0.3);
        batch.returns.push_back(rng.uniform01());
      }
      advance(s, learned_joint_action(params, s, e, rng), e);
    }
    Eigen::MatrixXd x(input, static_cast<Eigen::Index>(batch.size()));
    for (std::size_t i = 0; i < batch.size(); ++i) x.col(static_cast<Eigen::Index>(i)) = encode_observation(batch.observations[i], e.domain);
    PPOConfig cfg;
    const auto terms = ppo_objective(params, x, batch.actions, batch.log_probs, batch.advantages, batch.returns, cfg, nullptr);
    double mean_adv = 0.0;
    for (double a : batch.advantages) mean_adv += a / static_cast<double>(batch.size());
    CHECK(terms.surrogate == doctest::Approx(mean_adv).epsilon(1e-12));
    CHECK(terms.clip_fraction == 0.0);

    cfg.lr = 0.0;
    AdamState adam;
    const auto before = params;
    const auto stats = ppo_update(params, adam, batch, cfg, rng);
    CHECK(params == before);
    REQUIRE(stats.epochs.size() == static_cast<std::size_t>(cfg.epochs));
    for (const auto& ep : stats.epochs) CHECK(ep.terms.clip_fraction == 0.0);
  }

  TEST_CASE("non-finite gradient is rejected with its block") {
    EnvConfig e = tiny_env();
    RngStream rng(41);
    auto params = PolicyParams::init(feature_size(e.domain, 3, 1), 4, 6, rng);
    params.critic_b2()(0) = std::numeric_limits<double>::infinity();
    Batch batch{e.domain, 3, 1, {}, {}, {}, {}, {}, {}};
    const auto s = reset_state(e, 1);
    for (int i = 0; i < 8; ++i) {
      batch.observations.push_back(observe(s, 0, e));
      batch.actions.push_back(i % 6);
      batch.log_probs.push_back(std::log(1.0 / 6));
      batch.values.push_back(0.0);
      batch.advantages.push_back(i - 3.5);
      batch.returns.push_back(1.0);
    }
    AdamState adam;
    CHECK_THROWS_WITH_AS(ppo_update(params, adam, batch, PPOConfig{}, rng), doctest::Contains("critic"),
                         std::runtime_error);
  }

  TEST_CASE("ppo config validation") {
    PPOConfig p;
    CHECK_NOTHROW(p.validate());
    p.total_steps = 1001;
    CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("ppo."), std::invalid_argument);
    p = PPOConfig{};
    p.clip = 0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  }

  TEST_CASE("training is deterministic and logs on schedule") {
    TrainOptions opts;
    opts.log_interval = 256;
    int callbacks = 0;
    opts.on_record = [&](const TrainRecord&) { ++callbacks; };
    const auto a = train(tiny_env(2), tiny_ppo(), 5, opts);
    opts.on_record = nullptr;
    opts.threads = 3;
    const auto b = train(tiny_env(2), tiny_ppo(), 5, opts);
    CHECK(a.curve.size() == 2048 / 256);
    CHECK(callbacks == 8);
    CHECK(a.params == b.params);
    CHECK(curve_to_csv(a.curve) == curve_to_csv(b.curve));
    CHECK(a.curve.back().step == 2048);
    const auto c = train(tiny_env(2), tiny_ppo(), 6, opts);
    CHECK_FALSE(a.params == c.params);
  }

  TEST_CASE("checkpoint round trip") {
    const auto r = train(tiny_env(), tiny_ppo(), 1);
    Checkpoint ck{tiny_env(), tiny_ppo(), r.params, r.adam, r.rng};
    const auto path = (std::filesystem::temp_directory_path() / "pcgswarm_test_ckpt.json").string();
    save_checkpoint(path, ck);
    const auto back = load_checkpoint(path);
    CHECK(back.params == ck.params);
    CHECK(back.env == ck.env);
    CHECK(back.ppo == ck.ppo);
    CHECK(back.adam.t == ck.adam.t);
    CHECK(back.adam.m == ck.adam.m);
    CHECK(back.rng == ck.rng);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_checkpoint(path), std::runtime_error);
  }

  TEST_CASE("agents share one parameter snapshot") {
    EnvConfig e = tiny_env(3);
    RngStream rng(3);
    const auto p = PolicyParams::init(feature_size(e.domain, 3, 3), 8, 6, rng);
    auto s = reset_state(e, 2);
    s.positions = {{2, 2}, {2, 2}, {2, 2}};
    for (int i = 0; i < s.grid.size(); ++i) s.grid.put(i, Tile::Air);
    // Identical observations (after mask rotation) give identical distributions.
    const auto o0 = encode_observation(observe(s, 0, e), e.domain);
    const auto o2 = encode_observation(observe(s, 2, e), e.domain);
    CHECK(o0 == o2);
    CHECK(policy_forward(p, o0).probs == policy_forward(p, o2).probs);
    RngStream a(1), b(1);
    CHECK(learned_joint_action(p, s, e, a) == learned_joint_action(p, s, e, b));
  }
}
