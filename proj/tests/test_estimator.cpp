#include <doctest.h>

#include <cmath>

#include "pgddm/estimator.hpp"
#include "pgddm/oracle.hpp"

using namespace pgddm;

namespace {

struct Fixture {
    TabularDataModel model = TabularDataModel::uniform(Vocab(2), 1);
    TokenCountReward reward{1, 1.0};
    AnalyticDenoiser denoiser{model};
};

}  // namespace

TEST_CASE("fully unmasked states return the terminal reward exactly") {
    Fixture f;
    const SequenceState x({{1}});
    for (auto mode : {EstimatorMode::random, EstimatorMode::beam, EstimatorMode::beam_weighted}) {
        PartialRewardEstimator est{mode, 4, 0.37, nullptr};
        RngStream rng(1);
        uint64_t calls = 0;
        CHECK(estimate_partial_reward(est, f.denoiser, f.reward, f.model.vocab(), x, rng, &calls) ==
              1.0);
        CHECK(calls == 1);
    }
}

TEST_CASE("beam(1) is the greedy estimate") {
    // One masked position, row (0.7, 0.3): greedy completion uses token a,
    // whose reward under count-of-a is 1.
    auto model = TabularDataModel::table(Vocab(2), 1, {0.7, 0.3});
    TokenCountReward reward(0, 1.0);
    AnalyticDenoiser denoiser(model);
    PartialRewardEstimator est{EstimatorMode::beam, 1, 1.0, nullptr};
    RngStream rng(1);
    const SequenceState xt({{model.vocab().mask_id}});
    CHECK(estimate_partial_reward(est, denoiser, reward, model.vocab(), xt, rng) ==
          doctest::Approx(1.0));
}

TEST_CASE("random estimator converges to the exact log-mean-exp") {
    // Uniform over {a,b}^1, r = count(b), beta = 1:
    // exact value log((e^0 + e^1)/2) = 0.620115.
    Fixture f;
    PartialRewardEstimator est{EstimatorMode::random, 100000, 1.0, nullptr};
    RngStream rng(99);
    uint64_t calls = 0;
    const SequenceState xt({{f.model.vocab().mask_id}});
    const double v =
        estimate_partial_reward(est, f.denoiser, f.reward, f.model.vocab(), xt, rng, &calls);
    CHECK(v == doctest::Approx(std::log((1.0 + std::exp(1.0)) / 2.0)).epsilon(1e-2));
    CHECK(calls == 100000);
}

TEST_CASE("beam over the full enumeration uses every completion once") {
    Fixture f;
    PartialRewardEstimator est{EstimatorMode::beam, 64, 1.0, nullptr};
    RngStream rng(4);
    uint64_t calls = 0;
    const SequenceState xt({{f.model.vocab().mask_id}});
    const double v =
        estimate_partial_reward(est, f.denoiser, f.reward, f.model.vocab(), xt, rng, &calls);
    CHECK(calls == 2);  // |V|^1 completions
    CHECK(v == doctest::Approx(std::log((1.0 + std::exp(1.0)) / 2.0)));
}

TEST_CASE("beam-weighted aggregation weights candidates by score") {
    // Rows (0.9, 0.1): weighted value log(0.9 e^0 + 0.1 e^1) vs unweighted
    // log((e^0 + e^1)/2).
    auto model = TabularDataModel::table(Vocab(2), 1, {0.9, 0.1});
    TokenCountReward reward(1, 1.0);
    AnalyticDenoiser denoiser(model);
    const SequenceState xt({{model.vocab().mask_id}});
    RngStream rng(1);
    PartialRewardEstimator weighted{EstimatorMode::beam_weighted, 2, 1.0, nullptr};
    const double vw = estimate_partial_reward(weighted, denoiser, reward, model.vocab(), xt, rng);
    CHECK(vw == doctest::Approx(std::log(0.9 + 0.1 * std::exp(1.0))));
    PartialRewardEstimator unweighted{EstimatorMode::beam, 2, 1.0, nullptr};
    const double vu = estimate_partial_reward(unweighted, denoiser, reward, model.vocab(), xt, rng);
    CHECK(vu == doctest::Approx(std::log((1.0 + std::exp(1.0)) / 2.0)));
}

TEST_CASE("exact mode matches per-call enumeration") {
    auto model = TabularDataModel::markov(Vocab(2), 3, {0.6, 0.4}, {0.7, 0.3, 0.2, 0.8});
    TokenCountReward reward(1, 1.0);
    AnalyticDenoiser denoiser(model);
    const double beta = 0.5;
    ExactPartialRewardTable table(model, reward, beta);
    PartialRewardEstimator est{EstimatorMode::exact, 1, beta, &table};
    const Vocab& v = model.vocab();
    RngStream rng(12);
    for (int trial = 0; trial < 50; ++trial) {
        SequenceState xt(std::vector<int32_t>(3, 0));
        for (auto& t : xt.tokens) {
            const auto u = rng.next_below(3);
            t = u == 2 ? v.mask_id : static_cast<int32_t>(u);
        }
        RngStream erng(1);
        const double via_est = estimate_partial_reward(est, denoiser, reward, v, xt, erng);
        CHECK(via_est == doctest::Approx(exact_partial_reward(model, reward, xt, beta))
                             .epsilon(1e-12));
    }
}

TEST_CASE("incremental log-weight arithmetic") {
    CHECK(incremental_log_weight(0.4, 0.4, 1.0) == 0.0);
    CHECK(incremental_log_weight(0.0, 0.2, 0.1) == doctest::Approx(2.0));
    CHECK_THROWS_AS(incremental_log_weight(0.0, INFINITY, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(incremental_log_weight(0.0, 0.1, 0.0), std::invalid_argument);
}

TEST_CASE("scaling r and beta together leaves log-weights unchanged") {
    RngStream rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        const double r0 = rng.next_double(), r1 = rng.next_double();
        const double beta = 0.1 + rng.next_double();
        // power-of-two scales are exact in floating point
        for (double c : {2.0, 0.5, 8.0})
            CHECK(incremental_log_weight(c * r0, c * r1, c * beta) ==
                  incremental_log_weight(r0, r1, beta));
        CHECK(incremental_log_weight(3.0 * r0, 3.0 * r1, 3.0 * beta) ==
              doctest::Approx(incremental_log_weight(r0, r1, beta)).epsilon(1e-12));
    }
}

TEST_CASE("random-mode error shrinks as phi grows") {
    auto model = TabularDataModel::uniform(Vocab(2), 4);
    TokenCountReward reward(1, 1.0);
    AnalyticDenoiser denoiser(model);
    ExactPartialRewardTable table(model, reward, 1.0);
    const Vocab& v = model.vocab();
    const SequenceState xt({{v.mask_id, v.mask_id, v.mask_id, v.mask_id}});
    const double exact = table.value(xt);
    double mae1 = 0.0, mae64 = 0.0;
    const int trials = 400;
    for (int i = 0; i < trials; ++i) {
        RngStream r1 = derive_stream(77, StreamPurpose::estimate, static_cast<uint64_t>(i), 1);
        RngStream r2 = derive_stream(77, StreamPurpose::estimate, static_cast<uint64_t>(i), 2);
        PartialRewardEstimator e1{EstimatorMode::random, 1, 1.0, nullptr};
        PartialRewardEstimator e64{EstimatorMode::random, 64, 1.0, nullptr};
        mae1 += std::abs(estimate_partial_reward(e1, denoiser, reward, v, xt, r1) - exact);
        mae64 += std::abs(estimate_partial_reward(e64, denoiser, reward, v, xt, r2) - exact);
    }
    CHECK(mae64 / trials < mae1 / trials);
}
