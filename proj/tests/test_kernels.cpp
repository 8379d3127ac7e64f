#include <doctest.h>

#include <cmath>

#include "pgddm/errors.hpp"
#include "pgddm/kernels.hpp"

using namespace pgddm;

namespace {

const Vocab kV2(2);

DenoiserOutput make_rows(int length, std::vector<double> probs) {
    DenoiserOutput out;
    out.length = length;
    out.vocab_size = static_cast<int>(probs.size()) / length;
    out.probs = std::move(probs);
    return out;
}

}  // namespace

TEST_CASE("forward_sample endpoints") {
    const auto sched = NoiseSchedule::linear();
    const SequenceState x0({{0, 1, 1, 0}});
    RngStream rng(1);
    CHECK(forward_sample(x0, 0.0, sched, kV2, rng) == x0);
    const auto all = forward_sample(x0, 1.0, sched, kV2, rng);
    for (auto t : all.tokens) CHECK(t == kV2.mask_id);
}

TEST_CASE("forward_sample rejects masked input") {
    const auto sched = NoiseSchedule::linear();
    SequenceState bad({{0, kV2.mask_id}});
    RngStream rng(1);
    CHECK_THROWS_AS(forward_sample(bad, 0.5, sched, kV2, rng), std::invalid_argument);
}

TEST_CASE("forward_sample masks each position with rate 1 - alpha_t") {
    // Monte-Carlo check of the Bernoulli marginal at t = 0.5 (alpha = 0.5).
    const auto sched = NoiseSchedule::linear();
    const SequenceState x0({{0, 1, 0, 1}});
    const int n = 100000;
    RngStream rng(42);
    int masked[4] = {0, 0, 0, 0};
    for (int i = 0; i < n; ++i) {
        const auto xt = forward_sample(x0, 0.5, sched, kV2, rng);
        for (int j = 0; j < 4; ++j) masked[j] += kV2.is_mask(xt.tokens[static_cast<size_t>(j)]);
    }
    // 3 sigma of Binomial(n, 0.5)
    const double tol = 3.0 * std::sqrt(0.25 * n);
    for (int j = 0; j < 4; ++j) CHECK(std::abs(masked[j] - 0.5 * n) < tol);
}

TEST_CASE("mdlm branch probabilities") {
    SUBCASE("unmasked positions are copied verbatim") {
        const auto p = backward_branch_probs_mdlm({}, 1, kV2, 0.75, 0.5);
        CHECK(p[1] == 1.0);
        CHECK(p[0] == 0.0);
        CHECK(p[2] == 0.0);
    }
    SUBCASE("masked positions unmask with (alpha_s - alpha_t) / (1 - alpha_t)") {
        const std::vector<double> row{0.7, 0.3};
        const auto p = backward_branch_probs_mdlm(row, kV2.mask_id, kV2, 0.75, 0.5);
        CHECK(p[0] == doctest::Approx(0.5 * 0.7));
        CHECK(p[1] == doctest::Approx(0.5 * 0.3));
        CHECK(p[2] == doctest::Approx(0.5));
    }
    SUBCASE("alpha_t == 1 with masked input is a degenerate schedule") {
        const std::vector<double> row{0.5, 0.5};
        CHECK_THROWS_AS(backward_branch_probs_mdlm(row, kV2.mask_id, kV2, 1.0, 1.0),
                        schedule_degeneracy_error);
    }
}

TEST_CASE("backward_step_mdlm endpoint behavior") {
    const auto sched = NoiseSchedule::linear();
    SUBCASE("fully unmasked input is returned unchanged") {
        const SequenceState xt({{0, 1}});
        const auto rows = make_rows(2, {0.5, 0.5, 0.5, 0.5});
        RngStream rng(7);
        CHECK(backward_step_mdlm(rows, xt, 4, 8, sched, kV2, rng) == xt);
    }
    SUBCASE("alpha_s == 1 unmasks everything to the denoiser draw") {
        const SequenceState xt({{kV2.mask_id, kV2.mask_id}});
        const auto rows = make_rows(2, {1.0, 0.0, 0.0, 1.0});  // one-hot a, one-hot b
        RngStream rng(7);
        const auto xs = backward_step_mdlm(rows, xt, 1, 8, sched, kV2, rng);
        CHECK(xs == SequenceState({0, 1}));
    }
    SUBCASE("single masked position unmasks with the Eq rate") {
        // alpha_s = 0.75, alpha_t = 0.5 at t = 4, T = 8; unmask prob = 0.5.
        const auto rows = make_rows(1, {0.5, 0.5});
        const SequenceState xt({{kV2.mask_id}});
        RngStream rng(99);
        const int n = 100000;
        int unmasked = 0;
        for (int i = 0; i < n; ++i) {
            const auto xs = backward_step_mdlm(rows, xt, 4, 8, sched, kV2, rng);
            unmasked += !kV2.is_mask(xs.tokens[0]);
        }
        CHECK(std::abs(unmasked - 0.5 * n) < 3.0 * std::sqrt(0.25 * n));
    }
}

TEST_CASE("remdm branch probabilities") {
    const std::vector<double> row{0.7, 0.3};
    SUBCASE("sigma = 0 equals mdlm exactly") {
        for (int32_t cur : {int32_t(0), int32_t(1), kV2.mask_id}) {
            const auto a = backward_branch_probs_mdlm(row, cur, kV2, 0.75, 0.5);
            const auto b = backward_branch_probs_remdm(row, cur, kV2, 0.75, 0.5, 0.0);
            // bitwise equality expected when the coefficients coincide
            if (kV2.is_mask(cur)) {
                for (size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
            } else {
                // mdlm copies verbatim; remdm redraws from the row, which for a
                // one-hot row is the same thing. For a general row the two
                // kernels only agree when the row is one-hot on cur.
                CHECK(b[static_cast<size_t>(cur)] == row[static_cast<size_t>(cur)]);
                CHECK(b[2] == 0.0);
            }
        }
    }
    SUBCASE("sigma = 1 remasks an unmasked position with certainty") {
        const auto p = backward_branch_probs_remdm(row, 0, kV2, 0.75, 0.5, 1.0);
        CHECK(p[2] == 1.0);
        CHECK(p[0] == 0.0);
    }
    SUBCASE("masked-position mixture coefficients") {
        const double sigma = 0.1, as = 0.75, at = 0.5;
        const auto p = backward_branch_probs_remdm(row, kV2.mask_id, kV2, as, at, sigma);
        const double unmask = (as - (1.0 - sigma) * at) / (1.0 - at);
        CHECK(p[0] == doctest::Approx(unmask * 0.7));
        CHECK(p[2] == doctest::Approx((1.0 - as - sigma * at) / (1.0 - at)));
    }
    SUBCASE("coefficients outside [0,1] raise schedule_validity_error") {
        // sigma above the bound (1 - alpha_s)/alpha_t = 0.5
        CHECK_THROWS_AS(backward_branch_probs_remdm(row, kV2.mask_id, kV2, 0.75, 0.5, 0.9),
                        schedule_validity_error);
    }
}

TEST_CASE("every branch distribution sums to one") {
    // Property over random rows, schedules points and sigma values.
    RngStream rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        const double p0 = rng.next_double();
        const std::vector<double> row{p0, 1.0 - p0};
        double at = 0.05 + 0.9 * rng.next_double();
        double as = at + (1.0 - at) * rng.next_double();
        const double bound = std::min(1.0, (1.0 - as) / at);
        const double sigma = bound * rng.next_double();
        for (int32_t cur : {int32_t(0), int32_t(1), kV2.mask_id}) {
            const auto a = backward_branch_probs_mdlm(row, cur, kV2, as, at);
            const auto b = backward_branch_probs_remdm(row, cur, kV2, as, at, sigma);
            double sa = 0.0, sb = 0.0;
            for (double x : a) {
                CHECK(x >= 0.0);
                sa += x;
            }
            for (double x : b) {
                CHECK(x >= 0.0);
                sb += x;
            }
            CHECK(sa == doctest::Approx(1.0).epsilon(1e-9));
            CHECK(sb == doctest::Approx(1.0).epsilon(1e-9));
        }
    }
}

TEST_CASE("remdm step can remask and mdlm cannot") {
    const auto sched = NoiseSchedule::linear();
    const auto rows = make_rows(1, {1.0, 0.0});
    const SequenceState xt({{0}});
    RngStream rng(5);
    int remasked = 0;
    const auto remask = RemaskSchedule::constant(0.5);
    for (int i = 0; i < 2000; ++i) {
        const auto xs = backward_step_remdm(rows, xt, 6, 8, sched, remask, kV2, rng);
        remasked += kV2.is_mask(xs.tokens[0]);
        CHECK(backward_step_mdlm(rows, xt, 6, 8, sched, kV2, rng) == xt);
    }
    CHECK(remasked > 0);
}

TEST_CASE("remdm keeps a token with probability 1 - sigma under a one-hot row") {
    // sigma = 0.1 at t=6, T=8 (bound (1-0.625)/0.25 = 1.5 so 0.1 is valid).
    const auto sched = NoiseSchedule::linear();
    const auto rows = make_rows(1, {1.0, 0.0});
    const SequenceState xt({{0}});
    const auto remask = RemaskSchedule::constant(0.1);
    RngStream rng(17);
    const int n = 100000;
    int kept = 0;
    for (int i = 0; i < n; ++i) {
        const auto xs = backward_step_remdm(rows, xt, 6, 8, sched, remask, kV2, rng);
        kept += xs.tokens[0] == 0;
    }
    CHECK(std::abs(kept - 0.9 * n) < 3.0 * std::sqrt(0.09 * n));
}

TEST_CASE("transition log-probability matches the branch product") {
    BackwardKernel kernel{Proposal::mdlm, NoiseSchedule::linear(), {}, 8};
    const auto rows = make_rows(2, {0.7, 0.3, 0.2, 0.8});
    const SequenceState xt({{kV2.mask_id, kV2.mask_id}});
    const SequenceState xs({{0, kV2.mask_id}});
    // t=4: unmask prob 0.5
    const double lp = kernel.log_transition_prob(rows, xt, xs, 4, kV2);
    CHECK(std::exp(lp) == doctest::Approx(0.5 * 0.7 * 0.5));
    // impossible move: unmasked token changes under mdlm
    const SequenceState from({{1, kV2.mask_id}});
    CHECK(kernel.log_transition_prob(rows, from, xs, 4, kV2) == -INFINITY);
}
