#include <doctest.h>

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

TEST_CASE("greedy fills masked positions with the row argmax") {
    const auto rows = make_rows(2, {0.7, 0.3, 0.5, 0.5});
    const SequenceState xt({{kV2.mask_id, 1}});
    const auto cands = decode_candidates(rows, xt, kV2, DecodeMode::greedy, 1, nullptr);
    REQUIRE(cands.size() == 1);
    CHECK(cands[0].x0 == SequenceState({0, 1}));
    CHECK(cands[0].score == doctest::Approx(0.7));
}

TEST_CASE("beam covering the full space returns every completion ranked") {
    const auto rows = make_rows(2, {0.6, 0.4, 0.9, 0.1});
    const SequenceState xt({{kV2.mask_id, kV2.mask_id}});
    const auto cands = decode_candidates(rows, xt, kV2, DecodeMode::beam, 4, nullptr);
    REQUIRE(cands.size() == 4);
    CHECK(cands[0].score >= cands[1].score);
    CHECK(cands[1].score >= cands[2].score);
    CHECK(cands[2].score >= cands[3].score);
    double total = 0.0;
    for (const auto& c : cands) total += c.score;
    CHECK(total == doctest::Approx(1.0));
}

TEST_CASE("beam(2) keeps the top-2 product completions") {
    // rows (0.6, 0.4) and (0.9, 0.1): products 0.54, 0.06, 0.36, 0.04.
    const auto rows = make_rows(2, {0.6, 0.4, 0.9, 0.1});
    const SequenceState xt({{kV2.mask_id, kV2.mask_id}});
    const auto cands = decode_candidates(rows, xt, kV2, DecodeMode::beam, 2, nullptr);
    REQUIRE(cands.size() == 2);
    CHECK(cands[0].x0 == SequenceState({0, 0}));
    CHECK(cands[0].score == doctest::Approx(0.54));
    CHECK(cands[1].x0 == SequenceState({1, 0}));
    CHECK(cands[1].score == doctest::Approx(0.36));
}

TEST_CASE("beam wider than the enumeration truncates to the full space") {
    const auto rows = make_rows(1, {0.6, 0.4});
    const SequenceState xt({{kV2.mask_id}});
    const auto cands = decode_candidates(rows, xt, kV2, DecodeMode::beam, 100, nullptr);
    CHECK(cands.size() == 2);
}

TEST_CASE("phi = 0 is a domain error") {
    const auto rows = make_rows(1, {0.6, 0.4});
    const SequenceState xt({{kV2.mask_id}});
    CHECK_THROWS_AS(decode_candidates(rows, xt, kV2, DecodeMode::beam, 0, nullptr),
                    std::domain_error);
}

TEST_CASE("random mode draws phi iid completions from the rows") {
    const auto rows = make_rows(1, {0.25, 0.75});
    const SequenceState xt({{kV2.mask_id}});
    RngStream rng(8);
    int ones = 0;
    const int n = 40000;
    const auto cands = decode_candidates(rows, xt, kV2, DecodeMode::random, n, &rng);
    REQUIRE(cands.size() == static_cast<size_t>(n));
    for (const auto& c : cands) ones += c.x0.tokens[0] == 1;
    CHECK(std::abs(ones - 0.75 * n) < 3.0 * std::sqrt(0.25 * 0.75 * n));
}

TEST_CASE("fully unmasked input yields the input itself") {
    const auto rows = make_rows(2, {0.5, 0.5, 0.5, 0.5});
    const SequenceState xt({{1, 0}});
    for (auto mode : {DecodeMode::greedy, DecodeMode::beam}) {
        const auto cands = decode_candidates(rows, xt, kV2, mode, 3, nullptr);
        REQUIRE(!cands.empty());
        CHECK(cands[0].x0 == xt);
        CHECK(cands[0].score == doctest::Approx(1.0));
    }
}
