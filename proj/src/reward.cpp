#include "pgddm/reward.hpp"

#include <stdexcept>

namespace pgddm {

double TokenCountReward::eval(const SequenceState& x0) const {
    int n = 0;
    for (int32_t t : x0.tokens) n += (t == target_) ? 1 : 0;
    return lambda_ * n;
}

PatternReward::PatternReward(std::vector<int32_t> pattern) : pattern_(std::move(pattern)) {
    if (pattern_.empty()) throw std::invalid_argument("pattern must be non-empty");
}

double PatternReward::eval(const SequenceState& x0) const {
    const size_t n = x0.tokens.size(), m = pattern_.size();
    if (m > n) return 0.0;
    for (size_t i = 0; i + m <= n; ++i) {
        bool hit = true;
        for (size_t j = 0; j < m && hit; ++j) hit = x0.tokens[i + j] == pattern_[j];
        if (hit) return 1.0;
    }
    return 0.0;
}

double terminal_reward(const RewardModel& model, const Vocab& vocab, const SequenceState& x0) {
    if (!fully_unmasked(vocab, x0))
        throw std::invalid_argument("terminal_reward: input must be fully unmasked");
    return model.eval(x0);
}

}  // namespace pgddm
