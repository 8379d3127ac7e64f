#pragma once

#include <memory>
#include <vector>

#include "pgddm/data_model.hpp"
#include "pgddm/vocab.hpp"

namespace pgddm {

// Deterministic reward over fully unmasked sequences. A conditioning context
// (the prompt of conditional generation) is bound at construction time when a
// reward needs one; the shipped toy rewards are context-free.
class RewardModel {
  public:
    virtual ~RewardModel() = default;
    virtual double eval(const SequenceState& x0) const = 0;
    // True when eval only takes values {0, 1}; enables success-rate metrics.
    virtual bool indicator() const { return false; }
};

// lambda * (number of occurrences of the target token).
class TokenCountReward : public RewardModel {
  public:
    TokenCountReward(int32_t target, double lambda = 1.0) : target_(target), lambda_(lambda) {}
    double eval(const SequenceState& x0) const override;

  private:
    int32_t target_;
    double lambda_;
};

// 1 when the fixed contiguous pattern occurs anywhere in x0, else 0.
class PatternReward : public RewardModel {
  public:
    explicit PatternReward(std::vector<int32_t> pattern);
    double eval(const SequenceState& x0) const override;
    bool indicator() const override { return true; }

  private:
    std::vector<int32_t> pattern_;
};

// log p_ref(x0) under a reference data model (toy analogue of a fluency /
// perplexity reward).
class LogLikelihoodReward : public RewardModel {
  public:
    explicit LogLikelihoodReward(TabularDataModel ref) : ref_(std::move(ref)) {}
    double eval(const SequenceState& x0) const override { return ref_.log_prob(x0); }

  private:
    TabularDataModel ref_;
};

class ConstantReward : public RewardModel {
  public:
    explicit ConstantReward(double value) : value_(value) {}
    double eval(const SequenceState&) const override { return value_; }

  private:
    double value_;
};

// Checks the fully-unmasked precondition, then evaluates.
double terminal_reward(const RewardModel& model, const Vocab& vocab, const SequenceState& x0);

}  // namespace pgddm
