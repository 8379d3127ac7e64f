#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "pgddm/vocab.hpp"

namespace pgddm {

constexpr uint64_t kEnumerationCap = uint64_t(1) << 20;

// Per-position categorical distributions over real tokens (L x V row-major).
// Rows for unmasked positions are exactly one-hot on the observed token.
struct DenoiserOutput {
    int length = 0;
    int vocab_size = 0;
    std::vector<double> probs;

    std::span<const double> row(int i) const {
        return std::span<const double>(probs.data() + static_cast<size_t>(i) * vocab_size,
                                       static_cast<size_t>(vocab_size));
    }
    std::span<double> row(int i) {
        return std::span<double>(probs.data() + static_cast<size_t>(i) * vocab_size,
                                 static_cast<size_t>(vocab_size));
    }
};

// Exact ground-truth distribution over length-L sequences. Either an explicit
// probability table over all V^L sequences or a first-order Markov chain
// (initial vector + transition matrix), both exactly marginalizable.
class TabularDataModel {
  public:
    enum class Kind { table, markov };

    // An empty model; usable only after assignment from a factory.
    TabularDataModel() = default;

    static TabularDataModel table(Vocab v, int length, std::vector<double> probs,
                                  uint64_t cap = kEnumerationCap);
    static TabularDataModel markov(Vocab v, int length, std::vector<double> init,
                                   std::vector<double> trans);
    static TabularDataModel uniform(Vocab v, int length, uint64_t cap = kEnumerationCap);

    // Document layout: {"vocab_size": V, "length": L, "kind": "table"|"markov",
    // "probs": [...]}. For "table" probs holds the V^L sequence probabilities in
    // row-major (lexicographic) order; for "markov" it holds the V initial
    // probabilities followed by the V*V transition matrix row-major.
    static TabularDataModel from_json(const nlohmann::json& doc, uint64_t cap = kEnumerationCap);
    nlohmann::json to_json() const;

    const Vocab& vocab() const { return vocab_; }
    int length() const { return length_; }
    Kind kind() const { return kind_; }
    uint64_t num_sequences() const { return pow_u64(static_cast<uint64_t>(vocab_.size), length_); }

    double prob(const SequenceState& x0) const;
    double log_prob(const SequenceState& x0) const;

    // Exact conditional marginals p(x0_i = v | x0 agrees with the unmasked
    // positions of xt), L x V row-major; one-hot rows at unmasked positions.
    // Throws zero_support_error when xt is inconsistent with the support.
    std::vector<double> conditional_marginals(const SequenceState& xt) const;

    // Explicit probability table (lexicographic order); expands the Markov
    // representation, subject to the enumeration cap.
    std::vector<double> expand_table(uint64_t cap = kEnumerationCap) const;

  private:
    Vocab vocab_;
    int length_ = 0;
    Kind kind_ = Kind::table;
    std::vector<double> probs_;  // table: V^L; markov: unused
    std::vector<double> init_;   // markov: V
    std::vector<double> trans_;  // markov: V*V row-major
};

// Exact per-position posterior over clean tokens, derived from the data
// model. Plays the role of a perfectly trained denoiser.
class AnalyticDenoiser {
  public:
    explicit AnalyticDenoiser(const TabularDataModel& model) : model_(&model) {}
    DenoiserOutput operator()(const SequenceState& xt) const;
    const TabularDataModel& model() const { return *model_; }

  private:
    const TabularDataModel* model_;
};

DenoiserOutput analytic_denoiser(const TabularDataModel& model, const SequenceState& xt);

}  // namespace pgddm
