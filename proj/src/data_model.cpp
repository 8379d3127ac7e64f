#include "pgddm/data_model.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "pgddm/errors.hpp"

namespace pgddm {

namespace {

void check_distribution(std::span<const double> p, const std::string& what) {
    double sum = 0.0;
    for (double x : p) {
        if (!(x >= 0.0)) throw std::invalid_argument(what + ": negative or NaN probability");
        sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw std::invalid_argument(what + ": probabilities sum to " + std::to_string(sum));
}

}  // namespace

TabularDataModel TabularDataModel::table(Vocab v, int length, std::vector<double> probs,
                                         uint64_t cap) {
    if (length < 1) throw std::invalid_argument("length must be positive");
    TabularDataModel m;
    m.vocab_ = v;
    m.length_ = length;
    m.kind_ = Kind::table;
    const uint64_t n = m.num_sequences();
    if (n > cap)
        throw enumeration_cap_error("table model with " + std::to_string(n) +
                                    " sequences exceeds cap " + std::to_string(cap));
    if (probs.size() != n)
        throw std::invalid_argument("table model needs exactly V^L probabilities");
    check_distribution(probs, "data model table");
    m.probs_ = std::move(probs);
    return m;
}

TabularDataModel TabularDataModel::markov(Vocab v, int length, std::vector<double> init,
                                          std::vector<double> trans) {
    if (length < 1) throw std::invalid_argument("length must be positive");
    const size_t V = static_cast<size_t>(v.size);
    if (init.size() != V) throw std::invalid_argument("markov init vector must have V entries");
    if (trans.size() != V * V) throw std::invalid_argument("markov transition must be V*V");
    check_distribution(init, "markov init");
    for (size_t r = 0; r < V; ++r)
        check_distribution(std::span<const double>(trans.data() + r * V, V),
                           "markov transition row " + std::to_string(r));
    TabularDataModel m;
    m.vocab_ = v;
    m.length_ = length;
    m.kind_ = Kind::markov;
    m.init_ = std::move(init);
    m.trans_ = std::move(trans);
    return m;
}

TabularDataModel TabularDataModel::uniform(Vocab v, int length, uint64_t cap) {
    const uint64_t n = pow_u64(static_cast<uint64_t>(v.size), length);
    if (n > cap) throw enumeration_cap_error("uniform model exceeds enumeration cap");
    return table(v, length, std::vector<double>(n, 1.0 / static_cast<double>(n)), cap);
}

TabularDataModel TabularDataModel::from_json(const nlohmann::json& doc, uint64_t cap) {
    for (const auto& [key, _] : doc.items()) {
        if (key != "vocab_size" && key != "length" && key != "kind" && key != "probs")
            throw config_error("data model: unknown key \"" + key + "\"");
    }
    if (!doc.contains("vocab_size") || !doc.contains("length") || !doc.contains("kind") ||
        !doc.contains("probs"))
        throw config_error("data model needs vocab_size, length, kind, probs");
    const int vs = doc.at("vocab_size").get<int>();
    const int length = doc.at("length").get<int>();
    const std::string kind = doc.at("kind").get<std::string>();
    auto probs = doc.at("probs").get<std::vector<double>>();
    Vocab v(vs);
    if (kind == "table") return table(v, length, std::move(probs), cap);
    if (kind == "markov") {
        const size_t V = static_cast<size_t>(vs);
        if (probs.size() != V + V * V)
            throw config_error("markov probs must hold V init entries then V*V transitions");
        std::vector<double> init(probs.begin(), probs.begin() + static_cast<long>(V));
        std::vector<double> trans(probs.begin() + static_cast<long>(V), probs.end());
        return markov(v, length, std::move(init), std::move(trans));
    }
    throw config_error("data model kind must be \"table\" or \"markov\"");
}

nlohmann::json TabularDataModel::to_json() const {
    nlohmann::json doc;
    doc["vocab_size"] = vocab_.size;
    doc["length"] = length_;
    if (kind_ == Kind::table) {
        doc["kind"] = "table";
        doc["probs"] = probs_;
    } else {
        doc["kind"] = "markov";
        std::vector<double> probs = init_;
        probs.insert(probs.end(), trans_.begin(), trans_.end());
        doc["probs"] = probs;
    }
    return doc;
}

double TabularDataModel::prob(const SequenceState& x0) const {
    if (x0.length() != length_) throw std::invalid_argument("sequence length mismatch");
    if (!fully_unmasked(vocab_, x0)) throw std::invalid_argument("prob needs a fully unmasked state");
    if (kind_ == Kind::table) return probs_[sequence_rank(vocab_, x0)];
    const size_t V = static_cast<size_t>(vocab_.size);
    double p = init_[static_cast<size_t>(x0.tokens[0])];
    for (int i = 1; i < length_; ++i)
        p *= trans_[static_cast<size_t>(x0.tokens[i - 1]) * V + static_cast<size_t>(x0.tokens[i])];
    return p;
}

double TabularDataModel::log_prob(const SequenceState& x0) const { return std::log(prob(x0)); }

std::vector<double> TabularDataModel::conditional_marginals(const SequenceState& xt) const {
    if (xt.length() != length_) throw std::invalid_argument("sequence length mismatch");
    check_state(vocab_, xt);
    const size_t V = static_cast<size_t>(vocab_.size);
    const size_t L = static_cast<size_t>(length_);
    std::vector<double> marg(L * V, 0.0);

    if (kind_ == Kind::markov) {
        // Forward-backward over the chain with observed (unmasked) positions
        // pinned. fwd[i][v] sums paths ending at (i, v); bwd[i][v] sums path
        // continuations from (i, v).
        auto allowed = [&](size_t i, size_t v) {
            const int32_t tok = xt.tokens[i];
            return vocab_.is_mask(tok) || static_cast<size_t>(tok) == v;
        };
        std::vector<double> fwd(L * V, 0.0), bwd(L * V, 0.0);
        for (size_t v = 0; v < V; ++v)
            if (allowed(0, v)) fwd[v] = init_[v];
        for (size_t i = 1; i < L; ++i)
            for (size_t v = 0; v < V; ++v) {
                if (!allowed(i, v)) continue;
                double acc = 0.0;
                for (size_t u = 0; u < V; ++u) acc += fwd[(i - 1) * V + u] * trans_[u * V + v];
                fwd[i * V + v] = acc;
            }
        for (size_t v = 0; v < V; ++v) bwd[(L - 1) * V + v] = 1.0;
        for (size_t i = L - 1; i-- > 0;)
            for (size_t v = 0; v < V; ++v) {
                double acc = 0.0;
                for (size_t u = 0; u < V; ++u)
                    if (allowed(i + 1, u)) acc += trans_[v * V + u] * bwd[(i + 1) * V + u];
                bwd[i * V + v] = acc;
            }
        double total = 0.0;
        for (size_t v = 0; v < V; ++v) total += fwd[(L - 1) * V + v];
        if (total <= 0.0) throw zero_support_error("state inconsistent with data model support");
        for (size_t i = 0; i < L; ++i) {
            double row_sum = 0.0;
            for (size_t v = 0; v < V; ++v) {
                marg[i * V + v] = fwd[i * V + v] * bwd[i * V + v];
                row_sum += marg[i * V + v];
            }
            for (size_t v = 0; v < V; ++v) marg[i * V + v] /= row_sum;
        }
    } else {
        // Explicit table: accumulate per-position sums over all consistent
        // completions.
        const uint64_t n = num_sequences();
        double total = 0.0;
        SequenceState x0(std::vector<int32_t>(L, 0));
        for (uint64_t r = 0; r < n; ++r) {
            uint64_t rem = r;
            bool consistent = true;
            for (size_t i = L; i-- > 0;) {
                x0.tokens[i] = static_cast<int32_t>(rem % V);
                rem /= V;
            }
            for (size_t i = 0; i < L && consistent; ++i)
                consistent = vocab_.is_mask(xt.tokens[i]) || xt.tokens[i] == x0.tokens[i];
            if (!consistent) continue;
            const double p = probs_[r];
            total += p;
            for (size_t i = 0; i < L; ++i) marg[i * V + static_cast<size_t>(x0.tokens[i])] += p;
        }
        if (total <= 0.0) throw zero_support_error("state inconsistent with data model support");
        for (auto& x : marg) x /= total;
    }

    // Pin unmasked rows to exact one-hot regardless of rounding.
    for (size_t i = 0; i < L; ++i) {
        const int32_t tok = xt.tokens[i];
        if (vocab_.is_mask(tok)) continue;
        for (size_t v = 0; v < V; ++v) marg[i * V + v] = 0.0;
        marg[i * V + static_cast<size_t>(tok)] = 1.0;
    }
    return marg;
}

std::vector<double> TabularDataModel::expand_table(uint64_t cap) const {
    const uint64_t n = num_sequences();
    if (n > cap)
        throw enumeration_cap_error("expanding " + std::to_string(n) +
                                    " sequences exceeds cap " + std::to_string(cap));
    if (kind_ == Kind::table) return probs_;
    std::vector<double> out(n, 0.0);
    for (uint64_t r = 0; r < n; ++r)
        out[r] = prob(sequence_from_rank(vocab_, length_, r));
    return out;
}

DenoiserOutput analytic_denoiser(const TabularDataModel& model, const SequenceState& xt) {
    DenoiserOutput out;
    out.length = model.length();
    out.vocab_size = model.vocab().size;
    out.probs = model.conditional_marginals(xt);
    return out;
}

DenoiserOutput AnalyticDenoiser::operator()(const SequenceState& xt) const {
    return analytic_denoiser(*model_, xt);
}

}  // namespace pgddm
