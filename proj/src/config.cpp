#include "pgddm/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "pgddm/errors.hpp"

namespace pgddm {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, const std::set<std::string>& known,
                         const std::string& where) {
    for (const auto& [key, _] : obj.items())
        if (!known.count(key))
            throw config_error(where + ": unknown key \"" + key + "\"");
}

template <typename T>
T get_or(const json& obj, const std::string& key, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw config_error("/" + key + ": " + e.what());
    }
}

NoiseSchedule parse_schedule(const json& j) {
    if (j.is_string()) return NoiseSchedule::from_name(j.get<std::string>());
    if (j.is_object()) {
        reject_unknown_keys(j, {"kind", "t", "alpha"}, "/sampler/schedule");
        if (get_or<std::string>(j, "kind", "table") != "table")
            throw config_error("/sampler/schedule: object form must have kind \"table\"");
        return NoiseSchedule::table(j.at("t").get<std::vector<double>>(),
                                    j.at("alpha").get<std::vector<double>>());
    }
    throw config_error("/sampler/schedule: expected a name or a table object");
}

RemaskSchedule parse_remask(const json& j) {
    reject_unknown_keys(j, {"kind", "eta", "values"}, "/sampler/remask");
    const std::string kind = get_or<std::string>(j, "kind", "zero");
    if (kind == "zero") return RemaskSchedule::zero();
    if (kind == "constant") return RemaskSchedule::constant(get_or<double>(j, "eta", 0.02));
    if (kind == "max_cap") return RemaskSchedule::max_cap();
    if (kind == "table") return RemaskSchedule::table(j.at("values").get<std::vector<double>>());
    throw config_error("/sampler/remask: unknown kind \"" + kind + "\"");
}

SamplerConfig parse_sampler(const json& j) {
    reject_unknown_keys(j,
                        {"method", "m", "k", "T", "phi", "beta", "resample_every", "proposal",
                         "estimator", "selection", "resample_scheme",
                         "weighted_reference_selection", "seed", "schedule", "remask"},
                        "/sampler");
    SamplerConfig cfg;
    try {
        cfg.method = method_from_name(get_or<std::string>(j, "method", "smc"));
        cfg.m = get_or<int>(j, "m", 1);
        cfg.k = get_or<int>(j, "k", 1);
        cfg.steps = get_or<int>(j, "T", 8);
        cfg.phi = get_or<int>(j, "phi", 1);
        cfg.beta = get_or<double>(j, "beta", 1.0);
        cfg.resample_every = get_or<int>(j, "resample_every", 1);
        cfg.proposal = proposal_from_name(get_or<std::string>(j, "proposal", "mdlm"));
        cfg.estimator = estimator_mode_from_name(get_or<std::string>(j, "estimator", "beam"));
        const std::string sel = get_or<std::string>(j, "selection", "uniform");
        if (sel == "uniform")
            cfg.selection = SelectionRule::uniform;
        else if (sel == "argmax")
            cfg.selection = SelectionRule::argmax_reward;
        else
            throw config_error("/sampler/selection: expected \"uniform\" or \"argmax\"");
        const std::string rs = get_or<std::string>(j, "resample_scheme", "multinomial");
        if (rs == "multinomial")
            cfg.resample_scheme = ResampleScheme::multinomial;
        else if (rs == "systematic")
            cfg.resample_scheme = ResampleScheme::systematic;
        else
            throw config_error("/sampler/resample_scheme: expected \"multinomial\" or \"systematic\"");
        cfg.weighted_reference_selection = get_or<bool>(j, "weighted_reference_selection", false);
        cfg.seed = get_or<uint64_t>(j, "seed", 0);
        if (j.contains("schedule")) cfg.schedule = parse_schedule(j.at("schedule"));
        if (j.contains("remask")) cfg.remask = parse_remask(j.at("remask"));
    } catch (const config_error&) {
        throw;
    } catch (const std::exception& e) {
        throw config_error(std::string("/sampler: ") + e.what());
    }
    return cfg;
}

}  // namespace

std::shared_ptr<const RewardModel> parse_reward(const json& doc, const Vocab& vocab) {
    reject_unknown_keys(doc, {"kind", "target", "lambda", "pattern", "ref_model", "value"},
                        "/scenario/reward");
    const std::string kind = get_or<std::string>(doc, "kind", "");
    try {
        if (kind == "token_count") {
            const int32_t target = doc.at("target").get<int32_t>();
            if (!vocab.is_real(target))
                throw config_error("/scenario/reward/target: token outside vocab");
            return std::make_shared<TokenCountReward>(target, get_or<double>(doc, "lambda", 1.0));
        }
        if (kind == "pattern") {
            const auto pattern = doc.at("pattern").get<std::vector<int32_t>>();
            for (int32_t t : pattern)
                if (!vocab.is_real(t))
                    throw config_error("/scenario/reward/pattern: token outside vocab");
            return std::make_shared<PatternReward>(pattern);
        }
        if (kind == "log_likelihood")
            return std::make_shared<LogLikelihoodReward>(
                TabularDataModel::from_json(doc.at("ref_model")));
        if (kind == "constant")
            return std::make_shared<ConstantReward>(doc.at("value").get<double>());
    } catch (const config_error&) {
        throw;
    } catch (const std::exception& e) {
        throw config_error(std::string("/scenario/reward: ") + e.what());
    }
    throw config_error("/scenario/reward/kind: expected token_count, pattern, log_likelihood or "
                       "constant");
}

RunConfig parse_config(const json& doc) {
    reject_unknown_keys(doc, {"schema", "scenario", "sampler", "replications", "sweep", "output"},
                        "config");
    const std::string schema = get_or<std::string>(doc, "schema", "");
    if (schema != "pgddm-config/v1")
        throw config_error("/schema: expected \"pgddm-config/v1\", got \"" + schema + "\"");
    if (!doc.contains("scenario") || !doc.contains("sampler"))
        throw config_error("config needs /scenario and /sampler sections");

    RunConfig cfg;
    const json& sc = doc.at("scenario");
    reject_unknown_keys(sc, {"data_model", "reward", "oracle"}, "/scenario");
    if (!sc.contains("data_model") || !sc.contains("reward"))
        throw config_error("/scenario needs data_model and reward");
    try {
        cfg.scenario.model = TabularDataModel::from_json(sc.at("data_model"));
    } catch (const config_error&) {
        throw;
    } catch (const std::exception& e) {
        throw config_error(std::string("/scenario/data_model: ") + e.what());
    }
    cfg.scenario.reward = parse_reward(sc.at("reward"), cfg.scenario.model.vocab());
    cfg.scenario.oracle = get_or<bool>(sc, "oracle", true);

    cfg.sampler = parse_sampler(doc.at("sampler"));
    cfg.replications = get_or<int>(doc, "replications", 1);
    if (cfg.replications < 1) throw config_error("/replications: must be >= 1");

    if (doc.contains("output")) {
        const json& out = doc.at("output");
        reject_unknown_keys(out, {"prefix"}, "/output");
        cfg.output_prefix = get_or<std::string>(out, "prefix", "run");
    }

    if (doc.contains("sweep")) {
        cfg.has_sweep = true;
        const json& sw = doc.at("sweep");
        reject_unknown_keys(sw, {"method", "m", "k", "T", "phi", "proposal", "estimator"},
                            "/sweep");
        auto strings = [&](const char* key, std::vector<std::string> fallback) {
            return sw.contains(key) ? sw.at(key).get<std::vector<std::string>>() : fallback;
        };
        auto ints = [&](const char* key, std::vector<int> fallback) {
            return sw.contains(key) ? sw.at(key).get<std::vector<int>>() : fallback;
        };
        const auto methods = strings("method", {method_name(cfg.sampler.method)});
        const auto ms = ints("m", {cfg.sampler.m});
        const auto ks = ints("k", {cfg.sampler.k});
        const auto Ts = ints("T", {cfg.sampler.steps});
        const auto phis = ints("phi", {cfg.sampler.phi});
        const auto proposals = strings("proposal", {proposal_name(cfg.sampler.proposal)});
        const auto estimators = strings("estimator", {estimator_mode_name(cfg.sampler.estimator)});
        for (const auto& method : methods)
            for (int m : ms)
                for (int k : ks)
                    for (int T : Ts)
                        for (int phi : phis)
                            for (const auto& prop : proposals)
                                for (const auto& est : estimators) {
                                    SamplerConfig cell = cfg.sampler;
                                    cell.method = method_from_name(method);
                                    cell.m = m;
                                    cell.k = k;
                                    cell.steps = T;
                                    cell.phi = phi;
                                    cell.proposal = proposal_from_name(prop);
                                    cell.estimator = estimator_mode_from_name(est);
                                    cfg.sweep_cells.push_back(cell);
                                }
    }
    return cfg;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        // Translate the byte offset into a line number for the message.
        size_t line = 1;
        for (size_t i = 0; i < std::min(e.byte, text.size()); ++i)
            if (text[i] == '\n') ++line;
        throw config_error(path + ":" + std::to_string(line) + ": " + e.what());
    }
    try {
        return parse_config(doc);
    } catch (const config_error& e) {
        throw config_error(path + ": " + e.what());
    }
}

}  // namespace pgddm
