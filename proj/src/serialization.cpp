#include "rsplearn/serialization.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "rsplearn/errors.hpp"

namespace rsplearn {

using json = nlohmann::ordered_json;

namespace {

json readJsonFile(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

void writeTextFile(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);  // binary: no newline translation
    if (!out) throw ConfigError("cannot open " + path + " for writing");
    out << text;
    if (!out) throw ConfigError("write to " + path + " failed");
}

void writeJsonFile(const std::string& path, const json& j) {
    writeTextFile(path, j.dump(2) + "\n");
}

// JSON has no literal for non-finite numbers; they round-trip as strings.
json jsonNumber(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

std::vector<double> toDoubleVector(const json& j, const char* what) {
    if (!j.is_array()) throw ConfigError(std::string(what) + " must be an array");
    std::vector<double> out;
    out.reserve(j.size());
    for (const auto& v : j) {
        if (!v.is_number()) throw ConfigError(std::string(what) + " must contain only numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

template <typename Fn>
auto guard(const std::string& path, Fn&& fn) {
    try {
        return fn();
    } catch (const json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

FeatureMap featureMapFromJson(const json& j) {
    FeatureMap fm;
    fm.numStates = j.at("num_states").get<int>();
    fm.numActions = j.at("num_actions").get<int>();
    fm.numFeatures = j.at("num_features").get<int>();
    fm.values = toDoubleVector(j.at("values"), "feature values");
    fm.validate();
    return fm;
}

json featureMapToJson(const FeatureMap& fm) {
    return {{"num_states", fm.numStates},
            {"num_actions", fm.numActions},
            {"num_features", fm.numFeatures},
            {"values", fm.values}};
}

}  // namespace

std::string formatDouble(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;  // 64 bytes always suffice for a shortest double
    return {buf, end};
}

Mdp loadMdp(const std::string& path) {
    return guard(path, [&] {
        json j = readJsonFile(path);
        Mdp mdp;
        mdp.numStates = j.at("num_states").get<int>();
        mdp.numActions = j.at("num_actions").get<int>();
        mdp.transition = toDoubleVector(j.at("transition"), "transition");
        mdp.reward = toDoubleVector(j.at("reward"), "reward");
        mdp.validate();
        return mdp;
    });
}

void saveMdp(const Mdp& mdp, const std::string& path) {
    writeJsonFile(path, {{"num_states", mdp.numStates},
                         {"num_actions", mdp.numActions},
                         {"transition", mdp.transition},
                         {"reward", mdp.reward}});
}

std::vector<int> loadDeterministicPolicy(const std::string& path) {
    return guard(path, [&] {
        json j = readJsonFile(path);
        if (!j.is_array())
            throw ConfigError(path + ": a deterministic policy is a JSON array of actions");
        std::vector<int> actions;
        actions.reserve(j.size());
        for (const auto& v : j) {
            if (!v.is_number_integer())
                throw ConfigError(path + ": actions must be integers");
            actions.push_back(v.get<int>());
        }
        return actions;
    });
}

void saveDeterministicPolicy(const std::vector<int>& policy, const std::string& path) {
    writeJsonFile(path, json(policy));
}

std::shared_ptr<FeatureMap> loadFeatureMap(const std::string& path) {
    return guard(path,
                 [&] { return std::make_shared<FeatureMap>(featureMapFromJson(readJsonFile(path))); });
}

void saveFeatureMap(const FeatureMap& features, const std::string& path) {
    writeJsonFile(path, featureMapToJson(features));
}

Rsp loadRsp(const std::string& path) {
    return guard(path, [&] {
        json j = readJsonFile(path);
        Rsp rsp;
        std::vector<double> theta = toDoubleVector(j.at("theta"), "theta");
        rsp.theta = Eigen::Map<const Eigen::VectorXd>(theta.data(),
                                                      static_cast<Eigen::Index>(theta.size()));
        const auto& fmField = j.at("feature_map");
        if (fmField.is_string()) {
            auto fmPath = std::filesystem::path(path).parent_path() /
                          fmField.get<std::string>();
            rsp.features = loadFeatureMap(fmPath.string());
        } else if (fmField.is_object()) {
            rsp.features = std::make_shared<FeatureMap>(featureMapFromJson(fmField));
        } else {
            throw ConfigError(path + ": feature_map must be an object or a path string");
        }
        if (rsp.theta.size() != rsp.features->numFeatures)
            throw ConfigError(path + ": theta length does not match the feature map");
        return rsp;
    });
}

void saveRsp(const Rsp& rsp, const std::string& path) {
    std::vector<double> theta(rsp.theta.data(), rsp.theta.data() + rsp.theta.size());
    writeJsonFile(path, {{"theta", theta}, {"feature_map", featureMapToJson(*rsp.features)}});
}

SampleSet loadSampleSet(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    SampleSet out;
    std::string line;
    if (!std::getline(in, line) || line.rfind("# seed=", 0) != 0)
        throw ConfigError(path + ": expected a '# seed=<n>' first line");
    try {
        out.seed = std::stoull(line.substr(7));
    } catch (const std::exception&) {
        throw ConfigError(path + ": malformed seed line");
    }
    if (!std::getline(in, line) || line != "state,action")
        throw ConfigError(path + ": expected a 'state,action' header");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::size_t comma = line.find(',');
        if (comma == std::string::npos)
            throw ConfigError(path + ": malformed sample row '" + line + "'");
        try {
            int x = std::stoi(line.substr(0, comma));
            int a = std::stoi(line.substr(comma + 1));
            out.pairs.emplace_back(x, a);
        } catch (const std::exception&) {
            throw ConfigError(path + ": malformed sample row '" + line + "'");
        }
    }
    return out;
}

void saveSampleSet(const SampleSet& samples, const std::string& path) {
    std::ostringstream out;
    out << "# seed=" << samples.seed << "\n";
    out << "state,action\n";
    for (auto [x, a] : samples.pairs) out << x << "," << a << "\n";
    writeTextFile(path, out.str());
}

GridSpec loadGridSpec(const std::string& path) {
    return guard(path, [&] {
        json j = readJsonFile(path);
        GridSpec spec;
        spec.rewardWaypoints.clear();
        spec.featureWaypoints.clear();
        spec.width = j.at("width").get<int>();
        spec.height = j.at("height").get<int>();
        spec.intendedProb = j.at("intended_prob").get<double>();
        spec.slipProb = j.at("slip_prob").get<double>();
        for (const auto& w : j.at("reward_waypoints"))
            spec.rewardWaypoints.push_back(
                {w.at("x").get<int>(), w.at("y").get<int>(), w.at("r").get<double>()});
        for (const auto& w : j.at("feature_waypoints"))
            spec.featureWaypoints.emplace_back(w.at("x").get<int>(), w.at("y").get<int>());
        spec.validate();
        return spec;
    });
}

void saveGridSpec(const GridSpec& spec, const std::string& path) {
    json rw = json::array();
    for (const auto& w : spec.rewardWaypoints)
        rw.push_back({{"x", w.x}, {"y", w.y}, {"r", w.r}});
    json fw = json::array();
    for (const auto& [x, y] : spec.featureWaypoints) fw.push_back({{"x", x}, {"y", y}});
    writeJsonFile(path, {{"width", spec.width},
                         {"height", spec.height},
                         {"intended_prob", spec.intendedProb},
                         {"slip_prob", spec.slipProb},
                         {"reward_waypoints", rw},
                         {"feature_waypoints", fw}});
}

void saveTrainedPolicy(const TrainedPolicy& trained, const std::string& featuresPath,
                       const std::string& path) {
    std::vector<double> theta(trained.rsp.theta.data(),
                              trained.rsp.theta.data() + trained.rsp.theta.size());
    json holdout = json::array();
    for (auto [budget, loss] : trained.perBudgetHoldout)
        holdout.push_back({{"budget", budget}, {"holdout_log_loss", jsonNumber(loss)}});
    json diag = {{"final_objective", trained.diagnostics.finalObjective},
                 {"iterations", trained.diagnostics.iterations},
                 {"projected_gradient_norm", trained.diagnostics.projGradNorm},
                 {"converged", trained.diagnostics.converged}};
    if (!trained.diagnostics.warning.empty()) diag["warning"] = trained.diagnostics.warning;
    writeJsonFile(path, {{"theta", theta},
                         {"feature_map", featuresPath},
                         {"chosen_budget", trained.chosenBudget},
                         {"holdout", holdout},
                         {"diagnostics", diag}});
}

void saveCertificate(const RegretCertificate& cert, const std::string& path) {
    const auto& names = ConditionNumbers::names();
    auto k = cert.kappas.asArray();
    json kappas;
    json bounds;
    for (std::size_t i = 0; i < k.size(); ++i) {
        kappas[names[i]] = jsonNumber(k[i]);
        bounds[names[i]] = jsonNumber(cert.boundPerKappa[i]);
    }
    writeJsonFile(path, {{"kl_term", jsonNumber(cert.klTerm)},
                         {"true_regret", cert.trueRegret},
                         {"estimation_term", cert.estimationTerm},
                         {"perturbation_term", cert.perturbationTerm},
                         {"r_max", cert.rMax},
                         {"kappas", kappas},
                         {"bound_per_kappa", bounds},
                         {"min_kappa", cert.minKappaName},
                         {"min_bound", jsonNumber(cert.minBound)}});
}

std::string renderCertificateTable(const RegretCertificate& cert) {
    std::ostringstream out;
    auto row = [&](const char* label, double v) {
        char buf[96];
        std::snprintf(buf, sizeof(buf), "  %-22s %s\n", label, formatDouble(v).c_str());
        out << buf;
    };
    out << "regret certificate\n";
    row("kl_term", cert.klTerm);
    row("true_regret", cert.trueRegret);
    row("estimation_term", cert.estimationTerm);
    row("perturbation_term", cert.perturbationTerm);
    row("r_max", cert.rMax);
    out << "\n  variant                kappa                  bound\n";
    const auto& names = ConditionNumbers::names();
    auto k = cert.kappas.asArray();
    for (std::size_t i = 0; i < k.size(); ++i) {
        char buf[128];
        std::snprintf(buf, sizeof(buf), "  %-22s %-22s %s\n", names[i],
                      formatDouble(k[i]).c_str(), formatDouble(cert.boundPerKappa[i]).c_str());
        out << buf;
    }
    out << "\n  tightest: " << cert.minKappaName << " with bound " << formatDouble(cert.minBound)
        << "\n";
    return out.str();
}

}  // namespace rsplearn
