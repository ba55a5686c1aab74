#pragma once

#include <memory>
#include <string>
#include <vector>

#include "rsplearn/gridworld.hpp"
#include "rsplearn/learner.hpp"
#include "rsplearn/mdp.hpp"
#include "rsplearn/perturbation.hpp"
#include "rsplearn/policy.hpp"

namespace rsplearn {

/// All loaders throw ConfigError on unreadable files, malformed JSON/CSV, or
/// failed domain validation. All savers write deterministically (stable field
/// order, shortest round-trip float formatting).

Mdp loadMdp(const std::string& path);
void saveMdp(const Mdp& mdp, const std::string& path);

std::vector<int> loadDeterministicPolicy(const std::string& path);
void saveDeterministicPolicy(const std::vector<int>& policy, const std::string& path);

std::shared_ptr<FeatureMap> loadFeatureMap(const std::string& path);
void saveFeatureMap(const FeatureMap& features, const std::string& path);

/// Rsp JSON holds "theta" plus either an inline "feature_map" object or a
/// "feature_map" string path resolved relative to the Rsp file's directory.
Rsp loadRsp(const std::string& path);
void saveRsp(const Rsp& rsp, const std::string& path);

/// CSV: a `# seed=<u64>` comment line, a `state,action` header, one pair per row.
SampleSet loadSampleSet(const std::string& path);
void saveSampleSet(const SampleSet& samples, const std::string& path);

GridSpec loadGridSpec(const std::string& path);
void saveGridSpec(const GridSpec& spec, const std::string& path);

/// TrainedPolicy JSON: theta, chosen budget, the per-budget hold-out table,
/// and optimizer diagnostics; the feature map is referenced by path.
void saveTrainedPolicy(const TrainedPolicy& trained, const std::string& featuresPath,
                       const std::string& path);

void saveCertificate(const RegretCertificate& cert, const std::string& path);
/// Aligned human-readable table of the certificate.
std::string renderCertificateTable(const RegretCertificate& cert);

/// Shortest-round-trip decimal rendering used by every CSV writer.
std::string formatDouble(double v);

}  // namespace rsplearn
