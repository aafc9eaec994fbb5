#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "attackmap/classifiers.hpp"
#include "attackmap/corpus.hpp"
#include "attackmap/stix.hpp"

namespace attackmap::testing {

/// Root of the checked-in test fixtures.
std::filesystem::path data_dir();
/// Fresh empty directory under the build tree's scratch area.
std::filesystem::path scratch_dir(const std::string& name);

std::shared_ptr<const TechniqueRegistry> registry_of(const std::vector<std::string>& ids);
/// Registry derived from the enterprise mini bundle.
std::shared_ptr<const TechniqueRegistry> attack_registry();
/// The 1,000-row fixture corpus under a registry synthesized from its labels.
LabeledCorpus fixture_corpus();

/// Context with a pass-through vocabulary of `dim` features, for training on
/// hand-built feature vectors.
ModelContext plain_context(std::size_t dim, std::size_t n_classes);
FeatureVector dense_to_sparse(const std::vector<double>& dense);

}  // namespace attackmap::testing
