#pragma once

#include "prep/nerf_dataset.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace prep {

struct ValidationReport {
    bool pass = true;
    std::vector<std::string> violations;
};

/// Re-reads an emitted dataset directory and re-checks it: rotation blocks
/// orthonormal with det +1 (1e-6), referenced frame files present, LLFF
/// bounds positive and ordered. With no flavor given, every dataset file
/// found in the directory is checked.
ValidationReport validate_dataset(const std::filesystem::path& dataset_dir,
                                  std::optional<DatasetFlavor> flavor = std::nullopt);

}  // namespace prep
