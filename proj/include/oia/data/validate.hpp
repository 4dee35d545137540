#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "oia/data/annotations.hpp"
#include "oia/data/scene.hpp"
#include "oia/model/config.hpp"

namespace oia {

enum class RecordStatus { Ok, Warning, Error };

struct Validation {
    RecordStatus status = RecordStatus::Ok;
    std::vector<std::string> messages;

    bool usable() const { return status == RecordStatus::Ok; }
};

// Checks channel extents against the config, finiteness and the empty-scene
// policy (N = 0 is skipped with a warning).
Validation validate_record(const SceneRecord& record, const ModelConfig& config);

struct DatasetStats {
    std::size_t scenes = 0;
    std::array<std::size_t, kNumActions> action{};
    std::array<std::size_t, kNumExplanations> explanation{};

    bool operator==(const DatasetStats&) const = default;
};

DatasetStats dataset_stats(std::span<const Annotation> annotations);
DatasetStats dataset_stats(std::span<const SceneRecord> scenes);

}  // namespace oia
