#include "oia/data/validate.hpp"

namespace oia {

namespace {

void fail(Validation& v, std::string msg) {
    v.status = RecordStatus::Error;
    v.messages.push_back(std::move(msg));
}

}  // namespace

Validation validate_record(const SceneRecord& record, const ModelConfig& config) {
    Validation v;
    const std::string who = "scene '" + record.scene_id + "': ";
    const ag::Shape& b = record.backbone.shape();
    if (b.size() != 3) {
        fail(v, who + "backbone must have rank 3, got " + ag::shape_str(b));
    } else {
        if (b[0] != config.c_backbone) {
            fail(v, who + "c_backbone expected " + std::to_string(config.c_backbone) + ", actual " + std::to_string(b[0]));
        }
        if (b[1] < config.spatial || b[2] < config.spatial) {
            fail(v, who + "backbone " + ag::shape_str(b) + " smaller than pooled size " + std::to_string(config.spatial));
        }
    }
    if (!record.backbone.all_finite()) fail(v, who + "non-finite backbone value");
    for (std::size_t i = 0; i < record.proposals.size(); ++i) {
        const ag::Shape& p = record.proposals[i].shape();
        if (p.size() != 3 || p[0] != config.c_local) {
            fail(v, who + "proposal " + std::to_string(i) + " c_local expected " + std::to_string(config.c_local) +
                        ", actual " + (p.empty() ? "none" : std::to_string(p[0])));
        } else if (p[1] != config.spatial || p[2] != config.spatial) {
            fail(v, who + "proposal " + std::to_string(i) + " spatial expected " + std::to_string(config.spatial) +
                        ", actual " + std::to_string(p[1]) + "x" + std::to_string(p[2]));
        }
        if (!record.proposals[i].all_finite()) fail(v, who + "non-finite value in proposal " + std::to_string(i));
    }
    if (record.single_action >= kNumActions) fail(v, who + "single-action label out of range");
    if (v.status == RecordStatus::Ok && record.proposals.empty()) {
        v.status = RecordStatus::Warning;
        v.messages.push_back(who + "empty scene skipped");
    }
    return v;
}

namespace {

void count(DatasetStats& s, const ActionLabel& a, const ExplanationLabel& e) {
    ++s.scenes;
    for (std::size_t i = 0; i < kNumActions; ++i) s.action[i] += static_cast<std::size_t>(a[i]);
    for (std::size_t i = 0; i < kNumExplanations; ++i) s.explanation[i] += static_cast<std::size_t>(e[i]);
}

}  // namespace

DatasetStats dataset_stats(std::span<const Annotation> annotations) {
    DatasetStats s;
    for (const Annotation& a : annotations) count(s, a.action, a.explanation);
    return s;
}

DatasetStats dataset_stats(std::span<const SceneRecord> scenes) {
    DatasetStats s;
    for (const SceneRecord& r : scenes) count(s, r.action, r.explanation);
    return s;
}

}  // namespace oia
