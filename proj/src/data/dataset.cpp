#include "oia/data/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "oia/data/annotations.hpp"
#include "oia/data/feature_file.hpp"
#include "oia/data/synthetic.hpp"
#include "oia/data/validate.hpp"

namespace oia {

std::array<std::vector<std::size_t>, 3> split_indices(std::size_t n, std::uint64_t seed,
                                                      std::array<double, 3> fractions) {
    double total = 0.0;
    for (double f : fractions) {
        if (!(f >= 0.0)) throw std::invalid_argument("split fractions must be >= 0");
        total += f;
    }
    if (total <= 0.0) throw std::invalid_argument("split fractions sum to zero");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    // Rounding guards against 0.7 * 100 = 69.999...
    auto take = [&](double f) {
        return static_cast<std::size_t>(std::floor(static_cast<double>(n) * f / total + 1e-9));
    };
    const std::size_t n_train = std::min(n, take(fractions[0]));
    const std::size_t n_val = std::min(n - n_train, take(fractions[1]));
    std::array<std::vector<std::size_t>, 3> out;
    out[0].assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    out[1].assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                  order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
    out[2].assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), order.end());
    return out;
}

std::filesystem::path feature_path(const std::filesystem::path& dir, const std::string& scene_id) {
    return dir / "features" / (scene_id + ".oiaf");
}

void write_split(const std::filesystem::path& dir, const std::string& split, std::span<const SceneRecord> scenes,
                 std::size_t c_local) {
    std::filesystem::create_directories(dir / "features");
    std::vector<Annotation> ann;
    ann.reserve(scenes.size());
    for (const SceneRecord& r : scenes) {
        save_features(feature_path(dir, r.scene_id), r.backbone, r.proposals, c_local);
        ann.push_back({r.scene_id, r.action, r.explanation});
    }
    save_annotations(dir / (split + ".tsv"), ann);
}

LoadedSplit load_split(const std::filesystem::path& dir, const std::string& split, const ModelConfig& config) {
    LoadedSplit out;
    for (const Annotation& a : load_annotations(dir / (split + ".tsv"))) {
        SceneFeatures f = load_features(feature_path(dir, a.scene_id));
        SceneRecord r;
        r.scene_id = a.scene_id;
        r.backbone = std::move(f.backbone);
        r.proposals = std::move(f.proposals);
        r.action = a.action;
        r.explanation = a.explanation;
        r.single_action = single_action_of(a.action);
        Validation v = validate_record(r, config);
        if (v.status == RecordStatus::Error) throw DataError(v.messages.front());
        if (v.status == RecordStatus::Warning) {
            out.warnings.insert(out.warnings.end(), v.messages.begin(), v.messages.end());
            continue;
        }
        out.scenes.push_back(std::move(r));
    }
    return out;
}

}  // namespace oia
