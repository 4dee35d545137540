#include "oia/cli/grid.hpp"

#include <stdexcept>

#include "oia/cli/report.hpp"
#include "oia/objectives/loss.hpp"

namespace oia {

std::vector<std::string> grid_names() { return {"lambda-sweep", "branch-ablation", "single-vs-multi"}; }

std::vector<GridRow> grid_rows(const std::string& name, std::size_t base_k) {
    if (name == "lambda-sweep") {
        std::vector<GridRow> rows;
        for (double l : {0.0, 0.01, 0.1, 1.0, kExplanationOnly}) {
            rows.push_back({"lambda=" + format_lambda(l), l, base_k, Ablation::Full});
        }
        return rows;
    }
    if (name == "branch-ablation") {
        return {{"local-only", 1.0, base_k, Ablation::LocalOnly},
                {"global-only", 1.0, base_k, Ablation::GlobalOnly},
                {"random-selector", 1.0, base_k, Ablation::RandomSelector},
                {"top-5", 1.0, 5, Ablation::Full},
                {"top-10", 1.0, 10, Ablation::Full}};
    }
    if (name == "single-vs-multi") {
        return {{"single-action", 1.0, base_k, Ablation::SingleAction}, {"multi-action", 1.0, base_k, Ablation::Full}};
    }
    std::string known;
    for (const auto& g : grid_names()) known += (known.empty() ? "" : ", ") + g;
    throw std::invalid_argument("unknown grid '" + name + "'; available: " + known);
}

}  // namespace oia
