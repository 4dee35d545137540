#pragma once

#include <string>
#include <vector>

#include "oia/model/config.hpp"

namespace oia {

struct GridRow {
    std::string name;
    double lambda = 1.0;
    std::size_t k = 0;
    Ablation ablation = Ablation::Full;
};

std::vector<std::string> grid_names();

// Rows of a named grid; base_k is the profile's default k. Throws
// std::invalid_argument listing the available grids for an unknown name.
std::vector<GridRow> grid_rows(const std::string& name, std::size_t base_k);

}  // namespace oia
