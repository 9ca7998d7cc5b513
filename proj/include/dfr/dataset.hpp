#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dfr/matrix.hpp"

namespace dfr {

// Features plus optional integer labels for one domain. Source datasets
// are always labeled; target labels, when present, are used for
// evaluation only.
struct DomainDataset {
    Matrix features;
    std::optional<std::vector<int>> labels;
    std::string name;

    std::size_t size() const { return features.rows(); }
    std::size_t dim() const { return features.cols(); }
    bool labeled() const { return labels.has_value(); }

    // Highest label + 1; throws DataError when unlabeled.
    std::size_t num_classes() const;
};

}  // namespace dfr
