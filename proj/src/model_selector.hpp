#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "data_model.hpp"

namespace buildflex::selector {

// One observation for the classification tree: the day-of-week category plus
// the numeric explanatory features.
struct FeatureRow {
    int category = 0;  // day of week, 0..6
    Eigen::VectorXd numeric;
};

// Numeric schema: [outdoor temp at t, daily mean outdoor temp, solar at t,
// extras...].
FeatureRow explanatory_features(const DayRecord& day, int period);

struct TreeParams {
    int max_depth = 6;
    int min_leaf = 5;
};

// Binary CART with Gini impurity. Numeric nodes test `value < threshold`,
// the categorical node tests day-of-week membership in a set. Growth is
// greedy and deterministic for a given dataset.
class SelectorTree {
  public:
    struct Node {
        bool leaf = true;
        int label = 0;
        int feature = -1;          // numeric index, or -1 for the categorical test
        double threshold = 0.0;    // numeric split
        std::uint32_t category_mask = 0;  // categorical split: left if bit set
        int left = -1, right = -1;
    };

    int period = 0;
    int num_classes = 0;
    double training_accuracy = 0.0;
    std::vector<Node> nodes;

    int predict(const FeatureRow& row) const;
    std::string dump() const;  // indented if/else text

    nlohmann::json to_json() const;
    static SelectorTree from_json(const nlohmann::json& j);
};

SelectorTree train_tree(const std::vector<FeatureRow>& rows, const std::vector<int>& labels,
                        const TreeParams& params, int period = 0);

double tree_accuracy(const SelectorTree& tree, const std::vector<FeatureRow>& rows,
                     const std::vector<int>& labels);

}  // namespace buildflex::selector
