#include "model_selector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "common.hpp"

namespace buildflex::selector {

FeatureRow explanatory_features(const DayRecord& day, int period) {
    if (period < 1 || period > day.periods())
        fail(ErrorKind::invalid_argument, "explanatory_features: period out of range");
    const ExplanatoryRecord& er = day.explanatory[period - 1];
    FeatureRow row;
    row.category = static_cast<int>(er.day_of_week);
    row.numeric.resize(3 + static_cast<Eigen::Index>(er.extra.size()));
    row.numeric[0] = er.outdoor_temp_c;
    row.numeric[1] = day.mean_outdoor_temp();
    row.numeric[2] = er.solar_wm2;
    for (std::size_t i = 0; i < er.extra.size(); ++i) row.numeric[3 + static_cast<Eigen::Index>(i)] = er.extra[i];
    return row;
}

namespace {

double gini(const std::vector<int>& counts, int total) {
    if (total == 0) return 0.0;
    double g = 1.0;
    for (int c : counts) {
        double p = static_cast<double>(c) / total;
        g -= p * p;
    }
    return g;
}

int majority(const std::vector<int>& counts) {
    int best = 0;
    for (std::size_t i = 1; i < counts.size(); ++i)
        if (counts[i] > counts[best]) best = static_cast<int>(i);
    return best;
}

struct SplitChoice {
    bool found = false;
    int feature = 0;  // -1 categorical
    double threshold = 0.0;
    std::uint32_t mask = 0;
    double impurity = std::numeric_limits<double>::infinity();
};

struct Builder {
    const std::vector<FeatureRow>& rows;
    const std::vector<int>& labels;
    TreeParams params;
    int num_classes;
    std::vector<SelectorTree::Node> nodes;

    std::vector<int> class_counts(const std::vector<int>& idx) const {
        std::vector<int> counts(num_classes, 0);
        for (int i : idx) ++counts[labels[i]];
        return counts;
    }

    SplitChoice best_split(const std::vector<int>& idx) const {
        SplitChoice best;
        const int n = static_cast<int>(idx.size());
        const int num_features = static_cast<int>(rows[idx[0]].numeric.size());

        // Numeric splits: thresholds at midpoints between consecutive
        // distinct values.
        std::vector<int> order(idx);
        for (int f = 0; f < num_features; ++f) {
            std::sort(order.begin(), order.end(), [&](int a, int b) {
                double va = rows[a].numeric[f], vb = rows[b].numeric[f];
                if (va != vb) return va < vb;
                return a < b;
            });
            std::vector<int> left(num_classes, 0);
            std::vector<int> right = class_counts(order);
            for (int pos = 0; pos + 1 < n; ++pos) {
                int lbl = labels[order[pos]];
                ++left[lbl];
                --right[lbl];
                double v = rows[order[pos]].numeric[f];
                double v_next = rows[order[pos + 1]].numeric[f];
                if (v == v_next) continue;
                int nl = pos + 1, nr = n - nl;
                if (nl < params.min_leaf || nr < params.min_leaf) continue;
                double imp = (nl * gini(left, nl) + nr * gini(right, nr)) / n;
                if (imp < best.impurity - 1e-12) {
                    best.found = true;
                    best.feature = f;
                    best.threshold = 0.5 * (v + v_next);
                    best.impurity = imp;
                }
            }
        }

        // Categorical splits over the categories present at this node; masks
        // keep the lowest present category on the left to skip mirrors.
        std::uint32_t present = 0;
        for (int i : idx) present |= 1u << rows[i].category;
        std::vector<int> cats;
        for (int c = 0; c < 7; ++c)
            if (present & (1u << c)) cats.push_back(c);
        if (cats.size() >= 2) {
            int k = static_cast<int>(cats.size());
            for (std::uint32_t bits = 0; bits < (1u << (k - 1)); ++bits) {
                std::uint32_t mask = 1u << cats[0];
                for (int j = 1; j < k; ++j)
                    if (bits & (1u << (j - 1))) mask |= 1u << cats[j];
                std::vector<int> left(num_classes, 0), right(num_classes, 0);
                int nl = 0, nr = 0;
                for (int i : idx) {
                    if (mask & (1u << rows[i].category)) {
                        ++left[labels[i]];
                        ++nl;
                    } else {
                        ++right[labels[i]];
                        ++nr;
                    }
                }
                if (nl < params.min_leaf || nr < params.min_leaf) continue;
                double imp = (nl * gini(left, nl) + nr * gini(right, nr)) / static_cast<double>(n);
                if (imp < best.impurity - 1e-12) {
                    best.found = true;
                    best.feature = -1;
                    best.mask = mask;
                    best.impurity = imp;
                }
            }
        }
        return best;
    }

    int grow(const std::vector<int>& idx, int depth) {
        std::vector<int> counts = class_counts(idx);
        int node_id = static_cast<int>(nodes.size());
        nodes.emplace_back();
        nodes[node_id].label = majority(counts);

        bool pure = std::count(counts.begin(), counts.end(), 0) == num_classes - 1;
        if (pure || depth >= params.max_depth || static_cast<int>(idx.size()) < 2 * params.min_leaf)
            return node_id;
        SplitChoice split = best_split(idx);
        double parent_impurity = gini(counts, static_cast<int>(idx.size()));
        if (!split.found || split.impurity >= parent_impurity - 1e-12) return node_id;

        std::vector<int> left_idx, right_idx;
        for (int i : idx) {
            bool go_left = split.feature >= 0 ? rows[i].numeric[split.feature] < split.threshold
                                              : (split.mask & (1u << rows[i].category)) != 0;
            (go_left ? left_idx : right_idx).push_back(i);
        }
        nodes[node_id].leaf = false;
        nodes[node_id].feature = split.feature;
        nodes[node_id].threshold = split.threshold;
        nodes[node_id].category_mask = split.mask;
        int l = grow(left_idx, depth + 1);
        int r = grow(right_idx, depth + 1);
        nodes[node_id].left = l;
        nodes[node_id].right = r;
        return node_id;
    }
};

const char* kCatNames[] = {"mon", "tue", "wed", "thu", "fri", "sat", "sun"};
const char* kNumericNames[] = {"outdoor_temp", "daily_mean_outdoor_temp", "solar"};

std::string numeric_name(int f) {
    if (f >= 0 && f < 3) return kNumericNames[f];
    return "extra_" + std::to_string(f - 3);
}

std::string mask_to_string(std::uint32_t mask) {
    std::string s = "{";
    for (int c = 0; c < 7; ++c) {
        if (mask & (1u << c)) {
            if (s.size() > 1) s += ",";
            s += kCatNames[c];
        }
    }
    return s + "}";
}

}  // namespace

SelectorTree train_tree(const std::vector<FeatureRow>& rows, const std::vector<int>& labels,
                        const TreeParams& params, int period) {
    if (rows.empty()) fail(ErrorKind::invalid_argument, "train_tree: empty training set");
    if (rows.size() != labels.size()) fail(ErrorKind::invalid_argument, "train_tree: rows/labels size mismatch");
    if (params.max_depth < 0 || params.min_leaf < 1)
        fail(ErrorKind::invalid_argument, "train_tree: bad parameters");
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (rows[i].numeric.size() != rows[0].numeric.size())
            fail(ErrorKind::invalid_argument, "train_tree: inconsistent feature lengths");

    SelectorTree tree;
    tree.period = period;
    tree.num_classes = *std::max_element(labels.begin(), labels.end()) + 1;

    Builder builder{rows, labels, params, tree.num_classes, {}};
    std::vector<int> idx(rows.size());
    std::iota(idx.begin(), idx.end(), 0);
    builder.grow(idx, 0);
    tree.nodes = std::move(builder.nodes);
    tree.training_accuracy = tree_accuracy(tree, rows, labels);
    return tree;
}

int SelectorTree::predict(const FeatureRow& row) const {
    if (nodes.empty()) fail(ErrorKind::internal, "predict on an empty tree");
    int at = 0;
    while (!nodes[at].leaf) {
        const Node& n = nodes[at];
        bool go_left;
        if (n.feature >= 0) {
            if (n.feature >= row.numeric.size())
                fail(ErrorKind::invalid_argument, "feature row lacks numeric feature " + std::to_string(n.feature));
            go_left = row.numeric[n.feature] < n.threshold;
        } else {
            if (row.category < 0 || row.category > 6)
                fail(ErrorKind::invalid_argument, "feature row has invalid day-of-week category");
            go_left = (n.category_mask & (1u << row.category)) != 0;
        }
        at = go_left ? n.left : n.right;
    }
    return nodes[at].label;
}

double tree_accuracy(const SelectorTree& tree, const std::vector<FeatureRow>& rows,
                     const std::vector<int>& labels) {
    if (rows.empty()) fail(ErrorKind::invalid_argument, "tree_accuracy: empty data");
    if (rows.size() != labels.size()) fail(ErrorKind::invalid_argument, "tree_accuracy: size mismatch");
    int correct = 0;
    for (std::size_t i = 0; i < rows.size(); ++i)
        if (tree.predict(rows[i]) == labels[i]) ++correct;
    return static_cast<double>(correct) / static_cast<double>(rows.size());
}

std::string SelectorTree::dump() const {
    std::ostringstream out;
    auto rec = [&](auto&& self, int at, int depth) -> void {
        std::string indent(static_cast<std::size_t>(depth) * 2, ' ');
        const Node& n = nodes[at];
        if (n.leaf) {
            out << indent << "cluster " << n.label + 1 << "\n";
            return;
        }
        if (n.feature >= 0)
            out << indent << "if " << numeric_name(n.feature) << " < " << format_double(n.threshold) << ":\n";
        else
            out << indent << "if day_of_week in " << mask_to_string(n.category_mask) << ":\n";
        self(self, n.left, depth + 1);
        out << indent << "else:\n";
        self(self, n.right, depth + 1);
    };
    if (!nodes.empty()) rec(rec, 0, 0);
    return out.str();
}

nlohmann::json SelectorTree::to_json() const {
    nlohmann::json j;
    j["period"] = period;
    j["num_classes"] = num_classes;
    j["training_accuracy"] = training_accuracy;
    nlohmann::json arr = nlohmann::json::array();
    for (const Node& n : nodes) {
        arr.push_back({{"leaf", n.leaf},
                       {"label", n.label},
                       {"feature", n.feature},
                       {"threshold", n.threshold},
                       {"category_mask", n.category_mask},
                       {"left", n.left},
                       {"right", n.right}});
    }
    j["nodes"] = std::move(arr);
    return j;
}

SelectorTree SelectorTree::from_json(const nlohmann::json& j) {
    SelectorTree tree;
    tree.period = j.at("period").get<int>();
    tree.num_classes = j.at("num_classes").get<int>();
    tree.training_accuracy = j.at("training_accuracy").get<double>();
    for (const auto& e : j.at("nodes")) {
        SelectorTree::Node n;
        n.leaf = e.at("leaf").get<bool>();
        n.label = e.at("label").get<int>();
        n.feature = e.at("feature").get<int>();
        n.threshold = e.at("threshold").get<double>();
        n.category_mask = e.at("category_mask").get<std::uint32_t>();
        n.left = e.at("left").get<int>();
        n.right = e.at("right").get<int>();
        tree.nodes.push_back(n);
    }
    return tree;
}

}  // namespace buildflex::selector
