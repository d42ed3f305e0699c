#pragma once

#include "mtavg/bag.hpp"

namespace mtavg {

// Bag CSV format: header `bag_id,f0,...,f{d-1}`, one sample per row, rows
// groupable by bag_id with within-bag order preserved. Values round-trip
// bit-exactly.
std::vector<Bag> load_bags_csv(const std::string& path);
void save_bags_csv(const std::string& path, const std::vector<Bag>& bags);

struct FeatureTransform {
    Eigen::RowVectorXd mean;
    Eigen::RowVectorXd stddev;  // population convention (1/N)
};

// Centers and scales every bag with the pooled (all bags concatenated)
// per-feature mean and standard deviation. Throws, naming the feature, when a
// pooled feature has zero variance.
FeatureTransform standardize(std::vector<Bag>& bags);

// Mean over features of the pooled per-feature standard deviation; the
// default RBF width for the synthetic benchmarks.
double average_feature_stddev(const std::vector<Bag>& bags);

}  // namespace mtavg
