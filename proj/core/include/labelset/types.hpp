#pragma once

#include <string>
#include <unordered_map>
#include <vector>

namespace labelset {

using FeatureVector = std::vector<double>;

/// Feature vectors keyed by region id or image id.
using FeatureMap = std::unordered_map<std::string, FeatureVector>;

/// region_id -> owning image_id.
using RegionOwners = std::unordered_map<std::string, std::string>;

}  // namespace labelset
