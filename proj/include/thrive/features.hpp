#pragma once

#include <istream>
#include <string>
#include <vector>

#include "thrive/biohash.hpp"

namespace thrive::bio {

// CSV feature ingestion: one vector per line, comma-separated decimal
// floats, UTF-8. An optional first line "dim=<k>" pins the expected
// dimension. Blank lines are skipped.
std::vector<FeatureVector> load_features_csv(std::istream& in);
std::vector<FeatureVector> load_features_file(const std::string& path);

}  // namespace thrive::bio
