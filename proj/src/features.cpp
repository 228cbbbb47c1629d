#include "thrive/features.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace thrive::bio {

std::vector<FeatureVector> load_features_csv(std::istream& in) {
  std::vector<FeatureVector> out;
  std::string line;
  long expected_dim = -1;
  std::size_t line_no = 0;
  bool first_content_line = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos) continue;

    if (first_content_line && line.compare(start, 4, "dim=") == 0) {
      first_content_line = false;
      try {
        expected_dim = std::stol(line.substr(start + 4));
      } catch (const std::exception&) {
        throw std::invalid_argument("features line " + std::to_string(line_no) + ": bad dim header");
      }
      if (expected_dim < 1) {
        throw std::invalid_argument("features line " + std::to_string(line_no) + ": bad dim header");
      }
      continue;
    }
    first_content_line = false;

    std::vector<double> values;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        double v = std::stod(cell, &used);
        while (used < cell.size() && (cell[used] == ' ' || cell[used] == '\t')) ++used;
        if (used != cell.size()) throw std::invalid_argument("trailing garbage");
        values.push_back(v);
      } catch (const std::exception&) {
        throw std::invalid_argument("features line " + std::to_string(line_no) + ": bad number '" +
                                    cell + "'");
      }
    }
    if (values.empty()) {
      throw std::invalid_argument("features line " + std::to_string(line_no) + ": no values");
    }
    if (expected_dim < 0) expected_dim = static_cast<long>(values.size());
    if (static_cast<long>(values.size()) != expected_dim) {
      throw std::invalid_argument("features line " + std::to_string(line_no) + ": expected " +
                                  std::to_string(expected_dim) + " values, got " +
                                  std::to_string(values.size()));
    }
    out.push_back(Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size())));
  }
  if (out.empty()) throw std::invalid_argument("features: file holds no vectors");
  return out;
}

std::vector<FeatureVector> load_features_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("features: cannot open " + path);
  return load_features_csv(in);
}

}  // namespace thrive::bio
