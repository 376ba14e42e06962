#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace lingbayes {

// n x p observations (rows) of p variables (columns). `center` and `scale`
// record the column transform applied by standardize(), so that
// original = center + scale * stored.
struct DataMatrix {
  Eigen::MatrixXd values;
  std::vector<std::string> names;
  std::vector<double> center;
  std::vector<double> scale;

  int n() const noexcept { return static_cast<int>(values.rows()); }
  int p() const noexcept { return static_cast<int>(values.cols()); }

  // Throws unless n >= 2, p >= 1 and all entries are finite.
  void validate() const;
};

DataMatrix make_data(Eigen::MatrixXd values);

// Centers every column and scales it to unit sample variance (n - 1
// denominator), composing with any transform already recorded.
void standardize(DataMatrix& data);

// Coefficient of j -> i converted from the stored scale to the original one.
double coefficient_to_original(const DataMatrix& data, int i, int j, double b);

}  // namespace lingbayes
