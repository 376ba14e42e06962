#include "lingbayes/data.hpp"

#include <cmath>

#include <fmt/format.h>

#include "lingbayes/error.hpp"

namespace lingbayes {

void DataMatrix::validate() const {
  if (n() < 2) fail(ErrorCode::InvalidArgument, fmt::format("need at least 2 observations, got {}", n()));
  if (p() < 1) fail(ErrorCode::InvalidArgument, "need at least one variable");
  if (!values.allFinite()) fail(ErrorCode::MissingValue, "data contain non-finite entries");
  if (center.size() != static_cast<std::size_t>(p()) || scale.size() != static_cast<std::size_t>(p())) {
    fail(ErrorCode::DimensionMismatch, "column transform does not match the column count");
  }
}

DataMatrix make_data(Eigen::MatrixXd values) {
  DataMatrix d;
  const auto p = static_cast<std::size_t>(values.cols());
  d.values = std::move(values);
  d.center.assign(p, 0.0);
  d.scale.assign(p, 1.0);
  for (std::size_t j = 0; j < p; ++j) d.names.push_back(fmt::format("x{}", j + 1));
  return d;
}

void standardize(DataMatrix& data) {
  data.validate();
  const double n = data.n();
  for (int j = 0; j < data.p(); ++j) {
    auto col = data.values.col(j);
    const double mean = col.mean();
    col.array() -= mean;
    const double sd = std::sqrt(col.squaredNorm() / (n - 1.0));
    if (!(sd > 0.0)) fail(ErrorCode::InvalidArgument, fmt::format("column {} is constant", data.names[static_cast<std::size_t>(j)]));
    col /= sd;
    const auto jj = static_cast<std::size_t>(j);
    data.center[jj] += data.scale[jj] * mean;
    data.scale[jj] *= sd;
  }
}

double coefficient_to_original(const DataMatrix& data, int i, int j, double b) {
  return b * data.scale[static_cast<std::size_t>(i)] / data.scale[static_cast<std::size_t>(j)];
}

}  // namespace lingbayes
