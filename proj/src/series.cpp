#include "tsfit/series.hpp"

#include "tsfit/errors.hpp"

namespace tsfit {

void RegularSeries::validate() const {
  if (values.rows() < 1 || values.cols() < 1)
    throw DomainError("RegularSeries: need n >= 1 and d >= 1");
  if (!values.allFinite())
    throw DomainError("RegularSeries: non-finite entry");
}

RegularSeries difference(const RegularSeries& series, int order) {
  if (order < 0) throw DomainError("difference: order must be >= 0");
  if (series.n() <= order)
    throw DomainError("difference: series length must exceed the order");
  RegularSeries out = series;
  for (int k = 0; k < order; ++k) {
    const auto m = out.values.rows();
    out.values = (out.values.bottomRows(m - 1) - out.values.topRows(m - 1)).eval();
  }
  return out;
}

RegularSeries integrate(const RegularSeries& series, const Vector& initial, int order) {
  if (order < 1) throw DomainError("integrate: order must be >= 1");
  if (initial.size() != series.d())
    throw DomainError("integrate: initial value dimension mismatch");
  RegularSeries out = series;
  for (int k = 0; k < order; ++k) {
    const auto m = out.values.rows();
    RowMatrix acc(m + 1, out.values.cols());
    acc.row(0) = initial.transpose();
    for (Eigen::Index t = 0; t < m; ++t) acc.row(t + 1) = acc.row(t) + out.values.row(t);
    out.values = std::move(acc);
  }
  return out;
}

}  // namespace tsfit
