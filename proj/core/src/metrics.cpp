#include "podlrom/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "podlrom/error.hpp"

namespace podlrom::eval {
namespace {

void check_shapes(const Eigen::Ref<const Eigen::MatrixXd>& truth,
                  const Eigen::Ref<const Eigen::MatrixXd>& approx, std::size_t n_test,
                  std::size_t n_t) {
  if (truth.rows() != approx.rows() || truth.cols() != approx.cols()) {
    throw InvalidArgument("error indicator: shape mismatch (" + std::to_string(truth.rows()) + "x" +
                          std::to_string(truth.cols()) + " vs " + std::to_string(approx.rows()) +
                          "x" + std::to_string(approx.cols()) + ")");
  }
  if (n_test == 0 || n_t == 0) throw InvalidArgument("error indicator: empty test set");
  if (static_cast<std::size_t>(truth.cols()) != n_test * n_t) {
    throw InvalidArgument("error indicator: columns != n_test * n_t");
  }
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10e", v);
  return buf;
}

}  // namespace

std::vector<double> instance_errors(const Eigen::Ref<const Eigen::MatrixXd>& truth,
                                    const Eigen::Ref<const Eigen::MatrixXd>& approx,
                                    std::size_t n_test, std::size_t n_t) {
  check_shapes(truth, approx, n_test, n_t);
  std::vector<double> out(n_test);
  const auto nt = static_cast<Eigen::Index>(n_t);
  for (std::size_t i = 0; i < n_test; ++i) {
    const Eigen::Index first = static_cast<Eigen::Index>(i) * nt;
    const double num = (truth.middleCols(first, nt) - approx.middleCols(first, nt)).squaredNorm();
    const double den = truth.middleCols(first, nt).squaredNorm();
    if (!(den > 0.0)) {
      throw InvalidArgument("error indicator: reference trajectory " + std::to_string(i) + " has zero norm");
    }
    out[i] = std::sqrt(num) / std::sqrt(den);
  }
  return out;
}

double error_indicator(const Eigen::Ref<const Eigen::MatrixXd>& truth,
                       const Eigen::Ref<const Eigen::MatrixXd>& approx, std::size_t n_test,
                       std::size_t n_t) {
  const auto terms = instance_errors(truth, approx, n_test, n_t);
  double sum = 0.0;
  for (double e : terms) sum += e;
  return sum / static_cast<double>(n_test);
}

Eigen::VectorXd relative_error_field(const Eigen::Ref<const Eigen::MatrixXd>& truth,
                                     const Eigen::Ref<const Eigen::MatrixXd>& approx, std::size_t k) {
  if (truth.rows() != approx.rows() || truth.cols() != approx.cols()) {
    throw InvalidArgument("relative_error_field: shape mismatch");
  }
  if (k >= static_cast<std::size_t>(truth.cols())) throw InvalidArgument("relative_error_field: step out of range");
  const double rms = std::sqrt(truth.squaredNorm() / static_cast<double>(truth.cols()));
  if (!(rms > 0.0)) throw InvalidArgument("relative_error_field: reference trajectory has zero norm");
  const auto col = static_cast<Eigen::Index>(k);
  return (truth.col(col) - approx.col(col)).cwiseAbs() / rms;
}

FieldStats field_stats(const Eigen::Ref<const Eigen::VectorXd>& values) {
  if (values.size() == 0) throw InvalidArgument("field_stats: empty field");
  std::vector<double> v(values.data(), values.data() + values.size());
  std::sort(v.begin(), v.end());
  auto quantile = [&](double p) {
    const double pos = p * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
  };
  FieldStats s;
  s.mean = values.mean();
  s.median = quantile(0.5);
  s.q1 = quantile(0.25);
  s.q3 = quantile(0.75);
  s.min = v.front();
  s.max = v.back();
  return s;
}

ErrorReport error_report(const Eigen::Ref<const Eigen::MatrixXd>& truth,
                         const Eigen::Ref<const Eigen::MatrixXd>& approx,
                         const Eigen::Ref<const Eigen::RowVectorXd>& times, std::size_t n_test,
                         std::size_t n_t) {
  ErrorReport report;
  report.per_instance = instance_errors(truth, approx, n_test, n_t);
  double sum = 0.0;
  for (double e : report.per_instance) sum += e;
  report.eps_rel = sum / static_cast<double>(n_test);
  if (times.size() != truth.cols()) throw InvalidArgument("error_report: times do not match columns");

  const auto nt = static_cast<Eigen::Index>(n_t);
  for (std::size_t i = 0; i < n_test; ++i) {
    const Eigen::Index first = static_cast<Eigen::Index>(i) * nt;
    const auto u = truth.middleCols(first, nt);
    const auto ua = approx.middleCols(first, nt);
    for (std::size_t k = 0; k < n_t; ++k) {
      report.steps.push_back({i, k, times[first + static_cast<Eigen::Index>(k)],
                              field_stats(relative_error_field(u, ua, k))});
    }
  }
  return report;
}

std::string error_report_csv(const ErrorReport& report) {
  std::ostringstream out;
  out << "instance,step,time,eps_rel_instance,eps_k_mean,eps_k_median,eps_k_q1,eps_k_q3,eps_k_min,eps_k_max\n";
  for (const auto& s : report.steps) {
    out << s.instance << ',' << s.step << ',' << format_double(s.time) << ','
        << format_double(report.per_instance.at(s.instance)) << ',' << format_double(s.stats.mean)
        << ',' << format_double(s.stats.median) << ',' << format_double(s.stats.q1) << ','
        << format_double(s.stats.q3) << ',' << format_double(s.stats.min) << ','
        << format_double(s.stats.max) << '\n';
  }
  return out.str();
}

}  // namespace podlrom::eval
