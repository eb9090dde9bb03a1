#pragma once

// Error indicators for comparing reference and approximate trajectories.
// Columns are grouped instance-major: instance i owns columns
// [i * n_t, (i + 1) * n_t). Norms are discrete Euclidean norms.

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace podlrom::eval {

// Mean over instances of ||u - u~|| / ||u||, both norms aggregated over time.
double error_indicator(const Eigen::Ref<const Eigen::MatrixXd>& truth,
                       const Eigen::Ref<const Eigen::MatrixXd>& approx, std::size_t n_test,
                       std::size_t n_t);

// Per-instance terms of error_indicator.
std::vector<double> instance_errors(const Eigen::Ref<const Eigen::MatrixXd>& truth,
                                    const Eigen::Ref<const Eigen::MatrixXd>& approx,
                                    std::size_t n_test, std::size_t n_t);

// Pointwise |u^k - u~^k| / sqrt(mean_k ||u^k||^2) for one instance whose
// trajectories are given as N_h x N_t matrices.
Eigen::VectorXd relative_error_field(const Eigen::Ref<const Eigen::MatrixXd>& truth,
                                     const Eigen::Ref<const Eigen::MatrixXd>& approx, std::size_t k);

struct FieldStats {
  double mean = 0.0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double min = 0.0;
  double max = 0.0;
};

// Quartiles use linear interpolation between order statistics.
FieldStats field_stats(const Eigen::Ref<const Eigen::VectorXd>& values);

struct StepReport {
  std::size_t instance = 0;
  std::size_t step = 0;
  double time = 0.0;
  FieldStats stats;
};

struct ErrorReport {
  double eps_rel = 0.0;
  std::vector<double> per_instance;
  std::vector<StepReport> steps;
};

// `times` holds the sample time of every column (row 0 of a parameter matrix).
ErrorReport error_report(const Eigen::Ref<const Eigen::MatrixXd>& truth,
                         const Eigen::Ref<const Eigen::MatrixXd>& approx,
                         const Eigen::Ref<const Eigen::RowVectorXd>& times, std::size_t n_test,
                         std::size_t n_t);

// Header: instance,step,time,eps_rel_instance,eps_k_mean,eps_k_median,
// eps_k_q1,eps_k_q3,eps_k_min,eps_k_max
std::string error_report_csv(const ErrorReport& report);

}  // namespace podlrom::eval
