#pragma once

#include "prmf/evaluation.hpp"
#include "prmf/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace prmf {

// One trained-and-evaluated run. Column order of the CSV is fixed:
// dataset,method,seed,d,lambda_u,lambda_v,alpha,beta,gamma,learning_rate,rho,
// epochs,admm_iters,max_iter,rmse,mae,sparsity,num_test,cold_start,best_iteration,fingerprint
struct ReportRow {
  std::string dataset;
  std::string method;
  HyperParams params;
  MetricReport metrics;
  double sparsity = 0.0;
  int best_iteration = 0;
};

std::string report_header();
std::string format_report_row(const ReportRow& row);
void write_report(const std::string& path, const std::vector<ReportRow>& rows);

// Wall time is kept out of the report so reports stay byte-reproducible.
struct TimingRow {
  std::string method;
  std::uint64_t seed = 0;
  double seconds = 0.0;
};
void write_timings(const std::string& path, const std::vector<TimingRow>& rows);

// seed,gamma,sparsity,rmse,mae,best_iteration,status
struct SweepRow {
  std::uint64_t seed = 0;
  SweepPoint point;
};
void write_sweep(const std::string& path, const std::vector<SweepRow>& rows);
// gamma,sparsity,rmse averaged over seeds (successful runs only).
void write_sweep_curve(const std::string& path, const std::vector<SweepRow>& rows);

// iteration,objective_before_sgd,objective_after_sgd,validation_rmse,validation_mae,sparsity,nonzeros,
// primal_residual,full_objective
void write_trace(const std::string& path, const std::vector<OuterIteration>& trace);

std::string read_file(const std::string& path);

}  // namespace prmf
