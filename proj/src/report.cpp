#include "prmf/report.hpp"

#include "prmf/errors.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace prmf {

namespace {

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

std::string opt(const std::optional<double>& x) { return x ? num(*x) : std::string(); }

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw UsageError("cannot write '" + path + "'");
}

// Commas would break the fixed columns.
std::string field(std::string s) {
  for (auto& c : s)
    if (c == ',' || c == '\n') c = ';';
  return s;
}

}  // namespace

std::string report_header() {
  return "dataset,method,seed,d,lambda_u,lambda_v,alpha,beta,gamma,learning_rate,rho,epochs,admm_iters,max_iter,"
         "rmse,mae,sparsity,num_test,cold_start,best_iteration,fingerprint";
}

std::string format_report_row(const ReportRow& r) {
  const auto& p = r.params;
  std::ostringstream o;
  char fp[24];
  std::snprintf(fp, sizeof fp, "%016llx", static_cast<unsigned long long>(r.metrics.fingerprint));
  o << field(r.dataset) << ',' << r.method << ',' << p.seed << ',' << p.d << ',' << num(p.lambda_u) << ','
    << num(p.lambda_v) << ',' << num(p.alpha) << ',' << num(p.beta) << ',' << num(p.gamma) << ','
    << num(p.learning_rate) << ',' << num(p.rho) << ',' << p.epochs << ',' << p.admm_iters << ',' << p.max_iter
    << ',' << num(r.metrics.rmse) << ',' << num(r.metrics.mae) << ',' << num(r.sparsity) << ','
    << r.metrics.num_test_ratings << ',' << r.metrics.cold_start_fallbacks << ',' << r.best_iteration << ',' << fp;
  return o.str();
}

void write_report(const std::string& path, const std::vector<ReportRow>& rows) {
  std::string text = report_header() + "\n";
  for (const auto& r : rows) text += format_report_row(r) + "\n";
  write_text(path, text);
}

void write_timings(const std::string& path, const std::vector<TimingRow>& rows) {
  std::string text = "method,seed,wall_time_s\n";
  for (const auto& r : rows) text += r.method + "," + std::to_string(r.seed) + "," + num(r.seconds) + "\n";
  write_text(path, text);
}

void write_sweep(const std::string& path, const std::vector<SweepRow>& rows) {
  std::string text = "seed,gamma,sparsity,rmse,mae,best_iteration,status\n";
  for (const auto& r : rows) {
    const auto& p = r.point;
    text += std::to_string(r.seed) + "," + num(p.gamma) + ",";
    if (p.error)
      text += ",,,,error: " + field(*p.error) + "\n";
    else
      text += num(p.sparsity) + "," + num(p.rmse) + "," + num(p.mae) + "," + std::to_string(p.best_iteration) + ",ok\n";
  }
  write_text(path, text);
}

void write_sweep_curve(const std::string& path, const std::vector<SweepRow>& rows) {
  struct Acc {
    double sparsity = 0.0, rmse = 0.0;
    int n = 0;
  };
  std::vector<double> order;
  std::map<double, Acc> acc;
  for (const auto& r : rows) {
    if (!acc.contains(r.point.gamma)) order.push_back(r.point.gamma);
    auto& a = acc[r.point.gamma];
    if (r.point.error) continue;
    a.sparsity += r.point.sparsity;
    a.rmse += r.point.rmse;
    ++a.n;
  }
  std::string text = "gamma,sparsity,rmse\n";
  for (double g : order) {
    const auto& a = acc[g];
    text += num(g) + ",";
    text += a.n ? num(a.sparsity / a.n) + "," + num(a.rmse / a.n) + "\n" : ",\n";
  }
  write_text(path, text);
}

void write_trace(const std::string& path, const std::vector<OuterIteration>& trace) {
  std::string text =
      "iteration,objective_before_sgd,objective_after_sgd,validation_rmse,validation_mae,sparsity,nonzeros,"
      "primal_residual,full_objective\n";
  for (const auto& t : trace)
    text += std::to_string(t.iteration) + "," + num(t.objective_before_sgd) + "," + num(t.objective_after_sgd) +
            "," + opt(t.validation_rmse) + "," + opt(t.validation_mae) + "," + num(t.sparsity) + "," +
            std::to_string(t.nonzeros) + "," + num(t.primal_residual) + "," + opt(t.full_objective) + "\n";
  write_text(path, text);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open '" + path + "'");
  std::ostringstream o;
  o << in.rdbuf();
  return o.str();
}

}  // namespace prmf
