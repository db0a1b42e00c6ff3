#include "clipfl/run_record.hpp"

#include "recorder.hpp"

#include <cmath>

namespace clipfl {

std::string to_string(RunStatus status) {
  return status == RunStatus::kFinished ? "finished" : "diverged";
}

namespace detail {

Recorder::Recorder(const Problem& p, std::string algorithm, nlohmann::json config,
                   const ParamVector& x0, const RunOptions& options)
    : p_(p), options_(options) {
  check_point(p, x0);
  const auto d = static_cast<Eigen::Index>(p.dim());
  grad_.resize(d);
  client_.resize(d);
  scratch_.resize(d);
  record_.algorithm = std::move(algorithm);
  record_.config = std::move(config);
  record_.seed = options.seed;
  record_.f_star = options.f_star;
  record_.rows.reserve(options.epochs + 1);
  start_ = std::chrono::steady_clock::now();
  record(0, x0, 0.0);
}

bool Recorder::record(std::size_t epoch, const ParamVector& x, double stepsize) {
  if (!all_finite(x)) {
    status_ = RunStatus::kDiverged;
    return false;
  }
  const double f = eval_full_unchecked(p_, x);
  grad_full_into(p_, x, grad_, client_, scratch_);

  EpochRow row;
  row.epoch = epoch;
  row.f_residual = f - options_.f_star;
  row.grad_norm = grad_.norm();
  row.stepsize = stepsize;
  row.comm_rounds = comm_rounds;
  row.counters = counters;
  record_.rows.push_back(row);
  record_.final_x = x;
  if (options_.keep_trajectory) record_.trajectory.push_back(x);

  if (!std::isfinite(row.f_residual) || row.f_residual > options_.divergence_threshold) {
    status_ = RunStatus::kDiverged;
    return false;
  }
  return true;
}

RunRecord Recorder::finish() {
  record_.status = status_;
  record_.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  return std::move(record_);
}

}  // namespace detail
}  // namespace clipfl
