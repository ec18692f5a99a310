#pragma once

// Plain (non-differentiable) diagonal state-space kernels: zero-order-hold
// discretisation, the step recurrence and a parallel-prefix scan.
//
// State layout: a D x N matrix, one row of N diagonal modes per channel.

#include <Eigen/Dense>
#include <vector>

namespace trajpred::model {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Discretized {
  MatrixXd a_bar;
  MatrixXd b_bar;
};

/// (e^z - 1) / z, continuous at 0.
double expm1_over_x(double z);

/// Zero-order hold for diagonal A: a_bar = exp(delta*A),
/// b_bar = (delta*A)^-1 (exp(delta*A) - 1) * delta * B, elementwise.
/// Throws InvalidInput if any delta <= 0 or shapes disagree. `delta` is per
/// element (same shape as a) or a 1x1 scalar.
Discretized discretize(const MatrixXd& a, const MatrixXd& b, const MatrixXd& delta);
Discretized discretize(const MatrixXd& a, const MatrixXd& b, double delta);

/// One recurrence step: h = a_bar .* h + b_bar .* u (u broadcast along each
/// channel row), y_d = sum_n c(d,n) h(d,n).
struct StepResult {
  MatrixXd h;
  VectorXd y;
};
StepResult ssm_step(const MatrixXd& h, const VectorXd& u, const MatrixXd& a_bar, const MatrixXd& b_bar,
                    const MatrixXd& c);

/// Linear recurrence h_t = a_t .* h_{t-1} + x_t, all elementwise. Returns h_1..h_T.
std::vector<MatrixXd> scan_sequential(const std::vector<MatrixXd>& a, const std::vector<MatrixXd>& x,
                                      const MatrixXd& h0);

/// Same recurrence via the associative operator
///   (a1, b1) o (a2, b2) = (a1 a2, a2 b1 + b2)
/// evaluated as a Hillis-Steele inclusive prefix scan (log2 T sweeps).
std::vector<MatrixXd> scan_associative(const std::vector<MatrixXd>& a, const std::vector<MatrixXd>& x,
                                       const MatrixXd& h0);

/// Selective SSM layer over a fixed input sequence (channels D, state N).
/// Per step: delta = softplus(w_delta u + b_delta) (D), B = w_b u + b_b (N),
/// C = w_c u + b_c (N), A = -exp(a_log) (D x N); y = C.h + skip .* u.
struct SelectiveSsm {
  MatrixXd a_log;    // D x N
  MatrixXd w_delta;  // D x D
  VectorXd b_delta;  // D
  MatrixXd w_b;      // N x D
  VectorXd b_b;      // N
  MatrixXd w_c;      // N x D
  VectorXd b_c;      // N
  VectorXd skip;     // D

  int channels() const { return static_cast<int>(a_log.rows()); }
  int state_size() const { return static_cast<int>(a_log.cols()); }

  /// Per-step recurrence coefficients for the given inputs (u_t as columns).
  void coefficients(const MatrixXd& inputs, std::vector<MatrixXd>& a, std::vector<MatrixXd>& x,
                    std::vector<MatrixXd>& c) const;
  /// Outputs y_t (D x T) evaluated step by step.
  MatrixXd run_sequential(const MatrixXd& inputs, const MatrixXd& h0) const;
  /// Outputs y_t (D x T) evaluated through the prefix scan.
  MatrixXd run_scan(const MatrixXd& inputs, const MatrixXd& h0) const;
};

}  // namespace trajpred::model
