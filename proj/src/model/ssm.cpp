#include "trajpred/model/ssm.hpp"

#include <cmath>

#include "trajpred/core/error.hpp"

namespace trajpred::model {

double expm1_over_x(double z) {
  if (std::abs(z) < 1e-5) return 1.0 + z / 2.0 + z * z / 6.0;
  return std::expm1(z) / z;
}

Discretized discretize(const MatrixXd& a, const MatrixXd& b, const MatrixXd& delta) {
  const bool scalar = delta.size() == 1;
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw InvalidInput("discretize: A and B shapes differ");
  if (!scalar && (delta.rows() != a.rows() || delta.cols() != a.cols())) {
    throw InvalidInput("discretize: delta shape mismatch");
  }
  if ((delta.array() <= 0.0).any() || !delta.allFinite()) throw InvalidInput("discretize: delta must be > 0");
  Discretized out{MatrixXd(a.rows(), a.cols()), MatrixXd(a.rows(), a.cols())};
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      const double d = scalar ? delta(0, 0) : delta(i, j);
      const double z = d * a(i, j);
      out.a_bar(i, j) = std::exp(z);
      out.b_bar(i, j) = expm1_over_x(z) * d * b(i, j);
    }
  }
  return out;
}

Discretized discretize(const MatrixXd& a, const MatrixXd& b, double delta) {
  return discretize(a, b, MatrixXd::Constant(1, 1, delta));
}

StepResult ssm_step(const MatrixXd& h, const VectorXd& u, const MatrixXd& a_bar, const MatrixXd& b_bar,
                    const MatrixXd& c) {
  if (u.size() != h.rows()) throw InvalidInput("ssm_step: input size must equal channel count");
  StepResult r;
  r.h = a_bar.cwiseProduct(h) + (b_bar.array().colwise() * u.array()).matrix();
  r.y = r.h.cwiseProduct(c).rowwise().sum();
  return r;
}

std::vector<MatrixXd> scan_sequential(const std::vector<MatrixXd>& a, const std::vector<MatrixXd>& x,
                                      const MatrixXd& h0) {
  if (a.size() != x.size()) throw InvalidInput("scan: coefficient lengths differ");
  std::vector<MatrixXd> out;
  out.reserve(a.size());
  MatrixXd h = h0;
  for (std::size_t t = 0; t < a.size(); ++t) {
    h = a[t].cwiseProduct(h) + x[t];
    out.push_back(h);
  }
  return out;
}

std::vector<MatrixXd> scan_associative(const std::vector<MatrixXd>& a, const std::vector<MatrixXd>& x,
                                       const MatrixXd& h0) {
  if (a.size() != x.size()) throw InvalidInput("scan: coefficient lengths differ");
  const std::size_t n = a.size();
  // Fold h0 into the first element so the scan itself starts from zero.
  std::vector<MatrixXd> ca = a;
  std::vector<MatrixXd> cb = x;
  if (n > 0) cb[0] = a[0].cwiseProduct(h0) + x[0];
  for (std::size_t offset = 1; offset < n; offset *= 2) {
    std::vector<MatrixXd> na = ca;
    std::vector<MatrixXd> nb = cb;
    for (std::size_t i = offset; i < n; ++i) {
      // (ca[i-offset], cb[i-offset]) o (ca[i], cb[i])
      na[i] = ca[i - offset].cwiseProduct(ca[i]);
      nb[i] = ca[i].cwiseProduct(cb[i - offset]) + cb[i];
    }
    ca = std::move(na);
    cb = std::move(nb);
  }
  return cb;
}

namespace {

double softplus(double v) { return v > 30.0 ? v : std::log1p(std::exp(v)); }

}  // namespace

void SelectiveSsm::coefficients(const MatrixXd& inputs, std::vector<MatrixXd>& a, std::vector<MatrixXd>& x,
                                std::vector<MatrixXd>& c) const {
  const int D = channels();
  const int N = state_size();
  if (inputs.rows() != D) throw InvalidInput("selective ssm: input rows must equal channels");
  const MatrixXd A = -a_log.array().exp().matrix();
  a.clear();
  x.clear();
  c.clear();
  for (Eigen::Index t = 0; t < inputs.cols(); ++t) {
    const VectorXd u = inputs.col(t);
    const VectorXd pre = w_delta * u + b_delta;
    const VectorXd bt = w_b * u + b_b;
    const VectorXd ct = w_c * u + b_c;
    MatrixXd delta(D, N);
    MatrixXd bmat(D, N);
    MatrixXd cmat(D, N);
    for (int d = 0; d < D; ++d) {
      delta.row(d).setConstant(softplus(pre(d)));
      bmat.row(d) = bt.transpose();
      cmat.row(d) = ct.transpose();
    }
    auto z = discretize(A, bmat, delta);
    a.push_back(z.a_bar);
    x.push_back((z.b_bar.array().colwise() * u.array()).matrix());
    c.push_back(cmat);
  }
}

MatrixXd SelectiveSsm::run_sequential(const MatrixXd& inputs, const MatrixXd& h0) const {
  std::vector<MatrixXd> a, x, c;
  coefficients(inputs, a, x, c);
  MatrixXd y(channels(), inputs.cols());
  MatrixXd h = h0;
  for (Eigen::Index t = 0; t < inputs.cols(); ++t) {
    const auto ts = static_cast<std::size_t>(t);
    h = a[ts].cwiseProduct(h) + x[ts];
    y.col(t) = h.cwiseProduct(c[ts]).rowwise().sum() + skip.cwiseProduct(inputs.col(t));
  }
  return y;
}

MatrixXd SelectiveSsm::run_scan(const MatrixXd& inputs, const MatrixXd& h0) const {
  std::vector<MatrixXd> a, x, c;
  coefficients(inputs, a, x, c);
  auto hs = scan_associative(a, x, h0);
  MatrixXd y(channels(), inputs.cols());
  for (Eigen::Index t = 0; t < inputs.cols(); ++t) {
    const auto ts = static_cast<std::size_t>(t);
    y.col(t) = hs[ts].cwiseProduct(c[ts]).rowwise().sum() + skip.cwiseProduct(inputs.col(t));
  }
  return y;
}

}  // namespace trajpred::model
