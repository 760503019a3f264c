#include "tbq/hl_design.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "tbq/linalg.hpp"

namespace tbq {

double QuantBudget::support() const { return std::sqrt(kappa / ratio); }

QuantBudget QuantBudget::make(double rate, double ratio, int observed_dim, double eta) {
  if (!(rate > 0.0)) throw std::invalid_argument("QuantBudget: rate must be positive");
  if (!(ratio > 0.0 && ratio <= 1.0))
    throw std::invalid_argument("QuantBudget: ratio must lie in (0, 1]");
  QuantBudget b;
  b.rate = rate;
  b.ratio = ratio;
  b.eta = eta;
  double expo = std::min(rate / (2.0 * ratio), 500.0);
  b.levels = std::floor(std::exp2(expo));
  if (b.levels < 2.0)
    throw std::invalid_argument("QuantBudget: ratio must not exceed rate/2 (needs M >= 2)");
  b.kappa = tbq::kappa(eta, b.levels);
  double rl = ratio * observed_dim;
  b.pq = int(std::floor(rl + 1e-9));
  b.pr_fraction = rl - b.pq;
  if (b.pr_fraction < 1e-9) b.pr_fraction = 0.0;
  b.validate(observed_dim);
  return b;
}

void QuantBudget::validate(int observed_dim) const {
  if (levels < 2.0) throw std::invalid_argument("QuantBudget: M must be at least 2");
  if (2.0 * ratio * std::log2(levels) > rate * (1.0 + 1e-12))
    throw std::invalid_argument("QuantBudget: rate budget exceeded");
  if (pq < 0 || pq > observed_dim || pr_fraction < 0.0 || pr_fraction >= 1.0 ||
      std::abs(pq + pr_fraction - ratio * observed_dim) > 1e-6)
    throw std::invalid_argument("QuantBudget: quantizer split inconsistent with the ratio");
  (void)tbq::kappa(eta, levels);
}

double hl_waterfill_zeta(const Eigen::VectorXd& sv, const Eigen::VectorXd& weights,
                         double weight_norm, double levels, double kappa_val) {
  if (sv.size() != weights.size())
    throw std::invalid_argument("hl_waterfill_zeta: size mismatch");
  double smax = 0.0;
  bool any = false;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv[i] < 0.0 || weights[i] < 0.0)
      throw std::invalid_argument("hl_waterfill_zeta: negative input");
    if (sv[i] > 0.0 && weights[i] > 0.0) {
      any = true;
      smax = std::max(smax, sv[i]);
    }
  }
  if (!any) throw std::invalid_argument("hl_waterfill_zeta: all singular values are zero");

  const double target = 3.0 * levels * levels * weight_norm / (4.0 * kappa_val);
  auto mass = [&](double zeta) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) acc += weights[i] * active_part(zeta * sv[i]);
    return acc;
  };
  double lo = 0.0;
  double hi = (1.0 + target) / smax;
  for (int guard = 0; mass(hi) < target; ++guard) {
    hi *= 2.0;
    if (guard > 400) throw std::runtime_error("hl_waterfill_zeta: bracket expansion failed");
  }
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (mass(mid) < target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

HlWaterfill hl_waterfill(const Eigen::VectorXd& sv, double levels, double kappa_val) {
  Eigen::VectorXd w = Eigen::VectorXd::Ones(sv.size());
  HlWaterfill out;
  out.zeta = hl_waterfill_zeta(sv, w, double(sv.size()), levels, kappa_val);
  double scale = 4.0 * kappa_val / (3.0 * levels * levels);
  out.lambda_sq.resize(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    out.lambda_sq[i] = scale * active_part(out.zeta * sv[i]);
  return out;
}

Eigen::MatrixXd equal_diag_rotation(const Eigen::VectorXd& d) {
  const int p = int(d.size());
  if (p < 1) throw std::invalid_argument("equal_diag_rotation: empty input");
  if (d.minCoeff() < 0.0) throw std::invalid_argument("equal_diag_rotation: negative entry");
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(p, p);
  q.diagonal() = d;
  Eigen::MatrixXd u = Eigen::MatrixXd::Identity(p, p);
  const double m = d.mean();
  const double tol = 1e-15 * std::max(1.0, d.maxCoeff());

  std::vector<int> active(p);
  std::iota(active.begin(), active.end(), 0);
  while (active.size() > 1) {
    int ii = active[0], jj = active[0];
    for (int idx : active) {
      if (q(idx, idx) > q(ii, ii)) ii = idx;
      if (q(idx, idx) < q(jj, jj)) jj = idx;
    }
    if (q(ii, ii) - q(jj, jj) <= tol) break;
    // Rotate in the (ii, jj) plane so the new (jj, jj) entry equals m exactly.
    double a = q(ii, ii), cdiag = q(jj, jj), b = q(ii, jj);
    auto new_jj = [&](double th) {
      double s = std::sin(th), c = std::cos(th);
      return s * s * a + c * c * cdiag - 2.0 * s * c * b;
    };
    double tlo = 0.0, thi = kPi / 2.0;
    for (int it = 0; it < 90; ++it) {
      double mid = 0.5 * (tlo + thi);
      if (new_jj(mid) <= m)
        tlo = mid;
      else
        thi = mid;
    }
    double th = 0.5 * (tlo + thi);
    double c = std::cos(th), s = std::sin(th);
    Eigen::VectorXd row_i = c * q.row(ii).transpose() + s * q.row(jj).transpose();
    Eigen::VectorXd row_j = -s * q.row(ii).transpose() + c * q.row(jj).transpose();
    q.row(ii) = row_i.transpose();
    q.row(jj) = row_j.transpose();
    Eigen::VectorXd col_i = c * q.col(ii) + s * q.col(jj);
    Eigen::VectorXd col_j = -s * q.col(ii) + c * q.col(jj);
    q.col(ii) = col_i;
    q.col(jj) = col_j;
    Eigen::VectorXd urow_i = c * u.row(ii).transpose() + s * u.row(jj).transpose();
    Eigen::VectorXd urow_j = -s * u.row(ii).transpose() + c * u.row(jj).transpose();
    u.row(ii) = urow_i.transpose();
    u.row(jj) = urow_j.transpose();
    q(jj, jj) = m;
    active.erase(std::find(active.begin(), active.end(), jj));
  }
  return u;
}

int max_useful_pq(const TaskModel& task) {
  Eigen::MatrixXcd gy = task.lmmse * task.cov_y;
  Eigen::MatrixXcd m = gy * gy.adjoint();  // Gamma Sigma_y^2 Gamma^H
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
  double top = es.eigenvalues().maxCoeff();
  if (!(top > 0.0)) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()[i] > 1e-12 * top) ++r;
  return r;
}

double hl_mse_iid(const TaskModel& task, const QuantBudget& budget) {
  budget.validate(task.observed_dim());
  const int k = task.desired_dim();
  const double base = mmse_avg(task);
  Eigen::VectorXd phi = task.singular_values();
  const double rl = budget.rl();
  if (rl <= 0.0 || phi.maxCoeff() <= 0.0) return base + phi.squaredNorm() / k;

  const int pq = budget.pq;
  const double beta = budget.pr_fraction;
  const int m = std::min(pq, k);
  const double phi_next = pq < k ? phi[pq] : 0.0;

  Eigen::VectorXd sv(m + 1), w(m + 1);
  for (int i = 0; i < m; ++i) {
    sv[i] = phi[i];
    w[i] = 1.0;
  }
  sv[m] = phi_next;
  w[m] = beta;
  if ((sv.array() * w.array()).maxCoeff() <= 0.0) return base + phi.squaredNorm() / k;
  double zeta = hl_waterfill_zeta(sv, w, rl, budget.levels, budget.kappa);

  double excess = 0.0;
  for (int i = 0; i < m; ++i) excess += phi[i] * phi[i] / (active_part(zeta * phi[i]) + 1.0);
  if (pq < k) {
    for (int i = pq; i < k; ++i) excess += phi[i] * phi[i];
    double act = active_part(zeta * phi_next);
    excess -= beta * phi_next * phi_next * act / (act + 1.0);
  }
  return base + excess / k;
}

CorrelatedHlMse hl_mse_correlated(const TaskModel& task, const QuantBudget& budget, int n,
                                  int psd_grid) {
  budget.validate(task.observed_dim());
  if (n < 1) throw std::invalid_argument("hl_mse_correlated: horizon must be positive");
  if (budget.pq < max_useful_pq(task))
    throw std::invalid_argument(
        "hl_mse_correlated: pq below rank(Gamma Sigma_y Gamma^H); no closed form exists there "
        "-- evaluate by Monte-Carlo simulation instead");
  const int k = task.desired_dim();
  const double base = mmse_avg(task);
  Eigen::VectorXd phi = task.singular_values();
  const double rl = budget.rl();

  // `spec` holds eigenvalues of C_n or PSD samples; both average identically.
  auto average = [&](const Eigen::VectorXd& spec) {
    if (phi.maxCoeff() <= 0.0 || rl <= 0.0)
      return base + phi.squaredNorm() * spec.mean() / k;
    Eigen::VectorXd sv(phi.size() * spec.size());
    for (Eigen::Index i = 0, t = 0; i < phi.size(); ++i)
      for (Eigen::Index j = 0; j < spec.size(); ++j, ++t) sv[t] = phi[i] * std::sqrt(spec[j]);
    Eigen::VectorXd w = Eigen::VectorXd::Ones(sv.size());
    double zeta = hl_waterfill_zeta(sv, w, rl * double(spec.size()), budget.levels, budget.kappa);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < phi.size(); ++i)
      for (Eigen::Index j = 0; j < spec.size(); ++j)
        acc += phi[i] * phi[i] * spec[j] /
               (active_part(zeta * phi[i] * std::sqrt(spec[j])) + 1.0);
    return base + acc / (double(k) * double(spec.size()));
  };

  CorrelatedHlMse out;
  SymEig ce = symmetric_eig(task.correlation.toeplitz(n));
  out.finite_n = average(ce.values);
  out.omega_integral = average(task.correlation.psd_grid(psd_grid));
  return out;
}

namespace {

struct TaskFactors {
  Eigen::MatrixXcd inv_sqrt_y;
  int rank_y = 0;
  Eigen::MatrixXcd wphi;  // W Phi, K x L
  Eigen::MatrixXcd v;     // right singular vectors of Gamma Sigma_y^{1/2}, L x L
  Eigen::VectorXd phi;    // singular values padded to L
};

TaskFactors task_factors(const TaskModel& task) {
  TaskFactors f;
  Eigen::MatrixXcd sqrt_y = hermitian_pow(task.cov_y, 0.5, &f.rank_y);
  f.inv_sqrt_y = hermitian_pow(task.cov_y, -0.5);
  Eigen::MatrixXcd gt = task.lmmse * sqrt_y;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(gt, Eigen::ComputeFullU | Eigen::ComputeFullV);
  f.v = svd.matrixV();
  f.phi = Eigen::VectorXd::Zero(task.observed_dim());
  f.phi.head(svd.singularValues().size()) = svd.singularValues();
  Eigen::MatrixXcd phimat = Eigen::MatrixXcd::Zero(task.desired_dim(), task.observed_dim());
  for (int i = 0; i < std::min(task.desired_dim(), task.observed_dim()); ++i)
    phimat(i, i) = f.phi[i];
  f.wphi = svd.matrixU() * phimat;
  return f;
}

}  // namespace

HLDesign design_hl(const TaskModel& task, const QuantBudget& budget, int n) {
  task.validate();
  budget.validate(task.observed_dim());
  if (n < 1) throw std::invalid_argument("design_hl: horizon must be positive");
  const int k = task.desired_dim(), l = task.observed_dim();
  const int pr = int(std::lround(budget.pr_fraction * n));
  const int p = budget.pq * n + pr;
  if (p < 1) throw std::invalid_argument("design_hl: budget yields no quantizers at this horizon");
  if (budget.levels > double(1 << 30))
    throw std::invalid_argument("design_hl: ADC resolution too large to materialize");

  HLDesign d{ScalarQuantizer(budget.support(), int(budget.levels), budget.eta)};
  d.n = n;
  d.noise_var = noise_model_variance(d.adc);
  d.rank_warning = budget.pq > max_useful_pq(task);

  TaskFactors f = task_factors(task);
  d.rank_cov_y = f.rank_y;
  const double base = mmse_avg(task);
  const double gain = 4.0 * budget.kappa / (3.0 * budget.levels * budget.levels * budget.ratio);

  if (task.correlation.is_uncorrelated() && pr == 0) {
    // Per-sample factorization: the same P_q x L map applies to every sample.
    const int pq = budget.pq;
    d.per_sample = true;
    d.quantizer_count = pq;
    d.rank_corr = n;
    Eigen::VectorXd sv(pq);
    for (int i = 0; i < pq; ++i) sv[i] = i < k ? f.phi[i] : 0.0;
    d.zeta = hl_waterfill_zeta(sv, Eigen::VectorXd::Ones(pq), pq, budget.levels, budget.kappa);
    d.lambda_sq.resize(pq);
    for (int i = 0; i < pq; ++i) d.lambda_sq[i] = gain * active_part(d.zeta * sv[i]);
    Eigen::MatrixXd u = equal_diag_rotation(d.lambda_sq);
    Eigen::MatrixXcd scaled = f.v.adjoint().topRows(pq);
    for (int i = 0; i < pq; ++i) scaled.row(i) *= std::sqrt(d.lambda_sq[i]);
    d.combiner_ps = u.cast<Complex>() * (scaled * f.inv_sqrt_y);
    Eigen::MatrixXcd bcore = f.wphi.leftCols(pq);
    for (int i = 0; i < pq; ++i)
      bcore.col(i) *= std::sqrt(d.lambda_sq[i]) / (d.lambda_sq[i] + d.noise_var);
    d.digital_ps = bcore * u.transpose().cast<Complex>();
    double excess = 0.0;
    for (int i = 0; i < k; ++i) {
      double num = f.phi[i] * f.phi[i];
      excess += i < pq ? num / (active_part(d.zeta * f.phi[i]) + 1.0) : num;
    }
    d.predicted_mse = base + excess / k;
    return d;
  }

  if (double(n) * double(l) > 16384.0)
    throw std::invalid_argument("design_hl: full-path materialization capped at n*L <= 16384");

  d.per_sample = false;
  d.quantizer_count = p;
  SymEig ce = symmetric_eig(task.correlation.toeplitz(n));
  d.rank_corr = 0;
  for (Eigen::Index i = 0; i < ce.values.size(); ++i)
    if (ce.values[i] > 0.0) ++d.rank_corr;
  Eigen::VectorXd lam_desc = ce.values.reverse();
  Eigen::MatrixXd vc_desc(n, n);
  for (int kk = 0; kk < n; ++kk) vc_desc.col(kk) = ce.vectors.col(n - 1 - kk);
  d.whiten_left.resize(n, n);
  d.synth_left.resize(n, n);
  for (int kk = 0; kk < n; ++kk) {
    double root = std::sqrt(lam_desc[kk]);
    if (lam_desc[kk] > 0.0)
      d.whiten_left.row(kk) = vc_desc.col(kk).transpose() / root;
    else
      d.whiten_left.row(kk).setZero();
    d.synth_left.col(kk) = vc_desc.col(kk) * root;
  }
  d.vh_sinv = f.v.adjoint() * f.inv_sqrt_y;
  d.left_wphi = f.wphi.leftCols(l);

  // Modes of the whitened task operator: products phi_i sqrt(lambda_k),
  // descending; ties keep the original (component, sample) order.
  struct Mode {
    double sv;
    int comp, samp;
  };
  std::vector<Mode> modes;
  modes.reserve(size_t(l) * size_t(n));
  for (int i = 0; i < l; ++i)
    for (int kk = 0; kk < n; ++kk) modes.push_back({f.phi[i] * std::sqrt(lam_desc[kk]), i, kk});
  std::stable_sort(modes.begin(), modes.end(),
                   [](const Mode& a, const Mode& b) { return a.sv > b.sv; });
  modes.resize(p);

  Eigen::VectorXd sv(p);
  for (int i = 0; i < p; ++i) sv[i] = modes[i].sv;
  d.zeta = hl_waterfill_zeta(sv, Eigen::VectorXd::Ones(p), p, budget.levels, budget.kappa);
  d.lambda_sq.resize(p);
  d.mode_index.resize(p);
  for (int i = 0; i < p; ++i) {
    d.lambda_sq[i] = gain * active_part(d.zeta * sv[i]);
    d.mode_index[i] = {modes[i].comp, modes[i].samp};
  }
  d.rotation = equal_diag_rotation(d.lambda_sq);

  double total = 0.0;
  for (int i = 0; i < k; ++i) total += f.phi[i] * f.phi[i];
  total *= lam_desc.sum() / n;
  double reduction = 0.0;
  for (int i = 0; i < p; ++i) {
    double act = active_part(d.zeta * sv[i]);
    reduction += act * sv[i] * sv[i] / (act + 1.0);
  }
  d.predicted_mse = base + (total - reduction / n) / k;
  return d;
}

Eigen::MatrixXcd HLDesign::analog(const Eigen::MatrixXcd& y) const {
  if (per_sample) return y * combiner_ps.transpose();
  Eigen::MatrixXcd t = whiten_left.cast<Complex>() * y * vh_sinv.transpose();
  Eigen::VectorXcd z(quantizer_count);
  for (int i = 0; i < quantizer_count; ++i)
    z[i] = std::sqrt(lambda_sq[i]) * t(mode_index[i].second, mode_index[i].first);
  return rotation.cast<Complex>() * z;
}

Eigen::MatrixXcd HLDesign::digital(const Eigen::MatrixXcd& q) const {
  if (per_sample) return q * digital_ps.transpose();
  Eigen::VectorXcd t = rotation.transpose().cast<Complex>() * Eigen::VectorXcd(q.reshaped());
  Eigen::MatrixXcd z = Eigen::MatrixXcd::Zero(n, left_wphi.cols());
  for (int i = 0; i < quantizer_count; ++i)
    z(mode_index[i].second, mode_index[i].first) +=
        std::sqrt(lambda_sq[i]) / (lambda_sq[i] + noise_var) * t[i];
  return synth_left.cast<Complex>() * z * left_wphi.transpose();
}

Eigen::MatrixXcd HLDesign::dense_combiner() const {
  if (per_sample) {
    const int pq = quantizer_count, l = int(combiner_ps.cols());
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(pq * n, n * l);
    for (int pp = 0; pp < pq; ++pp)
      for (int i = 0; i < l; ++i)
        for (int kk = 0; kk < n; ++kk) a(pp * n + kk, i * n + kk) = combiner_ps(pp, i);
    return a;
  }
  const int l = int(vh_sinv.rows());
  Eigen::MatrixXcd pre(quantizer_count, n * l);
  for (int m = 0; m < quantizer_count; ++m) {
    auto [ci, sk] = mode_index[m];
    double lam = std::sqrt(lambda_sq[m]);
    for (int i = 0; i < l; ++i)
      for (int kk = 0; kk < n; ++kk) pre(m, i * n + kk) = lam * vh_sinv(ci, i) * whiten_left(sk, kk);
  }
  return rotation.cast<Complex>() * pre;
}

Eigen::MatrixXcd HLDesign::dense_digital() const {
  if (per_sample) {
    const int k = int(digital_ps.rows());
    Eigen::MatrixXcd b = Eigen::MatrixXcd::Zero(k * n, quantizer_count * n);
    for (int j = 0; j < k; ++j)
      for (int pp = 0; pp < quantizer_count; ++pp)
        for (int kk = 0; kk < n; ++kk) b(j * n + kk, pp * n + kk) = digital_ps(j, pp);
    return b;
  }
  const int k = int(left_wphi.rows());
  Eigen::MatrixXcd pre(k * n, quantizer_count);
  for (int m = 0; m < quantizer_count; ++m) {
    auto [ci, sk] = mode_index[m];
    double scale = std::sqrt(lambda_sq[m]) / (lambda_sq[m] + noise_var);
    for (int j = 0; j < k; ++j)
      for (int kk = 0; kk < n; ++kk)
        pre(j * n + kk, m) = scale * left_wphi(j, ci) * synth_left(kk, sk);
  }
  return pre * rotation.transpose().cast<Complex>();
}

}  // namespace tbq
