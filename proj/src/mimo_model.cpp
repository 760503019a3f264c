#include "tbq/mimo_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "tbq/linalg.hpp"

namespace tbq {

void MimoScenario::validate() const {
  if (cells < 1) throw std::invalid_argument("MimoScenario: cells must be >= 1");
  if (users < 1) throw std::invalid_argument("MimoScenario: users must be >= 1");
  if (pilots < users)
    throw std::invalid_argument("MimoScenario: pilots must not be smaller than users");
  if (!(noise_power > 0.0)) throw std::invalid_argument("MimoScenario: noise power must be positive");
  if (!(cell_radius > 0.0) || !(exclusion_radius >= 0.0) || exclusion_radius >= cell_radius)
    throw std::invalid_argument("MimoScenario: invalid radii");
  if (antennas < 1) throw std::invalid_argument("MimoScenario: antennas must be >= 1");
}

namespace {

struct Point {
  double x = 0.0, y = 0.0;
};

// Flat-top regular hexagon of circumradius r centered at the origin.
bool in_hexagon(double x, double y, double r) {
  const double s3 = std::sqrt(3.0);
  return std::abs(y) <= s3 * r / 2.0 && s3 * std::abs(x) + std::abs(y) <= s3 * r;
}

Point hexagon_point(Rng& rng, const MimoScenario& scn) {
  const double r = scn.cell_radius;
  const double s3 = std::sqrt(3.0);
  for (;;) {
    double x = rng.uniform_pm(r);
    double y = rng.uniform_pm(s3 * r / 2.0);
    if (!in_hexagon(x, y, r)) continue;
    if (x * x + y * y < scn.exclusion_radius * scn.exclusion_radius) continue;
    return {x, y};
  }
}

std::vector<Point> cell_centers(const MimoScenario& scn) {
  std::vector<Point> c;
  c.push_back({0.0, 0.0});
  const double dist = std::sqrt(3.0) * scn.cell_radius;
  for (int i = 1; i < scn.cells; ++i) {
    // First ring at 30 + 60k degrees; further cells continue outward rings.
    int ring = 1 + (i - 1) / 6;
    int pos = (i - 1) % 6;
    double ang = kPi / 6.0 + pos * kPi / 3.0;
    c.push_back({ring * dist * std::cos(ang), ring * dist * std::sin(ang)});
  }
  return c;
}

}  // namespace

NetworkRealization generate_network(const MimoScenario& scn, std::uint64_t seed) {
  scn.validate();
  Rng rng(derive_seed(seed, {0x6e65747aULL}));
  NetworkRealization net;
  net.cells = scn.cells;
  net.users = scn.users;
  net.seed = seed;
  net.attenuation.assign(size_t(scn.cells) * scn.cells, Eigen::VectorXd(scn.users));

  std::vector<Point> centers = cell_centers(scn);
  std::vector<Point> positions(size_t(scn.cells) * scn.users);
  for (int m = 0; m < scn.cells; ++m)
    for (int u = 0; u < scn.users; ++u) {
      Point local = hexagon_point(rng, scn);
      positions[size_t(m) * scn.users + u] = {centers[m].x + local.x, centers[m].y + local.y};
    }
  for (int l = 0; l < scn.cells; ++l)
    for (int m = 0; m < scn.cells; ++m)
      for (int u = 0; u < scn.users; ++u) {
        const Point& p = positions[size_t(m) * scn.users + u];
        double rho = std::hypot(p.x - centers[l].x, p.y - centers[l].y);
        double shadow_db = scn.shadow_std_db * rng.normal();
        double z = std::pow(10.0, shadow_db / 10.0);
        net.d(l, m)[u] = z / std::pow(rho, scn.pathloss_exponent);
      }
  // Reindex each cell's users by decreasing own-cell attenuation; the
  // permutation is applied consistently across all receiving base stations.
  for (int m = 0; m < scn.cells; ++m) {
    std::vector<int> order(scn.users);
    std::iota(order.begin(), order.end(), 0);
    const Eigen::VectorXd own = net.d(m, m);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return own[a] > own[b]; });
    for (int l = 0; l < scn.cells; ++l) {
      Eigen::VectorXd cur = net.d(l, m);
      for (int u = 0; u < scn.users; ++u) net.d(l, m)[u] = cur[order[u]];
    }
  }
  return net;
}

Eigen::MatrixXcd pilot_matrix(int pilots, int users) {
  if (pilots < users) throw std::invalid_argument("pilot_matrix: pilots must be >= users");
  Eigen::MatrixXcd theta(users, pilots);
  for (int u = 0; u < users; ++u)
    for (int i = 0; i < pilots; ++i) {
      double ang = -2.0 * kPi * double(u) * double(i) / double(pilots);
      theta(u, i) = Complex(std::cos(ang), std::sin(ang));
    }
  return theta;
}

Eigen::MatrixXcd output_covariance(const NetworkRealization& net, int l,
                                   const MimoScenario& scn) {
  Eigen::MatrixXcd theta = pilot_matrix(scn.pilots, scn.users);
  Eigen::VectorXd power = Eigen::VectorXd::Zero(scn.users);
  for (int m = 0; m < scn.cells; ++m) power += net.d(l, m).cwiseAbs2();
  Eigen::MatrixXcd cov = theta.transpose() * power.asDiagonal() * theta.conjugate();
  cov += scn.noise_power * Eigen::MatrixXcd::Identity(scn.pilots, scn.pilots);
  return cov;
}

BPhi b_phi_coeffs(const NetworkRealization& net, int l, const MimoScenario& scn) {
  BPhi out;
  out.b.resize(scn.users);
  out.phi.resize(scn.users);
  const double tau = scn.pilots;
  for (int u = 0; u < scn.users; ++u) {
    double total = 0.0;
    for (int m = 0; m < scn.cells; ++m) total += net.d(l, m)[u] * net.d(l, m)[u];
    double own = net.d(l, l)[u];
    out.b[u] = tau * own * own / (scn.noise_power + tau * total);
    out.phi[u] = std::sqrt(out.b[u]) * own;
  }
  return out;
}

TaskModel mimo_task_model(const NetworkRealization& net, int l, const MimoScenario& scn) {
  BPhi bp = b_phi_coeffs(net, l, scn);
  TaskModel task;
  Eigen::MatrixXcd theta = pilot_matrix(scn.pilots, scn.users);
  task.lmmse = bp.b.asDiagonal().toDenseMatrix().cast<Complex>() * theta.conjugate() /
               double(scn.pilots);
  task.cov_y = output_covariance(net, l, scn);
  task.cov_g = net.d(l, l).cwiseAbs2().asDiagonal().toDenseMatrix().cast<Complex>();
  task.correlation = scn.correlation;
  return task;
}

ChannelDraw simulate_channel_outputs(const NetworkRealization& net, int l,
                                     const MimoScenario& scn, Rng& rng) {
  const int n = scn.antennas, nu = scn.users, tau = scn.pilots;
  Eigen::MatrixXcd theta = pilot_matrix(tau, nu);
  ChannelDraw out;
  out.y = Eigen::MatrixXcd::Zero(n, tau);
  const bool corr = !scn.correlation.is_uncorrelated();
  Eigen::MatrixXd c_sqrt;
  if (corr) c_sqrt = symmetric_pow(scn.correlation.toeplitz(n), 0.5);

  for (int m = 0; m < scn.cells; ++m) {
    Eigen::MatrixXcd h(n, nu);
    for (Eigen::Index j = 0; j < h.cols(); ++j)
      for (Eigen::Index i = 0; i < h.rows(); ++i) h(i, j) = rng.normal_complex();
    if (corr) h = c_sqrt * h;
    Eigen::MatrixXcd g = h * net.d(l, m).asDiagonal();
    if (m == l) out.g = g;
    out.y += g * theta;
  }
  Eigen::MatrixXcd w(n, tau);
  for (Eigen::Index j = 0; j < w.cols(); ++j)
    for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = rng.normal_complex();
  if (corr) w = c_sqrt * w;
  out.y += std::sqrt(scn.noise_power) * w;
  return out;
}

Eigen::MatrixXcd mmse_channel_estimate(const Eigen::MatrixXcd& y, const NetworkRealization& net,
                                       int l, const MimoScenario& scn) {
  BPhi bp = b_phi_coeffs(net, l, scn);
  Eigen::MatrixXcd theta = pilot_matrix(scn.pilots, scn.users);
  return y * theta.adjoint() * bp.b.asDiagonal() / double(scn.pilots);
}

}  // namespace tbq
