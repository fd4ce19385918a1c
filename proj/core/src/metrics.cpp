#include "alignlab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "alignlab/error.hpp"
#include "alignlab/network_simplex.hpp"

namespace alignlab {

Measure1D Measure1D::atoms(double period, std::vector<double> points, std::vector<double> masses) {
  if (!(period > 0.0)) throw InvalidArgument("circle period must be positive");
  if (points.size() != masses.size()) throw InvalidArgument("measure needs one mass per point");
  for (double m : masses)
    if (!(m >= 0.0)) throw InvalidArgument("measure masses must be nonnegative");
  for (double& p : points) p -= period * std::floor(p / period);
  return {period, std::move(points), std::move(masses)};
}

Measure1D Measure1D::from_grid(const GridField& rho) {
  if (rho.grid.geom.dim != 1) throw InvalidGrid("circle measures need a 1D grid");
  const int n = rho.grid.n[0];
  std::vector<double> pts(n), ms(n);
  for (int i = 0; i < n; ++i) {
    pts[i] = rho.grid.node(i)[0];
    ms[i] = rho.values[i] * rho.grid.h();
  }
  return atoms(rho.grid.geom.period[0], std::move(pts), std::move(ms));
}

double Measure1D::total_mass() const { return std::accumulate(masses.begin(), masses.end(), 0.0); }

namespace {

void check_pair(const Measure1D& mu, const Measure1D& nu) {
  if (mu.period != nu.period) throw InvalidArgument("measures live on circles of different period");
  const double a = mu.total_mass(), b = nu.total_mass();
  if (std::abs(a - b) > 1e-10 * std::max(1.0, std::max(a, b)))
    throw MassMismatch("compared measures have different masses", a, b);
}

// Sorted atoms merged by position.
struct Sorted {
  std::vector<double> x, m;
};

Sorted sorted(const Measure1D& mu) {
  std::vector<std::size_t> idx(mu.points.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](auto l, auto r) { return mu.points[l] < mu.points[r]; });
  Sorted s;
  for (auto i : idx) {
    if (mu.masses[i] == 0.0) continue;
    if (!s.x.empty() && s.x.back() == mu.points[i]) {
      s.m.back() += mu.masses[i];
    } else {
      s.x.push_back(mu.points[i]);
      s.m.push_back(mu.masses[i]);
    }
  }
  return s;
}

}  // namespace

double w1_circle(const Measure1D& mu, const Measure1D& nu) {
  check_pair(mu, nu);
  // Events: +mass for mu, -mass for nu; D = F_mu - F_nu is constant between events.
  std::vector<std::pair<double, double>> ev;
  for (std::size_t i = 0; i < mu.points.size(); ++i) ev.emplace_back(mu.points[i], mu.masses[i]);
  for (std::size_t i = 0; i < nu.points.size(); ++i) ev.emplace_back(nu.points[i], -nu.masses[i]);
  std::sort(ev.begin(), ev.end());
  const double P = mu.period;
  std::vector<std::pair<double, double>> seg;  // (D value, length)
  double D = 0.0, prev = 0.0;
  for (const auto& [x, w] : ev) {
    if (x > prev) seg.emplace_back(D, x - prev);
    D += w;
    prev = x;
  }
  if (P > prev) seg.emplace_back(D, P - prev);
  if (seg.empty()) return 0.0;
  std::sort(seg.begin(), seg.end());
  double half = 0.0;
  for (const auto& s : seg) half += s.second;
  half *= 0.5;
  double acc = 0.0, c = seg.back().first;
  for (const auto& s : seg) {
    acc += s.second;
    if (acc >= half) {
      c = s.first;
      break;
    }
  }
  double w = 0.0;
  for (const auto& s : seg) w += std::abs(s.first - c) * s.second;
  return w;
}

namespace {

// cost(theta) = M int_0^1 |Q_mu(t + theta) - Q_nu(t)|^2 dt with periodically extended quantiles.
struct QuantileCost {
  Sorted a, b;
  std::vector<double> ca, cb;  // normalized cumulative masses, starting at 0
  double P, M;

  QuantileCost(const Measure1D& mu, const Measure1D& nu)
      : a(sorted(mu)), b(sorted(nu)), P(mu.period), M(mu.total_mass()) {
    cumulative(a, ca, M);
    cumulative(b, cb, nu.total_mass());
  }

  static void cumulative(const Sorted& s, std::vector<double>& c, double mass) {
    c.assign(s.m.size() + 1, 0.0);
    for (std::size_t i = 0; i < s.m.size(); ++i) c[i + 1] = c[i] + s.m[i] / mass;
    c.back() = 1.0;
  }

  static double quantile(const Sorted& s, const std::vector<double>& c, double P, double t) {
    const double k = std::floor(t);
    const double r = t - k;
    std::size_t j = std::upper_bound(c.begin(), c.end(), r) - c.begin();
    j = std::clamp<std::size_t>(j, 1, s.x.size()) - 1;
    return s.x[j] + k * P;
  }

  double operator()(double theta) const {
    std::vector<double> br;
    br.reserve(ca.size() + cb.size() + 2);
    for (double c : cb) br.push_back(c);
    for (double c : ca) {
      const double t = c - theta;
      br.push_back(t - std::floor(t));
    }
    br.push_back(0.0);
    br.push_back(1.0);
    std::sort(br.begin(), br.end());
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < br.size(); ++i) {
      const double len = br[i + 1] - br[i];
      if (len <= 0.0) continue;
      const double t = 0.5 * (br[i] + br[i + 1]);
      const double d = quantile(a, ca, P, t + theta) - quantile(b, cb, P, t);
      acc += d * d * len;
    }
    return M * acc;
  }
};

}  // namespace

double w2_circle(const Measure1D& mu, const Measure1D& nu) {
  check_pair(mu, nu);
  const QuantileCost cost(mu, nu);
  // The optimal shift of a circular quantile coupling lies in [-1, 1].
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = -1.0, hi = 1.0;
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = cost(x1), f2 = cost(x2);
  while (hi - lo > 1e-10) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = cost(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = cost(x2);
    }
  }
  const double best = std::min({f1, f2, cost(0.5 * (lo + hi))});
  return std::sqrt(std::max(0.0, best));
}

double w_p_empirical(const std::vector<double>& a, const std::vector<double>& b,
                     const std::function<double(int, int)>& distance, int p) {
  if (p != 1 && p != 2) throw InvalidArgument("cost exponent must be 1 or 2");
  if (a.size() > kEmpiricalAtomLimit || b.size() > kEmpiricalAtomLimit)
    throw SizeLimit("empirical transport support exceeds the atom limit", kEmpiricalAtomLimit);
  auto cost = [&](int i, int j) {
    const double d = distance(i, j);
    return p == 1 ? d : d * d;
  };
  const TransportPlan plan = solve_transport(a, b, cost);
  return p == 1 ? plan.cost : std::sqrt(std::max(0.0, plan.cost));
}

double w_p_empirical(const TorusGeometry& geom, const std::vector<Vec>& x,
                     const std::vector<double>& a, const std::vector<Vec>& y,
                     const std::vector<double>& b, int p) {
  if (x.size() != a.size() || y.size() != b.size())
    throw InvalidArgument("empirical measures need one mass per atom");
  return w_p_empirical(a, b, [&](int i, int j) { return periodic_distance(x[i], y[j], geom); }, p);
}

MonokineticDeviation monokinetic_deviation(const KineticGrid& grid, const std::vector<double>& f,
                                           const GridField& rho, const GridField& u) {
  if (!(rho.grid == grid.x_grid()) || !(u.grid == grid.x_grid()))
    throw InvalidGrid("macro fields must live on the kinetic x grid");
  MonokineticDeviation d;
  d.modulated_energy = modulated_kinetic_energy(grid, f, u);
  const Moments m = moments(grid, f);
  d.w2_spatial = w2_circle(Measure1D::from_grid(m.rho), Measure1D::from_grid(rho));
  d.combined = std::sqrt(d.modulated_energy + d.w2_spatial * d.w2_spatial);
  return d;
}

double l1_distance(const KineticGrid& grid, const std::vector<double>& f,
                   const std::vector<double>& g) {
  if (f.size() != grid.size() || g.size() != grid.size())
    throw InvalidGrid("l1_distance needs two densities on the same grid");
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) acc += std::abs(f[i] - g[i]);
  return acc * grid.hx() * grid.dv();
}

}  // namespace alignlab
