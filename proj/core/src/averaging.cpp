#include "alignlab/averaging.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "alignlab/error.hpp"

namespace alignlab {

namespace {

std::string point_str(const Vec& x, int dim) {
  std::ostringstream os;
  os << "(" << x[0];
  if (dim == 2) os << ", " << x[1];
  os << ")";
  return os.str();
}

double guarded_inverse(double denom, const Vec& x, int dim, const char* what) {
  if (!(denom > kDivisionHazard))
    throw DivisionHazard(std::string(what) + " vanishes at " + point_str(x, dim));
  return 1.0 / denom;
}

// Nodes of the Mphi inner quadrature grid and their quadrature weight.
GridSpec mphi_grid(const AveragingModel& model, const TorusGeometry& geom) {
  const int n = 2 * model.quadrature_resolution;
  return GridSpec(geom, n, n);
}

double piece_value(const GridField& g, const Vec& x) { return sample_field(g, x); }

std::vector<double> segregation_piece_masses(const AveragingModel& model, const DensityView& rho) {
  std::vector<double> out(model.pieces.size(), 0.0);
  for (std::size_t l = 0; l < model.pieces.size(); ++l) {
    double acc = 0.0;
    for (std::size_t j = 0; j < rho.size(); ++j)
      acc += rho.masses[j] * piece_value(model.pieces[l], rho.points[j]);
    if (!(acc > kDivisionHazard)) {
      std::ostringstream os;
      os << "segregation piece " << l << " carries no mass";
      throw DivisionHazard(os.str());
    }
    out[l] = acc;
  }
  return out;
}

struct MphiInner {
  std::vector<Vec> z;
  std::vector<double> inv_rho_phi;  // 1 / rho_phi(z)
};

MphiInner mphi_inner(const AveragingModel& model, const DensityView& rho) {
  const GridSpec zg = mphi_grid(model, rho.geom);
  MphiInner inner{zg.nodes(), {}};
  const auto rp = convolve_density(model.kernel, rho, inner.z);
  inner.inv_rho_phi.resize(rp.size());
  for (std::size_t k = 0; k < rp.size(); ++k)
    inner.inv_rho_phi[k] = guarded_inverse(rp[k], inner.z[k], rho.geom.dim, "rho_phi");
  return inner;
}

// phi(x - z_k) normalized to unit sum over k.
std::vector<double> mphi_outer_weights(const CommunicationKernel& k, const TorusGeometry& geom,
                                       const std::vector<Vec>& z, const Vec& x) {
  std::vector<double> w(z.size());
  double total = 0.0;
  for (std::size_t q = 0; q < z.size(); ++q) total += (w[q] = kernel_eval(k, x, z[q], geom));
  const double inv = guarded_inverse(total, x, geom.dim, "outer phi quadrature");
  for (double& v : w) v *= inv;
  return w;
}

}  // namespace

DensityView DensityView::atoms(const TorusGeometry& geom, std::vector<Vec> points,
                               std::vector<double> masses) {
  if (points.size() != masses.size())
    throw InvalidArgument("density view needs one mass per point");
  DensityView d{geom, std::move(points), std::move(masses), std::nullopt};
  for (double m : d.masses)
    if (!(m >= 0.0) || !std::isfinite(m)) throw InvalidArgument("density masses must be >= 0");
  if (!(d.total_mass() > 0.0)) throw InvalidArgument("density view has no mass");
  for (Vec& p : d.points) p = wrap(p, geom);
  return d;
}

DensityView DensityView::on_grid(const GridField& rho) {
  const double cell = rho.grid.cell_volume();
  std::vector<double> m(rho.values.size());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = rho.values[i] * cell;
  DensityView d = atoms(rho.grid.geom, rho.grid.nodes(), std::move(m));
  d.grid = rho.grid;
  return d;
}

double DensityView::total_mass() const {
  double acc = 0.0;
  for (double m : masses) acc += m;
  return acc;
}

AveragingModel AveragingModel::cs_mt(CommunicationKernel k) {
  return {AveragingVariant::CsMtKernel, std::move(k), {}, 64};
}

AveragingModel AveragingModel::favre(CommunicationKernel k) {
  return {AveragingVariant::FavreDirect, std::move(k), {}, 64};
}

AveragingModel AveragingModel::mphi(CommunicationKernel k, int quadrature_resolution) {
  if (quadrature_resolution < 2) throw InvalidGrid("Mphi quadrature needs at least 2 nodes");
  return {AveragingVariant::OverMollifiedMphi, std::move(k), {}, quadrature_resolution};
}

AveragingModel AveragingModel::segregation(std::vector<GridField> pieces) {
  if (pieces.empty()) throw InvalidArgument("segregation needs at least one piece");
  for (const auto& g : pieces)
    if (!(g.grid == pieces.front().grid))
      throw InvalidGrid("segregation pieces must share a grid");
  for (int i = 0; i < pieces.front().grid.size(); ++i) {
    double sum = 0.0;
    for (const auto& g : pieces) {
      if (g.values[i] < 0.0) throw InvalidArgument("segregation piece is negative");
      sum += g.values[i];
    }
    if (std::abs(sum - 1.0) > 1e-12) {
      std::ostringstream os;
      os << "segregation pieces do not form a partition of unity at node " << i
         << " (sum " << sum << ")";
      throw InvalidArgument(os.str());
    }
  }
  return {AveragingVariant::Segregation, CommunicationKernel::constant(1.0), std::move(pieces), 64};
}

std::vector<double> convolve_density(const CommunicationKernel& k, const DensityView& rho,
                                     std::span<const Vec> eval) {
  std::vector<double> out(eval.size(), 0.0);
  for (std::size_t i = 0; i < eval.size(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < rho.size(); ++j)
      acc += rho.masses[j] * kernel_eval(k, eval[i], rho.points[j], rho.geom);
    out[i] = acc;
  }
  return out;
}

DenseMatrix kernel_matrix(const AveragingModel& model, const DensityView& rho,
                          std::span<const Vec> X, std::span<const Vec> Y) {
  DenseMatrix out(X.size(), Y.size());
  const auto& geom = rho.geom;
  switch (model.variant) {
    case AveragingVariant::CsMtKernel:
    case AveragingVariant::FavreDirect: {
      const auto rp = convolve_density(model.kernel, rho, X);
      for (std::size_t i = 0; i < X.size(); ++i) {
        const double inv = guarded_inverse(rp[i], X[i], geom.dim, "rho_phi");
        for (std::size_t j = 0; j < Y.size(); ++j)
          out(i, j) = kernel_eval(model.kernel, X[i], Y[j], geom) * inv;
      }
      break;
    }
    case AveragingVariant::OverMollifiedMphi: {
      const MphiInner inner = mphi_inner(model, rho);
      std::vector<std::vector<double>> phi_y(Y.size());
      for (std::size_t j = 0; j < Y.size(); ++j) {
        phi_y[j].resize(inner.z.size());
        for (std::size_t q = 0; q < inner.z.size(); ++q)
          phi_y[j][q] = kernel_eval(model.kernel, Y[j], inner.z[q], geom) * inner.inv_rho_phi[q];
      }
      for (std::size_t i = 0; i < X.size(); ++i) {
        const auto w = mphi_outer_weights(model.kernel, geom, inner.z, X[i]);
        for (std::size_t j = 0; j < Y.size(); ++j) {
          double acc = 0.0;
          for (std::size_t q = 0; q < w.size(); ++q) acc += w[q] * phi_y[j][q];
          out(i, j) = acc;
        }
      }
      break;
    }
    case AveragingVariant::Segregation: {
      const auto pm = segregation_piece_masses(model, rho);
      for (std::size_t i = 0; i < X.size(); ++i)
        for (std::size_t j = 0; j < Y.size(); ++j) {
          double acc = 0.0;
          for (std::size_t l = 0; l < pm.size(); ++l)
            acc += piece_value(model.pieces[l], X[i]) * piece_value(model.pieces[l], Y[j]) / pm[l];
          out(i, j) = acc;
        }
      break;
    }
  }
  return out;
}

std::vector<Vec> velocity_average(const AveragingModel& model, const DensityView& rho,
                                  std::span<const Vec> velocities, std::span<const Vec> eval) {
  if (velocities.size() != rho.size())
    throw InvalidArgument("velocity_average needs one velocity per density atom");
  const auto& geom = rho.geom;
  std::vector<Vec> out(eval.size(), Vec{0.0, 0.0});
  switch (model.variant) {
    case AveragingVariant::CsMtKernel:
    case AveragingVariant::FavreDirect: {
      for (std::size_t i = 0; i < eval.size(); ++i) {
        double den = 0.0;
        Vec num{0.0, 0.0};
        for (std::size_t j = 0; j < rho.size(); ++j) {
          const double w = rho.masses[j] * kernel_eval(model.kernel, eval[i], rho.points[j], geom);
          den += w;
          num += w * velocities[j];
        }
        out[i] = guarded_inverse(den, eval[i], geom.dim, "rho_phi") * num;
      }
      break;
    }
    case AveragingVariant::OverMollifiedMphi: {
      const MphiInner inner = mphi_inner(model, rho);
      std::vector<Vec> uf(inner.z.size(), Vec{0.0, 0.0});
      for (std::size_t q = 0; q < inner.z.size(); ++q) {
        Vec num{0.0, 0.0};
        for (std::size_t j = 0; j < rho.size(); ++j)
          num += (rho.masses[j] * kernel_eval(model.kernel, inner.z[q], rho.points[j], geom)) *
                 velocities[j];
        uf[q] = inner.inv_rho_phi[q] * num;
      }
      for (std::size_t i = 0; i < eval.size(); ++i) {
        const auto w = mphi_outer_weights(model.kernel, geom, inner.z, eval[i]);
        Vec acc{0.0, 0.0};
        for (std::size_t q = 0; q < w.size(); ++q) acc += w[q] * uf[q];
        out[i] = acc;
      }
      break;
    }
    case AveragingVariant::Segregation: {
      const auto pm = segregation_piece_masses(model, rho);
      std::vector<Vec> piece_mean(pm.size(), Vec{0.0, 0.0});
      for (std::size_t l = 0; l < pm.size(); ++l) {
        for (std::size_t j = 0; j < rho.size(); ++j)
          piece_mean[l] +=
              (rho.masses[j] * piece_value(model.pieces[l], rho.points[j])) * velocities[j];
        piece_mean[l] = (1.0 / pm[l]) * piece_mean[l];
      }
      for (std::size_t i = 0; i < eval.size(); ++i)
        for (std::size_t l = 0; l < pm.size(); ++l)
          out[i] += piece_value(model.pieces[l], eval[i]) * piece_mean[l];
      break;
    }
  }
  return out;
}

double check_right_stochastic(const AveragingModel& model, const DensityView& rho,
                              std::span<const Vec> eval) {
  if (eval.empty()) eval = rho.points;
  const DenseMatrix K = kernel_matrix(model, rho, eval, rho.points);
  double worst = 0.0;
  for (std::size_t i = 0; i < K.rows; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < K.cols; ++j) acc += K(i, j) * rho.masses[j];
    worst = std::max(worst, std::abs(acc - 1.0));
  }
  return worst;
}

GridField favre_average(const CommunicationKernel& k, const GridField& rho, const GridField& u) {
  if (!(rho.grid == u.grid)) throw InvalidGrid("favre_average needs rho and u on one grid");
  const GridConvolver conv(k, rho.grid);
  std::vector<double> mom(rho.values.size());
  for (std::size_t i = 0; i < mom.size(); ++i) mom[i] = rho.values[i] * u.values[i];
  const auto rp = conv.apply(rho.values);
  const auto mp = conv.apply(mom);
  GridField out(rho.grid);
  out.time = rho.time;
  for (std::size_t i = 0; i < mom.size(); ++i)
    out.values[i] =
        mp[i] * guarded_inverse(rp[i], rho.grid.node(static_cast<int>(i)), rho.grid.geom.dim,
                                "rho_phi");
  return out;
}

GridField special_mollified_velocity(const GridField& rho, const GridField& u,
                                     const Mollifier& m) {
  if (!(rho.grid == u.grid))
    throw InvalidGrid("special_mollified_velocity needs rho and u on one grid");
  const GridConvolver conv(m, rho.grid);
  std::vector<double> mom(rho.values.size());
  for (std::size_t i = 0; i < mom.size(); ++i) mom[i] = rho.values[i] * u.values[i];
  const auto rp = conv.apply(rho.values);
  const auto mp = conv.apply(mom);
  std::vector<double> inner(mom.size());
  for (std::size_t i = 0; i < mom.size(); ++i)
    inner[i] = mp[i] * guarded_inverse(rp[i], rho.grid.node(static_cast<int>(i)),
                                       rho.grid.geom.dim, "mollified density");
  return GridField(rho.grid, conv.apply(inner), rho.time);
}

}  // namespace alignlab
