#include "nlch/energy.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "nlch/cubature.hpp"
#include "nlch/errors.hpp"
#include "nlch/parallel.hpp"

namespace nlch {

Mask full_mask(const Grid& grid) { return Mask(grid.size(), 1); }

Mask mask_where(const Grid& grid, const std::function<bool(const Vec2&)>& inside) {
  Mask m(grid.size(), 0);
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = inside(grid.position(i)) ? 1 : 0;
  return m;
}

Mask mask_union(const Mask& a, const Mask& b) {
  if (a.size() != b.size()) throw MaskError("mask sizes differ");
  Mask m(a.size());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = (a[i] || b[i]) ? 1 : 0;
  return m;
}

namespace {

void check_mask(const Mask& m, const Grid& g) {
  if (m.size() != g.size()) throw MaskError("mask does not match the grid");
}

void check_field(const Field& f, const EnergyModel& model) {
  if (!(f.grid == model.grid())) throw ParameterError("field grid differs from the energy model grid");
}

StencilOptions with_domain_clip(StencilOptions opts, const Grid& grid) {
  if (!opts.max_radius) opts.max_radius = grid.diameter();
  return opts;
}

}  // namespace

EnergyModel::EnergyModel(Grid grid, Potential potential, Kernel kernel, double epsilon,
                         StencilOptions opts)
    : grid_(std::move(grid)),
      potential_(std::move(potential)),
      kernel_(std::move(kernel)),
      epsilon_(epsilon),
      stencil_(discrete_stencil(kernel_, epsilon, grid_.spacings(), with_domain_clip(opts, grid_))),
      grad_(grid_) {
  finish_setup();
}

EnergyModel::EnergyModel(Grid grid, Potential potential, Kernel kernel, DiscreteStencil stencil)
    : grid_(std::move(grid)),
      potential_(std::move(potential)),
      kernel_(std::move(kernel)),
      epsilon_(stencil.epsilon),
      stencil_(std::move(stencil)),
      grad_(grid_) {
  const auto sp = grid_.spacings();
  for (int a = 0; a < grid_.dim(); ++a)
    if (std::abs(sp[a] - stencil_.spacing[a]) > 1e-12 * sp[a])
      throw ParameterError("stencil spacing does not match the grid");
  finish_setup();
}

void EnergyModel::finish_setup() {
  if (kernel_.dim() != grid_.dim()) throw ParameterError("kernel and grid dimensions differ");
  preferred_ = StencilConvolver::preferred(grid_, stencil_);
  rel_.resize(grid_.size());
  for (std::size_t i = 0; i < rel_.size(); ++i) rel_[i] = grid_.relative_weight(i);
  convolver().apply(rel_, mass_);
}

const StencilConvolver& EnergyModel::convolver(ConvBackend backend) const {
  auto& slot = backend == ConvBackend::fft ? fft_ : direct_;
  if (!slot) slot = std::make_unique<StencilConvolver>(grid_, stencil_, backend);
  return *slot;
}

double energy_w(const Field& f, const Potential& p, double epsilon, const Mask& region) {
  if (!(epsilon > 0.0)) throw ParameterError("epsilon must be > 0");
  check_mask(region, f.grid);
  std::vector<double> terms(f.size(), 0.0);
  for (std::size_t i = 0; i < f.size(); ++i)
    if (region[i]) terms[i] = f.grid.quad_weight(i) * p.value(f.values[i]);
  return pairwise_sum(terms) / epsilon;
}

double energy_j(const Field& f, const EnergyModel& model, const Mask& a, const Mask& b,
                JPath path) {
  check_field(f, model);
  check_mask(a, f.grid);
  check_mask(b, f.grid);
  const Grid& g = f.grid;
  const std::size_t n = g.size();
  const int comps = g.dim();
  std::array<std::vector<double>, 2> grad;
  model.gradient_operator().apply(f.values, grad);
  const auto& r = model.relative_weights();
  const double scale = model.epsilon() * g.cell_volume();

  if (path == JPath::automatic)
    path = model.convolver().backend() == ConvBackend::fft ? JPath::fft : JPath::direct;

  std::vector<double> terms(n, 0.0);
  if (path == JPath::direct) {
    const auto& conv = model.convolver(ConvBackend::direct);
    const auto& off = conv.index_offsets();
    const auto& w = conv.weights();
    parallel_for(n, [&](std::size_t lo, std::size_t hi) {
      std::vector<double> pair(off.size());
      for (std::size_t x = lo; x < hi; ++x) {
        if (!a[x]) continue;
        std::fill(pair.begin(), pair.end(), 0.0);
        for (std::size_t k = 0; k < off.size(); ++k) {
          std::size_t y;
          if (!g.shifted(x, off[k], y) || !b[y]) continue;
          double d2 = 0.0;
          for (int c = 0; c < comps; ++c) {
            const double d = grad[c][x] - grad[c][y];
            d2 += d * d;
          }
          pair[k] = w[k] * r[y] * d2;
        }
        terms[x] = r[x] * pairwise_sum(pair);
      }
    });
    return scale * pairwise_sum(terms);
  }

  const auto& conv = model.convolver(ConvBackend::fft);
  std::vector<double> bw(n), tmp(n), wb;
  for (std::size_t i = 0; i < n; ++i) bw[i] = b[i] ? r[i] : 0.0;
  conv.apply(bw, wb);
  // |g_x|^2 (w*b)_x - 2 g_x·(w*(b g))_x + (w*(b|g|^2))_x, weighted by a_x.
  std::vector<double> g2(n, 0.0);
  for (int c = 0; c < comps; ++c)
    for (std::size_t i = 0; i < n; ++i) g2[i] += grad[c][i] * grad[c][i];
  for (std::size_t i = 0; i < n; ++i) terms[i] = g2[i] * wb[i];
  std::vector<double> conv_out;
  for (int c = 0; c < comps; ++c) {
    for (std::size_t i = 0; i < n; ++i) tmp[i] = bw[i] * grad[c][i];
    conv.apply(tmp, conv_out);
    for (std::size_t i = 0; i < n; ++i) terms[i] -= 2.0 * grad[c][i] * conv_out[i];
  }
  for (std::size_t i = 0; i < n; ++i) tmp[i] = bw[i] * g2[i];
  conv.apply(tmp, conv_out);
  for (std::size_t i = 0; i < n; ++i) {
    terms[i] += conv_out[i];
    terms[i] = a[i] ? r[i] * terms[i] : 0.0;
  }
  return scale * pairwise_sum(terms);
}

EnergyReport energy_total(const Field& f, const EnergyModel& model) {
  return energy_total(f, model, full_mask(f.grid), "all");
}

EnergyReport energy_total(const Field& f, const EnergyModel& model, const Mask& region,
                          std::string tag) {
  EnergyReport rep;
  rep.w_term = energy_w(f, model.potential(), model.epsilon(), region);
  rep.j_term = energy_j(f, model, region, region);
  rep.total = rep.w_term + rep.j_term;
  rep.region = std::move(tag);
  return rep;
}

EnergyAndGradient energy_and_gradient(const Field& f, const EnergyModel& model) {
  check_field(f, model);
  const Grid& g = f.grid;
  const std::size_t n = g.size();
  std::array<std::vector<double>, 2> grad;
  model.gradient_operator().apply(f.values, grad);
  const auto& r = model.relative_weights();
  const auto& m = model.local_mass();
  const auto& conv = model.convolver();
  const double scale = model.epsilon() * g.cell_volume();

  std::array<std::vector<double>, 2> flux;
  std::vector<double> rg(n), wrg, jterms(n, 0.0);
  for (int c = 0; c < g.dim(); ++c) {
    for (std::size_t i = 0; i < n; ++i) rg[i] = r[i] * grad[c][i];
    conv.apply(rg, wrg);
    flux[c].resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double q = r[i] * (m[i] * grad[c][i] - wrg[i]);
      jterms[i] += grad[c][i] * q;
      flux[c][i] = 4.0 * scale * q;
    }
  }
  EnergyAndGradient out;
  model.gradient_operator().apply_transpose(flux, out.gradient);
  const double inv_eps = 1.0 / model.epsilon();
  std::vector<double> wterms(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = g.quad_weight(i);
    const double u = f.values[i];
    wterms[i] = w * model.potential().value(u);
    out.gradient[i] += inv_eps * w * model.potential().derivative(u).value;
  }
  out.report.w_term = pairwise_sum(wterms) * inv_eps;
  out.report.j_term = std::max(0.0, 2.0 * scale * pairwise_sum(jterms));
  out.report.total = out.report.w_term + out.report.j_term;
  return out;
}

std::vector<double> energy_gradient(const Field& f, const EnergyModel& model) {
  return energy_and_gradient(f, model).gradient;
}

double energy_sliced_1d(const std::vector<double>& samples, double step, const Potential& p,
                        const Kernel& k, const Vec2& xi, double epsilon,
                        const StencilOptions& opts) {
  if (!(epsilon > 0.0)) throw ParameterError("epsilon must be > 0");
  if (!(step > 0.0)) throw ParameterError("slice step must be > 0");
  if (samples.size() < 3) throw ParameterError("slice needs at least 3 samples");
  GridSpec spec;
  spec.dim = 1;
  spec.nodes = {static_cast<int>(samples.size()), 1};
  spec.extent = {step * (samples.size() - 1), 1.0};
  spec.boundary = {Boundary::fixed, Boundary::fixed};
  const Grid line = Grid::cartesian(spec);
  const Field v(line, samples);

  std::vector<double> wt(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) wt[i] = line.quad_weight(i) * p.value(samples[i]);
  const double w_term = pairwise_sum(wt) / (sphere_measure(k.dim()) * epsilon);

  StencilOptions o = opts;
  if (!o.max_radius) o.max_radius = line.diameter();
  const DiscreteStencil st = directional_stencil(k, xi, epsilon, step, o);
  const StencilConvolver conv(line, st, ConvBackend::direct);
  std::array<std::vector<double>, 2> grad;
  GradientOperator(line).apply(samples, grad);
  const auto& off = conv.index_offsets();
  std::vector<double> terms(samples.size(), 0.0);
  for (std::size_t x = 0; x < samples.size(); ++x) {
    double acc = 0.0;
    for (std::size_t j = 0; j < off.size(); ++j) {
      std::size_t y;
      if (!line.shifted(x, off[j], y)) continue;
      const double d = grad[0][x] - grad[0][y];
      acc += st.weights[j] * line.relative_weight(y) * d * d;
    }
    terms[x] = line.relative_weight(x) * acc;
  }
  const double j_term = 0.5 * epsilon * step * pairwise_sum(terms);
  return w_term + j_term;
}

std::string energy_csv_header() { return "epsilon,w_term,j_term,total,region"; }

std::string energy_csv_row(double epsilon, const EnergyReport& r) {
  std::ostringstream os;
  os << std::setprecision(17) << epsilon << ',' << r.w_term << ',' << r.j_term << ',' << r.total
     << ',' << r.region;
  return os.str();
}

}  // namespace nlch
