#include "spikeguard/verify.hpp"

#include <cmath>
#include <numbers>

#include "spikeguard/error.hpp"
#include "spikeguard/network.hpp"
#include "spikeguard/theory.hpp"

namespace spikeguard {

namespace {

constexpr double kZ995 = 2.5758293035489;  // standard normal 0.995 quantile

}  // namespace

json verify_theorem1(std::uint64_t seed, std::size_t trials) {
  json cases = json::array();
  bool all = true;
  const Rng root(seed);
  std::uint64_t tag = 0;
  for (double tau : {1.0, 0.5}) {
    Theorem1Params quiet;
    quiet.tau = tau;
    quiet.timesteps = 8;
    quiet.v_th = 1e9;
    const Theorem1Moments cf = theorem1_closed_form(quiet);
    const Theorem1Sample mc = theorem1_monte_carlo(root.substream(Stream::MonteCarlo, tag++), quiet, trials);
    const double k = static_cast<double>(trials - 1);
    json rows = json::array();
    for (std::size_t t = 0; t < quiet.timesteps; ++t) {
      const double lo = cf.var[t] * chi2_quantile_wh(k, -kZ995) / k;
      const double hi = cf.var[t] * chi2_quantile_wh(k, kZ995) / k;
      const bool ok = mc.var[t] >= lo && mc.var[t] <= hi;
      all = all && ok;
      rows.push_back({{"t", t + 1}, {"expected_var", cf.var[t]}, {"sample_var", mc.var[t]}, {"ci_low", lo},
                      {"ci_high", hi}, {"pass", ok}});
    }
    cases.push_back({{"regime", "no_spike"}, {"tau", tau}, {"v_th", quiet.v_th}, {"rows", rows}});

    Theorem1Params firing = quiet;
    firing.v_th = 1.0;
    const Theorem1Sample ms = theorem1_monte_carlo(root.substream(Stream::MonteCarlo, tag++), firing, trials);
    firing.rates = ms.rates;
    const Theorem1Moments cf2 = theorem1_closed_form(firing);
    json rows2 = json::array();
    for (std::size_t t = 0; t < firing.timesteps; ++t) {
      const double se = std::sqrt(ms.var[t] / static_cast<double>(trials));
      const double dev = std::abs(ms.mean[t] - cf2.mean[t]);
      const bool ok = dev <= 5.0 * se;
      all = all && ok;
      rows2.push_back({{"t", t + 1}, {"expected_mean", cf2.mean[t]}, {"sample_mean", ms.mean[t]},
                       {"standard_error", se}, {"deviation_in_se", se > 0 ? dev / se : 0.0},
                       {"rate", ms.rates[t]}, {"pass", ok}});
    }
    cases.push_back({{"regime", "spiking"}, {"tau", tau}, {"v_th", firing.v_th}, {"rows", rows2}});
  }
  return json{{"check", "theorem1"},
              {"trials", trials},
              {"timesteps", 8},
              {"tolerances", {{"variance_ci", 0.99}, {"mean_standard_errors", 5.0}}},
              {"cases", cases},
              {"pass", all}};
}

json verify_theorem2(std::uint64_t seed, std::size_t directions, double epsilon) {
  ModelSpec spec;
  spec.input_shape = {3};
  spec.hidden = {{LayerKind::Dense, 4, false}};
  spec.classes = 2;
  spec.timesteps = 2;
  const Network net = Network::init(spec, seed);
  Rng xr = Rng(seed).substream(Stream::Probe, 99);
  Tensor x({3});
  for (std::size_t i = 0; i < 3; ++i) x[i] = xr.uniform();
  const SensitivityReport r = sensitivity_bound_check(net, x, epsilon, directions, Rng(seed));
  const bool residual_ok = r.max_residual <= 1e-6;
  const bool pass = r.violations == 0 && residual_ok;
  return json{{"check", "theorem2"},
              {"seed", seed},
              {"epsilon", epsilon},
              {"directions", directions},
              {"x", x.values()},
              {"cells", r.cells},
              {"boundary_cells", r.boundary_cells},
              {"cell_changes", r.cell_changes},
              {"max_opnorm", r.max_opnorm},
              {"bound", r.bound},
              {"max_sensitivity", r.max_sensitivity},
              {"violations", r.violations},
              {"max_residual", r.max_residual},
              {"margin_edges", r.margin_edges},
              {"margin_hist", r.margin_hist},
              {"tolerances", {{"sensitivity_abs", kSensitivityTolerance}, {"residual", 1e-6}}},
              {"pass", pass}};
}

namespace {

// Omega = Phi((gamma - mu)/sigma) - Phi((-gamma - mu)/sigma). Each Phi term is
// differentiated by a central difference of the log of its own tail, so the
// Gaussian-tail scale neither swamps the step nor rounds away against 1.
// `wrt` 0 differentiates in mu, 1 in sigma.
double term_derivative(double mu, double sigma, double gamma, double h, int wrt, ErfFn erf_fn) {
  auto upper_tail = [erf_fn](double z) {
    const double a = z / std::numbers::sqrt2;
    return erf_fn ? 0.5 * (1.0 - erf_fn(a)) : 0.5 * spikeguard::erfc(a);
  };
  double total = 0.0;
  for (double c : {gamma, -gamma}) {
    const double s = (c - mu) / sigma >= 0.0 ? 1.0 : -1.0;
    auto log_tail = [&](double m, double sd) { return std::log(upper_tail(s * (c - m) / sd)); };
    const double tail = upper_tail(s * (c - mu) / sigma);
    const double d_log = wrt == 0 ? (log_tail(mu + h, sigma) - log_tail(mu - h, sigma)) / (2 * h)
                                  : (log_tail(mu, sigma + h) - log_tail(mu, sigma - h)) / (2 * h);
    const double d_phi = -s * tail * d_log;
    total += c > 0.0 ? d_phi : -d_phi;
  }
  return total;
}

}  // namespace

json verify_gradients(ErfFn erf_fn) {
  constexpr double h = 1e-4, rel_tol = 1e-4, floor = 1e-12;
  bool grid_ok = true;
  double worst = 0.0;
  std::size_t points = 0;
  for (int i = -8; i <= 8; ++i)
    for (double sigma : {0.2, 0.5, 1.0, 2.0, 3.0})
      for (double gamma : {0.5, 1.0, 2.0}) {
        const double mu = 0.25 * i;
        const OverlapResult o = overlap(mu, sigma, gamma, erf_fn);
        const double fd_mu = term_derivative(mu, sigma, gamma, h, 0, erf_fn);
        const double fd_sigma = term_derivative(mu, sigma, gamma, h, 1, erf_fn);
        const double an_mu = o.d_mu, an_sigma = o.d_sigma;
        for (auto [a, f] : {std::pair{an_mu, fd_mu}, std::pair{an_sigma, fd_sigma}}) {
          const double rel = std::abs(a - f) / std::max({std::abs(a), std::abs(f), floor});
          worst = std::max(worst, rel);
          grid_ok = grid_ok && rel <= rel_tol;
        }
        ++points;
      }

  constexpr double erf_tol = 1.5e-7;
  double erf_worst = 0.0;
  const ErfFn f = erf_fn ? erf_fn : static_cast<ErfFn>(&spikeguard::erf);
  for (int i = -600; i <= 600; ++i) {
    const double x = 0.01 * i;
    erf_worst = std::max(erf_worst, std::abs(f(x) - std::erf(x)));
  }
  const bool erf_ok = erf_worst <= erf_tol;

  const double omega = overlap(0.0, 1.0, 1.0, erf_fn).omega;
  const double omega_ref = std::erf(1.0 / std::numbers::sqrt2);
  const bool omega_ok = std::abs(omega - omega_ref) <= 1e-6;

  // Chain rule from the overlap to individual potentials.
  Rng r(4242);
  std::vector<Tensor> u{gaussian(r, {2, 5, 3}, 0.2, 0.8), gaussian(r, {2, 5, 2, 2}, -0.3, 1.1)};
  const double gamma = 1.0;
  auto loss_of = [&](const std::vector<Tensor>& v) { return mpd_sgr_loss(v, mpd_stats(v), gamma, erf_fn).loss; };
  const MpdLoss base = mpd_sgr_loss(u, mpd_stats(u), gamma, erf_fn);
  double chain_worst = 0.0;
  for (std::size_t l = 0; l < u.size(); ++l)
    for (std::size_t i = 0; i < u[l].size(); ++i) {
      auto up = u, dn = u;
      up[l][i] += h;
      dn[l][i] -= h;
      const double fd = (loss_of(up) - loss_of(dn)) / (2 * h);
      const double a = base.d_u_bar[l][i];
      chain_worst = std::max(chain_worst, std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), floor}));
    }
  const bool chain_ok = chain_worst <= rel_tol;

  return json{{"check", "gradients"},
              {"overlap_grid", {{"points", points}, {"worst_relative_error", worst}, {"tolerance", rel_tol},
                                {"step", h}, {"pass", grid_ok}}},
              {"erf", {{"worst_abs_error", erf_worst}, {"tolerance", erf_tol}, {"pass", erf_ok}}},
              {"omega_reference", {{"value", omega}, {"reference", omega_ref}, {"tolerance", 1e-6}, {"pass", omega_ok}}},
              {"chain_rule", {{"worst_relative_error", chain_worst}, {"tolerance", rel_tol}, {"pass", chain_ok}}},
              {"pass", grid_ok && erf_ok && omega_ok && chain_ok}};
}

}  // namespace spikeguard
