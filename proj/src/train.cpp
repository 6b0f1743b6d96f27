#include "spikeguard/train.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "spikeguard/attacks.hpp"
#include "spikeguard/backprop.hpp"
#include "spikeguard/error.hpp"
#include "spikeguard/mpd.hpp"

namespace spikeguard {

namespace {

constexpr std::uint64_t kEvalTag = 0xE7A1;

void check_dataset(const ModelSpec& spec, const Dataset& d, const std::string& what) {
  require(d.size() > 0, what + " set is empty");
  if (d.images.dim(0) != d.size() || d.images.size() != d.size() * spec.input_size())
    fail(ErrorCode::ShapeMismatch, what + " samples do not match the model input " + shape_str(spec.input_shape));
  for (int y : d.labels)
    if (y < 0 || static_cast<std::size_t>(y) >= spec.classes)
      fail(ErrorCode::InvalidArgument, what + " label " + std::to_string(y) + " is out of range");
}

std::size_t argmax_row(const Tensor& logits, std::size_t b) {
  const std::size_t K = logits.dim(1);
  std::size_t best = 0;
  for (std::size_t k = 1; k < K; ++k)
    if (logits[b * K + k] > logits[b * K + best]) best = k;
  return best;
}

}  // namespace

double cosine_lr(double lr0, std::size_t epoch, std::size_t t_max) {
  require(t_max >= 1, "cosine_lr: t_max must be >= 1");
  return lr0 * 0.5 * (1.0 + std::cos(std::numbers::pi * static_cast<double>(epoch) / static_cast<double>(t_max)));
}

std::vector<int> predict(const Network& net, const Tensor& x, const Rng& encoder_rng) {
  const Trace tr = net.forward(x, Mode::Eval, &encoder_rng);
  std::vector<int> out(tr.batch);
  for (std::size_t b = 0; b < tr.batch; ++b) out[b] = static_cast<int>(argmax_row(tr.logits, b));
  return out;
}

double clean_accuracy(const Network& net, const Dataset& data, std::size_t batch_size, std::uint64_t seed) {
  check_dataset(net.spec(), data, "evaluation");
  require(batch_size >= 1, "batch size must be >= 1");
  const Rng root(seed);
  std::size_t correct = 0;
  for (std::size_t start = 0, b = 0; start < data.size(); start += batch_size, ++b) {
    const std::size_t n = std::min(batch_size, data.size() - start);
    const Tensor x = data.images.slice(start, n);
    const auto pred = predict(net, x, root.substream(Stream::Poisson, b, kEvalTag));
    for (std::size_t i = 0; i < n; ++i) correct += pred[i] == data.labels[start + i] ? 1 : 0;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

TrainResult train(const ModelSpec& spec, const TrainConfig& cfg, const Dataset& train_set, const Dataset* test_set,
                  std::uint64_t seed, const std::function<void(const EpochMetrics&)>& on_epoch) {
  spec.validate();
  cfg.validate();
  check_dataset(spec, train_set, "training");
  if (test_set) check_dataset(spec, *test_set, "test");

  Network net = Network::init(spec, seed);
  const Rng root(seed);
  const std::size_t N = train_set.size(), B = cfg.batch_size, L = net.num_hidden(), T = spec.timesteps;
  const double gamma = spec.surrogate.window();
  std::vector<Tensor> velocity;
  for (const Tensor* p : net.parameters()) velocity.emplace_back(p->shape());

  TrainResult res;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    EpochMetrics m;
    m.epoch = epoch;
    m.lr = cosine_lr(cfg.lr, epoch, cfg.epochs);
    m.layer_mu.assign(L, std::vector<double>(T, 0.0));
    m.layer_sigma.assign(L, std::vector<double>(T, 0.0));
    m.p3.assign(L, 0.0);

    std::vector<std::size_t> perm(N);
    for (std::size_t i = 0; i < N; ++i) perm[i] = i;
    Rng shuffle = root.substream(Stream::Shuffle, epoch);
    for (std::size_t i = N; i-- > 1;) std::swap(perm[i], perm[shuffle.below(i + 1)]);

    std::size_t steps = 0, correct = 0;
    for (std::size_t start = 0; start < N; start += B, ++steps) {
      const std::vector<std::size_t> idx(perm.begin() + static_cast<std::ptrdiff_t>(start),
                                         perm.begin() + static_cast<std::ptrdiff_t>(std::min(N, start + B)));
      Tensor x = batch_rows(train_set.images, idx);
      std::vector<int> y;
      for (std::size_t i : idx) y.push_back(train_set.labels[i]);
      if (cfg.adversarial) {
        AttackConfig at = cfg.at;
        at.seed = seed;
        const Rng ar = root.substream(Stream::Attack, epoch, steps);
        x = at.kind == AttackKind::Pgd ? pgd(net, x, y, at, ar)
                                       : (at.kind == AttackKind::Bim ? bim(net, x, y, at, ar) : fgsm(net, x, y, at, ar));
      }
      const Rng enc = root.substream(Stream::Poisson, epoch, steps);
      const Trace tr = net.forward(x, Mode::Train, &enc);
      // A non-finite potential fires nothing, so the logits alone can hide it.
      bool finite = tr.logits.all_finite();
      for (const auto& l : tr.layers) finite = finite && l.u.all_finite();
      if (!finite)
        fail(ErrorCode::Numeric, "non-finite forward pass at epoch " + std::to_string(epoch) + ", step " +
                                     std::to_string(steps) + ", lr " + std::to_string(m.lr));
      const CrossEntropy ce = cross_entropy(tr.logits, y);

      MpdLoss reg;
      std::vector<Tensor> adjoint;
      BackwardOptions opts;
      opts.input_gradient = false;
      if (L > 0) {
        const auto u_bar = shifted_potentials(tr, spec.lif.v_th);
        const MpdStats stats = mpd_stats(u_bar);
        reg = mpd_sgr_loss(u_bar, stats, gamma);
        for (std::size_t l = 0; l < L; ++l)
          for (std::size_t t = 0; t < T; ++t) {
            const std::size_t C = stats.mu[l].dim(1);
            double mu = 0.0, sd = 0.0;
            for (std::size_t c = 0; c < C; ++c) {
              mu += stats.mu[l].at(t, c);
              sd += stats.sigma[l].at(t, c);
            }
            m.layer_mu[l][t] += mu / static_cast<double>(C);
            m.layer_sigma[l][t] += sd / static_cast<double>(C);
          }
        const auto p3 = p3_diagnostic(tr, spec.surrogate, spec.lif.v_th);
        for (std::size_t l = 0; l < L; ++l) m.p3[l] += p3[l];
        if (cfg.eta > 0.0) {
          adjoint = std::move(reg.d_u_bar);
          for (auto& a : adjoint) scale_inplace(a, cfg.eta);
          opts.u_bar_adjoint = &adjoint;
        }
      }
      const double total = total_loss(ce.loss, reg.loss, cfg.eta);
      const GradientBundle g = bptt_backward(net, tr, ce.d_logits, spec.surrogate, opts);
      if (!std::isfinite(total) || !g.all_finite()) {
        std::ostringstream os;
        os << "non-finite training state at epoch " << epoch << ", step " << steps << ": task loss " << ce.loss
           << ", overlap " << reg.loss << ", lr " << m.lr << ", gradients " << (g.all_finite() ? "finite" : "non-finite");
        fail(ErrorCode::Numeric, os.str());
      }

      auto params = net.parameters();
      for (std::size_t p = 0; p < params.size(); ++p) {
        Tensor& w = *params[p];
        Tensor& v = velocity[p];
        for (std::size_t i = 0; i < w.size(); ++i) {
          v[i] = cfg.momentum * v[i] + g.params[p][i] + cfg.weight_decay * w[i];
          w[i] -= m.lr * v[i];
        }
      }
      net.update_running_stats(tr);

      m.task_loss += ce.loss;
      m.sgr_loss += reg.loss;
      m.total_loss += total;
      for (std::size_t b = 0; b < y.size(); ++b) correct += static_cast<int>(argmax_row(tr.logits, b)) == y[b] ? 1 : 0;
    }

    const double s = static_cast<double>(steps);
    m.task_loss /= s;
    m.sgr_loss /= s;
    m.total_loss /= s;
    m.mean_omega = m.sgr_loss;
    for (std::size_t l = 0; l < L; ++l) {
      for (std::size_t t = 0; t < T; ++t) {
        m.layer_mu[l][t] /= s;
        m.layer_sigma[l][t] /= s;
      }
      m.p3[l] /= s;
    }
    m.train_accuracy = static_cast<double>(correct) / static_cast<double>(N);
    if (test_set) m.test_accuracy = clean_accuracy(net, *test_set, 256, seed);
    if (on_epoch) on_epoch(m);
    res.metrics.push_back(std::move(m));
  }
  res.checkpoint.net = std::move(net);
  res.checkpoint.epoch = cfg.epochs;
  res.checkpoint.rng_key = root.key();
  res.checkpoint.rng_counter = root.counter();
  return res;
}

std::string metrics_csv(const std::vector<EpochMetrics>& metrics) {
  std::ostringstream os;
  os.precision(17);
  os << "epoch,lr,task_loss,sgr_loss,total_loss,train_accuracy,test_accuracy,mean_omega";
  const std::size_t L = metrics.empty() ? 0 : metrics.front().layer_mu.size();
  const std::size_t T = L == 0 ? 0 : metrics.front().layer_mu.front().size();
  for (std::size_t l = 0; l < L; ++l) {
    for (std::size_t t = 0; t < T; ++t) os << ",mu_l" << l << "_t" << t;
    for (std::size_t t = 0; t < T; ++t) os << ",sigma_l" << l << "_t" << t;
    os << ",p3_l" << l;
  }
  os << "\n";
  for (const auto& m : metrics) {
    os << m.epoch << "," << m.lr << "," << m.task_loss << "," << m.sgr_loss << "," << m.total_loss << ","
       << m.train_accuracy << "," << m.test_accuracy << "," << m.mean_omega;
    for (std::size_t l = 0; l < L; ++l) {
      for (double v : m.layer_mu[l]) os << "," << v;
      for (double v : m.layer_sigma[l]) os << "," << v;
      os << "," << m.p3[l];
    }
    os << "\n";
  }
  return os.str();
}

json metrics_json(const std::vector<EpochMetrics>& metrics) {
  json arr = json::array();
  for (const auto& m : metrics)
    arr.push_back({{"epoch", m.epoch},
                   {"lr", m.lr},
                   {"task_loss", m.task_loss},
                   {"sgr_loss", m.sgr_loss},
                   {"total_loss", m.total_loss},
                   {"train_accuracy", m.train_accuracy},
                   {"test_accuracy", m.test_accuracy},
                   {"mean_omega", m.mean_omega},
                   {"layer_mu", m.layer_mu},
                   {"layer_sigma", m.layer_sigma},
                   {"p3", m.p3}});
  return arr;
}

}  // namespace spikeguard
