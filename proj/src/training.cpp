#include "curv/training.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>
#include <thread>

#include "curv/diff.hpp"
#include "curv/rng.hpp"

namespace curv {

TrainMode train_mode_from_string(const std::string& name) {
  if (name == "standard") return TrainMode::Standard;
  if (name == "curvature" || name == "curvature_only") return TrainMode::CurvatureOnly;
  if (name == "crt") return TrainMode::Crt;
  throw std::invalid_argument("unknown training mode: " + name);
}

std::string to_string(TrainMode mode) {
  switch (mode) {
    case TrainMode::Standard:
      return "standard";
    case TrainMode::CurvatureOnly:
      return "curvature";
    case TrainMode::Crt:
      return "crt";
  }
  return "unknown";
}

SpectralState make_spectral_state(const Mlp& net, std::uint64_t seed) {
  SpectralState state;
  Rng rng(seed ^ 0x5bec7a1full);
  for (const DenseLayer& l : net.layers()) {
    SpectralState::LayerState ls;
    ls.u = rng.unit_vector(l.weight.rows());
    ls.v = rng.unit_vector(l.weight.cols());
    ls.norm = 0;
    state.layers.push_back(std::move(ls));
  }
  return state;
}

SpectralGrad spectral_norm_grad(const Eigen::MatrixXd& W, SpectralState::LayerState& state) {
  if (state.u.size() != W.rows() || state.v.size() != W.cols())
    throw std::invalid_argument("spectral_norm_grad: state does not match matrix shape");
  Eigen::VectorXd v = W.transpose() * state.u;
  double vn = v.norm();
  if (vn > 0) state.v = v / vn;
  Eigen::VectorXd u = W * state.v;
  double un = u.norm();
  if (un > 0) state.u = u / un;
  state.norm = state.u.dot(W * state.v);
  SpectralGrad g;
  g.norm = state.norm;
  g.grad = state.u * state.v.transpose();
  return g;
}

double cross_entropy(const Eigen::VectorXd& logits, int label) {
  double mx = logits.maxCoeff();
  double lse = std::log((logits.array() - mx).exp().sum()) + mx;
  return lse - logits[label];
}

namespace {

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  Eigen::ArrayXd shifted = (logits.array() - logits.maxCoeff()).exp();
  return (shifted / shifted.sum()).matrix();
}

// Backprop of d loss / d logits through the network into parameter grads.
void accumulate_param_grads(const Mlp& net, const ForwardTrace& trace,
                            const Eigen::VectorXd& dlogits, std::vector<Eigen::MatrixXd>& dW,
                            std::vector<Eigen::VectorXd>& db) {
  const int L = net.depth();
  Eigen::VectorXd dz = dlogits;
  for (int i = L - 1; i >= 0; --i) {
    dW[static_cast<std::size_t>(i)].noalias() += dz * trace.a[static_cast<std::size_t>(i)].transpose();
    db[static_cast<std::size_t>(i)] += dz;
    if (i > 0) {
      Eigen::VectorXd da = net.layer(i).weight.transpose() * dz;
      const Eigen::VectorXd& z = trace.z[static_cast<std::size_t>(i - 1)];
      dz.resize(z.size());
      for (Eigen::Index j = 0; j < z.size(); ++j)
        dz[j] = da[j] * act_eval(net.activation(), z[j], 1);
    }
  }
}

Eigen::VectorXd sign_vector(const Eigen::VectorXd& v) {
  Eigen::VectorXd s(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) s[i] = v[i] > 0 ? 1.0 : (v[i] < 0 ? -1.0 : 0.0);
  return s;
}

// K(W, label, target) and its parameter gradient, with spectral norms (and
// their rank-one gradients) taken from the state after one power step each.
double curvature_penalty_grads(const Mlp& net, int label, int target, double gamma,
                               SpectralState& spectral, std::vector<Eigen::MatrixXd>& dW) {
  const int L = net.depth();
  const ActivationProfile prof = profile(net.activation());
  const double g = prof.g;
  const double h = prof.h;

  Eigen::VectorXd wdiff =
      net.layer(L - 1).weight.row(label) - net.layer(L - 1).weight.row(target);

  std::vector<SpectralGrad> spec(static_cast<std::size_t>(L - 1));
  for (int i = 0; i < L - 1; ++i)
    spec[static_cast<std::size_t>(i)] =
        spectral_norm_grad(net.layer(i).weight, spectral.layers[static_cast<std::size_t>(i)]);

  // q_I = g^(2(I-1)) * prod_{J<=I} ||W^(J)||^2, for I = 1..L-1.
  std::vector<double> q(static_cast<std::size_t>(L - 1));
  {
    double acc = 1.0;
    for (int I = 1; I <= L - 1; ++I) {
      double nu = spec[static_cast<std::size_t>(I - 1)].norm;
      acc *= nu * nu;
      if (I >= 2) acc *= g * g;
      q[static_cast<std::size_t>(I - 1)] = acc;
    }
  }

  // c^(I) rows: c^(L-1) = |wdiff|, c^(I) = g * c^(I+1) |W^(I+1)|.
  std::vector<Eigen::RowVectorXd> c(static_cast<std::size_t>(L));
  c[static_cast<std::size_t>(L - 1)] = wdiff.cwiseAbs().transpose();
  for (int I = L - 2; I >= 1; --I)
    c[static_cast<std::size_t>(I)] =
        g * c[static_cast<std::size_t>(I + 1)] * net.layer(I).weight.cwiseAbs();

  std::vector<double> mu(static_cast<std::size_t>(L));
  std::vector<Eigen::Index> argmax(static_cast<std::size_t>(L));
  for (int I = 1; I <= L - 1; ++I) {
    Eigen::Index j;
    mu[static_cast<std::size_t>(I)] = c[static_cast<std::size_t>(I)].maxCoeff(&j);
    argmax[static_cast<std::size_t>(I)] = j;
  }

  double K = 0.0;
  for (int I = 1; I <= L - 1; ++I)
    K += q[static_cast<std::size_t>(I - 1)] * mu[static_cast<std::size_t>(I)];
  K *= h;

  if (gamma == 0.0) return K;

  // Spectral-norm terms: dK/d nu_J = h * sum_{I >= J} q_I mu_I * 2 / nu_J.
  for (int J = 1; J <= L - 1; ++J) {
    double nu = spec[static_cast<std::size_t>(J - 1)].norm;
    if (nu <= 0.0) continue;
    double coeff = 0.0;
    for (int I = J; I <= L - 1; ++I)
      coeff += q[static_cast<std::size_t>(I - 1)] * mu[static_cast<std::size_t>(I)];
    coeff *= h * 2.0 / nu;
    dW[static_cast<std::size_t>(J - 1)].noalias() +=
        gamma * coeff * spec[static_cast<std::size_t>(J - 1)].grad;
  }

  // Reverse sweep through the c-chain; delta is the adjoint of c^(I).
  Eigen::RowVectorXd delta = Eigen::RowVectorXd::Zero(c[1].size());
  delta[argmax[1]] = h * q[0];
  for (int I = 1; I <= L - 2; ++I) {
    const Eigen::MatrixXd& W = net.layer(I).weight;
    Eigen::MatrixXd dabs =
        g * c[static_cast<std::size_t>(I + 1)].transpose() * delta;  // d K / d |W^(I+1)|
    for (Eigen::Index r = 0; r < W.rows(); ++r)
      for (Eigen::Index cidx = 0; cidx < W.cols(); ++cidx) {
        double s = W(r, cidx) > 0 ? 1.0 : (W(r, cidx) < 0 ? -1.0 : 0.0);
        dW[static_cast<std::size_t>(I)](r, cidx) += gamma * s * dabs(r, cidx);
      }
    Eigen::RowVectorXd next = g * delta * W.cwiseAbs().transpose();
    next[argmax[static_cast<std::size_t>(I + 1)]] +=
        h * q[static_cast<std::size_t>(I)];
    delta = std::move(next);
  }

  // delta is now the adjoint of |wdiff|.
  Eigen::VectorXd dwdiff = delta.transpose().cwiseProduct(sign_vector(wdiff));
  dW[static_cast<std::size_t>(L - 1)].row(label) += gamma * dwdiff.transpose();
  dW[static_cast<std::size_t>(L - 1)].row(target) -= gamma * dwdiff.transpose();
  return K;
}

}  // namespace

LossGrads crt_loss(const Mlp& net, const Eigen::VectorXd& x0, int label, int target, double gamma,
                   SpectralState& spectral, const Eigen::VectorXd* attack_point) {
  if (label == target) throw std::invalid_argument("crt_loss: label == target");
  LossGrads out;
  out.weight_grads.resize(static_cast<std::size_t>(net.depth()));
  out.bias_grads.resize(static_cast<std::size_t>(net.depth()));
  for (int i = 0; i < net.depth(); ++i) {
    const DenseLayer& l = net.layer(i);
    out.weight_grads[static_cast<std::size_t>(i)] =
        Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols());
    out.bias_grads[static_cast<std::size_t>(i)] = Eigen::VectorXd::Zero(l.bias.size());
  }

  const Eigen::VectorXd& x = attack_point ? *attack_point : x0;
  ForwardTrace trace = forward(net, x);
  out.loss = cross_entropy(trace.logits(), label);
  Eigen::VectorXd dlogits = softmax(trace.logits());
  dlogits[label] -= 1.0;
  accumulate_param_grads(net, trace, dlogits, out.weight_grads, out.bias_grads);

  if (gamma != 0.0) {
    out.k_value =
        curvature_penalty_grads(net, label, target, gamma, spectral, out.weight_grads);
    out.loss += gamma * out.k_value;
  }
  return out;
}

Eigen::VectorXd pgd_attack(const Mlp& net, const Eigen::VectorXd& x0, int label, double rho,
                           int steps, double step_size, std::uint64_t seed) {
  if (!(rho > 0.0)) throw std::invalid_argument("pgd_attack: rho must be positive");
  if (step_size <= 0.0) step_size = rho / 10.0;
  Rng rng(seed ^ 0x9dull);

  auto project = [&](Eigen::VectorXd x) {
    Eigen::VectorXd d = x - x0;
    double n = d.norm();
    if (n > rho) x = x0 + (rho / n) * d;
    return x;
  };

  auto run = [&](Eigen::VectorXd x) {
    for (int s = 0; s < steps; ++s) {
      ForwardTrace trace = forward(net, x);
      Eigen::VectorXd dlogits = softmax(trace.logits());
      dlogits[label] -= 1.0;
      Eigen::VectorXd g = input_gradient(net, trace, dlogits);
      double n = g.norm();
      if (n == 0.0) break;
      x = project(x + (step_size / n) * g);
    }
    return x;
  };

  Eigen::VectorXd best = run(x0);
  double best_loss = cross_entropy(forward(net, best).logits(), label);
  if (steps > 0) {
    Eigen::VectorXd start = project(x0 + rho * rng.uniform01() * rng.unit_vector(x0.size()));
    Eigen::VectorXd alt = run(start);
    double alt_loss = cross_entropy(forward(net, alt).logits(), label);
    if (alt_loss > best_loss) best = alt;
  }
  return best;
}

Mlp random_mlp(const std::vector<int>& dims, ActivationKind kind, std::uint64_t seed) {
  if (dims.size() < 3) throw std::invalid_argument("random_mlp: need at least 2 layers");
  Rng rng(seed);
  std::vector<DenseLayer> layers;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    const int fan_in = dims[i];
    const int fan_out = dims[i + 1];
    double a = std::sqrt(6.0 / (fan_in + fan_out));
    DenseLayer l;
    l.weight.resize(fan_out, fan_in);
    for (Eigen::Index r = 0; r < fan_out; ++r)
      for (Eigen::Index c = 0; c < fan_in; ++c) l.weight(r, c) = rng.uniform(-a, a);
    l.bias = Eigen::VectorXd::Zero(fan_out);
    layers.push_back(std::move(l));
  }
  return Mlp(std::move(layers), kind);
}

namespace {

struct AdamState {
  std::vector<Eigen::MatrixXd> mw, vw;
  std::vector<Eigen::VectorXd> mb, vb;
  int step = 0;
};

}  // namespace

TrainResult train(const Mlp& init, const Dataset& data, const TrainConfig& config) {
  if (data.size() == 0) throw std::invalid_argument("train: dataset is empty");
  if (data.dim != init.input_dim()) throw std::invalid_argument("train: input dim mismatch");
  if (config.mode == TrainMode::Crt && !(config.rho > 0.0))
    throw std::invalid_argument("train: crt mode requires rho > 0");
  if (config.gamma < 0.0) throw std::invalid_argument("train: gamma must be >= 0");

  std::vector<DenseLayer> params = init.layers();
  Rng rng(config.seed);
  SpectralState spectral = make_spectral_state(init, config.seed);
  const double gamma = config.mode == TrainMode::Standard ? 0.0 : config.gamma;

  AdamState adam;
  if (config.adam) {
    for (const DenseLayer& l : params) {
      adam.mw.push_back(Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()));
      adam.vw.push_back(Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()));
      adam.mb.push_back(Eigen::VectorXd::Zero(l.bias.size()));
      adam.vb.push_back(Eigen::VectorXd::Zero(l.bias.size()));
    }
  }

  TrainResult result{Mlp(params, init.activation()), {}};
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  long step_index = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    auto t0 = std::chrono::steady_clock::now();
    rng.shuffle(order);
    double epoch_loss = 0.0;
    double epoch_k = 0.0;
    long correct = 0;

    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const std::size_t batch = end - start;
      Mlp net(params, init.activation());

      std::vector<Eigen::MatrixXd> dW;
      std::vector<Eigen::VectorXd> db;
      for (const DenseLayer& l : params) {
        dW.push_back(Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()));
        db.push_back(Eigen::VectorXd::Zero(l.bias.size()));
      }

      bool attack_now = config.mode == TrainMode::Crt &&
                        (config.attack_every <= 1 || step_index % config.attack_every == 0);

      for (std::size_t b = start; b < end; ++b) {
        const Eigen::VectorXd& x = data.images[order[b]];
        const int y = data.labels[order[b]];
        ForwardTrace trace = forward(net, x);
        Eigen::Index pred;
        trace.logits().maxCoeff(&pred);
        if (static_cast<int>(pred) == y) ++correct;
        const int t = top_other(trace.logits(), y);

        Eigen::VectorXd attack_point;
        const Eigen::VectorXd* attack_ptr = nullptr;
        if (attack_now) {
          attack_point = attack(net, x, y, t, config.rho, config.solver).x_attack;
          attack_ptr = &attack_point;
        }
        LossGrads grads = crt_loss(net, x, y, t, gamma, spectral, attack_ptr);
        epoch_loss += grads.loss;
        epoch_k += grads.k_value;
        for (std::size_t i = 0; i < params.size(); ++i) {
          dW[i] += grads.weight_grads[i];
          db[i] += grads.bias_grads[i];
        }
      }

      const double scale = 1.0 / static_cast<double>(batch);
      if (config.adam) {
        constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
        ++adam.step;
        double c1 = 1.0 - std::pow(b1, adam.step);
        double c2 = 1.0 - std::pow(b2, adam.step);
        for (std::size_t i = 0; i < params.size(); ++i) {
          Eigen::MatrixXd gw = dW[i] * scale;
          Eigen::VectorXd gb = db[i] * scale;
          adam.mw[i] = b1 * adam.mw[i] + (1 - b1) * gw;
          adam.vw[i] = b2 * adam.vw[i] + (1 - b2) * gw.cwiseProduct(gw);
          adam.mb[i] = b1 * adam.mb[i] + (1 - b1) * gb;
          adam.vb[i] = b2 * adam.vb[i] + (1 - b2) * gb.cwiseProduct(gb);
          params[i].weight -= config.learning_rate *
                              ((adam.mw[i] / c1).array() /
                               ((adam.vw[i] / c2).array().sqrt() + eps))
                                  .matrix();
          params[i].bias -= config.learning_rate *
                            ((adam.mb[i] / c1).array() /
                             ((adam.vb[i] / c2).array().sqrt() + eps))
                                .matrix();
        }
      } else {
        for (std::size_t i = 0; i < params.size(); ++i) {
          params[i].weight -= config.learning_rate * scale * dW[i];
          params[i].bias -= config.learning_rate * scale * db[i];
        }
      }
      for (std::size_t i = 0; i < params.size(); ++i)
        if (!params[i].weight.allFinite() || !params[i].bias.allFinite())
          throw NumericalFault("train: non-finite parameters after step " +
                               std::to_string(step_index));
      ++step_index;
    }

    auto t1 = std::chrono::steady_clock::now();
    EpochStats stats;
    stats.epoch = epoch + 1;
    stats.loss = epoch_loss / static_cast<double>(data.size());
    stats.accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
    stats.mean_k = epoch_k / static_cast<double>(data.size());
    stats.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
    result.epochs.push_back(stats);
  }

  result.net = Mlp(std::move(params), init.activation());
  return result;
}

namespace {

struct PerInputEval {
  bool correct = false;
  bool pgd_robust = false;
  bool certified = false;
  bool attack_boundary = false;
  bool cert_tight = false;
  double crc = 0;
  int target = -1;
  double hessian_norm = 0;
};

}  // namespace

EvalReport evaluate(const Mlp& net, const Dataset& data, double rho, const EvalOptions& opts) {
  EvalReport report;
  report.rho = rho;
  report.sample_count = static_cast<int>(data.size());
  if (data.size() == 0) return report;

  std::vector<PerInputEval> per(data.size());
  const int workers = std::max(1, opts.workers);
  std::atomic<std::size_t> cursor{0};
  auto work = [&]() {
    for (;;) {
      std::size_t i = cursor.fetch_add(1);
      if (i >= data.size()) return;
      const Eigen::VectorXd& x = data.images[i];
      const int y = data.labels[i];
      PerInputEval& e = per[i];
      ForwardTrace trace = forward(net, x);
      Eigen::Index pred;
      trace.logits().maxCoeff(&pred);
      e.correct = static_cast<int>(pred) == y;
      e.target = top_other(trace.logits(), y);

      Eigen::MatrixXd hess = hessian_margin(net, x, y, e.target);
      e.hessian_norm = power_iteration(hess, 100).magnitude;

      if (e.correct) {
        CertificateResult cert = certify(net, x, y, e.target, opts.solver);
        e.crc = cert.radius;
        e.certified = cert.radius > rho;
        e.cert_tight = cert.tight;
        AttackResult atk = attack(net, x, y, e.target, rho, opts.solver);
        e.attack_boundary = atk.on_boundary;
        Eigen::VectorXd adv = pgd_attack(net, x, y, rho, opts.pgd_steps, 0.0, opts.seed + i);
        Eigen::Index adv_pred;
        forward(net, adv).logits().maxCoeff(&adv_pred);
        e.pgd_robust = static_cast<int>(adv_pred) == y;
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();
  }

  long correct = 0, robust = 0, certified = 0, tight = 0, boundary = 0;
  double crc_sum = 0;
  std::map<std::pair<int, int>, std::pair<long, double>> pair_stats;  // count, max |eig|
  for (std::size_t i = 0; i < data.size(); ++i) {
    const PerInputEval& e = per[i];
    if (e.correct) {
      ++correct;
      if (e.pgd_robust) ++robust;
      if (e.certified) ++certified;
      if (e.cert_tight) ++tight;
      if (e.attack_boundary) ++boundary;
      crc_sum += e.crc;
    }
    auto& ps = pair_stats[{data.labels[i], e.target}];
    ps.first += 1;
    ps.second = std::max(ps.second, e.hessian_norm);
  }

  const double n = static_cast<double>(data.size());
  report.standard_accuracy = correct / n;
  report.empirical_robust_accuracy = robust / n;
  report.certified_robust_accuracy = certified / n;
  report.certificate_success_rate = correct > 0 ? tight / static_cast<double>(correct) : 0.0;
  report.attack_success_rate = correct > 0 ? boundary / static_cast<double>(correct) : 0.0;
  report.mean_crc = correct > 0 ? crc_sum / static_cast<double>(correct) : 0.0;

  double klb_sum = 0, kub_sum = 0;
  long qualifying = 0;
  for (const auto& [pair, stats] : pair_stats) {
    if (stats.first < opts.min_pair_count) continue;
    ++qualifying;
    klb_sum += stats.second;
    kub_sum += deep_bound(net, pair.first, pair.second, 500);
  }
  if (qualifying > 0) {
    report.k_lb = klb_sum / static_cast<double>(qualifying);
    report.k_ub = kub_sum / static_cast<double>(qualifying);
  }
  return report;
}

}  // namespace curv
