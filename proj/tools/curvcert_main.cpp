// curvcert: train, certify, attack and evaluate small dense networks with
// curvature-based robustness guarantees.

#include <atomic>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "curv/data_io.hpp"
#include "curv/diff.hpp"
#include "curv/rng.hpp"
#include "curv/training.hpp"

namespace {

using namespace curv;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

std::string now_string() {
  std::time_t t = std::time(nullptr);
  char buf[64];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%S", std::gmtime(&t));
  return buf;
}

// "LxW" -> dims with L-1 hidden layers of width W.
std::vector<int> parse_arch(const std::string& arch, int input_dim, int classes) {
  auto fail = [&] {
    throw std::invalid_argument("bad --arch '" + arch + "': expected LxW with L >= 2, W >= 1");
  };
  auto x = arch.find('x');
  if (x == std::string::npos || x == 0 || x + 1 >= arch.size()) fail();
  int layers = 0, width = 0;
  try {
    layers = std::stoi(arch.substr(0, x));
    width = std::stoi(arch.substr(x + 1));
  } catch (const std::exception&) {
    fail();
  }
  if (layers < 2 || width < 1) fail();
  std::vector<int> dims;
  dims.push_back(input_dim);
  for (int i = 0; i < layers - 1; ++i) dims.push_back(width);
  dims.push_back(classes);
  return dims;
}

struct OutStream {
  std::ofstream file;
  std::ostream* out = &std::cout;
  explicit OutStream(const std::string& path) {
    if (!path.empty()) {
      file.open(path);
      if (!file) throw DataError(DataErrorKind::FileAccess, "cannot write " + path);
      out = &file;
    }
  }
};

Dataset load_and_slice(const std::string& images, const std::string& labels, int limit) {
  Dataset data = load_idx(images, labels);
  if (limit > 0 && static_cast<std::size_t>(limit) < data.size()) {
    data.images.resize(static_cast<std::size_t>(limit));
    data.labels.resize(static_cast<std::size_t>(limit));
  }
  return data;
}

int pick_target(const Eigen::VectorXd& logits, int label, const std::string& policy, Rng& rng) {
  if (policy == "runner-up") return top_other(logits, label);
  if (policy == "least") {
    int worst = -1;
    for (int i = 0; i < logits.size(); ++i) {
      if (i == label) continue;
      if (worst < 0 || logits[i] < logits[worst]) worst = i;
    }
    return worst;
  }
  if (policy == "random") {
    int c = static_cast<int>(logits.size());
    int t = static_cast<int>(rng.below(static_cast<std::uint64_t>(c - 1)));
    return t >= label ? t + 1 : t;
  }
  throw std::invalid_argument("unknown --target-policy: " + policy);
}

// Fan a per-index job over a worker pool; results land in order.
template <typename Fn>
void parallel_for(int count, int workers, Fn&& fn) {
  workers = std::max(1, workers);
  if (workers == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> cursor{0};
  auto body = [&] {
    for (;;) {
      int i = cursor.fetch_add(1);
      if (i >= count) return;
      fn(i);
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(body);
  for (std::thread& t : pool) t.join();
}

struct CommonFlags {
  std::string model;
  std::string images;
  std::string labels;
  std::string out;
  std::string format = "csv";
  std::uint64_t seed = 0;
  int workers = static_cast<int>(std::thread::hardware_concurrency());
  bool timing = false;
};

ReportFormat parse_format(const std::string& f) {
  if (f == "csv") return ReportFormat::Csv;
  if (f == "jsonl") return ReportFormat::JsonLines;
  throw std::invalid_argument("unknown --format: " + f);
}

int cmd_train(const std::string& images, const std::string& labels, const std::string& arch,
              const std::string& activation, double gamma, double rho, const std::string& mode,
              int epochs, int batch_size, double lr, std::uint64_t seed, bool adam,
              int attack_every, int limit, const std::string& out_model,
              const std::string& metrics_path) {
  Dataset data = load_and_slice(images, labels, limit);
  ActivationKind kind = activation_from_string(activation);
  TrainConfig config;
  config.mode = train_mode_from_string(mode);
  config.gamma = gamma;
  config.rho = rho;
  config.epochs = epochs;
  config.batch_size = batch_size;
  config.learning_rate = lr;
  config.seed = seed;
  config.adam = adam;
  config.attack_every = attack_every;

  std::vector<int> dims = parse_arch(arch, data.dim, std::max(2, data.class_count));
  Mlp init = random_mlp(dims, kind, seed);
  TrainResult result = train(init, data, config);

  if (!metrics_path.empty()) {
    std::ofstream metrics(metrics_path);
    if (!metrics) throw DataError(DataErrorKind::FileAccess, "cannot write " + metrics_path);
    for (const EpochStats& s : result.epochs) {
      metrics << "{\"epoch\":" << s.epoch << ",\"loss\":" << format_float(s.loss)
              << ",\"accuracy\":" << format_float(s.accuracy)
              << ",\"mean_k\":" << format_float(s.mean_k)
              << ",\"wall_seconds\":" << format_float(s.wall_seconds) << "}\n";
    }
  }
  for (const EpochStats& s : result.epochs)
    std::cerr << "epoch " << s.epoch << " loss " << format_float(s.loss) << " acc "
              << format_float(s.accuracy) << " mean_k " << format_float(s.mean_k) << "\n";

  ModelMeta meta;
  meta.gamma = gamma;
  meta.mode = mode;
  meta.seed = seed;
  save_model(result.net, out_model, meta);
  std::cerr << "saved model to " << out_model << "\n";
  return 0;
}

int cmd_certify(const CommonFlags& flags, int count, const std::string& policy, bool local,
                int refinements) {
  LoadedModel model = load_model(flags.model);
  if (local && model.net.depth() != 2)
    throw std::invalid_argument("--local requires a 2-layer model");
  Dataset data = load_idx(flags.images, flags.labels);

  // The protocol certifies correctly classified inputs only.
  Rng rng(flags.seed);
  std::vector<int> chosen;
  std::vector<int> targets;
  for (std::size_t i = 0; i < data.size() && static_cast<int>(chosen.size()) < count; ++i) {
    ForwardTrace trace = forward(model.net, data.images[i]);
    Eigen::Index pred;
    trace.logits().maxCoeff(&pred);
    if (static_cast<int>(pred) != data.labels[i]) continue;
    chosen.push_back(static_cast<int>(i));
    targets.push_back(pick_target(trace.logits(), data.labels[i], policy, rng));
  }

  std::vector<CertificateRecord> records(chosen.size());
  parallel_for(static_cast<int>(chosen.size()), flags.workers, [&](int j) {
    const int i = chosen[static_cast<std::size_t>(j)];
    const int y = data.labels[static_cast<std::size_t>(i)];
    const int t = targets[static_cast<std::size_t>(j)];
    auto t0 = std::chrono::steady_clock::now();
    CertificateResult res =
        local ? certify_local(model.net, data.images[static_cast<std::size_t>(i)], y, t,
                              refinements)
              : certify(model.net, data.images[static_cast<std::size_t>(i)], y, t);
    auto t1 = std::chrono::steady_clock::now();
    CertificateRecord& r = records[static_cast<std::size_t>(j)];
    r.id = i;
    r.label = y;
    r.target = t;
    r.radius = res.radius;
    r.eta = res.eta;
    r.margin = res.margin_at_x;
    r.flag = res.tight;
    r.wall_ms = flags.timing ? std::chrono::duration<double, std::milli>(t1 - t0).count() : 0.0;
  });

  OutStream out(flags.out);
  ReportHeader header{{"command", "certify"},
                      {"model", flags.model},
                      {"images", flags.images},
                      {"labels", flags.labels},
                      {"count", std::to_string(count)},
                      {"target_policy", policy},
                      {"local", local ? "1" : "0"},
                      {"refinements", std::to_string(refinements)},
                      {"seed", std::to_string(flags.seed)},
                      {"workers", std::to_string(flags.workers)},
                      {"format", flags.format},
                      {"time", now_string()}};
  write_certificate_records(records, *out.out, parse_format(flags.format), header);

  double mean_crc = 0;
  long tight = 0;
  for (const CertificateRecord& r : records) {
    mean_crc += r.radius;
    tight += r.flag ? 1 : 0;
  }
  if (!records.empty()) mean_crc /= static_cast<double>(records.size());
  std::cerr << "certified " << records.size() << " inputs; mean CRC " << format_float(mean_crc)
            << "; certificate success rate "
            << format_float(records.empty() ? 0.0
                                            : static_cast<double>(tight) /
                                                  static_cast<double>(records.size()))
            << "\n";
  return 0;
}

int cmd_attack(const CommonFlags& flags, int count, double rho, const std::string& policy) {
  LoadedModel model = load_model(flags.model);
  Dataset data = load_idx(flags.images, flags.labels);

  Rng rng(flags.seed);
  std::vector<int> chosen;
  std::vector<int> targets;
  for (std::size_t i = 0; i < data.size() && static_cast<int>(chosen.size()) < count; ++i) {
    ForwardTrace trace = forward(model.net, data.images[i]);
    Eigen::Index pred;
    trace.logits().maxCoeff(&pred);
    if (static_cast<int>(pred) != data.labels[i]) continue;
    chosen.push_back(static_cast<int>(i));
    targets.push_back(pick_target(trace.logits(), data.labels[i], policy, rng));
  }

  std::vector<CertificateRecord> records(chosen.size());
  std::atomic<long> pinned{0};
  parallel_for(static_cast<int>(chosen.size()), flags.workers, [&](int j) {
    const int i = chosen[static_cast<std::size_t>(j)];
    const int y = data.labels[static_cast<std::size_t>(i)];
    const int t = targets[static_cast<std::size_t>(j)];
    auto t0 = std::chrono::steady_clock::now();
    AttackResult res = attack(model.net, data.images[static_cast<std::size_t>(i)], y, t, rho);
    auto t1 = std::chrono::steady_clock::now();
    if (res.eta_at_max) pinned.fetch_add(1);
    CertificateRecord& r = records[static_cast<std::size_t>(j)];
    r.id = i;
    r.label = y;
    r.target = t;
    r.radius = res.distance;
    r.eta = res.eta;
    r.margin = res.margin_at_x;
    r.flag = res.on_boundary;
    r.wall_ms = flags.timing ? std::chrono::duration<double, std::milli>(t1 - t0).count() : 0.0;
  });

  OutStream out(flags.out);
  ReportHeader header{{"command", "attack"},
                      {"model", flags.model},
                      {"images", flags.images},
                      {"labels", flags.labels},
                      {"rho", format_float(rho)},
                      {"count", std::to_string(count)},
                      {"target_policy", policy},
                      {"seed", std::to_string(flags.seed)},
                      {"workers", std::to_string(flags.workers)},
                      {"format", flags.format},
                      {"time", now_string()}};
  write_certificate_records(records, *out.out, parse_format(flags.format), header);
  if (pinned.load() > 0)
    std::cerr << "warning: eta bisection hit the upper limit on " << pinned.load()
              << " inputs; the dual may be under-maximized there\n";
  long boundary = 0;
  for (const CertificateRecord& r : records) boundary += r.flag ? 1 : 0;
  std::cerr << "attacked " << records.size() << " inputs at rho " << format_float(rho)
            << "; attack success rate "
            << format_float(records.empty() ? 0.0
                                            : static_cast<double>(boundary) /
                                                  static_cast<double>(records.size()))
            << "\n";
  return 0;
}

int cmd_eval(const CommonFlags& flags, int count, double rho, int min_pair_count) {
  LoadedModel model = load_model(flags.model);
  Dataset data = load_and_slice(flags.images, flags.labels, count);
  EvalOptions opts;
  opts.min_pair_count = min_pair_count;
  opts.workers = flags.workers;
  opts.seed = flags.seed;
  EvalReport report = evaluate(model.net, data, rho, opts);

  OutStream out(flags.out);
  ReportHeader header{{"command", "eval"},
                      {"model", flags.model},
                      {"images", flags.images},
                      {"labels", flags.labels},
                      {"rho", format_float(rho)},
                      {"count", std::to_string(count)},
                      {"min_pair_count", std::to_string(min_pair_count)},
                      {"seed", std::to_string(flags.seed)},
                      {"workers", std::to_string(flags.workers)},
                      {"format", flags.format},
                      {"time", now_string()}};
  write_eval_report(report, *out.out, parse_format(flags.format), header);
  return 0;
}

int cmd_bounds(const CommonFlags& flags, int label, int target) {
  LoadedModel model = load_model(flags.model);
  const int classes = model.net.class_count();
  OutStream out(flags.out);
  ReportHeader header{{"command", "bounds"}, {"model", flags.model}, {"time", now_string()}};
  if (parse_format(flags.format) == ReportFormat::Csv) {
    for (const auto& [k, v] : header) *out.out << "# " << k << "=" << v << "\n";
    *out.out << "label,target,m,M,K\n";
  }
  auto emit = [&](int y, int t) {
    CurvatureBounds b = margin_bounds(model.net, y, t);
    if (parse_format(flags.format) == ReportFormat::Csv) {
      *out.out << y << ',' << t << ',' << format_float(b.m) << ',' << format_float(b.M) << ','
               << format_float(b.K) << "\n";
    } else {
      *out.out << "{\"label\":" << y << ",\"target\":" << t << ",\"m\":\"" << format_float(b.m)
               << "\",\"M\":\"" << format_float(b.M) << "\",\"K\":\"" << format_float(b.K)
               << "\"}\n";
    }
  };
  if (label >= 0 && target >= 0) {
    if (label == target || label >= classes || target >= classes)
      throw std::invalid_argument("bounds: bad --label/--target pair");
    emit(label, target);
  } else {
    for (int y = 0; y < classes; ++y)
      for (int t = 0; t < classes; ++t)
        if (y != t) emit(y, t);
  }
  return 0;
}

// Self-test oracles: finite differences against the analytic derivatives and
// sampled eigenvalue containment against the curvature bounds.
int cmd_check(std::uint64_t seed) {
  Rng rng(seed ^ 0xc8ecull);
  int failures = 0;
  auto report = [&](const std::string& name, bool ok, const std::string& detail) {
    std::cout << (ok ? "ok   " : "FAIL ") << name << (detail.empty() ? "" : "  (" + detail + ")")
              << "\n";
    if (!ok) ++failures;
  };

  const ActivationKind kinds[] = {ActivationKind::Sigmoid, ActivationKind::Tanh,
                                  ActivationKind::Softplus};

  {  // activation derivatives vs central differences
    double worst = 0;
    for (ActivationKind kind : kinds) {
      for (int i = 0; i < 200; ++i) {
        double x = rng.uniform(-6.0, 6.0);
        double d1 = (act_eval(kind, x + 1e-5, 0) - act_eval(kind, x - 1e-5, 0)) / 2e-5;
        double d2 =
            (act_eval(kind, x + 1e-4, 0) - 2 * act_eval(kind, x, 0) + act_eval(kind, x - 1e-4, 0)) /
            1e-8;
        worst = std::max(worst, std::abs(d1 - act_eval(kind, x, 1)));
        worst = std::max(worst, std::abs(d2 - act_eval(kind, x, 2)));
      }
    }
    report("activation derivatives vs finite differences", worst < 1e-5,
           "max err " + format_float(worst));
  }

  {  // hessian vs finite differences on random nets
    double worst = 0;
    for (int depth = 2; depth <= 4; ++depth) {
      for (ActivationKind kind : kinds) {
        std::vector<int> dims{4};
        for (int l = 0; l < depth - 1; ++l) dims.push_back(5);
        dims.push_back(3);
        Mlp net = random_mlp(dims, kind, rng.bits());
        Eigen::VectorXd x = rng.normal_vector(4);
        Eigen::MatrixXd h = hessian_margin(net, x, 0, 1);
        Eigen::MatrixXd fd = fd_hessian_margin(net, x, 0, 1);
        worst = std::max(worst, (h - fd).cwiseAbs().maxCoeff());
      }
    }
    report("margin hessian vs finite differences", worst < 1e-4, "max err " + format_float(worst));
  }

  {  // sampled eigenvalues inside [m, M] and [-K, K]
    bool ok = true;
    for (int depth = 2; depth <= 3 && ok; ++depth) {
      std::vector<int> dims{4};
      for (int l = 0; l < depth - 1; ++l) dims.push_back(6);
      dims.push_back(3);
      Mlp net = random_mlp(dims, ActivationKind::Sigmoid, rng.bits());
      CurvatureBounds b = margin_bounds(net, 0, 1, 500);
      for (int i = 0; i < 2000 && ok; ++i) {
        Eigen::VectorXd x = 5.0 * rng.normal_vector(4);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(hessian_margin(net, x, 0, 1));
        double lo = eig.eigenvalues().minCoeff();
        double hi = eig.eigenvalues().maxCoeff();
        ok = lo >= b.m - 1e-9 && hi <= b.M + 1e-9 && std::max(std::abs(lo), std::abs(hi)) <=
                                                         b.K + 1e-9;
      }
    }
    report("sampled hessian eigenvalues inside curvature bounds", ok, "");
  }

  {  // spectral norm gradient vs directional finite differences
    Mlp net = random_mlp({6, 8, 4}, ActivationKind::Tanh, rng.bits());
    SpectralState state = make_spectral_state(net, seed);
    const Eigen::MatrixXd& W = net.layer(0).weight;
    SpectralGrad g{};
    for (int i = 0; i < 200; ++i) g = spectral_norm_grad(W, state.layers[0]);
    Eigen::MatrixXd delta(W.rows(), W.cols());
    for (Eigen::Index r = 0; r < W.rows(); ++r)
      for (Eigen::Index c = 0; c < W.cols(); ++c) delta(r, c) = rng.normal();
    double eps = 1e-6;
    double fd = (spectral_norm(W + eps * delta, 500) - spectral_norm(W - eps * delta, 500)) /
                (2 * eps);
    double analytic = (g.grad.array() * delta.array()).sum();
    bool ok = std::abs(fd - analytic) <= 1e-4 * std::max(1.0, std::abs(fd));
    report("spectral norm gradient vs finite differences", ok,
           "fd " + format_float(fd) + " analytic " + format_float(analytic));
  }

  {  // MM inner objective monotone on a toy net
    Mlp net = random_mlp({3, 6, 3}, ActivationKind::Sigmoid, rng.bits());
    bool ok = true;
    for (int i = 0; i < 20 && ok; ++i) {
      Eigen::VectorXd x0 = rng.normal_vector(3);
      CurvatureBounds b = margin_bounds(net, 0, 1);
      InnerTrace trace;
      inner_cert(net, x0, 0, 1, 0.5 * (-1 / b.M + -1 / b.m), b.K, 20, 0.0, nullptr, &trace);
      for (std::size_t k = 1; k < trace.objective.size(); ++k)
        ok = ok && trace.objective[k] <= trace.objective[k - 1] + 1e-10;
    }
    report("inner MM objective non-increasing", ok, "");
  }

  std::cout << (failures == 0 ? "all checks passed" : "CHECK FAILURES") << "\n";
  return failures == 0 ? 0 : kExitNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"curvature-based robustness certification for dense networks"};
  app.require_subcommand(1);

  // train
  auto* train_cmd = app.add_subcommand("train", "train a model");
  std::string tr_images, tr_labels, tr_arch = "2x64", tr_act = "sigmoid", tr_mode = "standard";
  std::string tr_out = "model.json", tr_metrics;
  double tr_gamma = 0, tr_rho = 0, tr_lr = 0.5;
  int tr_epochs = 5, tr_batch = 64, tr_attack_every = 1, tr_limit = 0;
  std::uint64_t tr_seed = 0;
  bool tr_adam = false;
  train_cmd->add_option("--images", tr_images, "IDX image file")->required();
  train_cmd->add_option("--labels", tr_labels, "IDX label file")->required();
  train_cmd->add_option("--arch", tr_arch, "architecture LxW, e.g. 2x64");
  train_cmd->add_option("--activation", tr_act, "sigmoid|tanh|softplus");
  train_cmd->add_option("--gamma", tr_gamma, "curvature regularization coefficient");
  train_cmd->add_option("--rho", tr_rho, "attack radius (crt mode)");
  train_cmd->add_option("--mode", tr_mode, "standard|curvature|crt");
  train_cmd->add_option("--epochs", tr_epochs);
  train_cmd->add_option("--batch-size", tr_batch);
  train_cmd->add_option("--lr", tr_lr, "learning rate");
  train_cmd->add_option("--seed", tr_seed);
  train_cmd->add_flag("--adam", tr_adam, "adaptive-moment optimizer");
  train_cmd->add_option("--attack-every", tr_attack_every);
  train_cmd->add_option("--limit", tr_limit, "use only the first N examples");
  train_cmd->add_option("--out", tr_out, "output model path");
  train_cmd->add_option("--metrics", tr_metrics, "per-epoch metrics file (json lines)");

  // shared flags builder
  auto add_common = [](CLI::App* cmd, CommonFlags& flags, bool needs_data) {
    cmd->add_option("--model", flags.model, "model file")->required();
    auto* img = cmd->add_option("--images", flags.images, "IDX image file");
    auto* lab = cmd->add_option("--labels", flags.labels, "IDX label file");
    if (needs_data) {
      img->required();
      lab->required();
    }
    cmd->add_option("--out", flags.out, "output path (default stdout)");
    cmd->add_option("--format", flags.format, "csv|jsonl");
    cmd->add_option("--seed", flags.seed);
    cmd->add_option("--workers", flags.workers, "worker threads");
    cmd->add_flag("--timing", flags.timing, "record wall time per input");
  };

  auto* certify_cmd = app.add_subcommand("certify", "compute robustness certificates");
  CommonFlags cf;
  int cf_count = 150, cf_refinements = 5;
  std::string cf_policy = "runner-up";
  bool cf_local = false;
  add_common(certify_cmd, cf, true);
  certify_cmd->add_option("--count", cf_count, "number of correctly classified inputs");
  certify_cmd->add_option("--target-policy", cf_policy, "runner-up|random|least");
  certify_cmd->add_flag("--local", cf_local, "local-bound refinement (2-layer only)");
  certify_cmd->add_option("--refinements", cf_refinements);

  auto* attack_cmd = app.add_subcommand("attack", "compute dual attacks");
  CommonFlags af;
  int af_count = 150;
  double af_rho = 0.5;
  std::string af_policy = "runner-up";
  add_common(attack_cmd, af, true);
  attack_cmd->add_option("--count", af_count);
  attack_cmd->add_option("--rho", af_rho, "l2 attack radius")->required();
  attack_cmd->add_option("--target-policy", af_policy, "runner-up|random|least");

  auto* eval_cmd = app.add_subcommand("eval", "full evaluation report");
  CommonFlags ef;
  int ef_count = 0, ef_min_pair = 100;
  double ef_rho = 0.5;
  add_common(eval_cmd, ef, true);
  eval_cmd->add_option("--count", ef_count, "evaluate only the first N examples");
  eval_cmd->add_option("--rho", ef_rho, "l2 radius");
  eval_cmd->add_option("--min-pair-count", ef_min_pair, "images per (label,target) pair for K stats");

  auto* bounds_cmd = app.add_subcommand("bounds", "print curvature bounds (m, M, K)");
  CommonFlags bf;
  int bf_label = -1, bf_target = -1;
  add_common(bounds_cmd, bf, false);
  bounds_cmd->add_option("--label", bf_label);
  bounds_cmd->add_option("--target", bf_target);

  auto* check_cmd = app.add_subcommand("check", "run the self-test oracle suites");
  std::uint64_t check_seed = 0;
  check_cmd->add_option("--seed", check_seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*train_cmd)
      return cmd_train(tr_images, tr_labels, tr_arch, tr_act, tr_gamma, tr_rho, tr_mode, tr_epochs,
                       tr_batch, tr_lr, tr_seed, tr_adam, tr_attack_every, tr_limit, tr_out,
                       tr_metrics);
    if (*certify_cmd) return cmd_certify(cf, cf_count, cf_policy, cf_local, cf_refinements);
    if (*attack_cmd) return cmd_attack(af, af_count, af_rho, af_policy);
    if (*eval_cmd) return cmd_eval(ef, ef_count, ef_rho, ef_min_pair);
    if (*bounds_cmd) return cmd_bounds(bf, bf_label, bf_target);
    if (*check_cmd) return cmd_check(check_seed);
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitUsage;
}
