// Experiment harness for the SPD geometry toolkit. Every subcommand is
// deterministic given --seed, stamps its resolved configuration into its
// output files, and writes them atomically.

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "experiments.hpp"
#include "spdgeom/atomic_file.hpp"

using namespace spdgeom;
namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string sibling_json_path(const std::string& out) {
  fs::path p(out);
  p.replace_extension(".json");
  if (p == fs::path(out)) p += ".summary.json";
  return p.string();
}

HeadSpec head_from_name(const std::string& name, double theta, bool newton_schulz) {
  HeadSpec spec;
  if (name == "log")
    spec = HeadSpec::log_emlr();
  else if (name == "pow")
    spec = HeadSpec::pow_emlr(theta);
  else if (name == "scalepow")
    spec = HeadSpec::scale_pow_emlr(theta);
  else if (name == "powtmlr")
    spec = HeadSpec::pow_tmlr(theta);
  else if (name == "chotmlr")
    spec = HeadSpec::cho_tmlr(theta);
  else if (name == "powprime")
    spec = HeadSpec{HeadKind::PowEmlrPrime, theta, {}, false, 15};
  else
    throw ConfigError("unknown head '" + name + "'");
  spec.use_newton_schulz = newton_schulz;
  spec.validate();
  return spec;
}

std::vector<std::pair<int, double>> parse_schedule(const std::string& text) {
  std::vector<std::pair<int, double>> schedule;
  if (text.empty()) return schedule;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos)
      throw ConfigError("bad --lr-schedule entry '" + item + "' (want epoch:divisor)");
    schedule.emplace_back(std::stoi(item.substr(0, colon)), std::stod(item.substr(colon + 1)));
  }
  return schedule;
}

int cmd_distgap(int n, int pairs, double theta, const std::string& sampler, std::uint64_t seed,
                const std::string& out) {
  experiments::DistgapConfig cfg;
  cfg.n = n;
  cfg.pairs = pairs;
  cfg.thetas = {theta};
  cfg.sampler = sampler;
  cfg.seed = seed;
  const experiments::DistgapResult result = experiments::run_distgap(cfg);

  experiments::write_distgap_csv(out, result);
  experiments::write_distgap_json(sibling_json_path(out), result);

  const experiments::DistgapSummary& s = result.summaries.front();
  std::printf("distgap: sampler=%s n=%d pairs=%d theta=%s\n", sampler.c_str(), n, pairs,
              fmt(theta).c_str());
  std::printf("  mean |d_pem - d_lem| = %s (std %s), mean relative gap = %s\n",
              fmt(s.mean_abs_gap).c_str(), fmt(s.std_abs_gap).c_str(),
              fmt(s.mean_rel_gap).c_str());
  if (!(s.mean_abs_gap > 0.0)) {
    std::fprintf(stderr, "distgap: mean gap is not positive\n");
    return 1;
  }
  return 0;
}

int cmd_check_logs(int n, int trials, std::uint64_t seed, bool perturb) {
  const experiments::CheckLogsResult result =
      experiments::run_check_logs(n, trials, seed, perturb);
  for (const experiments::CheckEntry& e : result.checks)
    std::printf("%-24s max_err %-12s tol %-8s %s\n", e.name.c_str(), fmt(e.max_err).c_str(),
                fmt(e.tol).c_str(), e.pass ? "ok" : "VIOLATED");
  if (!result.all_pass) {
    std::fprintf(stderr, "check-logs: invariant violations detected\n");
    return 1;
  }
  std::printf("check-logs: all invariants hold (n=%d, trials=%d)\n", n, trials);
  return 0;
}

void write_pairing_json(const std::string& out, const std::string& which, double theta, int steps,
                        std::uint64_t seed, const experiments::PairingResult& r) {
  AtomicFile file(out);
  auto& os = file.stream();
  os << "{\n";
  os << "  \"schema\": \"spdgeom.equiv.v1\",\n";
  os << "  \"which\": \"" << which << "\",\n";
  os << "  \"theta\": " << fmt(theta) << ",\n";
  os << "  \"steps\": " << steps << ",\n";
  os << "  \"seed\": " << seed << ",\n";
  os << "  \"tolerance\": " << fmt(r.tol) << ",\n";
  os << "  \"max_deviation\": " << fmt(r.max_dev) << ",\n";
  os << "  \"first_violation\": " << r.first_violation << ",\n";
  os << "  \"pass\": " << (r.pass ? "true" : "false") << ",\n";
  os << "  \"per_step\": [\n";
  for (std::size_t t = 0; t < r.per_step_dev.size(); ++t) {
    os << "    {\"step\": " << t << ", \"relation_dev\": " << fmt(r.per_step_dev[t])
       << ", \"logit_dev\": " << fmt(r.per_step_logit_dev[t])
       << ", \"loss_diff\": " << fmt(r.per_step_loss_diff[t]) << "}"
       << (t + 1 < r.per_step_dev.size() ? "," : "") << "\n";
  }
  os << "  ]\n}\n";
  file.commit();
}

void write_divergence_json(const std::string& out, double theta, std::uint64_t seed,
                           const experiments::DivergenceResult& r) {
  AtomicFile file(out);
  auto& os = file.stream();
  os << "{\n";
  os << "  \"schema\": \"spdgeom.equiv.v1\",\n";
  os << "  \"which\": \"powtmlr\",\n";
  os << "  \"theta\": " << fmt(theta) << ",\n";
  os << "  \"seed\": " << seed << ",\n";
  os << "  \"threshold\": " << fmt(r.threshold) << ",\n";
  os << "  \"trials\": " << r.per_trial_gap.size() << ",\n";
  os << "  \"exceed_count\": " << r.exceed_count << ",\n";
  os << "  \"pass\": " << (r.pass ? "true" : "false") << ",\n";
  os << "  \"per_trial_gap\": [";
  for (std::size_t t = 0; t < r.per_trial_gap.size(); ++t)
    os << (t ? ", " : "") << fmt(r.per_trial_gap[t]);
  os << "]\n}\n";
  file.commit();
}

int cmd_equiv(const std::string& which, int steps, double theta, std::uint64_t seed,
              const std::string& out) {
  if (which == "scalepow" || which == "rsgd") {
    const experiments::PairingResult r = which == "scalepow"
                                             ? experiments::run_scalepow_pairing(theta, steps, seed)
                                             : experiments::run_rsgd_pairing(theta, steps, seed);
    if (!out.empty()) write_pairing_json(out, which, theta, steps, seed, r);
    std::printf("equiv %s: theta=%s steps=%d max deviation %s (tol %s)\n", which.c_str(),
                fmt(theta).c_str(), steps, fmt(r.max_dev).c_str(), fmt(r.tol).c_str());
    if (!r.pass) {
      std::fprintf(stderr, "equiv %s: first violation at step %d\n", which.c_str(),
                   r.first_violation);
      return 1;
    }
    return 0;
  }
  if (which == "powtmlr") {
    const experiments::DivergenceResult r =
        experiments::run_powtmlr_divergence(theta, steps, seed);
    if (!out.empty()) write_divergence_json(out, theta, seed, r);
    std::printf("equiv powtmlr: %d/%zu one-step updates diverge beyond %s\n", r.exceed_count,
                r.per_trial_gap.size(), fmt(r.threshold).c_str());
    if (!r.pass) {
      std::fprintf(stderr,
                   "equiv powtmlr: updates unexpectedly match a reparameterized power head\n");
      return 1;
    }
    return 0;
  }
  std::fprintf(stderr, "equiv: unknown --which '%s'\n", which.c_str());
  return 2;
}

int cmd_train(const std::string& data, const std::string& head_name, double theta, int epochs,
              std::uint64_t seed, const std::string& out_dir, int classes, int dim, int positions,
              int per_class, double spread, double lr, int batch, double classifier_factor,
              double weight_decay, double eps_reg, bool newton_schulz,
              const std::string& schedule) {
  Dataset ds = data == "synth"
                   ? synth_dataset(classes, dim, positions, per_class, spread, seed)
                   : load_features_auto(data);

  TrainConfig cfg;
  cfg.head = head_from_name(head_name, theta, newton_schulz);
  cfg.epochs = epochs;
  cfg.batch_size = batch;
  cfg.sgd.lr = lr;
  cfg.sgd.classifier_factor = classifier_factor;
  cfg.sgd.seed = seed;
  cfg.weight_decay = weight_decay;
  if (eps_reg >= 0.0) cfg.eps_reg = eps_reg;
  cfg.lr_schedule = parse_schedule(schedule);

  auto [model, record] = train(ds, cfg);

  fs::create_directories(out_dir);
  {
    AtomicFile file((fs::path(out_dir) / "run.json").string());
    file.stream() << record.to_json();
    file.commit();
  }
  {
    AtomicFile file((fs::path(out_dir) / "curves.csv").string());
    auto& os = file.stream();
    os << "epoch,loss,top1,top5\n";
    for (std::size_t e = 0; e < record.epochs.size(); ++e)
      os << e << ',' << fmt(record.epochs[e].train_loss) << ','
         << fmt(record.epochs[e].val_top1) << ',' << fmt(record.epochs[e].val_top5) << '\n';
    file.commit();
  }

  const EpochStats& last = record.epochs.back();
  std::printf("train: head=%s theta=%s epochs=%d final loss %s val top1 %s top5 %s\n",
              head_name.c_str(), fmt(theta).c_str(), epochs, fmt(last.train_loss).c_str(),
              fmt(last.val_top1).c_str(), fmt(last.val_top5).c_str());
  std::printf("train: wrote %s and %s\n", (fs::path(out_dir) / "run.json").c_str(),
              (fs::path(out_dir) / "curves.csv").c_str());
  return 0;
}

int cmd_gbwm_aim(double theta, int trials, std::uint64_t seed, bool perturb) {
  const experiments::GbwmAimResult r = experiments::run_gbwm_aim(theta, trials, seed, perturb);
  std::printf("gbwm-aim: theta=%s trials=%d max relative deviation %s (tol %s)\n",
              fmt(theta).c_str(), r.trials, fmt(r.max_rel_dev).c_str(), fmt(r.tol).c_str());
  if (!r.pass) {
    std::fprintf(stderr, "gbwm-aim: identity violated at trial %d\n", r.worst_trial);
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SPD manifold geometry toolkit: experiment harness"};
  app.require_subcommand(1);

  // distgap
  int dg_n = 256, dg_pairs = 1000;
  double dg_theta = 0.5;
  std::string dg_sampler = "wishart", dg_out = "distgap.csv";
  std::uint64_t dg_seed = 0;
  auto* distgap = app.add_subcommand("distgap",
                                     "Per-pair power-Euclidean vs log-Euclidean distance gap");
  distgap->add_option("--n", dg_n, "matrix dimension")->check(CLI::Range(2, 4096));
  distgap->add_option("--pairs", dg_pairs, "number of random pairs")->check(CLI::PositiveNumber);
  distgap->add_option("--theta", dg_theta, "power of the deformed metric");
  distgap->add_option("--sampler", dg_sampler, "wishart|logexp")
      ->check(CLI::IsMember({"wishart", "logexp"}));
  distgap->add_option("--seed", dg_seed, "master seed");
  distgap->add_option("--out", dg_out, "CSV output path (JSON summary lands next to it)");

  // check-logs
  int cl_n = 8, cl_trials = 100;
  std::uint64_t cl_seed = 0;
  bool cl_perturb = false;
  auto* check_logs =
      app.add_subcommand("check-logs", "Riemannian log/exp invariant suite, all families");
  check_logs->alias("check_logs");
  check_logs->add_option("--n", cl_n, "matrix dimension")->check(CLI::Range(2, 512));
  check_logs->add_option("--trials", cl_trials, "random trials")->check(CLI::PositiveNumber);
  check_logs->add_option("--seed", cl_seed, "master seed");
  check_logs->add_flag("--perturb", cl_perturb, "inject a fault (the suite must then fail)");

  // equiv
  std::string eq_which = "scalepow", eq_out;
  int eq_steps = 100;
  double eq_theta = 0.5;
  std::uint64_t eq_seed = 0;
  auto* equiv = app.add_subcommand("equiv", "Training-equivalence checks");
  equiv->add_option("--which", eq_which, "scalepow|rsgd|powtmlr")
      ->check(CLI::IsMember({"scalepow", "rsgd", "powtmlr"}));
  equiv->add_option("--steps", eq_steps, "SGD steps (trials for powtmlr)")
      ->check(CLI::PositiveNumber);
  equiv->add_option("--theta", eq_theta, "power");
  equiv->add_option("--seed", eq_seed, "master seed");
  equiv->add_option("--out", eq_out, "JSON report path");

  // train
  std::string tr_data = "synth", tr_head = "pow", tr_out = "train_out", tr_schedule;
  double tr_theta = 0.5, tr_spread = 1.0, tr_lr = 0.05, tr_k = 1.0, tr_wd = 0.0, tr_eps = -1.0;
  int tr_epochs = 30, tr_classes = 4, tr_dim = 8, tr_positions = 32, tr_per_class = 40,
      tr_batch = 8;
  std::uint64_t tr_seed = 0;
  bool tr_ns = false;
  auto* train_cmd = app.add_subcommand("train", "Covariance-classification training run");
  train_cmd->add_option("--data", tr_data, "'synth' or a feature file (csv/f64bin)");
  train_cmd->add_option("--head", tr_head, "log|pow|scalepow|powtmlr|chotmlr|powprime")
      ->check(CLI::IsMember({"log", "pow", "scalepow", "powtmlr", "chotmlr", "powprime"}));
  train_cmd->add_option("--theta", tr_theta, "power for the matrix-power heads");
  train_cmd->add_option("--epochs", tr_epochs)->check(CLI::PositiveNumber);
  train_cmd->add_option("--seed", tr_seed, "master seed");
  train_cmd->add_option("--out", tr_out, "output directory (run.json, curves.csv)");
  train_cmd->add_option("--classes", tr_classes)->check(CLI::PositiveNumber);
  train_cmd->add_option("--dim", tr_dim)->check(CLI::PositiveNumber);
  train_cmd->add_option("--positions", tr_positions)->check(CLI::Range(2, 1 << 20));
  train_cmd->add_option("--per-class", tr_per_class)->check(CLI::PositiveNumber);
  train_cmd->add_option("--spread", tr_spread, "synthetic class separation");
  train_cmd->add_option("--lr", tr_lr)->check(CLI::PositiveNumber);
  train_cmd->add_option("--batch", tr_batch)->check(CLI::PositiveNumber);
  train_cmd->add_option("--classifier-factor", tr_k, "FC weight learning-rate multiplier");
  train_cmd->add_option("--weight-decay", tr_wd);
  train_cmd->add_option("--eps-reg", tr_eps, "covariance ridge (negative = scale-aware default)");
  train_cmd->add_flag("--newton-schulz", tr_ns, "iterative square root (theta = 1/2 only)");
  train_cmd->add_option("--lr-schedule", tr_schedule, "comma list of epoch:divisor");

  // gbwm-aim
  double ga_theta = 0.5;
  int ga_trials = 100;
  std::uint64_t ga_seed = 0;
  bool ga_perturb = false;
  auto* gbwm = app.add_subcommand("gbwm-aim",
                                  "Deformed-GBWM vs quarter-AIM metric identity check");
  gbwm->alias("gbwm_aim");
  gbwm->add_option("--theta", ga_theta, "power (nonzero)");
  gbwm->add_option("--trials", ga_trials)->check(CLI::PositiveNumber);
  gbwm->add_option("--seed", ga_seed, "master seed");
  gbwm->add_flag("--perturb", ga_perturb, "inject a fault (the check must then fail)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (distgap->parsed())
      return cmd_distgap(dg_n, dg_pairs, dg_theta, dg_sampler, dg_seed, dg_out);
    if (check_logs->parsed()) return cmd_check_logs(cl_n, cl_trials, cl_seed, cl_perturb);
    if (equiv->parsed()) return cmd_equiv(eq_which, eq_steps, eq_theta, eq_seed, eq_out);
    if (train_cmd->parsed())
      return cmd_train(tr_data, tr_head, tr_theta, tr_epochs, tr_seed, tr_out, tr_classes, tr_dim,
                       tr_positions, tr_per_class, tr_spread, tr_lr, tr_batch, tr_k, tr_wd,
                       tr_eps, tr_ns, tr_schedule);
    if (gbwm->parsed()) return cmd_gbwm_aim(ga_theta, ga_trials, ga_seed, ga_perturb);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
