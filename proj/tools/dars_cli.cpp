// Command-line front end: experiment configuration, training runs, checkpoint
// evaluation, heatmap/trace exports, the tabular theory oracle and the beta
// sweep. Exit codes: 0 success, 2 configuration error, 3 numeric failure.
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dars/analysis/eval.hpp"
#include "dars/analysis/heatmap.hpp"
#include "dars/analysis/theory.hpp"
#include "dars/common/errors.hpp"
#include "dars/trainer/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace dars;

#ifndef DARS_VERSION
#define DARS_VERSION "v0.0.0-nogit"
#endif

namespace {

// ---------------------------------------------------------------------------
// Configuration plumbing
// ---------------------------------------------------------------------------

json load_json_file(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw ShapeError("cannot open " + path.string());
  try {
    return json::parse(f);
  } catch (const json::parse_error& e) {
    throw ShapeError(path.string() + ": " + e.what());
  }
}

// Splits "--a.b.c=value" (leading dashes optional) and grafts the parsed
// value onto the config tree. Values are JSON when they parse as JSON,
// strings otherwise, so --trainer.beta=10 and --trainer.pair=ab both work.
void apply_override(json& cfg, const std::string& token, std::vector<std::string>* paths) {
  std::string body = token;
  while (!body.empty() && body.front() == '-') body.erase(body.begin());
  const auto eq = body.find('=');
  if (body.empty() || eq == std::string::npos || eq == 0)
    throw ShapeError("malformed override '" + token + "' (expected --key.path=value)");
  const std::string path = body.substr(0, eq);
  const std::string raw = body.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;
  }
  json* node = &cfg;
  std::stringstream ss(path);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) {
    if (part.empty()) throw ShapeError("malformed override path '" + path + "'");
    parts.push_back(part);
  }
  for (size_t i = 0; i + 1 < parts.size(); ++i) node = &(*node)[parts[i]];
  (*node)[parts.back()] = value;
  if (paths) paths->push_back(path);
}

struct ExperimentConfig {
  TrainerConfig trainer;
  std::string name = "run";
  std::string out;
  std::vector<std::uint64_t> seeds{0};
  bool export_heatmaps = false;
  bool export_trajectories = false;
  bool export_reward_traces = false;
  int heatmap_res = 50;

  json snapshot() const {
    json j = trainer_config_to_json(trainer);
    j["experiment"] = {{"name", name},
                       {"out", out},
                       {"seeds", seeds},
                       {"export",
                        {{"heatmaps", export_heatmaps},
                         {"trajectories", export_trajectories},
                         {"reward_traces", export_reward_traces}}}};
    return j;
  }
};

std::string default_out_root() {
  const char* env = std::getenv("DARS_OUT");
  return env && *env ? env : "runs";
}

ExperimentConfig resolve_experiment(const json& base) {
  ExperimentConfig ex;
  ex.trainer = trainer_config_from_json(base);
  const json e = base.value("experiment", json::object());
  ex.name = e.value("name", std::string("run"));
  ex.out = e.value("out", std::string());
  ex.seeds = e.value("seeds", std::vector<std::uint64_t>{0});
  if (ex.seeds.empty()) throw ShapeError("experiment.seeds must be nonempty");
  const json x = e.value("export", json::object());
  ex.export_heatmaps = x.value("heatmaps", false);
  ex.export_trajectories = x.value("trajectories", false);
  ex.export_reward_traces = x.value("reward_traces", false);
  return ex;
}

// Every override must land on a key the canonical config shape actually has;
// anything else is a silent no-op waiting to happen, so reject it.
void check_override_paths(const ExperimentConfig& ex, const json& merged,
                          const std::vector<std::string>& paths) {
  const json canon = ex.snapshot();
  for (const auto& path : paths) {
    const json* node = &canon;
    const json* given = &merged;
    std::stringstream ss(path);
    std::string part;
    while (std::getline(ss, part, '.')) {
      if (!node->is_object() || !node->contains(part))
        throw ShapeError("unknown config key '" + path + "'");
      node = &node->at(part);
      given = &given->at(part);
    }
    if (*node != *given)
      throw ShapeError("override '" + path + "' was not applied (value rejected)");
  }
}

// ---------------------------------------------------------------------------
// Artifact writers
// ---------------------------------------------------------------------------

void write_text_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp);
    if (!f) throw ShapeError("cannot write " + tmp.string());
    f << content;
  }
  fs::rename(tmp, path);
}

void write_q_phi_heatmaps(const Discriminator& disc, int K, int res, const fs::path& dir) {
  fs::create_directories(dir);
  for (int w = 0; w < K; ++w) {
    const Mat m = grid_heatmap(
        [&](double x, double y) { return disc.posterior(Vec{x, y})[w]; }, res, res);
    std::ofstream f(dir / ("q_phi_w" + std::to_string(w) + ".csv"));
    heatmap_csv(f, m);
  }
}

constexpr const char* kActionNames[5] = {"stay", "px", "nx", "py", "ny"};

void write_delta_r_heatmaps(const DomainClassifiers& cls, const MapSpec& spec, int res,
                            const fs::path& dir) {
  fs::create_directories(dir);
  for (int a = 0; a < 5; ++a) {
    const Vec av = grid_action_vec(a);
    const Mat m = grid_heatmap(
        [&](double x, double y) {
          const Vec s{x, y};
          return cls.delta_r(s, av, map_step(spec, s, av));
        },
        res, res);
    std::ofstream f(dir / ("delta_r_" + std::string(kActionNames[a]) + ".csv"));
    heatmap_csv(f, m);
  }
}

const MapSpec& source_map_spec(const EnvPair& pair) {
  const auto* env = dynamic_cast<const MapEnv*>(pair.source.get());
  if (!env) throw ShapeError("pair's source environment is not a plain map");
  return env->spec();
}

// Deterministic deployment of the goal policy in both environments: per-skill
// accuracies for latent-as-goal checkpoints, per-goal distances otherwise.
struct EvalArtifacts {
  json summary;
  std::vector<Transition> src;
  std::vector<Transition> tgt;
};

double final_distance(const std::vector<Transition>& traj, const Vec& g) {
  const Vec& s = traj.back().s_next;
  double d2 = 0.0;
  for (size_t k = 0; k < g.size(); ++k) d2 += (s[k] - g[k]) * (s[k] - g[k]);
  return std::sqrt(d2);
}

EvalArtifacts evaluate_checkpoint(const Trainer& t, int episodes, std::uint64_t seed) {
  const TrainerConfig& cfg = t.config();
  const auto pol = t.goal_policy(true);
  const Rng base(seed);
  EvalArtifacts out;
  auto collect = [&](std::vector<Transition>& sink,
                     const std::vector<std::vector<Transition>>& eps) {
    for (const auto& traj : eps) sink.insert(sink.end(), traj.begin(), traj.end());
  };
  if (cfg.relabel.kind == RelabelStrategy::Kind::latent_as_goal) {
    json skills = json::array();
    double acc_s = 0.0, acc_t = 0.0;
    for (int w = 0; w < cfg.latent.K; ++w) {
      const Vec z = encode_latent(cfg.latent, w);
      Rng rs = base.stream("deploy_src_" + std::to_string(w));
      Rng rt = base.stream("deploy_tgt_" + std::to_string(w));
      const auto es = deploy(pol, *t.env_pair().source, z, w, Domain::source, episodes, rs);
      const auto et = deploy(pol, *t.env_pair().target, z, w, Domain::target, episodes, rt);
      auto acc = [&](const std::vector<std::vector<Transition>>& eps) {
        int hits = 0;
        for (const auto& traj : eps) {
          const Vec post = t.disc().posterior(traj.back().s_next);
          int am = 0;
          for (int k = 1; k < cfg.latent.K; ++k)
            if (post[k] > post[am]) am = k;
          hits += am == w;
        }
        return static_cast<double>(hits) / eps.size();
      };
      const double as = acc(es), at = acc(et);
      acc_s += as;
      acc_t += at;
      collect(out.src, es);
      collect(out.tgt, et);
      skills.push_back({{"omega", w}, {"source_accuracy", as}, {"target_accuracy", at}});
    }
    out.summary = {{"mode", "skills"},
                   {"skills", skills},
                   {"aggregate",
                    {{"source_accuracy", acc_s / cfg.latent.K},
                     {"target_accuracy", acc_t / cfg.latent.K}}}};
  } else {
    json goals = json::array();
    double d_s = 0.0, d_t = 0.0;
    const auto& gset = t.eval_goals();
    for (size_t i = 0; i < gset.size(); ++i) {
      const Vec& g = gset[i];
      Rng rs = base.stream("deploy_src_g" + std::to_string(i));
      Rng rt = base.stream("deploy_tgt_g" + std::to_string(i));
      const auto es =
          deploy(pol, *t.env_pair().source, g, static_cast<int>(i), Domain::source, episodes, rs);
      const auto et =
          deploy(pol, *t.env_pair().target, g, static_cast<int>(i), Domain::target, episodes, rt);
      double ds = 0.0, dt = 0.0;
      for (const auto& traj : es) ds += final_distance(traj, g);
      for (const auto& traj : et) dt += final_distance(traj, g);
      ds /= es.size();
      dt /= et.size();
      d_s += ds;
      d_t += dt;
      collect(out.src, es);
      collect(out.tgt, et);
      goals.push_back({{"goal", g}, {"source_distance", ds}, {"target_distance", dt}});
    }
    out.summary = {{"mode", "goals"},
                   {"goals", goals},
                   {"aggregate",
                    {{"source_distance", d_s / gset.size()},
                     {"target_distance", d_t / gset.size()}}}};
  }
  out.summary["pair"] = cfg.pair;
  out.summary["variant"] = variant_to_string(cfg.variant);
  out.summary["iter"] = t.iter();
  out.summary["episodes"] = episodes;
  return out;
}

void write_eval_artifacts(const EvalArtifacts& art, const fs::path& dir) {
  fs::create_directories(dir);
  write_text_atomic(dir / "eval_summary.json", art.summary.dump(2) + "\n");
  {
    std::ofstream f(dir / "trajectories_source.csv");
    export_csv(f, art.src);
  }
  {
    std::ofstream f(dir / "trajectories_target.csv");
    export_csv(f, art.tgt);
  }
}

void write_reward_traces(const Trainer& t, std::uint64_t seed, const fs::path& dir) {
  fs::create_directories(dir);
  const TrainerConfig& cfg = t.config();
  const Rng base(seed);
  std::function<double(const Vec&, const Vec&, const Vec&)> dr;
  if (t.classifiers())
    dr = [&t](const Vec& s, const Vec& a, const Vec& sn) {
      return t.classifiers()->delta_r(s, a, sn);
    };
  const int K = cfg.latent.kind == LatentSpec::Kind::categorical ? cfg.latent.K : 1;
  for (int w = 0; w < K; ++w) {
    Rng r = base.stream("trace_" + std::to_string(w));
    const Vec cond = cfg.relabel.kind == RelabelStrategy::Kind::latent_as_goal
                         ? encode_latent(cfg.latent, w)
                         : t.eval_goals()[w % t.eval_goals().size()];
    const RewardTrace trace =
        track_rewards(t.goal_policy(true), *t.env_pair().source, t.disc(), w, cond, dr,
                      cfg.beta, r);
    std::ofstream f(dir / ("reward_trace_w" + std::to_string(w) + ".csv"));
    f << "t,log_q,beta_delta_r\n";
    char buf[80];
    for (size_t i = 0; i < trace.log_q.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g\n", i, trace.log_q[i],
                    trace.beta_delta_r[i]);
      f << buf;
    }
  }
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

int run_seed(const ExperimentConfig& ex, std::uint64_t seed, MetricRecord* last_out) {
  const fs::path dir = fs::path(ex.out) / ex.name / ("seed" + std::to_string(seed));
  fs::create_directories(dir);
  json snap = ex.snapshot();
  snap["seed"] = seed;
  snap["version"] = DARS_VERSION;
  write_text_atomic(dir / "config.json", snap.dump(2) + "\n");

  Trainer t(ex.trainer, seed);
  std::ofstream metrics(dir / "metrics.jsonl");
  if (!metrics) throw ShapeError("cannot write " + (dir / "metrics.jsonl").string());
  const auto t0 = std::chrono::steady_clock::now();
  MetricRecord last{};
  t.run(
      [&](const MetricRecord& m) {
        last = m;
        metrics << metric_to_json(m).dump() << "\n";
        metrics.flush();
      },
      [&](const json& ck, bool final) {
        const std::string dumped = ck.dump();
        write_text_atomic(dir / "checkpoint_latest.json", dumped);
        if (final) write_text_atomic(dir / "checkpoint_final.json", dumped);
      });
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const json info = {{"version", DARS_VERSION},
                     {"seed", seed},
                     {"pair", ex.trainer.pair},
                     {"variant", variant_to_string(ex.trainer.variant)},
                     {"iters", t.iter()},
                     {"wall_clock_s", wall},
                     {"source_steps", t.source_steps()},
                     {"target_steps", t.target_steps()},
                     {"probing_steps", t.probing_steps()}};
  write_text_atomic(dir / "run_info.json", info.dump(2) + "\n");

  if (ex.export_heatmaps) {
    if (ex.trainer.latent.kind == LatentSpec::Kind::categorical)
      write_q_phi_heatmaps(t.disc(), ex.trainer.latent.K, ex.heatmap_res, dir / "heatmaps");
    if (t.classifiers())
      write_delta_r_heatmaps(*t.classifiers(), source_map_spec(t.env_pair()), ex.heatmap_res,
                             dir / "heatmaps");
  }
  if (ex.export_trajectories)
    write_eval_artifacts(evaluate_checkpoint(t, 4, seed), dir / "eval");
  if (ex.export_reward_traces) write_reward_traces(t, seed, dir / "traces");
  if (last_out) *last_out = last;
  return 0;
}

int cmd_train(const ExperimentConfig& ex, int parallel) {
  if (parallel <= 1 || ex.seeds.size() == 1) {
    for (const auto seed : ex.seeds) {
      run_seed(ex, seed, nullptr);
      std::cout << "seed " << seed << " done -> " << (fs::path(ex.out) / ex.name).string()
                << "/seed" << seed << "\n";
    }
    return 0;
  }
  std::mutex mu;
  std::vector<std::thread> workers;
  std::vector<std::string> errors;
  int numeric = 0;
  size_t next = 0;
  const auto worker = [&] {
    for (;;) {
      size_t i;
      {
        std::lock_guard<std::mutex> lk(mu);
        if (next >= ex.seeds.size()) return;
        i = next++;
      }
      try {
        run_seed(ex, ex.seeds[i], nullptr);
        std::lock_guard<std::mutex> lk(mu);
        std::cout << "seed " << ex.seeds[i] << " done\n";
      } catch (const NumericError& e) {
        std::lock_guard<std::mutex> lk(mu);
        errors.push_back("seed " + std::to_string(ex.seeds[i]) + ": " + e.what());
        numeric = 1;
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lk(mu);
        errors.push_back("seed " + std::to_string(ex.seeds[i]) + ": " + e.what());
      }
    }
  };
  const int n = std::min<int>(parallel, static_cast<int>(ex.seeds.size()));
  for (int i = 0; i < n; ++i) workers.emplace_back(worker);
  for (auto& w : workers) w.join();
  for (const auto& e : errors) std::cerr << "error: " << e << "\n";
  if (!errors.empty()) return numeric ? 3 : 2;
  return 0;
}

// ---------------------------------------------------------------------------
// eval / heatmap
// ---------------------------------------------------------------------------

Trainer trainer_from_checkpoint(const json& ck, const std::string& pair_override,
                                std::uint64_t seed) {
  if (!ck.contains("config"))
    throw ShapeError("checkpoint is missing its config snapshot");
  TrainerConfig cfg = trainer_config_from_json(ck.at("config"));
  if (!pair_override.empty()) cfg.pair = pair_override;
  validate(cfg);
  Trainer t(cfg, seed);
  t.restore(ck);
  return t;
}

int cmd_eval(const std::string& ckpt_path, const std::string& pair, int episodes,
             std::uint64_t seed, std::string out) {
  const json ck = load_json_file(ckpt_path);
  const Trainer t = trainer_from_checkpoint(ck, pair, seed);
  const EvalArtifacts art = evaluate_checkpoint(t, episodes, seed);
  if (out.empty()) out = (fs::path(ckpt_path).parent_path() / "eval").string();
  write_eval_artifacts(art, out);
  std::cout << art.summary.dump(2) << "\n";
  return 0;
}

int cmd_heatmap(const std::string& ckpt_path, const std::string& kind, const std::string& pair,
                int res, std::string out) {
  const json ck = load_json_file(ckpt_path);
  if (!ck.contains("config")) throw ShapeError("checkpoint is missing its config snapshot");
  const TrainerConfig cfg = trainer_config_from_json(ck.at("config"));
  if (out.empty()) out = (fs::path(ckpt_path).parent_path() / "heatmaps").string();
  int files = 0;
  if (kind == "q_phi") {
    if (cfg.latent.kind != LatentSpec::Kind::categorical)
      throw ShapeError("q_phi heatmaps require a categorical latent");
    const Discriminator disc = Discriminator::from_json(ck.at("disc"));
    write_q_phi_heatmaps(disc, cfg.latent.K, res, out);
    files = cfg.latent.K;
  } else if (kind == "delta_r") {
    if (!ck.contains("classifiers") || ck.at("classifiers").is_null())
      throw ShapeError("checkpoint has no domain classifiers (variant without delta_r?)");
    const DomainClassifiers cls = DomainClassifiers::from_json(ck.at("classifiers"));
    const EnvPair ep = make_pair(pair.empty() ? cfg.pair : pair);
    write_delta_r_heatmaps(cls, source_map_spec(ep), res, out);
    files = 5;
  } else {
    throw ShapeError("unknown heatmap kind '" + kind + "' (expected q_phi or delta_r)");
  }
  std::cout << "wrote " << files << " " << res << "x" << res << " matrices to " << out << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// oracle
// ---------------------------------------------------------------------------

int cmd_oracle(std::uint64_t seed, int states, int actions, int horizon, int n_pairs,
               int candidates, double beta, const std::string& out) {
  const double n_traj = states * std::pow(static_cast<double>(actions) * states, horizon);
  if (n_traj > 1e6)
    throw ShapeError("instance too large to enumerate: " + std::to_string(n_traj) +
                     " trajectories (cap 1e6)");
  const Rng master(seed);
  bool all_ok = true;
  json report;
  report["version"] = DARS_VERSION;
  report["params"] = {{"seed", seed},       {"states", states},       {"actions", actions},
                      {"horizon", horizon}, {"pairs", n_pairs},       {"candidates", candidates},
                      {"beta", beta}};

  const auto check_one = [&](const TabularMDP& src, const TabularMDP& tgt, Rng& rng,
                             const char* label) {
    const TabularPolicy pi = random_tabular_policy(src, rng);
    const KlIdentityResult id = verify_kl_identity(src, tgt, pi);
    const double gap = std::abs(id.kl_exact - id.kl_via_delta_r);
    const TabularPolicy expert = random_tabular_policy(src, rng);
    const TheoryReport tr = search_and_verify_bounds(src, tgt, expert, beta, candidates, rng);
    const bool ok = gap < 1e-9 && tr.lemma2_holds && tr.pinsker_holds && tr.holder_holds &&
                    tr.theorem1_holds;
    all_ok = all_ok && ok;
    json j = {{"identity",
               {{"kl_exact", id.kl_exact},
                {"kl_via_delta_r", id.kl_via_delta_r},
                {"gap", gap}}},
              {"bounds", theory_report_to_json(tr)},
              {"ok", ok}};
    std::cout << label << ": identity_gap=" << gap << " theorem1 "
              << (tr.theorem1_holds ? "holds" : "VIOLATED") << " lemma2 "
              << (tr.lemma2_holds ? "holds" : "VIOLATED") << (ok ? "" : "  <-- FAIL") << "\n";
    return j;
  };

  {
    Rng r = master.stream("degenerate");
    const TabularMDP mdp = random_tabular_mdp(states, actions, horizon, r);
    report["degenerate"] = check_one(mdp, mdp, r, "degenerate P_S=P_T");
  }
  report["pairs"] = json::array();
  for (int p = 0; p < n_pairs; ++p) {
    Rng r = master.stream("pair_" + std::to_string(p));
    const TabularMDP src = random_tabular_mdp(states, actions, horizon, r);
    TabularMDP tgt = random_tabular_mdp(states, actions, horizon, r);
    tgt.rho0 = src.rho0;  // shared initial distribution across the pair
    report["pairs"].push_back(
        check_one(src, tgt, r, ("pair " + std::to_string(p)).c_str()));
  }
  report["all_passed"] = all_ok;
  if (!out.empty()) {
    write_text_atomic(out, report.dump(2) + "\n");
    std::cout << "report -> " << out << "\n";
  }
  std::cout << (all_ok ? "oracle: all checks passed" : "oracle: FAILURES detected") << "\n";
  return all_ok ? 0 : 3;
}

// ---------------------------------------------------------------------------
// sweep-beta
// ---------------------------------------------------------------------------

int cmd_sweep_beta(ExperimentConfig ex, const std::vector<double>& betas,
                   const std::string& sweep_name) {
  ex.trainer.variant = Variant::dars;
  if (ex.trainer.relabel.kind != RelabelStrategy::Kind::final_state) {
    std::cout << "note: forcing final_state relabeling so target distance is defined\n";
    ex.trainer.relabel.kind = RelabelStrategy::Kind::final_state;
  }
  validate(ex.trainer);
  std::ostringstream csv;
  csv << "beta,seed,final_target_distance\n";
  char buf[96];
  for (const double beta : betas) {
    for (const auto seed : ex.seeds) {
      ExperimentConfig run = ex;
      run.trainer.beta = beta;
      std::snprintf(buf, sizeof(buf), "beta%g", beta);
      run.name = sweep_name + "/" + buf;
      MetricRecord last{};
      run_seed(run, seed, &last);
      const double distance = -last.eval_target;  // eval reports −distance
      std::snprintf(buf, sizeof(buf), "%g,%llu,%.17g\n", beta,
                    static_cast<unsigned long long>(seed), distance);
      csv << buf;
      std::cout << "beta=" << beta << " seed=" << seed << " final_target_distance=" << distance
                << "\n";
    }
  }
  const fs::path out = fs::path(ex.out) / sweep_name / "sweep_beta.csv";
  fs::create_directories(out.parent_path());
  write_text_atomic(out, csv.str());
  std::cout << "table -> " << out.string() << "\n";
  return 0;
}

}  // namespace

// ---------------------------------------------------------------------------

int main(int argc, char** argv) {
  // Tiny layers gain nothing from BLAS threading; respect an explicit setting.
  setenv("OPENBLAS_NUM_THREADS", "1", /*overwrite=*/0);

  CLI::App app{"dars: unsupervised skills with dynamics-aware reward shifts"};
  app.require_subcommand(1);
  std::function<int()> runner;

  // --- train ---------------------------------------------------------------
  auto* train = app.add_subcommand("train", "run a configured variant for all seeds");
  train->allow_extras();
  struct {
    std::string config, variant, pair, name, out, resume;
    std::vector<std::uint64_t> seeds;
    long iters = -1;
    double beta = -1.0, updates = -1.0;
    int parallel = 1, eval_every = -1;
    bool exp_heat = false, exp_traj = false, exp_trace = false;
  } tr;
  train->add_option("--config", tr.config, "JSON config file");
  train->add_option("--variant", tr.variant, "algorithm variant");
  train->add_option("--pair", tr.pair, "environment pair (ab|ac|ad|bc|bd|ae|drift)");
  train->add_option("--seed", tr.seeds, "seed(s)")->delimiter(',');
  train->add_option("--iters", tr.iters, "training iterations");
  train->add_option("--eval-every", tr.eval_every, "evaluation cadence");
  train->add_option("--beta", tr.beta, "KL regularization coefficient");
  train->add_option("--updates-per-step", tr.updates, "gradient steps per env step");
  train->add_option("--resume-from", tr.resume, "checkpoint to resume (finetune)");
  train->add_option("--name", tr.name, "run name (output subdirectory)");
  train->add_option("--out", tr.out, "output root (default $DARS_OUT or ./runs)");
  train->add_option("--parallel", tr.parallel, "worker threads across seeds");
  train->add_flag("--export-heatmaps", tr.exp_heat, "write q_phi/delta_r heatmaps at the end");
  train->add_flag("--export-trajectories", tr.exp_traj, "write deployment trajectory CSVs");
  train->add_flag("--export-reward-traces", tr.exp_trace, "write per-step reward traces");
  train->callback([&] {
    runner = [&]() -> int {
      json base = tr.config.empty() ? json::object() : load_json_file(tr.config);
      std::vector<std::string> paths;
      for (const auto& extra : train->remaining()) apply_override(base, extra, &paths);
      ExperimentConfig ex = resolve_experiment(base);
      check_override_paths(ex, base, paths);
      if (!tr.variant.empty()) ex.trainer.variant = variant_from_string(tr.variant);
      if (!tr.pair.empty()) ex.trainer.pair = tr.pair;
      if (tr.iters >= 0) ex.trainer.max_iters = tr.iters;
      if (tr.eval_every > 0) ex.trainer.eval_every = tr.eval_every;
      if (tr.beta >= 0.0) ex.trainer.beta = tr.beta;
      if (tr.updates > 0.0) ex.trainer.updates_per_step = tr.updates;
      if (!tr.resume.empty()) ex.trainer.resume_from = tr.resume;
      if (!tr.seeds.empty()) ex.seeds = tr.seeds;
      if (!tr.name.empty()) ex.name = tr.name;
      if (!tr.out.empty()) ex.out = tr.out;
      if (ex.out.empty()) ex.out = default_out_root();
      ex.export_heatmaps |= tr.exp_heat;
      ex.export_trajectories |= tr.exp_traj;
      ex.export_reward_traces |= tr.exp_trace;
      validate(ex.trainer);
      return cmd_train(ex, tr.parallel);
    };
  });

  // --- eval ----------------------------------------------------------------
  auto* ev = app.add_subcommand("eval", "deploy a checkpoint in source and target");
  struct {
    std::string ckpt, pair, out;
    int episodes = 8;
    std::uint64_t seed = 0;
  } ea;
  ev->add_option("checkpoint", ea.ckpt, "checkpoint JSON")->required();
  ev->add_option("--pair", ea.pair, "override the environment pair");
  ev->add_option("--episodes", ea.episodes, "episodes per skill/goal");
  ev->add_option("--seed", ea.seed, "evaluation seed");
  ev->add_option("--out", ea.out, "output directory");
  ev->callback([&] {
    runner = [&] { return cmd_eval(ea.ckpt, ea.pair, ea.episodes, ea.seed, ea.out); };
  });

  // --- heatmap ---------------------------------------------------------------
  auto* hm = app.add_subcommand("heatmap", "export q_phi or delta_r grids as CSV");
  struct {
    std::string ckpt, kind = "q_phi", pair, out;
    int res = 50;
  } ha;
  hm->add_option("checkpoint", ha.ckpt, "checkpoint JSON")->required();
  hm->add_option("--kind", ha.kind, "q_phi | delta_r");
  hm->add_option("--pair", ha.pair, "pair for the deterministic source step");
  hm->add_option("--res", ha.res, "grid resolution");
  hm->add_option("--out", ha.out, "output directory");
  hm->callback([&] {
    runner = [&] { return cmd_heatmap(ha.ckpt, ha.kind, ha.pair, ha.res, ha.out); };
  });

  // --- oracle ----------------------------------------------------------------
  auto* orc = app.add_subcommand("oracle", "verify the KL identity and bounds on tabular pairs");
  struct {
    std::uint64_t seed = 1;
    int states = 3, actions = 2, horizon = 3, pairs = 20, candidates = 200;
    double beta = 10.0;
    std::string out;
  } oa;
  orc->add_option("--seed", oa.seed, "master seed");
  orc->add_option("--states", oa.states, "tabular state count");
  orc->add_option("--actions", oa.actions, "tabular action count");
  orc->add_option("--horizon", oa.horizon, "episode length");
  orc->add_option("--pairs", oa.pairs, "random pairs to verify");
  orc->add_option("--candidates", oa.candidates, "policy search breadth");
  orc->add_option("--beta", oa.beta, "feasibility coefficient");
  orc->add_option("--out", oa.out, "report JSON path");
  orc->callback([&] {
    runner = [&] {
      return cmd_oracle(oa.seed, oa.states, oa.actions, oa.horizon, oa.pairs, oa.candidates,
                        oa.beta, oa.out);
    };
  });

  // --- sweep-beta --------------------------------------------------------------
  auto* sw = app.add_subcommand("sweep-beta", "train dars across beta values and tabulate");
  sw->allow_extras();
  struct {
    std::string config, pair, name = "sweep_beta", out;
    std::vector<double> betas{0.0, 1.0, 10.0, 50.0};
    std::vector<std::uint64_t> seeds;
    long iters = -1;
    double updates = -1.0;
  } sa;
  sw->add_option("--config", sa.config, "JSON config file");
  sw->add_option("--betas", sa.betas, "beta values")->delimiter(',');
  sw->add_option("--seed", sa.seeds, "seed(s)")->delimiter(',');
  sw->add_option("--pair", sa.pair, "environment pair");
  sw->add_option("--iters", sa.iters, "training iterations");
  sw->add_option("--updates-per-step", sa.updates, "gradient steps per env step");
  sw->add_option("--name", sa.name, "sweep output subdirectory");
  sw->add_option("--out", sa.out, "output root");
  sw->callback([&] {
    runner = [&]() -> int {
      json base = sa.config.empty() ? json::object() : load_json_file(sa.config);
      std::vector<std::string> paths;
      for (const auto& extra : sw->remaining()) apply_override(base, extra, &paths);
      ExperimentConfig ex = resolve_experiment(base);
      check_override_paths(ex, base, paths);
      if (!sa.pair.empty()) ex.trainer.pair = sa.pair;
      if (sa.iters >= 0) ex.trainer.max_iters = sa.iters;
      if (sa.updates > 0.0) ex.trainer.updates_per_step = sa.updates;
      if (!sa.seeds.empty()) ex.seeds = sa.seeds;
      if (!sa.out.empty()) ex.out = sa.out;
      if (ex.out.empty()) ex.out = default_out_root();
      if (sa.betas.empty()) throw ShapeError("--betas must be nonempty");
      return cmd_sweep_beta(std::move(ex), sa.betas, sa.name);
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  try {
    return runner ? runner() : 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
