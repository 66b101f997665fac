#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <thread>

#include <CLI11.hpp>

#include "pga/attack.hpp"
#include "pga/evaluation.hpp"
#include "pga/graph_io.hpp"
#include "pga/params_io.hpp"
#include "pga/sbm.hpp"
#include "pga/train.hpp"

namespace pga::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class UsageError : public Error {
 public:
  using Error::Error;
};

json train_defaults(const char* arch) {
  const TrainConfig d;
  return {{"arch", arch},         {"lr", d.lr},         {"weight_decay", d.weight_decay},
          {"epochs", d.epochs},   {"patience", d.patience}, {"hidden", d.hidden},
          {"dropout", d.dropout}, {"params", nullptr}};
}

}  // namespace

json default_config() {
  const SbmOptions sbm;
  const AttackConfig atk;
  return {
      {"graph_dir", nullptr},
      {"out_dir", "out"},
      {"gen",
       {{"blocks", sbm.blocks},
        {"block_size", sbm.block_size},
        {"p_in", sbm.p_in},
        {"p_out", sbm.p_out},
        {"feat_dim", sbm.feat_dim},
        {"feat_noise", sbm.feat_noise},
        {"centroid_scale", sbm.centroid_scale},
        {"split_fractions", sbm.split_fractions},
        {"seed", sbm.seed}}},
      {"surrogate", train_defaults("linear")},
      {"victim", train_defaults("relu")},
      {"attack",
       {{"attacker", to_string(atk.attacker)},
        {"budget_rate", *atk.budget_rate},
        {"budget_abs", nullptr},
        {"greedy_step", atk.greedy_step},
        {"threshold_p", atk.selection.threshold_p},
        {"filter_ratio", atk.selection.filter_ratio},
        {"top_k", nullptr},
        {"removal_hops", atk.removal_hops}}},
      {"evaluation",
       {{"evasion", true},
        {"poisoning", false},
        {"hit_rate", true},
        {"degree_distance", true},
        {"robustness_export", false},
        {"oracle_budget", 0},
        {"record_runtime", true}}},
      {"perturbation", nullptr},
      {"seeds", {0}},
  };
}

namespace {

const std::map<std::string, std::string>& aliases() {
  static const std::map<std::string, std::string> table = {
      {"out", "out_dir"},
      {"graph", "graph_dir"},
      {"blocks", "gen.blocks"},
      {"block-size", "gen.block_size"},
      {"p-in", "gen.p_in"},
      {"p-out", "gen.p_out"},
      {"feat-dim", "gen.feat_dim"},
      {"feat-noise", "gen.feat_noise"},
      {"centroid-scale", "gen.centroid_scale"},
      {"attacker", "attack.attacker"},
      {"budget-rate", "attack.budget_rate"},
      {"budget", "attack.budget_abs"},
      {"greedy-step", "attack.greedy_step"},
      {"threshold-p", "attack.threshold_p"},
      {"filter-ratio", "attack.filter_ratio"},
      {"top-k", "attack.top_k"},
      {"hops", "attack.removal_hops"},
      {"oracle-budget", "evaluation.oracle_budget"},
      {"poisoning", "evaluation.poisoning"},
      {"robustness-export", "evaluation.robustness_export"},
      {"record-runtime", "evaluation.record_runtime"},
      {"perturbation", "perturbation"},
      {"surrogate-params", "surrogate.params"},
      {"victim-params", "victim.params"},
      {"seeds", "seeds"},
  };
  return table;
}

json parse_value(const std::string& raw) {
  try {
    return json::parse(raw);
  } catch (const json::exception&) {
    return raw;
  }
}

void set_path(json& cfg, const std::string& dotted, json value) {
  json* node = &cfg;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = dotted.find('.', start);
    const std::string key = dotted.substr(start, dot - start);
    if (!node->is_object() || !node->contains(key)) throw UsageError("unknown config key '" + dotted + "'");
    if (dot == std::string::npos) {
      (*node)[key] = std::move(value);
      return;
    }
    node = &(*node)[key];
    start = dot + 1;
  }
}

void merge_into(json& dst, const json& src, const std::string& prefix) {
  for (const auto& [key, value] : src.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (!dst.contains(key)) throw UsageError("unknown config key '" + path + "'");
    if (dst[key].is_object() && value.is_object()) merge_into(dst[key], value, path);
    else dst[key] = value;
  }
}

}  // namespace

json resolve_config(const std::string& command, const std::string& config_path,
                    const std::vector<std::string>& overrides) {
  json cfg = default_config();
  if (!config_path.empty()) {
    json file;
    try {
      file = json::parse(read_file(config_path));
    } catch (const json::exception& e) {
      throw UsageError("malformed config " + config_path + ": " + e.what());
    }
    merge_into(cfg, file, "");
  }
  for (std::size_t i = 0; i < overrides.size(); ++i) {
    const std::string& flag = overrides[i];
    if (flag.rfind("--", 0) != 0) throw UsageError("unexpected argument '" + flag + "'");
    if (i + 1 >= overrides.size()) throw UsageError("missing value for " + flag);
    std::string key = flag.substr(2);
    json value = parse_value(overrides[++i]);
    if (key == "seed") {
      if (command == "gen") key = "gen.seed";
      else {
        key = "seeds";
        value = json::array({value});
      }
    } else if (key == "seeds" && value.is_string()) {
      json list = json::array();
      std::string s = value.get<std::string>();
      std::size_t pos = 0;
      while (pos <= s.size()) {
        const std::size_t comma = s.find(',', pos);
        list.push_back(parse_value(s.substr(pos, comma - pos)));
        if (comma == std::string::npos) break;
        pos = comma + 1;
      }
      value = list;
    } else if (auto it = aliases().find(key); it != aliases().end()) {
      key = it->second;
    }
    set_path(cfg, key, std::move(value));
  }
  return cfg;
}

namespace {

template <typename T>
T get(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw UsageError(std::string("config key '") + key + "': " + e.what());
  }
}

SbmOptions sbm_options(const json& cfg) {
  const json& g = cfg.at("gen");
  SbmOptions o;
  o.blocks = get<int>(g, "blocks");
  o.block_size = get<int>(g, "block_size");
  o.p_in = get<double>(g, "p_in");
  o.p_out = get<double>(g, "p_out");
  o.feat_dim = get<int>(g, "feat_dim");
  o.feat_noise = get<double>(g, "feat_noise");
  o.centroid_scale = get<double>(g, "centroid_scale");
  o.split_fractions = get<std::array<double, 3>>(g, "split_fractions");
  o.seed = get<std::uint64_t>(g, "seed");
  try {
    o.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  return o;
}

TrainConfig train_config(const json& role, std::uint64_t seed) {
  TrainConfig c;
  c.lr = get<double>(role, "lr");
  c.weight_decay = get<double>(role, "weight_decay");
  c.epochs = get<int>(role, "epochs");
  c.patience = get<int>(role, "patience");
  c.hidden = get<int>(role, "hidden");
  c.dropout = get<double>(role, "dropout");
  c.seed = seed;
  try {
    c.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  return c;
}

AttackConfig attack_config(const json& cfg, std::uint64_t seed) {
  const json& a = cfg.at("attack");
  AttackConfig c;
  c.attacker = parse_attacker(get<std::string>(a, "attacker"));
  if (!a.at("budget_abs").is_null()) {
    c.budget_abs = get<std::size_t>(a, "budget_abs");
    c.budget_rate.reset();
  } else {
    c.budget_rate = get<double>(a, "budget_rate");
  }
  c.greedy_step = get<int>(a, "greedy_step");
  c.selection.threshold_p = get<double>(a, "threshold_p");
  c.selection.filter_ratio = get<double>(a, "filter_ratio");
  if (!a.at("top_k").is_null()) c.top_k = get<std::size_t>(a, "top_k");
  c.removal_hops = get<int>(a, "removal_hops");
  c.seed = seed;
  try {
    c.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  return c;
}

std::vector<std::uint64_t> seeds_of(const json& cfg) {
  const auto seeds = get<std::vector<std::uint64_t>>(cfg, "seeds");
  if (seeds.empty()) throw UsageError("seed list must not be empty");
  return seeds;
}

fs::path graph_dir(const json& cfg) {
  if (cfg.at("graph_dir").is_null()) throw UsageError("graph_dir is required (--graph DIR)");
  const fs::path dir = get<std::string>(cfg, "graph_dir");
  if (!fs::is_directory(dir)) throw Error("graph directory does not exist: " + dir.string());
  return dir;
}

fs::path out_dir(const json& cfg) { return get<std::string>(cfg, "out_dir"); }

/// Loads params when the role names a file, otherwise trains with `seed`.
ModelParams<double> obtain_model(const GraphBundle& bundle, const json& role, std::uint64_t seed) {
  if (!role.at("params").is_null()) {
    ModelParams<double> p = load_params(get<std::string>(role, "params"));
    if (p.num_features() != bundle.features.cols() || p.num_classes() != bundle.num_classes)
      throw Error("loaded params do not match the graph's feature or class count");
    return p;
  }
  return train(bundle, parse_arch(get<std::string>(role, "arch")), train_config(role, seed));
}

void write_json(const fs::path& path, const json& j) { write_file_atomic(path, j.dump(2) + "\n"); }

int cmd_gen(const json& cfg) {
  const SbmOptions o = sbm_options(cfg);
  const GraphBundle b = generate_sbm(o);
  const fs::path out = out_dir(cfg);
  save_graph(b, out);
  load_graph(out);  // round-trip validation
  std::cout << "wrote " << out.string() << ": " << b.num_nodes() << " nodes, " << b.graph.num_edges()
            << " edges\n";
  return ok;
}

int cmd_train(const json& cfg) {
  const GraphBundle b = load_graph(graph_dir(cfg));
  const std::uint64_t seed = seeds_of(cfg).front();
  const fs::path out = out_dir(cfg);
  for (const char* role : {"surrogate", "victim"}) {
    const json& r = cfg.at(role);
    const ModelParams<double> p = train(b, parse_arch(get<std::string>(r, "arch")), train_config(r, seed));
    save_params(p, out / (std::string("params_") + role + ".json"));
    const Prediction<double> pred = forward(p, b.graph, b.features);
    std::cout << role << ": val " << accuracy(pred, b.labels, b.val_idx) << ", test "
              << accuracy(pred, b.labels, b.test_idx) << "\n";
  }
  return ok;
}

json iteration_json(const IterationRecord& r) {
  json flips = json::array();
  for (const Flip& f : r.flips) flips.push_back({f.op == FlipOp::add ? "add" : "del", f.edge.u, f.edge.v});
  return {{"t", r.t},
          {"flips", flips},
          {"loss_before", r.loss_before},
          {"loss_after", r.loss_after},
          {"negative_score_flips", r.negative_score_flips}};
}

struct SeedOutcome {
  AttackReport evasion;
  std::optional<AttackReport> poisoning;
};

SeedOutcome attack_one_seed(const json& cfg, const GraphBundle& bundle, std::uint64_t seed, const fs::path& dir) {
  const auto start = std::chrono::steady_clock::now();
  const AttackConfig acfg = attack_config(cfg, seed);
  const json& ev = cfg.at("evaluation");
  const ModelParams<double> victim = obtain_model(bundle, cfg.at("victim"), seed);
  const bool needs_surrogate = acfg.attacker != Attacker::random || get<bool>(ev, "hit_rate");
  std::optional<ModelParams<double>> surrogate;
  if (needs_surrogate) surrogate = obtain_model(bundle, cfg.at("surrogate"), seed);

  AttackTrace trace;
  Perturbation p;
  switch (acfg.attacker) {
    case Attacker::pga: p = run_pga(bundle, *surrogate, acfg, &trace); break;
    case Attacker::full_greedy: p = run_full_greedy(bundle, *surrogate, acfg, &trace); break;
    case Attacker::random: p = run_random(bundle, acfg); break;
    case Attacker::dice:
      p = run_dice(bundle, acfg, visible_labels(bundle, forward(*surrogate, bundle.graph, bundle.features)));
      break;
  }
  const double attack_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

  fs::create_directories(dir);
  write_perturbation(p, dir / "perturbation.txt");
  std::string log;
  for (const IterationRecord& r : trace.iterations) log += iteration_json(r).dump() + "\n";
  write_file_atomic(dir / "log.jsonl", log);
  if (trace.targets) {
    write_json(dir / "targets.json", to_json(*trace.targets));
    write_json(dir / "pools.json", to_json(trace.pools));
  }

  json echo = cfg;
  echo["seeds"] = {seed};
  SeedOutcome outcome;
  outcome.evasion = evaluate_evasion(victim, bundle, p);
  AttackReport& r = outcome.evasion;
  r.seed = seed;
  r.config = echo;
  if (!get<bool>(ev, "degree_distance")) r.degree_distance = 0;
  if (get<bool>(ev, "hit_rate")) {
    const std::vector<NodeId> vulnerable = vulnerable_oracle(*surrogate, bundle, 1);
    const HitStats h = hit_stats(p, vulnerable);
    r.hit_rate = h.hit_rate;
    r.hit_rate_budget = h.hit_rate_budget;
    r.vulnerable_deletions = h.vulnerable_deletions;
  }
  r.runtime_ms = get<bool>(ev, "record_runtime") ? attack_ms : 0.0;
  write_json(dir / "report.json", to_json(r));

  if (get<bool>(ev, "robustness_export")) {
    const Graph attacked = apply_perturbation(bundle.graph, p);
    const Prediction<double> clean_pred = forward(victim, bundle.graph, bundle.features);
    const Prediction<double> after = forward(victim, attacked, bundle.features);
    const NodeStats stats = compute_node_stats(bundle);
    const auto rows = export_robustness_dataset(bundle, stats, clean_pred, attacked_nodes(bundle, clean_pred, after));
    write_file_atomic(dir / "robustness.csv", robustness_csv(rows));
  }
  if (get<bool>(ev, "poisoning")) {
    AttackReport pr =
        evaluate_poisoning(bundle, p, parse_arch(get<std::string>(cfg.at("victim"), "arch")),
                           train_config(cfg.at("victim"), seed));
    pr.seed = seed;
    pr.config = echo;
    write_json(dir / "poisoning_report.json", to_json(pr));
    outcome.poisoning = pr;
  }
  return outcome;
}

json mean_std(const std::vector<double>& xs) {
  double mean = 0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= static_cast<double>(xs.size());
  return {{"mean", mean}, {"std", std::sqrt(var)}, {"values", xs}};
}

std::size_t worker_count() {
  if (const char* env = std::getenv("PGA_THREADS")) {
    try {
      return std::max(1, std::stoi(env));
    } catch (const std::exception&) {
      throw UsageError("PGA_THREADS must be a positive integer");
    }
  }
  return 1;
}

int cmd_attack(const json& cfg) {
  const GraphBundle bundle = load_graph(graph_dir(cfg));
  const std::vector<std::uint64_t> seeds = seeds_of(cfg);
  attack_config(cfg, seeds.front());  // validate before any work
  const fs::path out = out_dir(cfg);

  std::vector<SeedOutcome> outcomes(seeds.size());
  std::vector<std::string> errors(seeds.size());
  const std::size_t workers = std::min(worker_count(), seeds.size());
  for (std::size_t begin = 0; begin < seeds.size(); begin += workers) {
    std::vector<std::thread> pool;
    for (std::size_t i = begin; i < std::min(seeds.size(), begin + workers); ++i) {
      pool.emplace_back([&, i] {
        try {
          outcomes[i] = attack_one_seed(cfg, bundle, seeds[i], out / ("seed_" + std::to_string(seeds[i])));
        } catch (const std::exception& e) {
          errors[i] = e.what();
        }
      });
    }
    for (std::thread& t : pool) t.join();
  }
  for (std::size_t i = 0; i < seeds.size(); ++i)
    if (!errors[i].empty()) throw Error("seed " + std::to_string(seeds[i]) + ": " + errors[i]);

  auto column = [&](auto getter) {
    std::vector<double> xs;
    for (const SeedOutcome& o : outcomes) xs.push_back(getter(o));
    return mean_std(xs);
  };
  json summary = {
      {"attacker", cfg.at("attack").at("attacker")},
      {"seeds", seeds},
      {"n_reports", seeds.size()},
      {"clean_accuracy", column([](const SeedOutcome& o) { return o.evasion.clean_accuracy; })},
      {"attacked_accuracy", column([](const SeedOutcome& o) { return o.evasion.attacked_accuracy; })},
      {"accuracy_drop", column([](const SeedOutcome& o) { return o.evasion.accuracy_drop(); })},
      {"hit_rate", column([](const SeedOutcome& o) { return o.evasion.hit_rate; })},
      {"degree_distance", column([](const SeedOutcome& o) { return o.evasion.degree_distance; })},
      {"flips_applied", column([](const SeedOutcome& o) { return double(o.evasion.flips_applied); })},
  };
  if (get<bool>(cfg.at("evaluation"), "poisoning")) {
    summary["poisoned_clean_accuracy"] = column([](const SeedOutcome& o) { return o.poisoning->clean_accuracy; });
    summary["poisoned_accuracy"] = column([](const SeedOutcome& o) { return o.poisoning->attacked_accuracy; });
  }
  write_json(out / "summary.json", summary);
  std::cout << "attacked accuracy " << summary["attacked_accuracy"]["mean"].get<double>() << " (clean "
            << summary["clean_accuracy"]["mean"].get<double>() << ") over " << seeds.size() << " seed(s)\n";
  return ok;
}

int cmd_eval(const json& cfg) {
  const GraphBundle bundle = load_graph(graph_dir(cfg));
  if (cfg.at("perturbation").is_null()) throw UsageError("eval needs a perturbation file (--perturbation FILE)");
  const Perturbation p = read_perturbation(get<std::string>(cfg, "perturbation"), bundle.graph.num_edges());
  const std::uint64_t seed = seeds_of(cfg).front();
  const fs::path out = out_dir(cfg);
  const ModelParams<double> victim = obtain_model(bundle, cfg.at("victim"), seed);
  AttackReport r = evaluate_evasion(victim, bundle, p);
  r.seed = seed;
  r.config = cfg;
  if (get<bool>(cfg.at("evaluation"), "hit_rate")) {
    const ModelParams<double> surrogate = obtain_model(bundle, cfg.at("surrogate"), seed);
    const HitStats h = hit_stats(p, vulnerable_oracle(surrogate, bundle, 1));
    r.hit_rate = h.hit_rate;
    r.hit_rate_budget = h.hit_rate_budget;
    r.vulnerable_deletions = h.vulnerable_deletions;
  }
  write_json(out / "report.json", to_json(r));
  if (get<bool>(cfg.at("evaluation"), "poisoning")) {
    AttackReport pr = evaluate_poisoning(bundle, p, parse_arch(get<std::string>(cfg.at("victim"), "arch")),
                                         train_config(cfg.at("victim"), seed));
    pr.seed = seed;
    pr.config = cfg;
    write_json(out / "poisoning_report.json", to_json(pr));
  }
  std::cout << "accuracy " << r.clean_accuracy << " -> " << r.attacked_accuracy << "\n";
  return ok;
}

int cmd_profile(const json& cfg) {
  const GraphBundle bundle = load_graph(graph_dir(cfg));
  const std::uint64_t seed = seeds_of(cfg).front();
  const int oracle_budget = get<int>(cfg.at("evaluation"), "oracle_budget");
  if (oracle_budget < 0 || oracle_budget > 2) throw UsageError("oracle_budget must be 0, 1 or 2");
  if (oracle_budget > 0 && bundle.num_nodes() > vulnerable_oracle_max_nodes)
    throw Error("vulnerability oracle is limited to " + std::to_string(vulnerable_oracle_max_nodes) +
                " nodes, graph has " + std::to_string(bundle.num_nodes()));

  const ModelParams<double> victim = obtain_model(bundle, cfg.at("victim"), seed);
  const Prediction<double> pred = forward(victim, bundle.graph, bundle.features);
  NodeStats stats = compute_node_stats(bundle);
  for (NodeId v = 0; v < bundle.num_nodes(); ++v) stats.margin[v] = classification_margin(pred, v);
  if (!stats.converged()) std::cerr << "warning: power iteration did not converge; last iterate used\n";

  std::vector<NodeId> attacked;
  if (!cfg.at("perturbation").is_null()) {
    const Perturbation p = read_perturbation(get<std::string>(cfg, "perturbation"), bundle.graph.num_edges());
    attacked = attacked_nodes(bundle, pred, forward(victim, apply_perturbation(bundle.graph, p), bundle.features));
  } else if (oracle_budget > 0) {
    const ModelParams<double> surrogate = obtain_model(bundle, cfg.at("surrogate"), seed);
    attacked = vulnerable_oracle(surrogate, bundle, oracle_budget);
  }
  const auto rows = export_robustness_dataset(bundle, stats, pred, attacked);
  write_file_atomic(out_dir(cfg) / "robustness.csv", robustness_csv(rows));
  std::cout << "wrote " << rows.size() << " rows\n";
  return ok;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Partial graph attack engine"};
  app.require_subcommand(1);
  std::string config_path;
  std::map<std::string, CLI::App*> subs;
  for (const char* name : {"gen", "train", "attack", "eval", "profile"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON run configuration");
    sub->allow_extras();
    subs[name] = sub;
  }
  subs["gen"]->description("generate a stochastic block model graph directory");
  subs["train"]->description("train surrogate and victim, write params_{surrogate,victim}.json");
  subs["attack"]->description("run the configured attacker per seed and evaluate it");
  subs["eval"]->description("evaluate a perturbation file against a victim");
  subs["profile"]->description("node statistics and robustness dataset export");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? ok : usage;
  }

  for (const auto& [name, sub] : subs) {
    if (!sub->parsed()) continue;
    try {
      const json cfg = resolve_config(name, config_path, sub->remaining());
      if (name == "gen") return cmd_gen(cfg);
      if (name == "train") return cmd_train(cfg);
      if (name == "attack") return cmd_attack(cfg);
      if (name == "eval") return cmd_eval(cfg);
      return cmd_profile(cfg);
    } catch (const UsageError& e) {
      std::cerr << "usage error: " << e.what() << "\n";
      return usage;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return failure;
    }
  }
  return usage;
}

}  // namespace pga::cli
