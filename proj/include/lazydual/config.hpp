#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <future>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "lazydual/graph.hpp"
#include "lazydual/gossip.hpp"
#include "lazydual/outer.hpp"
#include "lazydual/theory.hpp"
#include "lazydual/trace.hpp"

namespace lazydual {

struct TopologySpec {
  std::string kind = "grid2d";  // grid2d|path|complete|erdos_renyi|edge_list
  int rows = 5, cols = 5;
  int n = 0;
  double p = 0.3;
  std::uint64_t seed = 0;
  std::string path;                      // edge_list file
  std::string weights = "metropolis";    // metropolis|max_degree
};

struct ProblemSpecCfg {
  std::string kind = "quadratic";  // quadratic|logistic
  int m = 1, d = 1;
  double mu = 1.0, L = 1.0;
  std::vector<double> per_worker_mu;  // optional heterogeneity override
  std::uint64_t seed = 0;
  std::string dataset;
  double lambda = 0.01;
  bool normalize = false;
  double part_a = 1.0, part_b = 10.0;
  std::uint64_t part_seed = 0;
};

struct AlgoSpecCfg {
  std::string params = "theory";  // theory|manual
  double eta = 0.0;               // manual: 0 means 1/beta
  double s = 1.0;
  double gamma = 0.0;
  double c = 0.0;
  int D = 2;
  int K = 0;  // 0 = auto
};

struct InnerSpecCfg {
  std::string solver = "exact";  // exact|agd|katyusha
  double c = 0.5;
  double C_kat = 1.0;
  long steps = 0;  // 0 = contraction-derived budget (katyusha) / error (agd)
};

struct ExperimentConfig {
  TopologySpec topology;
  ProblemSpecCfg problem;
  std::vector<std::string> methods;
  AlgoSpecCfg algo;
  InnerSpecCfg inner;
  StopRule stop;
  std::vector<std::uint64_t> seeds;
  std::string out_dir = "out";
  std::string format = "csv";
  std::string hash;
};

namespace detail_cfg {

inline void ensure_keys(const nlohmann::json& obj,
                        const std::set<std::string>& allowed,
                        const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key()))
      throw std::runtime_error("unknown config key: " + where + "." + it.key());
}

inline std::string fnv1a_hex(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace detail_cfg

inline ExperimentConfig parse_config_json(const nlohmann::json& j) {
  using detail_cfg::ensure_keys;
  ensure_keys(j, {"topology", "problem", "methods", "algo", "inner", "stop",
                  "seeds", "output"},
              "root");
  ExperimentConfig cfg;

  if (j.contains("topology")) {
    const auto& t = j.at("topology");
    ensure_keys(t, {"kind", "rows", "cols", "n", "p", "seed", "path",
                    "weights"},
                "topology");
    cfg.topology.kind = t.value("kind", cfg.topology.kind);
    cfg.topology.rows = t.value("rows", cfg.topology.rows);
    cfg.topology.cols = t.value("cols", cfg.topology.cols);
    cfg.topology.n = t.value("n", cfg.topology.n);
    cfg.topology.p = t.value("p", cfg.topology.p);
    cfg.topology.seed = t.value("seed", cfg.topology.seed);
    cfg.topology.path = t.value("path", cfg.topology.path);
    cfg.topology.weights = t.value("weights", cfg.topology.weights);
  }
  if (j.contains("problem")) {
    const auto& p = j.at("problem");
    ensure_keys(p, {"kind", "m", "d", "mu", "L", "per_worker_mu", "seed",
                    "dataset", "lambda", "normalize", "partition"},
                "problem");
    cfg.problem.kind = p.value("kind", cfg.problem.kind);
    cfg.problem.m = p.value("m", cfg.problem.m);
    cfg.problem.d = p.value("d", cfg.problem.d);
    cfg.problem.mu = p.value("mu", cfg.problem.mu);
    cfg.problem.L = p.value("L", cfg.problem.L);
    if (p.contains("per_worker_mu"))
      cfg.problem.per_worker_mu =
          p.at("per_worker_mu").get<std::vector<double>>();
    cfg.problem.seed = p.value("seed", cfg.problem.seed);
    cfg.problem.dataset = p.value("dataset", cfg.problem.dataset);
    cfg.problem.lambda = p.value("lambda", cfg.problem.lambda);
    cfg.problem.normalize = p.value("normalize", cfg.problem.normalize);
    if (p.contains("partition")) {
      const auto& pt = p.at("partition");
      ensure_keys(pt, {"a", "b", "seed"}, "problem.partition");
      cfg.problem.part_a = pt.value("a", cfg.problem.part_a);
      cfg.problem.part_b = pt.value("b", cfg.problem.part_b);
      cfg.problem.part_seed = pt.value("seed", cfg.problem.part_seed);
    }
  }
  if (j.contains("methods"))
    cfg.methods = j.at("methods").get<std::vector<std::string>>();
  if (cfg.methods.empty())
    throw std::runtime_error("config error: methods list is empty");
  for (const auto& m : cfg.methods) method_from_name(m);  // validate

  if (j.contains("algo")) {
    const auto& a = j.at("algo");
    ensure_keys(a, {"params", "eta", "s", "gamma", "c", "D", "K"}, "algo");
    cfg.algo.params = a.value("params", cfg.algo.params);
    cfg.algo.eta = a.value("eta", cfg.algo.eta);
    cfg.algo.s = a.value("s", cfg.algo.s);
    cfg.algo.gamma = a.value("gamma", cfg.algo.gamma);
    cfg.algo.c = a.value("c", cfg.algo.c);
    cfg.algo.D = a.value("D", cfg.algo.D);
    cfg.algo.K = a.value("K", cfg.algo.K);
    if (cfg.algo.params != "theory" && cfg.algo.params != "manual")
      throw std::runtime_error("algo.params must be theory or manual");
  }
  if (j.contains("inner")) {
    const auto& in = j.at("inner");
    ensure_keys(in, {"solver", "c", "C_kat", "steps"}, "inner");
    cfg.inner.solver = in.value("solver", cfg.inner.solver);
    cfg.inner.c = in.value("c", cfg.inner.c);
    cfg.inner.C_kat = in.value("C_kat", cfg.inner.C_kat);
    cfg.inner.steps = in.value("steps", cfg.inner.steps);
  }
  if (j.contains("stop")) {
    const auto& st = j.at("stop");
    ensure_keys(st, {"max_iters", "target_subopt"}, "stop");
    cfg.stop.max_iters = st.value("max_iters", cfg.stop.max_iters);
    cfg.stop.target_subopt = st.value("target_subopt", cfg.stop.target_subopt);
  }
  if (j.contains("seeds"))
    cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  if (cfg.seeds.empty())
    throw std::runtime_error("config error: seeds list is empty");
  if (j.contains("output")) {
    const auto& o = j.at("output");
    ensure_keys(o, {"dir", "format"}, "output");
    cfg.out_dir = o.value("dir", cfg.out_dir);
    cfg.format = o.value("format", cfg.format);
    if (cfg.format != "csv" && cfg.format != "json")
      throw std::runtime_error("output.format must be csv or json");
  }
  cfg.hash = detail_cfg::fnv1a_hex(j.dump());
  return cfg;
}

inline ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  nlohmann::json j;
  in >> j;
  return parse_config_json(j);
}

inline Graph build_graph_from_spec(const TopologySpec& t) {
  if (t.kind == "grid2d") return make_grid2d(t.rows, t.cols);
  if (t.kind == "path") return make_path(t.n);
  if (t.kind == "complete") return make_complete(t.n);
  if (t.kind == "erdos_renyi") return make_erdos_renyi(t.n, t.p, t.seed);
  if (t.kind == "edge_list") return load_edge_list(t.path);
  throw std::runtime_error("unknown topology kind: " + t.kind);
}

inline GossipMatrix build_gossip_from_spec(const Graph& g,
                                           const TopologySpec& t) {
  if (t.weights == "metropolis") return metropolis_weights(g);
  if (t.weights == "max_degree") return max_degree_weights(g);
  throw std::runtime_error("unknown weight rule: " + t.weights);
}

inline ProblemInstance build_problem_from_spec(const ProblemSpecCfg& p,
                                               int n_workers) {
  ProblemInstance inst;
  if (p.kind == "quadratic") {
    std::vector<std::pair<double, double>> cond;
    if (!p.per_worker_mu.empty()) {
      if (static_cast<int>(p.per_worker_mu.size()) != n_workers)
        throw std::runtime_error("per_worker_mu length mismatch");
      for (double mu_i : p.per_worker_mu)
        cond.emplace_back(mu_i, std::max(p.L, mu_i));
    } else {
      cond.emplace_back(p.mu, p.L);
    }
    inst = make_quadratic(n_workers, p.m, p.d, cond, p.seed);
  } else if (p.kind == "logistic") {
    if (p.dataset.empty())
      throw std::runtime_error("logistic problem needs a dataset path");
    if (!std::filesystem::exists(p.dataset))
      throw std::runtime_error("dataset file not found: " + p.dataset);
    Dataset ds = load_libsvm(p.dataset, p.normalize);
    PartitionSpec part =
        partition_uneven(static_cast<int>(ds.num_samples()), n_workers,
                         p.part_a, p.part_b, p.part_seed);
    inst = make_logistic(ds, p.lambda, part);
  } else {
    throw std::runtime_error("unknown problem kind: " + p.kind);
  }
  centralized_solve(inst);
  return inst;
}

// Resolved per-method algorithm configuration.
inline AlgoConfig resolve_algo(const ExperimentConfig& cfg, Method method,
                               const GossipMatrix& gm,
                               const ProblemInstance& problem) {
  AlgoConfig ac;
  ac.method = method;
  ac.D = cfg.algo.D;
  ac.K_override = cfg.algo.K;
  if (cfg.algo.params == "theory") {
    const bool multi = method == Method::msda || method == Method::mdlag;
    ChebyshevPlan plan = chebyshev_plan(gm);
    if (cfg.algo.K > 0) set_plan_rounds(plan, cfg.algo.K);
    const TheoryParams tp = multi
                                ? mdlag_params(gm, plan, problem, cfg.algo.D)
                                : theorem1_params(gm, problem, cfg.algo.D);
    ac.eta = tp.eta;
    ac.s = tp.s;
    ac.gamma = tp.gamma;
    ac.c = tp.c;
  } else {
    ac.eta = cfg.algo.eta;
    ac.s = cfg.algo.s;
    ac.gamma = cfg.algo.gamma;
    ac.c = cfg.algo.c;
  }
  // theory runs drive the contraction budget with the prescribed c
  ac.inner.c = (cfg.algo.params == "theory" && ac.c > 0.0) ? ac.c
                                                           : cfg.inner.c;
  if (cfg.inner.solver == "exact") {
    ac.inner.solver = InnerSolver::exact;
  } else if (cfg.inner.solver == "agd") {
    ac.inner.solver = InnerSolver::agd;
    if (cfg.inner.steps < 1)
      throw std::runtime_error("inner.steps required for agd");
    ac.inner.steps = cfg.inner.steps;
  } else if (cfg.inner.solver == "katyusha") {
    ac.inner.solver = InnerSolver::katyusha;
    int m_max = 1;
    for (const auto& o : problem.objectives) m_max = std::max(m_max, o.m);
    ac.inner.steps = cfg.inner.steps > 0
                         ? cfg.inner.steps
                         : katyusha_budget(m_max, problem.kappa_max,
                                           ac.inner.c, cfg.inner.C_kat);
  } else {
    throw std::runtime_error("unknown inner solver: " + cfg.inner.solver);
  }
  return ac;
}

struct RunArtifacts {
  std::vector<RunTrace> traces;
  nlohmann::json summary;
};

inline int parallelism_cap() {
  if (const char* env = std::getenv("LAZYDUAL_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  return 1;
}

// One trace per (method, seed), plus a summary document.
inline RunArtifacts run_experiment(const ExperimentConfig& cfg) {
  const Graph graph = build_graph_from_spec(cfg.topology);
  const GossipMatrix gm = build_gossip_from_spec(graph, cfg.topology);
  const ProblemInstance problem = build_problem_from_spec(cfg.problem, graph.n);

  struct Job {
    Method method;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (const auto& mname : cfg.methods)
    for (std::uint64_t seed : cfg.seeds)
      jobs.push_back({method_from_name(mname), seed});

  std::vector<RunTrace> traces(jobs.size());
  const int cap = parallelism_cap();
  std::size_t next = 0;
  while (next < jobs.size()) {
    std::vector<std::future<void>> batch;
    for (int t = 0; t < cap && next < jobs.size(); ++t, ++next) {
      const std::size_t idx = next;
      batch.push_back(std::async(std::launch::async, [&, idx] {
        const AlgoConfig ac =
            resolve_algo(cfg, jobs[idx].method, gm, problem);
        Simulator sim(graph, gm, problem, ac, jobs[idx].seed);
        traces[idx] = sim.run(cfg.stop);
        traces[idx].config_hash = cfg.hash;
      }));
    }
    for (auto& f : batch) f.get();
  }

  std::filesystem::create_directories(cfg.out_dir);
  nlohmann::json runs = nlohmann::json::array();
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const RunTrace& tr = traces[i];
    const std::string stem = std::string(method_name(tr.method)) + "_seed" +
                             std::to_string(tr.seed);
    const std::string path =
        (std::filesystem::path(cfg.out_dir) / (stem + "." + cfg.format))
            .string();
    if (cfg.format == "csv")
      emit_trace_csv(tr, path);
    else
      emit_trace_json(tr, path);

    const std::vector<double> h =
        heterogeneity_score(problem, graph, tr.gamma, tr.D);
    const double predicted =
        predicted_comm_factor(h, tr.K, tr.method);
    const ComparisonReport cmp = measured_vs_predicted(tr, graph, predicted);
    runs.push_back({{"method", method_name(tr.method)},
                    {"seed", tr.seed},
                    {"trace", path},
                    {"iterations", tr.iterations()},
                    {"final_subopt", tr.rows.back().subopt},
                    {"messages", tr.total_messages()},
                    {"grad_evals", tr.total_grad_evals()},
                    {"chebyshev_bypass", tr.chebyshev_bypass},
                    {"measured_utilization", cmp.measured_utilization},
                    {"predicted_factor", cmp.predicted_factor},
                    {"within_prediction", cmp.pass}});
  }
  nlohmann::json summary{{"config_hash", cfg.hash},
                         {"n", graph.n},
                         {"edges", graph.edges.size()},
                         {"kappa_F", problem.kappa_F},
                         {"zeta", gm.zeta},
                         {"runs", runs}};
  std::ofstream out(std::filesystem::path(cfg.out_dir) / "summary.json");
  out << summary.dump(2) << '\n';

  RunArtifacts art;
  art.traces = std::move(traces);
  art.summary = std::move(summary);
  return art;
}

}  // namespace lazydual
