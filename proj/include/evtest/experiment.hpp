#pragma once

// Monte-Carlo experiment runners: rejection rates of each testing method and
// average log-wealth curves of the e-process methods.
//
// Replicate r draws its data from Rng(seed, r), independently of the method
// and of the thread that runs it. Methods compared under one seed therefore
// see identical data, and results do not depend on the job count.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "evtest/combine.hpp"
#include "evtest/eprocess.hpp"
#include "evtest/error.hpp"
#include "evtest/evidence.hpp"
#include "evtest/format.hpp"
#include "evtest/generators.hpp"
#include "evtest/random.hpp"

namespace evtest {

enum class Method { EMixture, EGree, PFisher, PSimes, EBatch, PBatch, Grapa, Agrapa, EGree2s, EMixture2s };

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::EMixture: return "emixture";
    case Method::EGree: return "egree";
    case Method::PFisher: return "pfisher";
    case Method::PSimes: return "psimes";
    case Method::EBatch: return "ebatch";
    case Method::PBatch: return "pbatch";
    case Method::Grapa: return "grapa";
    case Method::Agrapa: return "agrapa";
    case Method::EGree2s: return "egree2s";
    case Method::EMixture2s: return "emixture2s";
  }
  return "?";
}

inline Method parse_method(std::string_view name) {
  for (Method m : {Method::EMixture, Method::EGree, Method::PFisher, Method::PSimes, Method::EBatch,
                   Method::PBatch, Method::Grapa, Method::Agrapa, Method::EGree2s, Method::EMixture2s})
    if (to_string(m) == name) return m;
  throw Error("unknown method '" + std::string(name) + "'");
}

inline bool is_eprocess_method(Method m) {
  return m == Method::EMixture || m == Method::EGree || m == Method::Grapa || m == Method::Agrapa ||
         m == Method::EGree2s || m == Method::EMixture2s;
}

/// How an e-process run decides: first crossing of the threshold at any t
/// (anytime-valid, equivalent to max_t M_t), or the terminal value M_n only.
enum class DecisionRule { Crossing, Terminal };

inline std::string_view to_string(DecisionRule r) { return r == DecisionRule::Crossing ? "crossing" : "terminal"; }

inline DecisionRule parse_rule(std::string_view name) {
  if (name == "crossing" || name == "max") return DecisionRule::Crossing;
  if (name == "terminal" || name == "final") return DecisionRule::Terminal;
  throw Error("unknown decision rule '" + std::string(name) + "'");
}

struct SimConfig {
  Generator generator{NL{}};
  std::size_t n = 100;
  std::size_t runs = 1000;
  double threshold = 20.0;
  std::uint64_t seed = 0;
  Method method = Method::EMixture;
  Hypothesis hypothesis;
  /// GREE cap and GRAPA c.
  double cap = 0.5;
  double c = 0.5;
  DecisionRule rule = DecisionRule::Crossing;
  /// Worker threads; 0 means hardware concurrency.
  unsigned jobs = 1;

  void validate() const {
    if (n < 1) throw Error("n must be at least 1");
    if (runs < 1) throw Error("runs must be at least 1");
    if (!(threshold > 1.0) || !std::isfinite(threshold)) throw Error("threshold must be finite and greater than 1");
    evtest::validate(generator);
    hypothesis.validate();
  }
};

struct ExperimentResult {
  double rejection_rate = 0.0;
  double standard_error = 0.0;
  std::size_t runs = 0;
  std::optional<std::vector<double>> avg_log_trajectory;
};

/// The betting strategy behind an e-process method.
inline BettingStrategy method_strategy(const SimConfig& cfg) {
  switch (cfg.method) {
    case Method::EMixture:
    case Method::EMixture2s: return EMixture::default_grid();
    case Method::EGree:
    case Method::EGree2s: return EGree{cfg.cap};
    case Method::Grapa: return Grapa{cfg.c, true};
    case Method::Agrapa: return Agrapa{cfg.c};
    default: throw Error("method '" + std::string(to_string(cfg.method)) + "' is not an e-process");
  }
}

/// The hypothesis actually tested: the 2s methods use the point-null
/// two-sided e-variable (X - mu)^2 / sigma^2, which admits no shape factor.
inline Hypothesis method_hypothesis(const SimConfig& cfg) {
  if (cfg.method == Method::EGree2s || cfg.method == Method::EMixture2s) {
    Hypothesis h = cfg.hypothesis;
    if (!h.two_sided()) h.side = TwoSided{h.spec.mu, h.spec.mu};
    h.shape = ShapeClass::Plain;
    return h;
  }
  return cfg.hypothesis;
}

/// Runs fn(i) for i in [0, count) on up to `jobs` threads. The first
/// exception thrown by any task is rethrown.
template <typename Fn>
void parallel_for(std::size_t count, unsigned jobs, Fn&& fn) {
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, count));
  if (jobs <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> workers;
  workers.reserve(jobs);
  for (unsigned w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  if (failure) std::rethrow_exception(failure);
}

/// Data of replicate `run`.
inline std::vector<double> replicate_data(const SimConfig& cfg, std::size_t run) {
  Rng rng(cfg.seed, run);
  return generate(cfg.generator, cfg.n, rng);
}

/// Whether one replicate rejects, following the method's decision rule:
/// e-processes reject when M_t reaches the threshold (at any t, or at t = n
/// under the terminal rule), p-methods when the combined p-value is at most
/// 1/threshold, e-batch when it reaches the threshold.
inline bool replicate_rejects(const SimConfig& cfg, std::span<const double> xs) {
  const Hypothesis& h = cfg.hypothesis;
  const double alpha = 1.0 / cfg.threshold;
  switch (cfg.method) {
    case Method::PFisher:
    case Method::PSimes: {
      std::vector<double> ps;
      ps.reserve(xs.size());
      for (double x : xs) ps.push_back(evaluate(x, h).p);
      const double p = cfg.method == Method::PFisher ? fisher_combine(ps) : simes_combine(ps);
      return p <= alpha;
    }
    case Method::EBatch: return e_batch(xs, h.spec, h.shape) >= cfg.threshold;
    case Method::PBatch: return p_batch(xs, h.spec, h.shape) <= alpha;
    default: {
      EProcessState s = eprocess_init(method_hypothesis(cfg), method_strategy(cfg));
      if (cfg.rule == DecisionRule::Terminal) {
        for (double x : xs) eprocess_update(s, x);
        return s.wealth >= cfg.threshold;
      }
      for (double x : xs)
        if (eprocess_update(s, x) >= cfg.threshold) return true;
      return false;
    }
  }
}

inline ExperimentResult run_rejection_experiment(const SimConfig& cfg) {
  cfg.validate();
  if (is_eprocess_method(cfg.method)) eprocess_init(method_hypothesis(cfg), method_strategy(cfg));

  std::vector<char> rejected(cfg.runs, 0);
  parallel_for(cfg.runs, cfg.jobs, [&](std::size_t r) {
    const std::vector<double> xs = replicate_data(cfg, r);
    rejected[r] = replicate_rejects(cfg, xs) ? 1 : 0;
  });

  ExperimentResult res;
  res.runs = cfg.runs;
  std::size_t hits = 0;
  for (char v : rejected) hits += static_cast<std::size_t>(v);
  res.rejection_rate = static_cast<double>(hits) / static_cast<double>(cfg.runs);
  res.standard_error = std::sqrt(res.rejection_rate * (1.0 - res.rejection_rate) / static_cast<double>(cfg.runs));
  return res;
}

/// Wealth trajectories M_1..M_n of every replicate (e-process methods only).
inline std::vector<std::vector<double>> replicate_trajectories(const SimConfig& cfg) {
  cfg.validate();
  if (!is_eprocess_method(cfg.method))
    throw Error("method '" + std::string(to_string(cfg.method)) + "' has no wealth trajectory");
  const Hypothesis h = method_hypothesis(cfg);
  const BettingStrategy strategy = method_strategy(cfg);
  eprocess_init(h, strategy);

  std::vector<std::vector<double>> out(cfg.runs);
  parallel_for(cfg.runs, cfg.jobs, [&](std::size_t r) {
    const std::vector<double> xs = replicate_data(cfg, r);
    out[r] = run_eprocess(h, strategy, xs);
  });
  return out;
}

/// Monte-Carlo mean of log M_t for t = 1..n; the rejection fields are filled
/// from the same replicates.
inline ExperimentResult run_avg_log_trajectory(const SimConfig& cfg) {
  const auto paths = replicate_trajectories(cfg);
  std::vector<double> avg(cfg.n, 0.0);
  std::size_t hits = 0;
  for (const auto& path : paths) {
    for (std::size_t t = 0; t < cfg.n; ++t) avg[t] += std::log(path[t]);
    const double stat = cfg.rule == DecisionRule::Terminal ? path.back() : *std::max_element(path.begin(), path.end());
    if (stat >= cfg.threshold) ++hits;
  }
  for (double& v : avg) v /= static_cast<double>(cfg.runs);

  ExperimentResult res;
  res.runs = cfg.runs;
  res.rejection_rate = static_cast<double>(hits) / static_cast<double>(cfg.runs);
  res.standard_error = std::sqrt(res.rejection_rate * (1.0 - res.rejection_rate) / static_cast<double>(cfg.runs));
  res.avg_log_trajectory = std::move(avg);
  return res;
}

/// Monte-Carlo mean of M_t and its standard error at the requested 1-based times.
struct WealthSummary {
  std::vector<std::size_t> times;
  std::vector<double> mean;
  std::vector<double> standard_error;
};

inline WealthSummary mean_wealth_at(const SimConfig& cfg, std::span<const std::size_t> times) {
  for (std::size_t t : times)
    if (t < 1 || t > cfg.n) throw Error("checkpoint outside 1..n");
  const auto paths = replicate_trajectories(cfg);
  WealthSummary out;
  const double runs = static_cast<double>(cfg.runs);
  for (std::size_t t : times) {
    double sum = 0.0;
    double sum_sq = 0.0;
    for (const auto& path : paths) {
      sum += path[t - 1];
      sum_sq += path[t - 1] * path[t - 1];
    }
    const double mean = sum / runs;
    const double var = runs > 1 ? std::max(0.0, (sum_sq - runs * mean * mean) / (runs - 1.0)) : 0.0;
    out.times.push_back(t);
    out.mean.push_back(mean);
    out.standard_error.push_back(std::sqrt(var / runs));
  }
  return out;
}

inline void write_results_csv_header(std::ostream& os) {
  os << "method,shape,generator,param,n,runs,threshold,rate,se\n";
}

inline void write_result_csv_row(std::ostream& os, const SimConfig& cfg, const ExperimentResult& res) {
  os << to_string(cfg.method) << ',' << to_string(cfg.hypothesis.shape) << ',' << generator_name(cfg.generator)
     << ',' << generator_params(cfg.generator) << ',' << cfg.n << ',' << cfg.runs << ','
     << format_number(cfg.threshold) << ',' << format_number(res.rejection_rate) << ','
     << format_number(res.standard_error) << '\n';
}

/// Columns: t, then one mean-log-wealth column per method.
inline void write_trajectory_csv(std::ostream& os, std::span<const Method> methods,
                                 std::span<const ExperimentResult> results) {
  if (methods.size() != results.size()) throw Error("one result per method expected");
  os << 't';
  for (Method m : methods) os << ",mean_log_M_" << to_string(m);
  os << '\n';
  const std::size_t n = results.empty() ? 0 : results.front().avg_log_trajectory.value().size();
  for (std::size_t t = 0; t < n; ++t) {
    os << t + 1;
    for (const auto& r : results) os << ',' << format_number(r.avg_log_trajectory.value()[t]);
    os << '\n';
  }
}

}  // namespace evtest
