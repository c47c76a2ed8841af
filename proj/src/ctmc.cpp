#include "casim/ctmc.hpp"

#include <cmath>
#include <deque>
#include <map>
#include <tuple>

namespace casim {

namespace {

struct Family {
  int channels = 1;
  int slots = 1;
  int theta = 1;
  int queue_cap = 0;
  double su_arrival = 0.0;
  double su_completion = 0.0;  // theta * mu_s, per serving SU
  double pu_arrival = 0.0;
  double pu_service = 1.0;
  double expire_rate = 0.0;    // per queued entry
};

int capacity_at(const Family& f, int pu_on) {
  return ((f.channels - pu_on) * f.slots) / f.theta;
}

std::tuple<int, int, int> key(const CtmcState& s) {
  return {s.pu_on, s.serving, s.queued};
}

}  // namespace

int CtmcModel::index_of(const CtmcState& s) const {
  for (std::size_t i = 0; i < states.size(); ++i)
    if (states[i] == s) return static_cast<int>(i);
  return -1;
}

std::string oracle_unsupported_reason(const Scenario& sc, PolicyKind policy) {
  const TrafficConfig& tr = sc.traffic;
  if (tr.num_classes() != 1) return "oracle needs a single SU class";
  if (tr.snr_rate != 0.0) return "oracle needs static SNR (snr_rate = 0)";
  const DemandRule& first = tr.demand[0][0];
  for (int s = 0; s < 3; ++s) {
    const DemandRule& d = tr.demand[0][s];
    if (d.theta != first.theta || d.theta_min != first.theta_min ||
        d.theta_max != first.theta_max)
      return "oracle needs one demand rule across SNR classes";
  }
  if (first.theta_min != first.theta || first.theta_max != first.theta)
    return "oracle needs degenerate demand (theta == theta_min == theta_max)";
  if (sc.policy.contiguous) return "oracle needs scattered placement (contiguous = false)";
  if (std::isfinite(sc.policy.deadline) && !sc.policy.exp_deadline)
    return "deterministic queue deadline breaks the Markov property; disable it "
           "(deadline = inf) or enable exp_deadline and rerun the simulator with "
           "the same toggle";
  int slots = sc.spectrum.slots();
  if (tr.pu_arrival_rate > 0.0 && sc.spectrum.channels > 1 && first.theta != slots)
    return "PU preemption with partial-channel SUs needs slot placement state; "
           "supported: no PU, a single channel, or whole-channel demand (theta == S)";
  int queue_cap =
      policy_has_queue(policy) ? sc.policy.queue1_capacity + sc.policy.queue2_capacity : 0;
  long long pu_levels = tr.pu_arrival_rate > 0.0 ? sc.spectrum.channels + 1 : 1;
  long long count = pu_levels *
                    (capacity_at({sc.spectrum.channels, slots, first.theta}, 0) + 1) *
                    (queue_cap + 1);
  if (count > 100000) return "state space exceeds 10^5 states";
  return "";
}

CtmcModel build_generator(const Scenario& sc, PolicyKind policy) {
  if (std::string reason = oracle_unsupported_reason(sc, policy); !reason.empty())
    throw UnsupportedScenario(reason);

  Family f;
  f.channels = sc.spectrum.channels;
  f.slots = sc.spectrum.slots();
  f.theta = sc.traffic.demand[0][0].theta;
  f.queue_cap = policy_has_queue(policy)
                    ? sc.policy.queue1_capacity + sc.policy.queue2_capacity
                    : 0;
  f.su_arrival = sc.traffic.su_arrival_rate[0];
  f.su_completion = f.theta * sc.traffic.su_service_rate[0];
  f.pu_arrival = sc.traffic.pu_arrival_rate;
  f.pu_service = sc.traffic.pu_service_rate;
  if (std::isfinite(sc.policy.deadline) && sc.policy.exp_deadline)
    f.expire_rate = 1.0 / sc.policy.deadline;

  struct Edge {
    CtmcState target;
    double rate;
  };
  // Transitions out of one state; drop_rate accumulates preemption and
  // deadline losses, admit is the arrival flow entering service or buffer.
  auto expand = [&](const CtmcState& s, std::vector<Edge>& edges, double& drop,
                    double& admit, double& blocked) {
    edges.clear();
    drop = admit = blocked = 0.0;
    int cap = capacity_at(f, s.pu_on);

    if (f.su_arrival > 0.0) {
      if (s.serving < cap) {
        edges.push_back({{s.pu_on, s.serving + 1, s.queued}, f.su_arrival});
        admit = f.su_arrival;
      } else if (s.queued < f.queue_cap) {
        edges.push_back({{s.pu_on, s.serving, s.queued + 1}, f.su_arrival});
        admit = f.su_arrival;
      } else {
        blocked = 1.0;  // arrival is lost; PASTA gives the probability
      }
    }

    if (s.serving > 0) {
      // A completion frees theta slots, which admits exactly one queued SU.
      CtmcState t = s.queued > 0 ? CtmcState{s.pu_on, s.serving, s.queued - 1}
                                 : CtmcState{s.pu_on, s.serving - 1, s.queued};
      edges.push_back({t, s.serving * f.su_completion});
    }

    if (f.pu_arrival > 0.0 && s.pu_on < f.channels) {
      if (f.channels == 1) {
        // The PU takes the only channel; every serving SU is displaced, the
        // buffer absorbs what it can (earliest first), the rest are lost.
        int requeued = std::min(s.serving, f.queue_cap - s.queued);
        int dropped = s.serving - requeued;
        edges.push_back({{1, 0, s.queued + requeued}, f.pu_arrival});
        drop += f.pu_arrival * dropped;
      } else {
        // Whole-channel SUs: a displaced SU relocates whenever a fully free
        // channel remains, otherwise it is buffered or lost.
        int idle = f.channels - s.pu_on;
        int free_ch = idle - s.serving;
        if (free_ch >= 1) {
          edges.push_back({{s.pu_on + 1, s.serving, s.queued}, f.pu_arrival});
        } else {
          int requeued = s.queued < f.queue_cap ? 1 : 0;
          edges.push_back(
              {{s.pu_on + 1, s.serving - 1, s.queued + requeued}, f.pu_arrival});
          drop += f.pu_arrival * (1 - requeued);
        }
      }
    }

    if (s.pu_on > 0) {
      int new_cap = capacity_at(f, s.pu_on - 1);
      int admitted = std::min(s.queued, new_cap - s.serving);
      edges.push_back(
          {{s.pu_on - 1, s.serving + admitted, s.queued - admitted}, s.pu_on * f.pu_service});
    }

    if (s.queued > 0 && f.expire_rate > 0.0) {
      edges.push_back({{s.pu_on, s.serving, s.queued - 1}, s.queued * f.expire_rate});
      drop += s.queued * f.expire_rate;
    }
  };

  // Breadth-first reachable enumeration from the empty state.
  CtmcModel model;
  std::map<std::tuple<int, int, int>, int> index;
  std::deque<CtmcState> frontier;
  auto intern = [&](const CtmcState& s) {
    auto [it, inserted] = index.try_emplace(key(s), static_cast<int>(model.states.size()));
    if (inserted) {
      model.states.push_back(s);
      frontier.push_back(s);
    }
    return it->second;
  };
  intern({0, 0, 0});

  std::vector<Edge> edges;
  std::vector<Eigen::Triplet<double>> triplets;
  std::vector<double> drops, admits, blocks;
  while (!frontier.empty()) {
    CtmcState s = frontier.front();
    frontier.pop_front();
    int row = index.at(key(s));
    double drop, admit, blocked;
    expand(s, edges, drop, admit, blocked);
    if (static_cast<int>(drops.size()) <= row) {
      drops.resize(row + 1);
      admits.resize(row + 1);
      blocks.resize(row + 1);
    }
    drops[row] = drop;
    admits[row] = admit;
    blocks[row] = blocked;
    double out = 0.0;
    for (const Edge& e : edges) {
      int col = intern(e.target);
      if (col == row) continue;  // self-loops cancel in a generator
      triplets.emplace_back(row, col, e.rate);
      out += e.rate;
    }
    triplets.emplace_back(row, row, -out);
  }

  const int n = static_cast<int>(model.states.size());
  model.generator.resize(n, n);
  model.generator.setFromTriplets(triplets.begin(), triplets.end());
  model.block_indicator.resize(n);
  model.admit_rate.resize(n);
  model.drop_rate.resize(n);
  model.completion_rate.resize(n);
  model.queue_len.resize(n);
  drops.resize(n);
  admits.resize(n);
  blocks.resize(n);
  for (int i = 0; i < n; ++i) {
    model.block_indicator[i] = blocks[i];
    model.admit_rate[i] = admits[i];
    model.drop_rate[i] = drops[i];
    model.completion_rate[i] = model.states[i].serving * f.su_completion;
    model.queue_len[i] = model.states[i].queued;
  }
  return model;
}

Eigen::VectorXd solve_steady_state(const Eigen::SparseMatrix<double>& generator) {
  const int n = static_cast<int>(generator.rows());
  if (n == 0) throw std::invalid_argument("empty generator");

  // Row sums must vanish for a proper generator.
  Eigen::VectorXd row_sums = generator * Eigen::VectorXd::Ones(n);
  if (row_sums.lpNorm<Eigen::Infinity>() > 1e-9)
    throw std::invalid_argument("generator rows do not sum to zero");

  Eigen::SparseMatrix<double> qt = generator.transpose();
  Eigen::VectorXd pi(n);
  if (n < 2000) {
    // Solve Q^T pi = 0 with the last balance equation replaced by sum = 1.
    Eigen::MatrixXd a = Eigen::MatrixXd(qt);
    a.row(n - 1).setOnes();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    b[n - 1] = 1.0;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (!lu.isInvertible())
      throw std::runtime_error("singular or reducible chain: steady state not unique");
    pi = lu.solve(b);
  } else {
    // Uniformized power iteration: pi <- pi (I + Q / Lambda).
    double lambda = 0.0;
    for (int i = 0; i < n; ++i) lambda = std::max(lambda, -generator.coeff(i, i));
    lambda *= 1.05;
    Eigen::VectorXd next(n);
    pi.setConstant(1.0 / n);
    for (long iter = 0; iter < 2000000; ++iter) {
      next = pi + (qt * pi) / lambda;
      double delta = (next - pi).lpNorm<Eigen::Infinity>();
      pi = next;
      if (delta < 1e-14) break;
    }
  }

  for (int i = 0; i < n; ++i) {
    if (pi[i] < -1e-9) throw std::runtime_error("negative steady-state probability");
    if (pi[i] < 0.0) pi[i] = 0.0;
  }
  pi /= pi.sum();

  double residual = (qt * pi).lpNorm<Eigen::Infinity>();
  if (residual > 1e-10)
    throw std::runtime_error("steady-state residual " + std::to_string(residual) +
                             " above 1e-10");
  return pi;
}

OracleMetrics oracle_metrics(const Eigen::VectorXd& pi, const CtmcModel& model,
                             const Scenario&) {
  OracleMetrics om;
  om.p_block = pi.dot(model.block_indicator);
  double admit_flow = pi.dot(model.admit_rate);
  double drop_flow = pi.dot(model.drop_rate);
  om.p_forced = admit_flow > 0.0 ? drop_flow / admit_flow : 0.0;
  om.capacity = pi.dot(model.completion_rate);
  om.mean_queue_len = pi.dot(model.queue_len);
  return om;
}

}  // namespace casim
