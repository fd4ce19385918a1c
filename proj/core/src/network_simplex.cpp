#include "alignlab/network_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "alignlab/error.hpp"

namespace alignlab {

namespace {

// Integer masses summing exactly to `total` (largest-remainder rounding).
std::vector<std::int64_t> integerize(const std::vector<double>& w, double mass, std::int64_t total) {
  std::vector<std::int64_t> out(w.size());
  std::vector<std::pair<double, std::size_t>> rem(w.size());
  std::int64_t acc = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double x = w[i] / mass * static_cast<double>(total);
    out[i] = static_cast<std::int64_t>(std::floor(x));
    rem[i] = {x - std::floor(x), i};
    acc += out[i];
  }
  std::sort(rem.begin(), rem.end(), [](auto& l, auto& r) { return l.first > r.first; });
  for (std::size_t k = 0; acc < total; ++k, ++acc) ++out[rem[k % rem.size()].second];
  for (std::size_t k = 0; acc > total; ++k) {
    auto& o = out[rem[rem.size() - 1 - k % rem.size()].second];
    if (o > 0) {
      --o;
      --acc;
    }
  }
  return out;
}

// Primal network simplex on the complete bipartite graph, spanning-tree data layout after the
// LEMON implementation (thread / reverse-thread / successor-count tree encoding).
class NetworkSimplex {
 public:
  NetworkSimplex(const std::vector<std::int64_t>& supply, const std::vector<std::int64_t>& demand,
                 const std::function<double(int, int)>& cost)
      : n_(static_cast<int>(supply.size())),
        m_(static_cast<int>(demand.size())),
        node_num_(n_ + m_),
        arc_num_(n_ * m_),
        all_arc_num_(arc_num_ + node_num_),
        root_(node_num_) {
    source_.resize(all_arc_num_);
    target_.resize(all_arc_num_);
    cost_.resize(all_arc_num_);
    flow_.assign(all_arc_num_, 0);
    state_.assign(all_arc_num_, kLower);
    double max_cost = 0.0;
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < m_; ++j) {
        const int e = i * m_ + j;
        source_[e] = i;
        target_[e] = n_ + j;
        cost_[e] = cost(i, j);
        if (!std::isfinite(cost_[e]) || cost_[e] < 0.0)
          throw InvalidArgument("transport costs must be finite and nonnegative");
        max_cost = std::max(max_cost, cost_[e]);
      }
    eps_ = 1e-14 * std::max(max_cost, 1e-300);
    const double art_cost = (max_cost + 1.0) * node_num_;

    parent_.resize(node_num_ + 1);
    pred_.resize(node_num_ + 1);
    pred_dir_.resize(node_num_ + 1);
    thread_.resize(node_num_ + 1);
    rev_thread_.resize(node_num_ + 1);
    succ_num_.resize(node_num_ + 1);
    last_succ_.resize(node_num_ + 1);
    pi_.resize(node_num_ + 1);

    parent_[root_] = -1;
    pred_[root_] = -1;
    thread_[root_] = 0;
    rev_thread_[0] = root_;
    succ_num_[root_] = node_num_ + 1;
    last_succ_[root_] = root_ - 1;
    pi_[root_] = 0.0;
    for (int u = 0, e = arc_num_; u < node_num_; ++u, ++e) {
      parent_[u] = root_;
      pred_[u] = e;
      thread_[u] = u + 1;
      rev_thread_[u + 1] = u;
      succ_num_[u] = 1;
      last_succ_[u] = u;
      state_[e] = kTree;
      const std::int64_t sup = u < n_ ? supply[u] : -demand[u - n_];
      if (sup >= 0) {
        pred_dir_[u] = kUp;
        pi_[u] = 0.0;
        source_[e] = u;
        target_[e] = root_;
        flow_[e] = sup;
        cost_[e] = 0.0;
      } else {
        pred_dir_[u] = kDown;
        pi_[u] = art_cost;
        source_[e] = root_;
        target_[e] = u;
        flow_[e] = -sup;
        cost_[e] = art_cost;
      }
    }
    block_size_ = std::max(10, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(arc_num_)))));
  }

  long run() {
    long pivots = 0;
    while (find_entering_arc()) {
      find_join_node();
      const bool change = find_leaving_arc();
      if (delta_ == kInf) throw Error("transport problem is unbounded");
      change_flow(change);
      if (change) {
        update_tree_structure();
        update_potential();
      }
      ++pivots;
    }
    for (int e = arc_num_; e < all_arc_num_; ++e)
      if (flow_[e] != 0) throw Error("transport problem is infeasible");
    return pivots;
  }

  std::int64_t flow(int e) const { return flow_[e]; }
  double cost(int e) const { return cost_[e]; }
  int arc_count() const { return arc_num_; }

 private:
  static constexpr int kTree = 0, kLower = 1, kUpper = -1;
  static constexpr int kUp = 1, kDown = -1;
  static constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max();

  double reduced(int e) const { return cost_[e] + pi_[source_[e]] - pi_[target_[e]]; }

  bool find_entering_arc() {
    double min = -eps_;
    int cnt = block_size_;
    int e;
    bool found = false;
    for (e = next_arc_; e != arc_num_; ++e) {
      const double c = state_[e] * reduced(e);
      if (c < min) {
        min = c;
        in_arc_ = e;
        found = true;
      }
      if (--cnt == 0) {
        if (found) goto search_end;
        cnt = block_size_;
      }
    }
    for (e = 0; e != next_arc_; ++e) {
      const double c = state_[e] * reduced(e);
      if (c < min) {
        min = c;
        in_arc_ = e;
        found = true;
      }
      if (--cnt == 0) {
        if (found) goto search_end;
        cnt = block_size_;
      }
    }
    if (!found) return false;
  search_end:
    next_arc_ = e == arc_num_ ? 0 : e;
    return true;
  }

  void find_join_node() {
    int u = source_[in_arc_], v = target_[in_arc_];
    while (u != v) {
      if (succ_num_[u] < succ_num_[v])
        u = parent_[u];
      else
        v = parent_[v];
    }
    join_ = u;
  }

  bool find_leaving_arc() {
    int first, second;
    if (state_[in_arc_] == kLower) {
      first = source_[in_arc_];
      second = target_[in_arc_];
    } else {
      first = target_[in_arc_];
      second = source_[in_arc_];
    }
    delta_ = kInf;
    int result = 0;
    for (int u = first; u != join_; u = parent_[u]) {
      if (pred_dir_[u] != kUp) continue;  // uncapacitated arcs never block the other direction
      const std::int64_t d = flow_[pred_[u]];
      if (d < delta_) {
        delta_ = d;
        u_out_ = u;
        result = 1;
      }
    }
    for (int u = second; u != join_; u = parent_[u]) {
      if (pred_dir_[u] != kDown) continue;
      const std::int64_t d = flow_[pred_[u]];
      if (d <= delta_) {
        delta_ = d;
        u_out_ = u;
        result = 2;
      }
    }
    if (result == 1) {
      u_in_ = first;
      v_in_ = second;
    } else {
      u_in_ = second;
      v_in_ = first;
    }
    return result != 0;
  }

  void change_flow(bool change) {
    if (delta_ > 0) {
      const std::int64_t val = state_[in_arc_] * delta_;
      flow_[in_arc_] += val;
      for (int u = source_[in_arc_]; u != join_; u = parent_[u]) flow_[pred_[u]] -= pred_dir_[u] * val;
      for (int u = target_[in_arc_]; u != join_; u = parent_[u]) flow_[pred_[u]] += pred_dir_[u] * val;
    }
    if (change) {
      state_[in_arc_] = kTree;
      state_[pred_[u_out_]] = flow_[pred_[u_out_]] == 0 ? kLower : kUpper;
    } else {
      state_[in_arc_] = -state_[in_arc_];
    }
  }

  void update_tree_structure() {
    const int old_rev_thread = rev_thread_[u_out_];
    const int old_succ_num = succ_num_[u_out_];
    const int old_last_succ = last_succ_[u_out_];
    v_out_ = parent_[u_out_];

    if (u_in_ == u_out_) {
      parent_[u_in_] = v_in_;
      pred_[u_in_] = in_arc_;
      pred_dir_[u_in_] = u_in_ == source_[in_arc_] ? kUp : kDown;
      if (thread_[v_in_] != u_out_) {
        int after = thread_[old_last_succ];
        thread_[old_rev_thread] = after;
        rev_thread_[after] = old_rev_thread;
        after = thread_[v_in_];
        thread_[v_in_] = u_out_;
        rev_thread_[u_out_] = v_in_;
        thread_[old_last_succ] = after;
        rev_thread_[after] = old_last_succ;
      }
    } else {
      const int thread_continue =
          old_rev_thread == v_in_ ? thread_[old_last_succ] : thread_[v_in_];
      int stem = u_in_;
      int par_stem = v_in_;
      int last = last_succ_[u_in_];
      int after = thread_[last];
      thread_[v_in_] = u_in_;
      dirty_revs_.clear();
      dirty_revs_.push_back(v_in_);
      while (stem != u_out_) {
        const int next_stem = parent_[stem];
        thread_[last] = next_stem;
        dirty_revs_.push_back(last);
        const int before = rev_thread_[stem];
        thread_[before] = after;
        rev_thread_[after] = before;
        parent_[stem] = par_stem;
        par_stem = stem;
        stem = next_stem;
        last = last_succ_[stem] == last_succ_[par_stem] ? rev_thread_[par_stem] : last_succ_[stem];
        after = thread_[last];
      }
      parent_[u_out_] = par_stem;
      thread_[last] = thread_continue;
      rev_thread_[thread_continue] = last;
      last_succ_[u_out_] = last;
      if (old_rev_thread != v_in_) {
        thread_[old_rev_thread] = after;
        rev_thread_[after] = old_rev_thread;
      }
      for (int u : dirty_revs_) rev_thread_[thread_[u]] = u;

      int tmp_sc = 0;
      const int tmp_ls = last_succ_[u_out_];
      for (int u = u_out_, p = parent_[u]; u != u_in_; u = p, p = parent_[u]) {
        pred_[u] = pred_[p];
        pred_dir_[u] = -pred_dir_[p];
        tmp_sc += succ_num_[u] - succ_num_[p];
        succ_num_[u] = tmp_sc;
        last_succ_[p] = tmp_ls;
      }
      pred_[u_in_] = in_arc_;
      pred_dir_[u_in_] = u_in_ == source_[in_arc_] ? kUp : kDown;
      succ_num_[u_in_] = old_succ_num;
    }

    const int up_limit_out = last_succ_[join_] == v_in_ ? join_ : -1;
    const int last_succ_out = last_succ_[u_out_];
    for (int u = v_in_; u != -1 && last_succ_[u] == v_in_; u = parent_[u]) last_succ_[u] = last_succ_out;

    if (join_ != old_rev_thread && v_in_ != old_rev_thread) {
      for (int u = v_out_; u != up_limit_out && last_succ_[u] == old_last_succ; u = parent_[u])
        last_succ_[u] = old_rev_thread;
    } else if (last_succ_out != old_last_succ) {
      for (int u = v_out_; u != up_limit_out && last_succ_[u] == old_last_succ; u = parent_[u])
        last_succ_[u] = last_succ_out;
    }

    for (int u = v_in_; u != join_; u = parent_[u]) succ_num_[u] += old_succ_num;
    for (int u = v_out_; u != join_; u = parent_[u]) succ_num_[u] -= old_succ_num;
  }

  void update_potential() {
    const double sigma = pi_[v_in_] - pi_[u_in_] - pred_dir_[u_in_] * cost_[in_arc_];
    const int end = thread_[last_succ_[u_in_]];
    for (int u = u_in_; u != end; u = thread_[u]) pi_[u] += sigma;
  }

  int n_, m_, node_num_, arc_num_, all_arc_num_, root_;
  std::vector<int> source_, target_;
  std::vector<double> cost_;
  std::vector<std::int64_t> flow_;
  std::vector<int> state_;
  std::vector<int> parent_, pred_, pred_dir_, thread_, rev_thread_, succ_num_, last_succ_;
  std::vector<double> pi_;
  std::vector<int> dirty_revs_;
  int block_size_ = 10;
  int next_arc_ = 0;
  double eps_ = 0.0;
  int in_arc_ = 0, join_ = 0, u_in_ = 0, v_in_ = 0, u_out_ = 0, v_out_ = 0;
  std::int64_t delta_ = 0;
};

}  // namespace

TransportPlan solve_transport(const std::vector<double>& a, const std::vector<double>& b,
                              const std::function<double(int, int)>& cost, double resolution) {
  if (a.empty() || b.empty()) throw InvalidArgument("transport needs nonempty supports");
  const double ma = std::accumulate(a.begin(), a.end(), 0.0);
  const double mb = std::accumulate(b.begin(), b.end(), 0.0);
  for (double x : a)
    if (!(x >= 0.0)) throw InvalidArgument("transport masses must be nonnegative");
  for (double x : b)
    if (!(x >= 0.0)) throw InvalidArgument("transport masses must be nonnegative");
  if (!(ma > 0.0) || std::abs(ma - mb) > 1e-10 * std::max(1.0, std::max(ma, mb)))
    throw MassMismatch("transport marginals have different masses", ma, mb);
  if (!(resolution > 0.0 && resolution < 1.0)) throw InvalidArgument("bad mass resolution");
  const auto total = static_cast<std::int64_t>(std::llround(1.0 / resolution));
  const auto ia = integerize(a, ma, total);
  const auto ib = integerize(b, mb, total);

  NetworkSimplex ns(ia, ib, cost);
  TransportPlan plan;
  plan.pivots = ns.run();
  const double unit = ma / static_cast<double>(total);
  const int m = static_cast<int>(b.size());
  for (int e = 0; e < ns.arc_count(); ++e) {
    const std::int64_t f = ns.flow(e);
    if (f == 0) continue;
    plan.cost += static_cast<double>(f) * unit * ns.cost(e);
    plan.flows.push_back({e / m, e % m, static_cast<double>(f) * unit});
  }
  return plan;
}

}  // namespace alignlab
