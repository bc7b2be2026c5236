#ifndef FCHEEGER_MAXFLOW_HPP
#define FCHEEGER_MAXFLOW_HPP

// Max-flow / min-cut with real capacities: highest-label push-relabel with
// the gap heuristic and periodic global relabeling. Arcs are stored in CSR
// form grouped by tail; every arc has a paired reverse arc.

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <ostream>
#include <vector>

#include "fcheeger/common.hpp"

namespace fcheeger {

class FlowNetwork {
 public:
  FlowNetwork(int node_count, int source, int sink)
      : n_(node_count), source_(source), sink_(sink) {
    require(node_count >= 2, "flow network needs at least two nodes");
    require(source >= 0 && source < n_ && sink >= 0 && sink < n_ && source != sink,
            "bad source/sink");
  }

  /// Directed arc u -> v; returns an arc handle.
  int add_arc(int u, int v, double cap) { return add(u, v, cap, 0.0, false); }

  /// Undirected edge: both directions carry `cap`.
  int add_edge(int u, int v, double cap) { return add(u, v, cap, cap, true); }

  /// Reserve room for `arcs` add_arc/add_edge calls.
  void reserve(std::size_t arcs) {
    tails_.reserve(arcs);
    heads_.reserve(arcs);
    fwd_.reserve(arcs);
    bwd_.reserve(arcs);
  }

  /// Builds the CSR arrays; later capacity changes go through set_capacity.
  void finalize() {
    if (finalized_) return;
    const std::size_t k = tails_.size();
    first_.assign(n_ + 1, 0);
    for (std::size_t e = 0; e < k; ++e) {
      ++first_[tails_[e] + 1];
      ++first_[heads_[e] + 1];
    }
    for (int v = 0; v < n_; ++v) first_[v + 1] += first_[v];
    std::vector<std::size_t> fill(first_.begin(), first_.end() - 1);
    head_.resize(2 * k);
    rev_.resize(2 * k);
    cap_.resize(2 * k);
    pos_.resize(k);
    for (std::size_t e = 0; e < k; ++e) {
      const std::size_t a = fill[tails_[e]]++;
      const std::size_t b = fill[heads_[e]]++;
      head_[a] = heads_[e];
      head_[b] = tails_[e];
      rev_[a] = b;
      rev_[b] = a;
      cap_[a] = fwd_[e];
      cap_[b] = bwd_[e];
      pos_[e] = a;
    }
    std::vector<int>().swap(tails_);
    std::vector<int>().swap(heads_);
    std::vector<double>().swap(fwd_);
    std::vector<double>().swap(bwd_);
    finalized_ = true;
  }

  /// Capacity of the forward direction of an arc handle. For an undirected
  /// edge both directions change.
  void set_capacity(int handle, double cap) {
    require(finalized_, "set_capacity needs a finalized network");
    require(cap >= 0.0 && std::isfinite(cap), "capacity must be finite and >= 0");
    const std::size_t a = pos_[handle];
    cap_[a] = cap;
    if (undirected_[handle]) cap_[rev_[a]] = cap;
  }

  int node_count() const { return n_; }
  int source() const { return source_; }
  int sink() const { return sink_; }
  std::size_t arc_count() const { return head_.size(); }
  std::size_t first(int v) const { return first_[v]; }
  std::size_t last(int v) const { return first_[v + 1]; }
  int head(std::size_t a) const { return head_[a]; }
  std::size_t rev(std::size_t a) const { return rev_[a]; }
  double capacity(std::size_t a) const { return cap_[a]; }
  /// CSR position of the forward arc of a handle.
  std::size_t arc_of(int handle) const { return pos_[handle]; }
  bool finalized() const { return finalized_; }

  /// DIMACS-like dump: "p max n m", "n id s|t", "a u v cap" (1-based ids).
  void write_dimacs(std::ostream& os) const {
    os << "p max " << n_ << ' ' << head_.size() << '\n';
    os << "n " << source_ + 1 << " s\n";
    os << "n " << sink_ + 1 << " t\n";
    for (int v = 0; v < n_; ++v)
      for (std::size_t a = first_[v]; a < first_[v + 1]; ++a)
        if (cap_[a] > 0.0) os << "a " << v + 1 << ' ' << head_[a] + 1 << ' ' << cap_[a] << '\n';
  }

 private:
  int add(int u, int v, double cf, double cb, bool undirected) {
    require(!finalized_, "network already finalized");
    require(u >= 0 && u < n_ && v >= 0 && v < n_ && u != v, "bad arc endpoints");
    require(cf >= 0.0 && cb >= 0.0 && std::isfinite(cf) && std::isfinite(cb),
            "capacity must be finite and >= 0");
    tails_.push_back(u);
    heads_.push_back(v);
    fwd_.push_back(cf);
    bwd_.push_back(cb);
    undirected_.push_back(undirected);
    return static_cast<int>(tails_.size()) - 1;
  }

  int n_, source_, sink_;
  bool finalized_ = false;
  std::vector<int> tails_, heads_;
  std::vector<double> fwd_, bwd_;
  std::vector<bool> undirected_;
  std::vector<std::size_t> first_;
  std::vector<int> head_;
  std::vector<std::size_t> rev_;
  std::vector<double> cap_;
  std::vector<std::size_t> pos_;
};

struct CutResult {
  double flow_value = 0.0;
  /// Per node: reachable from the source in the final residual graph.
  std::vector<std::uint8_t> source_side;
  /// Net flow per CSR arc; arc_flows[rev(a)] == -arc_flows[a].
  std::vector<double> arc_flows;
  /// Capacity of the cut (source_side, rest).
  double cut_capacity = 0.0;
  /// Largest |inflow - outflow| over non-terminal nodes.
  double conservation_error = 0.0;
};

namespace detail {

class PushRelabel {
 public:
  explicit PushRelabel(const FlowNetwork& net)
      : net_(net), n_(net.node_count()), s_(net.source()), t_(net.sink()) {}

  CutResult run(double residual_tol) {
    const std::size_t m = net_.arc_count();
    res_.resize(m);
    for (std::size_t a = 0; a < m; ++a) res_[a] = net_.capacity(a);
    excess_.assign(n_, 0.0);
    label_.assign(n_, 0);
    cur_.resize(n_);
    for (int v = 0; v < n_; ++v) cur_[v] = net_.first(v);
    buckets_.assign(2 * n_ + 1, {});
    count_.assign(2 * n_ + 1, 0);

    for (std::size_t a = net_.first(s_); a < net_.last(s_); ++a) {
      const double c = res_[a];
      if (c <= 0.0) continue;
      res_[a] = 0.0;
      res_[net_.rev(a)] += c;
      excess_[net_.head(a)] += c;
      excess_[s_] -= c;
    }
    global_relabel();
    const double relabel_period = static_cast<double>(m) + 6.0 * n_;
    double work = 0.0;
    while (highest_ >= 0) {
      if (buckets_[highest_].empty()) {
        --highest_;
        continue;
      }
      const int u = buckets_[highest_].back();
      buckets_[highest_].pop_back();
      if (label_[u] != highest_ || excess_[u] <= 0.0) continue;
      work += discharge(u);
      if (work > relabel_period) {
        global_relabel();
        work = 0.0;
      }
    }

    CutResult r;
    r.flow_value = excess_[t_];
    r.arc_flows.resize(m);
    for (std::size_t a = 0; a < m; ++a) r.arc_flows[a] = net_.capacity(a) - res_[a];
    r.source_side.assign(n_, 0);
    std::deque<int> q{s_};
    r.source_side[s_] = 1;
    while (!q.empty()) {
      const int u = q.front();
      q.pop_front();
      for (std::size_t a = net_.first(u); a < net_.last(u); ++a) {
        const int v = net_.head(a);
        if (!r.source_side[v] && res_[a] > residual_tol) {
          r.source_side[v] = 1;
          q.push_back(v);
        }
      }
    }
    std::vector<double> cut;
    for (int u = 0; u < n_; ++u) {
      if (!r.source_side[u]) continue;
      for (std::size_t a = net_.first(u); a < net_.last(u); ++a)
        if (!r.source_side[net_.head(a)]) cut.push_back(net_.capacity(a));
    }
    r.cut_capacity = pairwise_sum(cut);
    for (int u = 0; u < n_; ++u) {
      if (u == s_ || u == t_) continue;
      std::vector<double> f;
      for (std::size_t a = net_.first(u); a < net_.last(u); ++a) f.push_back(r.arc_flows[a]);
      r.conservation_error = std::max(r.conservation_error, std::abs(pairwise_sum(f)));
    }
    return r;
  }

 private:
  void activate(int v) {
    if (v == s_ || v == t_) return;
    buckets_[label_[v]].push_back(v);
    highest_ = std::max(highest_, label_[v]);
  }

  void set_label(int v, int d) {
    if (label_[v] < n_) --count_[label_[v]];
    label_[v] = d;
    if (d < n_) ++count_[d];
  }

  double discharge(int u) {
    double work = 0.0;
    while (excess_[u] > 0.0) {
      const std::size_t end = net_.last(u);
      std::size_t a = cur_[u];
      const int du = label_[u];
      for (; a < end; ++a) {
        if (res_[a] <= 0.0) continue;
        const int v = net_.head(a);
        if (label_[v] + 1 != du) continue;
        const double delta = std::min(excess_[u], res_[a]);
        res_[a] -= delta;
        res_[net_.rev(a)] += delta;
        excess_[u] -= delta;
        const bool was_idle = excess_[v] <= 0.0;
        excess_[v] += delta;
        if (was_idle && excess_[v] > 0.0) activate(v);
        if (excess_[u] <= 0.0) break;
      }
      cur_[u] = a;
      if (excess_[u] <= 0.0) break;

      // Relabel.
      const int old = label_[u];
      int best = 2 * n_;
      for (std::size_t b = net_.first(u); b < end; ++b)
        if (res_[b] > 0.0) best = std::min(best, label_[net_.head(b)] + 1);
      work += static_cast<double>(end - net_.first(u)) + 12.0;
      set_label(u, std::min(best, 2 * n_));
      cur_[u] = net_.first(u);
      if (old < n_ && count_[old] == 0) gap(old);
      if (label_[u] >= 2 * n_) break;
    }
    if (excess_[u] > 0.0 && label_[u] < 2 * n_) activate(u);
    return work;
  }

  /// No node is left at label k < n: everything above it cannot reach t.
  void gap(int k) {
    for (int v = 0; v < n_; ++v) {
      if (v == s_ || label_[v] <= k || label_[v] >= n_) continue;
      set_label(v, n_ + 1);
      cur_[v] = net_.first(v);
      if (excess_[v] > 0.0) activate(v);
    }
  }

  /// Exact distances: to t for nodes that reach it, else n + distance to s.
  void global_relabel() {
    std::fill(count_.begin(), count_.end(), 0);
    std::vector<int> d(n_, -1);
    auto bfs = [&](int root, int base) {
      std::deque<int> q{root};
      d[root] = base;
      while (!q.empty()) {
        const int v = q.front();
        q.pop_front();
        for (std::size_t a = net_.first(v); a < net_.last(v); ++a) {
          const int u = net_.head(a);
          // residual arc u -> v is the reverse of a
          if (d[u] < 0 && res_[net_.rev(a)] > 0.0) {
            d[u] = d[v] + 1;
            q.push_back(u);
          }
        }
      }
    };
    d[s_] = n_;
    bfs(t_, 0);
    bfs(s_, n_);
    for (auto& b : buckets_) b.clear();
    highest_ = -1;
    for (int v = 0; v < n_; ++v) {
      label_[v] = d[v] < 0 ? 2 * n_ : d[v];
      if (label_[v] < n_) ++count_[label_[v]];
      cur_[v] = net_.first(v);
      if (excess_[v] > 0.0 && label_[v] < 2 * n_) activate(v);
    }
  }

  const FlowNetwork& net_;
  int n_, s_, t_;
  std::vector<double> res_, excess_;
  std::vector<int> label_;
  std::vector<std::size_t> cur_;
  std::vector<std::vector<int>> buckets_;
  std::vector<int> count_;
  int highest_ = -1;
};

}  // namespace detail

/// Exact max flow. `residual_tol` is the residual capacity at or below which
/// an arc counts as saturated when extracting the cut.
inline CutResult solve_maxflow(FlowNetwork& net, double residual_tol = 0.0) {
  net.finalize();
  detail::PushRelabel solver(net);
  return solver.run(residual_tol);
}

}  // namespace fcheeger

#endif  // FCHEEGER_MAXFLOW_HPP
