#include "herdsim/measures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "herdsim/kernels.hpp"

namespace herdsim {

namespace {

double pow_cost(double dist, double p) {
  if (p == 1.0) return dist;
  if (p == 2.0) return dist * dist;
  return std::pow(dist, p);
}

double euclidean(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double d = x[k] - y[k];
    s += d * d;
  }
  return std::sqrt(s);
}

void require_same_dim(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
  if (mu.dim() != nu.dim())
    throw std::invalid_argument("wasserstein: dimension mismatch (" +
                                std::to_string(mu.dim()) + " vs " +
                                std::to_string(nu.dim()) + ")");
}

}  // namespace

EmpiricalMeasure::EmpiricalMeasure(std::vector<double> coords, std::size_t dim,
                                   std::vector<double> weights)
    : coords_(std::move(coords)), dim_(dim), weights_(std::move(weights)) {
  if (dim_ < 1) throw std::invalid_argument("EmpiricalMeasure: dim must be >= 1");
  if (weights_.empty())
    throw std::invalid_argument("EmpiricalMeasure: empty support");
  if (coords_.size() != weights_.size() * dim_)
    throw std::invalid_argument(
        "EmpiricalMeasure: coords size does not match atoms * dim");
  double total = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0))
      throw std::invalid_argument("EmpiricalMeasure: negative weight");
    total += w;
  }
  if (!(total > 0.0))
    throw std::invalid_argument("EmpiricalMeasure: weights sum to zero");
  for (double& w : weights_) w /= total;
  for (double c : coords_)
    if (!std::isfinite(c))
      throw std::invalid_argument("EmpiricalMeasure: non-finite coordinate");
}

EmpiricalMeasure EmpiricalMeasure::uniform(std::vector<double> coords,
                                           std::size_t dim) {
  if (dim < 1 || coords.size() % dim != 0)
    throw std::invalid_argument("EmpiricalMeasure: bad coords/dim");
  const std::size_t n = coords.size() / dim;
  return EmpiricalMeasure(std::move(coords), dim,
                          std::vector<double>(n, 1.0 / double(n)));
}

EmpiricalMeasure EmpiricalMeasure::dirac(std::vector<double> x) {
  const std::size_t d = x.size();
  return EmpiricalMeasure(std::move(x), d, {1.0});
}

bool EmpiricalMeasure::uniform_weights(double tol) const {
  const double w0 = 1.0 / double(size());
  for (double w : weights_)
    if (std::abs(w - w0) > tol) return false;
  return true;
}

void EmpiricalMeasure::write_csv(std::ostream& os) const {
  os << "weight";
  for (std::size_t k = 0; k < dim_; ++k) os << ",x" << (k + 1);
  os << "\n";
  char buf[32];
  for (std::size_t i = 0; i < size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", weights_[i]);
    os << buf;
    for (std::size_t k = 0; k < dim_; ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", coords_[i * dim_ + k]);
      os << ',' << buf;
    }
    os << "\n";
  }
}

EmpiricalMeasure EmpiricalMeasure::read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line))
    throw std::invalid_argument("EmpiricalMeasure: empty CSV");
  std::size_t dim = std::count(line.begin(), line.end(), ',');
  if (dim < 1) throw std::invalid_argument("EmpiricalMeasure: bad CSV header");
  std::vector<double> coords, weights;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string field;
    std::vector<double> vals;
    while (std::getline(row, field, ',')) vals.push_back(std::stod(field));
    if (vals.size() != dim + 1)
      throw std::invalid_argument("EmpiricalMeasure: ragged CSV row");
    weights.push_back(vals[0]);
    coords.insert(coords.end(), vals.begin() + 1, vals.end());
  }
  return EmpiricalMeasure(std::move(coords), dim, std::move(weights));
}

MomentOrder::MomentOrder(double p_) : p(p_) {
  if (!(p > 1.0))
    throw std::invalid_argument("MomentOrder: p must be > 1, got " +
                                std::to_string(p_));
}

double moment(const EmpiricalMeasure& mu, MomentOrder p) {
  double s = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    auto pt = mu.point(i);
    double r2 = 0.0;
    for (double c : pt) r2 += c * c;
    s += mu.weight(i) * std::pow(std::sqrt(r2), p.p);
  }
  return std::pow(s, 1.0 / p.p);
}

std::vector<double> convolve(const KernelSpec& kernel,
                             const EmpiricalMeasure& mu,
                             std::span<const double> x) {
  if (kernel.dim() != static_cast<int>(mu.dim()) || x.size() != mu.dim())
    throw std::invalid_argument("convolve: dimension mismatch");
  const std::size_t d = mu.dim();
  std::vector<double> acc(d, 0.0), arg(d), val(d);
  for (std::size_t i = 0; i < mu.size(); ++i) {
    auto pt = mu.point(i);
    for (std::size_t k = 0; k < d; ++k) arg[k] = pt[k] - x[k];
    kernel.eval(arg, val);
    const double w = mu.weight(i);
    for (std::size_t k = 0; k < d; ++k) acc[k] += w * val[k];
  }
  return acc;
}

namespace detail {

double wasserstein_sorted1d(const EmpiricalMeasure& mu,
                            const EmpiricalMeasure& nu, double p) {
  std::vector<std::size_t> ia(mu.size()), ib(nu.size());
  std::iota(ia.begin(), ia.end(), 0);
  std::iota(ib.begin(), ib.end(), 0);
  std::sort(ia.begin(), ia.end(), [&](std::size_t a, std::size_t b) {
    return mu.point(a)[0] < mu.point(b)[0];
  });
  std::sort(ib.begin(), ib.end(), [&](std::size_t a, std::size_t b) {
    return nu.point(a)[0] < nu.point(b)[0];
  });
  // walk the common quantile levels
  std::size_t i = 0, j = 0;
  double rem_i = mu.weight(ia[0]), rem_j = nu.weight(ib[0]);
  double cost = 0.0;
  while (true) {
    const double delta = std::min(rem_i, rem_j);
    cost += delta * pow_cost(std::abs(mu.point(ia[i])[0] - nu.point(ib[j])[0]), p);
    rem_i -= delta;
    rem_j -= delta;
    if (rem_i <= 0.0) {
      if (++i >= mu.size()) break;
      rem_i = mu.weight(ia[i]);
    }
    if (rem_j <= 0.0) {
      if (++j >= nu.size()) break;
      rem_j = nu.weight(ib[j]);
    }
  }
  return p == 1.0 ? cost : std::pow(cost, 1.0 / p);
}

// Hungarian algorithm with potentials, shortest augmenting paths. Exact for
// the equal-size uniform-weight case: W_p^p = (1/n) min-cost assignment.
double wasserstein_assignment(const EmpiricalMeasure& mu,
                              const EmpiricalMeasure& nu, double p) {
  const std::size_t n = mu.size();
  if (nu.size() != n)
    throw std::invalid_argument("wasserstein_assignment: unequal sizes");
  std::vector<double> cost(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      cost[i * n + j] = pow_cost(euclidean(mu.point(i), nu.point(j)), p);

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
  std::vector<bool> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), false);
    do {
      used[j0] = true;
      const std::size_t i0 = match[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  double total = 0.0;
  for (std::size_t j = 1; j <= n; ++j)
    total += cost[(match[j] - 1) * n + (j - 1)];
  total /= double(n);
  return p == 1.0 ? total : std::pow(total, 1.0 / p);
}

// Transportation simplex on the dense bipartite graph, tree-structured basis
// with u-v potentials. Dantzig pricing with a Bland fallback against cycling
// on degenerate instances.
class TransportSimplex {
 public:
  TransportSimplex(std::vector<double> supply, std::vector<double> demand,
                   std::vector<double> cost)
      : a_(std::move(supply)),
        b_(std::move(demand)),
        c_(std::move(cost)),
        ns_(a_.size()),
        nt_(b_.size()) {}

  double solve() {
    northwest_init();
    const std::size_t dantzig_limit = 64 * (ns_ + nt_);
    const std::size_t hard_limit = 4000 * (ns_ + nt_) + 100000;
    for (std::size_t iter = 0;; ++iter) {
      if (iter > hard_limit)
        throw std::runtime_error("transport simplex failed to terminate");
      compute_potentials();
      auto [ei, ej] = find_entering(iter >= dantzig_limit);
      if (ei == ns_) break;  // optimal
      pivot(ei, ej);
    }
    double total = 0.0;
    for (const auto& cell : basis_)
      total += cell.flow * c_[cell.i * nt_ + cell.j];
    return total;
  }

 private:
  struct Cell {
    std::size_t i, j;
    double flow;
  };

  void northwest_init() {
    basis_.reserve(ns_ + nt_ - 1);
    std::size_t i = 0, j = 0;
    double ra = a_[0], rb = b_[0];
    while (true) {
      const double f = std::min(ra, rb);
      basis_.push_back({i, j, f});
      ra -= f;
      rb -= f;
      if (i + 1 == ns_ && j + 1 == nt_) break;
      // advance exactly one side per step so the basis stays a tree with
      // ns + nt - 1 cells (zero-flow cells appear on ties)
      if (ra <= rb && i + 1 < ns_) {
        ++i;
        ra = a_[i];
      } else if (j + 1 < nt_) {
        ++j;
        rb = b_[j];
      } else {  // rounding left excess supply against the last column
        ++i;
        ra = a_[i];
      }
    }
    rebuild_adjacency();
  }

  void rebuild_adjacency() {
    row_cells_.assign(ns_, {});
    col_cells_.assign(nt_, {});
    for (std::size_t k = 0; k < basis_.size(); ++k) {
      row_cells_[basis_[k].i].push_back(k);
      col_cells_[basis_[k].j].push_back(k);
    }
  }

  // nodes: rows 0..ns-1, cols ns..ns+nt-1; basis is a spanning tree
  void compute_potentials() {
    u_.assign(ns_, 0.0);
    v_.assign(nt_, 0.0);
    std::vector<char> seen(ns_ + nt_, 0);
    std::vector<std::size_t> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      const std::size_t node = stack.back();
      stack.pop_back();
      if (node < ns_) {
        for (std::size_t k : row_cells_[node]) {
          const std::size_t other = ns_ + basis_[k].j;
          if (!seen[other]) {
            seen[other] = 1;
            v_[basis_[k].j] = c_[basis_[k].i * nt_ + basis_[k].j] - u_[node];
            stack.push_back(other);
          }
        }
      } else {
        const std::size_t j = node - ns_;
        for (std::size_t k : col_cells_[j]) {
          const std::size_t other = basis_[k].i;
          if (!seen[other]) {
            seen[other] = 1;
            u_[other] = c_[basis_[k].i * nt_ + j] - v_[j];
            stack.push_back(other);
          }
        }
      }
    }
  }

  std::pair<std::size_t, std::size_t> find_entering(bool bland) const {
    const double tol = 1e-12 * (1.0 + cost_scale());
    double best = -tol;
    std::size_t bi = ns_, bj = nt_;
    for (std::size_t i = 0; i < ns_; ++i) {
      for (std::size_t j = 0; j < nt_; ++j) {
        const double rc = c_[i * nt_ + j] - u_[i] - v_[j];
        if (rc < -tol) {
          if (bland) return {i, j};
          if (rc < best) {
            best = rc;
            bi = i;
            bj = j;
          }
        }
      }
    }
    return {bi, bj};
  }

  double cost_scale() const {
    double m = 0.0;
    for (double c : c_) m = std::max(m, std::abs(c));
    return m;
  }

  void pivot(std::size_t ei, std::size_t ej) {
    // unique tree path from row-node ei to col-node ns+ej
    const std::size_t n_nodes = ns_ + nt_;
    std::vector<std::size_t> parent_cell(n_nodes, SIZE_MAX);
    std::vector<std::size_t> parent_node(n_nodes, SIZE_MAX);
    std::vector<char> seen(n_nodes, 0);
    std::vector<std::size_t> stack{ei};
    seen[ei] = 1;
    while (!stack.empty()) {
      const std::size_t node = stack.back();
      stack.pop_back();
      if (node == ns_ + ej) break;
      const auto& cells = node < ns_ ? row_cells_[node] : col_cells_[node - ns_];
      for (std::size_t k : cells) {
        const std::size_t other =
            node < ns_ ? ns_ + basis_[k].j : basis_[k].i;
        if (!seen[other]) {
          seen[other] = 1;
          parent_cell[other] = k;
          parent_node[other] = node;
          stack.push_back(other);
        }
      }
    }
    // walk back from ns+ej to ei; cells alternate -,+,-,... starting with -
    std::vector<std::size_t> cycle;
    for (std::size_t node = ns_ + ej; node != ei; node = parent_node[node])
      cycle.push_back(parent_cell[node]);
    double theta = std::numeric_limits<double>::infinity();
    std::size_t leave_pos = SIZE_MAX;
    for (std::size_t q = 0; q < cycle.size(); q += 2) {
      const double f = basis_[cycle[q]].flow;
      if (f < theta || (f == theta && cycle[q] < cycle[leave_pos])) {
        theta = f;
        leave_pos = q;
      }
    }
    for (std::size_t q = 0; q < cycle.size(); ++q)
      basis_[cycle[q]].flow += (q % 2 == 0) ? -theta : theta;
    basis_[cycle[leave_pos]] = {ei, ej, theta};
    rebuild_adjacency();
  }

  std::vector<double> a_, b_, c_;
  std::size_t ns_, nt_;
  std::vector<Cell> basis_;
  std::vector<std::vector<std::size_t>> row_cells_, col_cells_;
  std::vector<double> u_, v_;
};

double wasserstein_lp(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                      double p) {
  const std::size_t ns = mu.size(), nt = nu.size();
  std::vector<double> cost(ns * nt);
  for (std::size_t i = 0; i < ns; ++i)
    for (std::size_t j = 0; j < nt; ++j)
      cost[i * nt + j] = pow_cost(euclidean(mu.point(i), nu.point(j)), p);
  TransportSimplex simplex(mu.weights(), nu.weights(), std::move(cost));
  const double total = simplex.solve();
  return p == 1.0 ? std::max(total, 0.0)
                  : std::pow(std::max(total, 0.0), 1.0 / p);
}

}  // namespace detail

namespace {

// canonical argument order makes d >= 2 distances exactly symmetric
bool measure_less(const EmpiricalMeasure& a, const EmpiricalMeasure& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  if (a.coords() != b.coords()) return a.coords() < b.coords();
  return a.weights() < b.weights();
}

double wasserstein_impl(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                        double p, std::size_t lp_cap) {
  require_same_dim(mu, nu);
  if (mu.dim() == 1) return detail::wasserstein_sorted1d(mu, nu, p);
  if (mu.size() > lp_cap || nu.size() > lp_cap)
    throw std::invalid_argument(
        "wasserstein: support size exceeds the exact-transport cap (" +
        std::to_string(lp_cap) + " atoms); subsample the measures first");
  const EmpiricalMeasure& first = measure_less(nu, mu) ? nu : mu;
  const EmpiricalMeasure& second = measure_less(nu, mu) ? mu : nu;
  if (first.size() == second.size() && first.uniform_weights() &&
      second.uniform_weights())
    return detail::wasserstein_assignment(first, second, p);
  return detail::wasserstein_lp(first, second, p);
}

}  // namespace

double wasserstein1(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                    std::size_t lp_cap) {
  return wasserstein_impl(mu, nu, 1.0, lp_cap);
}

double wasserstein_p(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                     MomentOrder p, std::size_t lp_cap) {
  return wasserstein_impl(mu, nu, p.p, lp_cap);
}

}  // namespace herdsim
