#include "cfmimo/topology.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "cfmimo/rng.hpp"

namespace cfmimo {

double torus_distance(const Position& a, const Position& b, double area_side) {
  double dx = std::fabs(a.x - b.x);
  double dy = std::fabs(a.y - b.y);
  dx = std::min(dx, area_side - dx);
  dy = std::min(dy, area_side - dy);
  return std::hypot(dx, dy);
}

std::pair<int, int> grid_dims(int n) {
  if (n <= 0) throw std::invalid_argument("grid_dims: n must be positive");
  for (int d = static_cast<int>(std::sqrt(static_cast<double>(n))); d >= 1; --d) {
    if (n % d == 0) return {n / d, d};
  }
  return {n, 1};
}

namespace {

std::vector<Position> grid_positions(int n, double side) {
  const auto [cols, rows] = grid_dims(n);
  std::vector<Position> out;
  out.reserve(n);
  const double cw = side / cols;
  const double ch = side / rows;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      out.push_back({(c + 0.5) * cw, (r + 0.5) * ch});
  return out;
}

// Indices of the k nearest targets under torus distance, ties by index.
std::vector<int> nearest(const Position& from, const std::vector<Position>& to,
                         int k, double side) {
  std::vector<std::pair<double, int>> d;
  d.reserve(to.size());
  for (int i = 0; i < static_cast<int>(to.size()); ++i)
    d.emplace_back(torus_distance(from, to[i], side), i);
  std::stable_sort(d.begin(), d.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<int> out;
  for (int i = 0; i < k && i < static_cast<int>(d.size()); ++i) out.push_back(d[i].second);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

NetworkTopology build_grid_topology(const GridTopologyParams& p) {
  if (p.area_side <= 0.0) throw std::invalid_argument("build_grid_topology: zero-sized area");
  if (p.num_rus <= 0 || p.num_ues < 0 || p.num_routers <= 0 || p.num_dus <= 0)
    throw std::invalid_argument("build_grid_topology: node counts must be positive");
  if (p.deg_ru_router < 1 || p.deg_router_du < 1)
    throw std::invalid_argument("build_grid_topology: connectivity degrees must be >= 1");
  if (p.deg_ru_router > p.num_routers)
    throw std::invalid_argument("build_grid_topology: deg_ru_router exceeds router count");
  if (p.deg_router_du > p.num_dus)
    throw std::invalid_argument("build_grid_topology: deg_router_du exceeds DU count");

  NetworkTopology topo;
  topo.area_side = p.area_side;
  topo.num_routers = p.num_routers;
  topo.num_dus = p.num_dus;
  topo.rng_seed = p.rng_seed;

  topo.ru_positions = grid_positions(p.num_rus, p.area_side);
  topo.router_positions = grid_positions(p.num_routers, p.area_side);
  topo.du_positions = grid_positions(p.num_dus, p.area_side);

  Rng rng = Rng::substream(p.rng_seed, {0x746f706fULL});  // topology stream
  topo.ue_positions.reserve(p.num_ues);
  for (int k = 0; k < p.num_ues; ++k) {
    const double x = rng.uniform(0.0, p.area_side);
    const double y = rng.uniform(0.0, p.area_side);
    topo.ue_positions.push_back({x, y});
  }

  for (int l = 0; l < p.num_rus; ++l)
    for (int q : nearest(topo.ru_positions[l], topo.router_positions, p.deg_ru_router, p.area_side))
      topo.ru_router_edges.emplace_back(l, q);

  // Bidirectional ring over the routers.
  if (p.num_routers > 1) {
    for (int q = 0; q < p.num_routers; ++q) {
      const int nxt = (q + 1) % p.num_routers;
      topo.router_router_edges.emplace_back(q, nxt);
      topo.router_router_edges.emplace_back(nxt, q);
    }
    std::sort(topo.router_router_edges.begin(), topo.router_router_edges.end());
    topo.router_router_edges.erase(
        std::unique(topo.router_router_edges.begin(), topo.router_router_edges.end()),
        topo.router_router_edges.end());
  }

  for (int q = 0; q < p.num_routers; ++q)
    for (int n : nearest(topo.router_positions[q], topo.du_positions, p.deg_router_du, p.area_side))
      topo.router_du_edges.emplace_back(q, n);

  // A DU left without any incident router gets its nearest router attached,
  // so every generated topology is usable as-is.
  std::vector<char> du_covered(p.num_dus, 0);
  for (const auto& [q, n] : topo.router_du_edges) du_covered[n] = 1;
  for (int n = 0; n < p.num_dus; ++n) {
    if (!du_covered[n]) {
      const int q = nearest(topo.du_positions[n], topo.router_positions, 1, p.area_side).front();
      topo.router_du_edges.emplace_back(q, n);
    }
  }
  std::sort(topo.router_du_edges.begin(), topo.router_du_edges.end());

  return topo;
}

std::vector<std::string> validate_topology(const NetworkTopology& topo) {
  std::vector<std::string> bad;
  const int L = topo.num_rus();
  const int Q = topo.num_routers;
  const int N = topo.num_dus;

  auto in_area = [&](const Position& pos) {
    return pos.x >= 0.0 && pos.x < topo.area_side && pos.y >= 0.0 && pos.y < topo.area_side;
  };
  for (int l = 0; l < L; ++l)
    if (!in_area(topo.ru_positions[l])) bad.push_back("RU " + std::to_string(l) + " outside area");
  for (int k = 0; k < topo.num_ues(); ++k)
    if (!in_area(topo.ue_positions[k])) bad.push_back("UE " + std::to_string(k) + " outside area");

  for (const auto& [l, q] : topo.ru_router_edges)
    if (l < 0 || l >= L || q < 0 || q >= Q)
      bad.push_back("ru_router edge (" + std::to_string(l) + "," + std::to_string(q) + ") out of range");
  for (const auto& [q, qq] : topo.router_router_edges) {
    if (q < 0 || q >= Q || qq < 0 || qq >= Q)
      bad.push_back("router_router edge (" + std::to_string(q) + "," + std::to_string(qq) + ") out of range");
    else if (q == qq)
      bad.push_back("router_router self-loop at " + std::to_string(q));
  }
  for (const auto& [q, n] : topo.router_du_edges)
    if (q < 0 || q >= Q || n < 0 || n >= N)
      bad.push_back("router_du edge (" + std::to_string(q) + "," + std::to_string(n) + ") out of range");

  std::vector<char> ru_has_edge(L, 0), du_has_edge(N, 0);
  for (const auto& [l, q] : topo.ru_router_edges)
    if (l >= 0 && l < L) ru_has_edge[l] = 1;
  for (const auto& [q, n] : topo.router_du_edges)
    if (n >= 0 && n < N) du_has_edge[n] = 1;
  for (int l = 0; l < L; ++l)
    if (!ru_has_edge[l]) bad.push_back("isolated RU " + std::to_string(l));
  for (int n = 0; n < N; ++n)
    if (!du_has_edge[n]) bad.push_back("isolated DU " + std::to_string(n));

  // Each RU must reach at least one DU going RU -> router(s) -> DU.
  std::vector<std::vector<int>> router_out(Q);
  for (const auto& [q, qq] : topo.router_router_edges)
    if (q >= 0 && q < Q && qq >= 0 && qq < Q) router_out[q].push_back(qq);
  std::vector<char> router_to_du(Q, 0);
  for (const auto& [q, n] : topo.router_du_edges)
    if (q >= 0 && q < Q && n >= 0 && n < N) router_to_du[q] = 1;
  for (int l = 0; l < L; ++l) {
    std::vector<char> seen(Q, 0);
    std::queue<int> frontier;
    for (const auto& [rl, q] : topo.ru_router_edges)
      if (rl == l && q >= 0 && q < Q && !seen[q]) {
        seen[q] = 1;
        frontier.push(q);
      }
    bool reached = false;
    while (!frontier.empty() && !reached) {
      const int q = frontier.front();
      frontier.pop();
      if (router_to_du[q]) {
        reached = true;
        break;
      }
      for (int qq : router_out[q])
        if (!seen[qq]) {
          seen[qq] = 1;
          frontier.push(qq);
        }
    }
    if (!reached && ru_has_edge[l]) bad.push_back("no RU->DU path from RU " + std::to_string(l));
  }

  return bad;
}

namespace {

nlohmann::json positions_to_json(const std::vector<Position>& ps) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& p : ps) arr.push_back({p.x, p.y});
  return arr;
}

std::vector<Position> positions_from_json(const nlohmann::json& arr) {
  std::vector<Position> out;
  for (const auto& p : arr) out.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  return out;
}

nlohmann::json edges_to_json(const std::vector<std::pair<int, int>>& es) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& [a, b] : es) arr.push_back({a, b});
  return arr;
}

std::vector<std::pair<int, int>> edges_from_json(const nlohmann::json& arr) {
  std::vector<std::pair<int, int>> out;
  for (const auto& e : arr) out.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
  return out;
}

}  // namespace

nlohmann::json NetworkTopology::to_json() const {
  nlohmann::json j;
  j["area_side"] = area_side;
  j["ru_grid"] = positions_to_json(ru_positions);
  j["ue_positions"] = positions_to_json(ue_positions);
  j["router_positions"] = positions_to_json(router_positions);
  j["du_positions"] = positions_to_json(du_positions);
  j["num_routers"] = num_routers;
  j["num_dus"] = num_dus;
  j["ru_router_edges"] = edges_to_json(ru_router_edges);
  j["router_router_edges"] = edges_to_json(router_router_edges);
  j["router_du_edges"] = edges_to_json(router_du_edges);
  j["du_capacity"] = du_capacity;
  j["rng_seed"] = rng_seed;
  return j;
}

NetworkTopology NetworkTopology::from_json(const nlohmann::json& j) {
  NetworkTopology t;
  t.area_side = j.at("area_side").get<double>();
  t.ru_positions = positions_from_json(j.at("ru_grid"));
  t.ue_positions = positions_from_json(j.at("ue_positions"));
  if (j.contains("router_positions")) t.router_positions = positions_from_json(j.at("router_positions"));
  if (j.contains("du_positions")) t.du_positions = positions_from_json(j.at("du_positions"));
  t.num_routers = j.at("num_routers").get<int>();
  t.num_dus = j.at("num_dus").get<int>();
  t.ru_router_edges = edges_from_json(j.at("ru_router_edges"));
  t.router_router_edges = edges_from_json(j.at("router_router_edges"));
  t.router_du_edges = edges_from_json(j.at("router_du_edges"));
  if (j.contains("du_capacity")) t.du_capacity = j.at("du_capacity").get<std::vector<double>>();
  if (j.contains("rng_seed")) t.rng_seed = j.at("rng_seed").get<std::uint64_t>();
  return t;
}

}  // namespace cfmimo
