#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace cfmimo {

struct Position {
  double x = 0.0;
  double y = 0.0;
};

// Shortest distance on a square torus of the given side length.
double torus_distance(const Position& a, const Position& b, double area_side);

// Closest-to-square factorization n = cols * rows with cols >= rows.
std::pair<int, int> grid_dims(int n);

struct GridTopologyParams {
  int num_rus = 0;      // radio units, placed on a regular grid
  int num_ues = 0;      // user equipments, uniform i.i.d.
  int num_routers = 0;  // fronthaul relay nodes
  int num_dus = 0;      // decentralized units
  double area_side = 0.0;
  int deg_ru_router = 1;  // nearest routers attached to each RU
  int deg_router_du = 1;  // nearest DUs attached to each router
  std::uint64_t rng_seed = 0;
};

// Three-layer fronthaul graph: RU-router, oriented router-router, router-DU.
struct NetworkTopology {
  double area_side = 0.0;
  std::vector<Position> ru_positions;
  std::vector<Position> ue_positions;
  int num_routers = 0;
  int num_dus = 0;
  std::vector<std::pair<int, int>> ru_router_edges;      // (ru, router)
  std::vector<std::pair<int, int>> router_router_edges;  // oriented (q, q')
  std::vector<std::pair<int, int>> router_du_edges;      // (router, du)
  std::vector<double> du_capacity;  // max hosted clusters per DU; empty = unbounded
  std::vector<Position> router_positions;
  std::vector<Position> du_positions;
  std::uint64_t rng_seed = 0;

  int num_rus() const { return static_cast<int>(ru_positions.size()); }
  int num_ues() const { return static_cast<int>(ue_positions.size()); }

  nlohmann::json to_json() const;
  static NetworkTopology from_json(const nlohmann::json& j);
};

NetworkTopology build_grid_topology(const GridTopologyParams& params);

// Returns one message per violated structural invariant; empty means valid.
std::vector<std::string> validate_topology(const NetworkTopology& topo);

}  // namespace cfmimo
