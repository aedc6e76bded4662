#include <doctest.h>

#include <nlohmann/json.hpp>

#include "cfmimo/rng.hpp"
#include "cfmimo/topology.hpp"

using namespace cfmimo;

TEST_SUITE("topology") {

TEST_CASE("torus distance wraps per axis") {
  CHECK(torus_distance({0, 0}, {190, 0}, 200) == doctest::Approx(10.0));
  CHECK(torus_distance({0, 0}, {100, 100}, 200) == doctest::Approx(100.0 * std::sqrt(2.0)));
  CHECK(torus_distance({10, 10}, {10, 10}, 200) == 0.0);
}

TEST_CASE("torus distance is a metric bounded by the half diagonal") {
  Rng rng(42);
  const double side = 150.0;
  for (int it = 0; it < 500; ++it) {
    const Position a{rng.uniform(0, side), rng.uniform(0, side)};
    const Position b{rng.uniform(0, side), rng.uniform(0, side)};
    const Position c{rng.uniform(0, side), rng.uniform(0, side)};
    const double ab = torus_distance(a, b, side);
    const double ba = torus_distance(b, a, side);
    CHECK(ab == doctest::Approx(ba));
    CHECK(ab <= side * std::sqrt(2.0) / 2.0 + 1e-12);
    CHECK(ab <= torus_distance(a, c, side) + torus_distance(c, b, side) + 1e-12);
  }
}

TEST_CASE("20 RUs land on a 5x4 grid with 40x50 m spacing") {
  GridTopologyParams p;
  p.num_rus = 20;
  p.num_ues = 5;
  p.num_routers = 5;
  p.num_dus = 4;
  p.area_side = 200.0;
  p.deg_ru_router = 2;
  p.deg_router_du = 2;
  p.rng_seed = 3;
  const NetworkTopology topo = build_grid_topology(p);

  CHECK(grid_dims(20) == std::pair<int, int>{5, 4});
  CHECK(topo.ru_positions[0].x == doctest::Approx(20.0));
  CHECK(topo.ru_positions[0].y == doctest::Approx(25.0));
  CHECK(topo.ru_positions[1].x - topo.ru_positions[0].x == doctest::Approx(40.0));
  CHECK(topo.ru_positions[5].y - topo.ru_positions[0].y == doctest::Approx(50.0));
  CHECK(validate_topology(topo).empty());
}

TEST_CASE("single router and DU force a star") {
  GridTopologyParams p;
  p.num_rus = 4;
  p.num_ues = 2;
  p.num_routers = 1;
  p.num_dus = 1;
  p.area_side = 100.0;
  p.rng_seed = 1;
  const NetworkTopology topo = build_grid_topology(p);
  CHECK(topo.ru_router_edges.size() == 4);
  for (const auto& [l, q] : topo.ru_router_edges) CHECK(q == 0);
  CHECK(topo.router_router_edges.empty());
  CHECK(topo.router_du_edges == std::vector<std::pair<int, int>>{{0, 0}});
  CHECK(validate_topology(topo).empty());
}

TEST_CASE("same seed reproduces the topology exactly") {
  GridTopologyParams p;
  p.num_rus = 6;
  p.num_ues = 9;
  p.num_routers = 5;
  p.num_dus = 4;
  p.area_side = 120.0;
  p.deg_ru_router = 2;
  p.deg_router_du = 2;
  p.rng_seed = 7;
  const NetworkTopology a = build_grid_topology(p);
  const NetworkTopology b = build_grid_topology(p);
  CHECK(a.ru_router_edges == b.ru_router_edges);
  CHECK(a.router_du_edges == b.router_du_edges);
  REQUIRE(a.ue_positions.size() == b.ue_positions.size());
  for (size_t i = 0; i < a.ue_positions.size(); ++i) {
    CHECK(a.ue_positions[i].x == b.ue_positions[i].x);
    CHECK(a.ue_positions[i].y == b.ue_positions[i].y);
  }
}

TEST_CASE("generated topologies always validate") {
  Rng rng(11);
  for (int it = 0; it < 30; ++it) {
    GridTopologyParams p;
    p.num_rus = 1 + static_cast<int>(rng.uniform_int(12));
    p.num_ues = static_cast<int>(rng.uniform_int(10));
    p.num_routers = 1 + static_cast<int>(rng.uniform_int(6));
    p.num_dus = 1 + static_cast<int>(rng.uniform_int(4));
    p.area_side = 50.0 + rng.uniform(0, 200);
    p.deg_ru_router = 1 + static_cast<int>(rng.uniform_int(p.num_routers));
    p.deg_router_du = 1 + static_cast<int>(rng.uniform_int(p.num_dus));
    p.rng_seed = rng.next_u64();
    const NetworkTopology topo = build_grid_topology(p);
    CHECK(validate_topology(topo).empty());
  }
}

TEST_CASE("violations are reported with the offending node") {
  NetworkTopology topo;
  topo.area_side = 100.0;
  topo.ru_positions = {{10, 10}, {20, 20}, {30, 30}, {40, 40}};
  topo.num_routers = 2;
  topo.num_dus = 3;
  topo.router_positions = {{25, 25}, {75, 75}};
  topo.du_positions = {{50, 10}, {50, 50}, {50, 90}};
  topo.ru_router_edges = {{0, 0}, {1, 0}, {2, 0}};  // RU 3 isolated
  topo.router_du_edges = {{0, 0}, {0, 1}};          // DU 2 isolated

  const auto bad = validate_topology(topo);
  auto has = [&](const std::string& needle) {
    for (const auto& m : bad)
      if (m.find(needle) != std::string::npos) return true;
    return false;
  };
  CHECK(has("isolated RU 3"));
  CHECK(has("isolated DU 2"));
}

TEST_CASE("unreachable DU shows up as a missing path") {
  // RU 0 only reaches router 0, which has no relay or DU link.
  NetworkTopology topo;
  topo.area_side = 100.0;
  topo.ru_positions = {{10, 10}};
  topo.num_routers = 2;
  topo.num_dus = 1;
  topo.router_positions = {{25, 25}, {75, 75}};
  topo.du_positions = {{90, 90}};
  topo.ru_router_edges = {{0, 0}};
  topo.router_du_edges = {{1, 0}};

  const auto bad = validate_topology(topo);
  bool found = false;
  for (const auto& m : bad)
    found = found || m.find("no RU->DU path from RU 0") != std::string::npos;
  CHECK(found);
}

TEST_CASE("errors on degenerate parameters") {
  GridTopologyParams p;
  p.num_rus = 4;
  p.num_ues = 1;
  p.num_routers = 2;
  p.num_dus = 1;
  p.area_side = 0.0;
  CHECK_THROWS_AS(build_grid_topology(p), std::invalid_argument);
  p.area_side = 100.0;
  p.deg_ru_router = 3;  // only 2 routers exist
  CHECK_THROWS_AS(build_grid_topology(p), std::invalid_argument);
}

TEST_CASE("json round trip preserves the topology") {
  GridTopologyParams p;
  p.num_rus = 6;
  p.num_ues = 4;
  p.num_routers = 3;
  p.num_dus = 2;
  p.area_side = 90.0;
  p.deg_ru_router = 2;
  p.deg_router_du = 1;
  p.rng_seed = 99;
  const NetworkTopology a = build_grid_topology(p);
  const NetworkTopology b = NetworkTopology::from_json(a.to_json());
  CHECK(a.ru_router_edges == b.ru_router_edges);
  CHECK(a.router_router_edges == b.router_router_edges);
  CHECK(a.router_du_edges == b.router_du_edges);
  CHECK(a.area_side == b.area_side);
  REQUIRE(a.ue_positions.size() == b.ue_positions.size());
  for (size_t i = 0; i < a.ue_positions.size(); ++i)
    CHECK(a.ue_positions[i].x == b.ue_positions[i].x);
}

}  // TEST_SUITE
