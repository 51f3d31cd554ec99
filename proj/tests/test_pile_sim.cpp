#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include <nlohmann/json.hpp>

#include "snpick/pile_sim.hpp"
#include "snpick/rng.hpp"

using snpick::DepthMap;
using snpick::EntanglementEdge;
using snpick::Particle;
using snpick::ParticleKind;
using snpick::PickOutcome;
using snpick::PickParams;
using snpick::PileParams;
using snpick::PileState;
using snpick::Segment;
using snpick::Strategy;

namespace {

PileParams h2_params(double l_mm, std::uint64_t seed) {
  PileParams p;
  p.n = 60;
  p.d_mm = 12.0;
  p.l_mm = l_mm;
  p.area_w_mm = 128.0;
  p.area_h_mm = 106.0;
  p.unit_mass_g = 1.0;
  p.alpha = 0.05;
  p.seed = seed;
  return p;
}

Particle make_staple(std::uint64_t id, double x, double y, double phi,
                     double d = 12.0, double l = 0.0) {
  Particle p;
  p.id = id;
  p.x_mm = x;
  p.y_mm = y;
  p.phi_deg = phi;
  p.kind = ParticleKind::staple;
  p.crown_width_d_mm = d;
  p.protrusion_length_l_mm = l;
  p.unit_mass_g = 1.0;
  return p;
}

// independent of the renderer: distance to every wire of every particle
double reference_height(const PileState& s, int px, int py, double scale) {
  const double mx = (px + 0.5) * scale;
  const double my = (py + 0.5) * scale;
  double best = 0.0;
  for (const Particle& p : s.particles) {
    for (const Segment& seg : snpick::footprint(p, s.rng_seed)) {
      const double vx = seg.x1 - seg.x0;
      const double vy = seg.y1 - seg.y0;
      const double len_sq = vx * vx + vy * vy;
      double t = 0.0;
      if (len_sq > 0.0)
        t = std::clamp(((mx - seg.x0) * vx + (my - seg.y0) * vy) / len_sq, 0.0, 1.0);
      const double dx = mx - (seg.x0 + t * vx);
      const double dy = my - (seg.y0 + t * vy);
      if (std::sqrt(dx * dx + dy * dy) <= s.params.wire_width_mm / 2.0)
        best = std::max(best, (p.layer + 1) * s.params.particle_thickness_mm);
    }
  }
  return best;
}

}  // namespace

TEST_CASE("an empty pile renders flat and picks nothing", "[pile]") {
  PileParams prm;
  prm.n = 0;
  const PileState empty = snpick::generate_pile(prm);
  CHECK(empty.particles.empty());
  CHECK(empty.edges.empty());
  CHECK(empty.total_mass() == 0.0);

  const DepthMap d = snpick::render_depth(empty, 2.0);
  for (std::size_t i = 0; i < d.heights().size(); ++i)
    CHECK(d.heights()[i] == 0.0);

  PileState p = empty;
  PickParams pick;
  pick.x_mm = 150.0;
  pick.y_mm = 125.0;
  const PickOutcome out = snpick::simulate_pick(p, pick, false, 5, Strategy::FP);
  CHECK(out.picked_ids.empty());
  CHECK(out.picked_mass_g == 0.0);

  const PileState still_empty = snpick::reset_pile(empty, 77);
  CHECK(still_empty.particles.empty());
}

TEST_CASE("no protrusions means no entanglement", "[pile]") {
  const PileState flat = snpick::generate_pile(h2_params(0.0, 3));
  CHECK(flat.particles.size() == 60);
  CHECK(flat.edges.empty());

  const PileState hooked = snpick::generate_pile(h2_params(10.0, 3));
  CHECK_FALSE(hooked.edges.empty());
  const double expected = std::min(1.0, 0.05 * 10.0 / 12.0);
  for (const EntanglementEdge& e : hooked.edges) {
    CHECK(e.a < e.b);
    CHECK(e.strength == expected);
  }
}

TEST_CASE("generation is deterministic per seed", "[pile]") {
  const PileState a = snpick::generate_pile(h2_params(10.0, 7));
  const PileState b = snpick::generate_pile(h2_params(10.0, 7));
  const nlohmann::json ja = a, jb = b;
  CHECK(ja.dump() == jb.dump());

  const PileState c = snpick::generate_pile(h2_params(10.0, 8));
  bool any_differs = false;
  for (std::size_t i = 0; i < a.particles.size(); ++i)
    if (a.particles[i].x_mm != c.particles[i].x_mm) any_differs = true;
  CHECK(any_differs);
}

TEST_CASE("staple and strand wire paths have the advertised shape", "[pile]") {
  const Particle st = make_staple(0, 50.0, 50.0, 0.0, 12.0, 8.0);
  const auto segs = snpick::footprint(st, 1234);
  REQUIRE(segs.size() == 3);
  CHECK_THAT(segs[0].x0, Catch::Matchers::WithinAbs(44.0, 1e-12));
  CHECK_THAT(segs[0].x1, Catch::Matchers::WithinAbs(56.0, 1e-12));
  CHECK_THAT(segs[0].y0, Catch::Matchers::WithinAbs(50.0, 1e-12));
  // both protrusions bend the same way, perpendicular to the crown
  CHECK_THAT(segs[1].x1, Catch::Matchers::WithinAbs(44.0, 1e-12));
  CHECK_THAT(segs[1].y1, Catch::Matchers::WithinAbs(58.0, 1e-12));
  CHECK_THAT(segs[2].x1, Catch::Matchers::WithinAbs(56.0, 1e-12));
  CHECK_THAT(segs[2].y1, Catch::Matchers::WithinAbs(58.0, 1e-12));

  const Particle bare = make_staple(1, 50.0, 50.0, 0.0, 12.0, 0.0);
  CHECK(snpick::footprint(bare, 1234).size() == 1);

  Particle str = st;
  str.kind = ParticleKind::strand;
  const auto wild = snpick::footprint(str, 1234);
  REQUIRE(wild.size() == 3);
  for (int i = 1; i < 3; ++i) {
    const double len = std::hypot(wild[i].x1 - wild[i].x0, wild[i].y1 - wild[i].y0);
    CHECK_THAT(len, Catch::Matchers::WithinAbs(8.0, 1e-12));
  }
  // legs re-kink only when the pile is reshaken (seed change)
  const auto again = snpick::footprint(str, 1234);
  CHECK(wild[1].x1 == again[1].x1);
  const auto other = snpick::footprint(str, 4321);
  CHECK(wild[1].x1 != other[1].x1);
}

TEST_CASE("a single flat particle renders at one thickness", "[pile]") {
  PileState s;
  s.params.wire_width_mm = 1.5;
  s.params.particle_thickness_mm = 2.0;
  s.params.area_w_mm = 100.0;
  s.params.area_h_mm = 80.0;
  s.particles.push_back(make_staple(0, 50.0, 40.0, 0.0, 12.0, 8.0));

  const DepthMap d = snpick::render_depth(s, 1.0);
  CHECK(d.width() == 100);
  CHECK(d.height() == 80);
  int covered = 0;
  for (int y = 0; y < d.height(); ++y)
    for (int x = 0; x < d.width(); ++x) {
      CHECK(d.at(x, y) == reference_height(s, x, y, 1.0));
      if (d.at(x, y) > 0.0) {
        CHECK(d.at(x, y) == 2.0);
        ++covered;
      }
    }
  CHECK(covered > 0);
}

TEST_CASE("stacked particles render at stacked heights", "[pile]") {
  PileState s;
  s.params.area_w_mm = 60.0;
  s.params.area_h_mm = 60.0;
  s.particles.push_back(make_staple(0, 30.0, 30.0, 0.0));
  s.particles.push_back(make_staple(1, 30.0, 30.0, 90.0));
  snpick::settle_layers(s);
  CHECK(s.particles[0].layer == 0);
  CHECK(s.particles[1].layer == 1);

  const DepthMap d = snpick::render_depth(s, 1.0);
  // the crossing point carries the upper particle's height
  CHECK(d.at(30, 30) == 4.0);
  bool saw_low = false;
  for (int x = 0; x < d.width(); ++x)
    if (d.at(x, 30) == 2.0) saw_low = true;
  CHECK(saw_low);
  for (int y = 0; y < d.height(); ++y)
    for (int x = 0; x < d.width(); ++x)
      CHECK(d.at(x, y) == reference_height(s, x, y, 1.0));
}

TEST_CASE("drop order stacks later arrivals on top", "[pile]") {
  const PileState s = snpick::generate_pile(h2_params(8.0, 11));
  std::vector<std::vector<Segment>> fps;
  for (const Particle& p : s.particles) fps.push_back(snpick::footprint(p, s.rng_seed));
  for (std::size_t j = 0; j < s.particles.size(); ++j) {
    bool touches_earlier = false;
    for (std::size_t i = 0; i < j; ++i) {
      double best = 1e300;
      for (const Segment& a : fps[i])
        for (const Segment& b : fps[j]) {
          // endpoint-based bound is enough to witness contact
          best = std::min({best,
                           std::hypot(a.x0 - b.x0, a.y0 - b.y0),
                           std::hypot(a.x1 - b.x1, a.y1 - b.y1)});
        }
      if (best <= s.params.wire_width_mm) {
        touches_earlier = true;
        CHECK(s.particles[j].layer >= s.particles[i].layer + 1);
      }
    }
    if (!touches_earlier) CHECK(s.particles[j].layer >= 0);
  }
  int max_layer = 0;
  for (const Particle& p : s.particles) max_layer = std::max(max_layer, p.layer);
  CHECK(max_layer >= 1);  // a 60-staple pile in this area must stack somewhere
}

TEST_CASE("entanglement edges appear exactly within hooking range", "[pile]") {
  PileState s;
  s.params.d_mm = 12.0;
  s.params.l_mm = 8.0;
  s.params.alpha = 0.6;
  s.params.area_w_mm = 200.0;
  s.params.area_h_mm = 200.0;
  // legs of the first staple point +y toward the second crown
  s.particles.push_back(make_staple(0, 100.0, 100.0, 0.0, 12.0, 8.0));
  s.particles.push_back(make_staple(1, 100.0, 112.0, 0.0, 12.0, 8.0));

  snpick::rebuild_entanglement(s);
  // leg tips reach y=108, crown sits at y=112: gap 4 <= l=8
  REQUIRE(s.edges.size() == 1);
  CHECK(s.edges[0].a == 0);
  CHECK(s.edges[0].b == 1);
  CHECK(s.edges[0].strength == std::min(1.0, 0.6 * 8.0 / 12.0));

  s.particles[1].y_mm = 130.0;  // gap 22 > l
  snpick::rebuild_entanglement(s);
  CHECK(s.edges.empty());
}

TEST_CASE("jaws pick what lies between the plates, honoring rotation", "[pile]") {
  auto fresh = [] {
    PileState s;
    s.params.area_w_mm = 100.0;
    s.params.area_h_mm = 100.0;
    s.particles.push_back(make_staple(0, 70.0, 50.0, 0.0));
    return s;
  };
  PickParams pick;
  pick.x_mm = 50.0;
  pick.y_mm = 50.0;
  pick.aperture_w_mm = 50.0;
  pick.jaw_lateral_mm = 10.0;

  PileState a = fresh();
  pick.rotation_deg = 0.0;  // opening spans x in [25, 75]: crown inside
  PickOutcome out = snpick::simulate_pick(a, pick, false, 1, Strategy::FP);
  REQUIRE(out.picked_ids.size() == 1);
  CHECK(out.picked_mass_g == 1.0);
  CHECK(a.particles.empty());

  PileState b = fresh();
  pick.rotation_deg = 90.0;  // opening now spans y; laterally only [45, 55]
  out = snpick::simulate_pick(b, pick, false, 1, Strategy::FP);
  CHECK(out.picked_ids.empty());
  CHECK(b.particles.size() == 1);
}

TEST_CASE("certain edges co-lift whole chains", "[pile]") {
  PileState s;
  s.params.area_w_mm = 120.0;
  s.params.area_h_mm = 120.0;
  s.particles.push_back(make_staple(0, 20.0, 20.0, 0.0));
  s.particles.push_back(make_staple(1, 60.0, 60.0, 0.0));
  s.particles.push_back(make_staple(2, 100.0, 100.0, 0.0));
  s.edges.push_back({0, 1, 1.0});
  s.edges.push_back({1, 2, 1.0});

  PickParams pick;
  pick.x_mm = 20.0;
  pick.y_mm = 20.0;
  pick.aperture_w_mm = 14.0;
  pick.jaw_lateral_mm = 10.0;
  const PickOutcome out = snpick::simulate_pick(s, pick, false, 9, Strategy::GI);
  CHECK(out.picked_ids == std::vector<std::uint64_t>{0, 1, 2});
  CHECK(out.picked_mass_g == 3.0);
  CHECK(s.particles.empty());
  CHECK(s.edges.empty());
}

TEST_CASE("edges without a path to the jaws never fire", "[pile]") {
  PileState s;
  s.params.area_w_mm = 120.0;
  s.params.area_h_mm = 120.0;
  s.particles.push_back(make_staple(0, 20.0, 20.0, 0.0));
  s.particles.push_back(make_staple(1, 90.0, 90.0, 0.0));
  s.particles.push_back(make_staple(2, 90.0, 110.0, 0.0));
  s.edges.push_back({1, 2, 1.0});

  PickParams pick;
  pick.x_mm = 20.0;
  pick.y_mm = 20.0;
  pick.aperture_w_mm = 14.0;
  pick.jaw_lateral_mm = 10.0;
  const PickOutcome out = snpick::simulate_pick(s, pick, false, 3, Strategy::FP);
  CHECK(out.picked_ids == std::vector<std::uint64_t>{0});
  CHECK(s.particles.size() == 2);
  CHECK(s.edges.size() == 1);
}

TEST_CASE("spreading weakens only edges crossing the swept band", "[pile]") {
  auto build = [](double ab_strength) {
    PileState s;
    s.params.area_w_mm = 100.0;
    s.params.area_h_mm = 120.0;
    s.params.spread_attenuation = 0.25;
    s.params.prune_threshold = 0.05;
    s.particles.push_back(make_staple(0, 30.0, 50.0, 0.0));
    s.particles.push_back(make_staple(1, 70.0, 50.0, 0.0));
    s.particles.push_back(make_staple(2, 30.0, 90.0, 0.0));
    s.particles.push_back(make_staple(3, 70.0, 90.0, 0.0));
    s.edges.push_back({0, 1, ab_strength});  // crosses the spread line
    s.edges.push_back({2, 3, 0.5});          // far outside the band
    return s;
  };
  PickParams pick;
  pick.x_mm = 50.0;
  pick.y_mm = 50.0;
  pick.rotation_deg = 0.0;
  pick.aperture_w_mm = 20.0;
  pick.jaw_lateral_mm = 15.0;
  pick.max_aperture_mm = 60.0;
  pick.spread_dir_x = 1.0;
  pick.spread_dir_y = 0.0;

  SECTION("attenuated but kept above the prune threshold") {
    PileState s = build(0.5);
    const PickOutcome out = snpick::simulate_pick(s, pick, true, 4, Strategy::SnP);
    CHECK(out.picked_ids.empty());  // jaws close on empty floor between them
    CHECK(out.edges_attenuated == 1);
    CHECK(out.edges_pruned == 0);
    REQUIRE(s.edges.size() == 2);
    CHECK(s.edges[0].strength == 0.5 * 0.25);
    CHECK(s.edges[1].strength == 0.5);
  }
  SECTION("attenuated below the threshold and dropped") {
    PileState s = build(0.1);
    const PickOutcome out = snpick::simulate_pick(s, pick, true, 4, Strategy::SnP);
    CHECK(out.edges_attenuated == 1);
    CHECK(out.edges_pruned == 1);
    REQUIRE(s.edges.size() == 1);
    CHECK(s.edges[0].a == 2);
    CHECK(s.edges[0].strength == 0.5);
  }
  SECTION("no spread leaves every edge untouched") {
    PileState s = build(0.5);
    snpick::simulate_pick(s, pick, false, 4, Strategy::GI);
    REQUIRE(s.edges.size() == 2);
    CHECK(s.edges[0].strength == 0.5);
    CHECK(s.edges[1].strength == 0.5);
  }
}

TEST_CASE("spreading can only shrink the picked set at matched seeds", "[pile]") {
  for (std::uint64_t trial = 0; trial < 20; ++trial) {
    PileParams prm = h2_params(10.0, snpick::derive_seed(555, trial));
    prm.alpha = 0.4;  // strong edges so closures are sizable
    PileState plain = snpick::generate_pile(prm);
    PileState spreaded = plain;

    PickParams pick;
    pick.x_mm = 64.0;
    pick.y_mm = 53.0;
    pick.rotation_deg = 90.0;
    pick.aperture_w_mm = 40.0;
    pick.spread_dir_x = 0.0;
    pick.spread_dir_y = 1.0;

    const std::uint64_t pick_seed = snpick::derive_seed(prm.seed, 1);
    const auto base = snpick::simulate_pick(plain, pick, false, pick_seed, Strategy::GI);
    const auto less = snpick::simulate_pick(spreaded, pick, true, pick_seed, Strategy::SnP);

    const std::set<std::uint64_t> base_ids(base.picked_ids.begin(), base.picked_ids.end());
    for (std::uint64_t id : less.picked_ids) CHECK(base_ids.count(id) == 1);
    CHECK(less.picked_mass_g <= base.picked_mass_g);
  }
}

TEST_CASE("mass is conserved across arbitrary pick sequences", "[pile]") {
  PileParams prm;
  prm.n = 100;
  prm.d_mm = 12.0;
  prm.l_mm = 8.0;
  prm.alpha = 0.1;
  prm.area_w_mm = 200.0;
  prm.area_h_mm = 160.0;
  prm.unit_mass_g = 0.35;
  prm.seed = 2024;
  PileState s = snpick::generate_pile(prm);

  const std::size_t total = s.particles.size();
  std::size_t picked_count = 0;
  double picked_mass = 0.0;
  snpick::Rng rng(99);
  for (int i = 0; i < 60 && !s.particles.empty(); ++i) {
    PickParams pick;
    pick.x_mm = rng.uniform(20.0, 180.0);
    pick.y_mm = rng.uniform(20.0, 140.0);
    pick.rotation_deg = static_cast<double>(rng.uniform_int(0, 3)) * 45.0;
    pick.aperture_w_mm = 40.0;
    const auto out = snpick::simulate_pick(s, pick, i % 2 == 0,
                                           rng.next_u64(), Strategy::FP);
    picked_count += out.picked_ids.size();
    picked_mass += out.picked_mass_g;
  }
  CHECK(picked_count + s.particles.size() == total);
  CHECK_THAT(picked_mass + s.total_mass(),
             Catch::Matchers::WithinAbs(total * prm.unit_mass_g, 1e-9));
  for (const EntanglementEdge& e : s.edges) {
    bool a_alive = false, b_alive = false;
    for (const Particle& p : s.particles) {
      if (p.id == e.a) a_alive = true;
      if (p.id == e.b) b_alive = true;
    }
    CHECK(a_alive);
    CHECK(b_alive);
  }
}

TEST_CASE("reset reshakes the pile without losing material", "[pile]") {
  PileState s = snpick::generate_pile(h2_params(8.0, 1));
  PickParams pick;
  pick.x_mm = 64.0;
  pick.y_mm = 53.0;
  pick.aperture_w_mm = 40.0;
  snpick::simulate_pick(s, pick, false, 10, Strategy::FP);
  const double mass_before = s.total_mass();
  std::set<std::uint64_t> ids_before;
  for (const Particle& p : s.particles) ids_before.insert(p.id);

  const PileState r1 = snpick::reset_pile(s, 9);
  const PileState r2 = snpick::reset_pile(s, 9);
  const nlohmann::json j1 = r1, j2 = r2;
  CHECK(j1.dump() == j2.dump());
  CHECK(r1.rng_seed == 9);
  CHECK(r1.total_mass() == mass_before);
  std::set<std::uint64_t> ids_after;
  for (const Particle& p : r1.particles) ids_after.insert(p.id);
  CHECK(ids_after == ids_before);

  bool moved = false;
  for (std::size_t i = 0; i < s.particles.size(); ++i)
    if (s.particles[i].x_mm != r1.particles[i].x_mm) moved = true;
  CHECK(moved);
}

TEST_CASE("pile state survives a JSON round trip and rejects corruption",
          "[pile]") {
  const PileState s = snpick::generate_pile(h2_params(10.0, 21));
  nlohmann::json j = s;
  const PileState back = j.get<PileState>();
  const nlohmann::json j2 = back;
  CHECK(j.dump() == j2.dump());

  nlohmann::json bad_ref = j;
  bad_ref["entanglement_edges"][0]["b"] = 100000;
  CHECK_THROWS_AS(bad_ref.get<PileState>(), snpick::io_error);

  nlohmann::json bad_strength = j;
  bad_strength["entanglement_edges"][0]["strength"] = 1.5;
  CHECK_THROWS_AS(bad_strength.get<PileState>(), snpick::io_error);

  nlohmann::json zero_strength = j;
  zero_strength["entanglement_edges"][0]["strength"] = 0.0;
  CHECK_THROWS_AS(zero_strength.get<PileState>(), snpick::io_error);

  nlohmann::json dup = j;
  dup["particles"][1]["id"] = dup["particles"][0]["id"];
  CHECK_THROWS_AS(dup.get<PileState>(), snpick::io_error);
}

TEST_CASE("invalid picks and impossible areas fail loudly", "[pile]") {
  PileState s = snpick::generate_pile(h2_params(8.0, 2));
  PickParams outside;
  outside.x_mm = -1.0;
  outside.y_mm = 53.0;
  CHECK_THROWS_AS(snpick::simulate_pick(s, outside, false, 1, Strategy::FP),
                  snpick::sim_error);
  PickParams degenerate;
  degenerate.x_mm = 64.0;
  degenerate.y_mm = 53.0;
  degenerate.aperture_w_mm = 0.0;
  CHECK_THROWS_AS(snpick::simulate_pick(s, degenerate, false, 1, Strategy::FP),
                  snpick::config_error);

  PileParams cramped;
  cramped.n = 5;
  cramped.d_mm = 12.0;
  cramped.l_mm = 10.0;
  cramped.area_w_mm = 20.0;
  cramped.area_h_mm = 20.0;
  CHECK_THROWS_AS(snpick::generate_pile(cramped), snpick::sim_error);
}

TEST_CASE("longer protrusions raise both mean and spread of picked mass",
          "[pile][trend]") {
  auto run_cell = [](double l_mm, double& mean, double& sd) {
    const int trials = 60;
    double sum = 0.0, sumsq = 0.0;
    for (int t = 0; t < trials; ++t) {
      PileParams prm = h2_params(l_mm, snpick::derive_seed(42, static_cast<std::uint64_t>(t)));
      PileState s = snpick::generate_pile(prm);
      PickParams pick;
      pick.x_mm = 64.0;
      pick.y_mm = 53.0;
      pick.rotation_deg = 90.0;
      pick.aperture_w_mm = 40.0;
      const auto out = snpick::simulate_pick(s, pick, false,
                                             snpick::derive_seed(prm.seed, 99),
                                             Strategy::FP);
      sum += out.picked_mass_g;
      sumsq += out.picked_mass_g * out.picked_mass_g;
    }
    mean = sum / trials;
    sd = std::sqrt((sumsq - trials * mean * mean) / (trials - 1));
  };
  double mean6 = 0, sd6 = 0, mean10 = 0, sd10 = 0;
  run_cell(6.0, mean6, sd6);
  run_cell(10.0, mean10, sd10);
  INFO("l=6: " << mean6 << " +- " << sd6 << ", l=10: " << mean10 << " +- " << sd10);
  CHECK(mean10 > mean6);
  CHECK(sd10 > sd6);
}
