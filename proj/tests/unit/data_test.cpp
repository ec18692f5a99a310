#include <gtest/gtest.h>

#include <filesystem>
#include <set>
#include <sstream>

#include "support/fixtures.hpp"
#include "trajpred/core/error.hpp"
#include "trajpred/data/dataset.hpp"
#include "trajpred/data/graph.hpp"
#include "trajpred/data/recording.hpp"
#include "trajpred/data/split.hpp"
#include "trajpred/data/synth.hpp"

namespace trajpred {
namespace {

using namespace data;

RecordingFile two_tracks(int frames) {
  RecordingFile f{"07", {}};
  for (int track = 1; track <= 2; ++track) {
    for (int k = 0; k < frames; ++k) {
      RecordingRow r;
      r.recording_id = "07";
      r.frame = k;
      r.track_id = track;
      r.x = 0.1 * k + track;
      r.y = -0.3 * k;
      r.vx = 2.5;
      r.vy = -7.5;
      r.heading_deg = 90.0;
      f.rows.push_back(r);
    }
  }
  return f;
}

TEST(Recording, TwoTracksTenFrames) {
  const auto trajs = to_trajectories(two_tracks(10));
  ASSERT_EQ(trajs.size(), 2u);
  for (const auto& t : trajs) {
    EXPECT_EQ(t.size(), 10u);
    EXPECT_DOUBLE_EQ(t.dt, kRecordingDt);
    EXPECT_NEAR(t.states[0].yaw, std::numbers::pi / 2, 1e-15);
    for (std::size_t k = 0; k < t.size(); ++k) EXPECT_EQ(t.states[k].timestep_index, static_cast<std::int64_t>(k));
  }
}

TEST(Recording, WriteReadRoundTripIsIdentical) {
  const auto files = synth_scenario(Scenario::roundabout, 1, 3, 11);
  std::stringstream ss;
  write_recording(files[0], ss);
  const auto back = read_recording(ss);
  ASSERT_EQ(back.rows.size(), files[0].rows.size());
  const auto a = to_trajectories(files[0]), b = to_trajectories(back);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].agent_id, b[i].agent_id);
    EXPECT_EQ(a[i].states, b[i].states);
  }
}

TEST(Recording, NanRowIsNamed) {
  std::stringstream ss;
  write_recording(two_tracks(10), ss);
  std::string text = ss.str();
  // Replace x of the 7th data row.
  std::vector<std::string> lines;
  std::stringstream in(text);
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  auto& row = lines[7];
  const auto c2 = row.find(',', row.find(',', row.find(',') + 1) + 1);
  const auto c3 = row.find(',', c2 + 1);
  row = row.substr(0, c2 + 1) + "nan" + row.substr(c3);
  std::stringstream bad;
  for (const auto& l : lines) bad << l << '\n';
  try {
    read_recording(bad);
    FAIL() << "expected SchemaError";
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find("row 7"), std::string::npos) << e.what();
  }
}

TEST(Recording, MissingColumnAndGapAreRejected) {
  std::stringstream missing("recording_id,frame,track_id,x\n07,0,1,0.0\n");
  EXPECT_THROW(read_recording(missing), SchemaError);
  auto f = two_tracks(10);
  f.rows[4].frame = 40;
  std::stringstream ss;
  write_recording(f, ss);
  EXPECT_THROW(to_trajectories(read_recording(ss)), Error);
}

TEST(Downsample, KeepsEveryFifthState) {
  Trajectory t = testing::line("a", 0, 0, 1, 0, 25, 0, kRecordingDt);
  const auto d = downsample({t}, 5);
  ASSERT_EQ(d.size(), 1u);
  ASSERT_EQ(d[0].size(), 5u);
  EXPECT_NEAR(d[0].dt, 0.2, 1e-15);
  for (int k = 0; k < 5; ++k) {
    EXPECT_EQ(d[0].states[static_cast<std::size_t>(k)].x, t.states[static_cast<std::size_t>(5 * k)].x);
    EXPECT_EQ(d[0].states[static_cast<std::size_t>(k)].timestep_index, k);
  }
}

TEST(Downsample, FactorOneIsIdentityAndZeroThrows) {
  Trajectory t = testing::line("a", 1, 2, 1, 3, 12, 0, kRecordingDt);
  const auto d = downsample({t}, 1);
  EXPECT_EQ(d[0].states, t.states);
  EXPECT_EQ(d[0].dt, t.dt);
  EXPECT_THROW(downsample({t}, 0), InvalidInput);
}

TEST(Downsample, CommutesWithActionDerivation) {
  const auto trajs = to_trajectories(synth_scenario(Scenario::intersection, 1, 2, 3)[0]);
  for (const auto& t : trajs) {
    const auto d = downsample({t}, 5);
    if (d.empty()) continue;
    const auto a = derive_actions(d[0]);
    std::vector<Vec2> kept;
    for (const auto& s : t.states)
      if (s.timestep_index % 5 == 0) kept.push_back({s.x, s.y});
    ASSERT_EQ(a.size() + 1, kept.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
      EXPECT_EQ(a[k].dx, kept[k + 1].x - kept[k].x);
      EXPECT_EQ(a[k].dy, kept[k + 1].y - kept[k].y);
    }
  }
}

std::vector<PredictionInstance> fake_instances(const std::vector<std::pair<Scenario, int>>& strata) {
  std::vector<PredictionInstance> out;
  int id = 0;
  for (auto [sc, n] : strata) {
    for (int k = 0; k < n; ++k) {
      PredictionInstance p;
      p.scenario = sc;
      p.recording_id = "r" + std::to_string(k % 3);
      p.target_history.agent_id = std::to_string(id++);
      out.push_back(p);
    }
  }
  return out;
}

TEST(Split, EightyTenTen) {
  const auto s = stratified_split_indices(fake_instances({{Scenario::roundabout, 100}}), {});
  EXPECT_EQ(s.train.size(), 80u);
  EXPECT_EQ(s.val.size(), 10u);
  EXPECT_EQ(s.test.size(), 10u);
}

TEST(Split, PerStratumProportions) {
  const auto inst = fake_instances({{Scenario::roundabout, 50}, {Scenario::highway, 50}});
  const auto s = stratified_split(inst, {});
  for (auto sc : {Scenario::roundabout, Scenario::highway}) {
    auto count = [&](const std::vector<PredictionInstance>& v) {
      return std::count_if(v.begin(), v.end(), [&](const auto& p) { return p.scenario == sc; });
    };
    EXPECT_EQ(count(s.train), 40);
    EXPECT_EQ(count(s.val), 5);
    EXPECT_EQ(count(s.test), 5);
  }
}

TEST(Split, FractionsMustSumToOne) {
  SplitSpec bad{0.8, 0.1, 0.2, 0};
  EXPECT_THROW(stratified_split_indices(fake_instances({{Scenario::roundabout, 10}}), bad), InvalidInput);
}

TEST(Split, DisjointExhaustiveDeterministic) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 30; ++trial) {
    std::uniform_int_distribution<int> n(1, 60);
    const auto inst = fake_instances({{Scenario::roundabout, n(rng)}, {Scenario::intersection, n(rng)},
                                      {Scenario::highway, n(rng)}});
    const SplitSpec spec{0.7, 0.2, 0.1, static_cast<std::uint64_t>(trial)};
    const auto s = stratified_split_indices(inst, spec);
    std::set<std::size_t> all;
    for (const auto* part : {&s.train, &s.val, &s.test}) all.insert(part->begin(), part->end());
    EXPECT_EQ(all.size(), inst.size());
    EXPECT_EQ(s.train.size() + s.val.size() + s.test.size(), inst.size());
    const auto again = stratified_split_indices(inst, spec);
    EXPECT_EQ(s.train, again.train);
    EXPECT_EQ(s.val, again.val);
    EXPECT_EQ(s.test, again.test);
  }
}

TEST(Split, DifferentSeedsShuffleDifferently) {
  const auto inst = fake_instances({{Scenario::roundabout, 100}});
  EXPECT_NE(stratified_split_indices(inst, {0.8, 0.1, 0.1, 1}).train,
            stratified_split_indices(inst, {0.8, 0.1, 0.1, 2}).train);
}

PredictionInstance pair_instance(double nx, double ny, double nvx = 0.0) {
  std::vector<Trajectory> rec = {testing::line("t", 0, 0, 0, 0, 10), testing::line("n", nx, ny, nvx, 0, 10)};
  return window_instances(rec, 5, 5, 100).front();
}

TEST(Graph, TargetAlone) {
  const auto inst = window_instances({testing::line("t", 0, 0, 1, 0, 10)}, 5, 5, 100).front();
  const auto g = build_graph(inst);
  EXPECT_EQ(g.num_nodes(), 1);
  EXPECT_EQ(g.num_edges(), 0);
  EXPECT_EQ(g.node_source[0], -1);
}

TEST(Graph, RadiusThreshold) {
  EXPECT_EQ(build_graph(pair_instance(29, 0), 30).num_nodes(), 2);
  EXPECT_EQ(build_graph(pair_instance(31, 0), 30).num_nodes(), 1);
}

TEST(Graph, PythagoreanEdge) {
  const auto g = build_graph(pair_instance(3, 4));
  ASSERT_EQ(g.num_edges(), 2);
  const auto out = g.target_out_edges();
  ASSERT_EQ(out.size(), 1u);
  const auto e = g.edge_features.row(out[0]);
  EXPECT_EQ(e(0), 3.0);
  EXPECT_EQ(e(1), 4.0);
  EXPECT_EQ(e(2), 0.0);
  EXPECT_EQ(e(3), 0.0);
  EXPECT_EQ(e(4), 5.0);
}

TEST(Graph, DistanceFeatureIsNormOfOffset) {
  const auto inst = testing::synthetic_instances(Scenario::roundabout, 1, 8, 4, 10);
  for (const auto& p : inst) {
    const auto g = build_graph(p);
    for (int k = 0; k < g.num_edges(); ++k) {
      const auto e = g.edge_features.row(k);
      EXPECT_EQ(e(4), std::hypot(e(0), e(1)));
      EXPECT_LE(e(4), kDefaultInteractionRadius);
    }
    EXPECT_EQ(g.node_source[static_cast<std::size_t>(g.target_node)], -1);
  }
}

TEST(Synth, DeterministicPerSeed) {
  const auto a = synth_scenario(Scenario::highway, 2, 4, 5);
  const auto b = synth_scenario(Scenario::highway, 2, 4, 5);
  const auto c = synth_scenario(Scenario::highway, 2, 4, 6);
  std::stringstream sa, sb, sc;
  write_recording(a[1], sa);
  write_recording(b[1], sb);
  write_recording(c[1], sc);
  EXPECT_EQ(sa.str(), sb.str());
  EXPECT_NE(sa.str(), sc.str());
}

TEST(Synth, VelocityIsForwardDifference) {
  for (auto kind : {Scenario::roundabout, Scenario::intersection, Scenario::highway}) {
    for (const auto& t : to_trajectories(synth_scenario(kind, 1, 4, 2)[0])) {
      for (std::size_t k = 0; k + 1 < t.size(); ++k) {
        EXPECT_NEAR(t.states[k].vx, (t.states[k + 1].x - t.states[k].x) / kRecordingDt, 1e-9);
        EXPECT_NEAR(t.states[k].vy, (t.states[k + 1].y - t.states[k].y) / kRecordingDt, 1e-9);
      }
    }
  }
}

TEST(Synth, RoundaboutSpeedConstant) {
  for (const auto& t : to_trajectories(synth_scenario(Scenario::roundabout, 1, 4, 8)[0])) {
    const double v0 = std::hypot(t.states[0].vx, t.states[0].vy);
    for (std::size_t k = 0; k + 1 < t.size(); ++k)
      EXPECT_NEAR(std::hypot(t.states[k].vx, t.states[k].vy), v0, 1e-9);
  }
}

TEST(Synth, HighwayStaysInLaneBand) {
  for (const auto& t : to_trajectories(synth_scenario(Scenario::highway, 2, 6, 8)[0])) {
    for (std::size_t k = 0; k + 1 < t.size(); ++k) {
      if (std::abs(t.states[k].vy) >= 0.5 * kLaneChangeSpeed) continue;  // mid lane change
      const double lane = std::round(t.states[k].y / kLaneWidth);
      EXPECT_LE(std::abs(t.states[k].y - lane * kLaneWidth), 0.2 + 1e-9);
    }
  }
}

TEST(Dataset, FilesRoundTripThroughDisk) {
  const auto dir = std::filesystem::temp_directory_path() / "trajpred_data_test";
  std::filesystem::remove_all(dir);
  const auto files = synth_scenario(Scenario::intersection, 2, 3, 1);
  write_recordings(files, dir);
  EXPECT_EQ(recording_files(dir).size(), 2u);
  const auto from_disk = load_instances({dir, Scenario::intersection}, {});
  const auto in_mem = instances_from_recordings(files, Scenario::intersection, {});
  ASSERT_EQ(from_disk.size(), in_mem.size());
  for (std::size_t k = 0; k < in_mem.size(); ++k)
    EXPECT_EQ(from_disk[k].target_future.states, in_mem[k].target_future.states);
  std::filesystem::remove_all(dir);
  EXPECT_THROW(recording_files(dir), IoError);
}

TEST(Dataset, DemonstrationTracksMergeOverlappingWindows) {
  std::vector<Trajectory> rec = {testing::line("a", 0, 0, 1, 0, 30)};
  auto inst = window_instances(rec, 5, 5, 3, Scenario::roundabout, "r");
  const auto tracks = demonstration_tracks(inst);
  ASSERT_EQ(tracks.size(), 1u);
  EXPECT_EQ(tracks[0].first_step(), 0);
  EXPECT_EQ(tracks[0].last_step(), inst.back().target_future.last_step());
  // Dropping middle windows leaves two disjoint runs.
  std::vector<PredictionInstance> sparse = {inst.front(), inst.back()};
  EXPECT_EQ(demonstration_tracks(sparse).size(), 2u);
}

}  // namespace
}  // namespace trajpred
