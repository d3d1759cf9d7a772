// Copyright 2026 The ADM Authors
// SPDX-License-Identifier: Apache-2.0

#include "adm/scene/synthetic.hpp"

#include <algorithm>
#include <cstdio>
#include <numbers>
#include <random>

#include "adm/scene/geometry.hpp"

namespace adm::scene {

const char* to_string(RoadTemplate t) {
  switch (t) {
    case RoadTemplate::straight: return "straight";
    case RoadTemplate::curved: return "curved";
    default: return "intersection";
  }
}

const char* to_string(Maneuver m) {
  switch (m) {
    case Maneuver::keep_lane: return "keep_lane";
    case Maneuver::lane_change: return "lane_change";
    case Maneuver::straight: return "straight";
    case Maneuver::left: return "left";
    default: return "right";
  }
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kLaneWidth = 3.5;
constexpr double kHalfLane = kLaneWidth / 2.0;
constexpr double kStopDistance = 10.0;  // intersection center to stop line
constexpr double kArmLength = 90.0;

Vec2 unit(double heading) { return {std::cos(heading), std::sin(heading)}; }
Vec2 right_of(double heading) { return unit(heading - kPi / 2.0); }

// Arc-length parameterized centerline made of straight and circular
// pieces, evaluated in closed form. Queries outside [0, length] extrapolate
// along the end tangents.
class Path {
 public:
  Path(Vec2 start, double heading) : start_(start), heading_(heading), end_(start), end_heading_(heading) {}

  Path& straight(double length) { return add(length, 0.0); }

  // Positive angle turns left.
  Path& arc(double radius, double angle) { return add(std::abs(angle) * radius, (angle > 0 ? 1.0 : -1.0) / radius); }

  double length() const { return pieces_.empty() ? 0.0 : pieces_.back().s0 + pieces_.back().length; }

  Vec2 point_at(double s) const {
    if (s <= 0.0) return start_ + unit(heading_) * s;
    if (s >= length()) return end_ + unit(end_heading_) * (s - length());
    const Piece& p = piece(s);
    return evaluate(p, s - p.s0);
  }

  Vec2 left_normal_at(double s) const {
    double h = heading_;
    if (s >= length()) {
      h = end_heading_;
    } else if (s > 0.0) {
      const Piece& p = piece(s);
      h = p.heading + p.curvature * (s - p.s0);
    }
    return unit(h + kPi / 2.0);
  }

  // Samples the centerline every `step` meters, including both ends.
  std::vector<Vec2> sample(double step) const {
    const int n = std::max(1, static_cast<int>(std::ceil(length() / step)));
    std::vector<Vec2> out;
    for (int i = 0; i <= n; ++i) out.push_back(point_at(length() * i / n));
    return out;
  }

 private:
  struct Piece {
    Vec2 start;
    double heading;
    double s0;
    double length;
    double curvature;
  };

  static Vec2 evaluate(const Piece& p, double u) {
    if (p.curvature == 0.0) return p.start + unit(p.heading) * u;
    const double r = 1.0 / p.curvature;  // signed radius
    const Vec2 center = p.start + unit(p.heading + kPi / 2.0) * r;
    return center + rotate(p.start - center, p.curvature * u);
  }

  Path& add(double length, double curvature) {
    Piece p{end_, end_heading_, this->length(), length, curvature};
    end_ = evaluate(p, length);
    end_heading_ += curvature * length;
    pieces_.push_back(p);
    return *this;
  }

  const Piece& piece(double s) const {
    for (const auto& p : pieces_) {
      if (s < p.s0 + p.length) return p;
    }
    return pieces_.back();
  }

  Vec2 start_;
  double heading_;
  Vec2 end_;
  double end_heading_;
  std::vector<Piece> pieces_;
};

struct Motion {
  double end_speed = 0.0;     // speed at the last observed step
  double observed_accel = 0.0;
  double future_accel = 0.0;
  double end_arc = 0.0;       // path arc length at the last observed step
  double lane_shift = 0.0;    // signed lateral offset reached by a lane change
  double shift_length = 40.0; // meters traveled during the lane change
};

AgentTrack drive(const Path& path, const Motion& m, const SyntheticConfig& cfg, std::string id) {
  constexpr int kTotal = kObservedSteps + kFutureSteps;
  constexpr int kLast = kObservedSteps - 1;
  std::array<double, kTotal> s{};
  s[kLast] = m.end_arc;
  for (int k = kLast - 1; k >= 0; --k) {
    const double v = std::clamp(m.end_speed - m.observed_accel * (kLast - k) * kStepSeconds, 0.5, cfg.speed_cap);
    s[k] = s[k + 1] - v * kStepSeconds;
  }
  for (int k = kLast + 1; k < kTotal; ++k) {
    const double v = std::clamp(m.end_speed + m.future_accel * (k - kLast) * kStepSeconds, 0.0, cfg.speed_cap);
    s[k] = s[k - 1] + v * kStepSeconds;
  }
  AgentTrack agent;
  agent.id = std::move(id);
  FutureTrack future{};
  for (int k = 0; k < kTotal; ++k) {
    double lateral = 0.0;
    // The lane change starts at the last observed position and progresses
    // with distance traveled, so it pauses when the agent stops.
    if (m.lane_shift != 0.0 && s[k] > m.end_arc) {
      const double u = std::min(1.0, (s[k] - m.end_arc) / m.shift_length);
      lateral = m.lane_shift * 0.5 * (1.0 - std::cos(kPi * u));
    }
    const Vec2 p = path.point_at(s[k]) + path.left_normal_at(s[k]) * lateral;
    if (k < kObservedSteps) {
      agent.observed[k] = p;
    } else {
      future[k - kObservedSteps] = p;
    }
  }
  agent.future = future;
  return agent;
}

MapPolyline polyline(std::string id, std::vector<Vec2> pts, PolylineKind kind, TurnDirection turn = TurnDirection::none,
                     bool intersection = false, bool control = false) {
  return {std::move(id), std::move(pts), kind, turn, intersection, control};
}

class Generator {
 public:
  Generator(std::uint64_t seed, const SyntheticConfig& cfg) : rng_(seed), cfg_(cfg) {}

  LabeledScenario make(std::string scenario_id) {
    LabeledScenario out;
    out.scenario.scenario_id = std::move(scenario_id);
    std::discrete_distribution<int> pick({cfg_.weight_straight, cfg_.weight_curved, cfg_.weight_intersection});
    out.road = static_cast<RoadTemplate>(pick(rng_));
    const int agents = std::uniform_int_distribution<int>(cfg_.min_agents, cfg_.max_agents)(rng_);
    switch (out.road) {
      case RoadTemplate::straight: straight_road(out, agents); break;
      case RoadTemplate::curved: curved_road(out, agents); break;
      default: intersection(out, agents); break;
    }
    out.scenario.agents.front().focal = true;
    if (cfg_.random_pose) {
      const double angle = uniform(-kPi, kPi);
      const Vec2 shift{uniform(-500.0, 500.0), uniform(-500.0, 500.0)};
      out.scenario = transform_scenario(out.scenario, angle, shift);
    }
    return out;
  }

 private:
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  bool chance(double p) { return std::bernoulli_distribution(p)(rng_); }

  Motion motion(double end_arc, double max_speed) {
    Motion m;
    m.end_speed = uniform(cfg_.min_speed, std::max(cfg_.min_speed, max_speed));
    m.observed_accel = uniform(-cfg_.observed_accel, cfg_.observed_accel);
    m.future_accel = uniform(cfg_.future_accel_min, cfg_.future_accel_max);
    m.end_arc = end_arc;
    return m;
  }

  static std::string agent_id(std::size_t i) { return "a" + std::to_string(i); }

  void straight_road(LabeledScenario& out, int agents) {
    constexpr double kHalfLength = 200.0;
    // Lanes 0,1 run east (y < 0), lanes 2,3 run west.
    const double lane_y[4] = {-kHalfLane, -kHalfLane - kLaneWidth, kHalfLane, kHalfLane + kLaneWidth};
    auto& map = out.scenario.map;
    for (int l = 0; l < 4; ++l) {
      const bool east = l < 2;
      const Vec2 a{east ? -kHalfLength : kHalfLength, lane_y[l]};
      const Vec2 b{east ? kHalfLength : -kHalfLength, lane_y[l]};
      map.push_back(polyline("lane" + std::to_string(l), {a, b}, PolylineKind::centerline));
    }
    for (double y : {-2 * kLaneWidth, 0.0, 2 * kLaneWidth}) {
      map.push_back(polyline("edge" + std::to_string(map.size()), {{-kHalfLength, y}, {kHalfLength, y}},
                             PolylineKind::boundary));
    }
    for (int i = 0; i < agents; ++i) {
      const int lane = i == 0 ? std::uniform_int_distribution<int>(0, 1)(rng_)
                              : std::uniform_int_distribution<int>(0, 3)(rng_);
      const bool east = lane < 2;
      const double heading = east ? 0.0 : kPi;
      Path path(Vec2{east ? -kHalfLength : kHalfLength, lane_y[lane]}, heading);
      path.straight(2 * kHalfLength);
      const double x_end = i == 0 ? uniform(-20.0, 20.0) : uniform(-60.0, 60.0);
      Motion m = motion(east ? x_end + kHalfLength : kHalfLength - x_end, cfg_.max_speed);
      Maneuver man = Maneuver::keep_lane;
      if (chance(cfg_.lane_change_ratio)) {
        man = Maneuver::lane_change;
        // Inner lanes move outward, i.e. to the right of travel.
        const bool inner = lane == 0 || lane == 2;
        m.lane_shift = inner ? -kLaneWidth : kLaneWidth;
        m.shift_length = uniform(25.0, 45.0);
      }
      out.scenario.agents.push_back(drive(path, m, cfg_, agent_id(i)));
      out.maneuvers.push_back(man);
    }
  }

  void curved_road(LabeledScenario& out, int agents) {
    const double radius = uniform(40.0, 120.0);
    const Vec2 center{0.0, radius};
    const double span = 150.0 / radius;  // radians either side of the apex
    auto arc_points = [&](double r) {
      std::vector<Vec2> pts;
      const int n = static_cast<int>(std::ceil(2 * span * r / 2.0));
      for (int i = 0; i <= n; ++i) {
        const double a = -kPi / 2 - span + 2 * span * i / n;
        pts.push_back(center + unit(a) * r);
      }
      return pts;
    };
    auto& map = out.scenario.map;
    // Counter-clockwise traffic keeps right on the outer lane.
    map.push_back(polyline("lane_ccw", arc_points(radius + kHalfLane), PolylineKind::centerline));
    auto cw = arc_points(radius - kHalfLane);
    std::reverse(cw.begin(), cw.end());
    map.push_back(polyline("lane_cw", cw, PolylineKind::centerline));
    map.push_back(polyline("edge_outer", arc_points(radius + kLaneWidth), PolylineKind::boundary));
    map.push_back(polyline("edge_inner", arc_points(radius - kLaneWidth), PolylineKind::boundary));

    for (int i = 0; i < agents; ++i) {
      const bool ccw = chance(0.5);
      const double r = ccw ? radius + kHalfLane : radius - kHalfLane;
      const double start_angle = ccw ? -kPi / 2 - span : -kPi / 2 + span;
      const double heading = start_angle + (ccw ? kPi / 2 : -kPi / 2);
      Path path(center + unit(start_angle) * r, heading);
      path.arc(r, ccw ? 2 * span : -2 * span);
      const double apex_arc = span * r;
      const double offset = i == 0 ? uniform(-20.0, 20.0) : uniform(-60.0, 60.0);
      out.scenario.agents.push_back(drive(path, motion(apex_arc + offset, cfg_.max_speed), cfg_, agent_id(i)));
      out.maneuvers.push_back(Maneuver::keep_lane);
    }
  }

  // Inbound path for arm `arm` (0=east, 1=north, 2=west, 3=south of the
  // center) followed by the chosen connector and the exit arm.
  static Path route(int arm, Maneuver man) {
    const double outward = arm * kPi / 2;
    const double heading = outward + kPi;
    const Vec2 start = unit(outward) * (kStopDistance + kArmLength) + right_of(heading) * kHalfLane;
    Path path(start, heading);
    path.straight(kArmLength);
    switch (man) {
      case Maneuver::left: path.arc(kStopDistance + kHalfLane, kPi / 2); break;
      case Maneuver::right: path.arc(kStopDistance - kHalfLane, -kPi / 2); break;
      default: path.straight(2 * kStopDistance); break;
    }
    path.straight(kArmLength);
    return path;
  }

  void intersection(LabeledScenario& out, int agents) {
    auto& map = out.scenario.map;
    for (int arm = 0; arm < 4; ++arm) {
      const double outward = arm * kPi / 2;
      const std::string a = std::to_string(arm);
      const Vec2 in_start = unit(outward) * (kStopDistance + kArmLength) + right_of(outward + kPi) * kHalfLane;
      map.push_back(polyline("in" + a, {in_start, in_start + unit(outward + kPi) * kArmLength},
                             PolylineKind::centerline, TurnDirection::none, false, true));
      const Vec2 out_start = unit(outward) * kStopDistance + right_of(outward) * kHalfLane;
      map.push_back(polyline("out" + a, {out_start, out_start + unit(outward) * kArmLength}, PolylineKind::centerline));
      for (double side : {-1.0, 1.0}) {
        const Vec2 e0 = unit(outward) * kStopDistance + unit(outward + kPi / 2) * (side * kLaneWidth);
        map.push_back(polyline("edge" + a + (side < 0 ? "r" : "l"), {e0, e0 + unit(outward) * kArmLength},
                               PolylineKind::boundary));
      }
      const std::pair<Maneuver, TurnDirection> connectors[] = {{Maneuver::straight, TurnDirection::none},
                                                               {Maneuver::left, TurnDirection::left},
                                                               {Maneuver::right, TurnDirection::right}};
      for (const auto& [man, turn] : connectors) {
        Path p(in_start + unit(outward + kPi) * kArmLength, outward + kPi);
        if (man == Maneuver::left) p.arc(kStopDistance + kHalfLane, kPi / 2);
        else if (man == Maneuver::right) p.arc(kStopDistance - kHalfLane, -kPi / 2);
        else p.straight(2 * kStopDistance);
        map.push_back(polyline("conn" + a + to_string(man), p.sample(0.5), PolylineKind::centerline, turn, true));
      }
    }

    const int focal_arm = std::uniform_int_distribution<int>(0, 3)(rng_);
    double focal_gap = 0.0;
    for (int i = 0; i < agents; ++i) {
      Maneuver man = Maneuver::straight;
      if (chance(cfg_.turn_ratio)) man = chance(0.5) ? Maneuver::left : Maneuver::right;
      int arm = i == 0 ? focal_arm : std::uniform_int_distribution<int>(0, 3)(rng_);
      double gap;  // distance to the stop line at the last observed step
      if (i == 0) {
        gap = uniform(0.0, 15.0);
        focal_gap = gap;
      } else if (arm == focal_arm) {
        gap = focal_gap + uniform(10.0, 30.0);
      } else {
        gap = uniform(-5.0, 40.0);
      }
      const bool turning = man != Maneuver::straight;
      const Path path = route(arm, man);
      Motion m = motion(kArmLength - gap, turning ? std::min(cfg_.max_speed, 9.0) : cfg_.max_speed);
      out.scenario.agents.push_back(drive(path, m, cfg_, agent_id(i)));
      out.maneuvers.push_back(man);
    }
  }

  std::mt19937_64 rng_;
  const SyntheticConfig& cfg_;
};

}  // namespace

std::vector<LabeledScenario> generate_synthetic_labeled(int count, std::uint64_t seed, const SyntheticConfig& config) {
  if (count < 1) throw std::invalid_argument("generate_synthetic: count must be at least 1");
  if (config.min_agents < 1 || config.max_agents < config.min_agents) {
    throw std::invalid_argument("generate_synthetic: bad agent count range");
  }
  std::vector<LabeledScenario> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    Generator gen(mix_seed(seed, static_cast<std::uint64_t>(i)), config);
    char id[48];
    std::snprintf(id, sizeof id, "syn-%llu-%05d", static_cast<unsigned long long>(seed), i);
    out.push_back(gen.make(id));
  }
  return out;
}

std::vector<Scenario> generate_synthetic(int count, std::uint64_t seed, const SyntheticConfig& config) {
  std::vector<Scenario> out;
  for (auto& l : generate_synthetic_labeled(count, seed, config)) out.push_back(std::move(l.scenario));
  return out;
}

KinematicStats kinematic_stats(const AgentTrack& agent, double min_step) {
  std::vector<Vec2> pts(agent.observed.begin(), agent.observed.end());
  if (agent.future) pts.insert(pts.end(), agent.future->begin(), agent.future->end());
  KinematicStats st;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    st.max_speed = std::max(st.max_speed, distance(pts[i], pts[i - 1]) / kStepSeconds);
  }
  for (std::size_t i = 2; i < pts.size(); ++i) {
    const Vec2 a = pts[i - 1] - pts[i - 2];
    const Vec2 b = pts[i] - pts[i - 1];
    const double la = a.norm();
    const double lb = b.norm();
    if (la < min_step || lb < min_step) continue;
    const double turn = std::abs(std::atan2(a.x * b.y - a.y * b.x, a.x * b.x + a.y * b.y));
    st.max_curvature = std::max(st.max_curvature, turn / (0.5 * (la + lb)));
  }
  return st;
}

}  // namespace adm::scene
