#include "drivestyle/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "drivestyle/errors.hpp"
#include "drivestyle/regression.hpp"

namespace drivestyle {
namespace {

constexpr const char* kModule = "pipeline";

FrameIndex to_frames(double seconds, double rate) {
  return static_cast<FrameIndex>(std::llround(seconds * rate));
}

StyleCurve finish_curve(std::vector<double> times, std::vector<double> sle,
                        std::vector<double> sie) {
  StyleCurve c;
  c.times = std::move(times);
  c.sle = std::move(sle);
  c.sie = std::move(sie);
  for (std::size_t i = 0; i < c.sle.size(); ++i) {
    if (i == 0 || c.sle[i] > c.sle_max) {
      c.sle_max = c.sle[i];
      c.t_sle = c.times[i];
    }
  }
  return c;
}

std::vector<WeavingCluster> cluster_points(std::vector<CriticalPoint> points, double gap) {
  std::sort(points.begin(), points.end(),
            [](const CriticalPoint& a, const CriticalPoint& b) { return a.time < b.time; });
  std::vector<WeavingCluster> out;
  double last = 0.0;
  double weighted = 0.0;
  for (const auto& p : points) {
    if (out.empty() || p.time - last > gap) {
      if (!out.empty()) out.back().time = weighted / out.back().weight;
      out.push_back({});
      weighted = 0.0;
    }
    auto& c = out.back();
    c.sharpness = std::max(c.sharpness, p.sharpness);
    c.weight += p.sharpness;
    weighted += p.sharpness * p.time;
    ++c.members;
    last = p.time;
  }
  if (!out.empty()) out.back().time = weighted / out.back().weight;
  return out;
}

AgentSummary summarize(const AgentSeries& s, const AnalysisConfig& config, double rate,
                       FrameIndex window_frames, AlphaSelector& selector) {
  AgentSummary out;
  out.agent_id = s.closeness.agent_id;
  const auto& cl = s.closeness.values;
  const auto& dg = s.degree.values;
  if (cl.empty()) return out;
  out.run = {cl.front().frame, cl.back().frame};
  const std::size_t n = cl.size();
  if (n < kPolynomialDegree + 1) {
    out.detected.push_back(Style::kConservative);
    return out;
  }

  std::vector<double> t(n), vc(n), vd(n);
  for (std::size_t i = 0; i < n; ++i) {
    t[i] = static_cast<double>(cl[i].frame) / rate;
    vc[i] = cl[i].value;
    vd[i] = dg[i].value;
  }
  const std::size_t m = std::min<std::size_t>(n, static_cast<std::size_t>(window_frames));
  std::vector<double> sle_d(n), sie_d(n), sle_c(n), sie_c(n);
  std::vector<CriticalPoint> points;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t lo = std::min(k >= m / 2 ? k - m / 2 : 0, n - m);
    const std::span<const double> tw(t.data() + lo, m);
    const auto pd = fit(tw, std::span<const double>(vd.data() + lo, m), selector);
    const auto pc = fit(tw, std::span<const double>(vc.data() + lo, m), selector);
    sle_d[k] = std::abs(pd.beta[1] + 2.0 * pd.beta[2] * t[k]);
    sie_d[k] = std::abs(2.0 * pd.beta[2]);
    sle_c[k] = std::abs(pc.beta[1] + 2.0 * pc.beta[2] * t[k]);
    sie_c[k] = std::abs(2.0 * pc.beta[2]);
    for (const auto& cp : detect_weaving(pc, tw.front(), tw.back(), config.epsilon_s)) {
      points.push_back(cp);
    }
  }
  out.overspeeding = finish_curve(t, std::move(sle_d), std::move(sie_d));
  out.overtaking = finish_curve(std::move(t), std::move(sle_c), std::move(sie_c));

  const auto& th = config.thresholds;
  out.weaving = cluster_points(std::move(points), 2.0 * config.epsilon_s);
  for (auto& c : out.weaving) {
    out.weaving_sharpness_max = std::max(out.weaving_sharpness_max, c.sharpness);
    c.significant = c.sharpness > th.weaving_sharpness;
    if (c.significant) ++out.weaving_significant;
  }
  if (out.overspeeding.sle_max > th.degree) out.detected.push_back(Style::kOverspeeding);
  if (out.overtaking.sle_max > th.closeness) {
    out.detected.push_back(Style::kOvertakingOrSuddenLaneChange);
  }
  if (out.weaving_significant >= th.weaving_min_count) out.detected.push_back(Style::kWeaving);
  if (out.detected.empty()) {
    out.detected.push_back(Style::kConservative);
  } else {
    out.global_label = GlobalLabel::kAggressive;
  }
  return out;
}

nlohmann::json poly_json(const CentralityPolynomial& p) {
  return {{"beta", p.beta},
          {"t_start", p.t_start},
          {"t_end", p.t_end},
          {"alpha", p.alpha},
          {"condition_number", p.condition_number}};
}

nlohmann::json curve_json(const StyleCurve& c, double rate, bool with_samples) {
  nlohmann::json j = {{"sle_max", c.sle_max}, {"t_sle", c.t_sle}};
  if (!c.times.empty()) j["t_sle_frame"] = c.t_sle * rate;
  if (with_samples) {
    j["times"] = c.times;
    j["sle"] = c.sle;
    j["sie"] = c.sie;
  }
  return j;
}

nlohmann::json styles_json(const std::vector<Style>& styles) {
  nlohmann::json j = nlohmann::json::array();
  for (auto s : styles) j.push_back(std::string(to_string(s)));
  return j;
}

nlohmann::json points_json(const std::vector<CriticalPoint>& points) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& p : points) j.push_back({{"time", p.time}, {"sharpness", p.sharpness}});
  return j;
}

}  // namespace

std::optional<double> AgentSummary::weaving_time() const {
  double num = 0.0;
  double den = 0.0;
  for (const auto& c : weaving) {
    num += c.time * c.weight;
    den += c.weight;
  }
  if (!(den > 0.0)) return std::nullopt;
  return num / den;
}

std::vector<FrameWindow> analysis_windows(FrameIndex first, FrameIndex last, FrameIndex length,
                                          FrameIndex stride) {
  if (last < first) return {};
  if (length < 1 || stride < 1) {
    throw ContractViolation(kModule, "window length and stride must be positive");
  }
  if (last - first + 1 <= length) return {{first, last}};
  std::vector<FrameWindow> out;
  for (FrameIndex start = first;; start += stride) {
    const FrameIndex end = start + length - 1;
    if (end >= last) {
      out.push_back({std::max(first, last - length + 1), last});
      break;
    }
    out.push_back({start, end});
  }
  if (out.size() >= 2 && out[out.size() - 1].first == out[out.size() - 2].first) out.pop_back();
  return out;
}

AnalysisResult analyze(const TrajectoryTable& table, const AnalysisConfig& config,
                       const std::string& video_id) {
  config.validate();
  AnalysisResult r;
  r.video_id = video_id;
  r.frame_rate_hz = table.frame_rate_hz();
  r.config = config;
  r.config.frame_rate_hz = r.frame_rate_hz;
  if (table.frames().empty()) return r;

  const double rate = r.frame_rate_hz;
  const FrameWindow full{table.first_frame(), table.last_frame()};
  r.series = compute_series(table, config.mu, full, config.capacity);

  const FrameIndex window_frames =
      std::max<FrameIndex>(kPolynomialDegree + 1, to_frames(config.window_s, rate));
  const FrameIndex stride = std::max<FrameIndex>(1, to_frames(config.effective_stride_s(), rate));
  AlphaSelector selector(config.alpha);

  for (const auto& w : analysis_windows(full.first, full.last, window_frames, stride)) {
    for (const auto& [id, s] : r.series) {
      const auto dg = s.degree.slice(w);
      const auto cl = s.closeness.slice(w);
      if (cl.values.size() < kPolynomialDegree + 1) continue;
      ClassifyInputs in;
      in.agent_id = id;
      in.window = w;
      in.sample_times = sample_times(cl, rate);
      in.degree_poly = fit(dg, rate, selector);
      in.closeness_poly = fit(cl, rate, selector);
      in.weaving_set = detect_weaving(in.closeness_poly, in.sample_times.front(),
                                      in.sample_times.back(), config.epsilon_s);
      r.windows.push_back(classify(in, config.thresholds));
    }
  }
  for (const auto& [id, s] : r.series) {
    r.agents.push_back(summarize(s, config, rate, window_frames, selector));
  }
  return r;
}

std::vector<Prediction> predictions_from(const AnalysisResult& result) {
  std::vector<Prediction> out;
  const double rate = result.frame_rate_hz;
  for (const auto& a : result.agents) {
    auto frame_of = [&](const StyleCurve& c) -> std::optional<double> {
      if (c.times.empty()) return std::nullopt;
      return c.t_sle * rate;
    };
    const auto os = frame_of(a.overspeeding);
    const auto ot = frame_of(a.overtaking);
    std::optional<double> w;
    if (auto t = a.weaving_time()) w = *t * rate;
    out.push_back({{result.video_id, a.agent_id, ManeuverStyle::kOverspeeding}, os});
    out.push_back({{result.video_id, a.agent_id, ManeuverStyle::kOvertaking}, ot});
    out.push_back({{result.video_id, a.agent_id, ManeuverStyle::kSuddenLaneChange}, ot});
    out.push_back({{result.video_id, a.agent_id, ManeuverStyle::kWeaving}, w});
  }
  return out;
}

nlohmann::json report_to_json(const AnalysisResult& r) {
  const double rate = r.frame_rate_hz;
  nlohmann::json agents = nlohmann::json::array();
  for (const auto& a : r.agents) {
    nlohmann::json clusters = nlohmann::json::array();
    for (const auto& c : a.weaving) {
      clusters.push_back({{"time", c.time},
                          {"sharpness", c.sharpness},
                          {"members", c.members},
                          {"significant", c.significant}});
    }
    nlohmann::json weaving = {{"critical_points", clusters},
                              {"sle", a.weaving_significant},
                              {"sharpness_max", a.weaving_sharpness_max}};
    if (auto t = a.weaving_time()) {
      weaving["t_sle"] = *t;
      weaving["t_sle_frame"] = *t * rate;
    }
    agents.push_back({{"agent_id", a.agent_id},
                      {"first_frame", a.run.first},
                      {"last_frame", a.run.last},
                      {"global_label", std::string(to_string(a.global_label))},
                      {"detected", styles_json(a.detected)},
                      {"overspeeding", curve_json(a.overspeeding, rate, true)},
                      {"overtaking_or_sudden_lane_change", curve_json(a.overtaking, rate, true)},
                      {"weaving", std::move(weaving)}});
  }
  nlohmann::json windows = nlohmann::json::array();
  for (const auto& w : r.windows) {
    windows.push_back({
        {"agent_id", w.agent_id},
        {"first_frame", w.window.first},
        {"last_frame", w.window.last},
        {"t_start", w.t_start},
        {"t_end", w.t_end},
        {"degree_poly", poly_json(w.degree_poly)},
        {"closeness_poly", poly_json(w.closeness_poly)},
        {"overspeeding", curve_json(w.overspeeding, rate, true)},
        {"overtaking_or_sudden_lane_change", curve_json(w.overtaking, rate, true)},
        {"weaving",
         {{"critical_points", points_json(w.weaving.critical_points)},
          {"significant_count", w.weaving.significant_count},
          {"sle", w.weaving.sle},
          {"sie", w.weaving.sie}}},
        {"conservative",
         {{"likely", w.conservative.likely},
          {"degree_sle_max", w.conservative.degree_sle_max},
          {"closeness_sle_max", w.conservative.closeness_sle_max}}},
        {"detected", styles_json(w.detected)},
        {"global_label", std::string(to_string(w.global_label))},
    });
  }
  return {{"schema", "drivestyle.report"},
          {"schema_version", kReportSchemaVersion},
          {"video_id", r.video_id},
          {"frame_rate_hz", rate},
          {"config", to_json(r.config)},
          {"agents", std::move(agents)},
          {"windows", std::move(windows)}};
}

std::vector<Prediction> predictions_from_report(const nlohmann::json& doc) {
  auto fail = [](const std::string& what) { throw ValidationError(kModule, "report: " + what); };
  if (!doc.is_object() || doc.value("schema", "") != "drivestyle.report") {
    fail("not a drivestyle report");
  }
  if (doc.value("schema_version", 0) != kReportSchemaVersion) {
    fail("unsupported schema_version");
  }
  std::vector<Prediction> out;
  try {
    const auto video = doc.at("video_id").get<std::string>();
    for (const auto& a : doc.at("agents")) {
      const auto id = a.at("agent_id").get<std::string>();
      auto frame = [&](const char* key) -> std::optional<double> {
        const auto& e = a.at(key);
        if (!e.contains("t_sle_frame")) return std::nullopt;
        return e.at("t_sle_frame").get<double>();
      };
      const auto ot = frame("overtaking_or_sudden_lane_change");
      out.push_back({{video, id, ManeuverStyle::kOverspeeding}, frame("overspeeding")});
      out.push_back({{video, id, ManeuverStyle::kOvertaking}, ot});
      out.push_back({{video, id, ManeuverStyle::kSuddenLaneChange}, ot});
      out.push_back({{video, id, ManeuverStyle::kWeaving}, frame("weaving")});
    }
  } catch (const nlohmann::json::exception& e) {
    fail(e.what());
  }
  return out;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw ValidationError(kModule, "quantile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw ContractViolation(kModule, "quantile must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

CalibrationResult calibrate(std::span<const ScenarioConfig> scenarios,
                            const AnalysisConfig& config, const CalibrationOptions& options) {
  if (scenarios.empty()) throw ValidationError(kModule, "calibration scenario set is empty");
  if (!(options.headroom > 0.0) || !(options.floor > 0.0)) {
    throw ValidationError(kModule, "calibration headroom and floor must be positive");
  }
  CalibrationResult out;
  out.options = options;
  for (const auto& sc : scenarios) {
    const auto sim = run_scenario(sc);
    const auto res = analyze(sim.table, config, sc.name);
    // Strided window reports classify too; their fits are evaluated out to the
    // window edges, so their maxima can exceed the centered-fit curves.
    std::map<std::string, CalibrationSample> window_max;
    for (const auto& w : res.windows) {
      auto& m = window_max[w.agent_id];
      m.degree_sle_max = std::max(m.degree_sle_max, w.overspeeding.sle_max);
      m.closeness_sle_max = std::max(m.closeness_sle_max, w.overtaking.sle_max);
      for (const double sh : w.weaving.sie) {
        m.weaving_sharpness_max = std::max(m.weaving_sharpness_max, sh);
      }
    }
    for (const auto& a : res.agents) {
      const auto spawn = std::find_if(sc.agents.begin(), sc.agents.end(),
                                      [&](const AgentSpawn& s) { return s.id == a.agent_id; });
      if (spawn == sc.agents.end() || spawn->driver_class != DriverClass::kConservative) continue;
      if (a.overspeeding.times.empty()) continue;
      const auto& m = window_max[a.agent_id];
      out.samples.push_back({sc.name, a.agent_id,
                             std::max(a.overspeeding.sle_max, m.degree_sle_max),
                             std::max(a.overtaking.sle_max, m.closeness_sle_max),
                             std::max(a.weaving_sharpness_max, m.weaving_sharpness_max)});
    }
  }
  if (out.samples.empty()) {
    throw ValidationError(kModule, "calibration set has no conservative agents");
  }
  std::vector<double> d, c, w;
  for (const auto& s : out.samples) {
    d.push_back(s.degree_sle_max);
    c.push_back(s.closeness_sle_max);
    w.push_back(s.weaving_sharpness_max);
  }
  auto pick = [&](std::vector<double> v) {
    return std::max(options.floor, options.headroom * quantile(std::move(v), options.quantile));
  };
  out.thresholds.degree = pick(std::move(d));
  out.thresholds.closeness = pick(std::move(c));
  out.thresholds.weaving_sharpness = pick(std::move(w));
  out.thresholds.weaving_min_count = config.thresholds.weaving_min_count;
  return out;
}

nlohmann::json thresholds_to_json(const CalibrationResult& r) {
  std::vector<std::string> names;
  for (const auto& s : r.samples) {
    if (names.empty() || names.back() != s.scenario) names.push_back(s.scenario);
  }
  return {{"schema", "drivestyle.thresholds"},
          {"schema_version", kThresholdsSchemaVersion},
          {"thresholds",
           {{"degree", r.thresholds.degree},
            {"closeness", r.thresholds.closeness},
            {"weaving_sharpness", r.thresholds.weaving_sharpness},
            {"weaving_min_count", r.thresholds.weaving_min_count}}},
          {"calibration",
           {{"quantile", r.options.quantile},
            {"headroom", r.options.headroom},
            {"floor", r.options.floor},
            {"scenarios", names},
            {"conservative_agents", r.samples.size()}}}};
}

}  // namespace drivestyle
