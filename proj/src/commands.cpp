#include "mixtraffic/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <thread>

#include "mixtraffic/csv.hpp"

namespace mixtraffic {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

ordered_json num(double v) {
  if (!std::isfinite(v)) return nullptr;
  return round_to_printed(v);
}

std::ofstream open_output(const fs::path& path) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  return out;
}

void write_json(const fs::path& path, const ordered_json& j) {
  auto out = open_output(path);
  out << j.dump(2) << '\n';
}

void write_config(const RunConfig& config) { write_json(config.output_dir / "config.json", config.to_json()); }

struct ResponseCell {
  Strategy strategy;
  int m_max;
  std::optional<SegmentResponse> response;
};

std::vector<ResponseCell> build_responses(const RunConfig& config) {
  std::vector<ResponseCell> cells;
  for (auto s : config.strategies) {
    for (int m : config.mps) cells.push_back({s, m, std::nullopt});
  }
  const FrequencyGrid grid = FrequencyGrid::log_spaced(config.analyze.omega_lo, config.analyze.omega_hi,
                                                       config.analyze.n_freq);
  parallel_for(cells.size(), config.jobs, [&](std::size_t i) {
    cells[i].response.emplace(config.params, cells[i].strategy, cells[i].m_max, grid);
  });
  return cells;
}

AnalyzeResult summarize(const RunConfig& config, const std::vector<ResponseCell>& cells) {
  AnalyzeResult out;
  for (const auto& cell : cells) {
    for (double p : config.penetration_rates) {
      const StabilityReport r = cell.response->evaluate(p, config.analyze.n);
      out.verdicts.push_back({cell.strategy, p, cell.m_max, config.analyze.n, r.peak, r.argmax_omega, r.stable});
    }
    out.critical.push_back({cell.strategy, cell.m_max,
                            critical_penetration(*cell.response, config.analyze.n, config.analyze.critical_step)});
  }
  return out;
}

void write_bode(const RunConfig& config, const std::vector<ResponseCell>& cells) {
  const int max_m = config.mps.empty() ? 2 : config.mps.back();
  if (config.format == OutputFormat::Csv) {
    auto out = open_output(config.output_dir / "bode.csv");
    CsvWriter csv(out);
    std::vector<std::string> header{"topology", "M", "p", "omega", "log_magnitude", "magnitude", "g_hdv", "g_cav"};
    for (int m = 2; m <= max_m; ++m) header.push_back("g_platoon_" + std::to_string(m));
    csv.header(header);
    for (const auto& cell : cells) {
      for (double p : config.penetration_rates) {
        const StabilityReport r = cell.response->evaluate(p, config.analyze.n);
        for (std::size_t i = 0; i < r.omegas.size(); ++i) {
          const auto& g = r.magnitudes[i];
          csv.field(to_string(cell.strategy)).field(cell.m_max).field(p).field(r.omegas[i]);
          csv.field(r.log_magnitude[i]).field(std::exp(r.log_magnitude[i])).field(g.hdv).field(g.cav);
          for (int m = 2; m <= max_m; ++m) {
            if (m <= cell.m_max) {
              csv.field(g.platoon.at(m));
            } else {
              csv.empty_field();
            }
          }
          csv.end_row();
        }
      }
    }
    return;
  }
  ordered_json records = ordered_json::array();
  for (const auto& cell : cells) {
    for (double p : config.penetration_rates) {
      const StabilityReport r = cell.response->evaluate(p, config.analyze.n);
      ordered_json rec{{"topology", to_string(cell.strategy)}, {"M", cell.m_max}, {"p", num(p)}};
      ordered_json omega = ordered_json::array(), l = ordered_json::array(), mag = ordered_json::array();
      ordered_json hdv = ordered_json::array(), cav = ordered_json::array(), platoon = ordered_json::object();
      for (std::size_t i = 0; i < r.omegas.size(); ++i) {
        omega.push_back(num(r.omegas[i]));
        l.push_back(num(r.log_magnitude[i]));
        mag.push_back(num(std::exp(r.log_magnitude[i])));
        hdv.push_back(num(r.magnitudes[i].hdv));
        cav.push_back(num(r.magnitudes[i].cav));
        for (const auto& [m, g] : r.magnitudes[i].platoon) platoon[std::to_string(m)].push_back(num(g));
      }
      rec["omega"] = omega;
      rec["log_magnitude"] = l;
      rec["magnitude"] = mag;
      rec["g_hdv"] = hdv;
      rec["g_cav"] = cav;
      rec["g_platoon"] = platoon;
      records.push_back(rec);
    }
  }
  write_json(config.output_dir / "bode.json", records);
}

void write_probabilities(const RunConfig& config) {
  struct Row {
    double p;
    int m_max;
    std::string segment;
    int m;
    double prob;
  };
  std::vector<Row> rows;
  for (int mm : config.mps) {
    for (double p : config.penetration_rates) {
      const SegmentProbabilities s = segment_probabilities(p, mm);
      rows.push_back({p, mm, "platoon", mm, s.p_size_max});
      for (const auto& [m, prob] : s.p_size) rows.push_back({p, mm, "platoon", m, prob});
      rows.push_back({p, mm, "cav", 1, s.p_cav});
      rows.push_back({p, mm, "hdv", 1, s.p_hdv});
    }
  }
  if (config.format == OutputFormat::Csv) {
    auto out = open_output(config.output_dir / "probabilities.csv");
    CsvWriter csv(out);
    csv.header({"M", "p", "segment", "m", "probability"});
    for (const auto& r : rows) {
      csv.field(r.m_max).field(r.p).field(r.segment).field(r.m).field(r.prob);
      csv.end_row();
    }
    return;
  }
  ordered_json arr = ordered_json::array();
  for (const auto& r : rows) {
    arr.push_back({{"M", r.m_max}, {"p", num(r.p)}, {"segment", r.segment}, {"m", r.m}, {"probability", num(r.prob)}});
  }
  write_json(config.output_dir / "probabilities.json", arr);
}

void write_trajectory_rows(CsvWriter& csv, const Trajectory& traj) {
  for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
    const auto& snap = traj.snapshots[k];
    for (int id = 1; id <= traj.vehicle_count(); ++id) {
      const auto& v = snap[static_cast<std::size_t>(id)];
      csv.field(traj.times[k]).field(id).field(to_string(traj.composition.of(id)));
      csv.field(v.position).field(v.velocity).field(v.acceleration);
      csv.end_row();
    }
  }
}

ordered_json trajectory_json(const Trajectory& traj) {
  ordered_json rows = ordered_json::array();
  for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
    for (int id = 1; id <= traj.vehicle_count(); ++id) {
      const auto& v = traj.snapshots[k][static_cast<std::size_t>(id)];
      rows.push_back({num(traj.times[k]), id, to_string(traj.composition.of(id)), num(v.position), num(v.velocity),
                      num(v.acceleration)});
    }
  }
  return {{"columns", {"t", "vehicle_id", "class", "position", "velocity", "acceleration"}}, {"rows", rows}};
}

ordered_json metrics_json(const MetricsReport& m) {
  ordered_json peak = ordered_json::array();
  for (double d : m.peak_deviation) peak.push_back(num(d));
  return {{"sd", num(m.sd)},
          {"mad", num(m.mad)},
          {"sd_normalized", num(m.sd_normalized)},
          {"mad_normalized", num(m.mad_normalized)},
          {"peak_deviation", peak}};
}

SimConfig cell_config(const RunConfig& config, Strategy s, int m_max, double p, std::uint64_t seed) {
  SimConfig sc = config.sim;
  sc.strategy = s;
  sc.m_max = m_max;
  sc.p = p;
  sc.seed = seed;
  sc.params = config.params;
  return sc;
}

}  // namespace

void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& task) {
  if (count == 0) return;
  std::size_t workers = jobs > 0 ? static_cast<std::size_t>(jobs) : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, count);
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          task(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  pool.clear();
  if (error) std::rethrow_exception(error);
}

AnalyzeResult analyze_grid(const RunConfig& config) { return summarize(config, build_responses(config)); }

SweepCell aggregate(const std::vector<SweepRun>& runs) {
  SweepCell c{};
  if (!runs.empty()) {
    c.strategy = runs.front().strategy;
    c.m_max = runs.front().m_max;
    c.p = runs.front().p;
  }
  c.seeds = static_cast<int>(runs.size());
  const double nan = std::numeric_limits<double>::quiet_NaN();
  c.sd_mean = c.sd_min = c.sd_max = c.mad_mean = c.mad_min = c.mad_max = nan;
  c.sd_normalized_mean = c.mad_normalized_mean = nan;
  int ok = 0;
  double sd_sum = 0, mad_sum = 0, sdn_sum = 0, madn_sum = 0;
  for (const auto& r : runs) {
    if (r.status != "ok") {
      ++c.failures;
      continue;
    }
    const auto& m = r.metrics;
    if (ok == 0) {
      c.sd_min = c.sd_max = m.sd;
      c.mad_min = c.mad_max = m.mad;
    }
    c.sd_min = std::min(c.sd_min, m.sd);
    c.sd_max = std::max(c.sd_max, m.sd);
    c.mad_min = std::min(c.mad_min, m.mad);
    c.mad_max = std::max(c.mad_max, m.mad);
    sd_sum += m.sd;
    mad_sum += m.mad;
    sdn_sum += m.sd_normalized;
    madn_sum += m.mad_normalized;
    ++ok;
  }
  if (ok > 0) {
    c.sd_mean = sd_sum / ok;
    c.mad_mean = mad_sum / ok;
    c.sd_normalized_mean = sdn_sum / ok;
    c.mad_normalized_mean = madn_sum / ok;
  }
  return c;
}

SweepResult run_sweep(const RunConfig& config) {
  SweepResult out;
  for (auto s : config.strategies) {
    for (int m : config.mps) {
      for (double p : config.penetration_rates) {
        for (auto seed : config.seeds) out.runs.push_back({s, m, p, seed, "ok", {}});
      }
    }
  }
  parallel_for(out.runs.size(), config.jobs, [&](std::size_t i) {
    auto& run = out.runs[i];
    try {
      run.metrics = compute_metrics(mixtraffic::run(cell_config(config, run.strategy, run.m_max, run.p, run.seed)));
    } catch (const CollisionError&) {
      run.status = "collision";
    } catch (const SynthesisError&) {
      run.status = "synthesis";
    }
  });
  const std::size_t per_cell = config.seeds.size();
  if (per_cell == 0) return out;
  for (std::size_t i = 0; i < out.runs.size(); i += per_cell) {
    out.cells.push_back(aggregate({out.runs.begin() + static_cast<std::ptrdiff_t>(i),
                                   out.runs.begin() + static_cast<std::ptrdiff_t>(i + per_cell)}));
  }
  return out;
}

int cmd_analyze(const RunConfig& config, std::ostream& log) {
  std::vector<ResponseCell> cells;
  try {
    cells = build_responses(config);
  } catch (const SynthesisError& e) {
    log << "analyze: " << e.what() << '\n';
    return kExitSynthesisFailure;
  }
  const AnalyzeResult result = summarize(config, cells);

  write_config(config);
  write_bode(config, cells);
  write_probabilities(config);

  ordered_json records = ordered_json::array();
  for (const auto& v : result.verdicts) {
    records.push_back({{"topology", to_string(v.strategy)},
                       {"p", num(v.p)},
                       {"M", v.m_max},
                       {"N", v.n},
                       {"peak_L", num(v.peak_log_magnitude)},
                       {"argmax_omega", num(v.argmax_omega)},
                       {"stable", v.stable},
                       {"tolerance", kStabilityTolerance}});
  }
  write_json(config.output_dir / "verdicts.json",
             {{"config", config.to_json()}, {"tolerance", kStabilityTolerance}, {"records", records}});

  ordered_json critical = ordered_json::array();
  for (const auto& c : result.critical) {
    critical.push_back({{"topology", to_string(c.strategy)},
                        {"M", c.m_max},
                        {"step", num(config.analyze.critical_step)},
                        {"critical_p", c.critical_p ? num(*c.critical_p) : ordered_json(nullptr)}});
  }
  write_json(config.output_dir / "critical.json", {{"config", config.to_json()}, {"records", critical}});

  for (const auto& c : result.critical) {
    log << to_string(c.strategy) << " M=" << c.m_max << " critical p="
        << (c.critical_p ? format_number(*c.critical_p) : std::string("none")) << '\n';
  }
  return kExitOk;
}

int cmd_simulate(const RunConfig& config, std::ostream& log) {
  SimConfig sc = config.sim;
  sc.params = config.params;
  std::optional<Simulator> sim;
  try {
    sim.emplace(sc);
  } catch (const SynthesisError& e) {
    log << "simulate: " << e.what() << '\n';
    return kExitSynthesisFailure;
  }

  write_config(config);
  std::shared_ptr<const Trajectory> traj;
  std::optional<CollisionError> collision;
  try {
    traj = std::make_shared<const Trajectory>(sim->run());
  } catch (const CollisionError& e) {
    collision = e;
    traj = e.partial();
  }

  if (config.format == OutputFormat::Csv) {
    auto out = open_output(config.output_dir / "trajectory.csv");
    CsvWriter csv(out);
    csv.header({"t", "vehicle_id", "class", "position", "velocity", "acceleration"});
    write_trajectory_rows(csv, *traj);
    if (collision) {
      out << "# abort,collision,t=" << format_number(collision->time()) << ",vehicle_id=" << collision->vehicle_id()
          << '\n';
    }
  } else {
    ordered_json j = trajectory_json(*traj);
    if (collision) j["abort"] = {{"reason", "collision"}, {"t", num(collision->time())}, {"vehicle_id", collision->vehicle_id()}};
    write_json(config.output_dir / "trajectory.json", j);
  }

  ordered_json metrics = metrics_json(compute_metrics(*traj));
  metrics["config"] = config.to_json();
  if (collision) {
    metrics["aborted"] = {{"reason", "collision"}, {"t", num(collision->time())}, {"vehicle_id", collision->vehicle_id()}};
  }
  write_json(config.output_dir / "metrics.json", metrics);

  if (collision) {
    log << "simulate: " << collision->what() << '\n';
    return kExitCollision;
  }
  log << "simulate: sd=" << format_number(metrics["sd"].get<double>())
      << " mad=" << format_number(metrics["mad"].get<double>()) << '\n';
  return kExitOk;
}

int cmd_sweep(const RunConfig& config, std::ostream& log) {
  const SweepResult result = run_sweep(config);
  write_config(config);

  if (config.format == OutputFormat::Csv) {
    auto out = open_output(config.output_dir / "sweep.csv");
    CsvWriter csv(out);
    csv.header({"topology", "M", "p", "seeds", "failures", "sd_mean", "sd_min", "sd_max", "mad_mean", "mad_min",
                "mad_max", "sd_normalized_mean", "mad_normalized_mean"});
    for (const auto& c : result.cells) {
      csv.field(to_string(c.strategy)).field(c.m_max).field(c.p).field(c.seeds).field(c.failures);
      csv.field(c.sd_mean).field(c.sd_min).field(c.sd_max).field(c.mad_mean).field(c.mad_min).field(c.mad_max);
      csv.field(c.sd_normalized_mean).field(c.mad_normalized_mean);
      csv.end_row();
    }
    auto runs_out = open_output(config.output_dir / "sweep_runs.csv");
    CsvWriter runs(runs_out);
    runs.header({"topology", "M", "p", "seed", "status", "sd", "mad", "sd_normalized", "mad_normalized"});
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (const auto& r : result.runs) {
      const bool ok = r.status == "ok";
      runs.field(to_string(r.strategy)).field(r.m_max).field(r.p).field(static_cast<long long>(r.seed)).field(r.status);
      runs.field(ok ? r.metrics.sd : nan).field(ok ? r.metrics.mad : nan);
      runs.field(ok ? r.metrics.sd_normalized : nan).field(ok ? r.metrics.mad_normalized : nan);
      runs.end_row();
    }
  } else {
    ordered_json cells = ordered_json::array();
    for (const auto& c : result.cells) {
      cells.push_back({{"topology", to_string(c.strategy)},
                       {"M", c.m_max},
                       {"p", num(c.p)},
                       {"seeds", c.seeds},
                       {"failures", c.failures},
                       {"sd_mean", num(c.sd_mean)},
                       {"sd_min", num(c.sd_min)},
                       {"sd_max", num(c.sd_max)},
                       {"mad_mean", num(c.mad_mean)},
                       {"mad_min", num(c.mad_min)},
                       {"mad_max", num(c.mad_max)},
                       {"sd_normalized_mean", num(c.sd_normalized_mean)},
                       {"mad_normalized_mean", num(c.mad_normalized_mean)}});
    }
    write_json(config.output_dir / "sweep.json", {{"config", config.to_json()}, {"cells", cells}});
  }

  int failures = 0;
  for (const auto& c : result.cells) failures += c.failures;
  log << "sweep: " << result.cells.size() << " cells, " << result.runs.size() << " runs, " << failures
      << " failed\n";
  return kExitOk;
}

}  // namespace mixtraffic
