// semloc: command-line front end for the localisation library.

#include <atomic>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "semloc/mqtt.hpp"
#include "semloc/semloc.hpp"

using namespace semloc;
using nlohmann::json;

namespace
{
std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

std::string data_path(const std::string& rel) { return std::string(SEMLOC_DATA_DIR) + "/" + rel; }

EngineConfig config_from(const std::string& path) { return path.empty() ? EngineConfig{} : load_config_file(path); }

std::string percent(double r)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", 100.0 * r);
  return buf;
}

// --- locate -----------------------------------------------------------------

/// Reads ranging messages from a distance matrix, a JSON array, or JSON lines.
std::vector<RangingMessage> read_distances(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw ValidationError("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();

  std::vector<RangingMessage> out;
  json doc;
  try
  {
    doc = json::parse(text);
  }
  catch (const json::parse_error&)
  {
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line))
      if (!line.empty() && line.front() != '#')
        out.push_back(parse_ranging_message(line));
    return out;
  }
  if (doc.is_object() && doc.contains("matrix"))
  {
    const auto m = study::load_distance_matrix(doc);
    for (std::size_t i = 0; i < m.objects.size(); ++i)
      for (std::size_t k = i + 1; k < m.objects.size(); ++k)
        if (auto d = m.metres(m.objects[i], m.objects[k]))
          out.push_back({{m.objects[i], m.objects[k], *d, 1, m.semantics}, 0.0});
    return out;
  }
  if (doc.is_array())
  {
    for (const auto& j : doc)
      out.push_back(parse_ranging_message(j.dump()));
    return out;
  }
  if (doc.is_object())
    return {parse_ranging_message(text)};
  throw ValidationError("'" + path + "' holds no ranging data");
}

int cmd_locate(const std::string& target, const std::string& sod_path, const std::string& distances,
               const std::string& config, const std::string& format)
{
  Engine engine(load_sod_file(sod_path), config_from(config));
  double now = 0.0;
  const auto msgs = read_distances(distances);
  for (const auto& m : msgs)
    now = std::max(now, m.timestamp.value_or(0.0));
  for (auto m : msgs)
  {
    if (!m.timestamp)
      m.timestamp = now;
    engine.ingest(m, now);
  }
  const auto spd = engine.evaluate(target, now);
  if (format == "json")
    std::cout << to_json(spd).dump(2) << "\n";
  else
    std::cout << spd.rendered << "\n";
  return 0;
}

// --- simulate / eval alignment ------------------------------------------------

NoiseModel noise_from(const std::string& path)
{
  return path.empty() ? NoiseModel::testbed_default() : load_noise_model(detail::read_json_file(path));
}

int cmd_simulate(const std::string& scenario_path, const std::string& noise, std::uint64_t seed,
                 std::optional<int> steps, bool raw, const std::string& out_path)
{
  auto scenario = load_rail_scenario(detail::read_json_file(scenario_path));
  if (steps)
    scenario.step_count = *steps;
  const auto trace = run_rail_scenario(scenario, noise_from(noise), seed, raw);
  std::ofstream file;
  if (!out_path.empty())
  {
    file.open(out_path);
    if (!file)
      throw ValidationError("cannot write '" + out_path + "'");
  }
  std::ostream& os = out_path.empty() ? std::cout : file;
  for (const auto& e : trace)
    os << to_json(e, raw).dump() << "\n";
  return 0;
}

int cmd_eval_alignment(const std::string& scenario_path, const std::string& noise, std::uint64_t seed,
                       std::string b, std::string c, double threshold, const std::string& format)
{
  const auto scenario = load_rail_scenario(detail::read_json_file(scenario_path));
  if (scenario.fixed_nodes.size() < 2)
    throw ValidationError("scenario needs at least two fixed nodes");
  if (b.empty())
    b = scenario.fixed_nodes[0].id;
  if (c.empty())
    c = scenario.fixed_nodes[1].id;
  auto centre = [&](const std::string& id) {
    for (const auto& n : scenario.fixed_nodes)
      if (n.id == id)
        return *n.centre;
    throw ValidationError("scenario has no fixed node '" + id + "'");
  };
  AlignmentReportConfig cfg{b, c, threshold};
  cfg.max_plausible = scenario.max_plausible;
  const auto r = alignment_report(run_rail_scenario(scenario, noise_from(noise), seed), centre(b), centre(c), cfg);
  if (format == "json")
  {
    std::cout << to_json(r).dump(2) << "\n";
    return 0;
  }
  std::printf("samples %zu, outliers removed %zu\n", r.total_samples, r.removed_outliers);
  std::printf("%-16s %9s %9s | %10s %12s | %10s %12s\n", "bucket", "positions", "samples", "orig.ok", "orig.undec",
              "rev.ok", "rev.undec");
  for (auto bk : {AngleBucket::AboveThreshold, AngleBucket::BelowThreshold, AngleBucket::VerySmall})
  {
    const auto& x = r.bucket(bk);
    std::printf("%-16s %9zu %9zu | %10s %12s | %10s %12s\n", std::string(to_string(bk)).c_str(), x.positions,
                x.samples, percent(BucketReport::rate(x.original.success, x.samples)).c_str(),
                percent(BucketReport::rate(x.original.undecidable, x.samples)).c_str(),
                percent(BucketReport::rate(x.revised.success, x.samples)).c_str(),
                percent(BucketReport::rate(x.revised.undecidable, x.samples)).c_str());
  }
  return 0;
}

// --- eval study -------------------------------------------------------------

int cmd_eval_study(const std::string& data, const std::string& semantics, bool r2, bool include_nr, bool all,
                   const std::string& format)
{
  const auto ds = study::ingest_study(data);
  std::vector<DistanceSemantics> sems;
  if (semantics.empty())
    sems = {DistanceSemantics::InterCentre, DistanceSemantics::EdgeToEdge};
  else
    sems = {parse_semantics(semantics)};
  std::vector<std::pair<bool, bool>> combos;  // (r2, include_nr)
  if (all)
    combos = {{false, false}, {false, true}, {true, false}, {true, true}};
  else
    combos = {{r2, include_nr}};

  json rows = json::array();
  if (format != "json")
    std::printf("%-13s %-3s %-3s %12s %8s\n", "semantics", "R2", "NR", "matches", "rate");
  for (auto sem : sems)
    for (auto [nearest, nr] : combos)
    {
      json row{{"semantics", to_string(sem)}, {"r2", nearest}, {"include_nr", nr}};
      std::string counts = "n/a", rate = "n/a";
      try
      {
        const auto a = study::agreement_rate(ds, {.include_nr = nr, .nearest_only = nearest, .semantics = sem, .situations = {}});
        row["matches"] = a.matches;
        row["comparisons"] = a.comparisons;
        row["rate"] = a.rate();
        counts = std::to_string(a.matches) + "/" + std::to_string(a.comparisons);
        rate = percent(a.rate());
      }
      catch (const ValidationError& e)
      {
        // Selected explicitly: the missing data is an error. In the overview it is a blank cell.
        if (!semantics.empty() && !all)
          throw;
        row["error"] = e.what();
      }
      rows.push_back(row);
      if (format != "json")
        std::printf("%-13s %-3s %-3s %12s %8s\n", std::string(to_string(sem)).c_str(), nearest ? "yes" : "no",
                    nr ? "yes" : "no", counts.c_str(), rate.c_str());
    }
  if (format == "json")
    std::cout << rows.dump(2) << "\n";
  return 0;
}

// --- serve ------------------------------------------------------------------

int cmd_serve(const std::string& sod_path, const std::string& config, const std::string& bus_url,
              const std::string& replay, double duration)
{
  Engine engine(load_sod_file(sod_path), config_from(config));
  auto print = [](const std::string& topic, const std::string& payload) {
    std::cout << topic << " " << payload << std::endl;
  };

  if (bus_url == "loopback")
  {
    if (replay.empty())
      throw ValidationError("serve: the loopback bus needs --replay <session.jsonl|->");
    LoopbackBus bus;
    ManualClock clock;
    EngineService service(bus, engine, [&] { return clock.now(); });
    service.start();
    bus.subscribe("spd/#", print);
    std::ifstream file;
    if (replay != "-")
    {
      file.open(replay);
      if (!file)
        throw ValidationError("cannot open '" + replay + "'");
    }
    replay_session(replay == "-" ? std::cin : file, bus, service, clock);
    const auto& c = engine.counters();
    std::cerr << "accepted " << c.accepted << ", malformed " << c.malformed << ", unknown " << c.unknown_id
              << ", implausible " << c.implausible << ", out-of-order " << c.out_of_order << ", published "
              << service.counters().published << "\n";
    return 0;
  }

  mqtt::Client client(mqtt::parse_url(bus_url), {});
  EngineService service(client, engine, wall_clock_seconds);
  service.start();
  client.subscribe("spd/#", print);
  client.start();
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::thread timer;
  if (duration > 0)
    timer = std::thread([duration] {
      const auto until = std::chrono::steady_clock::now() + std::chrono::duration<double>(duration);
      while (!g_stop && std::chrono::steady_clock::now() < until)
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
      g_stop = true;
    });
  service.run(g_stop);
  if (timer.joinable())
    timer.join();
  client.stop();
  return 0;
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"semantic position descriptions from ranging data"};
  app.require_subcommand(1);

  std::string target, sod, distances, config, format = "table";
  auto* locate = app.add_subcommand("locate", "describe where an object is from a distances file");
  locate->add_option("target", target, "object id")->required();
  locate->add_option("--sod", sod, "object database (JSON)")->required();
  locate->add_option("--distances", distances, "distance matrix, JSON array or JSON lines of ranging messages")
      ->required();
  locate->add_option("--config", config, "engine configuration (JSON)");
  locate->add_option("--format", format, "table|json")->check(CLI::IsMember({"table", "json"}));

  auto* simulate = app.add_subcommand("simulate", "ranging simulation");
  simulate->require_subcommand(1);
  auto* rail = simulate->add_subcommand("rail", "move a mobile node along a rail and emit a JSON-lines trace");
  std::string scenario = data_path("sim/scenario_rail.json"), noise, out;
  std::uint64_t seed = 1;
  std::optional<int> steps;
  bool raw = false;
  rail->add_option("--scenario", scenario, "rail scenario (JSON)");
  rail->add_option("--noise", noise, "noise model (JSON); default is the built-in testbed model");
  rail->add_option("--seed", seed, "random seed");
  rail->add_option("--steps", steps, "override the number of steps");
  rail->add_flag("--raw", raw, "include every raw sample");
  rail->add_option("--out", out, "write the trace here instead of stdout");

  auto* eval = app.add_subcommand("eval", "evaluation reports");
  eval->require_subcommand(1);
  auto* study_cmd = eval->add_subcommand("study", "agreement between the algorithm and study participants");
  std::string data = data_path("study/study.json"), semantics;
  bool r2 = false, include_nr = false;
  study_cmd->add_option("--data", data, "study manifest");
  study_cmd->add_option("--semantics", semantics, "edge|centre; default: both");
  study_cmd->add_flag("--r2", r2, "compare only the reference kept by nearest-only selection");
  study_cmd->add_flag("--include-nr", include_nr, "count 'no relation' answers");
  study_cmd->add_option("--format", format, "table|json")->check(CLI::IsMember({"table", "json"}));

  auto* align = eval->add_subcommand("alignment", "alignment success per real-angle bucket along a rail");
  std::string align_scenario = data_path("sim/scenario_collinear.json"), node_b, node_c;
  double threshold = 30.0;
  align->add_option("--scenario", align_scenario, "rail scenario (JSON)");
  align->add_option("--noise", noise, "noise model (JSON)");
  align->add_option("--seed", seed, "random seed");
  align->add_option("--b", node_b, "first reference node (default: first fixed node)");
  align->add_option("--c", node_c, "second reference node (default: second fixed node)");
  align->add_option("--threshold", threshold, "angle threshold in degrees");
  align->add_option("--format", format, "table|json")->check(CLI::IsMember({"table", "json"}));

  auto* serve = app.add_subcommand("serve", "run the engine on a bus");
  std::string bus = "loopback", replay;
  double duration = 0;
  serve->add_option("--sod", sod, "object database (JSON)")->required();
  serve->add_option("--config", config, "engine configuration (JSON)");
  serve->add_option("--bus", bus, "loopback or mqtt://host[:port]");
  serve->add_option("--replay", replay, "session to replay on the loopback bus (- for stdin)");
  serve->add_option("--duration", duration, "stop after this many seconds (mqtt; 0 = until signalled)");

  auto* cfg_cmd = app.add_subcommand("config", "configuration helpers");
  cfg_cmd->require_subcommand(1);
  auto* show = cfg_cmd->add_subcommand("show", "print the effective configuration");
  show->add_option("--config", config, "configuration overlay (JSON)");

  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError& e)
  {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try
  {
    if (*locate)
      return cmd_locate(target, sod, distances, config, format);
    if (*rail)
      return cmd_simulate(scenario, noise, seed, steps, raw, out);
    if (*study_cmd)
      return cmd_eval_study(data, semantics, r2, include_nr, !r2 && !include_nr, format);
    if (*align)
      return cmd_eval_alignment(align_scenario, noise, seed, node_b, node_c, threshold, format);
    if (*serve)
      return cmd_serve(sod, config, bus, replay, duration);
    if (*show)
    {
      std::cout << to_json(config_from(config)).dump(2) << "\n";
      return 0;
    }
  }
  catch (const ValidationError& e)
  {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  catch (const std::exception& e)
  {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
