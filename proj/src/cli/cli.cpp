#include "erupt/cli.hpp"

#include <csignal>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "erupt/collision/robot_collision.hpp"
#include "erupt/json_codec.hpp"
#include "erupt/motion_plan.hpp"
#include "erupt/server/network.hpp"
#include "erupt/urdf.hpp"

namespace erupt::cli
{
namespace
{
/// Bad flags, unreadable inputs: exit 2.
struct UsageError : std::runtime_error
{
  using std::runtime_error::runtime_error;
};

std::shared_ptr<const RobotModel> loadModelOrUsage(const std::string& path)
{
  try
  {
    return std::make_shared<const RobotModel>(loadUrdfFile(path));
  }
  catch (const Error& e)
  {
    throw UsageError("cannot load URDF '" + path + "': " + e.what());
  }
}

json::SceneDocument loadSceneOrUsage(const std::string& path)
{
  try
  {
    return json::loadSceneFile(path);
  }
  catch (const Error& e)
  {
    throw UsageError(e.what());
  }
}

Eigen::VectorXd toVector(const std::vector<double>& v)
{
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void writeFile(const std::string& path, const std::string& text)
{
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text) || !out.flush())
    throw UsageError("cannot write '" + path + "'");
}

std::string readFile(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw UsageError("cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------- serve

struct ServeOptions
{
  std::string urdf;
  std::string scene;
  std::uint16_t tcp_port = protocol::kDefaultTcpPort;
  std::uint16_t ws_port = protocol::kDefaultWsPort;
  std::string bind = "0.0.0.0";
  std::string static_dir;
  std::string log_level = "info";
  std::string mirror_file;
  double playback_rate = 1.0;
};

int serve(const ServeOptions& o, std::ostream& out)
{
  spdlog::set_level(spdlog::level::from_str(o.log_level));
  server::ServerConfig config;
  config.model = loadModelOrUsage(o.urdf);
  if (!o.scene.empty())
    config.scene = loadSceneOrUsage(o.scene);
  config.seed = seedFromEnvironment();
  config.mirror_file = o.mirror_file;
  config.playback_rate = o.playback_rate;
  if (!o.static_dir.empty() && !std::filesystem::is_directory(o.static_dir))
    throw UsageError("--static-dir '" + o.static_dir + "' is not a directory");

  std::unique_ptr<server::ServerCore> core;
  try
  {
    core = std::make_unique<server::ServerCore>(config);
  }
  catch (const Error& e)
  {
    throw UsageError(std::string("bad server configuration: ") + e.what());
  }
  server::NetworkConfig net;
  net.bind_address = o.bind;
  net.tcp_port = o.tcp_port;
  net.ws_port = o.ws_port;
  net.static_dir = o.static_dir;
  server::NetworkServer network(*core, net);
  try
  {
    network.start();
  }
  catch (const Error& e)
  {
    throw UsageError(e.what());
  }
  out << "erupt server '" << config.model->name() << "' listening on tcp://" << o.bind << ":" << network.tcpPort()
      << " and ws://" << o.bind << ":" << network.wsPort() << "/ws";
  if (!o.static_dir.empty())
    out << " (static files from " << o.static_dir << ")";
  out << std::endl;

  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  int received = 0;
  sigwait(&signals, &received);
  out << "received " << (received == SIGINT ? "SIGINT" : "SIGTERM") << ", shutting down" << std::endl;
  network.stop("server shutting down");
  core->shutdown();
  return kExitOk;
}

// ---------------------------------------------------------------- plan

struct PlanOptions
{
  std::string urdf;
  std::string scene;
  std::string request_file;
  std::string group;
  std::vector<double> start;
  std::vector<double> goal;
  std::vector<double> goal_pose;
  bool position_only = false;
  std::string planner;
  int attempts = 0;
  double time = 0.0;
  double edge_step = 0.0;
  int shortcut = -1;
  std::optional<std::uint64_t> seed;
  std::string output;
  std::string trajectory_out;
};

MotionPlanRequest buildRequest(const PlanOptions& o, const RobotModel& model, const json::SceneDocument& scene)
{
  MotionPlanRequest r;
  bool have_start = false;
  bool have_goal = false;
  if (!o.request_file.empty())
  {
    try
    {
      r = json::decodePlanRequest(json::Json::parse(readFile(o.request_file)));
    }
    catch (const json::Json::exception& e)
    {
      throw UsageError("request file is not valid JSON: " + std::string(e.what()));
    }
    catch (const Error& e)
    {
      throw UsageError("bad request file: " + std::string(e.what()));
    }
    have_start = have_goal = true;
  }
  else
  {
    r.group = model.defaultGroupName();
  }
  if (!o.group.empty())
    r.group = o.group;
  if (!o.start.empty())
  {
    r.start = JointState(r.group, toVector(o.start));
    have_start = true;
  }
  else if (!have_start)
  {
    if (!scene.robot_state)
      throw UsageError("no --start given and the scene stores no robot_state");
    r.start = *scene.robot_state;
    have_start = true;
  }
  if (!o.goal.empty() && !o.goal_pose.empty())
    throw UsageError("--goal and --goal-pose are exclusive");
  if (!o.goal.empty())
  {
    r.goal = JointState(r.group, toVector(o.goal));
    have_goal = true;
  }
  if (!o.goal_pose.empty())
  {
    if (o.goal_pose.size() != 3 && o.goal_pose.size() != 7)
      throw UsageError("--goal-pose takes x,y,z or x,y,z,qw,qx,qy,qz");
    PoseGoal pg;
    pg.pose.position = Eigen::Vector3d(o.goal_pose[0], o.goal_pose[1], o.goal_pose[2]);
    if (o.goal_pose.size() == 7)
      pg.pose.orientation = Eigen::Quaterniond(o.goal_pose[3], o.goal_pose[4], o.goal_pose[5], o.goal_pose[6]).normalized();
    pg.position_only = o.position_only || o.goal_pose.size() == 3;
    r.goal = pg;
    have_goal = true;
  }
  if (!have_goal)
    throw UsageError("a goal is required: --goal, --goal-pose or --request");
  if (!o.planner.empty())
    r.planner_id = o.planner;
  if (o.attempts > 0)
    r.num_attempts = o.attempts;
  if (o.time > 0.0)
    r.max_planning_time = o.time;
  if (o.edge_step > 0.0)
    r.edge_step = o.edge_step;
  if (o.shortcut >= 0)
    r.shortcut_iterations = o.shortcut;
  if (o.seed)
    r.seed = o.seed;
  else if (!r.seed)
    r.seed = seedFromEnvironment();
  try
  {
    r.validate();
  }
  catch (const Error& e)
  {
    throw UsageError(e.what());
  }
  return r;
}

int plan(const PlanOptions& o, std::ostream& out)
{
  const auto model = loadModelOrUsage(o.urdf);
  json::SceneDocument scene;
  if (!o.scene.empty())
    scene = loadSceneOrUsage(o.scene);
  const MotionPlanRequest request = buildRequest(o, *model, scene);

  PlanningScene planning_scene(model);
  try
  {
    for (const auto& object : scene.objects)
      planning_scene.addObject(object);
  }
  catch (const Error& e)
  {
    throw UsageError("scene rejected: " + std::string(e.what()));
  }
  const MotionPlanResponse response = plan(request, planning_scene.snapshot(), *model);

  const std::string text = json::encode(response).dump(2) + "\n";
  if (o.output.empty())
    out << text;
  else
    writeFile(o.output, text);
  if (response.trajectory && !o.trajectory_out.empty())
    writeFile(o.trajectory_out, json::encode(*response.trajectory).dump(2) + "\n");

  std::ostream& summary = o.output.empty() ? std::cerr : out;
  summary << planStatusName(response.status);
  if (response.success())
    summary << ": " << response.waypoint_count << " waypoints, " << std::fixed << std::setprecision(3)
            << response.trajectory->duration() << " s trajectory";
  else if (!response.message.empty())
    summary << ": " << response.message;
  summary << " (planned in " << std::fixed << std::setprecision(3) << response.planning_time << " s)" << std::endl;
  return response.success() ? kExitOk : kExitFailure;
}

// ---------------------------------------------------------------- scene-check

int sceneCheck(const std::string& scene_path, const std::string& urdf_path, std::ostream& out)
{
  const json::SceneDocument doc = loadSceneOrUsage(scene_path);
  std::shared_ptr<const RobotModel> model;
  if (!urdf_path.empty())
    model = loadModelOrUsage(urdf_path);

  std::vector<std::string> violations;
  std::vector<CollisionObject> valid_objects;
  std::set<std::string> ids;
  for (const auto& object : doc.objects)
  {
    const std::string label = "object '" + object.id + "'";
    bool ok = true;
    if (object.id.empty())
    {
      violations.push_back("object with an empty id");
      ok = false;
    }
    else if (!ids.insert(object.id).second)
    {
      violations.push_back(label + ": duplicate id");
      ok = false;
    }
    try
    {
      object.shape.validate();
    }
    catch (const Error& e)
    {
      violations.push_back(label + ": " + e.what());
      ok = false;
    }
    if (!object.pose.position.allFinite() || !object.pose.orientation.coeffs().allFinite())
    {
      violations.push_back(label + ": non-finite pose");
      ok = false;
    }
    if (ok)
      valid_objects.push_back(object);
  }

  std::string robot_status;
  bool collision = false;
  if (model)
  {
    if (!doc.robot_state)
    {
      robot_status = "no robot state stored";
    }
    else
    {
      const JointState& q = *doc.robot_state;
      try
      {
        if (!withinLimits(*model, q.group, q.positions, 1e-9))
          violations.push_back("robot_state is outside joint limits");
        const CollisionReport report = robotInCollision(*model, q, valid_objects);
        collision = report.in_collision;
        if (!collision)
        {
          robot_status = "robot collision-free";
        }
        else
        {
          robot_status = "robot in collision";
          for (const auto& c : report.contacts)
            robot_status += "\n  contact: " + c.link + " vs " + c.other + (c.self ? " (self)" : "");
        }
      }
      catch (const Error& e)
      {
        violations.push_back(std::string("robot_state: ") + e.what());
        robot_status = "robot state unusable";
      }
    }
  }

  for (const auto& v : violations)
    out << "violation: " << v << "\n";
  out << doc.objects.size() << (doc.objects.size() == 1 ? " object" : " objects");
  if (!violations.empty())
    out << ", " << violations.size() << (violations.size() == 1 ? " violation" : " violations");
  if (!robot_status.empty())
    out << ", " << robot_status;
  out << std::endl;
  return violations.empty() && !collision ? kExitOk : kExitFailure;
}

// ---------------------------------------------------------------- replay

struct ReplayOptions
{
  std::string trajectory;
  std::string urdf;
  std::string format = "table";
  std::string output;
  double dt = 0.1;
};

int replay(const ReplayOptions& o, std::ostream& out)
{
  Trajectory t;
  try
  {
    t = json::decodeTrajectory(json::Json::parse(readFile(o.trajectory)));
  }
  catch (const json::Json::exception& e)
  {
    throw UsageError("trajectory file is not valid JSON: " + std::string(e.what()));
  }
  catch (const Error& e)
  {
    throw UsageError("bad trajectory file: " + std::string(e.what()));
  }
  if (t.points.empty())
    throw UsageError("trajectory has no points");
  const Eigen::Index n = t.points.front().positions.size();
  std::vector<std::string> names;
  std::vector<std::uint8_t> wrap;
  if (!o.urdf.empty())
  {
    const auto model = loadModelOrUsage(o.urdf);
    try
    {
      for (std::size_t j : model->group(t.group).actuated)
        names.push_back(model->joints()[j].name);
      wrap = continuousMask(*model, t.group);
    }
    catch (const Error& e)
    {
      throw UsageError(e.what());
    }
    if (static_cast<Eigen::Index>(names.size()) != n)
      throw UsageError("trajectory dimension does not match group '" + t.group + "'");
  }
  for (Eigen::Index j = static_cast<Eigen::Index>(names.size()); j < n; ++j)
    names.push_back("q" + std::to_string(j));

  std::ostringstream text;
  if (o.format == "svg")
  {
    text << renderSvg(t, names, wrap);
  }
  else
  {
    text << std::setw(9) << "time";
    for (const auto& name : names)
      text << std::setw(12) << name;
    text << "\n";
    const double duration = t.duration();
    const auto steps = static_cast<long>(std::floor(duration / o.dt + 1e-9));
    std::vector<double> times;
    for (long k = 0; k <= steps; ++k)
      times.push_back(static_cast<double>(k) * o.dt);
    if (times.back() < duration - 1e-9)
      times.push_back(duration);
    text << std::fixed;
    for (double time : times)
    {
      const TrajectorySample s = sampleTrajectory(t, time, wrap);
      text << std::setw(9) << std::setprecision(3) << time;
      for (Eigen::Index j = 0; j < n; ++j)
        text << std::setw(12) << std::setprecision(5) << s.positions[j];
      text << "\n";
    }
  }
  if (o.output.empty())
    out << text.str();
  else
    writeFile(o.output, text.str());
  return kExitOk;
}

}  // namespace

std::optional<std::uint64_t> seedFromEnvironment()
{
  const char* value = std::getenv("ERUPT_SEED");
  if (!value || !*value)
    return std::nullopt;
  try
  {
    std::size_t used = 0;
    const unsigned long long seed = std::stoull(value, &used, 0);
    if (used != std::strlen(value))
      throw std::invalid_argument("trailing characters");
    return seed;
  }
  catch (const std::exception&)
  {
    throw Error(ErrorCode::InvalidArgument, std::string("ERUPT_SEED is not an unsigned integer: '") + value + "'");
  }
}

std::string renderSvg(const Trajectory& trajectory, const std::vector<std::string>& joint_names,
                      const std::vector<std::uint8_t>& wrap)
{
  constexpr double width = 720, height = 400, left = 60, right = 140, top = 20, bottom = 40;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;
  const double duration = std::max(trajectory.duration(), 1e-9);
  constexpr int samples = 240;

  std::vector<Eigen::VectorXd> values;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (int k = 0; k <= samples; ++k)
  {
    values.push_back(sampleTrajectory(trajectory, duration * k / samples, wrap).positions);
    lo = std::min(lo, values.back().minCoeff());
    hi = std::max(hi, values.back().maxCoeff());
  }
  if (hi - lo < 1e-9)
  {
    lo -= 0.5;
    hi += 0.5;
  }
  auto x = [&](double t) { return left + plot_w * t / duration; };
  auto y = [&](double v) { return top + plot_h * (hi - v) / (hi - lo); };
  static const char* colors[] = { "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2" };

  std::ostringstream svg;
  svg << std::fixed << std::setprecision(2);
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\" viewBox=\"0 0 "
      << width << " " << height << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<g stroke=\"#444\" fill=\"none\">\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\"" << left + plot_w << "\" y2=\"" << top + plot_h
      << "\"/>\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + plot_h << "\"/>\n";
  svg << "</g>\n";
  for (int k = 0; k <= 4; ++k)
  {
    const double t = duration * k / 4;
    const double v = lo + (hi - lo) * k / 4;
    svg << "<text x=\"" << x(t) << "\" y=\"" << top + plot_h + 15 << "\" text-anchor=\"middle\">" << t << "</text>\n";
    svg << "<text x=\"" << left - 6 << "\" y=\"" << y(v) + 4 << "\" text-anchor=\"end\">" << v << "</text>\n";
  }
  svg << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 6 << "\" text-anchor=\"middle\">time [s]</text>\n";
  for (std::size_t j = 0; j < joint_names.size(); ++j)
  {
    const char* color = colors[j % std::size(colors)];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (int k = 0; k <= samples; ++k)
      svg << (k ? " " : "") << x(duration * k / samples) << "," << y(values[k][static_cast<Eigen::Index>(j)]);
    svg << "\"/>\n";
    svg << "<text x=\"" << left + plot_w + 10 << "\" y=\"" << top + 14 * (j + 1) << "\" fill=\"" << color << "\">"
        << joint_names[j] << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
  CLI::App app("erupt: interactive motion-planning server and tools", "erupt");
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for all subcommands");

  ServeOptions serve_opts;
  auto* serve_cmd = app.add_subcommand("serve", "Run the planning server");
  serve_cmd->add_option("--urdf", serve_opts.urdf, "Robot description")->required()->check(CLI::ExistingFile);
  serve_cmd->add_option("--scene", serve_opts.scene, "Initial scene file")->check(CLI::ExistingFile);
  serve_cmd->add_option("--tcp-port", serve_opts.tcp_port, "Framed TCP port")->capture_default_str();
  serve_cmd->add_option("--ws-port", serve_opts.ws_port, "WebSocket and HTTP port")->capture_default_str();
  serve_cmd->add_option("--bind", serve_opts.bind, "Listen address")->capture_default_str();
  serve_cmd->add_option("--static-dir", serve_opts.static_dir, "Web console bundle served over HTTP");
  serve_cmd->add_option("--log-level", serve_opts.log_level, "Log level")
      ->check(CLI::IsMember({ "trace", "debug", "info", "warn", "error", "critical", "off" }))
      ->capture_default_str();
  serve_cmd->add_option("--mirror-file", serve_opts.mirror_file, "Recorded trajectory replayed while mirroring")
      ->check(CLI::ExistingFile);
  serve_cmd->add_option("--playback-rate", serve_opts.playback_rate, "Executor and mirror playback rate")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  PlanOptions plan_opts;
  auto* plan_cmd = app.add_subcommand("plan", "Plan one request headlessly");
  plan_cmd->add_option("--urdf", plan_opts.urdf, "Robot description")->required()->check(CLI::ExistingFile);
  plan_cmd->add_option("--scene", plan_opts.scene, "Scene file")->check(CLI::ExistingFile);
  plan_cmd->add_option("--request", plan_opts.request_file, "plan_request body as JSON")->check(CLI::ExistingFile);
  plan_cmd->add_option("--group", plan_opts.group, "Planning group");
  plan_cmd->add_option("--start", plan_opts.start, "Start joint positions (default: scene robot_state)")
      ->delimiter(',');
  plan_cmd->add_option("--goal", plan_opts.goal, "Goal joint positions")->delimiter(',');
  plan_cmd->add_option("--goal-pose", plan_opts.goal_pose, "Goal tip pose x,y,z[,qw,qx,qy,qz]")->delimiter(',');
  plan_cmd->add_flag("--position-only", plan_opts.position_only, "Ignore goal orientation");
  plan_cmd->add_option("--planner", plan_opts.planner, "Planner id")->check(CLI::IsMember(plannerIds()));
  plan_cmd->add_option("--attempts", plan_opts.attempts, "Planning attempts")->check(CLI::PositiveNumber);
  plan_cmd->add_option("--time", plan_opts.time, "Planning time budget [s]")->check(CLI::PositiveNumber);
  plan_cmd->add_option("--edge-step", plan_opts.edge_step, "Edge validation step [rad]")->check(CLI::PositiveNumber);
  plan_cmd->add_option("--shortcut", plan_opts.shortcut, "Shortcut iterations")->check(CLI::NonNegativeNumber);
  plan_cmd->add_option("--seed", plan_opts.seed, "Random seed (default: ERUPT_SEED)");
  plan_cmd->add_option("--output,-o", plan_opts.output, "plan_response JSON (default: stdout)");
  plan_cmd->add_option("--trajectory-out", plan_opts.trajectory_out, "Trajectory JSON");

  std::string check_scene;
  std::string check_urdf;
  auto* check_cmd = app.add_subcommand("scene-check", "Validate a scene file");
  check_cmd->add_option("scene", check_scene, "Scene file")->required();
  check_cmd->add_option("--urdf", check_urdf, "Robot description for the collision check")->check(CLI::ExistingFile);

  ReplayOptions replay_opts;
  auto* replay_cmd = app.add_subcommand("replay", "Print a trajectory as a table or SVG plot");
  replay_cmd->add_option("trajectory", replay_opts.trajectory, "Trajectory file")->required();
  replay_cmd->add_option("--urdf", replay_opts.urdf, "Robot description for joint names")->check(CLI::ExistingFile);
  replay_cmd->add_option("--format", replay_opts.format, "table or svg")
      ->check(CLI::IsMember({ "table", "svg" }))
      ->capture_default_str();
  replay_cmd->add_option("--dt", replay_opts.dt, "Table sampling step [s]")->check(CLI::PositiveNumber)->capture_default_str();
  replay_cmd->add_option("--output,-o", replay_opts.output, "Output file (default: stdout)");

  try
  {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  }
  catch (const CLI::CallForHelp&)
  {
    const auto subs = app.get_subcommands();
    out << (subs.empty() ? app.help() : subs.front()->help());
    return kExitOk;
  }
  catch (const CLI::CallForAllHelp&)
  {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  }
  catch (const CLI::ParseError& e)
  {
    err << "error: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return kExitUsage;
  }

  try
  {
    if (serve_cmd->parsed())
      return serve(serve_opts, out);
    if (plan_cmd->parsed())
      return plan(plan_opts, out);
    if (check_cmd->parsed())
      return sceneCheck(check_scene, check_urdf, out);
    if (replay_cmd->parsed())
      return replay(replay_opts, out);
  }
  catch (const UsageError& e)
  {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  catch (const Error& e)
  {
    err << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::InvalidArgument ? kExitUsage : kExitFailure;
  }
  return kExitUsage;
}

}  // namespace erupt::cli
