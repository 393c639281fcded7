#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "vzcert/flow.hpp"
#include "vzcert/rigidity.hpp"

namespace {

using vzcert::errc;

struct run_config {
  std::string group;
  std::string qi;
  std::string out = ".";
  std::string config;
  int radius = 0;  // 0: use the command default
  int zmax = 8;
  double grid = 0.5;
  int threads = 1;
  int inner = 2;
};

void write_file(const std::filesystem::path& dir, const std::string& name, const std::string& text) {
  std::filesystem::create_directories(dir);
  std::ofstream f(dir / name, std::ios::binary);
  if (!f) throw vzcert::error(errc::precondition, "cannot write " + (dir / name).string());
  f << text;
}

// Overlay a JSON config file onto flags the user did not pass explicitly.
void apply_config(run_config& cfg, CLI::App* cmd) {
  if (cfg.config.empty()) return;
  std::ifstream in(cfg.config);
  if (!in) throw vzcert::error(errc::invalid_spec, "cannot read config " + cfg.config);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw vzcert::error(errc::invalid_spec, "config " + cfg.config + ": " + e.what());
  }
  if (!j.is_object()) throw vzcert::error(errc::invalid_spec, "config " + cfg.config + ": expected a JSON object");
  auto unset = [&](const char* flag) {
    CLI::Option* o = cmd->get_option_no_throw(flag);
    return o != nullptr && o->count() == 0;
  };
  try {
    if (j.contains("group") && unset("--group")) cfg.group = j["group"].get<std::string>();
    if (j.contains("qi") && unset("--qi")) cfg.qi = j["qi"].get<std::string>();
    if (j.contains("out") && unset("--out")) cfg.out = j["out"].get<std::string>();
    if (j.contains("radius") && unset("--radius")) cfg.radius = j["radius"].get<int>();
    if (j.contains("zmax") && unset("--zmax")) cfg.zmax = j["zmax"].get<int>();
    if (j.contains("grid") && unset("--grid")) cfg.grid = j["grid"].get<double>();
    if (j.contains("threads") && unset("--threads")) cfg.threads = j["threads"].get<int>();
    if (j.contains("inner") && unset("--inner")) cfg.inner = j["inner"].get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw vzcert::error(errc::invalid_spec, "config " + cfg.config + ": " + e.what());
  }
}

void require_group(const run_config& cfg) {
  if (cfg.group.empty())
    throw vzcert::error(errc::invalid_spec, "--group is required (flag or config file)");
}

// "builtin" or "builtin:lambda,epsilon" -> certify overrides
std::pair<double, double> parse_qi_flat(const std::string& text) {
  std::string kind = text;
  std::string args;
  std::size_t colon = text.find(':');
  if (colon != std::string::npos) {
    kind = text.substr(0, colon);
    args = text.substr(colon + 1);
  }
  if (kind != "builtin")
    throw vzcert::error(errc::invalid_spec, "unknown qi map '" + kind + "' (try builtin or builtin:lambda,epsilon)");
  if (args.empty()) return {0.0, -1.0};  // keep the model's claimed constants
  std::size_t comma = args.find(',');
  if (comma == std::string::npos)
    throw vzcert::error(errc::invalid_spec, "qi wants builtin:lambda,epsilon");
  try {
    return {std::stod(args.substr(0, comma)), std::stod(args.substr(comma + 1))};
  } catch (const std::exception&) {
    throw vzcert::error(errc::invalid_spec, "qi constants must be numeric");
  }
}

int cmd_ball(const run_config& cfg) {
  require_group(cfg);
  auto spec = vzcert::parse_group_flat(cfg.group);
  auto model = vzcert::make_model(spec);
  int radius = cfg.radius > 0 ? cfg.radius : 5;
  vzcert::ball b = vzcert::build_ball(*model, model->identity(), radius);
  std::string csv = vzcert::ball_csv(b);
  write_file(cfg.out, "ball.csv", csv);
  std::cout << "ball.csv: " << b.verts.size() << " vertices, radius " << b.radius << "\n";
  return 0;
}

int cmd_growth(const run_config& cfg) {
  require_group(cfg);
  auto spec = vzcert::parse_group_flat(cfg.group);
  auto model = vzcert::make_model(spec);
  int radius = cfg.radius > 0 ? cfg.radius : 10;
  vzcert::ball b = vzcert::build_ball(*model, model->identity(), radius);
  std::string json = vzcert::classify_growth(b).json(spec);
  write_file(cfg.out, "growth.json", json);
  std::cout << json << "\n";
  return 0;
}

int cmd_ends(const run_config& cfg) {
  require_group(cfg);
  auto spec = vzcert::parse_group_flat(cfg.group);
  auto model = vzcert::make_model(spec);
  int radius = cfg.radius > 0 ? cfg.radius : 6;
  vzcert::ball b = vzcert::build_ball(*model, model->identity(), radius);
  int ends = vzcert::count_ends(b, cfg.inner);
  nlohmann::ordered_json j;
  j["schema"] = "vzcert.ends.v1";
  j["group"] = nlohmann::ordered_json::parse(spec.json());
  j["inner"] = cfg.inner;
  j["radius"] = radius;
  j["ends"] = ends;
  std::string json = j.dump(2);
  write_file(cfg.out, "ends.json", json);
  std::cout << json << "\n";
  return 0;
}

int cmd_certify(const run_config& cfg) {
  require_group(cfg);
  auto spec = vzcert::parse_group_flat(cfg.group);
  vzcert::certify_params params;
  auto [lam, eps] = parse_qi_flat(cfg.qi);
  params.lambda_override = lam;
  params.epsilon_override = eps;
  if (cfg.radius > 0) params.verify_radius = cfg.radius;
  params.z_max = cfg.zmax;
  params.grid_step = cfg.grid;
  if (cfg.threads > 1) {
    vzcert::set_scan_threads(cfg.threads);
    params.policy = vzcert::exec::parallel;
  }
  vzcert::certificate cert = vzcert::certify_virtually_z(spec, params);
  write_file(cfg.out, "certificate.json", cert.json());
  write_file(cfg.out, "orbit.csv", cert.orbit.csv());
  write_file(cfg.out, "orbit.svg", cert.orbit.svg());
  std::cout << cert.json() << "\n";
  return cert.virtually_z() ? 0 : 2;
}

int cmd_flow_detect(const run_config& cfg) {
  require_group(cfg);
  auto spec = vzcert::parse_group_flat(cfg.group);
  vzcert::flow_detect_params params;
  if (cfg.radius > 0) params.radius = cfg.radius;
  vzcert::flow_verdict v = vzcert::detect_virtually_z_via_flow(spec, params);
  write_file(cfg.out, "verdict.json", v.json());
  if (!v.mincut.empty()) write_file(cfg.out, "mincut_table.csv", vzcert::mincut_table_csv(v.mincut));
  std::cout << v.json() << "\n";
  return v.virtually_z() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"certify that a finitely generated group quasi-isometric to the line is virtually infinite-cyclic"};
  app.require_subcommand(1);

  run_config cfg;
  auto add_common = [&](CLI::App* cmd, bool with_radius = true) {
    cmd->add_option("--group", cfg.group, "group spec, e.g. int_gens:1 or dihedral_inf");
    cmd->add_option("--out", cfg.out, "output directory (default .)");
    cmd->add_option("--config", cfg.config, "JSON config file; flags override its values");
    cmd->add_option("--threads", cfg.threads, "worker threads for the scan stages")
        ->check(CLI::PositiveNumber);
    if (with_radius) cmd->add_option("--radius", cfg.radius, "ball radius")->check(CLI::PositiveNumber);
    return cmd;
  };

  CLI::App* ball = add_common(app.add_subcommand("ball", "write the Cayley ball as CSV"));
  CLI::App* growth = add_common(app.add_subcommand("growth", "classify ball growth"));
  CLI::App* ends = add_common(app.add_subcommand("ends", "count ends outside an inner ball"));
  ends->add_option("--inner", cfg.inner, "inner ball radius (default 2)")->check(CLI::PositiveNumber);
  CLI::App* certify = add_common(app.add_subcommand("certify", "run the full line-rigidity certification"));
  certify->add_option("--qi", cfg.qi, "quasi-isometry map: builtin or builtin:lambda,epsilon")->required();
  certify->add_option("--zmax", cfg.zmax, "orbit power range")->check(CLI::PositiveNumber);
  certify->add_option("--grid", cfg.grid, "property-scan grid step")->check(CLI::PositiveNumber);
  CLI::App* flow = add_common(app.add_subcommand("flow-detect", "certify from growth alone via flows"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;  // help prints cleanly; any usage error is 1
  }

  try {
    CLI::App* active = app.get_subcommands().front();
    apply_config(cfg, active);
    if (active == ball) return cmd_ball(cfg);
    if (active == growth) return cmd_growth(cfg);
    if (active == ends) return cmd_ends(cfg);
    if (active == certify) return cmd_certify(cfg);
    if (active == flow) return cmd_flow_detect(cfg);
    return 1;
  } catch (const vzcert::error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == errc::inconclusive || e.code() == errc::indeterminate ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
