// auctionforge: build simple near-optimal multi-item auctions and audit them.
//
// Exit codes: 0 success, 2 malformed instance, 3 degenerate instance,
// 4 solver cap exceeded, 5 audit alarm (a mechanism claiming DT/IR failed its
// audit). CLI11 reports its own usage errors with its default codes.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "auctionforge/audit.hpp"
#include "auctionforge/lp.hpp"
#include "auctionforge/menu.hpp"
#include "auctionforge/partition.hpp"
#include "auctionforge/pipeline.hpp"

namespace {

using namespace auctionforge;

constexpr int kExitMalformed = 2;
constexpr int kExitDegenerate = 3;
constexpr int kExitCapExceeded = 4;
constexpr int kExitAuditAlarm = 5;

struct CommonArgs {
  std::string instance_path;
  std::optional<double> epsilon;
  std::optional<double> delta;
  int samples = 10000;
  std::optional<std::uint64_t> seed;
  std::string concept_name = "bic";
  std::optional<std::uint64_t> dispatch_threshold;
  std::string out_path;
  std::string format = "json";
};

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read file: " + path);
  return nlohmann::json::parse(in);
}

AuctionInstance load_instance(const CommonArgs& args) {
  nlohmann::json doc = read_json_file(args.instance_path);
  if (args.epsilon) doc["epsilon"] = *args.epsilon;
  if (args.delta) doc["delta"] = *args.delta;
  if (args.seed) doc["seed"] = *args.seed;
  return AuctionInstance::from_json(doc);
}

void write_output(const CommonArgs& args, const std::string& payload) {
  if (args.out_path.empty()) {
    std::cout << payload;
    return;
  }
  std::ofstream out(args.out_path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot write file: " + args.out_path);
  out << payload;
}

BuildOptions build_options(const CommonArgs& args) {
  BuildOptions opts;
  opts.concept_kind = solution_concept_from_string(args.concept_name);
  opts.dispatch_threshold_override = args.dispatch_threshold;
  return opts;
}

AuditOptions audit_options(const CommonArgs& args,
                           const AuctionInstance& instance) {
  AuditOptions opts;
  opts.samples = args.samples;
  opts.seed = args.seed.value_or(instance.seed());
  return opts;
}

int cmd_partition(const CommonArgs& args) {
  AuctionInstance instance = load_instance(args);
  RangeRatioResult rr = range_ratio(instance, instance.epsilon(), instance.seed());
  std::vector<double> maxes = expected_maxes(instance, 100000, instance.seed());
  Partition part =
      partition_items(maxes, rr.c, instance.epsilon(), instance.delta());

  write_output(args, part.to_json().dump(2) + "\n");
  double r_bound = (16.0 * rr.c * rr.c /
                    (instance.epsilon() * instance.epsilon() * instance.epsilon())) *
                   std::log(2.0 / instance.delta());
  std::cout << "partition: |R|=" << part.R.size() << " (bound "
            << static_cast<std::uint64_t>(r_bound) << "), |S|=" << part.S.size()
            << ", |T|=" << part.T.size() << ", ellStar=" << part.ellStar
            << ", sHat=" << part.sHat << ", c=" << rr.c << "\n";
  return 0;
}

int cmd_build(const CommonArgs& args) {
  AuctionInstance instance = load_instance(args);
  BuiltMechanism built = build_ptas_mechanism(instance, build_options(args));
  for (const auto& w : built.warnings) std::cerr << "warning: " << w << "\n";
  write_output(args, built.metadata.dump(2) + "\n");
  std::cout << "built " << built.mechanism->name() << " ("
            << built.metadata.at("route").get<std::string>() << " route)\n";
  return 0;
}

int cmd_audit(const CommonArgs& args, const std::string& mechanism_path) {
  AuctionInstance instance = load_instance(args);
  MechanismPtr mech;
  if (!mechanism_path.empty()) {
    nlohmann::json doc = read_json_file(mechanism_path);
    mech = mechanism_from_json(doc.contains("mechanism") ? doc.at("mechanism")
                                                         : doc);
  } else {
    mech = build_ptas_mechanism(instance, build_options(args)).mechanism;
  }

  AuditReport report = run_audit(*mech, instance, audit_options(args, instance));
  if (args.format == "csv")
    write_output(args, AuditReport::csv_header() + "\n" + report.csv_row() + "\n");
  else
    write_output(args, report.to_json().dump(2) + "\n");

  std::cout << "audit: mechanism=" << report.mechanismName
            << " revenue=" << report.revenueMean
            << " welfare=" << report.welfareMean
            << " irViolations=" << report.irViolations
            << " regret=" << report.regretMaxObserved
            << (report.alarm ? " ALARM" : "") << "\n";
  return report.alarm ? kExitAuditAlarm : 0;
}

int cmd_lp_export(const CommonArgs& args) {
  AuctionInstance instance = load_instance(args);
  SolutionConcept sc = solution_concept_from_string(args.concept_name);
  if (sc != SolutionConcept::IC && sc != SolutionConcept::BIC)
    throw std::invalid_argument("lp-export needs --concept ic or bic");
  LPModel model = build_lp(instance, sc);
  write_output(args, export_lp_text(model));
  std::cout << "exported LP with " << model.num_variables << " variables, "
            << model.lp.rows.size() << " rows\n";
  return 0;
}

int cmd_sweep(const CommonArgs& args, int count,
              const std::string& mechanism_path) {
  AuctionInstance instance = load_instance(args);
  MechanismPtr mech;
  if (!mechanism_path.empty()) {
    nlohmann::json doc = read_json_file(mechanism_path);
    mech = mechanism_from_json(doc.contains("mechanism") ? doc.at("mechanism")
                                                         : doc);
  } else {
    mech = build_ptas_mechanism(instance, build_options(args)).mechanism;
  }

  AuditOptions base = audit_options(args, instance);
  std::string csv = AuditReport::csv_header() + "\n";
  nlohmann::json rows = nlohmann::json::array();
  bool alarm = false;
  for (int k = 0; k < count; ++k) {
    AuditOptions opts = base;
    opts.seed = base.seed + static_cast<std::uint64_t>(k);
    AuditReport report = run_audit(*mech, instance, opts);
    alarm = alarm || report.alarm;
    csv += report.csv_row() + "\n";
    rows.push_back(report.to_json());
  }
  write_output(args, args.format == "csv" ? csv : rows.dump(2) + "\n");
  std::cout << "sweep: " << count << " audits of " << mech->name()
            << (alarm ? " ALARM" : "") << "\n";
  return alarm ? kExitAuditAlarm : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"simple near-optimal multi-item auctions: build and audit"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string mechanism_path;
  int sweep_count = 5;

  auto add_common = [&](CLI::App* cmd, bool needs_instance = true) {
    auto* opt = cmd->add_option("--instance", args.instance_path,
                                "instance JSON file");
    if (needs_instance) opt->required();
    cmd->add_option("--epsilon", args.epsilon, "override instance epsilon");
    cmd->add_option("--delta", args.delta, "override instance delta");
    cmd->add_option("--samples", args.samples, "Monte Carlo replicates")
        ->check(CLI::Range(100, 100000000));
    cmd->add_option("--seed", args.seed, "master seed (default: instance seed)");
    cmd->add_option("--concept", args.concept_name,
                    "solution concept: dt | ic | bic");
    cmd->add_option("--dispatch-threshold", args.dispatch_threshold,
                    "override the population dispatch threshold");
    cmd->add_option("--out", args.out_path, "output file (default stdout)");
    cmd->add_option("--format", args.format, "json | csv")
        ->check(CLI::IsMember({"json", "csv"}));
  };

  auto* partition = app.add_subcommand("partition", "split items into R/S/T");
  add_common(partition);

  auto* build =
      app.add_subcommand("build", "construct the mechanism for an instance");
  add_common(build);

  auto* audit = app.add_subcommand("audit", "replay and audit a mechanism");
  add_common(audit);
  audit->add_option("--mechanism", mechanism_path,
                    "mechanism metadata file from `build` (default: rebuild)");

  auto* lp_export = app.add_subcommand("lp-export", "write the exact LP as text");
  add_common(lp_export);

  auto* sweep = app.add_subcommand("sweep", "batch audits over consecutive seeds");
  add_common(sweep);
  sweep->add_option("--mechanism", mechanism_path, "mechanism metadata file");
  sweep->add_option("--count", sweep_count, "number of audits")
      ->check(CLI::Range(1, 10000));

  CLI11_PARSE(app, argc, argv);

  try {
    if (partition->parsed()) return cmd_partition(args);
    if (build->parsed()) return cmd_build(args);
    if (audit->parsed()) return cmd_audit(args, mechanism_path);
    if (lp_export->parsed()) return cmd_lp_export(args);
    if (sweep->parsed()) return cmd_sweep(args, sweep_count, mechanism_path);
  } catch (const auctionforge::InstanceTooLargeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCapExceeded;
  } catch (const auctionforge::DegenerateInstanceError& e) {
    std::cerr << "error: degenerate instance: " << e.what() << "\n";
    return kExitDegenerate;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: malformed input: " << e.what() << "\n";
    return kExitMalformed;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitMalformed;
  }
  return 0;
}
