#include "tpmr_cli/cli.hpp"

#include <CLI11.hpp>

#include "commands.hpp"
#include "tpmr/error.hpp"
#include "tpmr/protocol/run_session.hpp"

namespace tpmr::cli {

namespace {

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kStructural: return kExitUsage;
    case ErrorCode::kTransport: return kExitNetwork;
    case ErrorCode::kEmptyKey:
    case ErrorCode::kInvalidSample:
    case ErrorCode::kTooFewSamples:
    case ErrorCode::kProtocolViolation: return kExitDomain;
  }
  return kExitDomain;
}

void add_limits(CLI::App* app, std::uint32_t& max_iterations, std::uint32_t& max_retries) {
  app->add_option("--max-iterations", max_iterations, "Iteration budget per session")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app->add_option("--max-retries", max_retries, "Retries per iteration before giving up")
      ->capture_default_str()
      ->check(CLI::Range(1, 255));
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Error reconciliation for QKD keys with tree parity machines", "tpm-reconcile"};
  app.set_config("--config", "", "TOML file of option values; command-line flags take precedence");
  app.require_subcommand(1);
  app.set_version_flag("--version", "tpm-reconcile 0.1.0");

  SimulateKeysOptions sim;
  auto* sim_cmd = app.add_subcommand("simulate-keys", "Generate a key pair with an exact error count");
  sim_cmd->add_option("--length-bits", sim.length_bits, "Key length in bits")->required();
  sim_cmd->add_option("--qber", sim.qber, "Error rate as a fraction in [0, 0.5]")->capture_default_str();
  sim_cmd->add_option("--seed", sim.seed, "RNG seed")->capture_default_str();
  sim_cmd->add_option("--out-a", sim.out_a, "Alice's key file (hex line)")->required();
  sim_cmd->add_option("--out-b", sim.out_b, "Bob's key file (hex line)")->required();

  SyncOptions sync;
  auto* sync_cmd = app.add_subcommand("sync", "Reconcile a key with a peer over TCP");
  sync_cmd->add_option("--role", sync.role, "initiator or responder")
      ->required()
      ->check(CLI::IsMember({"initiator", "responder"}));
  auto* listen = sync_cmd->add_option("--listen", sync.listen, "host:port to accept one connection on (port 0: any)");
  auto* connect = sync_cmd->add_option("--connect", sync.connect, "host:port of the listening peer");
  listen->excludes(connect);
  sync_cmd->add_option("--key-file", sync.key_file, "Key file (first hex line is used)")->required();
  sync_cmd->add_option("--key-bits", sync.key_bits, "Key length in bits; default 8 per hex byte");
  sync_cmd->add_option("-K,--K", sync.k, "Hidden neurons")->required();
  sync_cmd->add_option("-N,--N", sync.n, "Inputs per hidden neuron")->required();
  sync_cmd->add_option("-L,--L", sync.l, "Weight bound")->required();
  add_limits(sync_cmd, sync.max_iterations, sync.max_retries);
  sync_cmd->add_option("--digest-period", sync.digest_period, "Updates between convergence checks")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sync_cmd->add_option("--seed", sync.seed, "Initiator RNG seed (random if unset)");
  sync_cmd->add_option("--out", sync.out, "Write the final key here instead of stdout");
  sync_cmd->add_option("--port-file", sync.port_file, "With --listen, write the bound port to this file");
  sync_cmd->add_option("--timeout-ms", sync.timeout_ms, "Network timeout")->capture_default_str();

  ExperimentOptions exp;
  auto* exp_cmd = app.add_subcommand("experiment", "Run Monte-Carlo synchronization trials");
  exp_cmd->add_option("--key-bits", exp.key_bits, "Key length in bits")->capture_default_str();
  exp_cmd->add_option("-L,--L", exp.l_values, "Weight bounds, comma separated")->required()->delimiter(',');
  exp_cmd->add_option("--qber", exp.qber_percents, "QBER values in percent, comma separated")
      ->required()
      ->delimiter(',');
  exp_cmd->add_option("--structures", exp.structures, "all, or NxK list such as 16x4,32x2")
      ->capture_default_str();
  exp_cmd->add_option("--trials", exp.trials, "Trials per configuration")->capture_default_str();
  exp_cmd->add_option("--seed", exp.seed, "Base seed; trial i uses seed + i")->capture_default_str();
  add_limits(exp_cmd, exp.max_iterations, exp.max_retries);
  exp_cmd->add_option("--digest-period", exp.digest_period, "Updates between convergence checks")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  exp_cmd->add_option("--threads", exp.threads, "Worker threads (0: all cores)")->capture_default_str();
  exp_cmd->add_option("--json-out", exp.json_out, "Stats JSON path (default stdout; with --trend, only when given)");
  exp_cmd->add_option("--csv-out", exp.csv_out, "Histogram CSV path");
  exp_cmd->add_option("--trend", exp.trend, "Aggregate along an axis: K, qber or L")
      ->check(CLI::IsMember({"K", "qber", "L"}));
  exp_cmd->add_option("--trend-out", exp.trend_out, "Trend CSV path (default stdout)");

  RecommendOptions rec;
  auto* rec_cmd = app.add_subcommand("recommend", "List structures with recommended iteration budgets");
  rec_cmd->add_option("--key-bits", rec.key_bits, "Key length in bits")->capture_default_str();
  rec_cmd->add_option("-L,--L", rec.l, "Weight bound")->required();
  rec_cmd->add_option("--qber", rec.qber_percent, "QBER in percent")->capture_default_str();
  rec_cmd->add_flag("--compute", rec.compute, "Run trials instead of using the bundled table");
  rec_cmd->add_option("--trials", rec.trials, "Trials per structure with --compute")->capture_default_str();
  rec_cmd->add_option("--seed", rec.seed, "Base seed with --compute")->capture_default_str();
  rec_cmd->add_option("--threads", rec.threads, "Worker threads (0: all cores)")->capture_default_str();

  AttackOptions atk;
  auto* atk_cmd = app.add_subcommand("attack-sim", "Measure a passive eavesdropper's progress");
  atk_cmd->add_option("--key-bits", atk.key_bits, "Key length in bits")->capture_default_str();
  atk_cmd->add_option("-K,--K", atk.k, "Hidden neurons")->required();
  atk_cmd->add_option("-N,--N", atk.n, "Inputs per hidden neuron")->required();
  atk_cmd->add_option("-L,--L", atk.l, "Weight bound")->required();
  atk_cmd->add_option("--qber", atk.qber_percent, "QBER in percent")->capture_default_str();
  atk_cmd->add_option("--trials", atk.trials, "Number of trials")->capture_default_str();
  atk_cmd->add_option("--seed", atk.seed, "Base seed")->capture_default_str();
  add_limits(atk_cmd, atk.max_iterations, atk.max_retries);
  atk_cmd->add_option("--threads", atk.threads, "Worker threads (0: all cores)")->capture_default_str();

  std::vector<const char*> argv{"tpm-reconcile"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (sim_cmd->parsed()) return cmd_simulate_keys(sim, out, err);
    if (sync_cmd->parsed()) return cmd_sync(sync, out, err);
    if (exp_cmd->parsed()) return cmd_experiment(exp, out, err);
    if (rec_cmd->parsed()) return cmd_recommend(rec, out, err);
    if (atk_cmd->parsed()) return cmd_attack_sim(atk, out, err);
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const protocol::SessionAborted& e) {
    err << "error: " << e.what() << '\n';
    return kExitDomain;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    const int code = exit_code_for(e.code());
    if (code == kExitUsage) err << "run with --help for usage\n";
    return code;
  }
  return kExitUsage;
}

}  // namespace tpmr::cli
