#include <charconv>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "sealbid/harness.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitInvariant = 1;
constexpr int kExitConfig = 2;

std::vector<std::string> split(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    if (!part.empty()) out.push_back(part);
  }
  return out;
}

std::size_t parse_count(const std::string& s) {
  std::size_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) throw std::invalid_argument("bad bidder count '" + s + "'");
  return v;
}

// "1-20", "1,2,8" or a mix of both
std::vector<std::size_t> parse_bidders(const std::string& text) {
  std::vector<std::size_t> out;
  for (const auto& part : split(text)) {
    const auto dash = part.find('-');
    if (dash == std::string::npos) {
      out.push_back(parse_count(part));
      continue;
    }
    const std::size_t lo = parse_count(part.substr(0, dash));
    const std::size_t hi = parse_count(part.substr(dash + 1));
    if (hi < lo) throw std::invalid_argument("empty range '" + part + "'");
    for (std::size_t n = lo; n <= hi; ++n) out.push_back(n);
  }
  return out;
}

std::string winner_text(const std::optional<std::size_t>& w) { return w ? "bidder " + std::to_string(*w) : "none"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sealed-bid cross-chain auction simulator"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run a scenario and check the invariant suite");
  std::string run_path;
  std::optional<std::uint64_t> run_seed;
  std::string out_dir;
  bool as_json = false;
  run->add_option("scenario", run_path, "Scenario file")->required();
  run->add_option("--seed", run_seed, "Override the scenario seed");
  run->add_option("--out-dir", out_dir, "Write events.jsonl, audit.jsonl and report.json here");
  run->add_flag("--json", as_json, "Print the report as JSON");

  auto* oracle = app.add_subcommand("oracle", "Recompute the outcome from the funding plan alone");
  std::string oracle_path;
  oracle->add_option("scenario", oracle_path, "Scenario file")->required();

  auto* plot = app.add_subcommand("plot", "Write end-phase gas against bidder count as CSV");
  std::string modes = "exhaustive,proposer_based";
  std::string pricing = "default,adjusted";
  std::string bidders = "1-20";
  std::string plot_out;
  plot->add_option("--modes", modes, "Comma-separated resolution modes")->capture_default_str();
  plot->add_option("--pricing", pricing, "Comma-separated pricing variants")->capture_default_str();
  plot->add_option("--bidders", bidders, "Bidder counts, e.g. 1-20 or 1,4,8")->capture_default_str();
  plot->add_option("--out", plot_out, "Output file (stdout if omitted)");

  auto* verify = app.add_subcommand("verify-log", "Check sequence, attestations and payload signers of an event log");
  std::string log_path;
  verify->add_option("events", log_path, "events.jsonl")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitConfig;
  }

  using namespace sealbid;
  try {
    if (*run) {
      harness::RunOptions opts;
      opts.seed = run_seed;
      if (!out_dir.empty()) opts.out_dir = out_dir;
      const auto report = harness::run_scenario_file(run_path, opts);
      if (as_json) {
        std::cout << report.to_json().dump(2) << '\n';
      } else {
        std::cout << report.summary();
      }
      return report.passed() ? kExitPass : kExitInvariant;
    }
    if (*oracle) {
      const auto s = harness::load_scenario(oracle_path);
      const auto r = harness::oracle_resolve(s);
      std::cout << "winner: " << winner_text(r.winner) << "\namount: " << r.amount << '\n';
      if (!r.winner && r.tied.size() > 1) {
        std::cout << "tied:";
        for (auto i : r.tied) std::cout << ' ' << i;
        std::cout << " (settled by escrow address at run time)\n";
      }
      return kExitPass;
    }
    if (*plot) {
      std::vector<ResolutionMode> mode_list;
      for (const auto& m : split(modes)) mode_list.push_back(parse_resolution_mode(m));
      const auto variants = split(pricing);
      for (const auto& v : variants) (void)gas::GasPricing::named(ResolutionMode::exhaustive, v);
      const auto counts = parse_bidders(bidders);
      if (plot_out.empty()) {
        gas::write_plot_csv(std::cout, mode_list, variants, counts);
      } else {
        harness::emit_plot_data(mode_list, variants, counts, plot_out);
      }
      return kExitPass;
    }
    if (*verify) {
      const auto v = harness::verify_log_file(log_path);
      std::cout << v.events << " events, " << v.attested << " attested, " << v.unattested << " unattested, "
                << v.payloads_checked << " payloads checked\n";
      for (const auto& e : v.errors) std::cout << "error: " << e << '\n';
      std::cout << (v.ok ? "OK" : "FAILED") << '\n';
      return v.ok ? kExitPass : kExitInvariant;
    }
  } catch (const harness::ScenarioError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitPass;
}
