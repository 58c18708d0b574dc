#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <json.hpp>
#include <random>

#include "swarmlink/config.hpp"
#include "swarmlink/record.hpp"

namespace fs = std::filesystem;
using namespace swarmlink;

namespace {

enum Exit { kOk = 0, kUsage = 1, kConfig = 2, kDivergence = 3, kSelfTestFailed = 4 };

struct Globals {
  std::optional<std::uint64_t> seed;
  std::string config;
  std::string out_dir = ".";
  int jobs = 1;
};

ExperimentConfig load(const Globals& g) { return g.config.empty() ? ExperimentConfig{} : load_config(g.config); }

fs::path out_path(const Globals& g, const std::string& name) {
  fs::create_directories(g.out_dir);
  return fs::path(g.out_dir) / name;
}

std::string summary_line(const harness::RunSummary& s) {
  nlohmann::ordered_json j;
  j["fitness"] = s.fitness;
  j["mean_gain"] = s.mean_gain;
  j["mean_formation_error"] = s.mean_formation_error;
  j["min_separation"] = s.min_separation;
  j["steps"] = s.steps;
  j["collision"] = s.collision;
  j["divergence"] = s.divergence;
  j["mute_robot"] = s.mute_robot;
  return j.dump();
}

int cmd_train(const Globals& g) {
  auto cfg = load(g);
  if (g.seed) cfg.evolution.master_seed = *g.seed;
  const auto stats_path = out_path(g, "stats.jsonl");
  std::FILE* stats = std::fopen(stats_path.c_str(), "w");
  if (!stats) throw std::runtime_error("cannot write " + stats_path.string());
  record::write_text(out_path(g, "config.ini").string(),
                     scenario_to_text(cfg.scenario) + "\n" + evolution_to_text(cfg.evolution));
  evo::EvolveOptions opt;
  opt.jobs = g.jobs;
  opt.on_generation = [&](const evo::GenerationStats& s, const evo::Individual& best) {
    const auto line = evo::stats_json(s);
    std::fprintf(stats, "%s\n", line.c_str());
    std::fflush(stats);
    std::printf("%s\n", line.c_str());
    std::fflush(stdout);
    const int k = cfg.evolution.checkpoint_every;
    if (k > 0 && (s.generation + 1) % k == 0) {
      char name[64];
      std::snprintf(name, sizeof name, "checkpoint_gen%04d.genome", s.generation);
      ant::save_genome(best.genome, out_path(g, name).string());
    }
  };
  const auto res = evo::evolve(cfg.evolution, cfg.scenario, opt);
  std::fclose(stats);
  ant::save_genome(res.best.genome, out_path(g, "best.genome").string());
  std::printf("best fitness %.6f (individual %llu)\n", *res.best.fitness,
              static_cast<unsigned long long>(res.best.id));
  return kOk;
}

int cmd_eval(const Globals& g, const std::string& genome_path) {
  const auto cfg = load(g);
  const auto genome = genome_path.empty() ? harness::null_thrust_genome() : ant::load_genome(genome_path);
  const auto rec = harness::run_episode(cfg.scenario, genome, g.seed.value_or(1));
  record::write_record(rec, out_path(g, "run.jsonl.gz").string());
  record::write_text(out_path(g, "metrics.csv").string(), record::metrics_csv(rec));
  std::printf("%s\n", summary_line(rec.summary).c_str());
  return rec.summary.divergence ? kDivergence : kOk;
}

int cmd_beam(const Globals& g, int points) {
  const auto cfg = load(g);
  const auto& sc = cfg.scenario;
  const auto slots = sc.formation ? sc.formation->slots
                                  : harness::line_formation(static_cast<std::size_t>(sc.n_robots),
                                                            harness::default_formation_spacing(sc.wavelength))
                                        .slots;
  std::vector<Vec3> pos;
  for (const auto& s : slots) pos.push_back({s.x, s.y, 0.0});
  const auto phases = array::steering_phases(pos, sc.wavelength, sc.target());
  array::ArrayConfig ac;
  ac.wavelength = sc.wavelength;
  for (std::size_t i = 0; i < pos.size(); ++i) ac.elements.push_back({pos[i], 1.0, phases[i], true});
  const auto pattern = array::beam_pattern(ac, array::azimuth_sweep(static_cast<std::size_t>(points),
                                                                      sc.target_elevation));
  record::write_text(out_path(g, "beam.csv").string(), array::pattern_csv(pattern));
  record::write_text(out_path(g, "beam.svg").string(), record::svg_beam_polar(pattern, "Beam pattern"));
  std::printf("gain at target %.12f\n", array::normalized_gain(ac, sc.target()));
  return kOk;
}

int cmd_dsp_selftest(const Globals& g) {
  bool ok = true;
  std::mt19937_64 rng(g.seed.value_or(1));
  const dsp::GmskParams gmsk;
  dsp::Bits bits(10000);
  for (auto& b : bits) b = static_cast<std::uint8_t>(rng() & 1u);
  const auto iq = dsp::gmsk_modulate(bits, gmsk);
  const auto back = dsp::gmsk_demodulate(iq, gmsk);
  std::size_t errors = back.size() == bits.size() ? 0 : bits.size();
  for (std::size_t i = 0; i < std::min(bits.size(), back.size()); ++i) errors += bits[i] != back[i];
  std::printf("loopback: %zu bits, %zu errors\n", bits.size(), errors);
  ok = ok && errors == 0;

  const double fs = 1.0e6;
  const auto plan = comms::assign_channels({0, 1, 2, 3}, 4);
  comms::SecureLink link(comms::CipherKey::from_seed(g.seed.value_or(1)));
  std::vector<comms::Message> msgs;
  for (int id = 0; id < 4; ++id) {
    comms::Bytes payload(64);
    for (auto& b : payload) b = static_cast<std::uint8_t>(rng());
    msgs.push_back({id, payload, 0.0});
  }
  const auto res = comms::modem_roundtrip(msgs, plan, {}, gmsk, link, fs);
  std::size_t exact = 0;
  for (const auto& m : msgs) exact += std::find(res.delivered.begin(), res.delivered.end(), m) != res.delivered.end();
  const auto psd = dsp::power_spectrum(res.last_composite, 1024);
  const auto rep = dsp::analyze_fdma_spectrum(psd, 4, fs);
  double worst = 1e300;
  for (double p : rep.channel_peak_db) worst = std::min(worst, p - rep.floor_db);
  std::printf("fdma: %zu/4 payloads byte-exact, %zu peaks, at centers %s, min peak-to-floor %.1f dB\n", exact,
              rep.peak_count, rep.peaks_at_centers ? "yes" : "no", worst);
  ok = ok && exact == 4 && rep.peak_count == 4 && rep.peaks_at_centers && worst >= 20.0;
  record::write_text(out_path(g, "psd.csv").string(), dsp::psd_csv(psd));
  record::write_text(out_path(g, "psd.svg").string(), record::svg_psd(psd, "Four-channel FDMA composite"));
  dsp::write_iq_file(res.last_composite, out_path(g, "composite.iqf").string());
  std::printf("%s\n", ok ? "PASS" : "FAIL");
  return ok ? kOk : kSelfTestFailed;
}

int cmd_replay(const Globals& g, const std::string& path) {
  const auto rec = record::read_record(path);
  const auto r = record::replay(rec);
  record::write_text(out_path(g, "gain.svg").string(), record::svg_gain(rec));
  record::write_text(out_path(g, "formation_error.svg").string(), record::svg_formation_error(rec));
  record::write_text(out_path(g, "trajectories.svg").string(), record::svg_trajectories(rec, r.scenario));
  record::write_text(out_path(g, "metrics.csv").string(), record::metrics_csv(rec));
  std::printf("%s\n", summary_line(r.summary).c_str());
  if (!r.matches) {
    std::fprintf(stderr, "replayed summary differs from the recorded one\n");
    return kConfig;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"swarmlink: swarm phased-array simulator, trainer and tools"};
  app.require_subcommand(1);
  Globals g;
  std::uint64_t seed = 0;
  auto* seed_opt = app.add_option("--seed", seed, "Episode seed (eval) or master seed (train)");
  app.add_option("--config", g.config, "Experiment config file");
  app.add_option("--out-dir", g.out_dir, "Output directory")->capture_default_str();
  app.add_option("--jobs", g.jobs, "Concurrent evaluations")->check(CLI::PositiveNumber)->capture_default_str();

  auto* train = app.add_subcommand("train", "Evolve a controller; writes stats.jsonl and best.genome");
  std::string genome_path;
  auto* eval = app.add_subcommand("eval", "Run one episode; writes run.jsonl.gz and metrics.csv");
  eval->add_option("--genome", genome_path, "Genome file (null-thrust controller when omitted)");
  int points = 361;
  auto* beam = app.add_subcommand("beam", "Beam pattern of the formation steered at the target");
  beam->add_option("--points", points, "Azimuth samples")->check(CLI::Range(2, 100000));
  auto* selftest = app.add_subcommand("dsp-selftest", "GMSK loopback and four-channel FDMA check");
  std::string record_path;
  auto* replay = app.add_subcommand("replay", "Recompute metrics and plots from a run record");
  replay->add_option("record", record_path, "run.jsonl.gz")->required();
  for (auto* sub : {train, eval, beam, selftest, replay}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }
  if (seed_opt->count() > 0) g.seed = seed;

  try {
    if (*train) return cmd_train(g);
    if (*eval) return cmd_eval(g, genome_path);
    if (*beam) return cmd_beam(g, points);
    if (*selftest) return cmd_dsp_selftest(g);
    if (*replay) return cmd_replay(g, record_path);
  } catch (const ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kConfig;
  } catch (const InvalidArgument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  }
  return kUsage;
}
