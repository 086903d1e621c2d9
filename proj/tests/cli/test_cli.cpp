// End-to-end checks of the command line tool: every subcommand once over a
// tiny corpus, plus the exit-code and error-format contract. The tool binary
// path arrives as the first program argument.
#define DOCTEST_CONFIG_IMPLEMENT
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include "doctest.h"
#include "sfisep/wav.hpp"

namespace {

std::string g_tool;
std::filesystem::path g_work;

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Runs the tool with the given arguments, capturing both streams.
RunResult run(const std::string& args) {
  const auto out_path = g_work / "stdout.txt";
  const auto err_path = g_work / "stderr.txt";
  const std::string cmd =
      g_tool + " " + args + " >" + out_path.string() + " 2>" + err_path.string();
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out_path);
  r.err = slurp(err_path);
  return r;
}

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("bad invocations fail with usage errors on stderr") {
  const RunResult none = run("");
  CHECK(none.exit_code == 2);
  CHECK(contains(none.err, "error[usage]:"));

  const RunResult unknown = run("frobnicate");
  CHECK(unknown.exit_code == 2);
  CHECK(contains(unknown.err, "error[usage]:"));

  const RunResult missing = run("resample in.wav out.wav");  // --fs is required
  CHECK(missing.exit_code == 2);
  CHECK(contains(missing.err, "error[usage]:"));

  const RunResult help = run("--help");
  CHECK(help.exit_code == 0);
  CHECK(contains(help.out, "synth-data"));
}

TEST_CASE("missing or broken inputs fail with data errors") {
  const RunResult no_corpus =
      run("train --corpus " + (g_work / "nowhere").string() + " --val " +
          (g_work / "nowhere").string() + " --out " + (g_work / "m.sfis").string());
  CHECK(no_corpus.exit_code == 3);
  CHECK(contains(no_corpus.err, "error["));

  const auto junk = g_work / "junk.sfis";
  std::ofstream(junk, std::ios::binary) << "RIFFnot a model";
  const RunResult bad_model = run("inspect " + junk.string());
  CHECK(bad_model.exit_code == 3);
  CHECK(contains(bad_model.err, "error["));
}

TEST_CASE("the full tool chain round-trips on a tiny corpus") {
  namespace fs = std::filesystem;
  const fs::path train_dir = g_work / "train";
  const fs::path val_dir = g_work / "val";
  const fs::path model_path = g_work / "model.sfis";

  // synth-data writes a loadable corpus
  RunResult r = run("synth-data --out " + train_dir.string() +
                    " --count 3 --fs 8000 --seed 9 --duration 1.0");
  REQUIRE(r.exit_code == 0);
  CHECK(fs::exists(train_dir / "manifest.json"));
  CHECK(fs::exists(train_dir / "item000_mixture.wav"));

  r = run("synth-data --out " + val_dir.string() +
          " --count 2 --fs 8000 --seed 10 --duration 1.0");
  REQUIRE(r.exit_code == 0);

  // train a deliberately tiny model for a couple of epochs
  r = run("train --corpus " + train_dir.string() + " --val " + val_dir.string() + " --out " +
          model_path.string() + " --report " + (g_work / "train.json").string() +
          " --blocks 2 --filters 4 --frame-num 342 --frame-den 8000" +
          " --patience 2 --max-epochs 2 --seed 3");
  REQUIRE(r.exit_code == 0);
  REQUIRE(fs::exists(model_path));
  CHECK(contains(slurp(g_work / "train.json"), "\"best_epoch\""));

  // inspect reports the geometry and parameter count
  r = run("inspect " + model_path.string());
  CHECK(r.exit_code == 0);
  CHECK(contains(r.out, "sampling frequency: 8000 Hz"));
  CHECK(contains(r.out, "frame/hop/bins: 342/171/172"));
  CHECK(contains(r.out, "channel mode: mono"));
  CHECK(contains(r.out, "parameters: "));

  // separate emits an additive foreground/background pair
  const fs::path mix_path = train_dir / "item000_mixture.wav";
  const fs::path sep_dir = g_work / "sep";
  r = run("separate --model " + model_path.string() + " " + mix_path.string() + " --out " +
          sep_dir.string());
  REQUIRE(r.exit_code == 0);
  const sfisep::AudioBuffer mix = sfisep::read_wav(mix_path.string());
  const sfisep::AudioBuffer fg =
      sfisep::read_wav((sep_dir / "item000_mixture_foreground.wav").string());
  const sfisep::AudioBuffer bg =
      sfisep::read_wav((sep_dir / "item000_mixture_background.wav").string());
  REQUIRE(fg.sample_count() == mix.sample_count());
  REQUIRE(bg.sample_count() == mix.sample_count());
  double max_err = 0;
  for (std::size_t i = 0; i < mix.channels[0].size(); ++i)
    max_err = std::max(max_err,
                       std::abs(fg.channels[0][i] + bg.channels[0][i] - mix.channels[0][i]));
  CHECK(max_err < 1e-5);  // additive up to float32 WAV rounding

  // separation is deterministic: a second run reproduces the files exactly
  const fs::path sep2_dir = g_work / "sep2";
  r = run("separate --model " + model_path.string() + " " + mix_path.string() + " --out " +
          sep2_dir.string());
  REQUIRE(r.exit_code == 0);
  CHECK(slurp(sep_dir / "item000_mixture_foreground.wav") ==
        slurp(sep2_dir / "item000_mixture_foreground.wav"));

  // resample changes the rate and scales the length
  const fs::path mix32 = g_work / "mix32.wav";
  r = run("resample " + mix_path.string() + " " + mix32.string() + " --fs 32000");
  REQUIRE(r.exit_code == 0);
  const sfisep::AudioBuffer up = sfisep::read_wav(mix32.string());
  CHECK(up.fs_hz == 32000);
  CHECK(up.sample_count() == 4 * mix.sample_count());

  // transfer re-targets the model; the new geometry shows up in inspect
  const fs::path stats_dir = g_work / "stats32";
  r = run("synth-data --out " + stats_dir.string() +
          " --count 2 --fs 32000 --seed 9 --duration 1.0");
  REQUIRE(r.exit_code == 0);
  const fs::path model32_path = g_work / "model32.sfis";
  r = run("transfer --model " + model_path.string() + " --fs 32000 --stats " +
          stats_dir.string() + " --out " + model32_path.string());
  REQUIRE(r.exit_code == 0);
  r = run("inspect " + model32_path.string());
  CHECK(r.exit_code == 0);
  CHECK(contains(r.out, "sampling frequency: 32000 Hz"));
  CHECK(contains(r.out, "frame/hop/bins: 1368/684/688"));

  // the transferred model separates the resampled mixture
  r = run("separate --model " + model32_path.string() + " " + mix32.string() + " --out " +
          (g_work / "sep32").string());
  CHECK(r.exit_code == 0);

  // evaluate writes both report formats
  const fs::path eval_dir = g_work / "eval";
  r = run("evaluate --model " + model_path.string() + " --corpus " + val_dir.string() +
          " --out " + eval_dir.string());
  REQUIRE(r.exit_code == 0);
  const std::string report_json = slurp(eval_dir / "report.json");
  CHECK(report_json.front() == '{');
  CHECK(contains(report_json, "\"delta_sdr\""));
  CHECK(!slurp(eval_dir / "report.txt").empty());
}

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: %s <path-to-tool> [doctest options]\n", argv[0]);
    return 1;
  }
  g_tool = argv[1];
  g_work = std::filesystem::temp_directory_path() /
           ("sfisep_cli_" + std::to_string(static_cast<unsigned>(::getpid())));
  std::filesystem::create_directories(g_work);

  doctest::Context context;
  context.applyCommandLine(argc - 1, argv + 1);
  const int rc = context.run();
  std::filesystem::remove_all(g_work);
  return rc;
}
